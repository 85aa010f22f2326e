import numpy as np
import pytest
from scipy.special import ndtr

from baslib.benchmarks import SAFE_SET_CS1, build_benchmark
from baslib.errors import InvalidParameter
from baslib.reach import Box
from baslib.stochastic import (
    GaussianKernel,
    Policy,
    SafetySpec,
    build_kernel_cs1_2d,
    compose_guarantee,
    fold_disturbances,
    grid_abstraction,
    kernel_policy_safety,
    refine_policy,
    safety_value_iteration,
)


@pytest.fixture(scope="module")
def kernel2d():
    return build_kernel_cs1_2d()


def test_cs1_2d_kernel_construction(kernel2d):
    # radiator columns folded at the 35 degC steady value
    np.testing.assert_allclose(kernel2d.q, [4.3576, 3.6608], atol=1e-4)
    np.testing.assert_allclose(
        kernel2d.a, [[0.6682, 0.0], [0.0, 0.6830]], atol=1e-12
    )
    np.testing.assert_allclose(kernel2d.variances, [0.0774 ** 2] * 2, atol=1e-12)
    assert (kernel2d.u_lo[0], kernel2d.u_hi[0]) == (15.0, 22.0)


def test_cs1_2d_mean_map_hand_value(kernel2d):
    # coordinate 1 at x = (20, 20), u = 20:
    # 0.6682*20 + 0*20 + 0.1320*20 + 4.3576 = 20.3616 by direct arithmetic
    mu = kernel2d.mean(np.array([20.0, 20.0]), np.array([20.0]))
    assert mu[0] == pytest.approx(0.6682 * 20 + 0.1320 * 20 + 4.3576, abs=1e-12)
    assert mu[0] == pytest.approx(20.3616, abs=1e-12)
    assert mu[1] == pytest.approx(0.6830 * 20 + 0.1402 * 20 + 3.6608, abs=1e-12)


def test_near_zero_variance_concentrates_mass(kernel2d):
    tiny = GaussianKernel(
        kernel2d.a, kernel2d.b, kernel2d.q, np.full(2, 1e-12),
        kernel2d.u_lo, kernel2d.u_hi,
    )
    spec = SafetySpec(SAFE_SET_CS1, 1)
    mdp = grid_abstraction(tiny, spec, 10, np.array([17.3]))
    # pick a cell whose image lands inside the box, away from cell edges
    x = np.array([20.0, 19.9])
    target = tiny.mean(x, np.array([17.3]))
    assert SAFE_SET_CS1.contains(target)
    probs, unsafe = mdp.row(mdp.cell_of(x), 0)
    assert probs.max() == pytest.approx(1.0, abs=1e-9)
    assert int(probs.argmax()) == mdp.cell_of(target)
    assert unsafe == pytest.approx(0.0, abs=1e-9)


def test_single_cell_grid_matches_direct_gaussian_mass(kernel2d):
    spec = SafetySpec(SAFE_SET_CS1, 1)
    mdp = grid_abstraction(kernel2d, spec, 1, np.array([18.0]))
    probs, unsafe = mdp.row(0, 0)
    mu = kernel2d.mean(np.array([20.0, 20.0]), np.array([18.0]))
    sd = kernel2d.stds
    # direct bivariate-box mass as the oracle (independent axes)
    want = 1.0
    for ax in range(2):
        want *= ndtr((20.5 - mu[ax]) / sd[ax]) - ndtr((19.5 - mu[ax]) / sd[ax])
    assert probs[0] == pytest.approx(want, abs=1e-12)
    assert unsafe == pytest.approx(1.0 - want, abs=1e-12)


def test_huge_variance_escapes(kernel2d):
    wide = GaussianKernel(
        kernel2d.a, kernel2d.b, kernel2d.q, np.full(2, 1e4),
        kernel2d.u_lo, kernel2d.u_hi,
    )
    mdp = grid_abstraction(wide, SafetySpec(SAFE_SET_CS1, 1), 1, np.array([18.0]))
    probs, unsafe = mdp.row(0, 0)
    assert probs[0] < 1e-2
    assert unsafe > 0.99


def test_row_sums_to_one_over_random_pairs(kernel2d):
    spec = SafetySpec(SAFE_SET_CS1, 6)
    mdp = grid_abstraction(kernel2d, spec, 12, np.linspace(15, 22, 5))
    rng = np.random.default_rng(8)
    for _ in range(1000):
        c = int(rng.integers(mdp.n_cells))
        a = int(rng.integers(mdp.n_actions))
        probs, unsafe = mdp.row(c, a)
        assert probs.sum() + unsafe == pytest.approx(1.0, abs=1e-9)
        assert unsafe >= -1e-12 and np.all(probs >= 0)


def test_value_iteration_zero_horizon(kernel2d):
    mdp = grid_abstraction(kernel2d, SafetySpec(SAFE_SET_CS1, 0), 5,
                           np.array([18.0]))
    vi = safety_value_iteration(mdp, 0)
    np.testing.assert_array_equal(vi.final, np.ones(25))


def test_single_cell_analytic_power():
    # calibrate sigma so the stay probability from the center is exactly 1/2,
    # then V_2 = (1/2)^2
    from scipy.stats import norm

    sigma = 0.5 / norm.ppf(0.75)
    kern = GaussianKernel(np.array([[1.0]]), np.array([[0.0]]), np.array([0.0]),
                          np.array([sigma ** 2]), np.array([0.0]), np.array([0.0]))
    box = Box(np.array([-0.5]), np.array([0.5]))
    mdp = grid_abstraction(kern, SafetySpec(box, 2), 1, np.array([0.0]))
    probs, _ = mdp.row(0, 0)
    assert probs[0] == pytest.approx(0.5, abs=1e-12)
    vi = safety_value_iteration(mdp, 2)
    assert vi.final[0] == pytest.approx(0.25, abs=1e-9)


def test_value_iteration_vs_matrix_power_oracle(kernel2d):
    # under a single fixed action, V_N equals the N-step substochastic kernel
    # power applied to the all-ones vector; check on a small grid
    mdp = grid_abstraction(kernel2d, SafetySpec(SAFE_SET_CS1, 4), 2,
                           np.array([19.0]))
    p = np.array([mdp.row(c, 0)[0] for c in range(mdp.n_cells)])
    vi = safety_value_iteration(mdp, 4)
    want = np.linalg.matrix_power(p, 4) @ np.ones(mdp.n_cells)
    np.testing.assert_allclose(vi.final, want, atol=1e-10)


def test_values_bounded_and_monotone_in_horizon(kernel2d):
    mdp = grid_abstraction(kernel2d, SafetySpec(SAFE_SET_CS1, 6), 15,
                           np.linspace(15, 22, 7))
    vi = safety_value_iteration(mdp, 6)
    assert np.all(vi.values >= 0.0) and np.all(vi.values <= 1.0)
    for k in range(6):
        assert np.all(vi.values[k + 1] <= vi.values[k] + 1e-12)


def test_greedy_policy_mc_agreement(kernel2d):
    mdp = grid_abstraction(kernel2d, SafetySpec(SAFE_SET_CS1, 6), 20,
                           np.linspace(15, 22, 9))
    vi = safety_value_iteration(mdp, 6)
    rng = np.random.default_rng(77)
    for c in rng.integers(0, mdp.n_cells, size=4):
        est = kernel_policy_safety(mdp, vi.policy, mdp.cell_center(int(c)), 6,
                                   6000, seed=int(c))
        assert abs(est - vi.final[int(c)]) < 0.03


def test_eta_formula(kernel2d):
    mdp = grid_abstraction(kernel2d, SafetySpec(SAFE_SET_CS1, 6), 40,
                           np.linspace(15, 22, 15))
    h = 1.0 / 40
    want = (0.6682 + 0.6830) * (h / 2) / (0.0774 * np.sqrt(2 * np.pi))
    assert mdp.eta == pytest.approx(want, abs=1e-12)


def test_cell_snapping(kernel2d):
    mdp = grid_abstraction(kernel2d, SafetySpec(SAFE_SET_CS1, 1), 4,
                           np.array([18.0]))
    below = mdp.cell_of(np.array([10.0, 10.0]))
    assert below == 0
    above = mdp.cell_of(np.array([99.0, 99.0]))
    assert above == mdp.n_cells - 1


def test_refined_controller(kernel2d):
    mdp = grid_abstraction(kernel2d, SafetySpec(SAFE_SET_CS1, 3), 4,
                           np.array([17.0, 20.0]))
    # constant abstract policy: always the second action
    actions = np.ones((3, mdp.n_cells), dtype=np.int64)
    policy = Policy(actions, mdp.actions)
    ctl = refine_policy(policy, mdp, lambda x: np.asarray(x)[..., :2])
    for x in ([19.7, 20.1], [0.0, 0.0], [99.0, 50.0]):
        assert ctl.control(np.array(x), 0, 3)[0] == 20.0
    batch = ctl.control_batch(np.array([[19.7, 20.1], [0.0, 0.0]]), 0, 3)
    np.testing.assert_array_equal(batch[:, 0], [20.0, 20.0])


def test_compose_guarantee_values():
    assert compose_guarantee(0.9257, 0.005, 16, 0.01) == pytest.approx(0.7607, abs=1e-12)
    assert compose_guarantee(1.0, 0.0, 99, 0.0) == 1.0
    assert compose_guarantee(0.5, 0.1, 4, 0.05) == pytest.approx(0.2, abs=1e-12)
    assert compose_guarantee(0.1, 0.5, 16, 0.01) == 0.0
    with pytest.raises(InvalidParameter):
        compose_guarantee(-0.1, 0.0, 1, 0.0)


def test_fold_disturbances_exact_moments():
    abs1 = build_benchmark("cs2-abs1")
    kern = fold_disturbances(abs1.model, abs1.disturbances, 15.0, 30.0)
    f = abs1.model.f[0]
    means = abs1.disturbances.means
    stds = abs1.disturbances.stds
    assert kern.q[0] == pytest.approx(0.2482 + f @ means, abs=1e-15)
    assert kern.variances[0] == pytest.approx(((f * stds) ** 2).sum(), abs=1e-18)
    # sampling oracle: moments of F d match the folded Gaussian
    rng = np.random.default_rng(1)
    d = abs1.disturbances.sample(rng, 200_000)
    vals = d @ f
    assert vals.mean() == pytest.approx(f @ means, rel=1e-2)
    assert vals.std() == pytest.approx(np.sqrt(kern.variances[0]), rel=1e-2)


def test_degenerate_fold_rejected():
    det = build_benchmark("cs1-det")
    from baslib.benchmarks import DisturbanceLaw

    law = DisturbanceLaw((), np.zeros(0), np.zeros(0))
    with pytest.raises(InvalidParameter):
        fold_disturbances(det.model, law, 15.0, 22.0)


def test_grid_abstraction_validation(kernel2d):
    spec = SafetySpec(SAFE_SET_CS1, 2)
    with pytest.raises(InvalidParameter):
        grid_abstraction(kernel2d, spec, 0, np.array([18.0]))
    with pytest.raises(InvalidParameter):
        grid_abstraction(kernel2d, spec, 5, np.zeros((0,)))
    with pytest.raises(InvalidParameter):
        SafetySpec(SAFE_SET_CS1, -1)
