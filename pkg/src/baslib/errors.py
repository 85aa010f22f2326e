"""Exception types shared across the library.

All errors derive from :class:`BasError` so callers can catch library
failures with a single except clause; each subclass also derives from the
closest builtin (ValueError/KeyError) to stay idiomatic.
"""


class BasError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(BasError, ValueError):
    """A vector or matrix does not match the channel space it belongs to."""

    def __init__(self, space_label: str, expected: int, got: int):
        self.space_label = space_label
        self.expected = expected
        self.got = got
        super().__init__(
            f"dimension mismatch on channel space {space_label!r}: "
            f"expected {expected}, got {got}"
        )


class UnknownChannel(BasError, KeyError):
    def __init__(self, name: str, space_label: str, available):
        self.name = name
        self.space_label = space_label
        super().__init__(
            f"unknown channel {name!r} in space {space_label!r}; "
            f"available: {', '.join(available)}"
        )

    def __str__(self):  # KeyError quotes its arg; keep the message readable
        return self.args[0]


class UnknownMode(BasError, KeyError):
    def __init__(self, mode, available):
        self.mode = mode
        super().__init__(
            f"unknown mode tag {mode!r}; declared variants: "
            f"{', '.join(map(str, available))}"
        )

    def __str__(self):
        return self.args[0]


class MissingParameter(BasError, KeyError):
    def __init__(self, symbol: str, kind: str = ""):
        self.symbol = symbol
        where = f" for component {kind}" if kind else ""
        super().__init__(f"missing parameter {symbol!r}{where}")

    def __str__(self):
        return self.args[0]


class InvalidParameter(BasError, ValueError):
    pass


class WiringError(BasError, ValueError):
    """Dangling channel reference or algebraic cycle in a composition."""


class UnfrozenBilinear(BasError, ValueError):
    """An operation requiring an affine model met a live bilinear input."""

    def __init__(self, input_name: str, what: str):
        self.input_name = input_name
        super().__init__(
            f"{what} requires an affine model, but input {input_name!r} "
            f"still enters bilinearly; freeze it to a constant first"
        )


class StochasticModelError(BasError, ValueError):
    """A deterministic-only operation was given a model with process noise."""


class UnknownBenchmark(BasError, KeyError):
    def __init__(self, bid: str, valid):
        self.benchmark_id = bid
        super().__init__(
            f"unknown benchmark id {bid!r}; valid ids: {', '.join(valid)}"
        )

    def __str__(self):
        return self.args[0]


class MissingTableEntry(BasError, KeyError):
    """A lookup table has no entry for the requested key."""

    def __str__(self):
        return self.args[0]


class TraceFormatError(BasError, ValueError):
    """Malformed measured-trace CSV (bad row, timestamps, or unit suffix)."""


class GuardError(BasError, ValueError):
    """Nondeterministic or ill-ordered guard set in a hybrid automaton."""
