"""Named channel spaces.

Every model in the library addresses its states, inputs and disturbances
through a :class:`ChannelSpace`: an ordered list of unique channel names with
physical units.  Keeping the naming structural (rather than positional only)
lets the composer wire components together by name and lets error messages
point at the offending channel.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DimensionMismatch, UnknownChannel

# Canonical unit spellings (ASCII).  Unicode variants are accepted on input.
UNITS = ("degC", "m3/h", "kg/s", "ppm", "1")

_UNIT_ALIASES = {
    "°C": "degC",
    "degc": "degC",
    "C": "degC",
    "m³/h": "m3/h",
    "m3/hr": "m3/h",
    "dimensionless": "1",
    "-": "1",
}


def canonical_unit(unit: str) -> str:
    u = _UNIT_ALIASES.get(unit, unit)
    if u not in UNITS:
        raise ValueError(f"unknown unit {unit!r}; known units: {', '.join(UNITS)}")
    return u


@dataclass(frozen=True)
class ChannelSpace:
    """Ordered, uniquely named channels with units.

    ``label`` is a human-readable role tag ("states", "inputs", ...) used in
    error messages only.
    """

    names: tuple[str, ...]
    units: tuple[str, ...]
    label: str = "channels"
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        names = tuple(self.names)
        units = tuple(canonical_unit(u) for u in self.units)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "units", units)
        if len(units) != len(names):
            raise DimensionMismatch(self.label, len(names), len(units))
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate channel names in {self.label}: {dupes}")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @classmethod
    def of(cls, label: str, *pairs: tuple[str, str]) -> "ChannelSpace":
        """Build from (name, unit) pairs."""
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), label)

    @classmethod
    def empty(cls, label: str = "channels") -> "ChannelSpace":
        return cls((), (), label)

    @property
    def dim(self) -> int:
        return len(self.names)

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownChannel(name, self.label, self.names) from None

    def unit(self, name: str) -> str:
        return self.units[self.index(name)]

    def check_vector(self, v) -> None:
        """Raise DimensionMismatch unless ``v`` has this space's dimension."""
        n = len(v)
        if n != self.dim:
            raise DimensionMismatch(self.label, self.dim, n)
