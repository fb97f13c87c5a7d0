"""Exception types shared across the package."""

from __future__ import annotations


class ShallowLabError(Exception):
    """Base class for all package errors."""


class NonFiniteField(ShallowLabError, ValueError):
    """A field contains NaN or Inf samples."""


class GridMismatch(ShallowLabError, ValueError):
    """Array shape does not match the grid it is used with."""


class SpectralSymmetryError(ShallowLabError, ValueError):
    """Spectral coefficients are not Hermitian within tolerance."""


class VacuumBreach(ShallowLabError):
    """Depth dropped to or below the vacuum floor.

    Attributes
    ----------
    value : float
        Minimum depth found.
    index : tuple of int
        Grid index where the minimum occurs.
    floor : float
        Floor that was violated.
    """

    def __init__(self, value, index, floor, where=None):
        self.value = float(value)
        self.index = tuple(int(i) for i in index)
        self.floor = float(floor)
        self.where = where
        loc = f" at x={where}" if where is not None else ""
        super().__init__(
            f"vacuum breach: min depth {self.value:.6g} <= floor {self.floor:g} "
            f"at index {self.index}{loc}"
        )


class ConfigError(ShallowLabError, ValueError):
    """Invalid run configuration; carries every violation found."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
