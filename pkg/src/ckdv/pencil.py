"""Pencil weight bookkeeping shared by functionals, structures and the Dirac engine."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError

DENOMINATOR_TOL = 1e-12


def pencil_denominator(lam: float, k: float) -> float:
    return -lam * k * k + (1.0 - k) ** 2


def excluded_k(lam: float) -> list[float]:
    """Pencil weights at which the denominator vanishes, sorted."""
    if lam < 0:
        return []
    if lam == 0:
        return [1.0]
    r = math.sqrt(lam)
    roots = [1.0 / (1.0 + r)]
    if r != 1.0:
        roots.append(1.0 / (1.0 - r))
    return sorted(roots)


def check_pencil(lam: float, k: float) -> float:
    """Return the denominator, raising if ``k`` is an excluded weight for ``lam``."""
    if not (math.isfinite(lam) and math.isfinite(k)):
        raise ParameterError(f"pencil parameters must be finite, got lam={lam!r}, k={k!r}")
    if lam == 0 and k == 1:
        raise ParameterError("k=1 is excluded at lambda=0: the pencil needs k != 1 there")
    den = pencil_denominator(lam, k)
    if abs(den) <= DENOMINATOR_TOL:
        raise ParameterError(
            f"pencil denominator zero: k={k!r} is excluded for lambda={lam!r} "
            f"(excluded weights {excluded_k(lam)})")
    return den


@dataclass(frozen=True)
class PencilParams:
    lam: float
    k: float

    def __post_init__(self):
        check_pencil(self.lam, self.k)

    @property
    def denominator(self) -> float:
        return pencil_denominator(self.lam, self.k)
