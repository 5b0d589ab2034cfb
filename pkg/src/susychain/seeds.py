"""First-order superpotentials of the free particle.

With ``V0 = 0`` and ``H = -1/2 d^2/dx^2 + V`` the Riccati equation
``-beta' + beta**2 = 2 (V0 - eps)`` has the general solution
``beta = -sqrt(2 eps) cot(sqrt(2 eps) (x - alpha))``.  Restricting to real
superpotentials leaves four families:

====  ==========  ===============================  ====================
tag   energy      beta(x)                          partner V1 = beta'
====  ==========  ===============================  ====================
S     -kappa^2/2  -kappa coth(kappa (x - a))       kappa^2 csch^2
R     -kappa^2/2  -kappa tanh(kappa (x + b))       -kappa^2 sech^2
P     +k^2/2      -k cot(k (x - a))                k^2 csc^2
N     0           -1 / (x - a)                     (x - a)^-2
====  ==========  ===============================  ====================

``shift`` stores ``a`` for S, P, N and ``b`` for R, so the R well is
centred at ``x = -b``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularPoint

DEFAULT_POLE_GUARD = 1e-8


class Family(str, enum.Enum):
    S = "S"
    R = "R"
    P = "P"
    N = "N"


@dataclass(frozen=True)
class SeedValue:
    beta: float
    beta_prime: float
    is_singular: bool


@dataclass(frozen=True)
class SeedSpec:
    """One free-particle seed superpotential.

    ``kappa`` is the wave number (kappa for S/R, k for P) and must be zero
    exactly for the N family.
    """

    family: Family
    kappa: float = 0.0
    shift: float = 0.0
    pole_guard: float = DEFAULT_POLE_GUARD

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        kappa = float(self.kappa)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "shift", float(self.shift))
        if family is Family.N:
            if kappa != 0.0:
                raise ValueError("N-family seeds carry kappa == 0")
        elif not (kappa > 0.0 and math.isfinite(kappa)):
            raise ValueError(f"{family.value}-family seeds need kappa > 0, got {kappa!r}")
        if not self.pole_guard >= 0.0:
            raise ValueError("pole_guard must be non-negative")

    @property
    def energy(self) -> float:
        return factorization_energy(self)

    @property
    def center(self) -> float:
        """Argument origin of the closed form (``a``, or ``-b`` for R)."""
        return -self.shift if self.family is Family.R else self.shift

    def pole_distance(self, x):
        """Distance from ``x`` to the nearest pole (``inf`` for R)."""
        x = np.asarray(x, dtype=float)
        y = x - self.center
        if self.family is Family.R:
            return np.full_like(y, np.inf)
        if self.family is Family.P:
            period = math.pi / self.kappa
            return np.abs(y - np.round(y / period) * period)
        return np.abs(y)

    def poles(self, x_min: float, x_max: float) -> list[float]:
        """Pole locations in the closed window ``[x_min, x_max]``."""
        fam = self.family
        if fam is Family.R:
            return []
        if fam is Family.P:
            period = math.pi / self.kappa
            m_lo = math.ceil((x_min - self.center) / period)
            m_hi = math.floor((x_max - self.center) / period)
            return [self.center + m * period for m in range(m_lo, m_hi + 1)]
        return [self.center] if x_min <= self.center <= x_max else []

    def evaluate(self, x):
        """Vectorised ``(beta, beta_prime, singular)`` at ``x``.

        Singular entries hold ``nan`` in both value arrays.
        """
        x = np.asarray(x, dtype=float)
        kappa = self.kappa
        y = x - self.center
        fam = self.family
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            if fam is Family.S:
                beta = -kappa / np.tanh(kappa * y)
                beta_prime = (kappa / np.sinh(kappa * y)) ** 2
            elif fam is Family.R:
                beta = -kappa * np.tanh(kappa * y)
                beta_prime = -((kappa / np.cosh(kappa * y)) ** 2)
            elif fam is Family.P:
                beta = -kappa / np.tan(kappa * y)
                beta_prime = (kappa / np.sin(kappa * y)) ** 2
            else:
                beta = -1.0 / y
                beta_prime = 1.0 / y**2
        singular = self.pole_distance(x) <= self.pole_guard
        singular |= ~(np.isfinite(beta) & np.isfinite(beta_prime))
        beta = np.where(singular, np.nan, beta)
        beta_prime = np.where(singular, np.nan, beta_prime)
        return beta, beta_prime, singular

    def solution(self, x):
        """Seed eigenfunction ``u`` with ``beta = -u'/u``, and ``u'``."""
        x = np.asarray(x, dtype=float)
        kappa = self.kappa
        y = x - self.center
        fam = self.family
        if fam is Family.S:
            return np.sinh(kappa * y), kappa * np.cosh(kappa * y)
        if fam is Family.R:
            return np.cosh(kappa * y), kappa * np.sinh(kappa * y)
        if fam is Family.P:
            return np.sin(kappa * y), kappa * np.cos(kappa * y)
        return y, np.ones_like(y)


def factorization_energy(spec: SeedSpec) -> float:
    if spec.family in (Family.S, Family.R):
        return -0.5 * spec.kappa**2
    if spec.family is Family.P:
        return 0.5 * spec.kappa**2
    return 0.0


def eval_seed(spec: SeedSpec, x: float) -> SeedValue:
    beta, beta_prime, singular = spec.evaluate(float(x))
    return SeedValue(float(beta), float(beta_prime), bool(singular))


def first_order_partner(spec: SeedSpec, x: float) -> float:
    """``V1(x) = beta'(x)``; raises :class:`SingularPoint` at a pole."""
    value = eval_seed(spec, x)
    if value.is_singular:
        raise SingularPoint(
            f"{spec.family.value}-seed pole at x={x!r}", x=float(x), level=1
        )
    return value.beta_prime
