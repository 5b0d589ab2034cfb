"""Backlund finite-difference recursion for n-th order SUSY partners.

Given seeds ``beta_1(x, eps_j)`` (j = 1..n) the chain builds the triangular
table ``beta_k(x, eps_j)`` for ``k <= j``::

    beta_k(eps_j) = -beta_{k-1}(eps_{k-1})
                    - 2 (eps_{k-1} - eps_j) / (beta_{k-1}(eps_{k-1}) - beta_{k-1}(eps_j))

Derivatives are never differenced numerically.  They follow from the
level-k Riccati identity ``beta_k' = beta_k**2 - 2 (V_{k-1} - eps_j)`` and
the potentials from ``V_k = V_{k-1} + beta_k'(eps_k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .errors import ChainError, DenominatorZero, SingularPoint

NONE, SEED_POLE, DENOMINATOR_ZERO = 0, 1, 2
POLE_KINDS = ("none", "seed_pole", "denominator_zero")

DENOM_GUARD_REL = 1e-10
BISECT_TOL = 1e-12
# Removable/genuine classification probes, in units of the chain length scale.
_PROBE_NEAR = 1e-4
_PROBE_FAR = 1e-2
_GROWTH_RATIO = 100.0
_RICHARDSON_STEP = 1e-2


class SeedEvaluator(Protocol):
    """Anything that can serve as a level-1 superpotential.

    ``evaluate`` returns ``(beta, beta_prime, singular)`` arrays.  A
    ``poles(x_min, x_max)`` method is optional; without it seed poles are
    found from sign changes of ``1/beta`` on the sampling grid.
    """

    energy: float

    def evaluate(self, x): ...


def denom_guard(beta_a, beta_b):
    return DENOM_GUARD_REL * np.maximum(1.0, np.abs(beta_a) + np.abs(beta_b))


def backlund_step(beta_a: float, beta_b: float, eps_a: float, eps_b: float) -> float:
    """Superpose two Riccati solutions; ``eps_a`` is the previous diagonal energy."""
    denom = beta_a - beta_b
    if not abs(denom) > denom_guard(beta_a, beta_b):
        raise DenominatorZero(
            f"beta_a - beta_b = {denom!r} within guard", pole_kind="denominator_zero"
        )
    return -beta_a - 2.0 * (eps_a - eps_b) / denom


@dataclass(frozen=True)
class LevelValue:
    beta: float
    beta_prime: float
    v: float
    is_singular: bool
    pole_kind: str
    origin_level: int | None = None


@dataclass
class ChainTable:
    """All chain quantities on a sample of x values.

    ``beta``, ``beta_prime``, ``kind``, ``origin`` and ``denom`` are keyed by
    ``(k, j)`` with ``1 <= k <= j <= n``; ``v[k]`` is ``V_k`` for k = 0..n.
    ``denom[(1, j)]`` is absent.  Singular entries hold ``nan``.
    """

    x: np.ndarray
    energies: tuple
    beta: dict = field(default_factory=dict)
    beta_prime: dict = field(default_factory=dict)
    kind: dict = field(default_factory=dict)
    origin: dict = field(default_factory=dict)
    denom: dict = field(default_factory=dict)
    v: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.energies)

    def potential(self, k=None):
        return self.v[self.n if k is None else k]

    def singular(self, k=None):
        k = self.n if k is None else k
        if k == 0:
            return np.zeros(self.x.shape, dtype=bool)
        return self.kind[(k, k)] != NONE


class BacklundChain:
    """Ordered seeds ``eps_1 .. eps_n`` and the recursion over them.

    Seeds are consumed in list order.  For regular free-particle chains
    list the seeds so every partial Wronskian stays nodeless, e.g. S(k1)
    before R(k2) with ``k2 < k1``.
    """

    def __init__(
        self,
        seeds: Sequence[SeedEvaluator],
        base_potential: Callable | None = None,
    ):
        seeds = tuple(seeds)
        if not seeds:
            raise ChainError("a chain needs at least one seed")
        energies = tuple(float(s.energy) for s in seeds)
        for i, ei in enumerate(energies):
            for ej in energies[i + 1 :]:
                if ei == ej:
                    raise ChainError(f"duplicate factorization energy {ei!r}")
        self.seeds = seeds
        self.energies = energies
        self.base_potential = base_potential

    def __repr__(self):
        return f"BacklundChain({list(self.seeds)!r})"

    @property
    def n(self) -> int:
        return len(self.seeds)

    @property
    def length_scale(self) -> float:
        kmax = max((math.sqrt(2.0 * abs(e)) for e in self.energies), default=0.0)
        return 1.0 / max(1.0, kmax)

    def truncated(self, k: int) -> "BacklundChain":
        return BacklundChain(self.seeds[:k], self.base_potential)

    # -- evaluation -----------------------------------------------------

    def table(self, x) -> ChainTable:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        n, eps = self.n, self.energies
        tab = ChainTable(x=x, energies=eps)
        v0 = np.zeros_like(x) if self.base_potential is None else np.asarray(
            self.base_potential(x), dtype=float
        ) * np.ones_like(x)
        tab.v.append(v0)
        for j, seed in enumerate(self.seeds, start=1):
            b, bp, sing = seed.evaluate(x)
            b = np.asarray(b, dtype=float) * np.ones_like(x)
            bp = np.asarray(bp, dtype=float) * np.ones_like(x)
            sing = np.asarray(sing, dtype=bool) | ~np.isfinite(b) | ~np.isfinite(bp)
            tab.beta[(1, j)] = np.where(sing, np.nan, b)
            tab.beta_prime[(1, j)] = np.where(sing, np.nan, bp)
            tab.kind[(1, j)] = np.where(sing, SEED_POLE, NONE).astype(np.int8)
            tab.origin[(1, j)] = np.where(sing, 1, 0)
        tab.v.append(tab.v[0] + tab.beta_prime[(1, 1)])

        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for k in range(2, n + 1):
                ba = tab.beta[(k - 1, k - 1)]
                kind_a = tab.kind[(k - 1, k - 1)]
                origin_a = tab.origin[(k - 1, k - 1)]
                v_prev = tab.v[k - 1]
                ea = eps[k - 2]
                for j in range(k, n + 1):
                    bb = tab.beta[(k - 1, j)]
                    kind_b = tab.kind[(k - 1, j)]
                    d = ba - bb
                    zero = np.abs(d) <= denom_guard(ba, bb)
                    b = -ba - 2.0 * (ea - eps[j - 1]) / d
                    kind = np.where(
                        kind_a != NONE,
                        kind_a,
                        np.where(kind_b != NONE, kind_b, np.where(zero, DENOMINATOR_ZERO, NONE)),
                    ).astype(np.int8)
                    origin = np.where(
                        kind_a != NONE,
                        origin_a,
                        np.where(kind_b != NONE, tab.origin[(k - 1, j)], np.where(zero, k, 0)),
                    )
                    sing = kind != NONE
                    b = np.where(sing, np.nan, b)
                    bp = b * b - 2.0 * (v_prev - eps[j - 1])
                    tab.denom[(k, j)] = d
                    tab.beta[(k, j)] = b
                    tab.beta_prime[(k, j)] = np.where(sing, np.nan, bp)
                    tab.kind[(k, j)] = kind
                    tab.origin[(k, j)] = origin
                tab.v.append(v_prev + tab.beta_prime[(k, k)])
        return tab

    def eval_level(self, k: int, j: int, x: float) -> LevelValue:
        if not 1 <= k <= j <= self.n:
            raise IndexError(f"need 1 <= k <= j <= n, got k={k}, j={j}, n={self.n}")
        tab = self.table(float(x))
        kind = int(tab.kind[(k, j)][0])
        v = float(tab.v[k][0])
        return LevelValue(
            beta=float(tab.beta[(k, j)][0]),
            beta_prime=float(tab.beta_prime[(k, j)][0]),
            v=v,
            is_singular=kind != NONE,
            pole_kind=POLE_KINDS[kind],
            origin_level=int(tab.origin[(k, j)][0]) or None,
        )

    def eval_potential(self, x: float) -> float:
        """``V_n(x) = V_0(x) + sum_k beta_k'(x, eps_k)``."""
        tab = self.table(float(x))
        kind = int(tab.kind[(self.n, self.n)][0])
        if kind != NONE:
            level = int(tab.origin[(self.n, self.n)][0])
            cls = DenominatorZero if kind == DENOMINATOR_ZERO else SingularPoint
            raise cls(
                f"V_{self.n} singular at x={x!r} ({POLE_KINDS[kind]} from level {level})",
                x=float(x),
                level=level,
                pole_kind=POLE_KINDS[kind],
            )
        total = tab.v[0][0]
        for k in range(1, self.n + 1):
            total = total + tab.beta_prime[(k, k)][0]
        return float(total)


def eval_level(chain: BacklundChain, k: int, j: int, x: float) -> LevelValue:
    return chain.eval_level(k, j, x)


def eval_potential(chain: BacklundChain, x: float) -> float:
    return chain.eval_potential(x)


# -- poles -----------------------------------------------------------------


@dataclass(frozen=True)
class Pole:
    location: float
    kind: str
    level: int


def _potential_at(chain: BacklundChain, xs) -> np.ndarray:
    tab = chain.table(xs)
    return np.where(tab.singular(), np.nan, tab.potential())


def is_genuine_pole(chain: BacklundChain, x0: float) -> bool:
    """Does ``V_n`` blow up at ``x0`` (as opposed to a removable point)?

    Compares ``|V_n|`` at two probe distances; a double pole grows by
    ``(far/near)**2`` while a removable point stays bounded.
    """
    ell = chain.length_scale
    near, far = _PROBE_NEAR * ell, _PROBE_FAR * ell
    vals = _potential_at(chain, [x0 - near, x0 + near, x0 - far, x0 + far])
    if not np.all(np.isfinite(vals[:2])):
        return True
    v_near = np.mean(np.abs(vals[:2]))
    v_far = np.nanmean(np.abs(vals[2:])) if np.any(np.isfinite(vals[2:])) else 0.0
    return bool(v_near > _GROWTH_RATIO * (ell**-2 + v_far))


def removable_limit(chain: BacklundChain, x0: float) -> float:
    """Symmetric-average Richardson estimate of ``lim V_n(x)`` at ``x0``."""
    h = _RICHARDSON_STEP * chain.length_scale
    steps = np.array([h, h / 2, h / 4])
    vals = _potential_at(chain, np.concatenate([x0 - steps, x0 + steps]))
    a1, a2, a4 = 0.5 * (vals[:3] + vals[3:])
    # eliminate h^2 then h^4 terms of the even expansion
    b1 = (4.0 * a2 - a1) / 3.0
    b2 = (4.0 * a4 - a2) / 3.0
    return float((16.0 * b2 - b1) / 15.0)


def _denominator_at(chain: BacklundChain, k: int, j: int, x: float) -> float:
    return float(chain.table(x).denom[(k, j)][0])


def _bisect_denominator(chain, k, j, lo, hi, d_lo, d_hi):
    """Refine a sign change of ``D_{k,j}``; return (x, is_zero_crossing)."""
    scale = max(abs(d_lo), abs(d_hi))
    while hi - lo > BISECT_TOL * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        d_mid = _denominator_at(chain, k, j, mid)
        if not math.isfinite(d_mid):
            return mid, False
        if d_mid == 0.0:
            return mid, True
        if (d_mid > 0) == (d_lo > 0):
            lo, d_lo = mid, d_mid
        else:
            hi, d_hi = mid, d_mid
    return 0.5 * (lo + hi), max(abs(d_lo), abs(d_hi)) <= scale


def _seed_pole_candidates(seed, x, x_min, x_max):
    if hasattr(seed, "poles"):
        return list(seed.poles(x_min, x_max))
    b, _, sing = seed.evaluate(x)
    out = [float(xi) for xi in x[np.asarray(sing, dtype=bool)]]
    with np.errstate(divide="ignore"):
        inv = 1.0 / np.asarray(b, dtype=float)
    for i in np.nonzero(np.sign(inv[:-1]) * np.sign(inv[1:]) < 0)[0]:
        # a pole of beta is a zero of 1/beta with |beta| growing at both ends
        lo, hi = x[i], x[i + 1]
        if abs(b[i]) > 1.0 and abs(b[i + 1]) > 1.0:
            out.append(0.5 * (lo + hi))
    return out


def singular_candidates(chain: BacklundChain, x_min: float, x_max: float, samples: int = 4001, table=None):
    """Every place the recursion itself breaks down in ``[x_min, x_max]``.

    Returns sorted ``(location, kind, level)`` triples: seed poles plus
    refined zero crossings of every Backlund denominator ``D_{k,j}`` on
    the sampling grid.  Many of these are removable for ``V_n``.
    """
    if table is None:
        x = np.linspace(x_min, x_max, samples)
        table = chain.table(x)
    x = table.x
    candidates: list[tuple[float, str, int]] = []
    for seed in chain.seeds:
        for p in _seed_pole_candidates(seed, x, x_min, x_max):
            candidates.append((float(p), "seed_pole", 1))
    for (k, j), d in sorted(table.denom.items()):
        finite = np.isfinite(d)
        flip = np.nonzero(finite[:-1] & finite[1:] & (np.sign(d[:-1]) * np.sign(d[1:]) < 0))[0]
        for i in flip:
            loc, crossing = _bisect_denominator(chain, k, j, x[i], x[i + 1], d[i], d[i + 1])
            if crossing:
                candidates.append((loc, "denominator_zero", k))
        exact = np.nonzero(table.kind[(k, j)] == DENOMINATOR_ZERO)[0]
        for i in exact:
            if table.origin[(k, j)][i] == k:
                candidates.append((float(x[i]), "denominator_zero", k))
    candidates.sort(key=lambda c: (c[0], c[1] != "seed_pole"))
    return candidates


def find_poles(chain: BacklundChain, x_min: float, x_max: float, samples: int = 4001, table=None):
    """Genuine poles of ``V_n`` in ``[x_min, x_max]``, refined.

    Each candidate from :func:`singular_candidates` is kept only if
    :func:`is_genuine_pole` confirms ``V_n`` actually diverges there.
    """
    candidates = singular_candidates(chain, x_min, x_max, samples, table)
    poles: list[Pole] = []
    merge_tol = 1e-9 * max(1.0, abs(x_max), abs(x_min))
    seen = -math.inf
    for loc, kind, level in candidates:
        if abs(loc - seen) <= merge_tol:
            continue
        seen = loc
        if is_genuine_pole(chain, loc):
            poles.append(Pole(loc, kind, level))
    return poles


# -- grids -----------------------------------------------------------------


@dataclass
class GridSample:
    """Uniform grid of ``V_n`` with per-point singular flags.

    ``poles`` lists the refined genuine poles inside the window; removable
    points of the chain arithmetic are filled with their limit value.
    """

    x: np.ndarray
    v: np.ndarray
    is_singular: np.ndarray
    pole_kind: np.ndarray
    poles: list
    energies: tuple = ()
    metadata: dict = field(default_factory=dict)

    @property
    def pole_locations(self) -> list[float]:
        return [p.location for p in self.poles]


def eval_grid(chain: BacklundChain, x_min: float, x_max: float, m: int) -> GridSample:
    if not x_min < x_max:
        raise ValueError("x_min must be < x_max")
    if m < 2:
        raise ValueError("need at least two samples")
    x = np.linspace(x_min, x_max, int(m))
    tab = chain.table(x)
    v = tab.potential().copy()
    kinds = tab.kind[(chain.n, chain.n)].copy()
    poles = find_poles(chain, x_min, x_max, table=tab)
    near_tol = max(1e-6, 2 * max(getattr(s, "pole_guard", 0.0) for s in chain.seeds))
    for i in np.nonzero(kinds != NONE)[0]:
        hit = [p for p in poles if abs(p.location - x[i]) <= near_tol]
        if hit:
            kinds[i] = POLE_KINDS.index(hit[0].kind)
            v[i] = np.nan
        elif is_genuine_pole(chain, float(x[i])):
            poles.append(Pole(float(x[i]), POLE_KINDS[kinds[i]], int(tab.origin[(chain.n, chain.n)][i])))
            v[i] = np.nan
        else:
            v[i] = removable_limit(chain, float(x[i]))
            kinds[i] = NONE
    poles.sort(key=lambda p: p.location)
    return GridSample(
        x=x,
        v=v,
        is_singular=kinds != NONE,
        pole_kind=np.array([POLE_KINDS[c] for c in kinds]),
        poles=poles,
        energies=chain.energies,
    )


def count_poles(sample: GridSample) -> tuple[int, list[float]]:
    locs = sorted(sample.pole_locations)
    distinct: list[float] = []
    for loc in locs:
        if not distinct or abs(loc - distinct[-1]) > 1e-9 * max(1.0, abs(loc)):
            distinct.append(loc)
    return len(distinct), distinct


class PotentialLevel:
    """Callable ``V_k`` with removable points of the recursion resolved.

    ``level`` defaults to the full chain depth.  Calling on an array
    raises :class:`SingularPoint` if any sample sits on a genuine pole.
    """

    def __init__(self, chain: BacklundChain, level: int | None = None):
        level = chain.n if level is None else level
        if not 1 <= level <= chain.n:
            raise IndexError(f"level {level} outside 1..{chain.n}")
        self.chain = chain if level == chain.n else chain.truncated(level)
        self.level = level

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        tab = self.chain.table(x)
        v = tab.potential().copy()
        for i in np.nonzero(tab.singular())[0]:
            xi = float(x[i])
            if is_genuine_pole(self.chain, xi):
                kind = POLE_KINDS[tab.kind[(self.level, self.level)][i]]
                raise SingularPoint(
                    f"V_{self.level} has a pole at x={xi!r}", x=xi, level=self.level, pole_kind=kind
                )
            v[i] = removable_limit(self.chain, xi)
        return float(v[0]) if scalar else v

    def beta_prime(self, x):
        tab = self.chain.table(x)
        return tab.beta_prime[(self.level, self.level)]

    def poles(self, x_min: float, x_max: float, samples: int = 4001) -> list[Pole]:
        return find_poles(self.chain, x_min, x_max, samples=samples)
