"""Closed-form oracles and structural analysis of chain potentials.

Everything here is computed without going through the Backlund
recursion, so it can be used to check it: the explicit two-well partner,
the first-order partners, and Wronskian formulas
``V_n = -(ln W[u_1..u_n])''`` built from the seed eigenfunctions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.signal import find_peaks

from .errors import SingularPoint
from .seeds import Family, SeedSpec

SERIES_RADIUS = 1e-3
# power of two so that x +- h is exact and the stencil spacing is true
FD_STEP = 2.0**-14


@dataclass(frozen=True)
class TwoWellParams:
    """kappa1 pairs with the csch/coth factor centred at ``x = -b``,
    kappa2 with the sech/tanh factor centred at ``x = a``."""

    kappa1: float
    kappa2: float
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if not (self.kappa1 > 0 and self.kappa2 > 0):
            raise ValueError("kappa1 and kappa2 must be positive")

    def seeds(self) -> tuple[SeedSpec, SeedSpec]:
        """The chain seeds reproducing this potential: S(kappa1) then R(kappa2).

        The S row of the seed table is centred at its shift, the R row at
        minus its shift, hence the sign flips.
        """
        return (SeedSpec(Family.S, self.kappa1, -self.b), SeedSpec(Family.R, self.kappa2, -self.a))


def _u_coth_u(u):
    # u coth u and (u / sinh u)**2, Taylor to u**6
    u2 = u * u
    ucoth = 1.0 + u2 / 3.0 - u2 * u2 / 45.0 + 2.0 * u2**3 / 945.0
    ucsch2 = 1.0 - u2 / 3.0 + u2 * u2 / 15.0 - 2.0 * u2**3 / 189.0
    return ucoth, ucsch2


def v2_closed_form_grid(p: TwoWellParams, x) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised two-well partner; returns ``(v, singular)``.

    Near ``x = -b`` numerator and denominator are both multiplied by
    ``(x + b)**2`` and expanded, which removes the cancelling poles.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k1, k2 = p.kappa1, p.kappa2
    if k1 == k2:
        return np.zeros_like(x), np.zeros(x.shape, dtype=bool)
    y = x + p.b
    z = x - p.a
    u = k1 * y
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        sech2 = 1.0 / np.cosh(k2 * z) ** 2
        th = np.tanh(k2 * z)
        near = np.abs(y) < SERIES_RADIUS
        ucoth, ucsch2 = _u_coth_u(np.where(near, u, 0.0))
        # scaled by y**2 (numerator) and y (denominator) in the series branch
        num_s = ucsch2 + y * y * k2**2 * sech2
        den_s = -ucoth + y * k2 * th
        num = k1**2 / np.sinh(u) ** 2 + k2**2 * sech2
        den = -k1 / np.tanh(u) + k2 * th
        num = np.where(near, num_s, num)
        den = np.where(near, den_s, den)
        scale = np.where(near, 1.0 + np.abs(y * k2 * th), k1 / np.abs(np.tanh(u)) + k2 * np.abs(th))
        singular = ~(np.abs(den) > 1e-10 * np.maximum(1.0, scale))
        v = -(k1**2 - k2**2) * num / den**2
    v = np.where(singular, np.nan, v)
    return v, singular


def v2_closed_form(p: TwoWellParams, x):
    """Explicit second-order partner built from an S and an R seed.

    Exactly zero when ``kappa1 == kappa2``.  Raises :class:`SingularPoint`
    where the denominator vanishes.
    """
    scalar = np.ndim(x) == 0
    v, singular = v2_closed_form_grid(p, x)
    if np.any(singular):
        bad = np.atleast_1d(np.asarray(x, dtype=float))[singular]
        raise SingularPoint(f"two-well denominator vanishes at x={bad[0]!r}", x=float(bad[0]), level=2,
                            pole_kind="denominator_zero")
    return float(v[0]) if scalar else v


def v1_closed_forms(family, kappa: float, shift: float, x):
    """First-order partner ``V1`` straight from its closed form."""
    family = Family(family)
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    with np.errstate(over="ignore", divide="ignore"):
        if family is Family.R:
            v = -kappa**2 / np.cosh(kappa * (x + shift)) ** 2
        elif family is Family.S:
            v = kappa**2 / np.sinh(kappa * (x - shift)) ** 2
        elif family is Family.P:
            v = kappa**2 / np.sin(kappa * (x - shift)) ** 2
        else:
            v = 1.0 / (x - shift) ** 2
    if not np.all(np.isfinite(v)):
        bad = x[~np.isfinite(v)][0]
        raise SingularPoint(f"{family.value} partner has a pole at x={bad!r}", x=float(bad), level=1)
    return float(v[0]) if scalar else v


# -- Wronskian oracles -------------------------------------------------------


def _derivative_rows(seeds, x, orders):
    """``u_j^{(m)}`` for free-particle seeds, using ``u'' = -2 eps u``."""
    rows = []
    base = [s.solution(x) for s in seeds]
    for m in orders:
        row = []
        for s, (u, du) in zip(seeds, base):
            factor = (-2.0 * s.energy) ** (m // 2)
            row.append(factor * (u if m % 2 == 0 else du))
        rows.append(row)
    # shape (len(x), len(orders), n)
    return np.moveaxis(np.array(rows, dtype=float), -1, 0)


def wronskian(seeds, x):
    """``W``, ``W'`` and ``W''`` of the seed eigenfunctions at ``x``."""
    seeds = tuple(seeds)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = len(seeds)
    if n == 1:
        mats = _derivative_rows(seeds, x, range(3))
        return mats[:, 0, 0], mats[:, 1, 0], mats[:, 2, 0]
    low = list(range(n - 1))
    w = np.linalg.det(_derivative_rows(seeds, x, low + [n - 1]))
    dw = np.linalg.det(_derivative_rows(seeds, x, low + [n]))
    ddw = np.linalg.det(_derivative_rows(seeds, x, low + [n + 1]))
    ddw = ddw + np.linalg.det(_derivative_rows(seeds, x, list(range(n - 2)) + [n - 1, n]))
    return w, dw, ddw


def wronskian_potential(seeds, x):
    """``V_n = (W'**2 - W W'') / W**2``; ``nan`` where ``W`` vanishes."""
    w, dw, ddw = wronskian(seeds, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = dw / w
        v = -(ddw / w - r * r)
    return np.where(w == 0.0, np.nan, v)


def wronskian_sign_changes(seeds, x_min: float, x_max: float, samples: int = 100_000):
    """Dense-sample count (and bracket midpoints) of Wronskian sign changes."""
    x = np.linspace(x_min, x_max, samples)
    w, _, _ = wronskian(seeds, x)
    s = np.sign(w)
    flips = np.nonzero(s[:-1] * s[1:] < 0)[0]
    exact = np.nonzero(s == 0)[0]
    locs = sorted([0.5 * (x[i] + x[i + 1]) for i in flips] + [float(x[i]) for i in exact])
    return len(locs), locs


# -- residuals ---------------------------------------------------------------


def five_point_derivative(f, x, h: float = FD_STEP):
    """Fourth-order central difference of a vectorised ``f``."""
    x = np.asarray(x, dtype=float)
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def seed_riccati_residual(seed: SeedSpec, x, h: float = FD_STEP):
    """``-beta'_fd + beta**2 + 2 eps`` with the derivative differenced."""
    beta = lambda t: seed.evaluate(t)[0]
    b = beta(x)
    return -five_point_derivative(beta, x, h) + b * b + 2.0 * seed.energy


def chain_riccati_residuals(chain, x, h: float = FD_STEP) -> dict[int, np.ndarray]:
    """Per-level master residual ``-beta_k'_fd + beta_k**2 - 2 (V_{k-1} - eps_k)``."""
    x = np.asarray(x, dtype=float)
    tab = chain.table(x)
    shifted = {s: chain.table(x + s * h) for s in (-2, -1, 1, 2)}
    out = {}
    for k in range(1, chain.n + 1):
        key = (k, k)
        d = (shifted[-2].beta[key] - 8 * shifted[-1].beta[key] + 8 * shifted[1].beta[key]
             - shifted[2].beta[key]) / (12 * h)
        b = tab.beta[key]
        out[k] = -d + b * b - 2.0 * (tab.v[k - 1] - chain.energies[k - 1])
    return out


# -- wells -------------------------------------------------------------------


@dataclass(frozen=True)
class Well:
    location: float
    depth: float


def well_census(sample, prominence: float = 1e-6, min_separation: int = 10) -> list[Well]:
    """Local minima of a sampled potential, refined by a parabolic fit.

    ``prominence`` is relative to the sample's value range and filters out
    rounding ripples in the exponentially flat tails.  Minima closer than
    ``min_separation`` grid steps are merged (the deeper one is kept).
    """
    x = np.asarray(sample.x, dtype=float)
    v = np.asarray(sample.v, dtype=float)
    ok = np.isfinite(v) & ~np.asarray(getattr(sample, "is_singular", np.zeros(v.shape, bool)))
    if ok.sum() < 3:
        return []
    span = np.nanmax(v[ok]) - np.nanmin(v[ok])
    if span == 0.0:
        return []
    h = x[1] - x[0]
    wells: list[tuple[int, Well]] = []
    # split at singular points so poles never masquerade as barriers
    edges = np.flatnonzero(np.diff(np.concatenate([[0], ok.astype(int), [0]])))
    for start, stop in zip(edges[::2], edges[1::2]):
        seg = v[start:stop]
        if seg.size < 3:
            continue
        peaks, _ = find_peaks(-seg, prominence=prominence * span)
        for p in peaks:
            i = start + p
            vm, v0, vp = v[i - 1], v[i], v[i + 1]
            curv = vp - 2 * v0 + vm
            if curv > 0:
                loc = x[i] - 0.5 * h * (vp - vm) / curv
                depth = v0 - (vp - vm) ** 2 / (8 * curv)
            else:
                loc, depth = x[i], v0
            wells.append((i, Well(float(loc), float(depth))))
    merged: list[tuple[int, Well]] = []
    for i, w in wells:
        if merged and i - merged[-1][0] <= min_separation:
            if w.depth < merged[-1][1].depth:
                merged[-1] = (i, w)
            continue
        merged.append((i, w))
    return [w for _, w in merged]


def pole_distance_from_center(p: TwoWellParams) -> float:
    """Offset from ``x = a`` of the pole on the far side of the S centre.

    Solves ``kappa2 tanh(kappa2 z) = kappa1 coth(kappa1 (z + a + b))``
    for the root with ``z + a + b > 0``; only exists when
    ``kappa2 > kappa1``.
    """
    if not p.kappa2 > p.kappa1:
        return math.inf
    c = p.a + p.b
    f = lambda z: p.kappa2 * math.tanh(p.kappa2 * z) - p.kappa1 / math.tanh(p.kappa1 * (z + c))
    lo = max(-c, 0.0) + 1e-12
    hi = lo + 1.0
    while f(hi) < 0:
        hi = lo + 2 * (hi - lo)
    return brentq(f, lo, hi, xtol=1e-14)
