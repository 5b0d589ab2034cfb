"""Numerov integration, scattering and bound states for H = -1/2 d2/dx2 + V."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy.optimize import brentq

from .errors import AsymptoteNotReached, SingularityError, SingularPotential

DEFAULT_BOX = (-40.0, 40.0)
DEFAULT_STEP = 1e-3


@dataclass(frozen=True)
class ScatteringResult:
    energy: float
    t_sq: float
    r_sq: float
    match_window: tuple[float, float]

    @property
    def flux_error(self) -> float:
        return abs(self.t_sq + self.r_sq - 1.0)


@dataclass(frozen=True)
class BoundStateResult:
    energies: list[float]
    node_counts: list[int]


@numba.njit(cache=True, nogil=True)
def _numerov(f, h, psi0, psi1, renorm):
    """Three-term Numerov recurrence for psi'' = f psi on a uniform grid.

    Returns the samples and the number of sign changes.  With ``renorm``
    the running pair is rescaled to avoid overflow (values then only
    carry the shape between rescalings, which is enough for node counts).
    """
    n = f.shape[0]
    psi = np.empty(n, dtype=np.complex128)
    c = h * h / 12.0
    psi[0] = psi0
    psi[1] = psi1
    nodes = 0
    for i in range(1, n - 1):
        psi[i + 1] = (2.0 * (1.0 + 5.0 * c * f[i]) * psi[i] - (1.0 - c * f[i - 1]) * psi[i - 1]) / (
            1.0 - c * f[i + 1]
        )
        if psi[i + 1].real * psi[i].real < 0.0:
            nodes += 1
        if renorm and abs(psi[i + 1]) > 1e150:
            scale = 1.0 / abs(psi[i + 1])
            for j in range(i + 2):
                psi[j] *= scale
    return psi, nodes


@numba.njit(cache=True, nogil=True)
def _numerov_nodes(f, h, psi1):
    """Node count only, real arithmetic, rescaling the running pair."""
    n = f.shape[0]
    c = h * h / 12.0
    prev = 0.0
    cur = psi1
    nodes = 0
    for i in range(1, n - 1):
        nxt = (2.0 * (1.0 + 5.0 * c * f[i]) * cur - (1.0 - c * f[i - 1]) * prev) / (1.0 - c * f[i + 1])
        if nxt * cur < 0.0 or (nxt == 0.0 and cur != 0.0):
            nodes += 1
        prev, cur = cur, nxt
        if abs(cur) > 1e150:
            prev *= 1e-150
            cur *= 1e-150
    return nodes, prev, cur


def _grid(x0, x1, step):
    if not step > 0:
        raise ValueError("step must be positive")
    n = int(round(abs(x1 - x0) / step))
    if n < 2:
        raise ValueError("integration range shorter than two steps")
    return np.linspace(x0, x1, n + 1)


def _sample_potential(potential, x, check_poles=True):
    lo, hi = float(min(x[0], x[-1])), float(max(x[0], x[-1]))
    if check_poles and hasattr(potential, "poles"):
        poles = [p for p in potential.poles(lo, hi) if lo <= p.location <= hi]
        if poles:
            raise SingularPotential(
                f"potential has {len(poles)} pole(s) in [{lo}, {hi}], first at {poles[0].location!r}",
                x=poles[0].location,
                pole_kind=poles[0].kind,
            )
    try:
        v = np.asarray(potential(x), dtype=float) * np.ones_like(x)
    except SingularityError as exc:
        raise SingularPotential(str(exc), x=exc.x, level=exc.level, pole_kind=exc.pole_kind) from exc
    if not np.all(np.isfinite(v)):
        bad = x[~np.isfinite(v)][0]
        raise SingularPotential(f"potential is not finite at x={bad!r}", x=float(bad))
    return v


def _taylor_start(v, x, energy, psi0, dpsi0, h):
    """Second sample from (psi0, psi0') by a fourth-order Taylor step."""
    f = 2.0 * (v - energy)
    df = (f[1] - f[0]) / h if len(f) < 3 else (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    ddf = 0.0 if len(f) < 3 else (f[0] - 2 * f[1] + f[2]) / (h * h)
    f0 = f[0]
    d2 = f0 * psi0
    d3 = df * psi0 + f0 * dpsi0
    d4 = ddf * psi0 + 2 * df * dpsi0 + f0 * d2
    return psi0 + h * dpsi0 + h * h / 2 * d2 + h**3 / 6 * d3 + h**4 / 24 * d4


def numerov_integrate(potential, x0: float, x1: float, step: float, psi0, dpsi0, energy: float):
    """Integrate ``psi'' = 2 (V - E) psi`` from ``x0`` to ``x1``.

    ``x1 < x0`` integrates leftwards (``dpsi0`` is still d/dx).  Returns
    ``(x, psi)``; ``psi`` is real unless the initial data are complex.
    """
    x = _grid(x0, x1, step)
    h = x[1] - x[0]
    v = _sample_potential(potential, x)
    psi1 = _taylor_start(v, x, energy, psi0, dpsi0, h)
    f = 2.0 * (v - energy)
    psi, _ = _numerov(f, abs(h), complex(psi0), complex(psi1), False)
    if np.iscomplexobj(psi0) or np.iscomplexobj(dpsi0) or isinstance(psi0, complex):
        return x, psi
    return x, psi.real.copy()


def _discrete_wavenumber(energy, h):
    """Wave number whose plane waves solve the free Numerov recurrence exactly."""
    c = -2.0 * energy * h * h / 12.0
    return math.acos((1.0 + 5.0 * c) / (1.0 - c)) / h


def scattering(potential, energy: float, box=DEFAULT_BOX, step: float = DEFAULT_STEP,
               asymptote_tol: float = 1e-10) -> ScatteringResult:
    """Transmission and reflection probabilities at ``energy > 0``.

    A purely transmitted wave ``exp(ikx)`` is imposed at the right edge
    and integrated leftwards; the left-edge solution is split into
    incident and reflected parts.  ``asymptote_tol`` is relative to
    ``max |V|`` on the box.
    """
    if not energy > 0:
        raise ValueError("scattering needs E > 0")
    x_left, x_right = float(box[0]), float(box[1])
    x = _grid(x_right, x_left, step)  # right to left
    v = _sample_potential(potential, x)
    vmax = float(np.max(np.abs(v)))
    tol = asymptote_tol * vmax
    if abs(v[0]) > tol or abs(v[-1]) > tol:
        raise AsymptoteNotReached(
            f"|V| at box edges ({abs(v[-1]):.3g}, {abs(v[0]):.3g}) exceeds {tol:.3g}"
        )
    f = 2.0 * (v - energy)
    h = abs(x[1] - x[0])
    k = _discrete_wavenumber(energy, h)
    psi, _ = _numerov(f, h, np.exp(1j * k * x[0]), np.exp(1j * k * x[1]), False)
    # psi = A exp(ikx) + B exp(-ikx) at the two leftmost samples
    xa, xb = x[-1], x[-2]
    m = np.array([[np.exp(1j * k * xa), np.exp(-1j * k * xa)], [np.exp(1j * k * xb), np.exp(-1j * k * xb)]])
    amp_in, amp_refl = np.linalg.solve(m, np.array([psi[-1], psi[-2]]))
    t_sq = 1.0 / abs(amp_in) ** 2
    r_sq = abs(amp_refl) ** 2 / abs(amp_in) ** 2
    return ScatteringResult(float(energy), float(t_sq), float(r_sq), (x_left, x_right))


class _Shooter:
    def __init__(self, potential, box, step):
        self.x = _grid(float(box[0]), float(box[1]), step)
        self.h = self.x[1] - self.x[0]
        self.v = _sample_potential(potential, self.x)
        self.match = int(np.argmin(self.v))
        self.match = min(max(self.match, 2), len(self.x) - 3)

    def nodes(self, energy):
        f = 2.0 * (self.v - energy)
        count, _, _ = _numerov_nodes(f, self.h, self.h)
        return count

    def _halves(self, energy):
        f = 2.0 * (self.v - energy)
        m = self.match
        left, _ = _numerov(f[: m + 2], self.h, 0j, complex(self.h), True)
        right, _ = _numerov(f[m - 1 :][::-1].copy(), self.h, 0j, complex(self.h), True)
        return left.real, right.real[::-1]

    def mismatch(self, energy):
        left, right = self._halves(energy)
        # left covers x[0..m+1], right covers x[m-1..end]
        pl = left[-2]
        dl = (left[-1] - left[-3]) / (2 * self.h)
        pr = right[1]
        dr = (right[2] - right[0]) / (2 * self.h)
        norm = math.hypot(pl, dl) * math.hypot(pr, dr)
        return (dl * pr - pl * dr) / norm

    def eigenfunction(self, energy):
        left, right = self._halves(energy)
        m = self.match
        pl, dl = left[-2], (left[-1] - left[-3]) / (2 * self.h)
        pr, dr = right[1], (right[2] - right[0]) / (2 * self.h)
        scale = (pl * pr + dl * dr) / (pr * pr + dr * dr)
        psi = np.concatenate([left[: m + 1], scale * right[2:]])
        return psi / np.max(np.abs(psi))


def _count_nodes(psi, floor=1e-8):
    sig = psi[np.abs(psi) > floor]
    return int(np.sum(sig[:-1] * sig[1:] < 0))


def bound_states(potential, box=DEFAULT_BOX, search=None, step: float = DEFAULT_STEP,
                 tol: float = 1e-8) -> BoundStateResult:
    """Bound-state energies in ``search`` by node counting plus matching.

    Bisection on the Sturm node count isolates each level; the
    normalised Wronskian of the left and right solutions at the potential
    minimum then pins it to ``tol``.  ``search`` defaults to
    ``(min V, -1e-6)``.
    """
    shooter = _Shooter(potential, box, step)
    if search is None:
        search = (float(np.min(shooter.v)), -1e-6)
    e_lo, e_hi = float(search[0]), float(search[1])
    if not e_lo < e_hi:
        return BoundStateResult([], [])
    n_lo, n_hi = shooter.nodes(e_lo), shooter.nodes(e_hi)
    energies, nodes = [], []
    for level in range(n_lo, n_hi):
        lo, hi = e_lo, e_hi
        while hi - lo > 1e-6 * max(1.0, abs(lo)):
            mid = 0.5 * (lo + hi)
            if shooter.nodes(mid) > level:
                hi = mid
            else:
                lo = mid
        f_lo, f_hi = shooter.mismatch(lo), shooter.mismatch(hi)
        if f_lo * f_hi < 0:
            e = brentq(shooter.mismatch, lo, hi, xtol=tol * 1e-3, rtol=4 * np.finfo(float).eps)
        else:
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if shooter.nodes(mid) > level:
                    hi = mid
                else:
                    lo = mid
            e = 0.5 * (lo + hi)
        energies.append(float(e))
        nodes.append(_count_nodes(shooter.eigenfunction(e)))
    return BoundStateResult(energies, nodes)
