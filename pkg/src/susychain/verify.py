"""Verification checks run by ``susy-chain verify``."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .analysis import (
    TwoWellParams,
    chain_riccati_residuals,
    v2_closed_form_grid,
    wronskian_potential,
    wronskian_sign_changes,
)
from .chain import PotentialLevel, count_poles, eval_grid, singular_candidates
from .errors import AsymptoteNotReached, SingularityError
from .seeds import Family

RICCATI_TOL = 1e-9
ORACLE_TOL = 1e-9
POLE_CLEARANCE = 0.1
SCATTERING_ENERGIES = tuple(np.geomspace(0.05, 5.0, 5))
SCATTERING_BOX = (-40.0, 40.0)
SCATTERING_STEP = 1e-3
REFLECTION_TOL = 1e-4
FLUX_TOL = 1e-6
SPECTRUM_TOL = 1e-5


@dataclass
class CheckResult:
    name: str
    max_residual: float | None
    threshold: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        if d["max_residual"] is not None and not math.isfinite(d["max_residual"]):
            d["max_residual"] = None
        return d


def worker_count() -> int:
    """``SUSY_CHAIN_THREADS`` caps the pool; 0 or unset means one per CPU."""
    raw = os.environ.get("SUSY_CHAIN_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _clear_of(x, locations, clearance):
    mask = np.ones(x.shape, dtype=bool)
    for loc in locations:
        mask &= np.abs(x - loc) >= clearance
    return mask


def check_riccati(cfg) -> CheckResult:
    """Master Riccati residual at every level with the derivative differenced."""
    chain = cfg.chain()
    x = np.linspace(cfg.x_min, cfg.x_max, cfg.samples)
    pad = 2 * POLE_CLEARANCE
    cands = singular_candidates(chain, cfg.x_min - pad, cfg.x_max + pad,
                                samples=max(cfg.samples, 4001))
    x = x[_clear_of(x, [c[0] for c in cands], POLE_CLEARANCE)]
    if x.size == 0:
        return CheckResult("riccati", None, RICCATI_TOL, False, "no grid points clear of poles")
    worst = 0.0
    for k, res in chain_riccati_residuals(chain, x).items():
        scaled = np.abs(res) / max(1.0, abs(chain.energies[k - 1]))
        worst = max(worst, float(np.max(scaled)))
    return CheckResult("riccati", worst, RICCATI_TOL, worst <= RICCATI_TOL,
                       f"{x.size} points, levels 1..{chain.n}")


def _is_two_well(seeds) -> bool:
    return len(seeds) == 2 and seeds[0].family is Family.S and seeds[1].family is Family.R


def check_oracle(cfg, sample=None) -> CheckResult:
    """Chain potential against an independent closed form.

    S-then-R chains use the explicit two-well formula at every mutually
    non-singular grid point; other chains use the Wronskian formula away
    from poles, relative to ``max(1, |V|)``.
    """
    chain = cfg.chain()
    sample = sample or eval_grid(chain, cfg.x_min, cfg.x_max, cfg.samples)
    seeds = cfg.seeds
    if _is_two_well(seeds):
        p = TwoWellParams(seeds[0].kappa, seeds[1].kappa, a=-seeds[1].shift, b=-seeds[0].shift)
        ref, ref_sing = v2_closed_form_grid(p, sample.x)
        mask = ~sample.is_singular & ~ref_sing
        err = np.abs(sample.v[mask] - ref[mask])
        worst = float(np.max(err)) / p.kappa1**2 if err.size else 0.0
        return CheckResult("oracle", worst, ORACLE_TOL, worst <= ORACLE_TOL,
                           f"two-well closed form, {int(mask.sum())} points")
    ref = wronskian_potential(seeds, sample.x)
    mask = ~sample.is_singular & np.isfinite(ref)
    mask &= _clear_of(sample.x, sample.pole_locations, POLE_CLEARANCE)
    err = np.abs(sample.v[mask] - ref[mask]) / np.maximum(1.0, np.abs(ref[mask]))
    worst = float(np.max(err)) if err.size else 0.0
    return CheckResult("oracle", worst, ORACLE_TOL, worst <= ORACLE_TOL,
                       f"Wronskian formula, {int(mask.sum())} points")


def check_scattering(cfg, workers=None) -> CheckResult:
    from .quantum import scattering

    potential = PotentialLevel(cfg.chain())
    workers = workers or worker_count()
    try:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda e: scattering(potential, e, SCATTERING_BOX, SCATTERING_STEP),
                SCATTERING_ENERGIES,
            ))
    except (SingularityError, AsymptoteNotReached) as exc:
        return CheckResult("scattering", None, REFLECTION_TOL, False, f"{type(exc).__name__}: {exc}")
    worst_r = max(r.r_sq for r in results)
    worst_flux = max(r.flux_error for r in results)
    ok = worst_r < REFLECTION_TOL and worst_flux <= FLUX_TOL
    return CheckResult("scattering", worst_r, REFLECTION_TOL, ok,
                       f"max |R|^2 over {len(results)} energies; flux error {worst_flux:.3g}")


def check_spectrum(cfg) -> CheckResult:
    from .quantum import bound_states

    seeds = cfg.seeds
    if any(s.family not in (Family.S, Family.R) for s in seeds):
        return CheckResult("spectrum", None, SPECTRUM_TOL, False, "spectrum check needs S/R seeds only")
    expected = sorted(s.energy for s in seeds)
    kmax = max(s.kappa for s in seeds)
    try:
        found = bound_states(PotentialLevel(cfg.chain()), SCATTERING_BOX, (-kmax**2, -1e-6))
    except (SingularityError, AsymptoteNotReached) as exc:
        return CheckResult("spectrum", None, SPECTRUM_TOL, False, f"{type(exc).__name__}: {exc}")
    if len(found.energies) != len(expected):
        return CheckResult("spectrum", math.inf, SPECTRUM_TOL, False,
                           f"found {len(found.energies)} levels, expected {len(expected)}")
    worst = max(abs(a - b) for a, b in zip(found.energies, expected))
    return CheckResult("spectrum", worst, SPECTRUM_TOL, worst <= SPECTRUM_TOL,
                       f"levels {found.energies}")


def check_poles(cfg, sample=None) -> CheckResult:
    """Refined pole count against Wronskian sign changes on a dense grid."""
    chain = cfg.chain()
    sample = sample or eval_grid(chain, cfg.x_min, cfg.x_max, cfg.samples)
    count, _ = count_poles(sample)
    dense, _ = wronskian_sign_changes(cfg.seeds, cfg.x_min, cfg.x_max, 100_000)
    diff = abs(count - dense)
    return CheckResult("poles", float(diff), 0.0, diff == 0,
                       f"{count} refined poles, {dense} Wronskian sign changes")


def run_checks(cfg, workers=None) -> list[CheckResult]:
    enabled = [name for name, on in cfg.verify.items() if on]
    sample = None
    if "oracle" in enabled or "poles" in enabled:
        sample = eval_grid(cfg.chain(), cfg.x_min, cfg.x_max, cfg.samples)
    runners = {
        "riccati": lambda: check_riccati(cfg),
        "oracle": lambda: check_oracle(cfg, sample),
        "scattering": lambda: check_scattering(cfg, workers),
        "spectrum": lambda: check_spectrum(cfg),
        "poles": lambda: check_poles(cfg, sample),
    }
    workers = workers or worker_count()
    with ThreadPoolExecutor(max_workers=min(workers, max(1, len(enabled)))) as pool:
        futures = [pool.submit(runners[name]) for name in enabled]
        return [f.result() for f in futures]
