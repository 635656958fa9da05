"""Invariant suite behind the ``selfcheck`` command."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from . import experiment as ex, stochastic

USD_GRID_DEG = np.linspace(22.5, 45.0, 16)
FULL_GRID_DEG = np.linspace(0.0, 45.0, 31)
ALPHA_GRID = np.linspace(0.0, 2 * math.pi, 101)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float
    passed: bool
    relation: str = "<="

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<32} {self.value:.3e}  (need {self.relation} {self.limit:.0e})"


def _check(name: str, value: float, tol: float) -> Check:
    return Check(name, float(value), tol, bool(value <= tol))


def corrupted_npbs() -> np.ndarray:
    """NPBS with one sign flipped; a negative control for the oracle check."""
    return np.array([[1, -1], [1, 1]], dtype=np.complex128) / math.sqrt(2.0)


def oracle_gap(beam_splitter: Optional[np.ndarray] = None) -> float:
    worst = 0.0
    for kind in ex.MeasurementKind:
        grid = USD_GRID_DEG if kind is ex.MeasurementKind.USD else FULL_GRID_DEG
        for phi in np.radians(grid):
            meas = ex.measurement_for(kind, phi)
            for mode in ex.Mode:
                alphas = ALPHA_GRID if mode is ex.Mode.WAVE else (0.0,)
                for alpha in alphas:
                    a = ex.coincidence_table_analytic(phi, mode, alpha, kind)
                    c = ex.coincidence_table_circuit(phi, meas, mode, alpha, beam_splitter)
                    worst = max(worst, a.max_abs_diff(c))
    return worst


def run_selfcheck(corrupt_npbs: bool = False) -> List[Check]:
    bs = corrupted_npbs() if corrupt_npbs else None
    results = [_check("oracle equivalence", oracle_gap(bs), 1e-12)]

    phi30 = math.radians(30)
    t = ex.coincidence_table_circuit(phi30, ex.measurement_for("usd", phi30), "particle", 0.0, bs)
    expected = {("D1", "D3"): 0.25, ("D2", "D4"): 0.25, ("D1", "D5"): 0.25,
                ("D2", "D5"): 0.25, ("D1", "D4"): 0.0, ("D2", "D3"): 0.0}
    results.append(_check("table at phi=30 deg, particle", max(abs(t[c] - p) for c, p in expected.items()), 1e-12))

    unamb = inconcl = dark = 0.0
    for phi in np.radians(USD_GRID_DEG):
        meas = ex.measurement_for("usd", phi)
        part = ex.coincidence_table_circuit(phi, meas, "particle", 0.0, bs)
        unamb = max(unamb, part["D1", "D4"], part["D2", "D3"])
        scan = [ex.coincidence_table_circuit(phi, meas, "wave", a, bs) for a in ALPHA_GRID]
        vis = ex.fringe_visibility([s.row("D1") for s in scan])
        target = abs(math.cos(4 * phi))
        inconcl = max(inconcl, abs(part.column("D5") - target), abs(vis - target))
        if phi < math.pi / 4 - 1e-12:
            w = scan[0]
            half = 0.5 * math.cos(2 * phi) ** 2
            dark = max(dark, w["D2", "D5"], abs(w["D2", "D3"] - half), abs(w["D2", "D4"] - half))
    results.append(_check("unambiguity zeros", unamb, 1e-12))
    results.append(_check("inconclusive rate = visibility", inconcl, 1e-9))
    results.append(_check("balanced MZI dark port", dark, 1e-12))

    duality = 0.0
    for phi in np.radians(FULL_GRID_DEG):
        r = ex.duality_report(phi)
        duality = max(duality, abs(r.distinguishability**2 + r.visibility**2 - 1))
        duality = max(duality, abs(r.guess_prob_mem - 0.5 * (1 + abs(math.sin(4 * phi)))))
        if r.knowledge is not None:
            duality = max(duality, abs(r.knowledge - (1 - r.visibility)))
            duality = max(duality, abs(r.guess_prob_usd - ex.usd_guess_probability(phi)))
    results.append(_check("duality identities", duality, 1e-12))

    blend = 0.0
    for phi in np.radians(USD_GRID_DEG):
        rho = ex.signal_rho(phi)
        for parts in (ex.subensembles_usd(phi), ex.subensembles_mem(phi)):
            mix = sum(w * s for w, s in parts)
            blend = max(blend, float(np.abs(mix - rho).max()))
    results.append(_check("blend consistency", blend, 1e-12))

    complete = 0.0
    for phi in np.radians(USD_GRID_DEG):
        for kind in ex.MeasurementKind:
            m = ex.measurement_for(kind, phi)
            complete = max(complete, float(np.abs(m.completeness() - np.eye(2)).max()))
    results.append(_check("POVM completeness", complete, 1e-9))

    results.append(_monte_carlo_check())
    return results


def _monte_carlo_check() -> Check:
    cfg = stochastic.RunConfig(expected_pairs=100_000, trials=100, seed=1)
    min_p = 1.0
    for phi in np.radians(USD_GRID_DEG):
        for mode in ex.Mode:
            table = ex.coincidence_table_analytic(phi, mode, 0.0)
            min_p = min(min_p, stochastic.chi_square_test(table, cfg).pvalue)
    return Check("Monte Carlo chi-square min p", min_p, 1e-3, min_p > 1e-3, ">")


def report(checks: List[Check], write: Callable[[str], None] = print) -> bool:
    for c in checks:
        write(c.line())
    ok = all(c.passed for c in checks)
    write(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    return ok
