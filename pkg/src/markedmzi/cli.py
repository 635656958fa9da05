"""Command-line front end: ``table``, ``sweep-phi``, ``fringe``, ``selfcheck``.

Output is CSV by default (``--json`` wraps the same rows).  Reals are
written with 17 significant digits so files are byte-reproducible.
Column layouts are listed in ``docs/csv_schema.md`` and produced by the
``*_columns`` functions below.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import checks, experiment as ex, stochastic
from .experiment import SIGNAL_DETECTORS
from .scenario import (
    MEASUREMENTS,
    MODES,
    Scenario,
    ScenarioError,
    check_phi_deg,
    parse_scenario,
    phi_range_deg,
    with_alpha,
    with_phi,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SELFCHECK = 3

PROVENANCE = ["phi_deg", "alpha_deg", "mode", "measurement", "pairs", "trials", "seed"]

IDLER_LABELS = {
    "usd": ("D3", "D4", "D5"),
    "mem": ("D+", "D-"),
    "erasure": ("DV", "DH"),
}


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.parameter not in ("phi", "alpha"):
            raise ScenarioError(f"unknown sweep parameter {self.parameter!r}")
        if self.steps < 2:
            raise ScenarioError(f"steps must be >= 2, got {self.steps}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop) and self.start < self.stop):
            raise ScenarioError(f"need start < stop, got {self.start:g} .. {self.stop:g}")

    def values(self) -> List[float]:
        return [float(x) for x in np.linspace(self.start, self.stop, self.steps)]


# ---------------------------------------------------------------------------
# column layouts
# ---------------------------------------------------------------------------

def _cells(measurement: str):
    return [(d, k) for d in SIGNAL_DETECTORS for k in IDLER_LABELS[measurement]]


def table_columns() -> List[str]:
    return PROVENANCE + [
        "signal", "idler", "analytic", "circuit", "abs_diff", "max_abs_diff", "mc_mean", "mc_std",
    ]


def sweep_phi_columns(measurement: str) -> List[str]:
    cols = PROVENANCE + ["status"]
    for d, k in _cells(measurement):
        cols += [f"p_{d}_{k}", f"mc_{d}_{k}", f"sd_{d}_{k}"]
    cols += ["V", "D", "K", "D2_plus_V2", "V_scan", "guess_usd", "guess_mem"]
    if measurement == "usd":
        cols.append("p_D5_total")
    return cols


def fringe_columns(measurement: str) -> List[str]:
    cols = PROVENANCE + ["prob_D1", "prob_D2", "mc_prob_D1", "sd_prob_D1"]
    labels = IDLER_LABELS[measurement]
    cols += [f"cond_D1_{k}" for k in labels]
    cols += ["visibility"] + [f"visibility_{k}" for k in labels]
    return cols


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------

def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v == 0.0:
            v = 0.0  # no "-0"
        return format(v, ".17g")
    return str(value)


def render(command: str, columns: Sequence[str], rows: List[Dict[str, object]], as_json: bool,
           meta: Optional[Dict[str, object]] = None) -> str:
    if as_json:
        doc = {
            "command": command,
            "columns": list(columns),
            "rows": [{c: row.get(c) for c in columns} for row in rows],
        }
        if meta:
            doc["meta"] = meta
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _provenance(s: Scenario) -> Dict[str, object]:
    return {k: getattr(s, k) for k in PROVENANCE}


def _sample(table: ex.CoincidenceTable, s: Scenario):
    """Error-bar estimate and raw trials, or ``(None, None)`` when sampling is off."""
    if s.pairs <= 0:
        return None, None
    cfg = stochastic.RunConfig(expected_pairs=s.pairs, trials=s.trials, seed=s.seed)
    samples = stochastic.run_trials(table, cfg)
    return stochastic.estimate_errorbars(table, cfg, samples=samples), samples


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_table(s: Scenario):
    phi, alpha = s.phi, s.alpha
    analytic = ex.coincidence_table_analytic(phi, s.mode, alpha, s.measurement)
    circuit = ex.coincidence_table_circuit(phi, ex.measurement_for(s.measurement, phi), s.mode, alpha)
    gap = analytic.max_abs_diff(circuit)
    est, _ = _sample(analytic, s)
    rows = []
    for cell in analytic.cells:
        row = _provenance(s)
        row.update(
            signal=cell[0], idler=cell[1], analytic=analytic[cell], circuit=circuit[cell],
            abs_diff=abs(analytic[cell] - circuit[cell]), max_abs_diff=gap,
        )
        if est is not None:
            row.update(mc_mean=est.mean[cell], mc_std=est.std[cell])
        rows.append(row)
    meta = {"max_abs_diff": gap}
    if est is not None:
        meta["excluded_trials"] = est.excluded
    return table_columns(), rows, meta


def _alpha_scan_visibility(phi: float, meas: ex.IdlerMeasurement) -> float:
    # marginal prob(D1) over a 101-point alpha scan, by circuit propagation
    vals = [ex.coincidence_table_circuit(phi, meas, "wave", a).row("D1") for a in checks.ALPHA_GRID]
    return ex.fringe_visibility(vals)


def sweep_phi_row(s: Scenario) -> Dict[str, object]:
    row = _provenance(s)
    row["status"] = "ok"
    phi = s.phi
    table = ex.coincidence_table_analytic(phi, s.mode, s.alpha, s.measurement)
    est, _ = _sample(table, s)
    for cell in table.cells:
        d, k = cell
        row[f"p_{d}_{k}"] = table[cell]
        if est is not None:
            row[f"mc_{d}_{k}"] = est.mean[cell]
            row[f"sd_{d}_{k}"] = est.std[cell]
    rep = ex.duality_report(phi)
    row.update(
        V=rep.visibility,
        D=rep.distinguishability,
        K=rep.knowledge,
        D2_plus_V2=rep.distinguishability**2 + rep.visibility**2,
        V_scan=_alpha_scan_visibility(phi, ex.measurement_for(s.measurement, phi)),
        guess_usd=rep.guess_prob_usd,
        guess_mem=rep.guess_prob_mem,
    )
    if s.measurement == "usd":
        row["p_D5_total"] = table.column("D5")
    return row


def cmd_sweep_phi(sweep: SweepSpec, s: Scenario, on_domain_error: str = "reject"):
    values = sweep.values()
    if on_domain_error == "reject":
        for v in values:
            check_phi_deg(v, s.measurement)
    rows = []
    for v in values:
        sv = with_phi(s, v)
        try:
            check_phi_deg(v, s.measurement)
        except ScenarioError as exc:
            row = _provenance(sv)
            row["status"] = "domain_error: " + str(exc)
            rows.append(row)
            continue
        rows.append(sweep_phi_row(sv))
    return sweep_phi_columns(s.measurement), rows, None


def cmd_fringe(sweep: SweepSpec, s: Scenario):
    if s.mode != "wave":
        raise ScenarioError("fringe needs mode = wave (no fringes without the NPBS)")
    phi = s.phi
    meas = ex.measurement_for(s.measurement, phi)
    labels = meas.labels
    outcome = {k: ex.outcome_probability(phi, meas, k) for k in labels}
    rows = []
    for a_deg in sweep.values():
        sa = with_alpha(s, a_deg)
        table = ex.coincidence_table_analytic(phi, "wave", sa.alpha, s.measurement)
        p1, p2 = ex.wave_probabilities_analytic(phi, sa.alpha)
        row = _provenance(sa)
        row.update(prob_D1=p1, prob_D2=p2)
        est, samples = _sample(table, sa)
        if est is not None:
            freqs = [
                sum(x.counts[("D1", k)] for k in labels) / x.total for x in samples if x.total > 0
            ]
            row.update(mc_prob_D1=float(np.mean(freqs)), sd_prob_D1=float(np.std(freqs, ddof=1)))
        for k in labels:
            row[f"cond_D1_{k}"] = table["D1", k] / outcome[k] if outcome[k] > 1e-15 else None
        rows.append(row)
    row_vis = ex.fringe_visibility([r["prob_D1"] for r in rows])
    for k in labels:
        cond = [r[f"cond_D1_{k}"] for r in rows]
        vis_k = None if any(c is None for c in cond) else ex.fringe_visibility(cond)
        for r in rows:
            r[f"visibility_{k}"] = vis_k
    for r in rows:
        r["visibility"] = row_vis
    return fringe_columns(s.measurement), rows, None


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _scenario_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("scenario (flags override --config, which overrides defaults)")
    g.add_argument("--phi-deg", type=float, dest="phi_deg")
    g.add_argument("--alpha-deg", type=float, dest="alpha_deg")
    g.add_argument("--mode", choices=MODES)
    g.add_argument("--measurement", choices=MEASUREMENTS)
    g.add_argument("--pairs", type=int, help="mean pairs per trial; 0 disables sampling")
    g.add_argument("--trials", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--config", metavar="FILE", help="key = value scenario file")
    o = p.add_argument_group("output")
    o.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    o.add_argument("--out", metavar="FILE", help="write to FILE instead of stdout")
    return p


def _sweep_flags(p: argparse.ArgumentParser, default_steps: int) -> None:
    p.add_argument("--start-deg", type=float)
    p.add_argument("--stop-deg", type=float)
    p.add_argument("--steps", type=int, default=default_steps)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="markedmzi",
        description="Path-marked Mach-Zehnder interferometer with unambiguous idler discrimination.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _scenario_flags()

    sub.add_parser("table", parents=[common], help="coincidence table for one setting")

    sp = sub.add_parser("sweep-phi", parents=[common], help="sweep the source parameter phi")
    _sweep_flags(sp, 16)
    sp.add_argument("--on-domain-error", choices=("reject", "row"), default="reject",
                    help="reject the sweep up front or emit a status row per bad phi")

    fp = sub.add_parser("fringe", parents=[common], help="scan the interferometer phase alpha")
    _sweep_flags(fp, 101)

    cp = sub.add_parser("selfcheck", help="run the invariant suite")
    cp.add_argument("--corrupt-npbs", action="store_true", help=argparse.SUPPRESS)
    return parser


_SCENARIO_KEYS = ("phi_deg", "alpha_deg", "mode", "measurement", "pairs", "trials", "seed")


def _scenario_from_args(args, check_phi: bool = True) -> Scenario:
    overrides = {k: getattr(args, k) for k in _SCENARIO_KEYS}
    return parse_scenario(args.config, overrides, check_phi=check_phi)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "selfcheck":
        results = checks.run_selfcheck(corrupt_npbs=args.corrupt_npbs)
        ok = checks.report(results)
        return EXIT_OK if ok else EXIT_SELFCHECK

    try:
        if args.command == "table":
            s = _scenario_from_args(args)
            columns, rows, meta = cmd_table(s)
        elif args.command == "sweep-phi":
            s = _scenario_from_args(args, check_phi=False)
            lo, hi = phi_range_deg(s.measurement)
            sweep = SweepSpec("phi", _pick(args.start_deg, lo), _pick(args.stop_deg, hi), args.steps)
            columns, rows, meta = cmd_sweep_phi(sweep, s, args.on_domain_error)
        else:
            s = _scenario_from_args(args)
            sweep = SweepSpec("alpha", _pick(args.start_deg, 0.0), _pick(args.stop_deg, 360.0), args.steps)
            columns, rows, meta = cmd_fringe(sweep, s)
    except (ScenarioError, ex.DomainError, ex.ConfigError) as exc:
        print(f"markedmzi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    _emit(render(args.command, columns, rows, args.json, meta), args.out)
    return EXIT_OK


def _pick(value, default):
    return default if value is None else value


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
