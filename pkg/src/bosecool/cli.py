"""Command-line front end: every sweep writes deterministic CSV (or JSON) data.

Exit status is 0 when every invariant asserted by the command holds, 1 when
one is violated and 2 for usage or parameter errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .cooling import asymptotic_small_alpha, local_minima, sweep_alpha
from .errors import BosecoolError
from .fock import ThermalSpec
from .nonlinear import (
    NonlinearConfig,
    enumerate_second_order_terms,
    exact_evolve,
    perturbative_delta_n,
)
from .suites import (
    entropy_trials,
    hall_fixture_certificate,
    identity_entropy_trial,
    linear_trials,
)

SCHEMA_VERSION = 1
WORKERS_ENV = "BOSECOOL_WORKERS"
EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    if value is None:
        return ""
    if isinstance(value, (tuple, list)):
        return " ".join(str(v) for v in value)
    return str(value)


def _emit(args, params: dict, columns: list[str], rows: list[list], notes: dict | None = None) -> None:
    notes = notes or {}
    if args.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "code_version": __version__,
            "command": args.command,
            "parameters": params,
            "notes": notes,
            "columns": columns,
            "rows": [dict(zip(columns, r)) for r in rows],
        }
        text = json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"
    else:
        buf = io.StringIO()
        buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
        buf.write(f"# code_version: {__version__}\n")
        buf.write(f"# command: {args.command}\n")
        for key in sorted(params):
            buf.write(f"# param {key}: {_fmt(params[key])}\n")
        for key in sorted(notes):
            buf.write(f"# {key}: {_fmt(notes[key])}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_fmt(v) for v in r])
        text = buf.getvalue()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


_VERDICT_CODES = {"guaranteed_by_dss": "dss", "guaranteed_by_nor": "nor", "no_guarantee": "none"}


def _one_based(idx):
    return None if idx is None else tuple(i + 1 for i in idx)


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise BosecoolError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def _grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise BosecoolError("steps must be at least 1")
    if lo > hi:
        raise BosecoolError("grid minimum exceeds maximum")
    return np.linspace(lo, hi, steps)


def cmd_linear_certify(args) -> int:
    if args.trials < 1:
        raise BosecoolError("--trials must be at least 1")
    columns = [
        "trial", "modes", "state", "f_term", "R_term", "Y_term", "dn_decomposition",
        "dn_moments", "dispersion_change", "monotone_ok", "decomposition_ok", "bridge_ok",
    ]
    rows, bad = [], []
    for tr in linear_trials(args.seed, args.trials, args.modes, args.squeeze_budget, args.displacement_budget):
        rows.append([
            tr.trial, tr.modes, tr.state_kind, tr.f_term, tr.R_term, tr.Y_term, tr.dn_decomposition,
            tr.dn_moments, tr.dispersion_change, tr.monotone_ok, tr.decomposition_ok, tr.bridge_ok,
        ])
        if not tr.ok:
            bad.append(tr)
    params = {
        "seed": args.seed, "trials": args.trials, "modes": args.modes if args.modes else "1-4",
        "squeeze_budget": args.squeeze_budget, "displacement_budget": args.displacement_budget,
        "generator": "numpy PCG64",
    }
    _emit(args, params, columns, rows, {"violations": len(bad)})
    for tr in bad:
        payload = {
            "trial": tr.trial,
            "S": _complex_list(tr.bmap.S), "R": _complex_list(tr.bmap.R), "f": _complex_list(tr.bmap.f),
        }
        print("violating map: " + json.dumps(payload), file=sys.stderr)
    return EXIT_VIOLATION if bad else EXIT_OK


def _complex_list(a):
    a = np.asarray(a)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def cmd_entropy_certify(args) -> int:
    if args.trials < 1:
        raise BosecoolError("--trials must be at least 1")
    modes = args.modes or 2
    if not 1 <= modes <= 8:
        raise BosecoolError("--modes must lie in 1..8")
    columns = ["trial", "modes", "verdict", "delta_entropy", "witness_rows", "witness_cols", "ok"]
    rows, failures = [], 0
    trials = list(entropy_trials(args.seed, args.trials, modes, args.squeeze_budget))
    trials.append(identity_entropy_trial(modes))
    for tr in trials:
        rows.append([tr.trial, tr.modes, _VERDICT_CODES[tr.verdict], tr.delta_entropy,
                     _one_based(tr.witness_rows), _one_based(tr.witness_cols), tr.ok])
        failures += not tr.ok
    fixture = hall_fixture_certificate()
    fixture_ok = (not fixture.ok) and fixture.rows == (1, 2) and fixture.cols == (0, 1)
    rows.append(["fixture", 3, fixture.verdict.value, None,
                 _one_based(fixture.rows), _one_based(fixture.cols), fixture_ok])
    failures += not fixture_ok
    params = {"seed": args.seed, "trials": args.trials, "modes": modes,
              "squeeze_budget": args.squeeze_budget, "generator": "numpy PCG64"}
    _emit(args, params, columns, rows, {"violations": failures})
    return EXIT_VIOLATION if failures else EXIT_OK


def cmd_optimal_sweep(args) -> int:
    if not 0 < args.y_alpha < 1:
        raise BosecoolError("--y-alpha must lie in (0, 1)")
    alphas = _grid(args.alpha_min, args.alpha_max, args.alpha_steps)
    workers = _workers()
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            table = sweep_alpha(args.y_alpha, alphas, args.blocks, True, pool)
    else:
        table = sweep_alpha(args.y_alpha, alphas, args.blocks, True)
    columns = ["alpha", "dn", "dn1", "dn2", "energy_cost", "cop", "efficiency", "converged"]
    rows, bad = [], 0
    for r in table:
        rows.append([r.alpha, r.dn, r.dn1, r.dn2, r.energy_cost, r.cop, r.efficiency, r.converged])
        bad += not (r.dn < 0 and r.efficiency <= 1 - r.alpha + 1e-12)
    finite = [(r.alpha, r.cop) for r in table if math.isfinite(r.cop)]
    minima = local_minima([a for a, _ in finite], [c for _, c in finite]) if len(finite) > 2 else []
    params = {"y_alpha": args.y_alpha, "alpha_min": args.alpha_min, "alpha_max": args.alpha_max,
              "alpha_steps": args.alpha_steps, "blocks": args.blocks}
    _emit(args, params, columns, rows, {"cop_local_minima": [round(m, 6) for m in minima], "violations": bad})
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_nonlinear_scan(args) -> int:
    alphas = _grid(args.alpha_min, args.alpha_max, args.alpha_steps)
    if args.omega1 <= 0 or args.time <= 0 or args.coupling < 0:
        raise BosecoolError("--omega1 and --time must be positive, --coupling non-negative")
    columns = ["alpha", "dn_pert", "dn1_pert", "dn2_pert", "dn_exact", "remainder_ratio", "validity_warning"]
    rows = []
    for a in alphas:
        cfg = NonlinearConfig.rescaled(args.omega1, a * args.omega1, args.coupling, args.time)
        pert = perturbative_delta_n(cfg, args.c1_form)
        dn_exact = ratio = None
        if args.mode in ("exact", "both"):
            ex = exact_evolve(cfg, check_convergence=False)
            dn_exact = ex.dn
            if args.mode == "both":
                half = NonlinearConfig.rescaled(args.omega1, a * args.omega1, args.coupling / 2, args.time)
                ex_half = exact_evolve(half, check_convergence=False)
                r_full = abs(ex.dn - pert.dn)
                r_half = abs(ex_half.dn - perturbative_delta_n(half, args.c1_form).dn)
                ratio = r_full / r_half if r_half > 0 else math.inf
        rows.append([float(a), pert.dn, pert.dn1, pert.dn2, dn_exact, ratio, bool(cfg.warnings)])
    params = {"omega1": args.omega1, "time": args.time, "coupling": args.coupling, "mode": args.mode,
              "alpha_min": args.alpha_min, "alpha_max": args.alpha_max, "alpha_steps": args.alpha_steps,
              "c1_form": args.c1_form, "units": "rescaled (beta = 1)"}
    _emit(args, params, columns, rows)
    return EXIT_OK


def cmd_asymptotics(args) -> int:
    if args.eps_min <= 0 or args.beta_omega1 <= 0:
        raise BosecoolError("--eps-min and --beta-omega1 must be positive")
    if args.eps_steps < 1 or args.eps_min > args.eps_max:
        raise BosecoolError("invalid epsilon grid")
    eps_grid = np.geomspace(args.eps_min, args.eps_max, args.eps_steps)
    columns = ["epsilon", "dn1", "dn2", "cop", "efficiency", "dn1_euler_maclaurin", "dn2_euler_maclaurin",
               "method_agreement", "ok"]
    rows, bad = [], 0
    for eps in eps_grid:
        direct = asymptotic_small_alpha(args.beta_omega1, float(eps), "direct_sum")
        em = asymptotic_small_alpha(args.beta_omega1, float(eps), "euler_maclaurin")
        try:
            hs = asymptotic_small_alpha(args.beta_omega1, float(eps), "hs_quadrature")
            agree = max(abs(hs.dn1 - direct.dn1) / abs(direct.dn1), abs(hs.dn2 - direct.dn2) / abs(direct.dn2))
        except BosecoolError:
            agree = math.nan
        ok = bool(agree <= 1e-6)
        bad += not ok
        rows.append([float(eps), direct.dn1, direct.dn2, direct.cop, direct.efficiency, em.dn1, em.dn2, agree, ok])
    params = {"beta_omega1": args.beta_omega1, "eps_min": args.eps_min, "eps_max": args.eps_max,
              "eps_steps": args.eps_steps, "spacing": "geometric"}
    _emit(args, params, columns, rows, {"violations": bad})
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_enumerate_terms(args) -> int:
    spec = ThermalSpec((args.omega1, args.omega2), 1.0, normalize=False)
    cutoffs = tuple(args.cutoffs) if args.cutoffs else None
    res = enumerate_second_order_terms(spec, cutoffs, args.observable, True, args.order)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "code_version": __version__,
        "command": args.command,
        "parameters": {"order": args.order, "omega1": args.omega1, "omega2": args.omega2,
                       "observable": args.observable, "cutoffs": list(cutoffs) if cutoffs else "auto"},
        "total": res.total_terms,
        "nonzero": res.nonzero_terms,
        "all_hermitian": res.hermiticity_consistent,
        "cutoff_stable": res.cutoff_stable,
        "nonzero_by_split": {f"{k},{kp}": v for (k, kp), v in sorted(res.nonzero_by_split.items())},
        "nonzero_words": [{"left": list(l), "right": list(r)} for l, r in res.nonzero_words],
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK if res.hermiticity_consistent and res.cutoff_stable else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bosecool", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("linear-certify", help="monotonicity of the total occupation under random linear maps")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--modes", type=int, default=None, help="mode count (default: random 1..4 per trial)")
    p.add_argument("--squeeze-budget", type=float, default=1.5)
    p.add_argument("--displacement-budget", type=float, default=1.0)
    common(p)
    p.set_defaults(func=cmd_linear_certify)

    p = sub.add_parser("entropy-certify", help="Bose-entropy growth verdicts")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--modes", type=int, default=2)
    p.add_argument("--squeeze-budget", type=float, default=1.5)
    common(p)
    p.set_defaults(func=cmd_entropy_certify)

    p = sub.add_parser("optimal-sweep", help="optimal permutation cooling across alpha")
    p.add_argument("--y-alpha", type=float, default=0.6)
    p.add_argument("--alpha-min", type=float, default=0.02)
    p.add_argument("--alpha-max", type=float, default=0.98)
    p.add_argument("--alpha-steps", type=int, default=481)
    p.add_argument("--blocks", type=int, default=300)
    common(p)
    p.set_defaults(func=cmd_optimal_sweep)

    p = sub.add_parser("nonlinear-scan", help="second-order (and exact) cooling by the three-wave interaction")
    p.add_argument("--omega1", type=float, default=0.35)
    p.add_argument("--time", type=float, default=10 * math.pi)
    p.add_argument("--coupling", type=float, default=0.01)
    p.add_argument("--alpha-min", type=float, default=0.05)
    p.add_argument("--alpha-max", type=float, default=4.0)
    p.add_argument("--alpha-steps", type=int, default=400)
    p.add_argument("--mode", choices=("perturbative", "exact", "both"), default="perturbative")
    p.add_argument("--c1-form", choices=("printed", "derived"), default="printed")
    common(p)
    p.set_defaults(func=cmd_nonlinear_scan)

    p = sub.add_parser("asymptotics", help="small-alpha optimal cooling by three evaluation routes")
    p.add_argument("--beta-omega1", type=float, default=10.0)
    p.add_argument("--eps-min", type=float, default=0.007)
    p.add_argument("--eps-max", type=float, default=1.0)
    p.add_argument("--eps-steps", type=int, default=40)
    common(p)
    p.set_defaults(func=cmd_asymptotics)

    p = sub.add_parser("enumerate-terms", help="count nonzero monomial traces of a Dyson order")
    p.add_argument("--l", dest="order", type=int, default=2, help="perturbative order")
    p.add_argument("--omega1", type=float, default=1.0)
    p.add_argument("--omega2", type=float, default=0.7)
    p.add_argument("--observable", choices=("n", "n1", "n2"), default="n")
    p.add_argument("--cutoffs", type=int, nargs=2, default=None)
    common(p, fmt=False)
    p.set_defaults(func=cmd_enumerate_terms)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BosecoolError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
