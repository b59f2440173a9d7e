"""``parqq`` command-line front end.

Every subcommand builds a result payload (a JSON-ready dict) and optionally
CSV rows.  Output is deterministic: sorted keys, floats at 12 significant
digits.  Exit codes: 0 success, 2 invalid parameters or resource limits,
3 a checked property failed.

A JSON config file may stand in for flags (``--config job.json``); it is
expanded into flags placed before the command-line ones, so explicit flags
win.  A config may also name the ``command`` (and ``mode`` for simulate).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Optional

import numpy as np

from . import boolfn, qsim, walks
from .adversary import (
    adversary_ratio,
    build_gamma_tilde,
    check_fact1,
    lower_bound_chain,
    or_adversary_instance,
    write_matrix,
    write_matrix_csv,
)
from .certstruct import make_ed_function, make_ed_structure, make_ksum_structure, make_uniform_structure
from .errors import ParameterError, ParqqError, PropertyViolation
from .learngraph import (
    build_edge_set,
    check_primal_feasibility,
    ed_dual_certificate,
    ed_objective_closed_form,
    ed_stage_alpha,
    ksum_dual_certificate,
    ksum_stage_alpha,
    solve_primal,
    verify_dual_feasibility,
    verify_stage_dual,
)
from .learngraph.edges import edge_key
from .learngraph.witness import random_input_pair, witness_from_primal

EXIT_OK, EXIT_PARAM, EXIT_PROPERTY = 0, 2, 3
MAX_SWEEP_CELLS = 10**5
COMMANDS = ("bounds", "dual-verify", "lgc-solve", "walk-cost", "spectra", "simulate", "sweep", "fact-check")


@dataclass
class CommandResult:
    payload: dict
    header: Optional[list] = None
    rows: list = field(default_factory=list)
    default_format: str = "json"
    exit_code: int = 0


# ---------------------------------------------------------------------------
# formatting


def _clean(value):
    """Recursively convert to JSON-ready values with floats at 12 significant digits."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return float(f"{value:.12g}")
    return value


def _fmt_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def render(result: CommandResult, fmt: Optional[str]) -> str:
    fmt = fmt or result.default_format
    if fmt == "json":
        return json.dumps(_clean(result.payload), sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if result.header is not None:
        writer.writerow(result.header)
        writer.writerows([[_fmt_cell(v) for v in row] for row in result.rows])
    else:
        writer.writerow(["key", "value"])
        for key, value in sorted(_flatten(result.payload).items()):
            writer.writerow([key, _fmt_cell(value)])
    return buf.getvalue()


def _flatten(obj, prefix=""):
    out = {}
    for key, value in obj.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        elif isinstance(value, (list, tuple)):
            out[name] = json.dumps(_clean(value))
        else:
            out[name] = value
    return out


# ---------------------------------------------------------------------------
# handlers


def _problem_k(args) -> Optional[int]:
    if args.problem == "ksum":
        if args.k is None:
            raise ParameterError("--k is required for --problem ksum")
        return args.k
    return None


def _dual_for(args):
    k = _problem_k(args)
    if args.problem == "ed":
        return ed_dual_certificate(args.n, args.p)
    return ksum_dual_certificate(args.n, k, args.p)


def cmd_bounds(args) -> CommandResult:
    spec = args.function
    if spec.startswith("random:") and spec.count(":") == 1:
        spec = f"{spec}:{args.seed}"
    f = boolfn.parse_function(spec)
    report = boolfn.complexity_report(f, args.p)
    payload = {"function": spec, **report.as_dict()}
    if args.c is not None:
        payload["polynomial_relation"] = boolfn.polynomial_relation_check(f, args.p, args.c).as_dict()
    return CommandResult(payload)


def cmd_dual_verify(args) -> CommandResult:
    k = _problem_k(args)
    alpha = ed_stage_alpha(args.n, args.p) if args.problem == "ed" else ksum_stage_alpha(args.n, k, args.p)
    alpha = tuple(args.scale * a for a in alpha)
    if args.method == "naive":
        dual = _dual_for(args).scaled(args.scale)
        report = verify_dual_feasibility(dual, build_edge_set(args.n, args.p, args.stage_cap), method="naive")
    else:
        # stage duals on all k-subsets never need the block list
        report = verify_stage_dual(alpha, args.n, k or 2, args.p, args.stage_cap)
    payload = {
        "problem": args.problem,
        "n": args.n,
        "p": args.p,
        "feasible": report.feasible,
        "maxL": report.max_L,
        "objective": report.objective,
        "worst_edge": edge_key(*report.worst_edge) if report.worst_edge else None,
        "method": report.method,
        "alpha": list(alpha),
    }
    # edge counts grow like 2^n; very large ones are reported by magnitude
    if report.edges_checked < 2**63:
        payload["edges_checked"] = report.edges_checked
    else:
        payload["log10_edges_checked"] = math.log10(report.edges_checked)
    if args.problem == "ed" and args.scale == 1.0:
        payload["closed_form_objective"] = ed_objective_closed_form(args.n, args.p)
    if args.problem == "ksum":
        payload["k"] = args.k
    return CommandResult(payload)


def cmd_lgc_solve(args) -> CommandResult:
    k = _problem_k(args)
    if args.problem == "ed":
        structure = make_ed_structure(args.n)
    else:
        structure = make_uniform_structure(args.n, k)
    sol = solve_primal(structure, args.p, max_rounds=args.max_rounds)
    check = check_primal_feasibility(sol)
    dual = _dual_for(args)
    payload = {
        "problem": args.problem,
        "n": args.n,
        "p": args.p,
        "objective": sol.objective,
        "dual_objective": dual.objective,
        "weak_duality_holds": sol.objective >= dual.objective - 1e-6,
        "feasible": check.feasible,
        "max_energy": check.max_energy,
        "max_conservation_error": check.max_conservation_error,
        "rounds": sol.rounds,
        "converged": sol.converged,
        "edges": int(len(sol.sources)),
    }
    if args.witness_pairs:
        q = 2 * len(structure)
        fi = make_ed_function(args.n, q) if args.problem == "ed" else make_ksum_structure(args.n, k, q)
        rng = np.random.default_rng(args.seed)
        sums = [witness_from_primal(sol, fi, *random_input_pair(fi, rng)).cut_sum for _ in range(args.witness_pairs)]
        payload["witness"] = {"pairs": args.witness_pairs, "q": q, "min_cut_sum": min(sums), "max_cut_sum": max(sums)}
    if args.solution_out:
        Path(args.solution_out).write_text(json.dumps(sol.to_json(), sort_keys=True) + "\n")
    if not check.feasible:
        raise PropertyViolation("solver returned an infeasible primal", {"n": args.n, "p": args.p})
    return CommandResult(payload)


def cmd_walk_cost(args) -> CommandResult:
    k = _problem_k(args)
    if args.r == "auto":
        best = walks.optimize_r(args.problem, args.n, args.p, k, gap=args.gap)
        model, closed = best.model, best.closed_form_r
    else:
        model = walks.walk_cost_model(args.problem, args.n, args.p, int(args.r), k, gap=args.gap)
        closed = walks.closed_form_r(args.problem, args.n, args.p, k)
    payload = {**model.as_dict(), "closed_form_r": closed, "gap_model": args.gap, "problem": args.problem}
    return CommandResult(payload)


def cmd_spectra(args) -> CommandResult:
    w = walks.JohnsonWalk(args.n, args.r, lazy=args.lazy)
    spec = walks.product_spectrum(w, args.p)
    payload = {
        "n": args.n,
        "r": args.r,
        "p": args.p,
        "lazy": args.lazy,
        "eigenvalues": [list(e) for e in spec.eigenvalues],
        "second": spec.second,
        "gap": spec.gap,
        "single_gap": spec.single_gap,
        "gap_preserved": spec.gap_preserved,
    }
    return CommandResult(payload, ["eigenvalue", "multiplicity"], [list(e) for e in spec.eigenvalues], "csv")


def cmd_simulate(args) -> CommandResult:
    if args.mode == "grover":
        res = qsim.grover_parallel(args.n, args.p, args.marked, args.rounds)
        payload = {
            "mode": "grover",
            "n": args.n,
            "p": args.p,
            "marked": args.marked,
            "success": res.success,
            "closed_form": res.closed_form,
            "iterations": res.iterations,
            "rounds": res.rounds,
            "round_budget": math.ceil(math.pi / 4 * math.sqrt(args.n / args.p)) + 1,
            "log": res.log.summary(),
        }
        return CommandResult(payload)
    bits = qsim.bits_from_spec(args.x if args.x is not None else f"random:{args.seed}", args.n)
    res = qsim.interrogate(bits, args.p, args.eps, args.T)
    payload = {
        "mode": "interrogate",
        "n": args.n,
        "p": args.p,
        "eps": args.eps,
        "x": "".join(str(int(b)) for b in bits),
        "T": res.T,
        "success": res.success,
        "closed_form": res.closed_form,
        "rounds": res.rounds,
        "recovered": format(res.recovered(), f"0{args.n}b")[::-1],
        "log": res.log.summary(),
    }
    return CommandResult(payload)


def cmd_fact_check(args) -> CommandResult:
    if args.check == "fact1":
        rep = check_fact1(args.trials, (args.rows, args.cols), args.seed)
        payload = {"check": "fact1", "trials": rep.trials, "checked": rep.checked, "skipped": rep.skipped,
                   "max_ratio": rep.max_ratio, "seed": rep.seed}
        return CommandResult(payload)
    if args.check == "or":
        rep = adversary_ratio(or_adversary_instance(args.n), args.p, args.mode)
        payload = {"check": "or", "n": args.n, "p": args.p, "ratio": rep.ratio, "expected": math.sqrt(args.n / args.p),
                   "infinite": rep.infinite}
        return CommandResult(payload)
    fi = make_ed_function(args.n, args.q)
    chain = lower_bound_chain(ed_dual_certificate(args.n, args.p), fi, args.p)
    if args.export:
        gamma = build_gamma_tilde(ed_dual_certificate(args.n, args.p), fi).restricted().gamma
        (write_matrix_csv if args.export.endswith(".csv") else write_matrix)(args.export, gamma)
    payload = {
        "check": "chain",
        "n": args.n,
        "q": args.q,
        "p": args.p,
        "gamma_norm": chain.gamma_norm,
        "rescaled_gamma_norm": chain.rescaled_gamma_norm,
        "gamma_norm_floor": chain.gamma_norm_floor,
        "norm_floor_holds": chain.norm_floor_holds,
        "rescaled_norm_floor_holds": chain.rescaled_norm_floor_holds,
        "ratio": chain.ratio,
        "ratio_floor": chain.ratio_floor,
        "ratio_holds": chain.ratio_holds,
        "precondition_met": fi.precondition_met,
    }
    return CommandResult(payload)


# ---------------------------------------------------------------------------
# sweep


def _lookup(payload: dict, dotted: str):
    value = payload
    for part in dotted.split("."):
        if not isinstance(value, dict) or part not in value:
            raise ParameterError(f"metric {dotted!r} not found in the command output")
        value = value[part]
    return value


def _axis_value(params: dict, expr: str) -> float:
    """Evaluate ``a``, ``a/b`` or ``a*b`` style expressions over numeric parameters."""
    total, op, token = 1.0, "*", ""
    for ch in expr + "*":
        if ch in "*/":
            if token not in params:
                raise ParameterError(f"fit axis refers to unknown parameter {token!r}")
            v = float(params[token])
            total = total * v if op == "*" else total / v
            op, token = ch, ""
        else:
            token += ch
    return total


def fit_loglog(xs, ys) -> dict:
    from scipy import stats

    x, y = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    if x.size < 2 or np.ptp(x) == 0:
        raise ParameterError("a slope fit needs at least two distinct axis values")
    res = stats.linregress(x, y)
    dof = x.size - 2
    half = float(stats.t.ppf(0.975, dof) * res.stderr) if dof > 0 else float("nan")
    return {
        "slope": res.slope,
        "intercept": res.intercept,
        "stderr": res.stderr,
        "ci95": [res.slope - half, res.slope + half],
        "r2": res.rvalue**2,
        "points": int(x.size),
    }


def _params_to_argv(params: dict) -> list:
    argv = []
    for key, value in params.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        elif isinstance(value, list):
            for v in value:
                argv += [flag, str(v)]
        elif value is not None:
            argv += [flag, str(value)]
    return argv


def _run_cell(argv: list):
    """Worker entry point: ``(payload, None)`` or ``(None, (exit_code, message))``."""
    try:
        args = build_parser().parse_args(argv)
        return _clean(HANDLERS[args.command](args).payload), None
    except PropertyViolation as exc:
        return None, (EXIT_PROPERTY, str(exc))
    except (ParqqError, ValueError) as exc:
        return None, (EXIT_PARAM, str(exc))


def _parse_grid(entries) -> dict:
    grid = {}
    for entry in entries or []:
        key, sep, values = entry.partition("=")
        if not sep or not values:
            raise ParameterError(f"grid entries look like name=v1,v2,...; got {entry!r}")
        grid[key] = [_auto_type(v) for v in values.split(",")]
    return grid


def _auto_type(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def cmd_sweep(args) -> CommandResult:
    if args.target not in COMMANDS or args.target == "sweep":
        raise ParameterError(f"sweep target must be one of {[c for c in COMMANDS if c != 'sweep']}")
    base = dict(_parse_grid(args.set))
    base = {k: v[0] if len(v) == 1 else v for k, v in base.items()}
    grid = _parse_grid(args.grid)
    keys = list(grid)
    points = [dict(zip(keys, combo)) for combo in product(*(grid[k] for k in keys))] if keys else [{}]
    if len(points) > MAX_SWEEP_CELLS:
        raise ParameterError(f"grid of {len(points)} cells exceeds {MAX_SWEEP_CELLS}")
    prefix = [args.target] + ([base.pop("mode")] if args.target == "simulate" and "mode" in base else [])
    argvs = [prefix + _params_to_argv({**base, **pt}) for pt in points]
    if args.jobs > 1 and len(argvs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_run_cell, argvs))
    else:
        outcomes = [_run_cell(a) for a in argvs]

    cells, failures, fit_x, fit_y = [], [], [], []
    for pt, (payload, error) in zip(points, outcomes):
        cell = {"params": pt}
        if error is not None:
            cell["error"] = error[1]
            failures.append(error[0])
        else:
            cell["values"] = payload
            if args.metric:
                cell["metric"] = _lookup(payload, args.metric)
                if args.fit:
                    fit_x.append(_axis_value({**base, **pt}, args.fit))
                    fit_y.append(cell["metric"])
        cells.append(cell)
    result = {"target": args.target, "base": base, "grid": cells, "failed": len(failures)}
    if args.fit and fit_x:
        result["fit"] = {"metric": args.metric, "axis": args.fit, **fit_loglog(fit_x, fit_y)}
    header = keys + ([args.metric] if args.metric else []) + ["error"]
    rows = [
        [c["params"][k] for k in keys] + ([c.get("metric", "")] if args.metric else []) + [c.get("error", "")]
        for c in cells
    ]
    return CommandResult(result, header, rows, exit_code=max(failures, default=EXIT_OK))


HANDLERS = {
    "bounds": cmd_bounds,
    "dual-verify": cmd_dual_verify,
    "lgc-solve": cmd_lgc_solve,
    "walk-cost": cmd_walk_cost,
    "spectra": cmd_spectra,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "fact-check": cmd_fact_check,
}


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParameterError(message)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=["json", "csv"], default=None)
    p.add_argument("--out", default=None, help="write output here instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--config", default=None, help="JSON file standing in for flags")


def _problem(p: argparse.ArgumentParser):
    p.add_argument("--problem", choices=["ed", "ksum"], default="ed")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="parqq", description="Parallel quantum query complexity workbench.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("bounds", help="classical measures and p-parallel bounds of a Boolean function")
    p.add_argument("--function", required=True, help="or:n | and:n | parity:n | random:n[:seed] | hex:n:digits")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--c", type=float, default=None, help="also run the polynomial-relation check with this c")
    _common(p)

    p = sub.add_parser("dual-verify", help="check a closed-form dual certificate on the p-parallel edge set")
    _problem(p)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--method", choices=["symmetric", "naive"], default="symmetric")
    p.add_argument("--stage-cap", type=int, default=None)
    _common(p)

    p = sub.add_parser("lgc-solve", help="solve the primal weight/flow program")
    _problem(p)
    p.add_argument("--max-rounds", type=int, default=500)
    p.add_argument("--witness-pairs", type=int, default=0)
    p.add_argument("--solution-out", default=None)
    _common(p)

    p = sub.add_parser("walk-cost", help="walk cost breakdown at given or optimised r")
    _problem(p)
    p.add_argument("--r", default="auto")
    p.add_argument("--gap", choices=["lazy", "nominal"], default="lazy")
    _common(p)

    p = sub.add_parser("spectra", help="spectrum of the p-fold Johnson walk product")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--lazy", action="store_true")
    _common(p)

    p = sub.add_parser("simulate", help="state-vector simulations")
    modes = p.add_subparsers(dest="mode", parser_class=_Parser, required=True)
    g = modes.add_parser("grover")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--marked", type=int, required=True)
    g.add_argument("--rounds", default="auto")
    _common(g)
    i = modes.add_parser("interrogate")
    i.add_argument("--n", type=int, required=True)
    i.add_argument("--p", type=int, required=True)
    i.add_argument("--eps", type=float, default=0.1)
    i.add_argument("--x", default=None, help="0/1 string or random[:seed]")
    i.add_argument("--T", type=int, default=None)
    _common(i)

    p = sub.add_parser("sweep", help="run a command over a parameter grid, optionally fitting a log-log slope")
    p.add_argument("--target", required=True)
    p.add_argument("--set", action="append", help="fixed parameter name=value")
    p.add_argument("--grid", action="append", help="swept parameter name=v1,v2,...")
    p.add_argument("--metric", default=None, help="dotted key of the output to collect")
    p.add_argument("--fit", default=None, help="axis expression such as n/p")
    _common(p)

    p = sub.add_parser("fact-check", help="numerical adversary checks")
    p.add_argument("--check", choices=["fact1", "or", "chain"], default="fact1")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--rows", type=int, default=6)
    p.add_argument("--cols", type=int, default=6)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--q", type=int, default=6)
    p.add_argument("--mode", choices=["exact", "at_most"], default="exact")
    p.add_argument("--export", default=None, help="write Gamma (binary, or CSV for a .csv path)")
    _common(p)
    return parser


def _config_argv(argv: list) -> list:
    """Expand ``--config FILE`` into flags placed before the explicit ones."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise ParameterError("--config needs a path")
    path = argv[i + 1]
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ParameterError("config must be a JSON object")
    rest = argv[:i] + argv[i + 2 :]
    cfg = dict(cfg)
    command = cfg.pop("command", None)
    mode = cfg.pop("mode", None)
    head = []
    if not rest or rest[0] not in COMMANDS:
        if command is None:
            raise ParameterError("no command given on the command line or in the config")
        head = [command] + ([mode] if command == "simulate" and mode else [])
    else:
        head = [rest[0]]
        rest = rest[1:]
        if head[0] == "simulate":
            if rest and rest[0] in ("grover", "interrogate"):
                head.append(rest[0])
                rest = rest[1:]
            elif mode:
                head.append(mode)
    return head + _params_to_argv(cfg) + rest


def run(argv: list) -> tuple[int, str, str]:
    """Execute one invocation; returns ``(exit code, stdout text, stderr text)``."""
    try:
        argv = _config_argv(list(argv))
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise ParameterError(f"a command is required: one of {', '.join(COMMANDS)}")
        result = HANDLERS[args.command](args)
        text = render(result, args.format)
        if args.out:
            Path(args.out).write_text(text)
            text = ""
        note = f"{result.payload.get('failed')} sweep cell(s) failed\n" if result.exit_code else ""
        return result.exit_code, text, note
    except PropertyViolation as exc:
        detail = f" reproducer={json.dumps(_clean(exc.reproducer), sort_keys=True)}" if exc.reproducer else ""
        return EXIT_PROPERTY, "", f"property violation: {exc}{detail}\n"
    except (ParqqError, ValueError) as exc:
        return EXIT_PARAM, "", f"error: {exc}\n"


def main(argv: Optional[list] = None) -> int:
    code, out, err = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
