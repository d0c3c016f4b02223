"""Command-line front end: ``chancekit {solve,certify,validate,emit}``.

Problem files are JSON with explicit dimensions; nothing is inferred from
array shapes::

    {
      "n": 2, "d": 2, "m": 2,
      "objective": [1, 1],
      "bounds": {"lower": [0, 0], "upper": [2, 2]},        # null entries mean unbounded
      "constraints": [{"coef": [1, 1], "sense": "<=", "rhs": 3}],   # optional
      "chance_constraint": {
        "epsilon": 0.05,
        "rows": [{"a0": [-1, 0], "b0": 0, "A": [[0, 0], [0, 0]], "b": [1, 0]}, ...]
      },
      "uncertainty": {"kind": "uniform_box", "lo": [0, 0], "hi": [1, 1]}   # optional
    }

Each chance row is ``(a0 + A^T xi)^T x + b0 + b^T xi <= 0`` with ``A`` of
shape d-by-n; ``A`` may be omitted for rows separable in ``xi``.  Scenario
files are CSV with header ``xi_1,...,xi_d``.  With ``--method robust`` and an
uncertainty model, the set is placed around ``E[xi]``.

Exit codes: 0 optimal, 1 input or schema error, 2 infeasible or otherwise
not optimal, 3 certificate unavailable.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import certificates as cert
from .lpformat import write_lp
from .model import CCProgram, CCRow, GeneratorSpec, LinearRow, ScenarioSet, draw_scenarios, make_rng
from .reformulate import cvar_sample, gaussian_from_program, saa_bigM, saa_separable_strong, scenario_problem
from .robust import (UncertaintySetSpec, ball_radius, budget_gamma, centre_program, directional_deviations,
                     robust_counterpart)
from .solvers import solve
from .support import find_support_scenarios
from .validate import (CoordinatewiseMaxFamily, TrialRecord, discarding_experiment, estimate_violation,
                       lower_bound_experiment, violation_distribution_experiment, write_trials_csv)

EXIT_OK, EXIT_SCHEMA, EXIT_INFEASIBLE, EXIT_NO_CERT = 0, 1, 2, 3
METHODS = ("scenario", "saa", "cvar", "robust", "gaussian")
DATA_METHODS = ("scenario", "saa", "cvar")
USETS = ("box", "ball", "ball_box", "budget", "U3", "U4", "U5")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _schema(msg: str) -> CliError:
    return CliError(EXIT_SCHEMA, msg)


# ---------------------------------------------------------------------------
# problem ingestion
# ---------------------------------------------------------------------------

def _field(obj, key, path):
    if not isinstance(obj, dict) or key not in obj:
        raise _schema(f"{path}: missing field {key!r}")
    return obj[key]


def _int(obj, key, path) -> int:
    v = _field(obj, key, path)
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise _schema(f"{path}.{key}: expected a positive integer, got {v!r}")
    return v


def _number(v, path, allow_null=False) -> float:
    if v is None and allow_null:
        return np.nan
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _schema(f"{path}: expected a number, got {v!r}")
    return float(v)


def _vector(v, size, path, allow_null=False) -> np.ndarray:
    if not isinstance(v, list) or len(v) != size:
        raise _schema(f"{path}: expected a list of {size} numbers")
    return np.array([_number(e, f"{path}[{i}]", allow_null) for i, e in enumerate(v)])


def _matrix(v, rows, cols, path) -> np.ndarray:
    if not isinstance(v, list) or len(v) != rows:
        raise _schema(f"{path}: expected a {rows}x{cols} matrix (list of {rows} rows)")
    return np.array([_vector(r, cols, f"{path}[{i}]") for i, r in enumerate(v)]).reshape(rows, cols)


def parse_problem(doc: dict) -> tuple[CCProgram, GeneratorSpec | None]:
    """Validate a decoded problem document and build the model objects."""
    n, d, m = _int(doc, "n", "$"), _int(doc, "d", "$"), _int(doc, "m", "$")
    c = _vector(_field(doc, "objective", "$"), n, "$.objective")
    bounds = doc.get("bounds", {})
    if not isinstance(bounds, dict):
        raise _schema("$.bounds: expected an object with 'lower' and 'upper'")
    lower = _vector(bounds.get("lower", [None] * n), n, "$.bounds.lower", allow_null=True)
    upper = _vector(bounds.get("upper", [None] * n), n, "$.bounds.upper", allow_null=True)
    lower = np.where(np.isnan(lower), -np.inf, lower)
    upper = np.where(np.isnan(upper), np.inf, upper)
    det = []
    cons = doc.get("constraints", [])
    if not isinstance(cons, list):
        raise _schema("$.constraints: expected a list")
    for i, row in enumerate(cons):
        p = f"$.constraints[{i}]"
        sense = _field(row, "sense", p)
        if sense not in ("<=", ">=", "="):
            raise _schema(f"{p}.sense: expected '<=', '>=' or '=', got {sense!r}")
        det.append(LinearRow(_vector(_field(row, "coef", p), n, f"{p}.coef"), sense,
                             _number(_field(row, "rhs", p), f"{p}.rhs")))
    cc = _field(doc, "chance_constraint", "$")
    eps = _number(_field(cc, "epsilon", "$.chance_constraint"), "$.chance_constraint.epsilon")
    if not 0.0 < eps < 1.0:
        raise _schema(f"$.chance_constraint.epsilon: must lie in (0, 1), got {eps}")
    rows = _field(cc, "rows", "$.chance_constraint")
    if not isinstance(rows, list) or len(rows) != m:
        raise _schema(f"$.chance_constraint.rows: expected m = {m} rows")
    cc_rows = []
    for i, row in enumerate(rows):
        p = f"$.chance_constraint.rows[{i}]"
        a0 = _vector(_field(row, "a0", p), n, f"{p}.a0")
        b0 = _number(_field(row, "b0", p), f"{p}.b0")
        A = _matrix(row["A"], d, n, f"{p}.A") if "A" in row else np.zeros((d, n))
        b = _vector(_field(row, "b", p), d, f"{p}.b")
        cc_rows.append(CCRow(a0, b0, A, b))
    try:
        prog = CCProgram(c, tuple(cc_rows), eps, tuple(det), lower, upper)
    except ValueError as exc:
        raise _schema(f"$: {exc}") from None
    gen = None
    if "uncertainty" in doc:
        gen = parse_generator(doc["uncertainty"], "$.uncertainty")
        if gen.d != d:
            raise _schema(f"$.uncertainty: generator has dimension {gen.d}, expected d = {d}")
    return prog, gen


def parse_generator(spec, path="generator") -> GeneratorSpec:
    if not isinstance(spec, dict):
        raise _schema(f"{path}: expected an object with a 'kind' field")
    try:
        return GeneratorSpec.from_dict(spec)
    except (ValueError, TypeError) as exc:
        raise _schema(f"{path}: {exc}") from None


def _load_json(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise _schema(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_problem(path) -> tuple[CCProgram, GeneratorSpec | None]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _schema(f"{path}: {exc.strerror}") from None
    doc = _load_json(text, str(path))
    if not isinstance(doc, dict):
        raise _schema(f"{path}: top level must be an object")
    return parse_problem(doc)


def _generator_arg(value: str | None, fallback: GeneratorSpec | None, d: int) -> GeneratorSpec | None:
    if value is None:
        return fallback
    text = Path(value).read_text() if Path(value).is_file() else value
    gen = parse_generator(_load_json(text, "--generate"), "--generate")
    if gen.d != d:
        raise _schema(f"--generate: generator has dimension {gen.d}, expected d = {d}")
    return gen


def _scenarios(args, prog: CCProgram, gen: GeneratorSpec | None, N: int | None) -> ScenarioSet:
    if args.scenarios:
        try:
            scen = ScenarioSet.from_csv(args.scenarios)
        except (OSError, ValueError) as exc:
            raise _schema(str(exc)) from None
        if scen.d != prog.d:
            raise _schema(f"{args.scenarios}: scenarios have {scen.d} columns, expected d = {prog.d}")
        return scen
    if gen is None:
        raise _schema("scenario data needed: pass --scenarios, --generate or an 'uncertainty' block")
    if N is None:
        raise _schema("--n-scenarios is required when generating scenarios")
    return draw_scenarios(gen, N, args.seed)


# ---------------------------------------------------------------------------
# method dispatch
# ---------------------------------------------------------------------------

def _uncertainty_set(args, prog: CCProgram, gen: GeneratorSpec | None) -> UncertaintySetSpec:
    eps = prog.epsilon
    kind = args.uset
    if kind == "box":
        return UncertaintySetSpec.box()
    if kind == "ball":
        return UncertaintySetSpec.ball(args.radius if args.radius is not None else ball_radius(eps))
    if kind == "ball_box":
        return UncertaintySetSpec.ball_box(args.radius if args.radius is not None else ball_radius(eps))
    if kind == "budget":
        return UncertaintySetSpec.budget(args.radius if args.radius is not None else budget_gamma(prog.d, eps))
    if gen is None:
        raise _schema(f"--uset {kind} derives its shape from the uncertainty model; none was given")
    if kind == "U3":
        if gen.kind != "gaussian":
            raise _schema("--uset U3 needs a gaussian uncertainty model")
        return UncertaintySetSpec.U3(gen.params["Sigma"], eps)
    dev = directional_deviations(gen)
    maker = UncertaintySetSpec.U4 if kind == "U4" else UncertaintySetSpec.U5
    return maker(dev.delta_plus, dev.delta_minus, eps)


def build_program(args, prog: CCProgram, gen: GeneratorSpec | None, scen: ScenarioSet | None):
    """Reformulate ``prog`` with the method selected on the command line."""
    method = args.method
    try:
        if method == "scenario":
            return scenario_problem(prog, scen)
        if method == "saa":
            if args.eps_level is None:
                raise _schema("--method saa needs --eps-level")
            if args.strong:
                return saa_separable_strong(prog, scen, args.eps_level)
            return saa_bigM(prog, scen, args.eps_level, args.bigM)
        if method == "cvar":
            return cvar_sample(prog, scen)
        if method == "robust":
            # sets describe zero-mean perturbations around E[xi]
            centred = prog if gen is None else centre_program(prog, gen.mean())
            return robust_counterpart(centred, _uncertainty_set(args, prog, gen))
        if gen is None or gen.kind != "gaussian":
            raise _schema("--method gaussian needs a gaussian uncertainty model")
        return gaussian_from_program(prog, gen)
    except ValueError as exc:
        raise _schema(str(exc)) from None


def _add_method_flags(p: argparse.ArgumentParser, problem_optional: bool = False) -> None:
    p.add_argument("problem", nargs="?" if problem_optional else None, help="problem JSON file")
    p.add_argument("--method", choices=METHODS, default="scenario")
    p.add_argument("--scenarios", help="scenario CSV (header xi_1,...,xi_d)")
    p.add_argument("--generate", help="generator JSON (inline or file); defaults to the problem's 'uncertainty'")
    p.add_argument("--n-scenarios", type=int, dest="n_scenarios")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps-level", type=float, dest="eps_level", help="SAA level eps'")
    p.add_argument("--strong", action="store_true", help="SAA: strengthened separable form")
    p.add_argument("--bigM", type=float, default=None, help="SAA: override the derived big-M")
    p.add_argument("--uset", choices=USETS, default="ball", help="robust: uncertainty set")
    p.add_argument("--radius", type=float, default=None, help="robust: radius or budget override")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _emit_json(obj, out) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _floats(v):
    return None if v is None else [float(e) for e in v]


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    prog, gen0 = load_problem(args.problem)
    gen = _generator_arg(args.generate, gen0, prog.d)
    N = args.n_scenarios
    certificate = None
    cert_error = None
    if args.certify in ("prior", "prior-simple"):
        h_bar = args.h_bar if args.h_bar is not None else prog.n
        rule = "exact_2008" if args.certify == "prior" else "closed_form_2009"
        pc = cert.PriorCertificate.build(prog.epsilon, args.beta, h_bar, rule)
        if N is None and not args.scenarios:
            N = pc.N_required
        certificate = {"kind": args.certify, "epsilon": pc.epsilon, "beta": pc.beta,
                       "h_bar": pc.h_bar, "N_required": pc.N_required}

    scen = _scenarios(args, prog, gen, N) if args.method in DATA_METHODS else None
    t1 = time.perf_counter()
    dp = build_program(args, prog, gen, scen)
    t2 = time.perf_counter()
    res = solve(dp, lexicographic=args.method == "scenario")
    t3 = time.perf_counter()

    report = {"method": args.method, "provenance": dp.provenance, "status": res.status,
              "x": _floats(res.x_star), "objective": None if not res.optimal else float(res.objective),
              "N": None if scen is None else scen.N, "certificate": certificate}

    if res.optimal and args.certify:
        if args.certify in ("prior", "prior-simple"):
            if args.method != "scenario":
                cert_error = "the a-priori certificate applies to the scenario method only"
            elif scen.N < certificate["N_required"]:
                cert_error = f"N = {scen.N} is below the required {certificate['N_required']}"
            certificate["N_used"] = scen.N
        elif args.certify == "posterior":
            if args.method != "scenario":
                cert_error = "the wait-and-judge certificate applies to the scenario method only"
            else:
                rep = find_support_scenarios(prog, scen, res)
                report["support_set"] = rep.support
                if rep.degenerate:
                    cert_error = "degenerate scenario program; the support count does not certify"
                else:
                    pc = cert.PosteriorCertificate.build(scen.N, rep.count, args.beta)
                    certificate = {"kind": "posterior", "N": scen.N, "k": rep.count, "beta": args.beta,
                                   "t_root": pc.root, "eps_k": pc.epsilon_of_k}
        elif args.certify == "feasibility":
            if gen is None:
                cert_error = "the feasibility bound needs an uncertainty model to sample from"
            else:
                eps_hat, V = estimate_violation(prog, res.x_star, gen, args.fresh_samples, args.seed + 1)
                fb = cert.FeasibilityBound.build(args.fresh_samples, V, args.rho)
                certificate = {"kind": "feasibility", "N_hat": fb.N_hat, "V_hat": fb.V_hat,
                               "eps_hat": eps_hat, "rho": fb.rho, "eps_bar": fb.eps_bar,
                               "certified": fb.eps_bar <= prog.epsilon}
    if cert_error:
        certificate = {**(certificate or {}), "kind": args.certify, "unavailable": cert_error}
    report["certificate"] = certificate
    report["timings"] = {"ingest_ms": 1e3 * (t1 - t0), "reformulate_ms": 1e3 * (t2 - t1),
                         "solve_ms": 1e3 * (t3 - t2)}
    _emit_json(report, args.out)
    if not res.optimal:
        return EXIT_INFEASIBLE
    return EXIT_NO_CERT if cert_error else EXIT_OK


CERT_MODES = ("prior", "prior-simple", "posterior", "feasibility", "discard", "order-stat",
              "saa-feasibility", "saa-lowerbound", "saa-order-stat")

_REQUIRED = {
    "prior": ("eps", "beta", "h"),
    "prior-simple": ("eps", "beta", "h"),
    "posterior": ("N", "k", "beta"),
    "feasibility": ("N", "V", "rho"),
    "discard": ("N", "n", "eps", "beta"),
    "order-stat": ("M", "N", "eps", "delta"),
    "saa-feasibility": ("eps", "eps_inner", "gamma", "L_lip", "D_diam", "n", "beta"),
    "saa-lowerbound": ("eps", "eps_level", "delta"),
    "saa-order-stat": ("K", "N", "eps", "eps_level", "delta"),
}


def certify(mode: str, p: dict) -> dict:
    """Pure dispatch to the certificates module; returns the result fields."""
    if mode == "prior":
        return {"N": cert.prior_sample_size_exact(p["eps"], p["beta"], p["h"])}
    if mode == "prior-simple":
        return {"N": cert.prior_sample_size_simple(p["eps"], p["beta"], p["h"])}
    if mode == "posterior":
        pc = cert.PosteriorCertificate.build(p["N"], p["k"], p["beta"])
        return {"t_root": pc.root, "eps_k": pc.epsilon_of_k}
    if mode == "feasibility":
        return {"eps_bar": cert.posterior_violation_bound(p["N"], p["V"], p["rho"])}
    if mode == "discard":
        return {"k": cert.discard_budget(p["N"], p["n"], p["eps"], p["beta"])}
    if mode == "order-stat":
        return {"L": cert.order_stat_index(p["M"], p["N"], p["eps"], p["delta"])}
    if mode == "saa-feasibility":
        return {"N": cert.saa_feasibility_sample_size(p["eps"], p["eps_inner"], p["gamma"], p["L_lip"],
                                                      p["D_diam"], p["n"], p["beta"])}
    if mode == "saa-lowerbound":
        return {"N": cert.saa_lowerbound_sample_size(p["eps"], p["eps_level"], p["delta"])}
    return {"L": cert.saa_order_stat_index(p["K"], p["N"], p["eps"], p["eps_level"], p["delta"],
                                           at_most=p.get("at_most", False))}


def cmd_certify(args) -> int:
    params = {k: getattr(args, k) for k in _REQUIRED[args.mode]}
    missing = [k for k, v in params.items() if v is None]
    if missing:
        raise _schema(f"--mode {args.mode} needs " + ", ".join("--" + k.replace("_", "-") for k in missing))
    if args.mode == "saa-order-stat":
        params["at_most"] = args.at_most
    try:
        result = certify(args.mode, params)
    except cert.CertificateError as exc:
        _emit_json({"mode": args.mode, "input": params, "unavailable": str(exc)}, args.out)
        return EXIT_NO_CERT
    except ValueError as exc:
        raise _schema(str(exc)) from None
    _emit_json({"mode": args.mode, "input": params, **result}, args.out)
    return EXIT_OK


def _validate_family(args):
    n = args.n
    fam = CoordinatewiseMaxFamily(n, args.eps)
    N = args.n_scenarios or cert.prior_sample_size_exact(args.eps, args.beta, n)
    summary = {"family": "coordinatewise", "n": n, "epsilon": args.eps, "beta": args.beta,
               "N": N, "trials": args.trials, "seed": args.seed, "experiment": args.experiment,
               "optimum": fam.optimum}
    if args.experiment == "lower-bound":
        L = cert.order_stat_index(args.trials, N, args.eps, args.delta)
        bound, objs = lower_bound_experiment(fam.program, fam.generator, args.trials, N, L, args.delta, args.seed)
        summary.update({"M": args.trials, "L": L, "delta": args.delta, "lower_bound": bound,
                        "below_optimum": bool(bound <= fam.optimum + 1e-9)})
        records = [TrialRecord(j, N, float(o), float("nan"), None, "scenario", 0.0) for j, o in enumerate(objs)]
        return records, summary
    if args.experiment == "discard":
        k = args.k if args.k is not None else cert.discard_budget(N, n, args.eps, args.beta)
        exp = discarding_experiment(fam, N, k, args.trials, args.seed)
        summary["k"] = k
    else:
        exp = violation_distribution_experiment(fam, N, args.trials, args.seed, support=args.support)
    summary.update(_coverage(exp.violations, args.eps, args.beta))
    return exp.records, summary


def _coverage(violations: np.ndarray, eps: float, beta: float) -> dict:
    cov = float(np.mean(violations <= eps))
    return {"mean_violation": float(np.mean(violations)), "max_violation": float(np.max(violations)),
            "empirical_coverage": cov, "target_coverage": 1.0 - beta, "meets_target": cov >= 1.0 - beta}


def _validate_problem(args):
    prog, gen0 = load_problem(args.problem)
    gen = _generator_arg(args.generate, gen0, prog.d)
    if gen is None:
        raise _schema("validation needs an uncertainty model (--generate or an 'uncertainty' block)")
    if args.fresh_samples is None:
        raise _schema("--fresh-samples is required when validating a problem file")
    N = args.n_scenarios or cert.prior_sample_size_exact(prog.epsilon, args.beta, prog.n)
    records = []
    for t in range(args.trials):
        start = time.perf_counter()
        scen = None
        if args.method in DATA_METHODS:
            scen = ScenarioSet(gen.sample(make_rng(args.seed, t), N), {"seed": args.seed, "trial": t})
        res = solve(build_program(args, prog, gen, scen))
        if not res.optimal:
            raise CliError(EXIT_INFEASIBLE, f"trial {t}: reformulation is {res.status}")
        eps_hat, _ = estimate_violation(prog, res.x_star, gen, args.fresh_samples,
                                        int(make_rng(args.seed, t, 1).integers(2**63)))
        ms = 1e3 * (time.perf_counter() - start)
        records.append(TrialRecord(t, N, res.objective, eps_hat, None, args.method, ms))
    summary = {"problem": str(args.problem), "method": args.method, "epsilon": prog.epsilon, "beta": args.beta,
               "N": N, "trials": args.trials, "fresh_samples": args.fresh_samples, "seed": args.seed,
               **_coverage(np.array([r.violation for r in records]), prog.epsilon, args.beta)}
    return records, summary


def cmd_validate(args) -> int:
    if args.trials < 1:
        raise _schema("--trials must be positive")
    if args.family:
        records, summary = _validate_family(args)
    else:
        if args.problem is None:
            raise _schema("give a problem file or --family coordinatewise")
        records, summary = _validate_problem(args)
    if args.csv:
        write_trials_csv(records, args.csv)
        summary["csv"] = str(args.csv)
    _emit_json(summary, args.out)
    return EXIT_OK


def cmd_emit(args) -> int:
    prog, gen0 = load_problem(args.problem)
    gen = _generator_arg(args.generate, gen0, prog.d)
    scen = _scenarios(args, prog, gen, args.n_scenarios) if args.method in DATA_METHODS else None
    dp = build_program(args, prog, gen, scen)
    written = write_lp(dp, args.output)
    sys.stdout.write("\n".join(str(p) for p in written) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chancekit", description="Chance-constrained linear programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="reformulate and solve a problem")
    _add_method_flags(p)
    p.add_argument("--certify", choices=("prior", "prior-simple", "posterior", "feasibility"))
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--h-bar", type=int, dest="h_bar", help="Helly-dimension bound (default n)")
    p.add_argument("--fresh-samples", type=int, dest="fresh_samples", default=100_000)
    p.add_argument("--rho", type=float, default=0.05)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", help="evaluate a certificate formula")
    p.add_argument("--mode", choices=CERT_MODES, required=True)
    for name, typ in (("eps", float), ("beta", float), ("h", int), ("N", int), ("k", int), ("V", int),
                      ("rho", float), ("n", int), ("M", int), ("K", int), ("delta", float),
                      ("eps-level", float), ("eps-inner", float), ("gamma", float), ("L-lip", float),
                      ("D-diam", float)):
        p.add_argument("--" + name, type=typ, dest=name.replace("-", "_"))
    p.add_argument("--at-most", action="store_true", dest="at_most",
                   help="saa-order-stat: require the binomial sum to stay <= delta")
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("validate", help="Monte Carlo validation over repeated trials")
    _add_method_flags(p, problem_optional=True)
    p.add_argument("--family", choices=("coordinatewise",), help="built-in family with exact violation")
    p.add_argument("--n", type=int, default=2, help="family dimension")
    p.add_argument("--eps", type=float, default=0.05, help="family epsilon")
    p.add_argument("--experiment", choices=("violation", "discard", "lower-bound"), default="violation")
    p.add_argument("--support", action="store_true", help="also count support scenarios")
    p.add_argument("--k", type=int, help="discard count (default: largest certified)")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--fresh-samples", type=int, dest="fresh_samples")
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("emit", help="write the reformulated program in LP format")
    _add_method_flags(p)
    p.add_argument("--format", choices=("lp",), default="lp")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_emit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"chancekit: {exc}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
