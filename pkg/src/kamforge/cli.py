"""Command-line entry point exposing every evaluator.

Single process per invocation; all diagnostics go to stderr, data to the
chosen sink.  Exit codes: 0 success, 2 invalid parameters, 3 numerical
failure, 64 usage error.  Identical (argv, seed) produce byte-identical
output; no timestamps or unordered maps are ever emitted.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys

from . import errors
from .constants import SCHEMES, constant_table
from .logvalue import LogValue
from .measures import DiophantineSpec, kolmogorov_set_bound, resonance_mc
from .mechanical import MechanicalModel, mech_norms, reproduce_table
from .params import KamParameters
from . import arnold as arnold_mod
from . import thresholds as thr

_EXIT_OK = 0
_EXIT_INVALID = 2
_EXIT_NUMERICAL = 3
_EXIT_USAGE = 64

_NUMERICAL_ERRORS = (
    errors.DivergentSum, errors.SmallDivisor, errors.NonzeroAverage,
    errors.NoConvergence, errors.SingularHessian, errors.ContractionFailed,
    errors.RecenterFailed, errors.HypothesisViolated, errors.NoAdmissibleMu,
    errors.NoAdmissibleR, errors.FocalExceeded, errors.UnsupportedDomain,
    errors.IntegratorFailure, errors.CapExceeded,
)

_SCHEME_ALIASES = {s.lower(): s for s in SCHEMES}
_SCHEME_ALIASES.update({
    "salamon-zehnder": "SalamonZehnder",
    "sharp-arnold": "SharpArnold",
    "extension-sharp": "ExtensionSharp",
    "leb-loc-gen": "LebLocGen",
    "moser": "Poschel",
})


def thread_budget() -> int:
    """Worker cap from KAMFORGE_THREADS (all evaluators run sequentially)."""
    try:
        return max(1, int(os.environ.get("KAMFORGE_THREADS", "1")))
    except ValueError:
        return 1


def _resolve_scheme(name: str) -> str:
    key = name.strip().lower()
    if key not in _SCHEME_ALIASES:
        raise errors.InvalidParams(
            f"unknown scheme {name!r}; choose from "
            f"{sorted(set(_SCHEME_ALIASES))}"
        )
    return _SCHEME_ALIASES[key]


def _parse_vector(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError as exc:
        raise errors.InvalidParams(f"malformed vector {text!r}") from exc


def _config_echo(ns: argparse.Namespace, skip=("output", "config")) -> dict:
    out = {}
    for key, value in sorted(vars(ns).items()):
        if key in skip or key == "func":
            continue
        out[key] = value
    return out


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_dump(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _csv_header(config: dict) -> str:
    parts = [f"{k}={v}" for k, v in sorted(config.items())]
    return "# config: " + " ".join(parts) + "\n"


def _require(ns: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(ns, name) is None:
            flag = "--" + name.replace("_", "-")
            raise errors.InvalidParams(f"missing required parameter {flag}")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_constants(ns) -> None:
    scheme = _resolve_scheme(ns.scheme)
    table = constant_table(scheme, ns.d, ns.tau, ns.nu_extra)
    config = _config_echo(ns)
    if ns.format == "json":
        _emit(_json_dump({"config": config, "table": table.to_json()}), ns.output)
        return
    lines = [_csv_header(config).rstrip("\n")]
    if ns.format == "csv":
        lines.append("name,sign,log10,value_if_representable")
        for name, lv in table.entries.items():
            v = lv.value_if_representable()
            lines.append(",".join([
                name, str(lv.sign),
                repr(lv.log10) if lv.sign else "-inf",
                "" if v is None else repr(v),
            ]))
    else:
        lines.append(f"scheme={table.scheme} d={table.d} tau={table.tau} "
                     f"nu_extra={table.nu_extra}")
        for name, lv in table.entries.items():
            v = lv.value_if_representable()
            shown = f"{v!r}" if v is not None else f"10^{lv.log10:.6f}"
            lines.append(f"  {name:>10} = {shown}")
    _emit("\n".join(lines) + "\n", ns.output)


def _build_params(ns, need_extra: dict | None = None) -> KamParameters:
    extra = dict(need_extra or {})
    for key, attr in (("E_hat", "e_hat"), ("nu", "nu"), ("s_hat", "s_hat"),
                      ("eps", "eps"), ("E0", "e0"), ("h0", "h0")):
        val = getattr(ns, attr, None)
        if val is not None:
            extra[key] = val
    if getattr(ns, "literal_sigma_exponent", None) is not None:
        extra["literal_sigma_exponent"] = bool(ns.literal_sigma_exponent)
    return KamParameters(
        d=ns.d, tau=ns.tau, alpha=ns.alpha, r=ns.r, s=ns.s, sigma=ns.sigma,
        omega=_parse_vector(ns.omega), M=ns.M, Kbound=ns.kbound,
        Tbound=ns.tbound, eps0=getattr(ns, "eps0", None), extra=extra,
    )


def _cmd_threshold(ns) -> None:
    scheme = _resolve_scheme(ns.scheme)
    _require(ns, "d", "tau", "alpha", "r", "s", "sigma", "omega", "M")
    if scheme == "Kolmogorov":
        _require(ns, "e_hat")
    if scheme == "Poschel":
        _require(ns, "nu")
    if scheme == "SalamonZehnder":
        _require(ns, "s_hat")
    params = _build_params(ns)
    res = thr.epsilon_star(scheme, params)
    config = _config_echo(ns)
    if ns.format == "json":
        _emit(_json_dump({"config": config, "result": res.to_json()}), ns.output)
        return
    payload = res.to_json()
    if ns.format == "csv":
        lines = [_csv_header(config).rstrip("\n"),
                 "scheme,epsilon_star,epsilon_star_log10,binding"]
        lines.append(",".join([
            res.scheme,
            "" if payload["epsilon_star"] is None else repr(payload["epsilon_star"]),
            "" if payload["epsilon_star_log10"] is None
            else repr(payload["epsilon_star_log10"]),
            res.binding_constraint,
        ]))
        _emit("\n".join(lines) + "\n", ns.output)
        return
    v = payload["epsilon_star"]
    shown = repr(v) if v is not None else f"10^{payload['epsilon_star_log10']:.4f}"
    _emit(_csv_header(config)
          + f"{res.scheme}: epsilon* = {shown} "
          f"(binding: {res.binding_constraint})\n",
          ns.output)


def _cmd_schedule(ns) -> None:
    scheme = _resolve_scheme(ns.scheme)
    if scheme not in ("Arnold", "Poschel"):
        raise errors.InvalidParams("schedule supports arnold and poschel")
    _require(ns, "d", "tau", "alpha", "r", "s", "sigma", "omega", "M")
    if scheme == "Arnold":
        _require(ns, "eps")
    else:
        _require(ns, "nu")
    params = _build_params(ns)
    sched = thr.schedule(scheme, params, ns.jmax)
    config = _config_echo(ns)
    if ns.format == "json":
        rows = []
        for row in sched.rows:
            rows.append({
                "j": row.j, "s": row.s, "sigma": row.sigma, "r": row.r,
                "kappa": row.kappa,
                "h_or_lambda_log10": row.h_or_lambda.log10
                if row.h_or_lambda.sign else None,
                "size_bound_log10": row.size_bound.log10
                if row.size_bound.sign else None,
                "K": row.Kb, "T": row.Tb,
                "theta_log10": row.theta.log10 if row.theta.sign else None,
            })
        notes = {k: (v.log10 if isinstance(v, LogValue) else v)
                 for k, v in sorted(sched.notes.items())}
        _emit(_json_dump({"config": config, "scheme": sched.scheme,
                          "rows": rows, "notes": notes}), ns.output)
        return
    _emit(_csv_header(config) + sched.to_csv(), ns.output)


def _cmd_iterate(ns) -> None:
    _require(ns, "eps")
    model = MechanicalModel(ns.d, ns.s)
    omega = _parse_vector(ns.omega) if ns.omega else None
    if omega is None:
        if ns.d == 2:
            omega = ((math.sqrt(5) - 1) / 2, 1.0)
        else:
            omega = tuple(2.0 ** ((i + 1) / (ns.d + 1)) for i in range(ns.d))
    alpha = ns.alpha
    if alpha is None:
        alpha = thr.diophantine_constant(omega, ns.tau, ns.kmax).alpha_hat
    M = mech_norms(ns.d, ns.s).M
    params = KamParameters(
        d=ns.d, tau=ns.tau, alpha=alpha, r=ns.r, s=ns.s, sigma=ns.sigma,
        omega=omega, M=M, Kbound=1.0, Tbound=1.0, extra={"eps": ns.eps},
    )
    K0 = model.K_jet(omega)
    P0 = model.P0_jet(omega)
    emb, log = arnold_mod.run_arnold(
        (K0, P0), params, ns.jmax, force=ns.force,
        run_past_floor=ns.run_past_floor, classic_kappa=ns.classic_kappa,
    )
    report = None
    if ns.verify:
        report = arnold_mod.verify_invariance(
            emb, model.system(ns.eps), ns.t_final, ns.n_angles, ns.rk4_tol)
    if ns.dump:
        with open(ns.dump, "w") as fh:
            for tr in emb.steps:
                fh.write(tr.g.to_json_lines())
    config = _config_echo(ns, skip=("output", "config", "dump"))
    if ns.format == "json":
        payload = {
            "config": config,
            "regime": log.regime,
            "rows": [{
                "j": r.j, "M": r.M, "bound_log10": r.bound_log10, "p": r.p,
                "kappa": r.kappa, "r": r.r, "floored": r.floored,
            } for r in log.rows],
            "notes": {k: v for k, v in sorted(log.notes.items())},
        }
        if report is not None:
            payload["defect_report"] = {
                "sup_defect": report.sup_defect,
                "mean_defect": report.mean_defect,
                "per_time": {repr(k): v for k, v in sorted(report.per_time.items())},
                "n_seeds": report.n_seeds,
                "rk4_tol": report.rk4_tol,
            }
        _emit(_json_dump(payload), ns.output)
        return
    text = _csv_header(config) + log.to_csv()
    if report is not None:
        text += (f"# defect sup={report.sup_defect!r} "
                 f"mean={report.mean_defect!r}\n")
    _emit(text, ns.output)


def _cmd_measure(ns) -> None:
    alphas = _parse_vector(ns.alpha) if ns.alpha else None
    if not alphas:
        raise errors.InvalidParams("missing required parameter --alpha")
    config = _config_echo(ns)
    if ns.variant == "mc":
        reports = []
        for a in alphas:
            spec = DiophantineSpec(alpha=a, tau=ns.tau, d=ns.d, k_cut=ns.k_cut)
            reports.append(resonance_mc(ns.R, spec, ns.samples, ns.seed))
        if ns.format == "csv" or len(alphas) > 1:
            lines = [_csv_header(config).rstrip("\n"),
                     "alpha,empirical,ci_halfwidth,analytic_bound,n_samples,seed"]
            for a, rep in zip(alphas, reports):
                lines.append(",".join(map(repr, [
                    a, rep.empirical, rep.ci_halfwidth, rep.analytic_bound,
                ])) + f",{rep.n_samples},{rep.seed}")
            _emit("\n".join(lines) + "\n", ns.output)
            return
        _emit(_json_dump({"config": config, "report": reports[0].to_json()}),
              ns.output)
        return
    rows = []
    for a in alphas:
        pd = {"d": ns.d, "tau": ns.tau, "alpha": a, "sigma0": ns.sigma0}
        if ns.variant == "I":
            pd.update(R=ns.R, T0=ns.tbound, tail_term=ns.tail_term,
                      samples=ns.samples, seed=ns.seed, k_cut=ns.k_cut)
        elif ns.variant == "II":
            pd.update(T=ns.tbound, theta=ns.theta, r0=ns.r0, eta=ns.eta,
                      diam=ns.diam)
        else:
            pd.update(T=ns.tbound, theta=ns.theta, n_D=ns.n_cubes, meas=ns.meas)
        bound, breakdown = kolmogorov_set_bound(ns.variant, pd)
        rows.append((a, bound, breakdown))
    if ns.format == "csv" or len(alphas) > 1:
        lines = [_csv_header(config).rstrip("\n"), "alpha,bound"]
        for a, bound, _ in rows:
            lines.append(f"{a!r},{bound!r}")
        _emit("\n".join(lines) + "\n", ns.output)
        return
    a, bound, breakdown = rows[0]
    _emit(_json_dump({"config": config, "bound": bound,
                      "breakdown": {k: v for k, v in sorted(breakdown.items())}}),
          ns.output)


def _cmd_table(ns) -> None:
    overrides = {}
    if ns.moser_nu is not None:
        overrides["moser_nu"] = ns.moser_nu
    if ns.moser_r is not None:
        overrides["moser_r"] = ns.moser_r
    policy = ns.alpha
    if policy not in ("oracle", "scan"):
        policy = str(float(policy))
    report = reproduce_table(policy, overrides)
    config = _config_echo(ns)
    if ns.format == "json":
        _emit(_json_dump({"config": config, "report": report.to_json()}),
              ns.output)
    elif ns.format == "csv":
        _emit(_csv_header(config) + report.to_csv(), ns.output)
    else:
        _emit(_csv_header(config) + report.to_text(), ns.output)


# ---------------------------------------------------------------------------
# parser assembly


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument("--output", default=None)
    p.add_argument("--seed", type=int, default=0)


def _add_instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--omega", type=str, default=None)
    p.add_argument("--M", type=float, default=None)
    p.add_argument("--kbound", type=float, default=1.0)
    p.add_argument("--tbound", type=float, default=1.0)
    p.add_argument("--eps0", type=float, default=None)
    p.add_argument("--e-hat", dest="e_hat", type=float, default=None)
    p.add_argument("--nu", type=float, default=None)
    p.add_argument("--s-hat", dest="s_hat", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--e0", type=float, default=None)
    p.add_argument("--h0", type=float, default=None)
    p.add_argument("--literal-sigma-exponent", dest="literal_sigma_exponent",
                   type=int, choices=(0, 1), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kamforge",
        description="Quantitative KAM engine: constants, thresholds, "
                    "iteration, measures.",
    )
    parser.add_argument("--config", default=None,
                        help="INI file with [subcommand] key=value defaults")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("constants", help="evaluate a scheme's constant table")
    p.add_argument("--scheme", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--nu-extra", dest="nu_extra", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_constants)

    p = sub.add_parser("threshold", help="smallness threshold of one theorem")
    p.add_argument("--scheme", required=True)
    _add_instance_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("schedule", help="per-step iteration schedule")
    p.add_argument("--scheme", required=True)
    _add_instance_flags(p)
    p.add_argument("--jmax", type=int, default=20)
    _add_common(p)
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("iterate", help="run the numerical Arnold iteration")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=None,
                   help="default: brute-force Diophantine constant")
    p.add_argument("--kmax", type=int, default=10**5)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--omega", type=str, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--jmax", type=int, default=3)
    p.add_argument("--force", action="store_true")
    p.add_argument("--classic-kappa", dest="classic_kappa", action="store_true")
    p.add_argument("--run-past-floor", dest="run_past_floor", action="store_true")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--t-final", dest="t_final", type=float, default=1.0)
    p.add_argument("--n-angles", dest="n_angles", type=int, default=4)
    p.add_argument("--rk4-tol", dest="rk4_tol", type=float, default=1e-11)
    p.add_argument("--dump", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_iterate)

    p = sub.add_parser("measure", help="resonance and Kolmogorov-set measures")
    p.add_argument("--variant", choices=("mc", "I", "II", "III"), default="mc")
    p.add_argument("--alpha", type=str, default=None,
                   help="value or comma list (sweep)")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=10**5)
    p.add_argument("--k-cut", dest="k_cut", type=int, default=200)
    p.add_argument("--sigma0", type=float, default=0.05)
    p.add_argument("--tbound", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--diam", type=float, default=1.0)
    p.add_argument("--n-cubes", dest="n_cubes", type=int, default=1)
    p.add_argument("--meas", type=float, default=1.0)
    p.add_argument("--tail-term", dest="tail_term", choices=("mc", "bound"),
                   default="bound")
    _add_common(p)
    p.set_defaults(func=_cmd_measure)

    p = sub.add_parser("table", help="reproduce the threshold comparison table")
    p.add_argument("--alpha", default="oracle",
                   help="oracle, scan, or an explicit value")
    p.add_argument("--moser-nu", dest="moser_nu", type=float, default=None)
    p.add_argument("--moser-r", dest="moser_r", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_table)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Insert config-file values as defaults ahead of explicit argv flags."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        path = argv[i + 1]
    except IndexError:
        return argv
    sub = next((a for a in argv if not a.startswith("-") and a != path), None)
    if sub is None:
        return argv
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    if not cp.has_section(sub):
        return argv
    known = set()
    for action in parser._subparsers._group_actions[0].choices[sub]._actions:
        for opt in action.option_strings:
            known.add(opt.lstrip("-"))
    injected = []
    for key, value in cp.items(sub):
        norm = key.replace("_", "-")
        if norm not in known:
            raise errors.InvalidParams(
                f"unknown config key {key!r} for subcommand {sub}"
            )
        injected.extend([f"--{norm}", value])
    head = argv[: argv.index(sub) + 1]
    tail = argv[argv.index(sub) + 1:]
    return head + injected + tail


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        argv = _apply_config(parser, list(argv))
        try:
            ns = parser.parse_args(argv)
        except SystemExit as exc:
            return _EXIT_USAGE if exc.code not in (0,) else 0
        ns.func(ns)
        return _EXIT_OK
    except errors.InvalidParams as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return _EXIT_INVALID
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
