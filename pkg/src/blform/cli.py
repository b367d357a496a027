"""Command line front end.

Exit codes: 0 success, 1 experiment or selftest failure, 2 hypothesis
violated, 3 invalid datum, 4 cross ratio undefined, 5 quadrature not
converged (value still printed), 6 oracle disagreement.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import datum as dm
from .classifier import CrossRatioUndefined, HypothesisViolated, InvalidDatum, classify, cross_ratio
from .datum import ExponentTriple, NormalForm, datum_from_json, format_rational, witness_to_json
from .quadrature import (
    QuadConfig,
    QuadResult,
    bht_form,
    carleson_form,
    pv_form,
    smoothed_form_4beta,
    tht_form,
    trunc_special_form,
)
from .specs import PiecewisePhase, spec_from_json

EXIT_FAIL = 1
EXIT_HYPOTHESIS = 2
EXIT_INVALID = 3
EXIT_UNDEFINED = 4
EXIT_NOT_CONVERGED = 5
EXIT_ORACLE = 6


# -- deterministic output ---------------------------------------------------------


def _num(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj) -> str:
    """JSON with floats written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag])
    if isinstance(obj, Fraction):
        return json.dumps(format_rational(obj))
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if hasattr(obj, "item"):
        return dumps(obj.item())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text + ("" if text.endswith("\n") else "\n"))
    else:
        sys.stdout.write(text + ("" if text.endswith("\n") else "\n"))


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _cross_ratio_text(value) -> str:
    return "inf" if value == math.inf else format_rational(value)


# -- classify / invariant ------------------------------------------------------------------


def run_classify(args) -> int:
    try:
        d = datum_from_json(_load_json(args.input))
    except (ValueError, KeyError, TypeError) as exc:
        _err(f"invalid datum: {exc}")
        return EXIT_INVALID
    try:
        res = classify(d)
    except HypothesisViolated as exc:
        _err(f"hypothesis violated: {exc}")
        return EXIT_HYPOTHESIS
    except InvalidDatum as exc:
        _err(f"invalid datum: {exc}")
        return EXIT_INVALID
    out = {"normal_form": res.normal_form.tag}
    if res.normal_form.tag == "L4":
        out["beta"] = format_rational(res.normal_form.beta)
    out["case"] = res.case
    out["witness"] = witness_to_json(res.witness)
    try:
        out["cross_ratio"] = _cross_ratio_text(cross_ratio(d))
    except CrossRatioUndefined:
        out["cross_ratio"] = None
    out["verified"] = dm.verify_witness(d, res.witness, res.normal_form)
    _emit(dumps(out), args.out)
    return 0


def run_invariant(args) -> int:
    try:
        d = datum_from_json(_load_json(args.input))
    except (ValueError, KeyError, TypeError) as exc:
        _err(f"invalid datum: {exc}")
        return EXIT_INVALID
    try:
        value = cross_ratio(d)
    except CrossRatioUndefined as exc:
        _err(f"cross ratio undefined: {exc}")
        _emit(dumps({"cross_ratio": None}), args.out)
        return EXIT_UNDEFINED
    _emit(dumps({"cross_ratio": _cross_ratio_text(value)}), args.out)
    return 0


# -- evaluate -----------------------------------------------------------------------------


def _config(args) -> QuadConfig:
    base = QuadConfig.from_json(_load_json(args.config)) if getattr(args, "config", None) else QuadConfig()
    kw = {}
    if args.t_eps is not None:
        kw["t_eps"] = args.t_eps
    if args.t_max is not None:
        kw["t_max"] = args.t_max
    if args.xy_points is not None:
        kw["xy_points"] = args.xy_points
    return base.replace(**kw) if kw else base


def _param(name: str) -> tuple[str, Fraction | None]:
    head, _, tail = name.partition(":")
    return head, (Fraction(tail) if tail else None)


def _phase(obj) -> PiecewisePhase:
    if isinstance(obj, dict) and obj.get("type") == "phase":
        return spec_from_json(obj)
    pieces = obj["pieces"] if isinstance(obj, dict) else obj
    return PiecewisePhase(tuple(tuple(p) for p in pieces))


def evaluate_named(name: str, funcs: dict, cfg: QuadConfig) -> QuadResult:
    head, par = _param(name)
    sp = lambda k: spec_from_json(funcs[k])
    if head in ("L1", "L2", "L3") or head == "L4":
        nf = NormalForm(head, par if head == "L4" else None) if head == "L4" else NormalForm(head)
        if head == "L4" and par is None:
            raise ValueError("L4 needs a parameter, e.g. L4:2")
        return pv_form(nf, sp("f"), sp("G"), sp("H"), cfg)
    if head == "tht":
        return tht_form(sp("F"), sp("G"), sp("H"), cfg)
    if head == "bht":
        return bht_form(sp("f"), sp("g"), sp("h"), float(par if par is not None else 1), cfg)
    if head == "carleson":
        cut = sp("cutoff") if "cutoff" in funcs else None
        return carleson_form(sp("f"), sp("g"), _phase(funcs["phase"]), cfg, cutoff=cut)
    if head == "special":
        return trunc_special_form(sp("f"), sp("G"), sp("H"), float(par), cfg)
    if head == "smoothed":
        return smoothed_form_4beta(sp("f"), sp("G"), sp("H"), float(par), cfg)
    raise ValueError(f"unknown form {name!r}")


def run_evaluate(args) -> int:
    funcs = _load_json(args.input)
    cfg = _config(args)
    res = evaluate_named(args.form, funcs, cfg)
    _emit(dumps({"form": args.form, **res.to_json()}), args.out)
    if not res.converged:
        _err(f"not converged: error estimate {res.error_estimate:.3g}")
        return EXIT_NOT_CONVERGED
    return 0


# -- experiments ------------------------------------------------------------------------


def _floats(text: str | None, default):
    if text is None:
        return default
    return [float(Fraction(x)) for x in text.split(",") if x.strip()]


def run_experiment(args) -> int:
    from . import experiments as ex

    cfg_kw = {}
    if args.t_eps is not None:
        cfg_kw["t_eps"] = args.t_eps
    if args.t_max is not None:
        cfg_kw["t_max"] = args.t_max
    if args.xy_points is not None:
        cfg_kw["xy_points"] = args.xy_points
    name = args.name
    sweep = None
    try:
        if name == "gaussian-necessity":
            cfg = QuadConfig(xy_points=128).replace(**cfg_kw)
            beta = float(Fraction(args.beta or "2"))
            p2, p3 = (float(Fraction(x)) for x in (args.p23 or "2,2").split(","))
            eps = _floats(args.eps, [1, 1 / 4, 1 / 16, 1 / 64])
            sweep, rhs = ex.exp_gaussian_necessity(beta, p2, p3, eps, cfg)
            report = ex.necessity_verdict(sweep, rhs, p2, p3)
        elif name == "tht-endpoint":
            sweep = ex.exp_tht_endpoint(_floats(args.delta, [1e2, 1e3, 1e4]), float(Fraction(args.p2 or "2")))
            report = ex.tht_verdict(sweep)
        elif name == "l40-blowup":
            cfg = QuadConfig(xy_points=128, xy_box=7.0).replace(**cfg_kw)
            sweep = ex.exp_l40_blowup(_floats(args.M, [10, 100, 1000]), cfg=cfg)
            report = ex.l40_verdict(sweep)
        elif name == "l3-dilation":
            cfg = QuadConfig(xy_points=128).replace(**cfg_kw)
            sweep = ex.exp_l3_dilation(_floats(args.N, [16, 32, 64, 128, 256]), cfg=cfg)
            report = ex.l3_verdict(sweep)
        elif name == "boundedness":
            head, par = _param(args.form or "L4:2")
            nf = NormalForm(head, par) if head == "L4" else NormalForm(head)
            p = ExponentTriple.parse(args.p or "inf,2,2")
            cfg = QuadConfig(xy_points=64, xy_box=9.0, refine=False).replace(**cfg_kw)
            report = ex.exp_boundedness_sweep(nf, p, seeds=args.seeds, seed=args.seed, cfg=cfg)
        elif name == "reduce-bht":
            report = ex.exp_reduction_bht(float(Fraction(args.alpha or "2")), trials=args.trials, seed=args.seed)
        elif name == "reduce-carleson":
            report = ex.exp_reduction_carleson(args.steps, trials=args.trials, seed=args.seed)
        else:
            _err(f"unknown experiment {name!r}")
            return EXIT_FAIL
    except ex.OracleFailure as exc:
        _err(f"oracle failure: {exc}")
        return EXIT_ORACLE
    if sweep is not None and args.format == "csv":
        _emit(ex.sweep_to_csv(sweep), args.out)
    else:
        body = {"experiment": report.name, "passed": report.passed, "diagnostics": report.diagnostics}
        if sweep is not None:
            body["slope"] = sweep.slope
            body["r2"] = sweep.r2
            body["parameters"] = sweep.parameters
            body["values"] = sweep.values
        _emit(dumps(body), args.out)
    if sweep is not None and args.plot:
        ex.sweep_to_svg(sweep, args.plot)
    _err(report.summary())
    return 0 if report.passed else EXIT_FAIL


# -- selftest -------------------------------------------------------------------------


def _selftest_checks():
    from .quadrature import hilbert_pairing, lp_norm
    from .specs import Gaussian, SignWindow

    def printed_example():
        for a in (2, 3, -1):
            d = dm.thtsp_datum(Fraction(a))
            nf = NormalForm("L4", Fraction(1 - a))
            if classify(d).normal_form != nf or not dm.verify_witness(d, dm.printed_witness(Fraction(a)), nf):
                return False
        return True

    def round_trips():
        for k, nf in enumerate(dm.iter_normal_forms()):
            w = dm.random_witness(seed=k)
            d = dm.apply_witness(dm.datum_of(nf), w)
            res = classify(d)
            if res.normal_form != nf or not dm.verify_witness(d, res.witness, nf):
                return False
        return True

    def cross_ratios():
        for k, beta in enumerate((Fraction(-3), Fraction(5), Fraction(2, 7))):
            d = dm.apply_witness(dm.datum_of(NormalForm("L4", beta)), dm.random_witness(seed=100 + k))
            if cross_ratio(d) != beta:
                return False
        return True

    def hilbert_log_law():
        cfg = QuadConfig(t_eps=1.0, t_max=1e4)
        return all(abs(hilbert_pairing(SignWindow(M), 0.0, cfg).value.real / (2 * math.log(M)) - 1) < 5e-3 for M in (10, 100, 1000))

    def gaussian_norm():
        return abs(lp_norm(Gaussian(), 2) - 2 ** -0.25) < 1e-4

    return [
        ("printed example witnesses", printed_example),
        ("classification round trips", round_trips),
        ("cross ratio invariance", cross_ratios),
        ("hilbert log law", hilbert_log_law),
        ("gaussian L2 norm", gaussian_norm),
    ]


def run_selftest(args) -> int:
    failed = 0
    lines = []
    for name, check in _selftest_checks():
        try:
            ok = bool(check())
        except Exception as exc:  # a crash is a failure, with the reason on stderr
            _err(f"{name}: {type(exc).__name__}: {exc}")
            ok = False
        failed += not ok
        lines.append(f"{'ok' if ok else 'FAIL'} {name}")
    _emit("\n".join(lines), args.out)
    return EXIT_FAIL if failed else 0


# -- argument parsing ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blform", description="Classify and evaluate (1,2,2;1) singular Brascamp-Lieb forms.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_input=True):
        if needs_input:
            sp.add_argument("--input", required=True, help="input JSON file")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    def quad(sp):
        sp.add_argument("--t-eps", type=float)
        sp.add_argument("--t-max", type=float)
        sp.add_argument("--xy-points", type=int)

    c = sub.add_parser("classify", help="normal form and witness of a datum")
    common(c)
    c.set_defaults(func=run_classify)

    c = sub.add_parser("invariant", help="cross ratio of a datum")
    common(c)
    c.set_defaults(func=run_invariant)

    c = sub.add_parser("evaluate", help="evaluate a named form")
    c.add_argument("form", help="L1, L2, L3, L4:beta, tht, bht:alpha, carleson, special:alpha, smoothed:beta")
    common(c)
    quad(c)
    c.add_argument("--config", help="QuadConfig JSON")
    c.set_defaults(func=run_evaluate)

    c = sub.add_parser("experiment", help="run a scripted experiment")
    c.add_argument("name")
    common(c, needs_input=False)
    quad(c)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--plot", help="write a log-log SVG here")
    c.add_argument("--delta")
    c.add_argument("--p2")
    c.add_argument("--M")
    c.add_argument("--N")
    c.add_argument("--eps")
    c.add_argument("--beta")
    c.add_argument("--p23", help="p2,p3 for gaussian-necessity")
    c.add_argument("--form")
    c.add_argument("--p", help="exponent triple, e.g. inf,2,2")
    c.add_argument("--seeds", type=int, default=20)
    c.add_argument("--alpha")
    c.add_argument("--steps", type=int, default=1)
    c.add_argument("--trials", type=int, default=5)
    c.set_defaults(func=run_experiment)

    c = sub.add_parser("selftest", help="fast invariant battery")
    c.add_argument("--out")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=run_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        _err(str(exc))
        return EXIT_INVALID if args.command in ("classify", "invariant") else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
