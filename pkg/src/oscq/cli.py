"""oscq command line: model registry, analysis pipelines, machine-readable
reports (JSON on stdout, CSV side files, optional rendered figures).

Exit codes
----------
0  success (including Finite and Infinite verdicts)
1  usage or configuration error (unknown model/parameter, bad flag)
2  no oscillation (none detected, or a NotOscillating/Unstable verdict)
3  periodic-steady-state or integration failure
4  eigenvalue-solver failure
5  analysis failure (too few usable decay cycles, no balance point)
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import (
    NOISE_FLOOR_DEFAULT,
    equivalence_gap,
    perturb_and_measure,
    power_balance_curve,
    ql1,
    ql2,
)
from .errors import (
    AnalysisError,
    ConstantSolutionError,
    EigenFailureError,
    ModelDomainError,
    ModelParameterError,
    NewtonFailureError,
    NoOscillationError,
    PssError,
    SingularMatrixError,
)
from .floquet import UNIT_TOL_DEFAULT, monodromy_analysis
from .models import REGISTRY, get_model
from .output import complex_entry, to_json, waveform_rows, write_csv, write_waveform_csv
from .pss import SHOOT_CLOSURE_TOL, auto_pss
from .transient import IntegratorConfig, integrate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_OSCILLATION = 2
EXIT_PSS_FAILURE = 3
EXIT_EIGEN_FAILURE = 4
EXIT_ANALYSIS_FAILURE = 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_overrides(pairs: list[str]) -> dict[str, float]:
    overrides = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise ModelParameterError(f"bad --set {pair!r}; expected NAME=VALUE")
        try:
            overrides[name] = float(value)
        except ValueError:
            raise ModelParameterError(f"bad --set value for {name!r}: {value!r}") from None
    return overrides


def _parse_x0(text: str, n: int) -> np.ndarray:
    try:
        x0 = np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise ModelParameterError(f"bad --x0 {text!r}; expected comma-separated floats") from None
    if x0.size != n:
        raise ModelParameterError(f"--x0 needs {n} components, got {x0.size}")
    return x0


def _build(args) -> tuple:
    spec = get_model(args.model)
    dae = spec.build(_parse_overrides(args.set))
    t_hint = spec.hint(dae.params)
    cfg = IntegratorConfig(
        method=args.method,
        steps_per_cycle=args.steps_per_cycle,
        newton_tol=args.newton_tol,
    ).with_step(t_hint / args.steps_per_cycle)
    return spec, dae, cfg, t_hint


def _figure_path(out: str | None, default_stem: str, kind: str) -> Path:
    if out:
        p = Path(out)
        return p.with_name(f"{p.stem}-{kind}.png")
    return Path(f"{default_stem}-{kind}.png")


def _emit_csv(path_or_none, header, rows) -> None:
    if path_or_none:
        write_csv(path_or_none, header, rows)
    else:
        print(",".join(header))
        from .output import fmt17

        for row in rows:
            print(",".join(fmt17(v) for v in row))


# ---------------------------------------------------------------------------
# q pipeline (also the sweep worker, so it must be top-level picklable)
# ---------------------------------------------------------------------------

def _q_report(
    model_name: str,
    overrides: dict,
    method: str,
    steps_per_cycle: int,
    newton_tol: float,
    pss_mode: str,
    warmup: float,
    closure_tol: float,
    unit_tol: float,
    seed: int,
):
    spec = get_model(model_name)
    dae = spec.build(overrides)
    t_hint = spec.hint(dae.params)
    cfg = IntegratorConfig(
        method=method, steps_per_cycle=steps_per_cycle, newton_tol=newton_tol
    ).with_step(t_hint / steps_per_cycle)
    pss = auto_pss(
        dae,
        spec.seed_state,
        t_hint,
        cfg,
        mode=pss_mode,
        warmup_periods=warmup,
        closure_tol=closure_tol,
    )
    result = monodromy_analysis(dae, pss, unit_tol=unit_tol)
    rep = result.q_report
    report = {
        "model": model_name,
        "params": {k: v for k, v in dae.params.items()},
        "mode": pss.mode,
        "period": pss.period,
        "closure_residual": pss.closure_residual,
        "grid": {"steps_per_cycle": steps_per_cycle, "method": method},
        "tolerances": {
            "newton_tol": newton_tol,
            "pss_closure_tol": closure_tol,
            "unit_tol": unit_tol,
        },
        "seed": seed,
        "multipliers": [complex_entry(l) for l in rep.multipliers],
        "n_unit": rep.n_unit,
        "lambda2": {"re": rep.lambda2.real, "im": rep.lambda2.imag},
        "lambda2_modulus": rep.lambda2_modulus,
        "verdict": rep.verdict,
        "q": rep.q_value,
        "q_rounded": rep.q_rounded,
        "floquet_exponents": [
            None if mu is None else {"re": mu.real, "im": mu.imag}
            for mu in (rep.floquet_exponents or ())
        ],
        "pss_warnings": list(pss.warnings),
    }
    return report, pss, dae


def _sweep_worker(payload):
    report, _, _ = _q_report(*payload)
    return report


def _verdict_exit(verdict: str) -> int:
    if verdict in ("Finite", "Infinite"):
        return EXIT_OK
    return EXIT_NO_OSCILLATION


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_list(args) -> int:
    if args.json:
        payload = {
            "models": [
                {
                    "name": spec.name,
                    "description": spec.description,
                    "parameters": dict(spec.defaults.items()),
                }
                for spec in REGISTRY.values()
            ]
        }
        print(to_json(payload))
        return EXIT_OK
    for spec in REGISTRY.values():
        params = ", ".join(f"{k}={v:g}" for k, v in spec.defaults.items())
        print(f"{spec.name:<16} {spec.description}")
        print(f"{'':<16} parameters: {params}")
    return EXIT_OK


def cmd_tran(args) -> int:
    spec, dae, cfg, t_hint = _build(args)
    x0 = spec.seed_state if args.x0 is None else _parse_x0(args.x0, dae.n)
    if spec.validate_x0 is not None:
        spec.validate_x0(x0)
    t1 = args.cycles * t_hint
    wf = integrate(dae, x0, 0.0, t1, cfg)
    _emit_csv(args.out, ["t", *dae.state_names], waveform_rows(wf.times, wf.states))
    if args.plot:
        from .plots import plot_waveform

        path = _figure_path(args.out, f"oscq-{args.model}-tran", "waveform")
        plot_waveform(wf.times, wf.states, dae.state_names, path, title=args.model)
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_pss(args) -> int:
    spec, dae, cfg, t_hint = _build(args)
    pss = auto_pss(
        dae,
        spec.seed_state,
        t_hint,
        cfg,
        mode=args.pss_mode,
        warmup_periods=args.warmup,
        closure_tol=args.closure_tol,
    )
    summary = {
        "model": args.model,
        "mode": pss.mode,
        "period": pss.period,
        "closure_residual": pss.closure_residual,
        "grid_points": pss.grid_points,
        "warnings": list(pss.warnings),
    }
    print(to_json(summary))
    if args.out:
        write_waveform_csv(args.out, pss.times, pss.samples, dae.state_names)
    if args.plot:
        from .plots import plot_orbit

        path = _figure_path(args.out, f"oscq-{args.model}-pss", "orbit")
        plot_orbit(pss.samples, dae.state_names, path, title=f"{args.model} orbit")
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_q(args) -> int:
    overrides = _parse_overrides(args.set)
    base_payload = dict(
        model_name=args.model,
        overrides=overrides,
        method=args.method,
        steps_per_cycle=args.steps_per_cycle,
        newton_tol=args.newton_tol,
        pss_mode=args.pss_mode,
        warmup=args.warmup,
        closure_tol=args.closure_tol,
        unit_tol=args.unit_tol,
        seed=args.seed,
    )
    if args.sweep:
        name, sep, values = args.sweep.partition("=")
        if not sep:
            raise ModelParameterError(f"bad --sweep {args.sweep!r}; expected NAME=V1,V2,...")
        payloads = []
        for v in values.split(","):
            ov = dict(overrides)
            ov[name] = float(v)
            p = dict(base_payload, overrides=ov)
            payloads.append(tuple(p.values()))
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                reports = list(pool.map(_sweep_worker, payloads))
        else:
            reports = [_sweep_worker(p) for p in payloads]
        print(to_json(reports))
        return EXIT_OK

    report, pss, dae = _q_report(*base_payload.values())
    print(to_json(report))
    if args.out:
        write_waveform_csv(args.out, pss.times, pss.samples, dae.state_names)
    if args.plot:
        from .plots import plot_orbit

        path = _figure_path(args.out, f"oscq-{args.model}-q", "orbit")
        plot_orbit(pss.samples, dae.state_names, path, title=f"{args.model} orbit")
        print(f"wrote {path}", file=sys.stderr)
    return _verdict_exit(report["verdict"])


def cmd_perturb(args) -> int:
    overrides = _parse_overrides(args.set)
    report, pss, dae = _q_report(
        args.model,
        overrides,
        args.method,
        args.steps_per_cycle,
        args.newton_tol,
        args.pss_mode,
        args.warmup,
        args.closure_tol,
        args.unit_tol,
        args.seed,
    )
    if args.direction in ("lambda2", "lambda2-eigenvector"):
        direction = "lambda2-eigenvector"
    elif args.direction == "random":
        direction = "random"
    else:
        direction = _parse_x0(args.direction, dae.n)
    meas = perturb_and_measure(
        dae,
        pss,
        direction=direction,
        eps=args.eps,
        n_cycles=args.cycles,
        seed=args.seed,
        noise_floor=args.floor,
    )
    lam2 = report["lambda2_modulus"]
    gap = abs(meas.fitted_ratio - lam2) / lam2 if lam2 > 0 else None
    out = {
        "model": args.model,
        "eps": args.eps,
        "cycles": args.cycles,
        "direction": args.direction,
        "fitted_ratio": meas.fitted_ratio,
        "empirical_q": None if not np.isfinite(meas.empirical_q) else meas.empirical_q,
        "lambda2_modulus": lam2,
        "relative_gap": gap,
        "n_cycles_used": meas.n_used,
        "non_decaying": bool(meas.fitted_ratio >= 0.99),
        "verdict": report["verdict"],
    }
    print(to_json(out))
    if args.out:
        write_csv(args.out, ["cycle", "deviation"], zip(meas.cycles, meas.deviations))
    if args.plot:
        from .plots import plot_decay

        path = _figure_path(args.out, f"oscq-{args.model}-perturb", "decay")
        plot_decay(meas.cycles, meas.deviations, meas.fitted_ratio, meas.n_used, path,
                   title=f"{args.model} perturbation decay")
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_balance(args) -> int:
    grid = np.linspace(args.vmax_max / args.vmax_points, args.vmax_max, args.vmax_points)
    curve = power_balance_curve(args.K, args.a, args.omega, grid)
    rows = zip(curve.vmax, curve.p_pos, curve.p_neg)
    if args.out:
        write_csv(args.out, ["vmax", "p_pos", "p_neg"], rows)
        summary = {
            "K": args.K,
            "a": args.a,
            "omega": args.omega,
            "intersection_vmax": curve.intersection_vmax,
            "slope_pos": curve.slope_pos,
            "slope_neg": curve.slope_neg,
        }
        print(to_json(summary))
    else:
        _emit_csv(None, ["vmax", "p_pos", "p_neg"], rows)
    if args.plot:
        from .plots import plot_balance

        path = _figure_path(args.out, "oscq-balance", "balance")
        plot_balance(curve, path, title=f"power balance (K={args.K:g}, a={args.a:g})")
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_resonator(args) -> int:
    zetas = [float(z) for z in args.zeta.split(",")]
    rows = [[z, ql1(z), ql2(z), equivalence_gap(z)] for z in zetas]
    _emit_csv(args.out, ["zeta", "ql1", "ql2", "equivalence_gap"], rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, pss_opts: bool = True):
    p.add_argument("--model", required=True, help="model name from `oscq list`")
    p.add_argument("--set", action="append", default=[], metavar="NAME=VALUE",
                   help="parameter override (repeatable)")
    p.add_argument("--method", choices=("trapezoidal", "backward-euler"),
                   default="trapezoidal")
    p.add_argument("--steps-per-cycle", type=int, default=2000)
    p.add_argument("--newton-tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--plot", action="store_true",
                   help="render figures next to the CSV output")
    if pss_opts:
        p.add_argument("--pss-mode", choices=("auto", "shoot", "detect"), default="auto")
        p.add_argument("--warmup", type=float, default=20.0,
                       help="warmup length in estimated periods")
        p.add_argument("--closure-tol", type=float, default=SHOOT_CLOSURE_TOL)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oscq",
                     description="Amplitude-stability characterization of nonlinear oscillators")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("list", help="list registered models", parents=[])
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("tran", help="transient integration to waveform CSV")
    _add_common(p, pss_opts=False)
    p.add_argument("--x0", help="initial state, comma-separated")
    p.add_argument("--cycles", type=float, default=10.0,
                   help="duration in estimated periods")
    p.set_defaults(func=cmd_tran)

    p = sub.add_parser("pss", help="periodic steady state (shooting or detection)")
    _add_common(p)
    p.set_defaults(func=cmd_pss)

    p = sub.add_parser("q", help="multiplier spectrum and Q report (JSON)")
    _add_common(p)
    p.add_argument("--unit-tol", type=float, default=UNIT_TOL_DEFAULT)
    p.add_argument("--sweep", metavar="NAME=V1,V2,...",
                   help="repeat the analysis over parameter values")
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
    p.set_defaults(func=cmd_q)

    p = sub.add_parser("perturb", help="perturbation-decay experiment vs lambda2")
    _add_common(p)
    p.add_argument("--unit-tol", type=float, default=UNIT_TOL_DEFAULT)
    p.add_argument("--eps", type=float, default=1e-3,
                   help="perturbation size relative to orbit amplitude")
    p.add_argument("--cycles", type=int, default=12, help="cycles to record")
    p.add_argument("--direction", default="lambda2",
                   help="lambda2 | random | comma-separated vector")
    p.add_argument("--floor", type=float, default=NOISE_FLOOR_DEFAULT,
                   help="noise floor relative to orbit amplitude")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("balance", help="power-balance curve of the LC conductor")
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--omega", type=float, default=2e9)
    p.add_argument("--vmax-max", type=float, default=1.5)
    p.add_argument("--vmax-points", type=int, default=120)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("resonator", help="linear-resonator ql1/ql2 table")
    p.add_argument("--zeta", default="0.05,0.02,0.01,0.005")
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_resonator)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ModelParameterError as exc:
        print(f"oscq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"oscq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NoOscillationError, ConstantSolutionError) as exc:
        print(f"oscq: {exc}", file=sys.stderr)
        return EXIT_NO_OSCILLATION
    except (PssError, NewtonFailureError, SingularMatrixError, ModelDomainError) as exc:
        print(f"oscq: {exc}", file=sys.stderr)
        return EXIT_PSS_FAILURE
    except EigenFailureError as exc:
        print(f"oscq: {exc}", file=sys.stderr)
        return EXIT_EIGEN_FAILURE
    except AnalysisError as exc:
        print(f"oscq: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS_FAILURE


if __name__ == "__main__":
    sys.exit(main())
