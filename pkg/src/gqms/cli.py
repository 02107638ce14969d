"""Command-line entry point ``gqms`` with ``analyze``, ``sweep`` and ``selftest``.

Exit codes: 0 success (an unstable point is a valid answer), 1 invalid
input, 2 internal failure.
"""

import argparse
import json
import sys

import numpy as np

from . import __version__, numkit
from .core import NoStationaryState, stability_check, stationary_covariance
from .entanglement import partial_trace, ppt_check
from .models.common import ModelInconsistency
from .selftest import SUITES, format_table, run_selftest
from .sweep import (
    MODELS,
    Axis,
    SweepConfig,
    build_system,
    coerce_fixed,
    default_jobs,
    evaluate_point,
    load_config,
    records_to_csv,
    records_to_json,
    run_sweep,
    sample_from_verdict,
)

EXIT_OK, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_set(items):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def build_parser():
    p = _Parser(prog="gqms", description="Stationary states and entanglement of Gaussian QMS models.")
    p.add_argument("--version", action="version", version=f"gqms {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--model", choices=sorted(MODELS))
    common.add_argument("--set", action="append", metavar="K=V", default=[],
                        help="parameter value (repeatable)")
    common.add_argument("--out", metavar="PATH", help="write the result to a file")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--dead-band", type=float, default=None,
                        help="relative PSD dead band of the PPT test")

    a = sub.add_parser("analyze", parents=[common], help="analyse one parameter point")
    a.add_argument("--config", metavar="PATH", help="sweep-style config file (axes ignored)")

    s = sub.add_parser("sweep", parents=[common], help="evaluate a parameter grid")
    s.add_argument("config", nargs="?", help="INI config file with [sweep], [fixed], [axes]")
    s.add_argument("--axis", action="append", default=[], metavar="NAME:MIN:MAX:STEPS[:log]")
    s.add_argument("--jobs", type=int, default=None, help="worker processes (default GQMS_JOBS or 1)")
    s.add_argument("--outputs", help="comma list from stability,ppt,det_witness,log_negativity,analytic_region")

    t = sub.add_parser("selftest", help="run the built-in consistency suites")
    t.add_argument("--quick", action="store_true", help="coarse grids only")
    t.add_argument("--inject-fault", metavar="ROW,COL",
                   help="perturb one entry of the 6x6 closed form (checks the harness)")
    return p


def _config_from_args(args, allow_axes):
    kw = load_config(args.config) if getattr(args, "config", None) else {}
    if args.model:
        kw["model"] = args.model
    if "model" not in kw:
        raise UsageError("no model given (use --model or a config file)")
    fixed = dict(kw.get("fixed", {}))
    fixed.update(_parse_set(args.set))
    axes = list(kw.get("axes", ())) if allow_axes else []
    if allow_axes:
        for spec in args.axis:
            ax = Axis.parse(spec)
            axes = [a for a in axes if a.name != ax.name] + [ax]
        for ax in axes:
            fixed.pop(ax.name, None)
        if args.outputs:
            kw["outputs"] = tuple(x.strip() for x in args.outputs.split(",") if x.strip())
    if args.dead_band is not None:
        kw["dead_band"] = args.dead_band
    kw["fixed"] = coerce_fixed(kw["model"], fixed)
    kw["axes"] = tuple(axes)
    return SweepConfig(**kw)


def _matrix_text(name, M):
    with np.printoptions(precision=6, suppress=True, linewidth=120):
        return f"{name} =\n{np.array2string(np.asarray(M))}"


def _jsonable(M):
    return np.asarray(M, dtype=float).tolist()


def cmd_analyze(args):
    config = _config_from_args(args, allow_axes=False)
    params = dict(MODELS[config.model].defaults)
    params.update(config.fixed)
    dd, keep, _ = build_system(config.model, params)
    verdict = evaluate_point(config.model, params, config.dead_band)
    report = stability_check(dd.Z)
    shown = {k: v for k, v in params.items() if k != "generator"}
    lines = [f"model {config.model}: " + ", ".join(f"{k}={v}" for k, v in shown.items()),
             _matrix_text("Z", dd.Z), _matrix_text("C", dd.C),
             "eigenvalues of Z: " + np.array2string(report.eigenvalues, precision=6)]
    doc = {"config": config.echo(), "Z": _jsonable(dd.Z), "C": _jsonable(dd.C),
           "eigenvalues_real": _jsonable(report.eigenvalues.real),
           "eigenvalues_imag": _jsonable(report.eigenvalues.imag)}
    if verdict.status == "unstable":
        lines.append("unstable; no stationary state")
    elif verdict.status == "solver_failed":
        lines.append("stable; Lyapunov solve failed its residual check")
    else:
        S = stationary_covariance(dd)
        R = partial_trace(S, keep)
        w = ppt_check(R, dead_band=config.dead_band)
        lines += [_matrix_text("S", S.S), _matrix_text(f"S_red (modes {keep[0]}, {keep[1]})", R.S)]
        if np.allclose(S.S, S.S[0, 0] * np.eye(S.S.shape[0]), rtol=0, atol=1e-10):
            lines.append(f"S = {S.S[0, 0]:.10g}*I")
        label = "ENTANGLED" if w.entangled else "separable"
        lines.append(f"stable; {label}; det(S~)={w.det_tilde:.10g}; min eig(S~)="
                     f"{w.min_eig_tilde:.10g}; log-negativity={w.log_negativity:.10g}")
        if verdict.analytic_entangled is not None:
            lines.append(f"analytic region predicate: "
                         f"{'entangled' if verdict.analytic_entangled else 'separable'}")
        doc.update({"S": _jsonable(S.S), "S_red": _jsonable(R.S)})
    sample = sample_from_verdict({}, verdict, config.outputs)
    doc["record"] = json.loads(records_to_json([sample], config))["records"][0]
    print("\n".join(lines))
    if args.out:
        fmt = args.format or "json"
        text = records_to_csv([sample], []) if fmt == "csv" else json.dumps(doc, indent=2) + "\n"
        _write(args.out, text)
    return EXIT_OK


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def cmd_sweep(args):
    config = _config_from_args(args, allow_axes=True)
    jobs = args.jobs if args.jobs is not None else default_jobs()
    samples = run_sweep(config, jobs=jobs)
    fmt = args.format or ("json" if args.out and args.out.endswith(".json") else "csv")
    names = [a.name for a in config.axes]
    text = records_to_json(samples, config) if fmt == "json" else records_to_csv(samples, names)
    if args.out:
        _write(args.out, text)
        n_ent = sum(bool(s.entangled) for s in samples)
        n_uns = sum(s.status == "unstable" for s in samples)
        print(f"{len(samples)} points ({n_ent} entangled, {n_uns} unstable) -> {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_selftest(args):
    fault = None
    if args.inject_fault:
        try:
            r, c = (int(x) for x in args.inject_fault.split(","))
        except ValueError:
            raise UsageError("--inject-fault expects ROW,COL") from None
        if not (0 <= r < 6 and 0 <= c < 6):
            raise UsageError("--inject-fault indices must be in 0..5")
        fault = (r, c)
    results = run_selftest(quick=args.quick, fault=fault, suites=SUITES)
    print(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_INTERNAL


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {"analyze": cmd_analyze, "sweep": cmd_sweep, "selftest": cmd_selftest}[args.command]
        return handler(args)
    except (UsageError, ValueError, TypeError, OSError, KeyError) as exc:
        print(f"gqms: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelInconsistency, numkit.LinAlgFailure, NoStationaryState) as exc:
        print(f"gqms: internal failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # last resort: keep the documented exit code
        print(f"gqms: internal failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
