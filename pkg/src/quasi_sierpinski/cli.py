"""Command line: generate, analyze, verify, plot and sweep.

Exit codes: 0 ok, 1 usage, 2 validation, 3 solver failure, 4 verification
failure.  Errors are also reported on stderr as one JSON line with an
``error.code`` field.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import closed_form, fem, plotting
from .errors import AssemblyError, DomainError, QuasiSierpinskiError, SolverError, ValidationError
from .fractal import RatioSequence
from .report import read_json, write_analysis, write_csv, write_json
from .runconfig import TOL_CLOSED_FORM, TOL_FEM, load_run_config, parse_run_config
from .structure import Topology, build_topology

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3, 4


class UsageError(Exception):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fail(code: str, exit_code: int, messages) -> int:
    payload = {"error": {"code": code, "exit_code": exit_code, "messages": list(messages)}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return exit_code


def _out_dir(args, run) -> Path:
    return Path(args.out or run.output_dir or "out")


def _load(args):
    if args.config is None:
        raise UsageError("--config is required")
    return load_run_config(args.config)


def cmd_generate(args) -> int:
    run = _load(args)
    topo = build_topology(run.structure)
    path = write_json(_out_dir(args, run) / "topology.json", topo.to_dict())
    print(topo.summary())
    print(f"wrote {path}")
    return EXIT_OK


def _analysis(run, allow):
    return closed_form.analyze(run.structure, allow_nonnegative_delta=allow or run.allow_nonnegative_delta)


def cmd_analyze(args) -> int:
    run = _load(args)
    result = _analysis(run, args.allow_nonnegative_delta)
    for path in write_analysis(_out_dir(args, run), result):
        print(f"wrote {path}")
    print(f"max PVW residual {result.max_residual:.3e}")
    return EXIT_OK


def _residual_category(analysis, tol):
    residuals = closed_form.pvw_residuals(analysis.config, analysis.delta)
    worst = max(residuals, key=lambda key: abs(residuals[key]))
    value = abs(residuals[worst])
    return fem.CategoryResult("pvw_residuals", value, value, 1.0, f"(m,u)={worst}", tol, value <= tol)


def cmd_verify(args) -> int:
    if args.analysis is not None:
        analysis = closed_form.AnalysisResult.from_dict(read_json(args.analysis))
        run = load_run_config(args.config) if args.config else None
    else:
        run = _load(args)
        analysis = _analysis(run, False)
    if args.topology is not None:
        topology = Topology.from_dict(read_json(args.topology))
    else:
        topology = build_topology(analysis.config)

    tol_fem = args.tol_fem or (run.tol_fem if run else TOL_FEM)
    tol_cf = args.tol_closed_form or (run.tol_closed_form if run else TOL_CLOSED_FORM)
    stiffness = analysis.stiffness.copy()
    for idx, factor in (run.stiffness_factors.items() if run else ()):
        stiffness[idx - 1] *= factor

    solution, report = fem.verify(topology, analysis, tol_fem, stiffness)
    report.categories.append(_residual_category(analysis, tol_cf))
    out = Path(args.out or (run.output_dir if run and run.output_dir else "out"))
    write_json(out / "fem_solution.json", solution.to_dict())
    write_json(out / "comparison.json", report.to_dict())
    text = report.to_text()
    (out / "comparison.txt").write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_plot(args) -> int:
    run = _load(args)
    what = args.what or run.plot_what
    if what not in plotting.PLOT_KINDS:
        raise UsageError(f"unknown plot kind {what!r} (choose from {', '.join(plotting.PLOT_KINDS)})")
    out = _out_dir(args, run)
    depth = args.depth or run.depth
    ratio = args.ratio if args.ratio is not None else run.ratio
    cfg = run.structure
    if what == "deformed":
        magnify = args.magnify if args.magnify is not None else run.magnify
        paths = plotting.plot_deformed(build_topology(cfg), _analysis(run, False), out, magnify)
    elif what == "displacements":
        paths = plotting.plot_displacements(_analysis(run, False), out, run.extension, depth)
    elif what == "cantor":
        paths = plotting.plot_cantor(1.5 if ratio is None else ratio, out, depth or 40)
    else:
        if ratio is not None:
            seq = RatioSequence.geometric(ratio)
        else:
            seq = cfg.ratios_horizontal.with_extension(run.extension)
        fn = plotting.plot_takagi if what == "takagi" else plotting.plot_j
        paths = fn(seq, out, depth)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def _set_path(data: dict, dotted: str, value):
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    node[keys[-1]] = value


def _parse_vary(items):
    axes = []
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--vary expects key=v1,v2,... got {item!r}")
        key, values = item.split("=", 1)
        try:
            parsed = [json.loads(v) for v in values.split(",")]
        except ValueError as exc:
            raise UsageError(f"--vary {key}: values must be JSON numbers") from exc
        axes.append((key, parsed))
    return axes


def _sweep_one(task):
    index, data, out_dir, tol_fem = task
    run_dir = Path(out_dir) / f"run_{index:03d}"
    write_json(run_dir / "config.json", data)
    try:
        run = parse_run_config(data)
        analysis = closed_form.analyze(run.structure)
        write_analysis(run_dir, analysis)
        _, report = fem.verify(build_topology(run.structure), analysis, tol_fem)
        write_json(run_dir / "comparison.json", report.to_dict())
        worst = max(c.max_rel for c in report.categories)
        return index, "pass" if report.passed else "fail", worst
    except QuasiSierpinskiError as exc:
        return index, exc.code, float("nan")


def cmd_sweep(args) -> int:
    if args.config is None:
        raise UsageError("--config is required")
    base = read_json(args.config)
    parse_run_config(base)
    axes = _parse_vary(args.vary)
    out = Path(args.out or base.get("output_dir") or "out")
    tol_fem = args.tol_fem or TOL_FEM
    combos = list(itertools.product(*[vals for _, vals in axes])) if axes else [()]
    tasks = []
    for index, combo in enumerate(combos):
        data = json.loads(json.dumps(base))
        for (key, _), value in zip(axes, combo):
            _set_path(data, key, value)
        tasks.append((index, data, str(out), tol_fem))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_one, tasks))
    else:
        results = [_sweep_one(t) for t in tasks]
    rows = []
    for (index, status, worst), combo in zip(results, combos):
        rows.append([index, *combo, status, worst])
        print(f"run_{index:03d} {dict(zip([k for k, _ in axes], combo))} {status}")
    write_csv(out / "summary.csv", ["run", *[k for k, _ in axes], "status", "max_rel_deviation"], rows)
    return EXIT_OK if all(r[1] == "pass" for r in results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quasi-sierpinski", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="run configuration (JSON)")
        p.add_argument("--out", help="output directory (default: config output_dir or ./out)")
        return p

    p = common(sub.add_parser("generate", help="write the topology JSON"))
    p.set_defaults(func=cmd_generate)

    p = common(sub.add_parser("analyze", help="closed-form analysis to JSON and CSV"))
    p.add_argument("--allow-nonnegative-delta", action="store_true",
                   help="report non-compressive settlements instead of failing")
    p.set_defaults(func=cmd_analyze)

    p = common(sub.add_parser("verify", help="compare the closed form against the FEM oracle"))
    p.add_argument("--tol-closed-form", type=float, default=None, help=f"default {TOL_CLOSED_FORM:g}")
    p.add_argument("--tol-fem", type=float, default=None, help=f"default {TOL_FEM:g}")
    p.add_argument("--topology", help="topology.json from 'generate' instead of rebuilding")
    p.add_argument("--analysis", help="analysis.json from 'analyze' instead of recomputing")
    p.set_defaults(func=cmd_verify)

    p = common(sub.add_parser("plot", help="figures (SVG) plus sampled CSV"))
    p.add_argument("--what", help="|".join(plotting.PLOT_KINDS))
    p.add_argument("--magnify", type=float, default=None)
    p.add_argument("--ratio", type=float, default=None,
                   help="geometric ratio r for takagi / j / cantor curves")
    p.add_argument("--depth", type=int, default=None, help="series truncation depth")
    p.set_defaults(func=cmd_plot)

    p = common(sub.add_parser("sweep", help="analyze + verify over a parameter grid"))
    p.add_argument("--vary", action="append", metavar="KEY=V1,V2",
                   help="dotted config key and comma-separated values (repeatable)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--tol-fem", type=float, default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            raise UsageError("a subcommand is required")
        return args.func(args)
    except UsageError as exc:
        return _fail("usage", EXIT_USAGE, [str(exc)])
    except ValidationError as exc:
        return _fail(exc.code, EXIT_VALIDATION, exc.messages)
    except DomainError as exc:
        return _fail(exc.code, EXIT_VALIDATION, [str(exc)])
    except (SolverError, AssemblyError) as exc:
        return _fail(exc.code, EXIT_SOLVER, [str(exc)])
    except OSError as exc:
        return _fail("io", EXIT_VALIDATION, [f"{exc.filename}: {exc.strerror}"])
    except (KeyError, TypeError, ValueError) as exc:
        return _fail("invalid_input", EXIT_VALIDATION, [f"malformed input document: {exc!r}"])


if __name__ == "__main__":
    sys.exit(main())
