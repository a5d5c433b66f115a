"""Command line front-end: build, solve, certify, verify, dual, harper, report, run.

Exit codes: 0 accepted certificate (or a command that finished cleanly),
2 configuration or build error, 3 solved but no conclusion (certificate
flagged, solver not converged), 4 verification rejected, 64 usage error.
Every command writes its artifacts to the output directory; later commands
read them back from there, and the problem is rebuilt from the config,
which is deterministic.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .algebra import element
from .builder import BuilderError, assemble, build_support
from .certify import Certificate, CertificationError, CertifyOptions, certify, verify
from .config import ConfigError, RunConfig, load_config
from .geometry import GeometryError, arrangement_from_dual, flat_arrangement
from .groups import DEFAULT_BALL_CAP, FreeAbelianEngine, GroupError, HeisenbergEngine, ResourceLimitError, make_engine
from .harper import harper_curves
from .sdpa import export_sdpa
from .solver import PrimalDualSolution, SolverOptions, dumps_solution, gap_report, solve

EXIT_OK = 0
EXIT_BUILD = 2
EXIT_FLAGGED = 3
EXIT_REJECT = 4
EXIT_USAGE = 64

MEMORY_ENV = "KAZHDAN_MAX_ELEMENTS"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems get their own exit code
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


class _Fail(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _say(msg: str) -> None:
    print(msg, flush=True)


def _out_dir(args, cfg: RunConfig | None) -> Path:
    out = Path(args.out or (cfg.out if cfg else "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args) -> RunConfig:
    if not args.config:
        raise _Fail(EXIT_USAGE, "this command needs --config")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        raise _Fail(EXIT_BUILD, f"config error: {exc}") from None
    if args.seed is not None:
        cfg.solver["seed"] = args.seed
    if args.tol is not None:
        cfg.solver["tol_residual"] = args.tol
        cfg.solver["tol_gap"] = args.tol
    return cfg


def build_problem(cfg: RunConfig):
    try:
        cap = int(os.environ.get(MEMORY_ENV, DEFAULT_BALL_CAP))
    except ValueError:
        raise _Fail(EXIT_BUILD, f"{MEMORY_ENV} must be an integer") from None
    try:
        engine = make_engine(cfg.family, cfg.n)
        if cfg.radius is None and cfg.elements is None:
            raise ConfigError("[support] is missing")
        if cfg.radius is not None:
            E = build_support(engine, radius=cfg.radius, complete=cfg.complete, cap=cap)
        else:
            E = build_support(engine, elements=cfg.elements, complete=cfg.complete, cap=cap)
        extra = [element(engine, q) for q in cfg.extra]
        return assemble(engine, E, cfg.mode, level=cfg.level, objective=cfg.objective or None,
                        pins=cfg.pins or None, target=cfg.target, extra=extra)
    except (ConfigError, BuilderError, GroupError, ResourceLimitError, ValueError) as exc:
        raise _Fail(EXIT_BUILD, f"build error: {exc}") from None


def _load_solution(problem, out: Path) -> PrimalDualSolution:
    path = out / "solution.json"
    if not path.exists():
        raise _Fail(EXIT_BUILD, f"missing {path}; run solve first")
    try:
        return PrimalDualSolution.from_json(problem, json.loads(path.read_text()))
    except (ValueError, KeyError) as exc:
        raise _Fail(EXIT_BUILD, f"unusable solution file: {exc}") from None


def _verdict(result, cert: Certificate) -> int:
    if result.accepted:
        if cert.mode == "epsilon":
            _say(f"Property (T) certified: epsilon' = {result.value} (~{float(result.value):.6g})")
        else:
            _say(f"bound certified: combination <= {cert.bound} (~{float(cert.bound):.6g}) "
                 f"< target {cert.target}, margin {result.value} (~{float(result.value):.3e})")
        return EXIT_OK
    if result.identity_holds:
        _say(f"certificate flagged: {result.reason}; no conclusion on this support")
        return EXIT_FLAGGED
    _say(f"certificate rejected: {result.reason}")
    return EXIT_REJECT


# ---------------------------------------------------------------------------
# commands


def cmd_build(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg)
    t0 = time.time()
    p = build_problem(cfg)
    (out / "problem.json").write_text(p.dumps())
    (out / "classes.json").write_text(p.table.dumps())
    export_sdpa(p, out / "problem.dat-s")
    _say(f"built {cfg.family} problem: {p.n_rows} rows, {p.n_cols} columns, blocks {p.block_dims}, "
         f"{p.n_scalar} adjoined squares, {len(p.table.distance_reps)} distance classes "
         f"({time.time() - t0:.2f}s)")
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg)
    p = build_problem(cfg)
    try:
        opts = SolverOptions(**cfg.solver)
    except (TypeError, ValueError) as exc:
        raise _Fail(EXIT_BUILD, f"solver options: {exc}") from None
    t0 = time.time()
    sol = solve(p, opts)
    (out / "solution.json").write_text(dumps_solution(p, sol))
    rep = gap_report(p, sol)
    (out / "gap.json").write_text(json.dumps(rep.to_json(), indent=1, sort_keys=True))
    label = "epsilon" if p.mode == "epsilon" else "bound"
    value = sol.primal_objective if p.mode == "epsilon" else p.bound_from_value(sol.primal_objective)
    _say(f"solver {sol.status} after {sol.iterations} iterations ({time.time() - t0:.2f}s): "
         f"{label} ~ {value:.8g}, gap {sol.gap:.2e}; duality check: {rep.message}")
    return EXIT_OK if sol.status == "optimal" else EXIT_FLAGGED


def cmd_certify(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg)
    p = build_problem(cfg)
    sol = _load_solution(p, out)
    try:
        opts = CertifyOptions(**cfg.certify)
    except TypeError as exc:
        raise _Fail(EXIT_BUILD, f"certify options: {exc}") from None
    try:
        cert = certify(p, sol, opts)
    except CertificationError as exc:
        _say(f"certification failed: {exc}; no conclusion on this support")
        return EXIT_FLAGGED
    (out / "certificate.json").write_text(cert.dumps())
    _say(f"certificate written: {len(cert.squares)} squares, {len(cert.corrections)} corrections, M = {cert.M}")
    return _verdict(verify(cert), cert)


def cmd_verify(args) -> int:
    path = Path(args.certificate) if args.certificate else None
    if path is None:
        cfg = _config(args) if args.config else None
        path = _out_dir(args, cfg) / "certificate.json"
    try:
        cert = Certificate.loads(path.read_text())
    except OSError as exc:
        raise _Fail(EXIT_BUILD, f"cannot read certificate: {exc}") from None
    except (ValueError, KeyError, TypeError, GroupError) as exc:
        _say(f"certificate rejected: malformed file ({exc})")
        return EXIT_REJECT
    return _verdict(verify(cert), cert)


def cmd_dual(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg)
    p = build_problem(cfg)
    try:
        if isinstance(p.engine, (FreeAbelianEngine, HeisenbergEngine)) and not args.from_solution:
            fc = flat_arrangement(p.engine, problem=p)
            arr = fc.arrangement
            report = {"kind": "flat", "objective": str(fc.objective), "epsilon_upper_bound": str(fc.dual_value),
                      "dual": [str(v) for v in fc.dual]}
            _say(f"flat arrangement: objective {fc.objective} (= -2|S|), epsilon <= {fc.dual_value} on this support")
        else:
            sol = _load_solution(p, out)
            arr = arrangement_from_dual(p, list(sol.x))
            report = {"kind": "from-solution", "objective": arr.objective,
                      "epsilon_upper_bound": float(p.dual_value(list(sol.x)))}
            _say(f"arrangement from the dual solution: objective {arr.objective:.8g}")
    except GeometryError as exc:
        _say(f"no arrangement: {exc}")
        return EXIT_FLAGGED
    (out / "arrangement.json").write_text(arr.dumps())
    (out / "dual.json").write_text(json.dumps(report, indent=1, sort_keys=True))
    return EXIT_OK


def cmd_harper(args) -> int:
    opts = {"theta_min": 0.005, "theta_max": 0.5, "steps": 100, "window": 2048}
    cfg = _config(args) if args.config else None
    if cfg:
        opts.update(cfg.harper)
    thetas = np.linspace(opts["theta_min"], opts["theta_max"], int(opts["steps"]))
    try:
        curve = harper_curves(thetas, int(opts["window"]), threads=args.threads)
    except ValueError as exc:
        raise _Fail(EXIT_BUILD, str(exc)) from None
    out = _out_dir(args, cfg)
    (out / "harper.csv").write_text(curve.to_csv())
    lo, hi = curve.interval
    _say(f"improved bound beats the known one on ({lo:.4f}, {hi:.4f}); wrote {out / 'harper.csv'}")
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = _config(args) if args.config else None
    out = _out_dir(args, cfg)
    code = EXIT_OK
    found = False
    for name in ("problem.json", "solution.json", "gap.json", "certificate.json", "dual.json", "harper.csv"):
        path = out / name
        if not path.exists():
            continue
        found = True
        if name == "problem.json":
            d = json.loads(path.read_text())
            _say(f"problem: {d['group']['family']} n={d['group']['n']}, mode {d['mode']}, "
                 f"{len(d['rows'])} rows, blocks {d['cone']['psd_blocks']}")
        elif name == "solution.json":
            d = json.loads(path.read_text())
            _say(f"solution: {d['status']}, primal {d['primal_objective']:.8g}, dual {d['dual_objective']:.8g}")
        elif name == "gap.json":
            d = json.loads(path.read_text())
            _say(f"duality: {d['message']}")
        elif name == "certificate.json":
            try:
                cert = Certificate.loads(path.read_text())
            except (ValueError, KeyError, TypeError, GroupError) as exc:
                _say(f"certificate rejected: malformed file ({exc})")
                code = EXIT_REJECT
                continue
            code = _verdict(verify(cert), cert)
        elif name == "dual.json":
            d = json.loads(path.read_text())
            _say(f"dual: {d['kind']} arrangement, objective {d['objective']}")
        else:
            _say(f"harper curves: {path}")
    if not found:
        _say(f"nothing to report in {out}")
    return code


def cmd_run(args) -> int:
    for step in (cmd_build, cmd_solve):
        code = step(args)
        if code == EXIT_BUILD:
            return code
    return cmd_certify(args)


COMMANDS = {
    "build": cmd_build,
    "solve": cmd_solve,
    "certify": cmd_certify,
    "verify": cmd_verify,
    "dual": cmd_dual,
    "harper": cmd_harper,
    "report": cmd_report,
    "run": cmd_run,
}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out", help="output directory (default from config, else ./out)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--tol", type=float, default=None, help="solver residual and gap tolerance")
    parser = _Parser(prog="kazhdan", description="Property (T) spectral gap certificates")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in ("build", "solve", "certify", "report", "run", "harper"):
        sub.add_parser(name, parents=[common])
    v = sub.add_parser("verify", parents=[common])
    v.add_argument("certificate", nargs="?", help="certificate file (default: <out>/certificate.json)")
    d = sub.add_parser("dual", parents=[common])
    d.add_argument("--from-solution", action="store_true", help="use the solved dual even for flat groups")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except _Fail as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
