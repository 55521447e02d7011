"""Command-line interface: ``qsix {params,orbit,sweep,verify,modica}``.

Exit codes: 0 success, 1 verification failure, 2 usage or domain error,
3 numerical non-convergence.  Output files go to ``--out``, defaulting to
``$QSIX_OUTPUT_DIR`` or ``./qsix-output``; each run appends an entry to
``manifest.json`` there.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import io as qio
from .curvature import modica_quantities
from .dimension import PARAM_FIELDS, DomainError, make_params, verify_factorization
from .integrator import IntegrationError
from .invariants import pohozaev_cyl
from .shooting import MAX_ITER, RESIDUAL_TOL, SHOOT_TOL, ShootingError, continuation_sweep, find_orbit
from .transforms import delaunay_profile, log_grid, spherical_profile
from .verify import run_checks

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
OUTPUT_ENV = "QSIX_OUTPUT_DIR"
MANIFEST = "manifest.json"

log = logging.getLogger("qsix")


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class Run:
    """Collects artifacts and writes the manifest entry for one command."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.out = Path(args.out)
        self.artifacts: list[str] = []
        self.results: dict = {}
        self.start = time.perf_counter()

    def path(self, name: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        p = self.out / name
        self.artifacts.append(str(p))
        return p

    def discard(self) -> None:
        for a in self.artifacts:
            Path(a).unlink(missing_ok=True)
        self.artifacts = []

    def manifest(self, status: int) -> None:
        config = {k: v for k, v in vars(self.args).items() if k not in ("func",)}
        entry = {
            "command": self.args.command,
            "config": config,
            "exit_code": status,
            "wall_time_s": time.perf_counter() - self.start,
            "artifacts": self.artifacts,
            "results": self.results,
            "version": __version__,
        }
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / MANIFEST
        entries = []
        if path.exists():
            try:
                entries = json.loads(path.read_text())
            except json.JSONDecodeError:
                log.warning("manifest %s unreadable; starting a new one", path)
            if not isinstance(entries, list):
                entries = [entries]
        entries.append(entry)
        path.write_text(json.dumps(entries, indent=2, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, Path):
        return str(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def _necksize(args, params) -> float:
    if args.eps0_rel is not None:
        return args.eps0_rel * params.eps_star
    return args.eps0


def _tolerances(args) -> tuple[float, float]:
    return (args.atol, args.rtol)


def cmd_params(run: Run) -> int:
    params = make_params(run.args.n)
    ident = verify_factorization(params)
    row = params.as_dict()
    run.results = {"params": row, "identities": ident.as_dict()}
    if run.args.format == "csv":
        sys.stdout.write(qio.render(PARAM_FIELDS, [[row[k] for k in PARAM_FIELDS]]))
    else:
        print(json.dumps(run.results, indent=2, default=_jsonable))
    return EXIT_OK


def _trajectory_rows(orbit) -> np.ndarray:
    """One full period: the integrated half and its mirror image."""
    if orbit.constant:
        t = np.linspace(0.0, orbit.period, 65)
        return np.column_stack([t, orbit.jet(t)])
    half = orbit.half_orbit
    t2 = orbit.period - half.t[-2::-1]
    y2 = half.y[-2::-1] * np.array([1.0, -1.0, 1.0, -1.0, 1.0, -1.0])
    return np.vstack([np.column_stack([half.t, half.y]), np.column_stack([t2, y2])])


def cmd_orbit(run: Run) -> int:
    args = run.args
    params = make_params(args.n)
    eps0 = _necksize(args, params)
    try:
        orbit = find_orbit(params, eps0, tol=args.tol, max_iter=args.max_iter,
                           tolerances=_tolerances(args))
    except (ShootingError, IntegrationError) as exc:
        best = getattr(exc, "best", None)
        raise NumericalFailure(str(exc), {"eps0": eps0, "best": best}) from exc
    traj = run.path(f"orbit_n{args.n}_e{qio.fmt(eps0)}.csv")
    qio.write_csv(traj, qio.TRAJECTORY_HEADER, _trajectory_rows(orbit))
    table = run.out / "orbit_table.csv"
    row = orbit.row()
    qio.append_csv(table, qio.ORBIT_HEADER, [[row[k] for k in qio.ORBIT_HEADER]])
    run.artifacts.append(str(table))
    run.results = {**row, "constant": orbit.constant, "periodicity_defect": orbit.periodicity_defect(),
                   "iterations": orbit.iterations,
                   "integration": None if orbit.constant else orbit.half_orbit.stats()}
    print(json.dumps(run.results, indent=2, default=_jsonable))
    return EXIT_OK


def sweep_grid(params, start_rel: float, stop_rel: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise UsageError("sweep grid is empty (need --steps >= 1)")
    if not 0 < stop_rel <= start_rel <= 1 or (steps > 1 and stop_rel == start_rel):
        raise UsageError("need 0 < --to-rel < --from-rel <= 1")
    return params.eps_star * np.linspace(start_rel, stop_rel, steps)


def cmd_sweep(run: Run) -> int:
    args = run.args
    params = make_params(args.n)
    grid = sweep_grid(params, args.from_rel, args.to_rel, args.steps)
    result = continuation_sweep(params, grid, tol=args.tol, max_iter=args.max_iter,
                                tolerances=_tolerances(args))
    rows = []
    for o in result.orbits:
        pz = pohozaev_cyl(params, o)
        rows.append([params.n, o.eps0, pz.h_rad, pz.p_cyl, o.period])
    path = run.path(f"pohozaev_n{args.n}.csv")
    qio.write_csv(path, qio.POHOZAEV_HEADER, rows)
    p = [r[3] for r in rows]
    run.results = {
        "rows": len(rows),
        "p_cyl_increasing": [b > a for a, b in zip(p[:-1], p[1:])],
        "period_increasing": result.period_increasing(),
        "complete": result.complete,
    }
    print(json.dumps(run.results, indent=2))
    if not result.complete:
        raise NumericalFailure(f"sweep stopped at eps0={result.failed_at!r}: {result.message}",
                               {"failed_at": result.failed_at, "rows_written": len(rows)})
    return EXIT_OK


def cmd_verify(run: Run) -> int:
    args = run.args
    make_params(args.n)
    report = run_checks(args.n, args.tol)
    run.results = report.as_dict()
    path = run.path(f"verify_n{args.n}.json")
    path.write_text(json.dumps(report.as_dict(), indent=2) + "\n")
    print(json.dumps(report.as_dict(), indent=2))
    if not report.passed:
        print(f"verification failed: {', '.join(report.failing)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_modica(run: Run) -> int:
    args = run.args
    params = make_params(args.n)
    grid = log_grid(args.r_min, args.r_max, args.points)
    if args.source == "spherical":
        profile = spherical_profile(grid, params, order=4)
        tag = "spherical"
    elif args.source == "orbit":
        if args.eps0 is None and args.eps0_rel is None:
            raise UsageError("--source orbit needs --eps0 or --eps0-rel")
        eps0 = _necksize(args, params)
        try:
            orbit = find_orbit(params, eps0)
        except (ShootingError, IntegrationError) as exc:
            raise NumericalFailure(str(exc), {"eps0": eps0}) from exc
        profile = delaunay_profile(orbit, 0.0, grid, order=4)
        tag = f"orbit_e{qio.fmt(eps0)}"
    else:
        if args.path is None:
            raise UsageError("--source file needs --path")
        profile = qio.read_profile(args.path, params.n)
        tag = "file"
    rep = modica_quantities(profile, params)
    for r in (rep.q2, rep.q4, rep.margin2, rep.margin4):
        path = run.path(f"modica_n{args.n}_{tag}_{r.name}.csv")
        qio.write_csv(path, qio.REPORT_HEADER, np.column_stack([r.grid, r.values]))
    run.results = rep.summary()
    print(json.dumps(run.results, indent=2, default=_jsonable))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--n", type=int, required=True, help="dimension (>= 7)")
        p.add_argument("--out", default=os.environ.get(OUTPUT_ENV, "qsix-output"),
                       help=f"output directory (default ${OUTPUT_ENV} or ./qsix-output)")

    def numerics(p):
        p.add_argument("--atol", type=_positive, default=SHOOT_TOL[0], help="integrator absolute tolerance")
        p.add_argument("--rtol", type=_positive, default=SHOOT_TOL[1], help="integrator relative tolerance")
        p.add_argument("--tol", type=_positive, default=RESIDUAL_TOL, help="shooting residual tolerance")
        p.add_argument("--max-iter", type=int, default=MAX_ITER)

    def necksize(p, required):
        g = p.add_mutually_exclusive_group(required=required)
        g.add_argument("--eps0", type=float, help="necksize")
        g.add_argument("--eps0-rel", type=float, help="necksize as a multiple of eps_star")

    p = sub.add_parser("params", help="dimension constants and identity checks")
    common(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("orbit", help="one Delaunay orbit")
    common(p)
    necksize(p, True)
    numerics(p)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("sweep", help="necksize sweep and Pohozaev curve")
    common(p)
    p.add_argument("--from-rel", type=float, default=0.95)
    p.add_argument("--to-rel", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=10)
    numerics(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="consolidated self-checks")
    common(p)
    p.add_argument("--tol", type=_positive, default=None, help="override every check threshold")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("modica", help="Modica-type margins of a profile")
    common(p)
    p.add_argument("--source", choices=("orbit", "spherical", "file"), required=True)
    p.add_argument("--path", help="profile CSV for --source file")
    necksize(p, False)
    p.add_argument("--r-min", type=_positive, default=0.1)
    p.add_argument("--r-max", type=_positive, default=10.0)
    p.add_argument("--points", type=int, default=200)
    p.set_defaults(func=cmd_modica)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    run = Run(args)
    try:
        status = args.func(run)
    except (DomainError, UsageError, qio.ProfileFormatError) as exc:
        run.discard()
        print(f"qsix {args.command}: {exc}", file=sys.stderr)
        status = EXIT_USAGE
    except NumericalFailure as exc:
        if args.command != "sweep":
            run.discard()
        print(f"qsix {args.command}: non-convergence: {exc}", file=sys.stderr)
        if exc.diagnostics:
            print(json.dumps(exc.diagnostics, default=_jsonable), file=sys.stderr)
        run.results = {**run.results, "error": str(exc), "diagnostics": exc.diagnostics}
        status = EXIT_NUMERIC
    run.manifest(status)
    return status


if __name__ == "__main__":
    sys.exit(main())
