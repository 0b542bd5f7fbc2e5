"""Command-line surface: `python -m app {run,eval,perturb,solve,shape} ...`."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from .config import RunConfig
from .controller.pipeline import perturb, run_eval, run_pipeline, solve_instance
from .errors import MedialCoverError, InvalidParameter
from .fileio.mesh import write_mesh
from .geometry.shapes import SHAPES, make_shape

log = logging.getLogger(__name__)


def _add_run(sub) -> None:
    p = sub.add_parser("run", help="Compute a skeleton for a mesh or oriented point cloud")
    p.add_argument("--input", required=True)
    p.add_argument("--type", choices=["mesh", "cloud"], default="mesh")
    p.add_argument("--n-cover", type=int, default=1500)
    p.add_argument("--n-gen", type=int, default=4000)
    p.add_argument("--candidates", choices=["voronoi", "random"], default="voronoi")
    p.add_argument("--n-random", type=int, default=10000)
    p.add_argument("--dilate", choices=["offset", "scale"], default="offset")
    p.add_argument("--delta-r", type=float, default=0.02)
    p.add_argument("--sigma-r", type=float, default=1.5)
    p.add_argument("--solver", choices=["greedy", "exact"], default="exact")
    p.add_argument("--time-limit", type=float, default=120.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ignore", help="Surface sample indices that need no coverage, one per line")
    p.add_argument("--force-in", help="Candidate indices that must be selected")
    p.add_argument("--force-out", help="Candidate indices that must not be selected")
    p.add_argument("--partition-k", type=int, default=1)
    p.add_argument("--labels", help="Part label per surface sample, one per line")
    p.add_argument("--connect-boost", type=float, default=1.0)
    p.add_argument("--connect-with", choices=["gen", "cover"], default="gen")
    p.add_argument("--n-recon", type=int, default=5000)
    p.add_argument("--dump-instance", help="Write the coverage instance to this path")
    p.add_argument("--workers", type=int, default=4, help="Threads for per-part solves")
    p.add_argument("--out", default="out/skeleton", help="Output prefix")


def _add_eval(sub) -> None:
    p = sub.add_parser("eval", help="Two-sided Hausdorff error of a skeleton against a surface")
    p.add_argument("--skeleton", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--type", choices=["mesh", "cloud"], default="mesh")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-recon", type=int, default=5000)


def _add_perturb(sub) -> None:
    p = sub.add_parser("perturb", help="Add seeded Gaussian noise to an input's points")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--amplitude", type=float, default=0.005, help="Noise sigma in unit-box units")
    p.add_argument("--type", choices=["mesh", "cloud"], default="mesh")
    p.add_argument("--seed", type=int, default=0)


def _add_solve(sub) -> None:
    p = sub.add_parser("solve", help="Solve a dumped coverage instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--solver", choices=["greedy", "exact", "brute"], default="exact")
    p.add_argument("--time-limit", type=float, default=120.0)
    p.add_argument("--ignore")
    p.add_argument("--force-in")
    p.add_argument("--force-out")


def _add_shape(sub) -> None:
    p = sub.add_parser("shape", help="Write a procedural test mesh as OBJ")
    p.add_argument("name", choices=sorted(SHAPES))
    p.add_argument("--out", required=True)
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="Builder parameter, repeatable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="app", description="Medial skeletons by covering the surface with inner balls")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="Warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run(sub)
    _add_eval(sub)
    _add_perturb(sub)
    _add_solve(sub)
    _add_shape(sub)
    return parser


def _parse_params(items: List[str]) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    for item in items:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise InvalidParameter(f"expected KEY=VALUE, got {item!r}")
        values = []
        for token in raw.split(","):
            try:
                values.append(int(token))
            except ValueError:
                try:
                    values.append(float(token))
                except ValueError:
                    raise InvalidParameter(f"parameter {key} needs numeric values, got {raw!r}")
        params[key.replace("-", "_")] = values[0] if len(values) == 1 else values
    return params


def _emit(payload: Dict[str, Any]) -> None:
    print(json.dumps(payload, sort_keys=True))


def _cmd_run(args) -> int:
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.model_fields}
    try:
        config = RunConfig(**fields)
    except ValidationError as e:
        raise InvalidParameter(str(e)) from e
    result = run_pipeline(config, workers=args.workers)
    report = result.report
    _emit(
        {
            "status": report.status,
            "selected": report.counts.selected,
            "optimal": report.solver.optimal if report.solver else None,
            "eps_pct": report.errors.eps_pct if report.errors else None,
            "skeleton": str(result.paths.skeleton),
            "report": str(result.paths.report),
        }
    )
    return 0


def _cmd_eval(args) -> int:
    result = run_eval(args.skeleton, args.input, args.type, args.seed, args.n_recon)
    _emit(result.to_dict())
    return 0


def _cmd_perturb(args) -> int:
    count = perturb(args.input, args.output, args.amplitude, args.seed, args.type)
    _emit({"output": args.output, "points": count, "amplitude": args.amplitude})
    return 0


def _cmd_solve(args) -> int:
    selection = solve_instance(args.instance, args.solver, args.time_limit, args.ignore, args.force_in, args.force_out)
    _emit(
        {
            "objective": selection.objective,
            "chosen": list(selection.chosen),
            "optimal": selection.optimal,
            "nodes": selection.nodes,
            "wall_time": round(selection.wall_time, 6),
        }
    )
    return 0


def _cmd_shape(args) -> int:
    try:
        mesh = make_shape(args.name, **_parse_params(args.param))
    except TypeError as e:
        raise InvalidParameter(str(e)) from e
    write_mesh(args.out, mesh)
    _emit({"shape": args.name, "out": args.out, "vertices": len(mesh.vertices), "triangles": len(mesh.triangles)})
    return 0


COMMANDS = {
    "run": _cmd_run,
    "eval": _cmd_eval,
    "perturb": _cmd_perturb,
    "solve": _cmd_solve,
    "shape": _cmd_shape,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except MedialCoverError as e:
        print(json.dumps({"error": e.category, "detail": str(e), **e.context()}), file=sys.stderr)
        return e.exit_code
