"""End-to-end runs: input -> candidates -> dilation -> selection -> connection -> outputs."""
from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterator, Literal, Optional, Tuple, Union

import numpy as np

from ..candidates.generate import (
    CandidateSet,
    GenerationStats,
    candidates_random,
    candidates_voronoi_cloud,
    candidates_voronoi_mesh,
    estimate_radii,
)
from ..candidates.sampling import SurfaceSampleSet, as_samples, sample_mesh_surface
from ..config import RunConfig, rng_for
from ..errors import Infeasible, InvalidParameter, SelectionError
from ..fileio.indices import read_index_file
from ..fileio.mesh import OrientedPointCloud, TriangleMesh, load_mesh, load_point_cloud, write_mesh, write_point_cloud
from ..fileio.report import (
    CandidateInfo,
    Counts,
    Dilation,
    Errors,
    PartitionInfo,
    RunReport,
    SkeletonInfo,
    SolverInfo,
    write_report,
)
from ..fileio.skeleton import read_skeleton, write_selection, write_skeleton
from ..geometry.primitives import NormalizeTransform, bbox_diagonal, normalize_to_unit_box
from ..selection.coverage import CoverageMatrix, Offset, Scaling, build_coverage, dilate, read_instance, set_ignorable, verify_coverage, write_instance
from ..selection.models import Fixings, Selection
from ..selection.partition import partition_samples, read_labels, solve_partitioned
from ..selection.solvers import get_solver
from ..skeleton.connect import connect_selected
from ..skeleton.model import Skeleton, skeleton_stats
from ..skeleton.reconstruct import ErrorTriple, hausdorff, sample_reconstruction

log = logging.getLogger(__name__)

InputType = Literal["mesh", "cloud"]
Shape = Union[TriangleMesh, OrientedPointCloud]


@dataclass(frozen=True)
class PreparedInput:
    """Input normalized into the unit box, plus the surface sample sets drawn from it."""

    shape: Shape
    transform: NormalizeTransform
    diagonal: float
    cover: SurfaceSampleSet
    generators: SurfaceSampleSet


@dataclass
class OutputPaths:
    skeleton: Path
    radii: Path
    selection: Path
    report: Path

    @classmethod
    def for_prefix(cls, prefix: str) -> "OutputPaths":
        skel = Path(f"{prefix}.skel.obj")
        return cls(skel, skel.with_name(skel.name + ".radii"), Path(f"{prefix}.selection.txt"), Path(f"{prefix}.report.json"))


@dataclass
class PipelineResult:
    report: RunReport
    paths: OutputPaths
    skeleton: Optional[Skeleton] = None
    selection: Optional[Selection] = None


@contextmanager
def _stage(timing: Dict[str, float], name: str) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    finally:
        timing[name] = round(time.perf_counter() - start, 6)
        log.debug(f"Stage {name} took {timing[name]:.3f}s")


def load_input(path: str, input_type: InputType) -> Tuple[Shape, NormalizeTransform]:
    if input_type == "mesh":
        mesh = load_mesh(path)
        _, transform = normalize_to_unit_box(mesh.vertices)
        return mesh.transformed(transform), transform
    if input_type == "cloud":
        cloud = load_point_cloud(path)
        _, transform = normalize_to_unit_box(cloud.points)
        return cloud.transformed(transform), transform
    raise InvalidParameter(f"unknown input type {input_type!r}")


def prepare_input(path: str, input_type: InputType, n_cover: int, n_gen: Optional[int], seed: int) -> PreparedInput:
    """Load and normalize the input, then draw its samples. Without `n_gen` the cover samples double as generators."""
    shape, transform = load_input(path, input_type)
    if isinstance(shape, TriangleMesh):
        diagonal = bbox_diagonal(shape.vertices)
        cover = sample_mesh_surface(shape, n_cover, seed, "cover")
        generators = cover if n_gen is None else sample_mesh_surface(shape, n_gen, seed, "gen")
    else:
        # An oriented cloud is its own sample set for both roles
        diagonal = bbox_diagonal(shape.points)
        cover = generators = as_samples(shape)
        log.info(f"Point cloud input: all {len(cover)} points act as cover and generator samples")
    return PreparedInput(shape, transform, diagonal, cover, generators)


def generate_candidates(prepared: PreparedInput, config: RunConfig) -> Tuple[CandidateSet, GenerationStats]:
    shape = prepared.shape
    if config.candidates == "random":
        target = shape if isinstance(shape, TriangleMesh) else prepared.cover
        return candidates_random(target, config.n_random, config.seed)
    if isinstance(shape, TriangleMesh):
        return candidates_voronoi_mesh(prepared.generators, shape, config.seed)
    return candidates_voronoi_cloud(prepared.generators)


def _fixings(config: RunConfig) -> Fixings:
    forced_in = read_index_file(config.force_in) if config.force_in else []
    forced_out = read_index_file(config.force_out) if config.force_out else []
    return Fixings(frozenset(forced_in), frozenset(forced_out))


def _dilation(config: RunConfig):
    return Offset(config.delta_r) if config.dilate == "offset" else Scaling(config.sigma_r)


def evaluation_surface(shape: Shape, n_recon: int, seed: int) -> SurfaceSampleSet:
    """Surface side of the error measurement: `n_recon` fresh mesh samples, or every cloud point."""
    if isinstance(shape, TriangleMesh):
        return sample_mesh_surface(shape, n_recon, seed, "eval")
    return as_samples(shape)


def evaluate(skeleton: Skeleton, shape: Shape, diagonal: float, n_recon: int, seed: int) -> Optional[Errors]:
    recon = sample_reconstruction(skeleton, n_recon, seed)
    if recon.kept == 0:
        log.warning("Every reconstruction sample was buried inside another primitive; no error reported")
        return None
    surface = evaluation_surface(shape, n_recon, seed)
    triple = hausdorff(surface.points, recon.points, diagonal)
    return Errors(
        eps1_pct=triple.eps1,
        eps2_pct=triple.eps2,
        eps_pct=triple.eps,
        diagonal=diagonal,
        surface_samples=len(surface),
        recon_samples_drawn=recon.drawn,
        recon_samples_kept=recon.kept,
    )


def run_pipeline(config: RunConfig, workers: int = 4) -> PipelineResult:
    """Run every stage and write the skeleton, selection and report files.

    An infeasible cover still writes the report, listing the uncovered samples,
    before the Infeasible error propagates.
    """
    timing: Dict[str, float] = {}
    paths = OutputPaths.for_prefix(config.out)
    log.info(f"Run started: {config.input} ({config.type}), seed {config.seed}")

    with _stage(timing, "load_and_sample"):
        prepared = prepare_input(config.input, config.type, config.n_cover, config.n_gen, config.seed)
    cover = prepared.cover

    with _stage(timing, "candidates"):
        candidates, stats = generate_candidates(prepared, config)
        candidates, stats.dropped_on_surface = estimate_radii(candidates, cover)
        candidates = dilate(candidates, _dilation(config))

    with _stage(timing, "coverage"):
        matrix = build_coverage(cover, candidates)
        ignored = read_index_file(config.ignore) if config.ignore else []
        if ignored:
            matrix = set_ignorable(matrix, ignored)
        if config.dump_instance:
            write_instance(config.dump_instance, matrix)
    fix = _fixings(config)

    report = RunReport(
        input=str(config.input),
        input_type=config.type,
        seed=config.seed,
        counts=Counts(
            surface_samples=len(cover),
            generator_samples=len(prepared.generators),
            candidates=len(candidates),
            ignored_samples=int((matrix.required == 0).sum()),
        ),
        dilation=Dilation(
            mode=config.dilate,
            delta_r=config.delta_r if config.dilate == "offset" else None,
            sigma_r=config.sigma_r if config.dilate == "scale" else None,
        ),
        transform=prepared.transform.to_dict(),
        candidates=CandidateInfo(**asdict(stats)),
        timing_s=timing,
    )

    try:
        with _stage(timing, "selection"):
            selection, partition_info = _select(matrix, cover, candidates, fix, config, workers)
    except Infeasible as e:
        report.status = "infeasible"
        report.uncovered_samples = e.rows
        report.error = {"error": e.category, "detail": str(e), **e.context()}
        report.timing_s = dict(timing)
        write_report(paths.report, report)
        log.error(f"Run infeasible: {e}")
        raise

    chosen = np.asarray(selection.chosen, dtype=np.int64)
    if len(chosen) == 0:
        raise InvalidParameter("nothing to connect: the selection is empty because no sample is required")
    missed = verify_coverage(cover, candidates.centers[chosen], candidates.dilated[chosen], matrix.required)
    if len(missed):
        raise SelectionError(f"{len(missed)} required samples lie outside every selected ball")
    report.counts.selected = selection.objective
    report.solver = SolverInfo(
        name=selection.solver,
        optimal=selection.optimal,
        objective=selection.objective,
        time_limit_s=config.time_limit if config.solver == "exact" else None,
        nodes=selection.nodes,
        forced_in=len(fix.forced_in),
        forced_out=len(fix.forced_out),
        reductions=selection.reductions,
    )
    report.partition = partition_info

    with _stage(timing, "connect"):
        link_samples = prepared.generators if config.connect_with == "gen" else cover
        connection = connect_selected(
            candidates.centers[chosen],
            candidates.radii[chosen],
            candidates.dilated[chosen],
            link_samples,
            config.delta_r,
            config.connect_boost,
        )
        skeleton = connection.skeleton.quantized()
        write_skeleton(paths.skeleton, skeleton)
        write_selection(paths.selection, chosen, candidates.centers[chosen], candidates.radii[chosen], candidates.dilated[chosen])

    topo = skeleton_stats(skeleton)
    report.skeleton = SkeletonInfo(
        vertices=topo.vertices,
        edges=topo.edges,
        faces=topo.faces,
        components=topo.components,
        cycle_rank=topo.cycle_rank,
        connect_with=config.connect_with,
        connect_boost=config.connect_boost,
        sample_weight_radius=config.delta_r,
        redundant_balls=connection.redundant_balls,
        jitter=connection.jitter,
    )

    with _stage(timing, "evaluate"):
        report.errors = evaluate(skeleton, prepared.shape, prepared.diagonal, config.n_recon, config.seed)

    report.timing_s = dict(timing)
    write_report(paths.report, report)
    eps = f"{report.errors.eps_pct:.3f}%" if report.errors else "n/a"
    log.info(f"Run finished: {selection.objective} balls, {topo.edges} edges, eps {eps}")
    return PipelineResult(report, paths, skeleton, selection)


def _select(
    matrix: CoverageMatrix,
    cover: SurfaceSampleSet,
    candidates: CandidateSet,
    fix: Fixings,
    config: RunConfig,
    workers: int,
) -> Tuple[Selection, PartitionInfo]:
    solver = get_solver(config.solver, config.time_limit)
    if config.labels is None and config.partition_k == 1:
        return solver.solve(matrix, fix), PartitionInfo(parts=1, mode="none")
    labels = read_labels(config.labels, len(cover)) if config.labels else None
    partition = partition_samples(cover, candidates.centers, config.partition_k, config.seed, labels)
    selection, repaired = solve_partitioned(matrix, partition, solver, fix, workers)
    return selection, PartitionInfo(parts=partition.k, mode=partition.mode, repaired_rows=repaired)


@dataclass
class EvalResult:
    errors: ErrorTriple
    diagonal: float
    surface_samples: int
    recon_samples_drawn: int
    recon_samples_kept: int
    skeleton: Dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = self.errors.to_dict()
        out.update(
            diagonal=self.diagonal,
            surface_samples=self.surface_samples,
            recon_samples_drawn=self.recon_samples_drawn,
            recon_samples_kept=self.recon_samples_kept,
            skeleton=self.skeleton,
        )
        return out


def run_eval(
    skeleton_path: str,
    input_path: str,
    input_type: InputType = "mesh",
    seed: int = 0,
    n_recon: int = 5000,
) -> EvalResult:
    """Score a skeleton file (unit-box coordinates) against a surface.

    With the run's seed and `n_recon` this reproduces the run report's errors.
    """
    skeleton = read_skeleton(skeleton_path)
    if len(skeleton) == 0:
        raise InvalidParameter(f"{skeleton_path}: skeleton has no vertices")
    shape, _ = load_input(input_path, input_type)
    diagonal = bbox_diagonal(shape.vertices if isinstance(shape, TriangleMesh) else shape.points)
    errors = evaluate(skeleton, shape, diagonal, n_recon, seed)
    if errors is None:
        raise InvalidParameter("reconstruction produced no surface samples")
    triple = ErrorTriple(errors.eps1_pct, errors.eps2_pct)
    log.info(f"Evaluated {skeleton_path}: eps1 {triple.eps1:.3f}% eps2 {triple.eps2:.3f}% eps {triple.eps:.3f}%")
    return EvalResult(
        triple,
        diagonal,
        errors.surface_samples,
        errors.recon_samples_drawn,
        errors.recon_samples_kept,
        skeleton_stats(skeleton)._asdict(),
    )


def perturb(input_path: str, output_path: str, amplitude: float, seed: int = 0, input_type: InputType = "mesh") -> int:
    """Add seeded Gaussian noise to vertex positions; amplitude is in unit-box units.

    Returns the number of perturbed points. The output keeps the input's units.
    """
    if amplitude < 0:
        raise InvalidParameter(f"noise amplitude must be non-negative, got {amplitude}")
    rng = rng_for(seed, "perturb")
    if input_type == "mesh":
        mesh = load_mesh(input_path)
        _, transform = normalize_to_unit_box(mesh.vertices)
        noise = rng.normal(size=mesh.vertices.shape) * (amplitude / transform.scale)
        write_mesh(output_path, TriangleMesh(mesh.vertices + noise, mesh.triangles))
        count = len(mesh.vertices)
    elif input_type == "cloud":
        cloud = load_point_cloud(input_path)
        _, transform = normalize_to_unit_box(cloud.points)
        noise = rng.normal(size=cloud.points.shape) * (amplitude / transform.scale)
        write_point_cloud(output_path, OrientedPointCloud(cloud.points + noise, cloud.normals))
        count = len(cloud)
    else:
        raise InvalidParameter(f"unknown input type {input_type!r}")
    log.info(f"Perturbed {count} points of {input_path} with amplitude {amplitude:g}")
    return count


def solve_instance(
    path: str,
    solver: str = "exact",
    time_limit: float = 120.0,
    ignore: Optional[str] = None,
    force_in: Optional[str] = None,
    force_out: Optional[str] = None,
) -> Selection:
    """Solve a dumped coverage instance with no geometry attached."""
    matrix = read_instance(path)
    if ignore:
        matrix = set_ignorable(matrix, read_index_file(ignore))
    fix = Fixings(
        frozenset(read_index_file(force_in) if force_in else []),
        frozenset(read_index_file(force_out) if force_out else []),
    )
    return get_solver(solver, time_limit).solve(matrix, fix)
