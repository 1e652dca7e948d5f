"""Command-line entry point wiring the pipeline end-to-end.

Subcommands: synth | match | eval | sweep | viz. Every run writes a
manifest of resolved parameters next to its outputs; eval, sweep, and viz
additionally render a PNG figure alongside the CSV unless --no-plot.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fileio, plots
from .descriptors import (
    DescriptorSet,
    NormStats,
    composites_from_halves,
    normalize_batch,
    normalize_segmented,
    split_composites,
)
from .evaluation import score_matches, pca_project, sweep_sequence_length
from .matching import CostMatrix, build_composite_cost_matrix, build_cost_matrix
from .sequence import MatchResult, SearchParams, match_all
from .synth import SynthConfig, generate

MODES = ("raw", "nsd", "nsd_cr", "nsd_segmented")


def _write_manifest(path: Path, params: dict) -> None:
    params = {k: v for k, v in params.items() if k != "func"}
    lines = [f"{key} = {params[key]}" for key in sorted(params)]
    path.write_text("\n".join(lines) + "\n")


def _manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.txt")


def _meters_to_frames(meters: float, spacing_m: float, what: str) -> int:
    if spacing_m <= 0:
        raise ValueError("--spacing-m must be positive")
    frames = int(round(meters / spacing_m))
    if frames < 1:
        raise ValueError(f"{what} of {meters} m is under one frame at {spacing_m} m spacing")
    return frames


def _require_whole(obj, path) -> DescriptorSet:
    if not isinstance(obj, DescriptorSet):
        raise ValueError(f"{path} is a composite file; this mode needs whole-image descriptors")
    return obj


def _require_composite(obj, path) -> list:
    if isinstance(obj, DescriptorSet):
        raise ValueError(f"{path} is a whole-image file; mode nsd_cr needs composite descriptors")
    return obj


def _normalize_online(dset: DescriptorSet) -> DescriptorSet:
    """Fold each row into running stats (new row included), then standardize it."""
    stats = NormStats(dset.dim)
    rows = np.zeros_like(dset.data)
    for i in range(dset.count):
        stats.update(dset.data[i])
        rows[i] = stats.apply(dset.data[i])
    return DescriptorSet(rows, dset.labels)


def _validate_match_flags(args) -> None:
    if args.mode == "nsd_segmented" and not args.segments:
        raise ValueError("mode nsd_segmented requires --segments")
    if args.segments and args.mode != "nsd_segmented":
        raise ValueError("--segments is only valid with mode nsd_segmented")
    if args.mode == "nsd_segmented" and args.normalization == "online":
        raise ValueError("mode nsd_segmented supports batch normalization only")
    if args.mode == "raw" and args.normalization == "online":
        raise ValueError("--normalization online has no effect in raw mode")


def _build_matrix(args) -> tuple[CostMatrix, int]:
    """Load descriptor files and build the cost matrix for the chosen mode."""
    if args.mode == "nsd_cr":
        ref = _require_composite(fileio.read_descriptors(args.reference), args.reference)
        qry = _require_composite(fileio.read_descriptors(args.query), args.query)
        ref_left, ref_right = split_composites(ref)
        qry_left, qry_right = split_composites(qry)
        if ref_left.dim != qry_left.dim:
            raise ValueError(
                f"dimension mismatch: reference half dim {ref_left.dim}, "
                f"query half dim {qry_left.dim}"
            )
        ref_left, _ = normalize_batch(ref_left)
        ref_right, _ = normalize_batch(ref_right)
        if args.normalization == "online":
            qry_left = _normalize_online(qry_left)
            qry_right = _normalize_online(qry_right)
        else:
            qry_left, _ = normalize_batch(qry_left)
            qry_right, _ = normalize_batch(qry_right)
        matrix = build_composite_cost_matrix(
            composites_from_halves(qry_left, qry_right),
            composites_from_halves(ref_left, ref_right),
        )
        return matrix, qry_left.count

    reference = _require_whole(fileio.read_descriptors(args.reference), args.reference)
    query = _require_whole(fileio.read_descriptors(args.query), args.query)
    if reference.dim != query.dim:
        raise ValueError(
            f"dimension mismatch: reference dim {reference.dim}, query dim {query.dim}"
        )
    if args.mode == "nsd":
        reference, _ = normalize_batch(reference)
        if args.normalization == "online":
            query = _normalize_online(query)
        else:
            query, _ = normalize_batch(query)
    elif args.mode == "nsd_segmented":
        segments = fileio.read_segments(args.segments)
        reference = normalize_segmented(reference, segments)
        query = normalize_segmented(query, segments)
    return build_cost_matrix(query, reference), query.count


def _search_params(args) -> SearchParams:
    return SearchParams(
        seq_len=_meters_to_frames(args.seq_len_m, args.spacing_m, "--seq-len-m"),
        slope_count=args.slope_count,
        angle_halfwidth=args.angle_halfwidth,
        uniqueness_window=args.uniqueness_window,
    )


def _mask_warmup(results: list[MatchResult], warmup: int) -> list[MatchResult]:
    masked = []
    for r in results:
        if r.query_index < warmup:
            masked.append(MatchResult(r.query_index, None, None, None))
        else:
            masked.append(r)
    return masked


def cmd_synth(args) -> int:
    config = SynthConfig(
        n_places=args.n_places,
        dim=args.dim,
        seed=args.seed,
        place_signal_sigma=args.place_sigma,
        category_count=args.category_count,
        category_sigma=args.category_sigma,
        condition_scale_range=(args.scale_min, args.scale_max),
        condition_offset_sigma=args.offset_sigma,
        noise_sigma=args.noise_sigma,
        reverse=args.reverse,
        spacing_m=args.spacing_m,
        condition_segment_count=args.condition_segments,
    )
    world = generate(config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fileio.write_descriptors(world.reference, out / "reference.nsd")
    fileio.write_descriptors(world.query, out / "query.nsd")
    fileio.write_descriptors(world.reference_composites, out / "reference_cr.nsd")
    fileio.write_descriptors(world.query_composites, out / "query_cr.nsd")
    fileio.write_traverse(world.reference_traverse, out / "reference_traverse.csv")
    fileio.write_traverse(world.query_traverse, out / "query_traverse.csv")
    fileio.write_ground_truth(world.ground_truth, out / "ground_truth.csv")
    if config.condition_segment_count > 1:
        fileio.write_segments(world.condition_segments, out / "condition_segments.csv")
    _write_manifest(out / "run_manifest.txt", vars(args) | {"command": "synth"})
    print(f"wrote synthetic world ({config.n_places} places) to {out}")
    return 0


def cmd_match(args) -> int:
    _validate_match_flags(args)
    matrix, n_query = _build_matrix(args)
    params = _search_params(args)
    results = match_all(matrix, params)
    if args.normalization == "online" and args.warmup > 0:
        results = _mask_warmup(results, args.warmup)
    out = Path(args.out)
    fileio.write_match_results(results, out)
    _write_manifest(
        _manifest_path(out),
        vars(args) | {"command": "match", "seq_len_frames": params.seq_len, "queries": n_query},
    )
    matched = sum(1 for r in results if r.best_reference is not None)
    print(f"matched {matched}/{n_query} queries -> {out}")
    return 0


def cmd_eval(args) -> int:
    results = fileio.read_match_results(args.matches)
    gt = fileio.read_ground_truth(args.ground_truth)
    within = _meters_to_frames(args.tolerance_m, args.spacing_m, "--tolerance-m")
    curve = score_matches(results, gt, within)
    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        fh.write("threshold,precision,recall,f1\n")
        for p in curve.points:
            fh.write(f"{_csv_float(p.threshold)},{_csv_float(p.precision)},"
                     f"{_csv_float(p.recall)},{_csv_float(p.f1)}\n")
    _write_manifest(
        _manifest_path(out),
        vars(args) | {"command": "eval", "within_frames": within, "max_f1": repr(curve.max_f1)},
    )
    if not args.no_plot:
        plots.save_pr_curve(curve, out.with_suffix(".png"))
    print(f"max_f1 = {curve.max_f1!r}")
    return 0


def cmd_sweep(args) -> int:
    _validate_match_flags(args)
    matrix, _ = _build_matrix(args)
    gt = fileio.read_ground_truth(args.ground_truth)
    within = _meters_to_frames(args.tolerance_m, args.spacing_m, "--tolerance-m")
    meters = [float(s) for s in args.lengths_m.split(",") if s.strip()]
    if not meters:
        raise ValueError("--lengths-m is empty")
    frames = [_meters_to_frames(m, args.spacing_m, "--lengths-m entry") for m in meters]
    params = _search_params_for_sweep(args)
    scores = sweep_sequence_length(matrix, gt, frames, params, within)
    out = Path(args.out)
    rows = [(meters[i], frames[i], scores[i][1]) for i in range(len(meters))]
    with open(out, "w", newline="") as fh:
        fh.write("seq_len_m,seq_len_frames,max_f1\n")
        for m, l, f1 in rows:
            fh.write(f"{_csv_float(m)},{l},{_csv_float(f1)}\n")
    _write_manifest(_manifest_path(out), vars(args) | {"command": "sweep", "within_frames": within})
    if not args.no_plot:
        plots.save_sweep(rows, out.with_suffix(".png"))
    for m, l, f1 in rows:
        print(f"seq_len {m} m ({l} frames): max_f1 = {f1!r}")
    return 0


def _search_params_for_sweep(args) -> SearchParams:
    # seq_len is overridden per swept length; 1 is a valid placeholder.
    return SearchParams(
        seq_len=1,
        slope_count=args.slope_count,
        angle_halfwidth=args.angle_halfwidth,
        uniqueness_window=args.uniqueness_window,
    )


def cmd_viz(args) -> int:
    dset = _require_whole(fileio.read_descriptors(args.descriptors), args.descriptors)
    if args.normalized:
        dset, _ = normalize_batch(dset)
    coords = pca_project(dset, 2)
    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        fh.write("index,pc1,pc2\n")
        for i in range(coords.shape[0]):
            fh.write(f"{i},{_csv_float(coords[i, 0])},{_csv_float(coords[i, 1])}\n")
    _write_manifest(_manifest_path(out), vars(args) | {"command": "viz"})
    if not args.no_plot:
        title = "normalized descriptors" if args.normalized else "raw descriptors"
        plots.save_projection(coords, out.with_suffix(".png"), title)
    print(f"projected {coords.shape[0]} descriptors -> {out}")
    return 0


def _csv_float(v: float) -> str:
    return repr(float(v))


def _add_match_knobs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=MODES, default="nsd")
    parser.add_argument("--normalization", choices=("batch", "online"), default="batch")
    parser.add_argument("--warmup", type=int, default=5,
                        help="queries masked as unscored in online mode")
    parser.add_argument("--seq-len-m", type=float, default=80.0)
    parser.add_argument("--spacing-m", type=float, default=2.0)
    parser.add_argument("--slope-count", type=int, default=11)
    parser.add_argument("--angle-halfwidth", type=float, default=0.2)
    parser.add_argument("--uniqueness-window", type=int, default=10)
    parser.add_argument("--segments", default=None,
                        help="start,stop row-range CSV for mode nsd_segmented")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsdvpr",
        description="Sequence-based place recognition over normalized descriptor sets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic reference/query world")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-places", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--place-sigma", type=float, default=1.0)
    p.add_argument("--category-count", type=int, default=4)
    p.add_argument("--category-sigma", type=float, default=1.0)
    p.add_argument("--scale-min", type=float, default=1.0)
    p.add_argument("--scale-max", type=float, default=1.0)
    p.add_argument("--offset-sigma", type=float, default=0.0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--reverse", action="store_true")
    p.add_argument("--spacing-m", type=float, default=2.0)
    p.add_argument("--condition-segments", type=int, default=1)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("match", help="build a cost matrix and search sequences")
    p.add_argument("--reference", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--out", required=True)
    _add_match_knobs(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("eval", help="score a match file into a PR curve")
    p.add_argument("--matches", required=True)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tolerance-m", type=float, required=True)
    p.add_argument("--spacing-m", type=float, default=2.0)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="max-F1 across sequence lengths")
    p.add_argument("--reference", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lengths-m", required=True,
                   help="comma-separated sequence lengths in meters")
    p.add_argument("--tolerance-m", type=float, required=True)
    p.add_argument("--no-plot", action="store_true")
    _add_match_knobs(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("viz", help="2-D principal-component projection")
    p.add_argument("--descriptors", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--normalized", action="store_true")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_viz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
