"""Command-line front end.

Subcommands::

    convseq benchmark QUERY_DIR REF_DIR --out DIR   full pipeline + report
    convseq ablate    QUERY_DIR REF_DIR --out DIR   fixed-k sweep
    convseq seqlens   QUERY_DIR --out DIR           sequence-length analysis
    convseq gen-synthetic --out DIR                 synthetic dataset on disk

Configuration precedence: flags > manifest file > built-in defaults.
Every run that produces a report also writes a manifest; re-running
``benchmark --manifest manifest.json`` reproduces all non-timing outputs
byte-identically.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import DEFAULT_T_E_MAX, PipelineConfig
from .datasetio import (
    Traverse,
    VariationSpec,
    generate_synthetic_traverse,
    load_ground_truth,
    load_traverse,
)
from .descriptor import load_descriptor_cache, save_descriptor_cache
from .errors import ConvseqError, DatasetError
from .evaluation import (
    MatchRecord,
    judge,
    render_pr_svg,
    time_encoding,
    write_matches_csv,
    write_pr_csv,
)
from .pipeline import (
    assemble_report,
    encode_query_traverse,
    encode_reference_traverse,
    pairwise_scores,
    run_benchmark,
    run_matching,
)
from .sequencer import decide_sequence, write_decision_log

THREADS_ENV_VAR = "CONVSEQ_THREADS"


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record written alongside every report."""

    command: str
    tool_version: str
    timestamp: str
    config: dict
    query_dir: str | None
    ref_dir: str | None
    tolerance: int
    t_e_max: float
    threads: int
    seed: int | None = None

    def save(self, path: Path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: Path | str) -> "RunManifest":
        with open(path) as fh:
            return cls(**json.load(fh))


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _config_from_args(args, base: PipelineConfig) -> PipelineConfig:
    updates = {}
    if args.image_size is not None:
        updates["image_width"] = args.image_size
        updates["image_height"] = args.image_size
    if args.cell_size is not None:
        updates["cell_width"] = args.cell_size
        updates["cell_height"] = args.cell_size
    if args.bins is not None:
        updates["orientation_bins"] = args.bins
    if args.et is not None:
        updates["entropy_threshold"] = args.et
    if args.it is not None:
        updates["info_threshold"] = args.it
    if args.min_k is not None:
        updates["min_k"] = args.min_k
    if args.max_k_info_gain is not None:
        updates["max_k_info_gain"] = args.max_k_info_gain
    if args.max_k is not None:
        updates["max_k"] = args.max_k
    if args.seq_step is not None:
        updates["seq_step"] = args.seq_step
    merged = dict(base.to_dict(), **updates)
    return PipelineConfig.from_dict(merged)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    grp = parser.add_argument_group("pipeline configuration")
    grp.add_argument("--et", type=float, help="entropy threshold in [0,1]")
    grp.add_argument("--it", type=float, help="information threshold in [0,1]")
    grp.add_argument("--min-k", type=int, dest="min_k")
    grp.add_argument("--max-k-info-gain", type=int, dest="max_k_info_gain")
    grp.add_argument("--max-k", type=int, dest="max_k")
    grp.add_argument("--seq-step", type=int, dest="seq_step")
    grp.add_argument("--image-size", type=int, help="standardised square image side")
    grp.add_argument("--cell-size", type=int, help="square region side in pixels")
    grp.add_argument("--bins", type=int, help="orientation histogram bins")
    parser.add_argument("--tolerance", type=int, default=None,
                        help="ground-truth frame tolerance (default 2)")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ${THREADS_ENV_VAR} or 1)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--manifest", default=None,
                        help="load config/paths from a previous run's manifest")


def _timestamp() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


def _make_manifest(command, cfg, query_dir, ref_dir, tolerance, t_e_max, threads, seed=None):
    return RunManifest(
        command=command,
        tool_version=__version__,
        timestamp=_timestamp(),
        config=cfg.to_dict(),
        query_dir=str(query_dir) if query_dir else None,
        ref_dir=str(ref_dir) if ref_dir else None,
        tolerance=tolerance,
        t_e_max=t_e_max,
        threads=threads,
        seed=seed,
    )


def _resolve_run_inputs(args):
    """Merge manifest (if any) with flags; flags win."""
    base_cfg = PipelineConfig()
    tolerance = 2
    query_dir = getattr(args, "query_dir", None)
    ref_dir = getattr(args, "ref_dir", None)
    if args.manifest:
        manifest = RunManifest.load(args.manifest)
        base_cfg = PipelineConfig.from_dict(manifest.config)
        tolerance = manifest.tolerance
        query_dir = query_dir or manifest.query_dir
        ref_dir = ref_dir or manifest.ref_dir
    cfg = _config_from_args(args, base_cfg)
    if args.tolerance is not None:
        tolerance = args.tolerance
    return cfg, query_dir, ref_dir, tolerance


def cmd_benchmark(args) -> int:
    cfg, query_dir, ref_dir, tolerance = _resolve_run_inputs(args)
    if not query_dir or not ref_dir:
        raise ConvseqError("benchmark needs QUERY_DIR and REF_DIR (or a manifest)")
    threads = _resolve_threads(args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    query_traverse = load_traverse(query_dir)
    ref_traverse = load_traverse(ref_dir)
    gt_path = Path(query_dir).parent / "ground_truth.csv"
    gt = load_ground_truth(
        gt_path if gt_path.exists() else None, len(query_traverse), tolerance
    )

    ref_descriptors = None
    if args.ref_cache:
        cache_path = Path(args.ref_cache)
        if cache_path.exists():
            ref_descriptors = load_descriptor_cache(cache_path, cfg)
            if len(ref_descriptors) != len(ref_traverse):
                raise DatasetError(
                    f"descriptor cache holds {len(ref_descriptors)} images, "
                    f"reference traverse has {len(ref_traverse)}"
                )
        else:
            ref_descriptors, _ = encode_reference_traverse(ref_traverse, cfg, threads)
            save_descriptor_cache(cache_path, ref_descriptors, cfg)

    run = run_benchmark(
        query_traverse, ref_traverse, cfg, gt, threads=threads,
        ref_descriptors=ref_descriptors,
    )

    manifest = _make_manifest(
        "benchmark", cfg, query_dir, ref_dir, tolerance, DEFAULT_T_E_MAX, threads
    )
    manifest.save(out / "manifest.json")
    with open(out / "report.json", "w") as fh:
        json.dump(run.report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_matches_csv(out / "matches.csv", run.records, run.judged)
    write_pr_csv(out / "pr_curve.csv", run.report.pr_points)
    write_decision_log(out / "seq_lengths.csv", run.decisions, run.matched_starts)
    if args.svg:
        (out / "pr_curve.svg").write_text(render_pr_svg(run.report.pr_points))

    print(
        f"benchmark: {run.report.n_matched}/{run.report.n_queries} queries matched, "
        f"accuracy {run.report.accuracy:.4f}, auc_pr {run.report.auc_pr:.4f}, "
        f"mean_k {run.report.mean_seq_len:.2f}"
    )
    return 0


def cmd_ablate(args) -> int:
    cfg, query_dir, ref_dir, tolerance = _resolve_run_inputs(args)
    if not query_dir or not ref_dir:
        raise ConvseqError("ablate needs QUERY_DIR and REF_DIR (or a manifest)")
    if not 1 <= args.k_min <= args.k_max:
        raise ConvseqError("need 1 <= k-min <= k-max")
    threads = _resolve_threads(args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    query_traverse = load_traverse(query_dir)
    ref_traverse = load_traverse(ref_dir)
    gt_path = Path(query_dir).parent / "ground_truth.csv"
    gt = load_ground_truth(
        gt_path if gt_path.exists() else None, len(query_traverse), tolerance
    )

    # Encode once and reuse descriptors plus the pair-score matrix per k.
    queries, q_times = encode_query_traverse(query_traverse, cfg, threads)
    refs, _ = encode_reference_traverse(ref_traverse, cfg, threads)
    pair_matrix = pairwise_scores(queries, refs, threads)
    if threads > 1:
        sample = Traverse(name=query_traverse.name, frames=query_traverse.frames[:9])
        t_e = time_encoding(sample, cfg)
    else:
        t_e = float(np.mean(q_times[1:])) if len(q_times) > 1 else float(q_times[0])

    rows = []
    for k in range(args.k_min, args.k_max + 1):
        if k > len(refs) or k > len(queries):
            print(f"warning: skipping k={k}, traverse too short", file=sys.stderr)
            continue
        cfg_k = cfg.with_fixed_k(k)
        results, decisions, _ = run_matching(queries, refs, cfg_k, pair_matrix)
        records = [
            MatchRecord(r.query_start, r.best_ref_start, r.best_score, d.final_length)
            for r, d in zip(results, decisions)
        ]
        judged = judge(records, gt)
        report = assemble_report(records, judged, len(queries), t_e)
        rows.append((k, report.accuracy, report.auc_pr, report.t_e_seq))

    with open(out / "ablation.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "accuracy", "auc_pr", "mean_t_e"])
        for k, acc, auc, te in rows:
            writer.writerow([k, repr(acc), repr(auc), repr(te)])
    manifest = _make_manifest(
        "ablate", cfg, query_dir, ref_dir, tolerance, DEFAULT_T_E_MAX, threads
    )
    manifest.save(out / "manifest.json")
    for k, acc, auc, _ in rows:
        print(f"k={k}: accuracy {acc:.4f}, auc_pr {auc:.4f}")
    return 0


def cmd_seqlens(args) -> int:
    cfg, query_dir, _, tolerance = _resolve_run_inputs(args)
    if not query_dir:
        raise ConvseqError("seqlens needs QUERY_DIR (or a manifest)")
    threads = _resolve_threads(args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    query_traverse = load_traverse(query_dir)
    queries, _ = encode_query_traverse(query_traverse, cfg, threads)

    decisions = []
    starts = []
    for start in range(len(queries)):
        decision = decide_sequence(queries, start, cfg)
        if decision.truncated:
            break
        decisions.append(decision)
        starts.append(start)

    write_decision_log(out / "seq_lengths.csv", decisions, starts)
    hist = Counter(d.final_length for d in decisions)
    with open(out / "seq_length_histogram.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["final_length", "count"])
        for length in sorted(hist):
            writer.writerow([length, hist[length]])
    manifest = _make_manifest(
        "seqlens", cfg, query_dir, None, tolerance, DEFAULT_T_E_MAX, threads
    )
    manifest.save(out / "manifest.json")

    print(f"seqlens: {len(decisions)} starts decided, histogram: {dict(sorted(hist.items()))}")
    return 0


def cmd_gen_synthetic(args) -> int:
    variation = VariationSpec(
        shift_px=args.shift, brightness_gain=args.gain, noise_level=args.noise
    )
    out = Path(args.out)
    q, r, _ = generate_synthetic_traverse(
        args.seed,
        args.frames,
        variation,
        out,
        frame_size=(args.frame_size, args.frame_size),
    )
    print(f"gen-synthetic: wrote {len(q)} query + {len(r)} reference frames to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convseq",
        description="Sequence-based visual place recognition benchmark harness",
    )
    parser.add_argument("--version", action="version", version=f"convseq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_bench = sub.add_parser("benchmark", help="run the full pipeline on a traverse pair")
    p_bench.add_argument("query_dir", nargs="?", default=None)
    p_bench.add_argument("ref_dir", nargs="?", default=None)
    _add_config_flags(p_bench)
    p_bench.add_argument("--svg", action="store_true", help="also render pr_curve.svg")
    p_bench.add_argument(
        "--ref-cache", default=None, dest="ref_cache",
        help="reference descriptor cache file, created when absent "
             "(float32 interchange precision)",
    )
    p_bench.set_defaults(func=cmd_benchmark)

    p_abl = sub.add_parser("ablate", help="fixed-sequence-length sweep")
    p_abl.add_argument("query_dir", nargs="?", default=None)
    p_abl.add_argument("ref_dir", nargs="?", default=None)
    p_abl.add_argument("--k-min", type=int, default=1, dest="k_min")
    p_abl.add_argument("--k-max", type=int, default=20, dest="k_max")
    _add_config_flags(p_abl)
    p_abl.set_defaults(func=cmd_ablate)

    p_seq = sub.add_parser("seqlens", help="sequence-length distribution of a query traverse")
    p_seq.add_argument("query_dir", nargs="?", default=None)
    _add_config_flags(p_seq)
    p_seq.set_defaults(func=cmd_seqlens)

    p_gen = sub.add_parser("gen-synthetic", help="write a synthetic traverse pair")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--frames", type=int, default=50)
    p_gen.add_argument("--shift", type=int, default=0, help="viewpoint shift in pixels")
    p_gen.add_argument("--gain", type=float, default=1.0, help="brightness gain")
    p_gen.add_argument("--noise", type=float, default=0.0, help="additive noise sigma")
    p_gen.add_argument("--frame-size", type=int, default=256, dest="frame_size")
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_gen_synthetic)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConvseqError as exc:
        print(f"error [{exc.category}]: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
