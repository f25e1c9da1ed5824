#!/usr/bin/env python3
"""Sequence-length behaviour across entropy regimes.

Builds three synthetic query traverses (textured, dim, near-black),
runs the sequencer over each, and prints the final-length histograms.
Low-information traverses should push lengths toward max_k.
"""

import argparse
import csv
import tempfile
from pathlib import Path

import numpy as np

from convseq.cli import main as convseq
from convseq.datasetio import VariationSpec, synthesize_frames, write_image


def run(argv):
    return convseq([str(a) for a in argv])


def build_traverses(workdir: Path, seed: int, frames: int, size: int):
    textured, _ = synthesize_frames(seed, frames, VariationSpec(), frame_size=(size, size))
    variants = {
        "textured": textured,
        "dim": [(f * 0.12).astype(np.uint8) for f in textured],
        "near_black": [np.full((size, size), 2, dtype=np.uint8) for _ in textured],
    }
    dirs = {}
    for name, imgs in variants.items():
        d = workdir / name / "query"
        d.mkdir(parents=True)
        for i, img in enumerate(imgs):
            write_image(d / f"frame_{i:05d}.png", img)
        dirs[name] = d
    return dirs


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--frames", type=int, default=50)
    ap.add_argument("--frame-size", type=int, default=256)
    ap.add_argument("--max-k", type=int, default=25)
    ap.add_argument("--workdir", default=None)
    args = ap.parse_args()

    workdir = Path(args.workdir) if args.workdir else Path(tempfile.mkdtemp(prefix="convseq_"))
    dirs = build_traverses(workdir, args.seed, args.frames, args.frame_size)

    print(f"artifacts in {workdir}\n")
    for name, qdir in dirs.items():
        out = workdir / f"seqlens_{name}"
        rc = run(["seqlens", qdir, "--image-size", args.frame_size,
                  "--max-k-info-gain", min(15, args.max_k),
                  "--max-k", args.max_k, "--out", out])
        if rc != 0:
            raise SystemExit(rc)
        with open(out / "seq_length_histogram.csv", newline="") as fh:
            hist = {int(r["final_length"]): int(r["count"]) for r in csv.DictReader(fh)}
        print(f"{name:>10}: {hist}")


if __name__ == "__main__":
    main()
