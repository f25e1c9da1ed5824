#!/usr/bin/env python3
"""Fixed-sequence-length ablation on a synthetic pair.

Sweeps k over a range with the dynamic sequencer pinned, printing
accuracy and AUC-PR per k. Encoding and the pair-score matrix are shared
across all k values, so the sweep costs little more than one benchmark.
"""

import argparse
import csv
import tempfile
from pathlib import Path

from convseq.cli import main as convseq


def run(argv):
    return convseq([str(a) for a in argv])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--frames", type=int, default=60)
    ap.add_argument("--frame-size", type=int, default=256)
    ap.add_argument("--shift", type=int, default=16)
    ap.add_argument("--gain", type=float, default=1.5)
    ap.add_argument("--noise", type=float, default=10.0)
    ap.add_argument("--k-min", type=int, default=1)
    ap.add_argument("--k-max", type=int, default=10)
    ap.add_argument("--threads", type=int, default=4)
    ap.add_argument("--workdir", default=None)
    args = ap.parse_args()

    workdir = Path(args.workdir) if args.workdir else Path(tempfile.mkdtemp(prefix="convseq_"))
    ds = workdir / "dataset"
    out = workdir / "ablation"
    for argv in (
        ["gen-synthetic", "--seed", args.seed, "--frames", args.frames,
         "--frame-size", args.frame_size, "--shift", args.shift,
         "--gain", args.gain, "--noise", args.noise, "--out", ds],
        ["ablate", ds / "query", ds / "reference",
         "--image-size", args.frame_size, "--k-min", args.k_min,
         "--k-max", args.k_max, "--threads", args.threads, "--out", out],
    ):
        rc = run(argv)
        if rc != 0:
            raise SystemExit(rc)

    with open(out / "ablation.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    print(f"\nartifacts in {workdir}")
    print(f"{'k':>3}  {'accuracy':>9}  {'auc_pr':>8}")
    for row in rows:
        print(f"{row['k']:>3}  {float(row['accuracy']):>9.4f}  {float(row['auc_pr']):>8.4f}")


if __name__ == "__main__":
    main()
