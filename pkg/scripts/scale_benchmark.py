#!/usr/bin/env python3
"""Times the full pipeline, stage by stage, on a synthetic benchmark corpus.

Synthesizes a seeded interaction stream at the target size, writes it out in
the Q&A log format, then drives the CLI stages in-process and prints wall
time per stage.  Defaults match the headline budget: 80K actors, 260K
instances, 55 snapshots, sampled betweenness with 256 pivots, under ten
minutes end to end on an 8-core box.

Usage:
    python scripts/scale_benchmark.py
    python scripts/scale_benchmark.py --actors 20000 --instances 65000 --keep
"""

import argparse
import shutil
import sys
import tempfile
import time
from pathlib import Path

from socialties.cli import main as cli
from socialties.synth import scale_network

BUDGET_S = 600.0


def write_qa_corpus(net, path):
    # one q-line per instance; minute-resolution epochs, zero-padded names
    with open(path, "w") as fh:
        for e in net.instances():
            toks = " ".join(f"w{a:06d}" for a in sorted(e.attrs))
            fh.write(f"{e.snapshot * 60}\ta{e.u:05d}\ta{e.v:05d}\tq\t{toks}\n")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--actors", type=int, default=80_000)
    ap.add_argument("--instances", type=int, default=260_000)
    ap.add_argument("--snapshots", type=int, default=55)
    ap.add_argument("--pivots", type=int, default=256)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workdir", default=None,
                    help="default: a fresh temp directory")
    ap.add_argument("--keep", action="store_true",
                    help="leave the work directory behind")
    args = ap.parse_args(argv)

    work = Path(args.workdir) if args.workdir else Path(tempfile.mkdtemp(prefix="stbench-"))
    work.mkdir(parents=True, exist_ok=True)
    corpus = work / "bench.tsv"
    out = work / "run"

    print(f">>> synthesizing {args.actors} actors / {args.instances} instances "
          f"/ t={args.snapshots} (seed {args.seed})")
    t0 = time.monotonic()
    net = scale_network(args.actors, args.instances, t=args.snapshots,
                        seed=args.seed)
    write_qa_corpus(net, corpus)
    print(f"    synth+write: {time.monotonic() - t0:.1f}s "
          f"({corpus.stat().st_size / 1e6:.0f} MB)")

    stages = [
        ("ingest", ["ingest", "--schema", "qa", "--in", str(corpus),
                    "--out", str(out)]),
        ("classify", ["classify", "--net", str(out)]),
        ("metrics", ["metrics", "--net", str(out),
                     "--betweenness", f"sampled:{args.pivots}"]),
        ("validate", ["validate", "--run", str(out)]),
        ("export", ["export", "--run", str(out), "--format", "tsv"]),
    ]
    total = 0.0
    for name, argv_stage in stages:
        t1 = time.monotonic()
        rc = cli(argv_stage)
        dt = time.monotonic() - t1
        total += dt
        print(f"    {name:<9} {dt:7.1f}s" + ("" if rc == 0 else f"  rc={rc}"))
        if rc != 0:
            print(f">>> stage {name} failed, aborting")
            return rc
    elapsed = time.monotonic() - t0
    verdict = "within" if elapsed < BUDGET_S else "OVER"
    print(f">>> pipeline {total:.1f}s, end to end {elapsed:.1f}s "
          f"({verdict} the {BUDGET_S:.0f}s budget)")

    if args.keep:
        print(f">>> artifacts kept in {work}")
    elif args.workdir is None:
        shutil.rmtree(work)
    return 0 if elapsed < BUDGET_S else 1


if __name__ == "__main__":
    sys.exit(main())
