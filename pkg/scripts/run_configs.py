"""Run every config in configs/ and write CSVs plus summaries to results/."""

import argparse
from pathlib import Path

from sgdgrowth.harness.cli import main

ROOT = Path(__file__).resolve().parent.parent


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default=str(ROOT / "results"))
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for cfg in sorted((ROOT / "configs").glob("*.ini")):
        out = out_dir / (cfg.stem + ".csv")
        print(f"== {cfg.name} -> {out}")
        code = main(["run", "--config", str(cfg), "--out", str(out), "--workers", str(args.workers)])
        if code:
            raise SystemExit(code)
