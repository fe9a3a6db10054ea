"""Write CSV, JSON and SVG for every bundled figure preset into one directory."""
import argparse
import time
from pathlib import Path

from omit_lab.emit import emit_plot, emit_table
from omit_lab.sweep import FIGURE_IDS, SweepGrid, figure_preset, find_features, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("figures"))
    ap.add_argument("--overwrite", action="store_true")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for fig_id in FIGURE_IDS:
        start = time.perf_counter()
        result = run_scenario(figure_preset(fig_id))
        for fmt in ("csv", "json"):
            emit_table(result, fmt, args.out / f"{fig_id}.{fmt}", overwrite=args.overwrite)
        emit_plot(result, args.out / f"{fig_id}.svg", overwrite=args.overwrite)
        took = time.perf_counter() - start
        if isinstance(result, SweepGrid):
            print(f"{fig_id}: {len(result.second_axis.values)} x {len(result.axis)} grid  ({took:.2f}s)")
        else:
            minima = ", ".join(f"{x:+.4f}" for x in find_features(result).positions)
            print(f"{fig_id}: minima at [{minima}]  ({took:.2f}s)")


if __name__ == "__main__":
    main()
