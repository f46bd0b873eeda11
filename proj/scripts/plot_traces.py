"""Plot cost against iterations and against simulated time for CSV traces.

    python scripts/plot_traces.py l1_traces/*.csv -o l1.png
"""

import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_trace(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return {
        "iteration": [int(r["iteration"]) for r in rows],
        "cost": [float(r["cost"]) for r in rows],
        "elapsed_time": [float(r["elapsed_time"]) for r in rows],
        "method": rows[0]["method"] if rows else "?",
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("traces", nargs="+", type=Path)
    parser.add_argument("-o", "--output", type=Path, default=Path("traces.png"))
    parser.add_argument("--log", action="store_true", help="log-scale cost axis")
    args = parser.parse_args()

    fig, (by_iter, by_time) = plt.subplots(1, 2, figsize=(11, 4))
    colors = {}
    for path in args.traces:
        t = read_trace(path)
        color = colors.setdefault(t["method"], f"C{len(colors)}")
        label = t["method"] if t["method"] not in {l.get_label() for l in by_iter.lines} else None
        by_iter.plot(t["iteration"], t["cost"], color=color, alpha=0.7, lw=1, label=label)
        by_time.plot(t["elapsed_time"], t["cost"], color=color, alpha=0.7, lw=1)
    for ax, xlabel in ((by_iter, "iteration"), (by_time, "simulated time (s)")):
        ax.set_xlabel(xlabel)
        ax.set_ylabel("cost")
        if args.log:
            ax.set_yscale("log")
    by_iter.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)
    print(f"saved {args.output}")


if __name__ == "__main__":
    main()
