#!/usr/bin/env python3
"""Render the CSVs produced by `greenran simulate` / `greenran trace`.

Usage:
  plot_results.py sweep  OUT_DIR [--save PREFIX]
  plot_results.py trace  TRACE_CSV [--save PREFIX]

`sweep` reads OUT_DIR/summary.csv and draws mean network power versus the
SINR target, one line per algorithm. `trace` reads a per-iteration trace
and draws the multiplier/residual path next to the iterate differences.
Figures are shown interactively unless --save is given, in which case they
are written to PREFIX.png.
"""

import argparse
import sys

import matplotlib.pyplot as plt
import pandas as pd


def plot_sweep(out_dir: str, save: str | None) -> None:
    df = pd.read_csv(f"{out_dir}/summary.csv")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for algo, group in df.groupby("algo"):
        group = group.sort_values("sinr_db")
        ax.errorbar(
            group["sinr_db"],
            group["mean_power_w"],
            yerr=group["std_power_w"],
            marker="o",
            capsize=3,
            label=algo,
        )
    ax.set_xlabel("target SINR (dB)")
    ax.set_ylabel("mean network power (W)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    finish(fig, save)


def plot_trace(trace_csv: str, save: str | None) -> None:
    df = pd.read_csv(trace_csv)
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    left.plot(df["t"], df["lambda"], marker="o", label="multiplier")
    left.plot(df["t"], df["residual"], marker="s", label="sphere residual")
    left.set_xlabel("outer iteration")
    left.set_yscale("symlog", linthresh=1e-6)
    left.grid(True, alpha=0.3)
    left.legend()
    right.plot(df["t"], df["tol1"], marker="o", label="log10 |dz|")
    right.plot(df["t"], df["tol2"], marker="s", label="log10 |dv|")
    right.set_xlabel("outer iteration")
    right.set_ylabel("log10 iterate difference")
    right.grid(True, alpha=0.3)
    right.legend()
    fig.tight_layout()
    finish(fig, save)


def finish(fig, save: str | None) -> None:
    if save:
        fig.savefig(f"{save}.png", dpi=150)
        print(f"wrote {save}.png")
    else:
        plt.show()


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    sub = parser.add_subparsers(dest="mode", required=True)
    sweep = sub.add_parser("sweep", help="power vs SINR target from summary.csv")
    sweep.add_argument("out_dir")
    sweep.add_argument("--save", default=None)
    trace = sub.add_parser("trace", help="convergence trace from a trace CSV")
    trace.add_argument("trace_csv")
    trace.add_argument("--save", default=None)
    args = parser.parse_args()

    if args.mode == "sweep":
        plot_sweep(args.out_dir, args.save)
    else:
        plot_trace(args.trace_csv, args.save)
    return 0


if __name__ == "__main__":
    sys.exit(main())
