#!/usr/bin/env python3
"""Plot the CSVs written by `gavc figure`.

    gavc figure dbc --out dbc.csv
    gavc figure dpc --out dpc.csv
    gavc figure mimo221 --out mimo221.csv
    python scripts/plot_figures.py dbc.csv dpc.csv mimo221.csv --outdir plots

The figure kind is taken from the CSV header, so file names do not matter.
"""

import argparse
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def plot_dbc(df, ax):
    if df.empty:
        ax.text(0.5, 0.5, "empty region (lambda >= gamma)", ha="center", transform=ax.transAxes)
    else:
        b = df[df.segment == "boundary"]
        ts = df[df.segment == "time_sharing"]
        ax.plot(b.r1_bits, b.r2_bits, label="power split")
        ax.plot(ts.r1_bits, ts.r2_bits, "--", label="time sharing")
        ax.legend()
    ax.set_xlabel("R1 (bits)")
    ax.set_ylabel("R2 (bits)")
    ax.set_title("Degraded broadcast region")


def plot_dpc(df, ax):
    ax.plot(df.gamma, df.dpc_bits, label="dirty paper")
    ax.plot(df.gamma, df.outer_bound_bits, "--", label="outer bound")
    ax.plot(df.gamma, df.no_interference_bits, ":", label="no interference")
    ax.set_xlabel("gamma")
    ax.set_ylabel("rate (bits)")
    ax.set_title("Dirty-paper coding under jamming")
    ax.legend()


def plot_mimo221(df, ax):
    ax.plot(df["lambda"], df.r_wfill_bits, label="waterfilling")
    ax.plot(df["lambda"], df.theorem_bits, label="max-min")
    ax.plot(df["lambda"], df.upper_bound_bits, "--", label="upper bound")
    ax.set_xlabel("lambda")
    ax.set_ylabel("rate (bits)")
    ax.set_title("2x2 MIMO, rank-one jammer")
    ax.legend()


KINDS = {
    "segment": ("dbc", plot_dbc),
    "costa_margin": ("dpc", plot_dpc),
    "theorem_bits": ("mimo221", plot_mimo221),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("csv", nargs="+", type=pathlib.Path)
    ap.add_argument("--outdir", type=pathlib.Path, default=pathlib.Path("."))
    ap.add_argument("--ext", default="png")
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)
    for path in args.csv:
        df = pd.read_csv(path)
        kind = next((k for col, k in KINDS.items() if col in df.columns), None)
        if kind is None:
            raise SystemExit(f"{path}: unrecognized columns {list(df.columns)}")
        name, plot = kind
        fig, ax = plt.subplots(figsize=(6, 4))
        plot(df, ax)
        fig.tight_layout()
        target = args.outdir / f"{name}.{args.ext}"
        fig.savefig(target, dpi=120)
        plt.close(fig)
        print(target)


if __name__ == "__main__":
    main()
