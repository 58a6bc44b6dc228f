#!/usr/bin/env python3
"""Plots experiment CSVs written by the entropica CLI (optional; needs matplotlib)."""

import argparse
import csv
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def number(value):
    return float(value) if value not in ("", None) else float("nan")


def plot(path, out):
    rows = read(path)
    columns = rows[0].keys() if rows else []
    fig, ax = plt.subplots(figsize=(6, 4))
    if "entropy" in columns or "deficiency" in columns:
        key = "entropy" if "entropy" in columns else "deficiency"
        ax.plot([number(r["t"]) for r in rows], [number(r[key]) for r in rows], lw=0.8)
        ax.set_xlabel("t")
        ax.set_ylabel(key)
    elif "M_n" in columns:
        n = [number(r["n"]) for r in rows]
        ax.plot(n, [number(r["M_n"]) for r in rows], "o-", label="M(n)")
        ax.plot(n, [number(r["M_plus_K"]) for r in rows], "s--", label="M(n) + K(n)")
        ax.set_xlabel("n")
        ax.legend()
    else:
        n = [number(r["n"]) for r in rows]
        for key in [k for k in columns if k.startswith("fraction") or k.endswith("_fraction") or k == "reference"]:
            values = [number(r[key]) for r in rows]
            ax.semilogy(n, [v if v > 0 else float("nan") for v in values], "o-", label=key)
        ax.set_xlabel("n")
        ax.legend()
    ax.set_title(pathlib.Path(path).name)
    fig.tight_layout()
    fig.savefig(out, dpi=120)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", nargs="+")
    parser.add_argument("--outdir", default=".")
    args = parser.parse_args()
    for path in args.csv:
        out = pathlib.Path(args.outdir) / (pathlib.Path(path).stem + ".png")
        plot(path, out)
        print(out)


if __name__ == "__main__":
    main()
