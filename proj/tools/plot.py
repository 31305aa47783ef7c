#!/usr/bin/env python3
"""Quick figures from a run directory: learning curve, policy snapshots, running-mean returns."""
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main(run_dir):
    run = Path(run_dir)
    for name, x in (("reinforce_learning.csv", "step"), ("td3_learning.csv", "episode")):
        if (run / name).exists():
            df = pd.read_csv(run / name)
            fig, ax = plt.subplots()
            ax.semilogy(df[x], df["l2_error"])
            ax.set_xlabel(x)
            ax.set_ylabel("L2 error")
            fig.savefig(run / "l2_error.png", dpi=120)

    snaps = run / "policy_snapshots.csv"
    if snaps.exists():
        df = pd.read_csv(snaps)
        key = df.columns[0]
        fig, ax = plt.subplots()
        last = df[df[key] == df[key].max()]
        ax.plot(last["s"], last["hjb_action"], "k--", label="HJB")
        for k in sorted(df[key].unique())[:: max(1, df[key].nunique() // 5)]:
            part = df[df[key] == k]
            ax.plot(part["s"], part["action"], label=f"{key} {k}")
        ax.set_xlabel("s")
        ax.set_ylabel("action")
        ax.legend()
        fig.savefig(run / "policy_snapshots.png", dpi=120)

    episodes = run / "td3_episodes.csv"
    if episodes.exists():
        df = pd.read_csv(episodes)
        fig, ax = plt.subplots()
        ax.plot(df["episode"], df["return"], alpha=0.3)
        ax.plot(df["episode"], df["running_mean_return"])
        ax.set_xlabel("episode")
        ax.set_ylabel("return")
        fig.savefig(run / "returns.png", dpi=120)

    table = run / "advantage_table.csv"
    if table.exists():
        df = pd.read_csv(table)
        fig, axes = plt.subplots(1, 2, figsize=(10, 4))
        for ax, col in zip(axes, ("q_value", "advantage")):
            grid = df.pivot(index="a", columns="s", values=col)
            im = ax.imshow(grid.values, origin="lower", aspect="auto",
                           extent=[grid.columns.min(), grid.columns.max(), grid.index.min(), grid.index.max()])
            ax.set_title(col)
            ax.set_xlabel("s")
            ax.set_ylabel("a")
            fig.colorbar(im, ax=ax)
        greedy = df.groupby("s")["greedy_action"].first()
        axes[1].plot(greedy.index, greedy.values, "w.")
        fig.savefig(run / "advantage.png", dpi=120)


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit("usage: plot.py <run_dir>")
    main(sys.argv[1])
