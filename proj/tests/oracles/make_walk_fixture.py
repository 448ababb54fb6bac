"""Writes tests/fixtures/walk1000.csv: a 1000-step planar Gaussian random walk (unregulated)."""
import csv
import pathlib

import numpy as np

rng = np.random.default_rng(20240521)
steps = rng.normal(0.0, 0.5, size=(1000, 2))
start = np.array([2.0, 2.0])
path = np.vstack([start, start + np.cumsum(steps, axis=0)])
out = pathlib.Path(__file__).resolve().parents[1] / "fixtures" / "walk1000.csv"
with out.open("w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["time", "q_bid", "q_ask"])
    for i, (b, a) in enumerate(path):
        w.writerow([f"{i * 0.01:.2f}", repr(float(b)), repr(float(a))])
