"""Report output: a matplotlib figure and a delimited summary per render.

The PPM plus JSON sidecar stay the canonical artifacts; the report path
adds a PNG (rendered through the Agg backend) and a CSV with per-class
pixel counts so results can be skimmed without an image viewer.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

import numpy as np

from .grid import Raster


def write_figure(path, rgb: np.ndarray, title: str, extent=None):
    fig, ax = plt.subplots(figsize=(6, 6), dpi=150)
    ax.imshow(rgb, extent=extent, origin="upper", interpolation="nearest")
    ax.set_title(title)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def write_class_csv(path, raster: Raster):
    counts = raster.class_counts()
    total = raster.width * raster.height
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class_code", "class_name", "pixel_count", "fraction"])
        for code in sorted(counts):
            name = raster.class_names.get(code, f"class_{code}")
            writer.writerow([code, name, counts[code], counts[code] / total])
    return path


def write_report(outdir, stem, job, raster: Raster, rgb: np.ndarray):
    os.makedirs(outdir, exist_ok=True)
    g = job.grid
    half_w = g.width / 2.0
    half_h = g.height / 2.0
    extent = (
        g.center.real - half_w,
        g.center.real + half_w,
        g.center.imag - half_h,
        g.center.imag + half_h,
    )
    png = write_figure(os.path.join(outdir, stem + ".png"), rgb, job.kind, extent)
    csv_path = write_class_csv(os.path.join(outdir, stem + ".csv"), raster)
    return png, csv_path
