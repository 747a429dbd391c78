"""Writers for JSON reports, CSV curves and SVG overlays."""
from __future__ import annotations

import csv
import io
import json
import os

import numpy as np

__all__ = ["dumps", "write_json", "curves_csv", "write_csv", "histogram_csv",
           "write_svg", "write_simulation"]


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, shortest round-trip floats, NaN as null."""
    return json.dumps(_plain(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def curves_csv(x, columns: dict) -> str:
    """CSV text with an ``x`` column followed by ``columns`` in insertion order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", *columns])
    cols = [np.asarray(v, dtype=float) for v in columns.values()]
    for i, xv in enumerate(np.asarray(x, dtype=float)):
        writer.writerow([repr(float(xv))] + [repr(float(c[i])) for c in cols])
    return buf.getvalue()


def write_csv(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def histogram_csv(edges, density) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["left", "right", "density"])
    for lo, hi, d in zip(edges[:-1], edges[1:], density):
        writer.writerow([repr(float(lo)), repr(float(hi)), repr(float(d))])
    return buf.getvalue()


def write_svg(path, grid, pdf_curves, histogram=None, title=""):
    """Histogram plus density curves, rendered with a fixed hash salt and no date."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "edgeworth", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        if histogram is not None:
            edges = np.asarray(histogram["edges"])
            ax.bar(edges[:-1], histogram["density"], width=np.diff(edges), align="edge",
                   color="0.85", edgecolor="0.6", linewidth=0.3, label="simulated")
        styles = {"normal": ("C0", "--"), "order1": ("C3", "-"), "order2": ("C2", ":")}
        for name, ys in pdf_curves.items():
            color, ls = styles.get(name, ("k", "-"))
            ax.plot(grid, ys, color=color, linestyle=ls, label=name)
        ax.set_xlabel("w")
        ax.set_ylabel("density")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def write_simulation(report, outdir, svg=True, stem="report"):
    """Write ``<stem>.json``, density/cdf/histogram CSVs and optionally an SVG."""
    os.makedirs(outdir, exist_ok=True)
    paths = {"json": os.path.join(outdir, f"{stem}.json")}
    write_json(paths["json"], report.to_json())
    paths["density"] = os.path.join(outdir, f"{stem}_density.csv")
    write_csv(paths["density"], curves_csv(report.grid, report.pdf_curves))
    paths["cdf"] = os.path.join(outdir, f"{stem}_cdf.csv")
    write_csv(paths["cdf"], curves_csv(report.grid, {**report.cdf_curves,
                                                     "empirical": report.ecdf}))
    paths["histogram"] = os.path.join(outdir, f"{stem}_histogram.csv")
    write_csv(paths["histogram"], histogram_csv(report.histogram["edges"],
                                                report.histogram["density"]))
    if svg:
        paths["svg"] = os.path.join(outdir, f"{stem}.svg")
        write_svg(paths["svg"], report.grid, report.pdf_curves, report.histogram,
                  report.config.get("label", ""))
    return paths
