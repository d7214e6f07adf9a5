"""Figure builders over the harness CSV files.

Four figure kinds, each consuming one of the CSV formats written by the
``bitemper run`` command:

- ``ladder``       (hits.csv)  percentage of seeds that have found every
                               mode, as a step function of the chosen clock,
                               one curve per algorithm;
- ``tvd``          (tvd.csv)   total-variation distance against the
                               checkpoint index, mean across seeds with a
                               min/max band when there is more than one seed;
- ``gamma_box``    (gamma.csv) boxplot of the final bounding constants,
                               one box per replica;
- ``iter_compare`` (runs.csv)  per-algorithm cost to finish a run in the
                               chosen clock, shown as per-seed points plus
                               the median.

Rendering is deterministic: a fixed style, no randomness, and stripped PNG
metadata, so rendering the same CSVs twice yields byte-identical images.
"""
from __future__ import annotations

import csv

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

KINDS = ("ladder", "tvd", "gamma_box", "iter_compare")
CLOCKS = ("sweeps", "evaluations", "seconds")

REQUIRED_COLUMNS = {
    "ladder": ("seed", "algorithm", "mode_index", "round", "evals",
               "seconds"),
    "tvd": ("seed", "checkpoint", "value"),
    "gamma_box": ("seed", "replica", "gamma_final"),
    "iter_compare": ("seed", "algorithm", "rounds", "total_evals",
                     "seconds"),
}

# clock flag -> CSV column, per figure kind that supports a clock choice
CLOCK_COLUMNS = {
    "ladder": {"sweeps": "round", "evaluations": "evals",
               "seconds": "seconds"},
    "iter_compare": {"sweeps": "rounds", "evaluations": "total_evals",
                     "seconds": "seconds"},
}

CLOCK_LABELS = {"sweeps": "sweeps", "evaluations": "target evaluations",
                "seconds": "wall-clock seconds"}

_STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.6,
    "svg.hashsalt": "btplots",
}


class PlotError(ValueError):
    """Raised for malformed or empty inputs; the CLI maps it to exit 2."""


def read_rows(paths, kind):
    """Read and concatenate the data rows of the given CSV files.

    Every file must carry the full header for ``kind``; a missing column or
    an input with no data rows raises :class:`PlotError`.
    """
    rows = []
    for path in paths:
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            header = reader.fieldnames or []
            for col in REQUIRED_COLUMNS[kind]:
                if col not in header:
                    raise PlotError(f"{path}: missing column '{col}'")
            rows.extend(reader)
    if not rows:
        raise PlotError("no data rows in input CSV(s): " + ", ".join(paths))
    return rows


def _number(row, col):
    raw = row[col]
    if raw is None or raw == "":
        raise PlotError(f"empty value in column '{col}'")
    try:
        return float(raw)
    except ValueError:
        raise PlotError(f"non-numeric value {raw!r} in column '{col}'")


def compute_ladder(rows, clock_col):
    """Per-algorithm completion step function.

    A seed is complete once it has a hit row for every mode index present
    in the data for that algorithm.  Returns ``{algorithm: (x, pct)}`` where
    ``x`` holds the sorted completion clocks of the complete seeds and
    ``pct`` the cumulative percentage of that algorithm's seeds, so the
    curve is nondecreasing and ends at <= 100.
    """
    n_modes = 1 + max(int(_number(r, "mode_index")) for r in rows)
    by_alg: dict[str, dict[str, dict[int, float]]] = {}
    for r in rows:
        seed_hits = by_alg.setdefault(r["algorithm"], {}).setdefault(
            r["seed"], {})
        mode = int(_number(r, "mode_index"))
        clock = _number(r, clock_col)
        seed_hits[mode] = min(clock, seed_hits.get(mode, clock))
    curves = {}
    for alg, seeds in sorted(by_alg.items()):
        done = sorted(max(hits.values()) for hits in seeds.values()
                      if len(hits) == n_modes)
        x = np.asarray(done, dtype=float)
        pct = 100.0 * np.arange(1, x.size + 1) / len(seeds)
        curves[alg] = (x, pct)
    return curves


def _render_ladder(ax, rows, clock):
    col = CLOCK_COLUMNS["ladder"][clock]
    for alg, (x, pct) in compute_ladder(rows, col).items():
        if x.size == 0:
            continue
        ax.step(np.concatenate([[x[0]], x]), np.concatenate([[0.0], pct]),
                where="post", label=alg)
    ax.set_xlabel(CLOCK_LABELS[clock])
    ax.set_ylabel("% of seeds with all modes found")
    ax.set_ylim(0, 105)
    ax.legend(loc="lower right")


def _render_tvd(ax, rows, clock):
    by_seed: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        by_seed.setdefault(r["seed"], []).append(
            (_number(r, "checkpoint"), _number(r, "value")))
    checkpoints = sorted({c for pts in by_seed.values() for c, _ in pts})
    grid = np.asarray(checkpoints)
    series = []
    for pts in by_seed.values():
        pts.sort()
        series.append(np.interp(grid, [c for c, _ in pts],
                                [v for _, v in pts]))
    stacked = np.vstack(series)
    mean = stacked.mean(axis=0)
    if stacked.shape[0] > 1:
        ax.fill_between(grid, stacked.min(axis=0), stacked.max(axis=0),
                        alpha=0.25, label="seed range")
        ax.plot(grid, mean, label=f"mean of {stacked.shape[0]} seeds")
        ax.legend(loc="upper right")
    else:
        ax.plot(grid, mean)
    ax.set_xlabel("checkpoint")
    ax.set_ylabel("total variation distance")
    ax.set_ylim(bottom=0)


def _render_gamma_box(ax, rows, clock):
    by_replica: dict[int, list[float]] = {}
    for r in rows:
        by_replica.setdefault(int(_number(r, "replica")), []).append(
            _number(r, "gamma_final"))
    replicas = sorted(by_replica)
    ax.boxplot([by_replica[i] for i in replicas],
               tick_labels=[str(i) for i in replicas])
    ax.set_xlabel("replica")
    ax.set_ylabel("final bounding constant")


def _render_iter_compare(ax, rows, clock):
    col = CLOCK_COLUMNS["iter_compare"][clock]
    by_alg: dict[str, list[float]] = {}
    for r in rows:
        by_alg.setdefault(r["algorithm"], []).append(_number(r, col))
    algs = sorted(by_alg)
    for pos, alg in enumerate(algs):
        vals = by_alg[alg]
        ax.plot([pos] * len(vals), vals, "o", alpha=0.5, markersize=4)
        ax.plot([pos - 0.25, pos + 0.25], [np.median(vals)] * 2,
                color="black")
    ax.set_xticks(range(len(algs)), algs)
    ax.set_xlim(-0.5, len(algs) - 0.5)
    ax.set_ylabel(CLOCK_LABELS[clock])
    ax.set_title("per-seed cost (dots) and median (bar)")


_RENDERERS = {
    "ladder": _render_ladder,
    "tvd": _render_tvd,
    "gamma_box": _render_gamma_box,
    "iter_compare": _render_iter_compare,
}


def render(kind, inputs, out, clock="evaluations"):
    """Render one figure of the given kind to ``out``.

    ``inputs`` is a sequence of CSV paths in the matching harness format
    (rows from all files are pooled).  Raises :class:`PlotError` on missing
    columns, empty inputs, or unusable values.
    """
    if kind not in KINDS:
        raise PlotError(f"unknown figure kind '{kind}'")
    if clock not in CLOCKS:
        raise PlotError(f"unknown clock '{clock}'")
    rows = read_rows(inputs, kind)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        try:
            _RENDERERS[kind](ax, rows, clock)
            fig.savefig(out, metadata={"Software": "btplots"})
        finally:
            plt.close(fig)
    return out
