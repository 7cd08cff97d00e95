"""CSV and SVG renderings of a sweep: metric-vs-r_s lines and smoothed learning curves."""

from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path

import numpy as np

from .harness import episode_csv_name, read_csv

METRICS = {
    "fig2_sint": ("final_avg_sint_m2", "mean S_int (m$^2$)"),
    "fig2_energy": ("final_avg_energy_J", "mean energy per slot (J)"),
    "fig3_reward": ("final_avg_reward", "average reward"),
}


def moving_average(values, window: int) -> np.ndarray:
    """Trailing mean over at most ``window`` points (shorter at the start of the series)."""
    v = np.asarray(values, dtype=float)
    if not len(v):
        return v
    # sums of offsets from the first value keep constant stretches exact
    c = np.concatenate([[0.0], np.cumsum(v - v[0])])
    idx = np.arange(1, len(v) + 1)
    lo = np.maximum(idx - window, 0)
    return v[0] + (c[idx] - c[lo]) / (idx - lo)


def seed_means(rows, column: str) -> dict[str, dict[float, float]]:
    """``{agent: {r_s: mean over seeds}}``, ignoring failed (NaN) cells."""
    acc = defaultdict(lambda: defaultdict(list))
    for r in rows:
        val = float(r[column])
        if not math.isnan(val):
            acc[r["agent"]][float(r["rs_m"])].append(val)
    return {a: {rs: float(np.mean(v)) for rs, v in sorted(d.items())} for a, d in acc.items()}


def _write_series(path: Path, x_name: str, xs, series: dict[str, dict]) -> None:
    agents = sorted(series)
    with open(path, "w") as fh:
        fh.write(",".join([x_name, *agents]) + "\n")
        for x in xs:
            vals = [series[a].get(x, float("nan")) for a in agents]
            fh.write(",".join([f"{x:g}", *(repr(float(v)) for v in vals)]) + "\n")


def _svg(path: Path, xs_by_agent: dict, ys_by_agent: dict, xlabel: str, ylabel: str, title: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "wsn-track"
    fig, ax = plt.subplots(figsize=(6, 4))
    for agent in sorted(xs_by_agent):
        ax.plot(xs_by_agent[agent], ys_by_agent[agent], marker="o" if len(xs_by_agent[agent]) < 20 else None,
                label=agent)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_plot_data(summary_path, out_dir, smoothing: int = 50, window: int = 100) -> list[Path]:
    """Write metric-vs-r_s and learning-curve files (CSV + SVG) for a sweep summary.

    Learning curves need the ``episodes/`` directory written next to the
    summary; they are skipped when it is absent.
    """
    summary_path = Path(summary_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _, rows = read_csv(summary_path)
    if not rows:
        raise ValueError(f"{summary_path} holds no summary rows")
    written: list[Path] = []
    rs_values = sorted({float(r["rs_m"]) for r in rows})
    for stem, (column, label) in METRICS.items():
        series = seed_means(rows, column)
        _write_series(out_dir / f"{stem}.csv", "rs_m", rs_values, series)
        _svg(out_dir / f"{stem}.svg", {a: list(s) for a, s in series.items()},
             {a: list(s.values()) for a, s in series.items()}, "r_s (m)", label, f"{label} vs r_s")
        written += [out_dir / f"{stem}.csv", out_dir / f"{stem}.svg"]

    notes = []
    episodes_dir = summary_path.parent / "episodes"
    if episodes_dir.is_dir():
        curves = defaultdict(list)
        for r in rows:
            f = episodes_dir / episode_csv_name(r["agent"], float(r["rs_m"]), int(r["seed"]))
            if f.exists():
                _, ep_rows = read_csv(f)
                curves[(r["agent"], float(r["rs_m"]))].append([float(e["avg_reward"]) for e in ep_rows])
        with open(out_dir / "learning_curves.csv", "w") as fh:
            fh.write("agent,rs_m,episode,avg_reward_smoothed\n")
            xs, ys = {}, {}
            for (agent, rs), runs in sorted(curves.items()):
                n = min(len(run) for run in runs)
                if n < window:
                    notes.append(f"{agent} r_s={rs:g}: only {n} episodes, final window uses all of them")
                mean = np.mean([run[:n] for run in runs], axis=0)
                smooth = moving_average(mean, smoothing)
                for ep, v in enumerate(smooth):
                    fh.write(f"{agent},{rs:g},{ep},{float(v)!r}\n")
                if rs == rs_values[-1]:
                    xs[agent], ys[agent] = list(range(n)), list(smooth)
        written.append(out_dir / "learning_curves.csv")
        if xs:
            _svg(out_dir / "learning_curves.svg", xs, ys, "episode", f"average reward ({smoothing}-episode MA)",
                 f"learning curves at r_s = {rs_values[-1]:g} m")
            written.append(out_dir / "learning_curves.svg")
    else:
        notes.append("no episodes/ directory next to the summary; learning curves skipped")
    (out_dir / "metadata.txt").write_text("".join(n + "\n" for n in notes))
    written.append(out_dir / "metadata.txt")
    return written
