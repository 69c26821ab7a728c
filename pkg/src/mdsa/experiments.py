"""Monte Carlo experiment harness: sweeps, comparison tables, CSV, plots.

Every trial gets its own seed derived from (base_seed, ratio, trial), so
adding ratios or trials never perturbs existing results, and sweeps are
reproducible point by point.  CSV renders floats with ``str`` (shortest
round-trip form), which makes emitted files byte-stable and lets the
parsers recover values exactly.
"""

from __future__ import annotations

import csv
import io
import random
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .dsa1 import dsa1_disseminate, dsa1_recover
from .engine import (
    ConfigError,
    ExperimentError,
    SimConfig,
    measure_recovery,
    run_mdsa,
    sample_query_ids,
)
from .protocol import ForwardPolicy
from .seeding import derive_seed
from .topology import generate_connected

__all__ = [
    "ALGORITHMS",
    "PAPER_FIG_SIZES",
    "SweepPoint",
    "SweepCurve",
    "ComparisonRow",
    "ComparisonTable",
    "CURVE_HEADER",
    "TABLE_HEADER",
    "ratio_grid",
    "sweep",
    "table1",
    "paper_fig_curves",
    "curves_csv_text",
    "table_csv_text",
    "curves_from_csv",
    "table_from_csv",
    "emit_csv",
    "emit_plot",
]

ALGORITHMS = ("mdsa", "dsa1")
PAPER_FIG_SIZES = (50, 100, 150, 200, 400, 600)

CURVE_HEADER = "algorithm,n,buffer,query_ratio,mean,stddev,trials"
TABLE_HEADER = "algorithm,n,M,data_messages,percent_unused"


@dataclass(frozen=True)
class SweepPoint:
    query_ratio: float
    mean: float
    stddev: float
    trials: int


@dataclass
class SweepCurve:
    """Recovery percentage vs query ratio for one algorithm and size."""

    algorithm: str
    n: int
    buffer: int
    points: list[SweepPoint] = field(default_factory=list)


@dataclass(frozen=True)
class ComparisonRow:
    algorithm: str
    n: int
    m: int
    data_messages: int
    percent_unused: float


@dataclass
class ComparisonTable:
    """Side-by-side message and buffer figures per buffer size M."""

    n: int
    rows: list[ComparisonRow] = field(default_factory=list)


def ratio_grid(step: float) -> list[float]:
    """Query ratios step, 2*step, ... up to 1.0."""
    if not 0.0 < step <= 1.0:
        raise ConfigError(f"step must be in (0, 1], got {step!r}")
    ratios = []
    i = 1
    while True:
        # Rounding keeps the grid on clean decimals (0.1 * 3 is not 0.3
        # in binary floating point).
        ratio = round(i * step, 10)
        if ratio > 1.0 + 1e-9:
            break
        ratios.append(min(ratio, 1.0))
        i += 1
    return ratios


def _ratio_key(ratio: float) -> int:
    # Integer key keeps seed derivation independent of float rendering.
    return int(round(ratio * 1000))


def sweep(algorithm: str, n: int, trials: int = 30, step: float = 0.1,
          base_seed: int = 0, buffer: int | str = "auto",
          radius: float | None = None,
          policy: ForwardPolicy | str = ForwardPolicy.DROP,
          failure_fraction: float = 0.0, payload_len: int = 16) -> SweepCurve:
    """Measure mean/stddev recovery at each query ratio on the 0..1 grid.

    Each (ratio, trial) pair runs an independent simulation seeded by
    derive_seed(base_seed, ratio, trial).  Trials that cannot take their
    measurement (too few alive nodes, topology retries exhausted) are
    skipped; the point's ``trials`` column reports the count that remained.
    """
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
    if n < 10:
        raise ConfigError(f"sweep needs n >= 10, got {n}")
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    if algorithm == "dsa1" and failure_fraction:
        raise ConfigError("the dsa1 baseline has no failure model")

    points = []
    resolved_buffer = None
    for ratio in ratio_grid(step):
        values = []
        for trial in range(trials):
            trial_seed = derive_seed(base_seed, "sweep", _ratio_key(ratio), trial)
            cfg = SimConfig(n=n, radius=radius, buffer_capacity=buffer,
                            forward_policy=policy,
                            failure_fraction=failure_fraction,
                            seed=trial_seed, payload_len=payload_len)
            resolved_buffer = cfg.resolved_capacity()
            query_rng = random.Random(derive_seed(trial_seed, "query"))
            try:
                if algorithm == "mdsa":
                    report = run_mdsa(cfg)
                    values.append(measure_recovery(report, ratio, query_rng))
                else:
                    topo, _ = generate_connected(n, cfg.resolved_radius(),
                                                 trial_seed)
                    rep = dsa1_disseminate(topo, cfg.resolved_capacity(),
                                           seed=trial_seed,
                                           payload_len=payload_len)
                    ids = sample_query_ids(n, list(range(n)), ratio, query_rng)
                    values.append(100.0 * len(dsa1_recover(rep, ids)) / n)
            except (ExperimentError, RuntimeError):
                continue
        if values:
            mean = statistics.fmean(values)
            stddev = statistics.stdev(values) if len(values) > 1 else 0.0
        else:
            mean = stddev = 0.0
        points.append(SweepPoint(query_ratio=ratio, mean=mean, stddev=stddev,
                                 trials=len(values)))
    return SweepCurve(algorithm=algorithm, n=n, buffer=resolved_buffer,
                      points=points)


def table1(n: int = 15, m_values: tuple[int, ...] = (5, 6, 7, 8),
           base_seed: int = 0, radius: float | None = None,
           payload_len: int = 16) -> ComparisonTable:
    """Run both algorithms per buffer size M on one shared topology."""
    if not m_values:
        raise ConfigError("need at least one buffer size M")
    probe = SimConfig(n=n, radius=radius, seed=base_seed,
                      payload_len=payload_len)
    topo, _ = generate_connected(n, probe.resolved_radius(), base_seed)

    rows = []
    for m in sorted(m_values):
        cfg = SimConfig(n=n, radius=probe.resolved_radius(), buffer_capacity=m,
                        seed=base_seed, payload_len=payload_len)
        report = run_mdsa(cfg, topology=topo)
        rows.append(ComparisonRow(algorithm="mdsa", n=n, m=m,
                                  data_messages=report.data_messages,
                                  percent_unused=report.percent_unused))
    for m in sorted(m_values):
        rep = dsa1_disseminate(topo, m, seed=base_seed, payload_len=payload_len)
        rows.append(ComparisonRow(algorithm="dsa1", n=n, m=m,
                                  data_messages=rep.data_messages,
                                  percent_unused=rep.percent_unused))
    return ComparisonTable(n=n, rows=rows)


def paper_fig_curves(base_seed: int, trials: int = 30, step: float = 0.1,
                     sizes: tuple[int, ...] | None = None,
                     algorithm: str = "mdsa") -> list[SweepCurve]:
    """One auto-buffer sweep per preset network size."""
    if sizes is None:
        sizes = PAPER_FIG_SIZES
    return [sweep(algorithm, n, trials=trials, step=step, base_seed=base_seed)
            for n in sizes]


def curves_csv_text(curves: list[SweepCurve]) -> str:
    lines = [CURVE_HEADER]
    for curve in curves:
        for p in curve.points:
            lines.append(f"{curve.algorithm},{curve.n},{curve.buffer},"
                         f"{p.query_ratio},{p.mean},{p.stddev},{p.trials}")
    return "\n".join(lines) + "\n"


def table_csv_text(table: ComparisonTable) -> str:
    lines = [TABLE_HEADER]
    for r in table.rows:
        lines.append(f"{r.algorithm},{r.n},{r.m},{r.data_messages},"
                     f"{r.percent_unused}")
    return "\n".join(lines) + "\n"


def _read_rows(text: str, header: str) -> list[list[str]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != header.split(","):
        raise ValueError(f"expected header {header!r}")
    return rows[1:]


def curves_from_csv(text: str) -> list[SweepCurve]:
    """Parse curve CSV back into curves, grouped by (algorithm, n, buffer)."""
    curves: list[SweepCurve] = []
    for row in _read_rows(text, CURVE_HEADER):
        algorithm, n, buf = row[0], int(row[1]), int(row[2])
        point = SweepPoint(query_ratio=float(row[3]), mean=float(row[4]),
                           stddev=float(row[5]), trials=int(row[6]))
        if not curves or (curves[-1].algorithm, curves[-1].n,
                          curves[-1].buffer) != (algorithm, n, buf):
            curves.append(SweepCurve(algorithm=algorithm, n=n, buffer=buf))
        curves[-1].points.append(point)
    return curves


def table_from_csv(text: str) -> ComparisonTable:
    rows = [ComparisonRow(algorithm=r[0], n=int(r[1]), m=int(r[2]),
                          data_messages=int(r[3]), percent_unused=float(r[4]))
            for r in _read_rows(text, TABLE_HEADER)]
    if not rows:
        raise ValueError("comparison table has no rows")
    return ComparisonTable(n=rows[0].n, rows=rows)


def emit_csv(result: SweepCurve | list[SweepCurve] | ComparisonTable,
             path: str | Path) -> None:
    """Write a result as CSV (UTF-8, LF endings, header always present)."""
    if isinstance(result, ComparisonTable):
        text = table_csv_text(result)
    elif isinstance(result, SweepCurve):
        text = curves_csv_text([result])
    else:
        text = curves_csv_text(list(result))
    path = Path(path)
    try:
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def emit_plot(curves: list[SweepCurve], path: str | Path) -> None:
    """Render curves with error bars to a static SVG file.

    Output is byte-stable for identical inputs: the SVG hash salt is
    pinned and the date metadata is suppressed.
    """
    if not curves:
        raise ValueError("need at least one curve to plot")
    path = Path(path)
    with plt.rc_context({"svg.hashsalt": "mdsa-sim"}):
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        for curve in curves:
            xs = [p.query_ratio for p in curve.points]
            ys = [p.mean for p in curve.points]
            errs = [p.stddev for p in curve.points]
            ax.errorbar(xs, ys, yerr=errs, marker="o", capsize=3,
                        label=f"{curve.algorithm} n={curve.n} M={curve.buffer}")
        ax.set_xlabel("decoding ratio")
        ax.set_ylabel("average successful decoding %")
        ax.set_ylim(0.0, 105.0)
        ax.grid(True, alpha=0.3)
        ax.legend(loc="lower right")
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise OSError(f"cannot write plot to {path}: {exc}") from exc
        finally:
            plt.close(fig)
