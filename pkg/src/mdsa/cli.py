"""Command line interface.

Subcommands: run, sweep, table1, compare, dump-topology.  Exit codes: 0 on
success, 1 on configuration/usage errors, 2 on I/O errors.  A line-oriented
``key = value`` config file can prefill simulation parameters; explicit
flags always win.  All outputs are deterministic for fixed flags and seed.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .engine import ConfigError, SimConfig, SimReport, run_mdsa
from .experiments import (
    curves_csv_text,
    emit_csv,
    emit_plot,
    paper_fig_curves,
    sweep,
    table1,
)
from .topology import generate_connected, topology_to_text

__all__ = ["main", "build_parser"]


class _Parser(argparse.ArgumentParser):
    """Argparse parser whose usage errors map to exit code 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


# Config file keys, with CLI-style aliases mapping onto SimConfig fields.
_CONFIG_KEYS = {
    "n": ("n", int),
    "radius": ("radius", float),
    "buffer": ("buffer", str),
    "buffer_capacity": ("buffer", str),
    "policy": ("policy", str),
    "forward_policy": ("policy", str),
    "failure_fraction": ("failure_fraction", float),
    "seed": ("seed", int),
    "energy_tx": ("energy_tx", float),
    "energy_rx": ("energy_rx", float),
    "payload_len": ("payload_len", int),
}


def _parse_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        name, cast = _CONFIG_KEYS[key]
        try:
            values[name] = cast(value)
        except ValueError:
            raise ConfigError(
                f"{path}:{lineno}: bad value {value!r} for {key!r}") from None
    return values


def _buffer_value(raw: str | int) -> int | str:
    if isinstance(raw, int):
        return raw
    if raw.lower() == "auto":
        return "auto"
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(
            f"buffer must be a positive integer or 'auto', got {raw!r}") from None


def _merged(args, *keys: str) -> dict:
    """Fold config-file values under explicit flags for the given keys."""
    file_values = _parse_config_file(args.config) if args.config else {}
    out = {}
    for key in keys:
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in file_values:
            out[key] = file_values[key]
    return out


def _sim_config(values: dict) -> SimConfig:
    if "n" not in values:
        raise ConfigError("n is required (flag --n or config file)")
    kwargs = {"n": values["n"]}
    if "radius" in values:
        kwargs["radius"] = values["radius"]
    if "buffer" in values:
        kwargs["buffer_capacity"] = _buffer_value(values["buffer"])
    if "policy" in values:
        kwargs["forward_policy"] = values["policy"]
    for key in ("failure_fraction", "seed", "energy_tx", "energy_rx",
                "payload_len"):
        if key in values:
            kwargs[key] = values[key]
    return SimConfig(**kwargs)


def _out_dir(args) -> Path | None:
    if args.out is None:
        return None
    path = Path(args.out)
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc}") from exc
    return path


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _report_csv_text(cfg: SimConfig, report: SimReport) -> str:
    rows = [
        ("algorithm", "mdsa"),
        ("n", report.n),
        ("radius", cfg.resolved_radius()),
        ("buffer", report.capacity),
        ("policy", cfg.forward_policy.value),
        ("seed", cfg.seed),
        ("failure_fraction", cfg.failure_fraction),
        ("topology_retries", report.topology_retries),
        ("flood_messages", report.flood_messages),
        ("unicast_messages", report.unicast_messages),
        ("data_messages", report.data_messages),
        ("init_messages", report.init_messages),
        ("rounds_to_quiescence", report.rounds_to_quiescence),
        ("energy_total", report.energy_total),
        ("percent_unused", report.percent_unused),
        ("alive", len(report.alive_ids)),
    ]
    return "\n".join(["key,value"] + [f"{k},{v}" for k, v in rows]) + "\n"


def _cmd_run(args) -> int:
    cfg = _sim_config(_merged(
        args, "n", "radius", "buffer", "policy", "failure_fraction", "seed"))
    report = run_mdsa(cfg, trace=args.trace is not None)
    text = _report_csv_text(cfg, report)
    out = _out_dir(args)
    if out is None:
        print(text, end="")
    else:
        _write_text(out / "report.csv", text)
    if args.trace is not None:
        _write_text(Path(args.trace), "\n".join(report.trace) + "\n"
                    if report.trace else "")
    if args.dump_topology is not None:
        _write_text(Path(args.dump_topology), topology_to_text(report.topology))
    return 0


def _cmd_sweep(args) -> int:
    values = _merged(args, "n", "radius", "buffer", "policy",
                     "failure_fraction", "seed")
    out = _out_dir(args)
    common = dict(
        trials=args.trials,
        step=args.step,
        base_seed=values["seed"],
        buffer=_buffer_value(values.get("buffer", "auto")),
        radius=values.get("radius"),
        policy=values.get("policy", "drop"),
        failure_fraction=values.get("failure_fraction", 0.0),
    )
    if args.preset == "paper-figs":
        if out is None:
            raise ConfigError("--preset paper-figs requires --out")
        curves = paper_fig_curves(values["seed"], trials=args.trials,
                                  step=args.step, algorithm=args.algorithm)
        for curve in curves:
            stem = f"{curve.algorithm}-n{curve.n}"
            emit_csv(curve, out / f"sweep-{stem}.csv")
            emit_plot([curve], out / f"fig-{stem}.svg")
        return 0
    if "n" not in values:
        raise ConfigError("n is required (flag --n or config file)")
    curve = sweep(args.algorithm, values["n"], **common)
    if out is None:
        print(curves_csv_text([curve]), end="")
    else:
        emit_csv(curve, out / "sweep.csv")
    return 0


def _cmd_table1(args) -> int:
    values = _merged(args, "n", "radius", "seed")
    try:
        m_values = tuple(int(tok) for tok in args.m_values.split(","))
    except ValueError:
        raise ConfigError(
            f"--m-values must be comma-separated integers, got "
            f"{args.m_values!r}") from None
    table = table1(n=values.get("n", 15), m_values=m_values,
                   base_seed=values.get("seed", 0),
                   radius=values.get("radius"))
    out = _out_dir(args)
    if out is None:
        from .experiments import table_csv_text
        print(table_csv_text(table), end="")
    else:
        emit_csv(table, out / "table1.csv")
    return 0


def _cmd_compare(args) -> int:
    values = _merged(args, "n", "radius", "buffer", "seed")
    if "n" not in values:
        raise ConfigError("n is required (flag --n or config file)")
    out = _out_dir(args)
    if out is None:
        raise ConfigError("compare requires --out for its plot")
    curves = [
        sweep(algorithm, values["n"], trials=args.trials, step=args.step,
              base_seed=values.get("seed", 0),
              buffer=_buffer_value(values.get("buffer", "auto")),
              radius=values.get("radius"))
        for algorithm in ("mdsa", "dsa1")
    ]
    emit_csv(curves, out / "compare.csv")
    emit_plot(curves, out / "compare.svg")
    return 0


def _cmd_dump_topology(args) -> int:
    values = _merged(args, "n", "radius", "seed")
    cfg = _sim_config(values)
    topo, _ = generate_connected(cfg.n, cfg.resolved_radius(), cfg.seed)
    text = topology_to_text(topo)
    out = _out_dir(args)
    if out is None:
        print(text, end="")
    else:
        _write_text(out / "topology.txt", text)
    return 0


def _add_common(sub, *, seed_required: bool = False) -> None:
    sub.add_argument("--n", type=int, help="number of nodes")
    sub.add_argument("--radius", type=float, help="communication radius")
    sub.add_argument("--seed", type=int, required=seed_required,
                     help="master seed" + (" (required)" if seed_required else ""))
    sub.add_argument("--out", help="output directory (default: stdout)")
    sub.add_argument("--config", help="key = value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mdsa-sim",
                     description="Distributed-storage protocol simulator")
    commands = parser.add_subparsers(dest="command", required=True,
                                     parser_class=_Parser)

    run_p = commands.add_parser("run", help="single simulation, report CSV")
    _add_common(run_p)
    run_p.add_argument("--buffer", help="slots per node, or 'auto'")
    run_p.add_argument("--policy", choices=["drop", "forward"],
                       help="full-buffer handling")
    run_p.add_argument("--failure-fraction", dest="failure_fraction",
                       type=float, help="fraction of nodes to fail")
    run_p.add_argument("--trace", metavar="FILE",
                       help="write per-delivery trace log")
    run_p.add_argument("--dump-topology", dest="dump_topology", metavar="FILE",
                       help="write the generated topology")
    run_p.set_defaults(func=_cmd_run)

    sweep_p = commands.add_parser("sweep", help="recovery vs query ratio")
    _add_common(sweep_p, seed_required=True)
    sweep_p.add_argument("--algorithm", choices=["mdsa", "dsa1"],
                         default="mdsa")
    sweep_p.add_argument("--buffer", help="slots per node, or 'auto'")
    sweep_p.add_argument("--policy", choices=["drop", "forward"],
                         help="full-buffer handling")
    sweep_p.add_argument("--failure-fraction", dest="failure_fraction",
                         type=float, help="fraction of nodes to fail")
    sweep_p.add_argument("--trials", type=int, default=30)
    sweep_p.add_argument("--step", type=float, default=0.1)
    sweep_p.add_argument("--preset", choices=["paper-figs"],
                         help="run the preset size series")
    sweep_p.set_defaults(func=_cmd_sweep)

    table_p = commands.add_parser("table1", help="MDSA vs baseline comparison")
    _add_common(table_p)
    table_p.add_argument("--m-values", dest="m_values", default="5,6,7,8",
                         help="comma-separated buffer sizes")
    table_p.set_defaults(func=_cmd_table1)

    cmp_p = commands.add_parser("compare", help="both algorithms, one plot")
    _add_common(cmp_p)
    cmp_p.add_argument("--buffer", help="slots per node, or 'auto'")
    cmp_p.add_argument("--trials", type=int, default=30)
    cmp_p.add_argument("--step", type=float, default=0.1)
    cmp_p.set_defaults(func=_cmd_compare)

    dump_p = commands.add_parser("dump-topology",
                                 help="generate and print a topology")
    _add_common(dump_p)
    dump_p.set_defaults(func=_cmd_dump_topology)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
