"""``wsn-track`` command line: train, sweep, plot.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime abort.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .agents import AGENT_KINDS
from .agents.checkpoint import save_checkpoint
from .config import ConfigError, ExperimentConfig, load_config

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wsn-track", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def overrides(sp):
        sp.add_argument("--config", type=Path, help="key = value config file")
        sp.add_argument("--episodes", type=int, help="override the episode count")
        sp.add_argument("--rs", type=float, action="append", help="sensing radius in m (repeatable)")

    t = sub.add_parser("train", help="train one agent for one seed at every configured r_s")
    overrides(t)
    t.add_argument("--agent", choices=AGENT_KINDS)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", type=Path, required=True)

    s = sub.add_parser("sweep", help="train every (r_s, agent, seed) cell and summarize")
    overrides(s)
    s.add_argument("--out", type=Path, required=True)

    pl = sub.add_parser("plot", help="render plot data from a sweep summary")
    pl.add_argument("--summary", type=Path, required=True)
    pl.add_argument("--out", type=Path, required=True)
    pl.add_argument("--smoothing", type=int, default=50)
    return p


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {"out_dir": str(args.out)}
    if args.episodes is not None:
        changes["episodes"] = args.episodes
    if args.rs:
        changes["rs_list"] = list(args.rs)
    if getattr(args, "agent", None):
        changes["agent"] = args.agent
    try:
        return cfg.replace(**changes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _train(args) -> int:
    from .harness import SUMMARY_COLUMNS, episode_csv_name, run_training, write_table

    cfg = _config(args)
    rows = []
    for r_s in cfg.rs_list:
        name = episode_csv_name(cfg.agent, r_s, args.seed)
        rec = run_training(cfg, cfg.agent, r_s, args.seed, args.out / "episodes" / name)
        (args.out / "checkpoints").mkdir(parents=True, exist_ok=True)
        save_checkpoint(args.out / "checkpoints" / name.replace(".csv", ".npz"), rec.agent_obj, cfg.agent,
                        cfg.digest())
        rows.append(rec.summary_row())
        print(f"{cfg.agent} r_s={r_s:g} seed={args.seed}: final avg reward {rec.final('avg_reward'):.4f}, "
              f"{sum(r[1] for r in rec.rows)} steps in {rec.wall_s:.1f} s")
    write_table(args.out / "summary.csv", SUMMARY_COLUMNS, rows, cfg)
    return EXIT_OK


def _sweep(args) -> int:
    from .harness import run_sweep

    cfg = _config(args)

    def progress(key, rec, err):
        r_s, kind, seed = key
        status = f"FAILED: {err}" if err else f"final avg reward {rec.final('avg_reward'):.4f} ({rec.wall_s:.0f} s)"
        print(f"{kind} r_s={r_s:g} seed={seed}: {status}", flush=True)

    summary = run_sweep(cfg, args.out, progress)
    failed = sum(1 for row in summary if row[-1] == 0)
    print(f"wrote {args.out / 'summary.csv'} ({len(summary)} cells, {failed} failed)")
    return EXIT_RUNTIME if failed else EXIT_OK


def _plot(args) -> int:
    from .plots import emit_plot_data

    if not args.summary.exists():
        raise ConfigError(f"summary file {args.summary} does not exist")
    for path in emit_plot_data(args.summary, args.out, smoothing=args.smoothing):
        print(path)
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"train": _train, "sweep": _sweep, "plot": _plot}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # runtime aborts from the simulator or the learners
        print(f"runtime abort: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
