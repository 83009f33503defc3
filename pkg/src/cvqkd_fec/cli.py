"""Command-line front end.

Subcommands map one-to-one onto the figure classes of the analysis:

  capacity        capacity reference curves over an SNR grid
  beta-threshold  efficiency required for a positive key vs modulation variance
  code-sweep      LDPC Monte-Carlo WER/BER sweep -> performance table
  raptor-sweep    rateless realized-rate sweep -> performance table
  keyrate         key-rate models over performance tables vs distance

A JSON config file (--config) can hold any of a command's parameters; flags
override file values. Every output embeds the fully resolved configuration.
--plot renders a matplotlib figure next to the delimited output.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from cvqkd_fec import capacity as cap
from cvqkd_fec import keyrate as kr
from cvqkd_fec import plots, tables
from cvqkd_fec.ldpc import (
    StoppingRule,
    build_code,
    builtin_distribution,
    load_degree_distribution,
    sweep_curve,
)
from cvqkd_fec.protocol import ChannelParams, mutual_information_ab, required_beta
from cvqkd_fec.raptor import builtin_lt_distribution, load_lt_distribution, measure_raptor_beta

__all__ = ["main"]


def parse_grid(spec: str) -> list[float]:
    """Grid syntax: 'a:b:n' (linear), 'log:a:b:n' (geometric), or 'x,y,z'."""
    if spec.startswith("log:"):
        lo, hi, num = spec[4:].split(":")
        return [float(v) for v in np.geomspace(float(lo), float(hi), int(num))]
    if ":" in spec:
        lo, hi, num = spec.split(":")
        return [float(v) for v in np.linspace(float(lo), float(hi), int(num))]
    return [float(v) for v in spec.split(",")]


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> dict:
    """Resolve config-file values and flags (flags win); returns plain dict."""
    resolved = vars(args).copy()
    path = resolved.pop("config", None)
    resolved.pop("func", None)
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            try:
                file_values = json.load(fh)
            except json.JSONDecodeError as exc:
                parser.error(f"config file {path}: {exc}")
        unknown = set(file_values) - set(resolved)
        if unknown:
            parser.error(f"config file {path}: unknown keys {sorted(unknown)}")
        for key, value in file_values.items():
            if resolved[key] is None or resolved[key] == parser.get_default(key):
                resolved[key] = value
    return resolved


def _write_output(doc: tables.TableDocument, out: str, fmt: str,
                  plot_fn=None, plot: bool = False) -> None:
    tables.write_table(out, doc, fmt=fmt)
    print(f"wrote {out} ({len(doc.rows)} rows)")
    if plot and plot_fn is not None:
        fig_path = out.rsplit(".", 1)[0] + ".png"
        plot_fn(doc, fig_path)
        print(f"wrote {fig_path}")


def cmd_capacity(cfg: dict) -> None:
    grid = parse_grid(cfg["s_grid"])
    which = cfg["which"]
    rows = []
    for s in grid:
        if which == "gaussian":
            c = cap.gaussian_capacity(s)
        elif which == "biawgn":
            c = cap.biawgn_capacity(s)
        elif which == "nonzero":
            c = cap.nonzero_error_capacity(s, cfg["pb"], base=cfg["base"])
        else:
            raise ValueError(f"unknown capacity kind {which!r}")
        rows.append([s, c])
    doc = tables.TableDocument(columns=["snr", "capacity"], rows=rows, config=cfg)
    _write_output(doc, cfg["out"], cfg["format"], plots.plot_capacity, cfg["plot"])


def cmd_beta_threshold(cfg: dict) -> None:
    channel = ChannelParams(t=cfg["t"], epsilon=cfg["epsilon"],
                            eta=cfg["eta"], nu_el=cfg["nu_el"])
    rows = []
    for v_a in parse_grid(cfg["va_grid"]):
        p = channel.with_va(v_a)
        i_ab = mutual_information_ab(p)
        if i_ab <= 0.0:
            rows.append([v_a, i_ab, "", "", "i_ab_zero"])
            continue
        try:
            beta = required_beta(p)
        except ValueError:
            rows.append([v_a, i_ab, "", "", "i_ab_zero"])
            continue
        rows.append([v_a, i_ab, beta * i_ab, beta, "ok"])
    doc = tables.TableDocument(columns=["v_a", "i_ab", "i_e", "required_beta", "status"],
                               rows=rows, config=cfg)
    _write_output(doc, cfg["out"], cfg["format"], plots.plot_beta_threshold, cfg["plot"])


def cmd_code_sweep(cfg: dict) -> None:
    if cfg["dist_file"]:
        dist = load_degree_distribution(cfg["dist_file"])
    elif cfg["rate"] is not None:
        dist = builtin_distribution(cfg["rate"])
    else:
        raise ValueError("need either --dist-file or --rate")
    code = build_code(dist, cfg["n"], seed=cfg["seed"])
    points = sweep_curve(code, sorted(parse_grid(cfg["s_grid"])), cfg["max_iter"],
                         StoppingRule(cfg["min_errors"], cfg["max_trials"]),
                         seed=cfg["seed"])
    rows = [tables.performance_row(pt) + [int(pt.beta_fec > 1.0)] for pt in points]
    doc = tables.TableDocument(columns=tables.PERFORMANCE_COLUMNS + ["beta_gt_1"],
                               rows=rows, config=cfg)
    _write_output(doc, cfg["out"], cfg["format"], plots.plot_performance, cfg["plot"])


def cmd_raptor_sweep(cfg: dict) -> None:
    if cfg["lt_dist_file"]:
        dist = load_lt_distribution(cfg["lt_dist_file"])
    else:
        dist = builtin_lt_distribution(cfg["lt_dist"])
    points = measure_raptor_beta(dist, cfg["k"], sorted(parse_grid(cfg["s_grid"])),
                                 trials=cfg["trials"], seed=cfg["seed"],
                                 max_symbols=cfg["max_symbols"])
    rows = [tables.performance_row(pt) for pt in points]
    doc = tables.TableDocument(columns=tables.PERFORMANCE_COLUMNS, rows=rows, config=cfg)
    _write_output(doc, cfg["out"], cfg["format"], plots.plot_performance, cfg["plot"])


def cmd_keyrate(cfg: dict) -> None:
    table = []
    for path in cfg["table"]:
        table.extend(tables.read_performance_table(path))
    channel = ChannelParams(t=1.0, epsilon=cfg["epsilon"], eta=cfg["eta"],
                            nu_el=cfg["nu_el"])
    d_grid = parse_grid(cfg["d_grid"])
    va_bounds = None if cfg["no_va_limit"] else (cfg["va_min"], cfg["va_max"])

    models = [kr.KeyRateModel(m) for m in cfg["model"]]
    outputs: list[tuple[str, tables.TableDocument]] = []
    base, ext = (cfg["out"].rsplit(".", 1) + ["csv"])[:2]
    multi = len(models) + (1 if cfg["ideal_reference"] else 0) > 1
    for model in models:
        results = kr.distance_sweep(channel, table, model, d_grid,
                                    loss_db_per_km=cfg["loss"],
                                    wer_cap=cfg["wer_cap"], va_bounds=va_bounds)
        rows = [tables.keyrate_row(r) for r in results]
        doc = tables.TableDocument(columns=tables.KEYRATE_COLUMNS, rows=rows,
                                   config={**cfg, "model": model.value})
        name = f"{base}_{model.value}.{ext}" if multi else cfg["out"]
        outputs.append((name, doc))
    if cfg["ideal_reference"]:
        results = kr.ideal_reference_curve(channel, d_grid, loss_db_per_km=cfg["loss"])
        rows = [tables.keyrate_row(r) for r in results]
        doc = tables.TableDocument(columns=tables.KEYRATE_COLUMNS, rows=rows,
                                   config={**cfg, "model": "ideal-reference"})
        name = f"{base}_ideal-reference.{ext}" if multi else cfg["out"]
        outputs.append((name, doc))

    for name, doc in outputs:
        tables.write_table(name, doc, fmt=cfg["format"])
        print(f"wrote {name} ({len(doc.rows)} rows)")
    if cfg["plot"]:
        fig_path = f"{base}.png"
        plots.plot_keyrate([doc for _, doc in outputs], fig_path)
        print(f"wrote {fig_path}")


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON file with this command's parameters")
    sub.add_argument("--seed", type=int, default=1, help="base RNG seed")
    sub.add_argument("--out", required=False, help="output file path")
    sub.add_argument("--format", choices=["csv", "json"], default="csv")
    sub.add_argument("--plot", action="store_true",
                     help="render a PNG figure next to the output table")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvqkd-fec", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("capacity", help="capacity reference curves")
    p.add_argument("--s-grid", dest="s_grid", required=True, help="SNR grid (a:b:n, log:a:b:n, or x,y,z)")
    p.add_argument("--which", choices=["gaussian", "biawgn", "nonzero"], default="gaussian")
    p.add_argument("--pb", type=float, default=0.0, help="tolerated BER for 'nonzero'")
    p.add_argument("--base", choices=["biawgn", "gaussian"], default="biawgn",
                   help="base capacity for the non-zero-error correction")
    _add_common(p)
    p.set_defaults(func=cmd_capacity)

    p = subs.add_parser("beta-threshold", help="required efficiency vs modulation variance")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=2.0)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--nu-el", dest="nu_el", type=float, default=0.0)
    p.add_argument("--va-grid", dest="va_grid", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_beta_threshold)

    p = subs.add_parser("code-sweep", help="LDPC BER/WER Monte-Carlo sweep")
    p.add_argument("--dist-file", dest="dist_file", help="degree-distribution JSON")
    p.add_argument("--rate", type=float, help="builtin distribution design rate")
    p.add_argument("--n", type=int, required=True, help="codeword length")
    p.add_argument("--s-grid", dest="s_grid", required=True)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=200)
    p.add_argument("--min-errors", dest="min_errors", type=int, default=100)
    p.add_argument("--max-trials", dest="max_trials", type=int, default=100_000)
    _add_common(p)
    p.set_defaults(func=cmd_code_sweep)

    p = subs.add_parser("raptor-sweep", help="rateless realized-rate sweep")
    p.add_argument("--lt-dist-file", dest="lt_dist_file", help="LT distribution JSON")
    p.add_argument("--lt-dist", dest="lt_dist", type=int, choices=[1, 2], default=1,
                   help="builtin LT distribution")
    p.add_argument("--k", type=int, required=True, help="message length (bits)")
    p.add_argument("--s-grid", dest="s_grid", required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--max-symbols", dest="max_symbols", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_raptor_sweep)

    p = subs.add_parser("keyrate", help="key-rate models over performance tables")
    p.add_argument("--table", nargs="+", required=True, help="performance table file(s)")
    p.add_argument("--model", nargs="+", default=["standard"],
                   choices=[m.value for m in kr.KeyRateModel])
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--eta", type=float, default=0.6)
    p.add_argument("--nu-el", dest="nu_el", type=float, default=0.01)
    p.add_argument("--d-grid", dest="d_grid", required=True, help="distance grid in km")
    p.add_argument("--loss", type=float, default=kr.DEFAULT_LOSS_DB_PER_KM)
    p.add_argument("--wer-cap", dest="wer_cap", type=float, default=None)
    p.add_argument("--va-min", dest="va_min", type=float, default=kr.DEFAULT_VA_BOUNDS[0])
    p.add_argument("--va-max", dest="va_max", type=float, default=kr.DEFAULT_VA_BOUNDS[1])
    p.add_argument("--no-va-limit", dest="no_va_limit", action="store_true",
                   help="evaluate points without the modulation-variance bounds")
    p.add_argument("--ideal-reference", dest="ideal_reference", action="store_true",
                   help="also emit the beta=1, WER=0 reference curve")
    _add_common(p)
    p.set_defaults(func=cmd_keyrate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = _merge_config(args, parser)
    cfg.pop("command", None)
    if not cfg.get("out"):
        parser.error("--out is required (directly or via --config)")
    try:
        args.func(cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
