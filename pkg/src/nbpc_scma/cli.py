"""Command-line front end: ``construct``, ``simulate``, ``sweep`` and ``report``."""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .codebook import CodebookError, load_codebook
from .config import ConfigError, ReceiverConfig, SystemConfig, load_config
from .construction import LLR_SOURCES, load_construction, monte_carlo_construct, save_construction
from .metrics import ComplexityParams, OpCount, latency_model, table5_closed_form
from .polar import search_path_count
from .sim import read_csv, point_row, rows_to_csv, simulate_point


def _configs(path) -> tuple[SystemConfig, ReceiverConfig]:
    if path is None:
        return SystemConfig(), ReceiverConfig()
    return load_config(path)


def cmd_construct(args) -> int:
    cfg, rx = _configs(args.config)
    constr = monte_carlo_construct(cfg, args.ebn0, channel=args.channel or cfg.channel, trials=args.trials,
                                   g_th=args.g_th if args.g_th is not None else (rx.g_th or 0.0),
                                   seed=args.seed, source=args.source,
                                   codebook=load_codebook(args.codebook) if args.source == "scma" else None)
    save_construction(constr, args.out)
    print(f"wrote {args.out}: |A| = {len(constr.info_set)}, |B| = {len(constr.lazy_set)}, "
          f"beta = {constr.beta:.4f}", file=sys.stderr)
    return 0


def _simulate_rows(args, ebn0_list):
    cfg, rx = _configs(args.config)
    codebook = load_codebook(args.codebook)
    constr = load_construction(args.construction)
    if rx.lazy and rx.g_th is not None:
        constr = constr.with_threshold(rx.g_th)
    rows = []
    for ebn0 in ebn0_list:
        res = simulate_point(cfg, rx, codebook, constr, ebn0, args.frames, seed=args.seed,
                             target_errors=args.target_errors, workers=args.workers,
                             zero_noise=args.zero_noise)
        rows.append(point_row(res, cfg, rx, constr.beta))
        print(f"Eb/N0 = {ebn0:g} dB: frames = {res.frames}, BER = {res.counter.ber:.3e}, "
              f"avg iterations = {res.avg_iters:.3f}", file=sys.stderr)
    return rows


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    _emit(rows_to_csv(_simulate_rows(args, [args.ebn0])), args.out)
    return 0


def _parse_list(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"ebn0-list: expected numbers separated by commas, got {text!r}") from None


def cmd_sweep(args) -> int:
    _emit(rows_to_csv(_simulate_rows(args, _parse_list(args.ebn0_list))), args.out)
    return 0


def expected_counts(cfg: SystemConfig, rx: ReceiverConfig, constr, codebook) -> OpCount:
    """Closed-form per-iteration operation counts for the configured receiver."""
    lazy = constr.lazy_set if rx.lazy else ()
    tp = search_path_count(cfg.n_sym, constr.info_set, rx.list_size, cfg.q, lazy)
    prm = ComplexityParams.from_system(cfg, codebook, rx.list_size, tp=tp)
    return table5_closed_form(rx.algorithm, prm)


def cmd_report(args) -> int:
    with open(args.input) as fh:
        rows = read_csv(fh)
    cfg, rx = _configs(args.config)
    beta = None
    expected = None
    if args.construction:
        constr = load_construction(args.construction)
        if rx.lazy and rx.g_th is not None:
            constr = constr.with_threshold(rx.g_th)
        beta = constr.beta if rx.lazy else 0.0
        expected = expected_counts(cfg, rx, constr, load_codebook(args.codebook))
    out = [f"# {rx.algorithm} receiver, N = {cfg.N}, D = {cfg.D}, q = {cfg.q}, T = {rx.T}"]
    if beta is not None:
        out.append(f"# lazy rate beta = {beta:.4f}")
    out.append(f"{'ebn0_db':>8} {'frames':>7} {'ber':>11} {'fer':>9} {'avg_it':>7} {'cycles':>9} {'gain':>7}  counters")
    mismatches = 0
    for r in rows:
        status = "-"
        if expected is not None:
            got = tuple(r[k] for k in ("add", "mul", "cmp", "xor", "exp"))
            ok = all(math.isclose(g, e, rel_tol=0, abs_tol=1e-6) for g, e in zip(got, expected.as_tuple()))
            status = "match" if ok else "MISMATCH"
            mismatches += not ok
        gain = r["latency_gain"]
        if beta is not None:
            rep = latency_model(rx.T, cfg.N, cfg.D, cfg.p, r["avg_iters"], beta)
            if not math.isclose(rep.gamma_isd, r["latency_cycles"], rel_tol=1e-9):
                status += " latency-MISMATCH"
                mismatches += 1
        out.append(f"{r['ebn0_db']:8.2f} {r['frames']:7d} {r['ber']:11.4e} {r['fer']:9.4f} "
                   f"{r['avg_iters']:7.3f} {r['latency_cycles']:9.2f} {100 * gain:6.2f}%  {status}")
    if expected is not None:
        out.append("# closed form per iteration: " + ", ".join(
            f"{k} = {v}" for k, v in zip(("add", "mul", "cmp", "xor", "exp"), expected.as_tuple())))
    rep = latency_model(rx.T, cfg.N, cfg.D, cfg.p, 1.0, 0.0)
    out.append(f"# baseline T * (2N - 2 + D) = {rep.baseline} cycles; "
               f"JIDD (2N - 2 per iteration) gain = {100 * rep.gain_jidd:.2f}%")
    print("\n".join(out))
    if mismatches:
        print(f"error: {mismatches} row(s) disagree with the closed forms", file=sys.stderr)
        return 1
    return 0


def _add_sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--construction", required=True, help="code construction file")
    p.add_argument("--codebook", help="SCMA codebook file (default: bundled (6,4,4) codebook)")
    p.add_argument("--frames", type=int, default=1000, help="frame budget per point")
    p.add_argument("--target-errors", type=int, default=100, help="stop a point after this many frame errors")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--zero-noise", action="store_true", help="transmit without noise")
    p.add_argument("--out", help="CSV output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nbpc-scma", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="Monte-Carlo code construction")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ebn0", type=float, default=2.0, help="construction Eb/N0 in dB")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--g-th", type=float, default=None, help="lazy threshold (default: config g_th or 0)")
    p.add_argument("--channel", choices=("awgn", "rayleigh"))
    p.add_argument("--source", choices=LLR_SOURCES, default="bpsk", help="decoder input model")
    p.add_argument("--codebook")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("simulate", help="simulate one Eb/N0 point")
    _add_sim_args(p)
    p.add_argument("--ebn0", type=float, required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="simulate a list of Eb/N0 points")
    _add_sim_args(p)
    p.add_argument("--ebn0-list", required=True, help="comma-separated Eb/N0 values in dB")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="summarise a CSV and cross-check counters and latency")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--config")
    p.add_argument("--construction")
    p.add_argument("--codebook")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CodebookError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
