"""Monte-Carlo link simulation: per-frame seeded trials, batched stopping, CSV rows."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np

from .channel import draw_channel, ebn0_to_n0, transmit
from .codebook import Codebook
from .config import ReceiverConfig, SystemConfig
from .construction import CodeConstruction
from .metrics import BerCounter, OpCount, gamma_isd, latency_gain
from .receiver import Receiver
from .txchain import encode_frame

CSV_COLUMNS = ("ebn0_db", "frames", "bit_errors", "ber", "fer", "avg_iters",
               "add", "mul", "cmp", "xor", "exp", "latency_cycles", "latency_gain")


@dataclass
class FrameOutcome:
    index: int
    bit_errors: int
    bits: int
    iterations: int
    ops: OpCount
    search_paths: int      # summed over iterations, per user decode
    crc_masks: list


@dataclass
class PointResult:
    ebn0_db: float
    counter: BerCounter = field(default_factory=BerCounter)
    iterations: int = 0
    ops: OpCount = field(default_factory=OpCount)
    search_paths: int = 0
    outcomes: list = field(default_factory=list)

    @property
    def frames(self) -> int:
        return self.counter.frames

    @property
    def avg_iters(self) -> float:
        return self.iterations / self.frames if self.frames else float("nan")

    def ops_per_iteration(self) -> dict:
        it = max(self.iterations, 1)
        return {k: v / it for k, v in zip(("add", "mul", "cmp", "xor", "exp"), self.ops.as_tuple())}

    @property
    def search_paths_per_iteration(self) -> float:
        return self.search_paths / max(self.iterations, 1)


def frame_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def simulate_frame(rx: Receiver, ebn0_db: float, seed: int, index: int, zero_noise: bool = False,
                   T: int | None = None, feedback: bool = True) -> FrameOutcome:
    cfg = rx.cfg
    rng = frame_rng(seed, index)
    u = rng.integers(0, 2, size=(cfg.J, cfg.A), dtype=np.int8)
    frame = encode_frame(u, cfg, rx.codebook, rx.info_set, rx.perms)
    n0 = 0.0 if zero_noise else ebn0_to_n0(ebn0_db, cfg, rx.codebook)
    chan = draw_channel(cfg.channel, cfg.J, cfg.E, cfg.K, rng, n0)
    y = transmit(frame.x, chan, rng)
    u_hat, trace = rx.run_frame(y, chan.h, chan.n0, T=T, feedback=feedback)
    return FrameOutcome(index, int(np.count_nonzero(u_hat != u)), u.size, trace.iterations_used,
                        trace.total_ops, sum(trace.search_paths), trace.crc_masks)


_WORKER: dict = {}


def _init_worker(cfg, rx_cfg, codebook, constr):
    _WORKER["rx"] = Receiver(cfg, rx_cfg, codebook, constr)


def _run_job(job):
    ebn0_db, seed, index, zero_noise = job
    return simulate_frame(_WORKER["rx"], ebn0_db, seed, index, zero_noise)


def simulate_point(cfg: SystemConfig, rx_cfg: ReceiverConfig, codebook: Codebook, constr: CodeConstruction,
                   ebn0_db: float, frames: int, seed: int = 0, target_errors: int | None = None,
                   workers: int = 1, zero_noise: bool = False, batch: int = 20,
                   keep_outcomes: bool = False) -> PointResult:
    """Simulate up to ``frames`` frames, stopping early after the batch in which
    ``target_errors`` frame errors have accumulated. Frame i always uses the
    random stream (seed, i), so results do not depend on ``workers``."""
    if frames < 1:
        raise ValueError(f"frame budget must be >= 1, got {frames}")
    res = PointResult(float(ebn0_db))
    pool = None
    if workers > 1:
        pool = get_context("spawn").Pool(workers, initializer=_init_worker,
                                         initargs=(cfg, rx_cfg, codebook, constr))
    else:
        _init_worker(cfg, rx_cfg, codebook, constr)
    try:
        start = 0
        while start < frames:
            jobs = [(ebn0_db, seed, i, zero_noise) for i in range(start, min(frames, start + batch))]
            outs = pool.map(_run_job, jobs) if pool else [_run_job(j) for j in jobs]
            for o in outs:
                res.counter.bit_errors += o.bit_errors
                res.counter.bits += o.bits
                res.counter.frame_errors += int(o.bit_errors > 0)
                res.counter.frames += 1
                res.iterations += o.iterations
                res.ops += o.ops
                res.search_paths += o.search_paths
                if keep_outcomes:
                    res.outcomes.append(o)
            start += len(jobs)
            if target_errors is not None and res.counter.frame_errors >= target_errors:
                break
    finally:
        if pool:
            pool.close()
            pool.join()
    return res


def latency_for(cfg: SystemConfig, rx_cfg: ReceiverConfig, beta: float, t_a: float):
    """Cycles and gain of the non-binary receiver; the plain-list receiver has beta = 0."""
    cycles = gamma_isd(t_a, cfg.p, cfg.N, cfg.D, beta if rx_cfg.lazy else 0.0)
    return cycles, latency_gain(cycles, rx_cfg.T, cfg.N, cfg.D)


def point_row(res: PointResult, cfg: SystemConfig, rx_cfg: ReceiverConfig, beta: float) -> dict:
    cycles, gain = latency_for(cfg, rx_cfg, beta, res.avg_iters)
    row = {"ebn0_db": res.ebn0_db, "frames": res.frames, "bit_errors": res.counter.bit_errors,
           "ber": res.counter.ber, "fer": res.counter.fer, "avg_iters": res.avg_iters}
    row.update(res.ops_per_iteration())
    row.update(latency_cycles=cycles, latency_gain=gain)
    return row


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(rows, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(stream) -> list[dict]:
    reader = csv.DictReader(stream)
    if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}; expected {list(CSV_COLUMNS)}")
    rows = []
    for r in reader:
        row = {}
        for c in CSV_COLUMNS:
            row[c] = int(r[c]) if c in ("frames", "bit_errors") else float(r[c])
        rows.append(row)
    return rows
