"""Joint iterative detection and decoding for the NB-polar-coded SCMA uplink.

``nsd``: standard max-log MPA (UN + RN updates) with plain NB-SCL decoding.
``isd``: UN-free RN update driven by the decoder priors, with lazy-search decoding.
Both exchange damped list-based extrinsic LLRs and stop early once every user's
selected path passes its CRC.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codebook import Codebook
from .config import ReceiverConfig, SystemConfig
from .construction import CodeConstruction
from .llr import (bits_to_symbol_llr, damp, deinterleave_llr, interleave_llr, reconstruct_extrinsic,
                  user_bit_llrs, user_priors)
from .metrics import OpCount
from .mpa import MessageState, detect
from .polar import DecodeResult, nbscl_decode
from .txchain import user_interleavers


@dataclass
class IterationTrace:
    crc_masks: list = field(default_factory=list)       # per iteration: (J,) bool of selected-path CRC
    ops: list = field(default_factory=list)             # per iteration OpCount
    search_paths: list = field(default_factory=list)    # per iteration, per user decode
    iterations_used: int = 0
    terminated_early: bool = False

    @property
    def total_ops(self) -> OpCount:
        out = OpCount()
        for o in self.ops:
            out += o
        return out


def early_termination_check(crc_mask) -> bool:
    crc_mask = np.asarray(crc_mask, dtype=bool)
    if crc_mask.size == 0:
        raise ValueError("early termination needs at least one user")
    return bool(crc_mask.all())


class Receiver:
    """Reusable receiver for one system/receiver/code configuration."""

    def __init__(self, cfg: SystemConfig, rx: ReceiverConfig, codebook: Codebook, constr: CodeConstruction,
                 perms=None):
        if not constr.matches(cfg):
            raise ValueError(f"construction (q={constr.q}, N'={constr.n_sym}, D'={constr.d_sym}) "
                             f"does not fit the system (q={cfg.q}, N'={cfg.n_sym}, D'={cfg.d_sym})")
        self.cfg, self.rx, self.codebook = cfg, rx, codebook
        if rx.lazy and rx.g_th is not None:
            constr = constr.with_threshold(rx.g_th)
        self.constr = constr
        self.info_set = constr.info_set
        self.lazy_set = constr.lazy_set if rx.lazy else np.zeros(0, dtype=np.int64)
        self.perms = user_interleavers(cfg) if perms is None else perms

    def _decode(self, state: MessageState, y, h, n0, ops: OpCount) -> DecodeResult:
        cfg, rx = self.cfg, self.rx
        Q = detect(state, self.codebook, y, h, n0, rx.algorithm, rx.llr_clip, ops)
        L = user_bit_llrs(Q)
        L = np.stack([deinterleave_llr(L[j], self.perms[j]) for j in range(cfg.J)])
        sym = bits_to_symbol_llr(L, cfg.field)
        return nbscl_decode(sym, self.info_set, rx.list_size, cfg.gamma, cfg.field, cfg.crc_len,
                            lazy_set=self.lazy_set, ops=ops)

    def _feedback(self, state: MessageState, res: DecodeResult):
        cfg, rx = self.cfg, self.rx
        L = reconstruct_extrinsic(res.code_bits(cfg.field), res.metrics, res.selected, rx.llr_clip)
        L = damp(L, rx.epsilon)
        L = np.stack([interleave_llr(L[j], self.perms[j]) for j in range(cfg.J)])
        state.mu = user_priors(L, cfg.R)

    def run_frame(self, y, h, n0, T: int | None = None, feedback: bool = True):
        """Decode one received block ``y`` (E, K) with gains ``h`` (J, E, K).

        Returns ``(u_hat (J, A), trace)``. Feedback is skipped after the last iteration.
        """
        T = self.rx.T if T is None else T
        state = MessageState.initial(self.codebook, self.cfg.E)
        trace = IterationTrace()
        res = None
        for t in range(1, T + 1):
            ops = OpCount()
            res = self._decode(state, y, h, n0, ops)
            rows = np.arange(self.cfg.J)
            mask = res.crc_ok[rows, res.selected]
            trace.crc_masks.append(mask)
            trace.search_paths.append(res.search_paths)
            trace.iterations_used = t
            if self.rx.early_termination and early_termination_check(mask):
                trace.ops.append(ops)
                trace.terminated_early = t < T
                break
            if t < T and feedback:
                self._feedback(state, res)
            trace.ops.append(ops)
        return res.selected_bits(self.cfg.crc_len), trace

    def run_noniterative(self, y, h, n0):
        """One detection pass and one decode per user, no feedback."""
        u_hat, _ = self.run_frame(y, h, n0, T=1, feedback=False)
        return u_hat


def run_frame(y, chan, cfg: SystemConfig, rx: ReceiverConfig, codebook: Codebook, constr: CodeConstruction):
    return Receiver(cfg, rx, codebook, constr).run_frame(y, chan.h, chan.n0)


def run_noniterative(y, chan, cfg: SystemConfig, rx: ReceiverConfig, codebook: Codebook,
                     constr: CodeConstruction):
    return Receiver(cfg, rx, codebook, constr).run_noniterative(y, chan.h, chan.n0)
