"""Non-binary polar decoding over GF(q): kernel LLR updates, partial sums, and the
(lazy-search) successive-cancellation list decoder.

Symbol LLR vectors follow L[theta] = ln P(0)/P(theta); smaller means more likely.
The decoder is batched: ``B`` independent decodes (typically the J users of one
frame) advance in lock-step over ``l`` list lanes. The number of live paths only
depends on the position types (frozen / lazy / split), so it is shared by the batch.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import ConfigError
from .gf import FieldSpec, symbols_to_bits
from .metrics import OpCount
from .txchain import crc_check

FROZEN, SPLIT, LAZY = 0, 1, 2


@lru_cache(maxsize=None)
def _f_index(gf: FieldSpec, gamma: int) -> np.ndarray:
    # T[theta, phi] = theta + gamma * phi: first component of (theta, phi) G_2.
    q = gf.q
    idx = np.arange(q)[:, None] ^ gf.mul_table[gamma][None, :]
    idx.setflags(write=False)
    return idx


def f_update(La, Lb, gamma: int, gf: FieldSpec) -> np.ndarray:
    """LLR of the upper kernel input from the LLRs of both kernel outputs.

    L[theta] = min_phi(La[theta + g phi] + Lb[phi]) - min_phi(La[g phi] + Lb[phi]).
    Works on (..., q) arrays.
    """
    La = np.asarray(La, dtype=np.float64)
    Lb = np.asarray(Lb, dtype=np.float64)
    idx = _f_index(gf, gamma)
    m = La[..., idx[:, 0]] + Lb[..., :1]
    for phi in range(1, gf.q):
        np.minimum(m, La[..., idx[:, phi]] + Lb[..., phi:phi + 1], out=m)
    return m - m[..., :1]


def g_update(La, Lb, R, gamma: int, gf: FieldSpec) -> np.ndarray:
    """LLR of the lower kernel input given the decided upper input ``R``.

    L[theta] = La[R + g theta] + Lb[theta] - La[R] - Lb[0].
    """
    La = np.asarray(La, dtype=np.float64)
    Lb = np.asarray(Lb, dtype=np.float64)
    R = np.asarray(R)
    idx = R[..., None] ^ gf.mul_table[gamma][None, :] if R.ndim else R ^ gf.mul_table[gamma]
    out = np.take_along_axis(La, np.broadcast_to(idx, La.shape), axis=-1) + Lb
    return out - out[..., :1]


def partial_sum_update(R_upper, R_lower, gamma: int, gf: FieldSpec):
    """Re-encode one kernel: (upper, lower) -> (upper + gamma * lower, lower)."""
    R_upper = np.asarray(R_upper)
    R_lower = np.asarray(R_lower)
    up = R_upper ^ gf.mul_table[gamma][R_lower]
    return (int(up), int(R_lower)) if up.ndim == 0 else (up, R_lower)


def path_metric_update(rho_prev, decision_llrs, eta):
    """rho + L[eta] - min L. Broadcasts over leading axes."""
    L = np.asarray(decision_llrs, dtype=np.float64)
    eta = np.asarray(eta)
    inc = np.take_along_axis(L, eta[..., None], axis=-1)[..., 0] - L.min(axis=-1)
    out = rho_prev + inc
    return float(out) if np.ndim(out) == 0 else out


def lazy_decision(decision_llrs):
    """Hard decision argmin_theta L[theta]; ties go to the smallest field value."""
    out = np.argmin(np.asarray(decision_llrs), axis=-1)
    return int(out) if np.ndim(out) == 0 else out


def position_types(n_sym: int, info_set, lazy_set=()) -> np.ndarray:
    info_set = np.asarray(info_set, dtype=np.int64)
    lazy_set = np.asarray(sorted(lazy_set), dtype=np.int64)
    types = np.full(n_sym, FROZEN, dtype=np.int8)
    types[info_set] = SPLIT
    if lazy_set.size:
        if not np.isin(lazy_set, info_set).all():
            raise ValueError("lazy positions must be information positions")
        types[lazy_set] = LAZY
    return types


class SCTree:
    """Lane-parallel state of the SC schedule on the polar factor graph.

    ``llr[d]`` has shape (B, lanes, N' / 2^d, q); ``left[d]`` holds the re-encoded
    result of the most recently finished left child at depth d.
    """

    def __init__(self, channel_llr, lanes: int, gamma: int, gf: FieldSpec, ops: OpCount | None = None):
        channel_llr = np.asarray(channel_llr, dtype=np.float64)
        B, n, q = channel_llr.shape
        if q != gf.q:
            raise ValueError(f"symbol LLRs have {q} columns, field has {gf.q} elements")
        if n < 1 or n & (n - 1):
            raise ValueError(f"code length {n} is not a power of two")
        self.B, self.n, self.q, self.lanes = B, n, q, lanes
        self.omega = n.bit_length() - 1
        self.gamma, self.gf, self.ops = gamma, gf, ops
        self.llr = [np.broadcast_to(channel_llr[:, None], (B, lanes, n, q))]
        self.llr += [np.zeros((B, lanes, n >> d, q)) for d in range(1, self.omega + 1)]
        self.left = [None] + [np.zeros((B, lanes, n >> d), dtype=np.int64) for d in range(1, self.omega + 1)]
        self.codeword = None

    def _charge_nodes(self, size):
        if self.ops is not None:
            cnt = self.B * self.lanes * size
            self.ops.charge(add=(2 * self.q + 1) * cnt, cmp=2 * (self.q - 1) * cnt)

    def descend(self, i: int) -> np.ndarray:
        """Bring the LLRs down to leaf ``i``; returns (B, lanes, q)."""
        omega = self.omega
        if i == 0:
            start = 1
        else:
            tz = (i & -i).bit_length() - 1
            d = omega - tz
            parent = self.llr[d - 1]
            s = parent.shape[2] // 2
            self.llr[d][...] = g_update(parent[:, :, :s], parent[:, :, s:], self.left[d], self.gamma, self.gf)
            self._charge_nodes(s)
            start = d + 1
        for d in range(start, omega + 1):
            parent = self.llr[d - 1]
            s = parent.shape[2] // 2
            self.llr[d][...] = f_update(parent[:, :, :s], parent[:, :, s:], self.gamma, self.gf)
            self._charge_nodes(s)
        return self.llr[omega][:, :, 0, :]

    def ascend(self, i: int, decision) -> None:
        """Feed the leaf decision (B, lanes) back through the partial sums."""
        r = np.asarray(decision, dtype=np.int64)[..., None]
        d = self.omega
        mul_g = self.gf.mul_table[self.gamma]
        while d > 0 and (i >> (self.omega - d)) & 1:
            up = self.left[d] ^ mul_g[r]
            r = np.concatenate([up, r], axis=-1)
            if self.ops is not None:
                self.ops.charge(xor=self.B * self.lanes * up.shape[-1])
            d -= 1
        if d > 0:
            self.left[d][...] = r
        else:
            self.codeword = r

    def select_lanes(self, parent) -> None:
        """Re-point every lane at ``parent[b, lane]`` (path cloning with copy semantics)."""
        rows = np.arange(self.B)[:, None]
        for d in range(1, self.omega + 1):
            self.llr[d] = self.llr[d][rows, parent]
            self.left[d] = self.left[d][rows, parent]


@dataclass
class DecodeResult:
    paths: np.ndarray       # (B, n_paths, N') estimated a'
    codewords: np.ndarray   # (B, n_paths, N') re-encoded c'
    metrics: np.ndarray     # (B, n_paths)
    crc_ok: np.ndarray      # (B, n_paths) bool
    selected: np.ndarray    # (B,) chosen path index
    info_bits: np.ndarray   # (B, n_paths, D) CRC-extended info bits of each path
    search_paths: int       # per decode
    splits: int             # list expansions (levels where paths were split)

    @property
    def n_paths(self) -> int:
        return self.paths.shape[1]

    def selected_bits(self, crc_len: int) -> np.ndarray:
        """(B, A) information bits of the chosen path of each decode."""
        rows = np.arange(self.selected.size)
        return self.info_bits[rows, self.selected, :-crc_len]

    def code_bits(self, gf: FieldSpec) -> np.ndarray:
        return symbols_to_bits(self.codewords, gf).astype(np.int8)


def nbscl_decode(sym_llrs, info_set, list_size: int, gamma: int, gf: FieldSpec, crc_len: int | None,
                 lazy_set=(), ops: OpCount | None = None) -> DecodeResult:
    """(Lazy-search) NB-SCL decoding of one or more codewords.

    ``sym_llrs`` is (N', q) or (B, N', q). Frozen symbols are zero and charged the
    usual metric burden; positions in ``lazy_set`` are decided by argmin with no
    split and no metric change; other information positions split into q children
    and keep the best ``min(l, q * live)`` candidates. Ties keep the lower lane,
    then the smaller symbol. The selected path is the smallest-metric path passing
    the CRC, or the smallest-metric path if none passes (or no CRC is given).
    """
    if list_size < 1:
        raise ConfigError(f"list_size: must be >= 1, got {list_size}")
    sym_llrs = np.asarray(sym_llrs, dtype=np.float64)
    single = sym_llrs.ndim == 2
    if single:
        sym_llrs = sym_llrs[None]
    B, n, q = sym_llrs.shape
    info_set = np.sort(np.asarray(info_set, dtype=np.int64))
    types = position_types(n, info_set, lazy_set)
    lanes = list_size
    tree = SCTree(sym_llrs, lanes, gamma, gf, ops)

    dec = np.zeros((B, lanes, n), dtype=np.int64)
    metric = np.zeros((B, lanes))
    live = 1
    search_paths = 0
    splits = 0
    rows = np.arange(B)[:, None]

    for i in range(n):
        L = tree.descend(i)                      # (B, lanes, q)
        Lmin = L.min(axis=-1)
        kind = types[i]
        if kind == FROZEN:
            metric = metric + (L[..., 0] - Lmin)
            search_paths += live
        elif kind == LAZY:
            dec[:, :, i] = np.argmin(L, axis=-1)
            search_paths += live
        else:
            cand = metric[..., None] + (L - Lmin[..., None])         # (B, lanes, q)
            cand[:, live:, :] = np.inf
            keep = min(lanes, q * live)
            order = np.argsort(cand.reshape(B, lanes * q), axis=1, kind="stable")[:, :keep]
            if keep < lanes:
                order = np.concatenate([order, np.repeat(order[:, :1], lanes - keep, axis=1)], axis=1)
            parent, sym = np.divmod(order, q)
            metric = cand.reshape(B, lanes * q)[rows, order]
            dec = dec[rows, parent]
            dec[:, :, i] = sym
            tree.select_lanes(parent)
            search_paths += q * live
            splits += 1
            live = keep
        tree.ascend(i, dec[:, :, i])

    if ops is not None:
        ops.charge(add=2 * B * search_paths, cmp=(q - 1) * B * search_paths)

    paths = dec[:, :live]
    codewords = tree.codeword[:, :live]
    metrics = metric[:, :live]
    info_bits = symbols_to_bits(paths[..., info_set], gf).astype(np.int8)
    if crc_len:
        crc_ok = crc_check(info_bits, crc_len)
        crc_ok = np.asarray(crc_ok).reshape(B, live)
    else:
        crc_ok = np.zeros((B, live), dtype=bool)
    masked = np.where(crc_ok, metrics, np.inf)
    selected = np.where(crc_ok.any(axis=1), np.argmin(masked, axis=1), np.argmin(metrics, axis=1))
    return DecodeResult(paths, codewords, metrics, crc_ok, selected, info_bits, search_paths, splits)


def search_path_count(n_sym: int, info_set, list_size: int, q: int, lazy_set=()) -> int:
    """Search paths of one decode; depends only on the position types, list size and q."""
    live, total = 1, 0
    for kind in position_types(n_sym, info_set, lazy_set):
        if kind == SPLIT:
            total += q * live
            live = min(list_size, q * live)
        else:
            total += live
    return total


def nbsc_decode(sym_llrs, info_set, gamma: int, gf: FieldSpec) -> np.ndarray:
    """Plain successive cancellation (list size one, no lazy set); returns a' estimates."""
    res = nbscl_decode(sym_llrs, info_set, 1, gamma, gf, None)
    out = res.paths[:, 0]
    return out[0] if np.asarray(sym_llrs).ndim == 2 else out


def info_symbols_to_bits(a_hat, info_set, gf: FieldSpec) -> np.ndarray:
    return symbols_to_bits(np.asarray(a_hat)[..., np.sort(info_set)], gf).astype(np.int8)


__all__ = [
    "FROZEN", "SPLIT", "LAZY", "f_update", "g_update", "partial_sum_update", "path_metric_update",
    "lazy_decision", "position_types", "SCTree", "DecodeResult", "nbscl_decode", "nbsc_decode",
    "info_symbols_to_bits", "search_path_count",
]
