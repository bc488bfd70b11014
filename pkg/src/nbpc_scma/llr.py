"""Soft-information conversions between SCMA codewords, bits and GF(q) symbols.

Sign conventions: a bit LLR is ln P(0)/P(1), so positive favours 0. A symbol LLR
vector holds ln P(0)/P(theta) for every field element theta, so entry 0 is always
zero and the most likely symbol has the smallest entry.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import softmax

from .config import ConfigError
from .gf import FieldSpec
from .txchain import deinterleave, interleave

DEFAULT_CLIP = 1e30


@lru_cache(maxsize=None)
def label_bits(M: int) -> np.ndarray:
    """(M, R) table of label bits, MSB first; row m is the bit group mapped to codeword m."""
    R = M.bit_length() - 1
    bits = (np.arange(M)[:, None] >> np.arange(R - 1, -1, -1)[None, :]) & 1
    bits.setflags(write=False)
    return bits


def scma_to_bit_llr(Q) -> np.ndarray:
    """Max-log bit LLRs from codeword log-likelihoods: (..., M) -> (..., R)."""
    Q = np.asarray(Q, dtype=np.float64)
    bits = label_bits(Q.shape[-1])
    out = np.empty(Q.shape[:-1] + (bits.shape[1],))
    for r in range(bits.shape[1]):
        zero = bits[:, r] == 0
        out[..., r] = Q[..., zero].max(axis=-1) - Q[..., ~zero].max(axis=-1)
    return out


def user_bit_llrs(Q) -> np.ndarray:
    """(J, E, M) codeword likelihoods -> (J, N) extrinsic bit LLRs in transmit order."""
    L = scma_to_bit_llr(Q)
    return L.reshape(L.shape[0], -1)


def deinterleave_llr(L, perm) -> np.ndarray:
    return deinterleave(L, perm)


def interleave_llr(L, perm) -> np.ndarray:
    return interleave(L, perm)


def bits_to_symbol_llr(bit_llrs, gf: FieldSpec) -> np.ndarray:
    """Group p bit LLRs per symbol and form L'(theta) = sum of LLRs of theta's one-bits.

    (..., p N') -> (..., N', q). Column 0 is exactly zero.
    """
    bit_llrs = np.asarray(bit_llrs, dtype=np.float64)
    n = bit_llrs.shape[-1]
    if n % gf.p:
        raise ValueError(f"{n} bit LLRs do not group into {gf.p}-bit symbols")
    groups = bit_llrs.reshape(*bit_llrs.shape[:-1], n // gf.p, gf.p)
    return groups @ gf.bit_table.T.astype(np.float64)


def reconstruct_extrinsic(code_bits, metrics, selected, clip: float = DEFAULT_CLIP) -> np.ndarray:
    """Decoder extrinsic bit LLRs from the surviving list.

    ``code_bits``: (..., n_paths, N) 0/1, ``metrics``: (..., n_paths), ``selected``: (...)
    index of the chosen path. Path weights are a softmax of the negated metrics; the
    magnitude of the resulting bit LLR is kept and its sign taken from the selected path.
    An unanimous bit gets magnitude ``clip``.
    """
    code_bits = np.asarray(code_bits)
    metrics = np.asarray(metrics, dtype=np.float64)
    selected = np.asarray(selected)
    delta = softmax(-metrics, axis=-1)
    p1 = (delta[..., None] * code_bits).sum(axis=-2)
    p0 = (delta[..., None] * (1 - code_bits)).sum(axis=-2)
    with np.errstate(divide="ignore"):
        L = np.log(p0) - np.log(p1)
    L = np.where(p0 <= 0, -clip, L)
    L = np.where(p1 <= 0, clip, L)
    L = np.clip(L, -clip, clip)
    chosen = np.take_along_axis(code_bits, selected[..., None, None], axis=-2)[..., 0, :]
    return (1 - 2 * chosen.astype(np.float64)) * np.abs(L)


def damp(L, epsilon: float) -> np.ndarray:
    if not 0 < epsilon <= 1:
        raise ConfigError(f"epsilon: damping factor must be in (0, 1], got {epsilon}")
    return epsilon * np.asarray(L, dtype=np.float64)


def bit_llr_to_scma_prior(L) -> np.ndarray:
    """Max-log codeword log-priors from bit LLRs: (..., R) -> (..., M)."""
    L = np.asarray(L, dtype=np.float64)
    R = L.shape[-1]
    bits = label_bits(1 << R).astype(np.float64)           # (M, R)
    per_bit = np.maximum(0.0, L)[..., None, :]              # (..., 1, R)
    return ((1.0 - bits) * L[..., None, :] - per_bit).sum(axis=-1)


def user_priors(L_ap, R: int) -> np.ndarray:
    """(J, N) interleaved a priori bit LLRs -> (J, E, M) SCMA priors, shared by all resources."""
    L_ap = np.asarray(L_ap, dtype=np.float64)
    return bit_llr_to_scma_prior(L_ap.reshape(L_ap.shape[0], -1, R))
