"""Per-user transmitter: CRC, symbol placement, non-binary polar encoding,
bit mapping, interleaving and SCMA mapping."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .codebook import Codebook
from .config import SystemConfig
from .gf import FieldSpec, bits_to_symbols, symbols_to_bits

# Generator polynomials with the leading term; init 0, no reflection, MSB first.
CRC_POLYS = {16: 0x11021, 24: 0x1864CFB}


def crc_remainder(bits, crc_len: int) -> np.ndarray:
    """Bitwise shift-register CRC of ``bits``; returns ``crc_len`` bits, MSB first."""
    if crc_len not in CRC_POLYS:
        raise ValueError(f"unsupported CRC length {crc_len}")
    poly = CRC_POLYS[crc_len]
    mask = (1 << crc_len) - 1
    top = crc_len - 1
    reg = 0
    for b in np.asarray(bits, dtype=np.int64).ravel():
        fb = int(b) ^ ((reg >> top) & 1)
        reg = (reg << 1) & mask
        if fb:
            reg ^= poly & mask
    return np.array([(reg >> (top - i)) & 1 for i in range(crc_len)], dtype=np.int8)


@lru_cache(maxsize=None)
def _crc_matrix(n_bits: int, crc_len: int) -> np.ndarray:
    # The zero-init CRC is linear, so row i is the CRC of the i-th unit vector.
    eye = np.eye(n_bits, dtype=np.int8)
    mat = np.stack([crc_remainder(row, crc_len) for row in eye]) if n_bits else np.zeros((0, crc_len), np.int8)
    mat.setflags(write=False)
    return mat


def crc_encode(u, crc_len: int) -> np.ndarray:
    u = np.asarray(u, dtype=np.int8)
    parity = (u.astype(np.int64) @ _crc_matrix(u.shape[-1], crc_len)) & 1
    return np.concatenate([u, parity.astype(np.int8)], axis=-1)


def crc_check(b, crc_len: int):
    """True where the trailing ``crc_len`` bits match the CRC of the rest.

    Accepts a single bit vector or a batch along leading axes.
    """
    b = np.asarray(b, dtype=np.int8)
    a = b.shape[-1] - crc_len
    parity = (b[..., :a].astype(np.int64) @ _crc_matrix(a, crc_len)) & 1
    ok = (parity == b[..., a:]).all(axis=-1)
    return bool(ok) if ok.ndim == 0 else ok


def place_symbols(info_symbols, info_set, n_sym: int) -> np.ndarray:
    info_symbols = np.asarray(info_symbols, dtype=np.int64)
    info_set = np.asarray(info_set, dtype=np.int64)
    if info_symbols.shape[-1] != info_set.size:
        raise ValueError(f"{info_symbols.shape[-1]} info symbols for an information set of size {info_set.size}")
    a = np.zeros(info_symbols.shape[:-1] + (n_sym,), dtype=np.int64)
    a[..., np.sort(info_set)] = info_symbols
    return a


def extract_symbols(a, info_set) -> np.ndarray:
    return np.asarray(a)[..., np.sort(np.asarray(info_set, dtype=np.int64))]


def polar_encode(a, gamma: int, gf: FieldSpec) -> np.ndarray:
    """c' = a' G_2^{(x)omega} over GF(q), G_2 = [[1, 0], [gamma, 1]]; batched over leading axes."""
    x = np.array(a, dtype=np.int64, copy=True)
    n = x.shape[-1]
    if n & (n - 1):
        raise ValueError(f"code length {n} is not a power of two")
    mul_g = gf.mul_table[gamma]
    lead = x.shape[:-1]
    h = n // 2
    while h >= 1:
        v = x.reshape(*lead, n // (2 * h), 2, h)
        v[..., 0, :] ^= mul_g[v[..., 1, :]]
        h //= 2
    return x


def polar_generator_matrix(n: int, gamma: int, gf: FieldSpec) -> np.ndarray:
    """Dense G_2^{(x)omega}, built by explicit Kronecker products over GF(q)."""
    g2 = np.array([[1, 0], [gamma, 1]], dtype=np.int64)
    g = np.array([[1]], dtype=np.int64)
    while g.shape[0] < n:
        m = g.shape[0]
        out = np.zeros((2 * m, 2 * m), dtype=np.int64)
        for r in range(2):
            for c in range(2):
                out[r * m:(r + 1) * m, c * m:(c + 1) * m] = gf.mul_table[g2[r, c], g]
        g = out
    return g


def bit_map(symbols, gf: FieldSpec) -> np.ndarray:
    return symbols_to_bits(symbols, gf).astype(np.int8)


def interleaver(n: int, seed: int, user: int) -> np.ndarray:
    """Per-user permutation, deterministic in (seed, user). ``d = c[perm]``."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, user])))
    return rng.permutation(n)


def interleave(c, perm) -> np.ndarray:
    return np.asarray(c)[..., perm]


def deinterleave(d, perm) -> np.ndarray:
    d = np.asarray(d)
    out = np.empty_like(d)
    out[..., perm] = d
    return out


def bits_to_labels(d, R: int) -> np.ndarray:
    d = np.asarray(d)
    if d.shape[-1] % R:
        raise ValueError(f"{d.shape[-1]} bits do not split into {R}-bit groups")
    groups = d.reshape(*d.shape[:-1], d.shape[-1] // R, R).astype(np.int64)
    return (groups << np.arange(R - 1, -1, -1)).sum(axis=-1)


def scma_encode(d, codebook: Codebook, user: int) -> np.ndarray:
    """Map R-bit groups (MSB first, label = value) to K-dim codewords, shape (E, K)."""
    return codebook.labels_to_codewords(user, bits_to_labels(d, codebook.R))


@dataclass
class Frame:
    u: np.ndarray       # (J, A) info bits
    b: np.ndarray       # (J, D) CRC-extended bits
    b_sym: np.ndarray   # (J, D') info symbols
    a_sym: np.ndarray   # (J, N') symbols with frozen zeros
    c_sym: np.ndarray   # (J, N') coded symbols
    c: np.ndarray       # (J, N) coded bits
    d: np.ndarray       # (J, N) interleaved bits
    x: np.ndarray       # (J, E, K) SCMA codewords


def user_interleavers(cfg: SystemConfig) -> np.ndarray:
    return np.stack([interleaver(cfg.N, cfg.interleaver_seed, j) for j in range(cfg.J)])


def encode_frame(u, cfg: SystemConfig, codebook: Codebook, info_set, perms=None) -> Frame:
    """Run the full transmitter chain for all J users."""
    gf = cfg.field
    u = np.asarray(u, dtype=np.int8)
    if u.shape != (cfg.J, cfg.A):
        raise ValueError(f"expected info bits of shape {(cfg.J, cfg.A)}, got {u.shape}")
    if perms is None:
        perms = user_interleavers(cfg)
    b = crc_encode(u, cfg.crc_len)
    b_sym = bits_to_symbols(b, gf)
    a_sym = place_symbols(b_sym, info_set, cfg.n_sym)
    c_sym = polar_encode(a_sym, cfg.gamma, gf)
    c = bit_map(c_sym, gf)
    d = np.stack([interleave(c[j], perms[j]) for j in range(cfg.J)])
    x = np.stack([scma_encode(d[j], codebook, j) for j in range(cfg.J)])
    return Frame(u, b, b_sym, a_sym, c_sym, c, d, x)
