"""Arithmetic over GF(2^p) with log/antilog tables.

Field elements are plain integers in ``[0, q)``; the integer's binary digits are
the polynomial coefficients, highest degree first. That MSB-first reading is the
bit <-> symbol map used by the whole transmit/receive chain.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

# Primitive polynomials (bit masks, including the x^p term).
DEFAULT_PRIM_POLY = {
    1: 0b11,
    2: 0b111,          # x^2 + x + 1
    3: 0b1011,         # x^3 + x + 1
    4: 0b10011,        # x^4 + x + 1
    5: 0b100101,       # x^5 + x^2 + 1
    6: 0b1000011,      # x^6 + x + 1
    7: 0b10001001,     # x^7 + x^3 + 1
    8: 0b100011101,    # x^8 + x^4 + x^3 + x^2 + 1
}


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """GF(2^p) description. Immutable once built."""

    p: int
    prim_poly: int
    q: int = field(init=False)
    alpha: int = field(init=False)
    log_table: np.ndarray = field(init=False, repr=False)
    antilog_table: np.ndarray = field(init=False, repr=False)
    mul_table: np.ndarray = field(init=False, repr=False)
    inv_table: np.ndarray = field(init=False, repr=False)
    bit_table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.p <= 8:
            raise ValueError(f"p must be in 1..8, got {self.p}")
        q = 1 << self.p
        if not (q <= self.prim_poly < 2 * q):
            raise ValueError(f"prim_poly {self.prim_poly:#x} has wrong degree for p={self.p}")
        antilog = np.zeros(q - 1, dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            if log[x] != -1:
                raise ValueError(f"polynomial {self.prim_poly:#x} is not primitive")
            antilog[i] = x
            log[x] = i
            x <<= 1
            if x & q:
                x ^= self.prim_poly
        if x != 1:
            raise ValueError(f"polynomial {self.prim_poly:#x} is not primitive")

        mul = np.zeros((q, q), dtype=np.int64)
        nz = np.arange(1, q)
        mul[1:, 1:] = antilog[(log[nz][:, None] + log[nz][None, :]) % (q - 1)]
        inv = np.zeros(q, dtype=np.int64)
        inv[1:] = antilog[(-log[nz]) % (q - 1)]
        shifts = np.arange(self.p - 1, -1, -1)
        bits = (np.arange(q)[:, None] >> shifts[None, :]) & 1

        for name, arr in (("log_table", log), ("antilog_table", antilog),
                          ("mul_table", mul), ("inv_table", inv), ("bit_table", bits)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "alpha", int(antilog[1 % (q - 1)]) if q > 2 else 1)

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and (self.p, self.prim_poly) == (other.p, other.prim_poly)

    def __hash__(self):
        return hash((self.p, self.prim_poly))

    def add(self, a, b):
        return gf_add(a, b, self)

    def mul(self, a, b):
        return gf_mul(a, b, self)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in GF(q)")
        return int(self.inv_table[a])

    def power(self, k: int) -> int:
        """alpha ** k."""
        return int(self.antilog_table[k % (self.q - 1)])


@lru_cache(maxsize=None)
def field_for(p: int, prim_poly: int | None = None) -> FieldSpec:
    return FieldSpec(p, DEFAULT_PRIM_POLY[p] if prim_poly is None else prim_poly)


def field_from_order(q: int, prim_poly: int | None = None) -> FieldSpec:
    p = q.bit_length() - 1
    if q < 2 or (1 << p) != q:
        raise ValueError(f"field order must be a power of two, got {q}")
    return field_for(p, prim_poly)


def gf_add(a, b, spec: FieldSpec | None = None):
    # Characteristic 2: addition is XOR. Works on ints and integer arrays.
    return np.bitwise_xor(a, b) if isinstance(a, np.ndarray) or isinstance(b, np.ndarray) else a ^ b


def gf_mul(a, b, spec: FieldSpec):
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return spec.mul_table[a, b]
    if a == 0 or b == 0:
        return 0
    return int(spec.antilog_table[(spec.log_table[a] + spec.log_table[b]) % (spec.q - 1)])


def symbol_to_bits(theta: int, spec: FieldSpec) -> np.ndarray:
    if not 0 <= theta < spec.q:
        raise ValueError(f"{theta} is not an element of GF({spec.q})")
    return spec.bit_table[theta].copy()


def bits_to_symbol(bits, spec: FieldSpec) -> int:
    bits = np.asarray(bits)
    if bits.shape != (spec.p,):
        raise ValueError(f"expected {spec.p} bits, got shape {bits.shape}")
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def symbols_to_bits(symbols, spec: FieldSpec) -> np.ndarray:
    """Bit-map a symbol array along its last axis (N' symbols -> pN' bits)."""
    symbols = np.asarray(symbols)
    bits = spec.bit_table[symbols]
    return bits.reshape(*symbols.shape[:-1], symbols.shape[-1] * spec.p)


def bits_to_symbols(bits, spec: FieldSpec) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.shape[-1] % spec.p:
        raise ValueError(f"bit length {bits.shape[-1]} is not a multiple of p={spec.p}")
    groups = bits.reshape(*bits.shape[:-1], bits.shape[-1] // spec.p, spec.p)
    weights = 1 << np.arange(spec.p - 1, -1, -1)
    return (groups.astype(np.int64) * weights).sum(axis=-1)
