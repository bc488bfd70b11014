"""Operation counting, closed-form complexity, clock-cycle latency and BER bookkeeping.

Counting granularity (per outer iteration, matching the receiver complexity table):

* one RN hypothesis on one edge: ``2 d_r`` ADD and ``d_r + 3`` MUL; the max over the
  ``M^(d_r-1)`` hypotheses of each label: ``M^(d_r-1) - 1`` CMP;
* one UN edge update: ``M d_u`` ADD (sum, normalisation) and ``M (M - 1)`` CMP;
* one user soft output: ``M (d_u - 1)`` ADD;
* one polar LLR node element (f or g) on one list lane: ``2q + 1`` ADD and ``2(q - 1)`` CMP;
  GF multiplications there are exponent additions, hence ADD;
* one partial-sum element on one lane: 1 XOR;
* one search path (a metric evaluation or lazy decision): 2 ADD and ``q - 1`` CMP.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from fractions import Fraction
import math

import numpy as np
from scipy.stats import binomtest

SCHEMES = ("nsd", "isd", "jidd", "cajids")


@dataclass
class OpCount:
    add: int = 0
    mul: int = 0
    cmp: int = 0
    xor: int = 0
    exp: int = 0

    def charge(self, add=0, mul=0, cmp=0, xor=0, exp=0):
        self.add += add
        self.mul += mul
        self.cmp += cmp
        self.xor += xor
        self.exp += exp

    def __add__(self, other: "OpCount") -> "OpCount":
        return OpCount(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    def __iadd__(self, other: "OpCount") -> "OpCount":
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self

    def as_tuple(self):
        return (self.add, self.mul, self.cmp, self.xor, self.exp)

    @property
    def total(self):
        return sum(self.as_tuple())


@dataclass
class ComplexityParams:
    E: int
    K: int
    J: int
    M: int
    d_r: int
    d_u: int
    N: int
    n_sym: int
    q: int
    l: int
    tp: Fraction | int = 0    # search paths per user decode (NB-SCL or L-NB-SCL)
    tp0: Fraction | int = 0   # search paths per user for binary SCL (CAJIDS)

    @classmethod
    def from_system(cls, cfg, codebook, list_size, tp=0, tp0=0):
        return cls(E=cfg.E, K=cfg.K, J=cfg.J, M=cfg.M, d_r=codebook.d_r, d_u=codebook.d_u,
                   N=cfg.N, n_sym=cfg.n_sym, q=cfg.q, l=list_size, tp=tp, tp0=tp0)


def _exact(x):
    x = Fraction(x)
    return int(x) if x.denominator == 1 else x


def table5_closed_form(scheme: str, prm: ComplexityParams) -> OpCount:
    """Per-outer-iteration operation counts of the four receivers."""
    E, K, J, M, dr, du = prm.E, prm.K, prm.J, prm.M, prm.d_r, prm.d_u
    q, l, Np, N = prm.q, prm.l, prm.n_sym, prm.N
    nlog = Np * int(math.log2(Np))
    Nlog = N * int(math.log2(N))
    tp, tp0 = Fraction(prm.tp), Fraction(prm.tp0)
    Mdr = M ** dr
    if scheme == "nsd":
        add = E * (2 * K * dr ** 2 * Mdr + J * M * (du ** 2 + du - 1)) + J * ((2 * q + 1) * l * nlog + 2 * tp)
        mul = E * K * dr * Mdr * (dr + 3)
        cmp = E * K * dr * M * (M ** (dr - 1) + M - 2) + J * (2 * (q - 1) * l * nlog + (q - 1) * tp)
        xor = Fraction(J * l * nlog, 2)
        exp = 0
    elif scheme == "isd":
        add = E * (2 * K * dr ** 2 * Mdr + J * M * (du - 1)) + J * ((2 * q + 1) * l * nlog + 2 * tp)
        mul = E * K * dr * Mdr * (dr + 3)
        cmp = E * K * dr * M * (M ** (dr - 1) - 1) + J * (2 * (q - 1) * l * nlog + (q - 1) * tp)
        xor = Fraction(J * l * nlog, 2)
        exp = 0
    elif scheme == "jidd":
        add = E * K * dr * (Mdr * (dr + 2) - 1) + 2 * J * Nlog
        mul = E * (K * dr * (M * (du - 1) + Mdr * (2 * dr + 4)) + J * M * (du - 1)) + 4 * J * Nlog
        cmp = 6 * J * Nlog
        xor = 0
        exp = E * K * dr * Mdr
    elif scheme == "cajids":
        add = E * K * dr * (Mdr * (dr + 2) - 1) + J * (Fraction(l * Nlog, 2) + tp0)
        mul = E * (K * dr * (M * (du - 1) + Mdr * (2 * dr + 4)) + J * M * (du - 1)) + J * l * Nlog
        cmp = J * (2 * l * Nlog + tp0)
        xor = Fraction(J * l * Nlog, 2)
        exp = E * K * dr * Mdr
    else:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return OpCount(*(_exact(v) for v in (add, mul, cmp, xor, exp)))


# ---------------------------------------------------------------- latency

def gamma_scl(N: int, D: int) -> int:
    """Clock cycles of a binary SCL decode: 2N - 2 for SC plus D for sorting."""
    return 2 * N - 2 + D


def gamma_jidd(T: int, N: int, t_scan: int = 1) -> int:
    return T * t_scan * (2 * N - 2)


def gamma_cajids(n_t, d_t) -> int:
    n_t, d_t = list(n_t), list(d_t)
    if len(n_t) != len(d_t):
        raise ValueError("N_t and D_t must cover the same iterations")
    return sum(2 * n - 2 + d for n, d in zip(n_t, d_t))


def gamma_isd(t_a: float, p: int, N: int, D: int, beta: float) -> float:
    """Cycles of the lazy-search receiver: T_a (2N' - 2 + (1 - beta) D')."""
    return t_a / p * (2 * N - 2 * p + (1 - beta) * D)


def latency_gain(gamma_x: float, T: int, N: int, D: int) -> float:
    base = T * gamma_scl(N, D)
    return (base - gamma_x) / base


@dataclass
class LatencyReport:
    gamma_scl: int
    baseline: int
    gamma_jidd: int
    gamma_isd: float
    gain_jidd: float
    gain_isd: float
    gamma_cajids: int | None = None
    gain_cajids: float | None = None


def latency_model(T: int, N: int, D: int, p: int, t_a: float, beta: float,
                  n_t=None, d_t=None) -> LatencyReport:
    g_scl = gamma_scl(N, D)
    g_jidd = gamma_jidd(T, N)
    g_isd = gamma_isd(t_a, p, N, D, beta)
    rep = LatencyReport(g_scl, T * g_scl, g_jidd, g_isd,
                        latency_gain(g_jidd, T, N, D), latency_gain(g_isd, T, N, D))
    if n_t is not None and d_t is not None:
        rep.gamma_cajids = gamma_cajids(n_t, d_t)
        rep.gain_cajids = latency_gain(rep.gamma_cajids, T, N, D)
    return rep


# ---------------------------------------------------------------- error rates

@dataclass
class BerCounter:
    bit_errors: int = 0
    bits: int = 0
    frame_errors: int = 0
    frames: int = 0

    def update(self, truth, decisions):
        truth = np.asarray(truth)
        decisions = np.asarray(decisions)
        if truth.shape != decisions.shape:
            raise ValueError(f"shape mismatch: truth {truth.shape} vs decisions {decisions.shape}")
        errs = int(np.count_nonzero(truth != decisions))
        self.bit_errors += errs
        self.bits += truth.size
        self.frame_errors += int(errs > 0)
        self.frames += 1
        return self

    def merge(self, other: "BerCounter") -> "BerCounter":
        return BerCounter(self.bit_errors + other.bit_errors, self.bits + other.bits,
                          self.frame_errors + other.frame_errors, self.frames + other.frames)

    __add__ = merge

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else float("nan")

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else float("nan")

    def wilson_interval(self, confidence: float = 0.95):
        if not self.bits:
            return (0.0, 1.0)
        ci = binomtest(self.bit_errors, self.bits).proportion_ci(confidence_level=confidence, method="wilson")
        return (ci.low, ci.high)
