"""Synchronous uplink superposition channel (AWGN or fast Rayleigh fading)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import Codebook
from .config import SystemConfig


@dataclass
class ChannelRealization:
    h: np.ndarray   # (J, E, K) complex gains, known to the receiver
    n0: float       # complex noise variance per resource element


def ebn0_to_n0(ebn0_db: float, cfg: SystemConfig, codebook: Codebook) -> float:
    """Noise power for a given Eb/N0, with Eb = E_cw / (R * R_c) per information bit."""
    eb = codebook.E_cw / (cfg.R * float(cfg.rate))
    return eb / 10.0 ** (ebn0_db / 10.0)


def draw_channel(model: str, J: int, E: int, K: int, rng: np.random.Generator, n0: float = 0.0) -> ChannelRealization:
    if model == "awgn":
        h = np.ones((J, E, K), dtype=np.complex128)
    elif model == "rayleigh":
        # CN(0, 1), independent per user, codeword and resource.
        h = (rng.standard_normal((J, E, K)) + 1j * rng.standard_normal((J, E, K))) / np.sqrt(2.0)
    else:
        raise ValueError(f"unknown channel model {model!r}")
    return ChannelRealization(h, n0)


def transmit(x_all, chan: ChannelRealization, rng: np.random.Generator | None = None) -> np.ndarray:
    """y_e = sum_j diag(h_{j,e}) x_{j,e} + z_e, z_e ~ CN(0, N0 I_K). Returns (E, K)."""
    x_all = np.asarray(x_all)
    if x_all.shape != chan.h.shape:
        raise ValueError(f"signal shape {x_all.shape} does not match channel {chan.h.shape}")
    y = (chan.h * x_all).sum(axis=0)
    if chan.n0 > 0:
        if rng is None:
            raise ValueError("a random generator is required when n0 > 0")
        sigma = np.sqrt(chan.n0 / 2.0)
        y = y + sigma * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return y
