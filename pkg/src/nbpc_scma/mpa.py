"""Max-log MPA on the SCMA factor graph.

Messages live on the edges of the graph (``codebook.edges``) and are stored for
all E codeword positions at once: arrays of shape ``(E, n_edges, M)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import Codebook
from .metrics import OpCount

DEFAULT_CLIP = 1e30
_N0_FLOOR = 1e-12   # keeps psi finite for noiseless runs


@dataclass
class MessageState:
    r2u: np.ndarray   # xi_{k->j}: (E, n_edges, M)
    u2r: np.ndarray   # xi_{j->k}: (E, n_edges, M)
    mu: np.ndarray    # a priori log-likelihoods per user: (J, E, M)

    @classmethod
    def initial(cls, codebook: Codebook, E: int) -> "MessageState":
        n_edges = len(codebook.edges)
        M = codebook.M
        return cls(np.zeros((E, n_edges, M)), np.zeros((E, n_edges, M)),
                   np.full((codebook.J, E, M), np.log(1.0 / M)))


def un_update(state: MessageState, codebook: Codebook, clip: float = DEFAULT_CLIP,
              ops: OpCount | None = None) -> np.ndarray:
    """UN update with max-subtraction normalisation; writes and returns ``state.u2r``."""
    u2r = np.empty_like(state.r2u)
    for j, user_edges in enumerate(codebook.edges_of_user):
        for ei in user_edges:
            acc = state.mu[j].copy()
            for other in user_edges:
                if other != ei:
                    acc += state.r2u[:, other, :]
            u2r[:, ei, :] = acc - acc.max(axis=1, keepdims=True)
    np.maximum(u2r, -clip, out=u2r)
    state.u2r = u2r
    if ops is not None:
        E, M, du = state.r2u.shape[0], codebook.M, codebook.d_u
        n_edges = len(codebook.edges)
        ops.charge(add=E * n_edges * M * du, cmp=E * n_edges * M * (M - 1))
    return u2r


def _rn_core(codebook: Codebook, y, h, n0, incoming, clip, ops):
    """Shared RN kernel. ``incoming[k]`` lists the d_r message arrays (E, M) on resource k."""
    E = y.shape[0]
    M, dr = codebook.M, codebook.d_r
    n0 = max(float(n0), _N0_FLOOR)
    r2u = np.empty((E, len(codebook.edges), M))
    for k in range(codebook.K):
        users = codebook.users_of[k]
        # Superposed noiseless signal for every joint hypothesis: (E, M, ..., M)
        s = np.zeros((E,) + (1,) * dr, dtype=np.complex128)
        for slot, j in enumerate(users):
            shape = [E] + [1] * dr
            shape[slot + 1] = M
            s = s + (h[j, :, k][:, None] * codebook.W[j, k, :][None, :]).reshape(shape)
        diff = y[:, k].reshape((E,) + (1,) * dr) - s
        psi = -(diff.real ** 2 + diff.imag ** 2) / n0
        msgs = incoming[k]
        for slot, ei in enumerate(codebook.edges_of_resource[k]):
            total = psi
            for other, msg in enumerate(msgs):
                if other != slot:
                    shape = [E] + [1] * dr
                    shape[other + 1] = M
                    total = total + msg.reshape(shape)
            axes = tuple(a + 1 for a in range(dr) if a != slot)
            r2u[:, ei, :] = total.max(axis=axes) if axes else total
    np.maximum(r2u, -clip, out=r2u)
    if ops is not None:
        n_edges = len(codebook.edges)
        hyp = M ** dr
        ops.charge(add=E * n_edges * hyp * 2 * dr, mul=E * n_edges * hyp * (dr + 3),
                   cmp=E * n_edges * M * (M ** (dr - 1) - 1))
    return r2u


def rn_update(state: MessageState, codebook: Codebook, y, h, n0, clip: float = DEFAULT_CLIP,
              ops: OpCount | None = None) -> np.ndarray:
    """Standard max-log RN update from the stored UN messages; writes ``state.r2u``.

    ``y`` is (E, K) and ``h`` is (J, E, K).
    """
    incoming = [[state.u2r[:, ei, :] for ei in codebook.edges_of_resource[k]] for k in range(codebook.K)]
    state.r2u = _rn_core(codebook, np.asarray(y), np.asarray(h), n0, incoming, clip, ops)
    return state.r2u


def modified_rn_update(state: MessageState, codebook: Codebook, y, h, n0, clip: float = DEFAULT_CLIP,
                       ops: OpCount | None = None) -> np.ndarray:
    """RN update driven directly by the a priori log-likelihoods (no UN stage, no normalisation)."""
    incoming = [[state.mu[j] for j in codebook.users_of[k]] for k in range(codebook.K)]
    state.r2u = _rn_core(codebook, np.asarray(y), np.asarray(h), n0, incoming, clip, ops)
    return state.r2u


def user_output(state: MessageState, codebook: Codebook, ops: OpCount | None = None) -> np.ndarray:
    """Q_j(m) = sum of the RN messages into user j; shape (J, E, M)."""
    Q = state.r2u[:, codebook.edges_of_user, :].sum(axis=2)   # (E, J, M)
    if ops is not None:
        E = state.r2u.shape[0]
        ops.charge(add=E * codebook.J * codebook.M * (codebook.d_u - 1))
    return Q.transpose(1, 0, 2)


def detect(state: MessageState, codebook: Codebook, y, h, n0, algorithm: str = "nsd",
           clip: float = DEFAULT_CLIP, ops: OpCount | None = None) -> np.ndarray:
    """One detection pass (a single inner iteration); returns Q."""
    if algorithm == "nsd":
        un_update(state, codebook, clip, ops)
        rn_update(state, codebook, y, h, n0, clip, ops)
    elif algorithm == "isd":
        modified_rn_update(state, codebook, y, h, n0, clip, ops)
    else:
        raise ValueError(f"unknown detector variant {algorithm!r}")
    return user_output(state, codebook, ops)
