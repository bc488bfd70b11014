"""SCMA codebooks: indicator matrix, per-user sparse codewords, factor-graph sets."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np


class CodebookError(ValueError):
    pass


class Codebook:
    """Per-user codeword sets for a regular SCMA factor graph.

    ``W[j, k, m]`` is entry ``k`` of codeword ``m`` (0-based label) of user ``j``;
    rows with ``F[k, j] == 0`` are zero. On construction every user is rescaled so
    the mean codeword energy equals ``d_u`` (unit energy per occupied resource).
    """

    def __init__(self, F, W, normalize: bool = True):
        F = np.asarray(F, dtype=np.int64)
        W = np.asarray(W, dtype=np.complex128)
        if F.ndim != 2 or not np.isin(F, (0, 1)).all():
            raise CodebookError("indicator matrix F must be a 2-D 0/1 array")
        K, J = F.shape
        if W.ndim != 3 or W.shape[:2] != (J, K):
            raise CodebookError(f"codewords must have shape (J, K, M) = ({J}, {K}, M), got {W.shape}")
        M = W.shape[2]
        if M < 2 or M & (M - 1):
            raise CodebookError(f"codebook size M must be a power of two, got {M}")
        col, row = F.sum(axis=0), F.sum(axis=1)
        if (col == 0).any() or (row == 0).any():
            raise CodebookError("every user needs a resource and every resource a user")
        if len(set(col)) != 1 or len(set(row)) != 1:
            raise CodebookError(f"irregular indicator matrix: column weights {col}, row weights {row}")
        if np.abs(W[F.T == 0]).max(initial=0.0) > 0:
            raise CodebookError("codewords have nonzero entries outside the user's resources")

        energy = (np.abs(W) ** 2).sum(axis=1).mean(axis=1)   # per user
        if (energy == 0).any():
            raise CodebookError("a user's codebook has zero energy")
        self.d_u = int(col[0])
        self.d_r = int(row[0])
        if normalize:
            W = W * np.sqrt(self.d_u / energy)[:, None, None]
        self.F = F
        self.W = W
        self.K, self.J, self.M = K, J, M
        self.R = M.bit_length() - 1

        self.users_of = [np.flatnonzero(F[k]) for k in range(K)]       # R(k)
        self.resources_of = [np.flatnonzero(F[:, j]) for j in range(J)]  # U(j)
        # Edges sorted by resource, then user; used for message storage.
        self.edges = np.array([(k, j) for k in range(K) for j in self.users_of[k]], dtype=np.int64)
        self.edge_index = {(int(k), int(j)): i for i, (k, j) in enumerate(self.edges)}
        self.edges_of_resource = np.array(
            [[self.edge_index[(k, int(j))] for j in self.users_of[k]] for k in range(K)], dtype=np.int64)
        self.edges_of_user = np.array(
            [[self.edge_index[(int(k), j)] for k in self.resources_of[j]] for j in range(J)], dtype=np.int64)
        # Codeword entries on each edge: (n_edges, M)
        self.edge_symbols = W[self.edges[:, 1], self.edges[:, 0], :]

    @property
    def energy_per_codeword(self) -> np.ndarray:
        return (np.abs(self.W) ** 2).sum(axis=1).mean(axis=1)

    @property
    def E_cw(self) -> float:
        return float(self.energy_per_codeword.mean())

    def labels_to_codewords(self, user: int, labels) -> np.ndarray:
        """(E,) integer labels -> (E, K) complex codewords."""
        return self.W[user][:, np.asarray(labels)].T

    def __repr__(self):
        return f"Codebook(J={self.J}, K={self.K}, M={self.M}, d_u={self.d_u}, d_r={self.d_r})"


def parse_codebook(text: str, source: str = "<codebook>") -> Codebook:
    tokens = []
    for line in text.splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    try:
        K, J, M = (int(t) for t in tokens[:3])
        pos = 3
        F = np.array([int(t) for t in tokens[pos:pos + K * J]], dtype=np.int64).reshape(K, J)
        pos += K * J
        vals = np.array([float(t) for t in tokens[pos:]], dtype=np.float64)
    except ValueError as exc:
        raise CodebookError(f"{source}: malformed codebook ({exc})") from exc
    expected = J * M * K * 2
    if vals.size != expected:
        raise CodebookError(f"{source}: expected {expected} codeword reals for K={K}, J={J}, M={M}, got {vals.size}")
    cw = vals.reshape(J, M, K, 2)
    W = (cw[..., 0] + 1j * cw[..., 1]).transpose(0, 2, 1)
    return Codebook(F, W)


def load_codebook(path=None) -> Codebook:
    """Load a codebook file; with no path, the bundled (6, 4, 4) codebook."""
    if path is None:
        text = resources.files("nbpc_scma.data").joinpath("codebook_6_4_4.txt").read_text()
        return parse_codebook(text, "codebook_6_4_4.txt")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"codebook file not found: {path}")
    return parse_codebook(path.read_text(), str(path))


def format_codebook(cb: Codebook) -> str:
    lines = [f"{cb.K} {cb.J} {cb.M}"]
    lines += [" ".join(str(v) for v in row) for row in cb.F]
    for j in range(cb.J):
        lines.append(f"# user {j + 1}")
        for m in range(cb.M):
            lines.append("  ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in cb.W[j, :, m]))
    return "\n".join(lines) + "\n"
