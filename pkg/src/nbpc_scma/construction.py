"""Monte-Carlo code construction: information set, lazy set, per-position error rates."""
from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .codebook import Codebook
from .config import ConfigError, SystemConfig
from .polar import SCTree

LLR_SOURCES = ("scma", "bpsk")


@dataclass(frozen=True)
class CodeConstruction:
    q: int
    n_sym: int
    d_sym: int
    g: np.ndarray              # (N',) genie-aided symbol error rate of every position
    g_th: float
    ebn0_db: float = float("nan")
    channel: str = "awgn"
    trials: int = 0
    seed: int = 0
    source: str = "bpsk"

    def __post_init__(self):
        g = np.asarray(self.g, dtype=np.float64)
        if g.shape != (self.n_sym,):
            raise ValueError(f"expected {self.n_sym} error rates, got shape {g.shape}")
        if not 0 < self.d_sym <= self.n_sym:
            raise ValueError(f"d_sym must be in (0, {self.n_sym}], got {self.d_sym}")
        object.__setattr__(self, "g", g)

    @property
    def info_set(self) -> np.ndarray:
        """D' most reliable positions; equal error rates favour the larger index."""
        idx = np.arange(self.n_sym)
        order = np.lexsort((-idx, self.g))
        return np.sort(order[: self.d_sym])

    @property
    def lazy_set(self) -> np.ndarray:
        a = self.info_set
        return a[self.g[a] <= self.g_th]

    @property
    def beta(self) -> float:
        return len(self.lazy_set) / self.d_sym

    def with_threshold(self, g_th: float) -> "CodeConstruction":
        return replace(self, g_th=float(g_th))

    def matches(self, cfg: SystemConfig) -> bool:
        return (self.q, self.n_sym, self.d_sym) == (cfg.q, cfg.n_sym, cfg.d_sym)


def format_construction(c: CodeConstruction) -> str:
    lines = [
        f"q = {c.q}", f"n_sym = {c.n_sym}", f"d_sym = {c.d_sym}", f"ebn0_db = {float(c.ebn0_db)!r}",
        f"channel = {c.channel}", f"trials = {c.trials}", f"seed = {c.seed}", f"g_th = {float(c.g_th)!r}",
        f"source = {c.source}", "# index g in_info in_lazy",
    ]
    a = set(c.info_set.tolist())
    b = set(c.lazy_set.tolist())
    for i, gi in enumerate(c.g):
        lines.append(f"{i} {float(gi)!r} {int(i in a)} {int(i in b)}")
    return "\n".join(lines) + "\n"


def parse_construction(text: str, source: str = "<construction>") -> CodeConstruction:
    header, rows = {}, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, value = (s.strip() for s in line.split("=", 1))
            header[key] = value
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ConfigError(f"{source}:{lineno}: expected 'index g in_info in_lazy'")
        rows.append((int(parts[0]), float(parts[1]), int(parts[2]), int(parts[3])))
    try:
        n_sym = int(header["n_sym"])
        c = CodeConstruction(
            q=int(header["q"]), n_sym=n_sym, d_sym=int(header["d_sym"]),
            g=np.zeros(n_sym), g_th=float(header["g_th"]), ebn0_db=float(header.get("ebn0_db", "nan")),
            channel=header.get("channel", "awgn"), trials=int(header.get("trials", 0)),
            seed=int(header.get("seed", 0)), source=header.get("source", "bpsk"))
    except KeyError as exc:
        raise ConfigError(f"{source}: missing header key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ConfigError(f"{source}: bad header value ({exc})") from None
    if sorted(r[0] for r in rows) != list(range(n_sym)):
        raise ConfigError(f"{source}: expected one row per position 0..{n_sym - 1}")
    g = np.zeros(n_sym)
    for i, gi, _, _ in rows:
        g[i] = gi
    c = replace(c, g=g)
    in_a = sorted(r[0] for r in rows if r[2])
    in_b = sorted(r[0] for r in rows if r[3])
    if in_a != c.info_set.tolist() or in_b != c.lazy_set.tolist():
        raise ConfigError(f"{source}: listed sets disagree with the error rates and threshold")
    return c


def load_construction(path) -> CodeConstruction:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"construction file not found: {path}")
    return parse_construction(path.read_text(), str(path))


def save_construction(c: CodeConstruction, path) -> None:
    Path(path).write_text(format_construction(c))


def _scma_symbol_llrs(a, cfg: SystemConfig, codebook: Codebook, ebn0_db, channel, rng):
    """Symbol LLRs after one detection pass, for (n_frames * J, N') random input vectors ``a``."""
    from .channel import draw_channel, ebn0_to_n0, transmit
    from .llr import bits_to_symbol_llr, deinterleave_llr, user_bit_llrs
    from .mpa import MessageState, detect
    from .txchain import bit_map, interleave, polar_encode, scma_encode, user_interleavers

    gf = cfg.field
    J = cfg.J
    perms = user_interleavers(cfg)
    n0 = ebn0_to_n0(ebn0_db, cfg, codebook) if np.isfinite(ebn0_db) else 0.0
    out = np.empty(a.shape + (gf.q,))
    for f in range(a.shape[0] // J):
        rows = slice(f * J, (f + 1) * J)
        c = bit_map(polar_encode(a[rows], cfg.gamma, gf), gf)
        x = np.stack([scma_encode(interleave(c[j], perms[j]), codebook, j) for j in range(J)])
        chan = draw_channel(channel, J, cfg.E, cfg.K, rng, n0)
        y = transmit(x, chan, rng)
        Q = detect(MessageState.initial(codebook, cfg.E), codebook, y, chan.h, chan.n0)
        L = user_bit_llrs(Q)
        L = np.stack([deinterleave_llr(L[j], perms[j]) for j in range(J)])
        out[rows] = bits_to_symbol_llr(L, gf)
    return out


def _bpsk_symbol_llrs(a, cfg: SystemConfig, ebn0_db, channel, rng):
    """Symbol LLRs of the code bits sent as BPSK at the same Eb/N0 (real noise variance 1/(2 R_c Eb/N0))."""
    from .llr import bits_to_symbol_llr
    from .txchain import bit_map, polar_encode

    gf = cfg.field
    c = bit_map(polar_encode(a, cfg.gamma, gf), gf)
    s = 1.0 - 2.0 * c
    if not np.isfinite(ebn0_db):
        return bits_to_symbol_llr(s * 1e6, gf)
    sigma2 = 1.0 / (2.0 * float(cfg.rate) * 10.0 ** (ebn0_db / 10.0))
    amp = np.ones_like(s)
    if channel == "rayleigh":
        amp = np.abs(rng.standard_normal(s.shape) + 1j * rng.standard_normal(s.shape)) / np.sqrt(2.0)
    y = amp * s + np.sqrt(sigma2) * rng.standard_normal(s.shape)
    return bits_to_symbol_llr(2.0 * amp * y / sigma2, gf)


def genie_error_counts(sym_llrs, a, gamma: int, gf) -> np.ndarray:
    """Per-position count of wrong hard decisions when SC is fed the true symbols."""
    sym_llrs = np.asarray(sym_llrs)
    tree = SCTree(sym_llrs, 1, gamma, gf)
    errors = np.zeros(sym_llrs.shape[1], dtype=np.int64)
    for i in range(sym_llrs.shape[1]):
        L = tree.descend(i)[:, 0]
        errors[i] = np.count_nonzero(np.argmin(L, axis=1) != a[:, i])
        tree.ascend(i, a[:, i][:, None])
    return errors


def monte_carlo_construct(cfg: SystemConfig, ebn0_db: float, channel: str = "awgn", trials: int = 10_000,
                          g_th: float = 0.0, seed: int = 0, codebook: Codebook | None = None,
                          source: str = "bpsk", chunk: int = 1200) -> CodeConstruction:
    """Estimate genie-aided per-position symbol error rates and derive the code sets.

    Each trial is one user codeword with uniformly random symbols on every position.
    ``source`` selects how the decoder input LLRs are produced: one SCMA detection pass
    over the configured codebook (``scma``), or BPSK over the same Eb/N0 (``bpsk``).
    ``ebn0_db = inf`` gives the noiseless limit.
    """
    if trials <= 0:
        raise ConfigError(f"trials: need at least one Monte-Carlo trial, got {trials}")
    if source not in LLR_SOURCES:
        raise ConfigError(f"source: expected one of {LLR_SOURCES}, got {source!r}")
    if channel not in ("awgn", "rayleigh"):
        raise ConfigError(f"channel: expected 'awgn' or 'rayleigh', got {channel!r}")
    if source == "scma" and codebook is None:
        from .codebook import load_codebook
        codebook = load_codebook()
    gf = cfg.field
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    errors = np.zeros(cfg.n_sym, dtype=np.int64)
    chunk = max(cfg.J, chunk - chunk % cfg.J)
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        n_gen = -(-n // cfg.J) * cfg.J if source == "scma" else n
        a = rng.integers(0, gf.q, size=(n_gen, cfg.n_sym))
        if source == "scma":
            llr = _scma_symbol_llrs(a, cfg, codebook, ebn0_db, channel, rng)
        else:
            llr = _bpsk_symbol_llrs(a, cfg, ebn0_db, channel, rng)
        errors += genie_error_counts(llr[:n], a[:n], cfg.gamma, gf)
        done += n
    return CodeConstruction(q=cfg.q, n_sym=cfg.n_sym, d_sym=cfg.d_sym, g=errors / trials, g_th=float(g_th),
                            ebn0_db=float(ebn0_db), channel=channel, trials=trials, seed=seed, source=source)
