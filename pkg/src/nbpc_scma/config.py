"""System and receiver configuration, plus the flat ``key = value`` file format."""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path

from .gf import FieldSpec, field_from_order


class ConfigError(ValueError):
    """Invalid or inconsistent configuration. The message names the offending key."""


CRC_LENGTHS = (16, 24)


@dataclass(frozen=True)
class SystemConfig:
    J: int = 6
    K: int = 4
    M: int = 4
    q: int = 16
    n_sym: int = 64                 # N', code length in field symbols
    rate: Fraction = Fraction(1, 2)  # R_c = D / N
    crc_len: int = 16
    gamma: int = 2                  # kernel element; 2 is alpha under the default polynomials
    prim_poly: int | None = None
    interleaver_seed: int = 2023
    channel: str = "awgn"

    def __post_init__(self):
        object.__setattr__(self, "rate", Fraction(self.rate))
        self.validate()

    def validate(self):
        if self.J < 1:
            raise ConfigError("J: need at least one user")
        if self.K < 1:
            raise ConfigError("K: need at least one resource")
        if self.M < 2 or self.M & (self.M - 1):
            raise ConfigError(f"M: modulation order must be a power of two >= 2, got {self.M}")
        if self.q < 2 or self.q & (self.q - 1) or self.q > 256:
            raise ConfigError(f"q: field order must be a power of two in [2, 256], got {self.q}")
        if self.n_sym < 2 or self.n_sym & (self.n_sym - 1):
            raise ConfigError(f"n_sym: N' must be a power of two >= 2, got {self.n_sym}")
        if self.crc_len not in CRC_LENGTHS:
            raise ConfigError(f"crc_len: supported CRC lengths are {CRC_LENGTHS}, got {self.crc_len}")
        if not 0 < self.rate <= 1:
            raise ConfigError(f"rate: must be in (0, 1], got {self.rate}")
        d = self.rate * self.N
        if d.denominator != 1:
            raise ConfigError(f"rate: R_c * N = {d} is not an integer")
        if int(d) % self.p:
            raise ConfigError(f"rate: D = {int(d)} is not a multiple of p = {self.p}")
        if self.A <= 0:
            raise ConfigError(f"rate: D = {self.D} leaves no room for info bits after a {self.crc_len}-bit CRC")
        if self.N % self.R:
            raise ConfigError(f"M: log2 M = {self.R} does not divide N = {self.N}")
        if not 0 < self.gamma < self.q:
            raise ConfigError(f"gamma: must be a nonzero element of GF({self.q}), got {self.gamma}")
        if self.channel not in ("awgn", "rayleigh"):
            raise ConfigError(f"channel: expected 'awgn' or 'rayleigh', got {self.channel!r}")

    @property
    def field(self) -> FieldSpec:
        return field_from_order(self.q, self.prim_poly)

    @property
    def p(self) -> int:
        return self.q.bit_length() - 1

    @property
    def omega(self) -> int:
        return self.n_sym.bit_length() - 1

    @property
    def N(self) -> int:
        return self.p * self.n_sym

    @property
    def D(self) -> int:
        return int(self.rate * self.N)

    @property
    def A(self) -> int:
        return self.D - self.crc_len

    @property
    def d_sym(self) -> int:
        return self.D // self.p

    @property
    def R(self) -> int:
        return self.M.bit_length() - 1

    @property
    def E(self) -> int:
        return self.N // self.R

    @property
    def overload(self) -> Fraction:
        return Fraction(self.J, self.K)


@dataclass(frozen=True)
class ReceiverConfig:
    algorithm: str = "nsd"          # nsd | isd
    T: int = 5
    epsilon: float = 0.4
    list_size: int = 8
    g_th: float | None = None       # lazy threshold for isd; None keeps the construction's own set
    early_termination: bool = True
    llr_clip: float = 1e30          # finite stand-in for +-inf in messages and extrinsic LLRs

    def __post_init__(self):
        if self.algorithm not in ("nsd", "isd"):
            raise ConfigError(f"algorithm: expected 'nsd' or 'isd', got {self.algorithm!r}")
        if self.T < 1:
            raise ConfigError(f"T: need at least one iteration, got {self.T}")
        if not 0 < self.epsilon <= 1:
            raise ConfigError(f"epsilon: damping factor must be in (0, 1], got {self.epsilon}")
        if self.list_size < 1:
            raise ConfigError(f"list_size: must be >= 1, got {self.list_size}")
        if not self.llr_clip > 0:
            raise ConfigError("llr_clip: must be positive")

    @property
    def lazy(self) -> bool:
        return self.algorithm == "isd"


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def _parse_optional_float(text: str):
    return None if text.lower() in ("none", "") else float(text)


def _parse_int(text: str) -> int:
    return int(text, 0)


_SYSTEM_PARSERS = {
    "J": _parse_int, "K": _parse_int, "M": _parse_int, "q": _parse_int,
    "n_sym": _parse_int, "rate": Fraction, "crc_len": _parse_int, "gamma": _parse_int,
    "prim_poly": _parse_int, "interleaver_seed": _parse_int, "channel": str.lower,
}
_RECEIVER_PARSERS = {
    "algorithm": str.lower, "T": _parse_int, "epsilon": float, "list_size": _parse_int,
    "g_th": _parse_optional_float, "early_termination": _parse_bool, "llr_clip": float,
}
_ALIASES = {"N_prime": "n_sym", "l": "list_size", "R_c": "rate", "et": "early_termination",
            "eps": "epsilon", "seed": "interleaver_seed"}


def parse_config(text: str, source: str = "<config>") -> tuple[SystemConfig, ReceiverConfig]:
    """Parse flat ``key = value`` lines (``#`` starts a comment)."""
    sys_kw, rx_kw = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key in _SYSTEM_PARSERS:
            parser, target = _SYSTEM_PARSERS[key], sys_kw
        elif key in _RECEIVER_PARSERS:
            parser, target = _RECEIVER_PARSERS[key], rx_kw
        else:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            target[key] = parser(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {value!r}") from exc
    return SystemConfig(**sys_kw), ReceiverConfig(**rx_kw)


def load_config(path) -> tuple[SystemConfig, ReceiverConfig]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    return parse_config(path.read_text(), str(path))


def dump_config(sys_cfg: SystemConfig, rx_cfg: ReceiverConfig) -> str:
    lines = []
    for obj in (sys_cfg, rx_cfg):
        for f in fields(obj):
            value = getattr(obj, f.name)
            if value is None and f.name == "prim_poly":
                continue
            lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


__all__ = ["ConfigError", "SystemConfig", "ReceiverConfig", "parse_config", "load_config",
           "dump_config", "replace"]
