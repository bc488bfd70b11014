"""Non-binary polar coded SCMA uplink: transmitter, channel, joint iterative receivers,
operation counting and latency model."""
from .codebook import Codebook, load_codebook
from .config import ConfigError, ReceiverConfig, SystemConfig, load_config, parse_config
from .construction import CodeConstruction, load_construction, monte_carlo_construct, save_construction
from .gf import FieldSpec, field_for, field_from_order
from .metrics import BerCounter, ComplexityParams, OpCount, latency_model, table5_closed_form
from .polar import DecodeResult, nbscl_decode
from .receiver import IterationTrace, Receiver, early_termination_check
from .sim import simulate_point

__all__ = [
    "Codebook", "load_codebook", "ConfigError", "ReceiverConfig", "SystemConfig", "load_config",
    "parse_config", "CodeConstruction", "load_construction", "monte_carlo_construct", "save_construction",
    "FieldSpec", "field_for", "field_from_order", "BerCounter", "ComplexityParams", "OpCount",
    "latency_model", "table5_closed_form", "DecodeResult", "nbscl_decode", "IterationTrace", "Receiver",
    "early_termination_check", "simulate_point",
]
