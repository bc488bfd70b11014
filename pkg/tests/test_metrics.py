from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from nbpc_scma.channel import draw_channel, ebn0_to_n0, transmit
from nbpc_scma.codebook import load_codebook
from nbpc_scma.config import ReceiverConfig, SystemConfig
from nbpc_scma.construction import monte_carlo_construct
from nbpc_scma.metrics import (BerCounter, ComplexityParams, OpCount, gamma_cajids, gamma_isd, gamma_jidd,
                               gamma_scl, latency_gain, latency_model, table5_closed_form)
from nbpc_scma.polar import search_path_count
from nbpc_scma.receiver import Receiver
from nbpc_scma.txchain import encode_frame

CODEBOOK = load_codebook()


def params(**kw):
    base = dict(E=1, K=4, J=6, M=4, d_r=3, d_u=2, N=256, n_sym=64, q=16, l=8, tp=0)
    base.update(kw)
    return ComplexityParams(**base)


def test_opcount_arithmetic():
    a = OpCount(1, 2, 3, 4, 5)
    b = OpCount(add=10)
    assert (a + b).as_tuple() == (11, 2, 3, 4, 5)
    a += b
    assert a.add == 11 and a.total == 25
    a.charge(xor=1)
    assert a.xor == 5


def test_closed_form_detector_terms():
    prm = params()
    nsd = table5_closed_form("nsd", prm)
    isd = table5_closed_form("isd", prm)
    assert nsd.mul == isd.mul == 4608
    assert nsd.exp == isd.exp == 0
    assert nsd.xor == isd.xor == Fraction(6 * 8 * 64 * 6, 2)
    # The modified RN drops the UN edge updates: M d_u J E ADD and M (M - 1) K d_r E CMP.
    assert nsd.add - isd.add == 6 * 4 * (2 * 2)
    assert nsd.cmp - isd.cmp == 4 * 3 * 4 * 3


def test_closed_form_decoder_terms_scale_with_search_paths():
    a = table5_closed_form("isd", params(tp=100))
    b = table5_closed_form("isd", params(tp=150))
    assert b.add - a.add == 6 * 2 * 50
    assert b.cmp - a.cmp == 6 * 15 * 50


def test_closed_form_baselines():
    prm = params(tp0=Fraction(7, 2))
    assert table5_closed_form("jidd", prm).exp == 4 * 3 * 64
    assert table5_closed_form("cajids", prm).xor == 6 * 8 * 256 * 8 // 2
    with pytest.raises(ValueError, match="unknown scheme"):
        table5_closed_form("turbo", prm)


def _one_iteration_ops(cfg, algorithm, g_th):
    constr = monte_carlo_construct(cfg, 2.0, trials=200, seed=1)
    rx = ReceiverConfig(algorithm=algorithm, T=2, g_th=g_th, early_termination=False)
    receiver = Receiver(cfg, rx, CODEBOOK, constr)
    rng = np.random.default_rng(0)
    u = rng.integers(0, 2, size=(cfg.J, cfg.A))
    fr = encode_frame(u, cfg, CODEBOOK, receiver.info_set)
    chan = draw_channel("awgn", cfg.J, cfg.E, cfg.K, rng, ebn0_to_n0(1.0, cfg, CODEBOOK))
    _, trace = receiver.run_frame(transmit(fr.x, chan, rng), chan.h, chan.n0)
    tp = search_path_count(cfg.n_sym, receiver.info_set, rx.list_size, cfg.q, receiver.lazy_set)
    assert trace.search_paths == [tp, tp]
    expected = table5_closed_form(algorithm, ComplexityParams.from_system(cfg, CODEBOOK, rx.list_size, tp=tp))
    return trace.ops, expected, receiver


@pytest.mark.parametrize("n_sym", [64, 256])
@pytest.mark.parametrize("algorithm", ["nsd", "isd"])
def test_instrumented_counts_equal_closed_form(n_sym, algorithm):
    cfg = SystemConfig(q=16, n_sym=n_sym)
    ops, expected, receiver = _one_iteration_ops(cfg, algorithm, 0.05)
    for per_iter in ops:
        assert per_iter.as_tuple() == expected.as_tuple()
        assert per_iter.exp == 0
    if algorithm == "isd":
        assert receiver.lazy_set.size > 0


def test_lazy_search_reduces_decoder_work():
    cfg = SystemConfig(q=16, n_sym=64)
    nsd, _, _ = _one_iteration_ops(cfg, "nsd", 0.05)
    isd, _, _ = _one_iteration_ops(cfg, "isd", 0.05)
    assert isd[0].add < nsd[0].add and isd[0].cmp < nsd[0].cmp
    assert isd[0].mul == nsd[0].mul


def test_latency_examples():
    assert gamma_scl(256, 128) == 638
    rep = latency_model(5, 256, 128, 4, 1.55, 0.719)
    assert rep.baseline == 3190
    assert rep.gamma_jidd == 5 * 510
    assert rep.gain_jidd == pytest.approx(128 / 638)
    assert round(100 * rep.gain_jidd, 2) == 20.06
    assert rep.gamma_isd == pytest.approx(1.55 / 4 * (512 - 8 + 0.281 * 128))
    assert rep.gain_isd == pytest.approx(0.9344, abs=1e-4)


def test_isd_without_lazy_search_or_field_grouping_is_the_binary_case():
    # p = 1 and beta = 0 collapse to T_a (2N - 2 + D).
    assert gamma_isd(3.0, 1, 256, 128, 0.0) == 3 * gamma_scl(256, 128)
    assert latency_gain(5 * gamma_scl(256, 128), 5, 256, 128) == 0.0


@pytest.mark.parametrize("t_a", [1.0, 1.55, 3.2, 5.0])
def test_latency_decreases_in_beta(t_a):
    values = [gamma_isd(t_a, 4, 256, 128, b) for b in np.linspace(0, 1, 11)]
    assert all(x > y for x, y in zip(values, values[1:]))


def test_cajids_latency():
    assert gamma_cajids([256, 256], [128, 64]) == 638 + 574
    with pytest.raises(ValueError):
        gamma_cajids([256], [128, 64])
    rep = latency_model(2, 256, 128, 4, 2.0, 0.5, n_t=[256, 256], d_t=[128, 64])
    assert rep.gamma_cajids == 1212
    assert gamma_jidd(2, 256, t_scan=2) == 2 * 2 * 510


def test_ber_counter(rng):
    c = BerCounter()
    truth = rng.integers(0, 2, size=100)
    c.update(truth, truth)
    assert c.bit_errors == 0 and c.frame_errors == 0 and c.ber == 0
    c.update(truth, 1 - truth)
    assert c.bit_errors == 100 and c.frame_errors == 1 and c.ber == 0.5 and c.fer == 0.5
    flips = rng.random(100) < 0.2
    d = BerCounter().update(truth, truth ^ flips)
    assert d.bit_errors == flips.sum()
    with pytest.raises(ValueError, match="shape"):
        c.update(truth, truth[:-1])
    m = c.merge(d)
    assert (m.bits, m.frames, m.bit_errors) == (300, 3, 100 + flips.sum())
    assert np.isnan(BerCounter().ber)


def test_wilson_interval():
    c = BerCounter(bit_errors=10, bits=1000)
    lo, hi = c.wilson_interval()
    # Closed-form Wilson score interval at z = 1.959964.
    z, n, ph = 1.959963984540054, 1000, 0.01
    centre = (ph + z * z / (2 * n)) / (1 + z * z / n)
    half = z * np.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / (1 + z * z / n)
    assert lo == pytest.approx(centre - half, rel=1e-9)
    assert hi == pytest.approx(centre + half, rel=1e-9)
    assert BerCounter().wilson_interval() == (0.0, 1.0)
