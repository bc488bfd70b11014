"""End-to-end acceptance checks. Each test records one PASS/FAIL line that is
printed in the terminal summary; the assertion then enforces the stated tolerance."""
from __future__ import annotations

import itertools

import numpy as np
import pytest

from conftest import record
from oracles import Field, f_bruteforce, g_probability, sc_decode
from nbpc_scma.codebook import load_codebook
from nbpc_scma.config import ReceiverConfig, SystemConfig
from nbpc_scma.construction import monte_carlo_construct
from nbpc_scma.gf import field_for
from nbpc_scma.llr import bits_to_symbol_llr
from nbpc_scma.metrics import ComplexityParams, latency_model, table5_closed_form
from nbpc_scma.mpa import rn_update
from nbpc_scma.polar import f_update, g_update, nbsc_decode, nbscl_decode, search_path_count
from nbpc_scma.receiver import Receiver
from nbpc_scma.sim import simulate_point
from nbpc_scma.txchain import polar_encode, polar_generator_matrix

import test_llr
import test_mpa

CODEBOOK = load_codebook()
CFG = SystemConfig()                 # J=6, K=4, M=4, q=16, N=256, R_c=1/2, CRC-16
ISD_G_TH = 0.5e-3                    # lazy threshold for q=16, N=256, R_c=1/2
SEED = 2024


@pytest.fixture(scope="module")
def construction():
    return monte_carlo_construct(CFG, 2.0, trials=10_000, seed=0)


def verdict(criterion, ok, detail):
    record(criterion, bool(ok), detail)
    assert ok, detail


# ---------------------------------------------------------------- 1


def test_criterion_1_zero_noise_loopback(construction):
    details, ok = [], True
    for algorithm in ("nsd", "isd"):
        rx = ReceiverConfig(algorithm=algorithm, g_th=ISD_G_TH)
        res = simulate_point(CFG, rx, CODEBOOK, construction, 0.0, 100, seed=SEED, zero_noise=True,
                             keep_outcomes=True)
        iters = {o.iterations for o in res.outcomes}
        ok &= res.counter.bit_errors == 0 and iters == {1} and res.frames == 100
        details.append(f"{algorithm}: {res.frames} frames, {res.counter.bit_errors} bit errors, iterations {sorted(iters)}")
    verdict("1", ok, "; ".join(details))


# ---------------------------------------------------------------- 2


def test_criterion_2a_butterfly_equals_dense_generator():
    rng = np.random.default_rng(1)
    ok, count = True, 0
    for p, n in itertools.product((2, 4), (2, 4, 8)):
        gf = field_for(p)
        a = rng.integers(0, gf.q, size=(1000, n))
        gammas = rng.integers(1, gf.q, size=1000)
        for gamma in np.unique(gammas):
            rows = a[gammas == gamma]
            G = polar_generator_matrix(n, int(gamma), gf)
            dense = np.zeros_like(rows)
            for j, i in itertools.product(range(n), range(n)):
                dense[:, j] ^= gf.mul_table[rows[:, i], G[i, j]]
            ok &= np.array_equal(polar_encode(rows, int(gamma), gf), dense)
            count += len(rows)
    verdict("2a", ok, f"{count} vectors over N' in {{2,4,8}}, GF(4) and GF(16), exact")


def test_criterion_2b_kernel_updates_match_oracles():
    rng = np.random.default_rng(2)
    gf = field_for(2)
    F = Field(gf.p, gf.prim_poly)
    worst = 0.0
    for _ in range(10_000):
        gamma, R = int(rng.integers(1, 4)), int(rng.integers(4))
        La, Lb = rng.normal(scale=3, size=(2, 4))
        La -= La[0]
        Lb -= Lb[0]
        worst = max(worst, np.abs(f_update(La, Lb, gamma, gf) - f_bruteforce(La, Lb, gamma, F)).max(),
                    np.abs(g_update(La, Lb, R, gamma, gf) - g_probability(La, Lb, R, gamma, F)).max())
    verdict("2b", worst < 1e-9, f"10^4 GF(4) draws, worst |difference| = {worst:.2e} (tolerance 1e-9)")


def test_criterion_2c_list_one_equals_sc():
    rng = np.random.default_rng(3)
    bad = 0
    for trial in range(1000):
        gf = field_for(2 if trial % 2 else 4)
        F = Field(gf.p, gf.prim_poly)
        n = (2, 4, 8, 16)[trial % 4]
        info = np.sort(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False))
        gamma = int(rng.integers(1, gf.q))
        L = rng.normal(scale=3, size=(n, gf.q))
        L -= L[:, :1]
        ref, _ = sc_decode(L.tolist(), [i not in set(info.tolist()) for i in range(n)], gamma, F)
        bad += nbsc_decode(L, info, gamma, gf).tolist() != ref
    verdict("2c", bad == 0, f"1000 trials, N' <= 16, {bad} mismatches")


def test_criterion_2d_lazy_with_empty_set_is_list_decoding():
    rng = np.random.default_rng(4)
    gf = CFG.field
    constr_info = np.sort(rng.choice(64, size=32, replace=False))
    bad = 0
    for _ in range(200):
        L = rng.normal(scale=4, size=(6, 64, 16))
        L -= L[..., :1]
        a = nbscl_decode(L, constr_info, 8, 2, gf, 16)
        b = nbscl_decode(L, constr_info, 8, 2, gf, 16, lazy_set=np.array([], dtype=int))
        same = (np.array_equal(a.paths, b.paths) and np.array_equal(a.metrics, b.metrics)
                and a.search_paths == b.search_paths == search_path_count(64, constr_info, 8, 16))
        bad += not same
    verdict("2d", bad == 0, f"200 batches of 6 decodes, paths/metrics/T_p identical, {bad} mismatches")


def test_criterion_2e_symbol_conversion_matches_probability_product():
    rng = np.random.default_rng(5)
    worst = 0.0
    for p in (1, 2, 3, 4):
        gf = field_for(p)
        bit_llr = rng.normal(scale=5.0, size=(10_000, p))
        Lsym = bits_to_symbol_llr(bit_llr, gf)[:, 0]
        p0 = 1.0 / (1.0 + np.exp(-bit_llr))
        prob = np.prod(np.where(gf.bit_table[None] == 0, p0[:, None, :], 1.0 - p0[:, None, :]), axis=2)
        prob /= prob.sum(1, keepdims=True)
        w = np.exp(-(Lsym - Lsym.min(1, keepdims=True)))
        w /= w.sum(1, keepdims=True)
        worst = max(worst, np.abs(w - prob).max())
    verdict("2e", worst < 1e-9, f"10^4 draws for each p <= 4, worst normalised-probability error {worst:.2e}")


def test_criterion_2f_rn_update_matches_enumeration():
    rng = np.random.default_rng(6)
    worst, draws = 0.0, 0
    while draws < 1000:
        state, y, h, n0 = test_mpa.random_setup(CODEBOOK, rng, E=1, rayleigh=bool(rng.integers(2)))
        incoming = {(int(k), int(j)): state.u2r[:, i] for i, (k, j) in enumerate(CODEBOOK.edges)}
        ref = test_mpa.exhaustive_rn(CODEBOOK, y, h, n0, incoming)
        got = rn_update(state, CODEBOOK, y, h, n0)
        for (k, j), msg in ref.items():
            worst = max(worst, np.abs(got[:, CODEBOOK.edge_index[(k, j)]] - msg).max())
        draws += 1
    verdict("2f", worst < 1e-9, f"{draws} channel/message draws on (6,4,4), worst |difference| = {worst:.2e}")


# ---------------------------------------------------------------- 3


@pytest.mark.parametrize("n_sym", [64, 256])
def test_criterion_3_counters_equal_closed_forms(n_sym):
    cfg = SystemConfig(n_sym=n_sym)
    constr = monte_carlo_construct(cfg, 2.0, trials=1000, seed=0)
    lines, ok = [], True
    for algorithm in ("nsd", "isd"):
        rx = ReceiverConfig(algorithm=algorithm, g_th=ISD_G_TH, early_termination=False, T=3)
        receiver = Receiver(cfg, rx, CODEBOOK, constr)
        tp = search_path_count(cfg.n_sym, receiver.info_set, rx.list_size, cfg.q, receiver.lazy_set)
        expected = table5_closed_form(algorithm, ComplexityParams.from_system(cfg, CODEBOOK, rx.list_size, tp=tp))
        res = simulate_point(cfg, rx, CODEBOOK, constr, 2.0, 2, seed=SEED, keep_outcomes=True)
        for o in res.outcomes:
            ok &= o.ops.as_tuple() == tuple(3 * v for v in expected.as_tuple()) and o.ops.exp == 0
            ok &= o.search_paths == 3 * tp
        lines.append(f"{algorithm} T_p={tp} add={expected.add} mul={expected.mul} cmp={expected.cmp} "
                     f"xor={expected.xor} exp={expected.exp}")
    verdict(f"3.N{cfg.N}", ok, f"N={cfg.N}: " + "; ".join(lines))


# ---------------------------------------------------------------- 4 and 5


@pytest.fixture(scope="module")
def ta_sweep(construction):
    rx = ReceiverConfig(algorithm="isd", T=5, g_th=ISD_G_TH)
    return {e: simulate_point(CFG, rx, CODEBOOK, construction, float(e), 2000, seed=SEED).avg_iters
            for e in (1, 2, 3, 4, 5)}


@pytest.mark.slow
def test_criterion_5_average_iterations(ta_sweep):
    ta = [ta_sweep[e] for e in (1, 2, 3, 4, 5)]
    monotone = all(a >= b for a, b in zip(ta, ta[1:]))
    ok = monotone and ta[-1] < 2.0
    verdict("5", ok, "T_a over 1..5 dB (2000 frames each) = " + ", ".join(f"{t:.3f}" for t in ta)
            + f"; non-increasing: {monotone}; T_a(5 dB) < 2.0: {ta[-1] < 2.0}")


@pytest.mark.slow
def test_criterion_4_latency(ta_sweep):
    rep_jidd = latency_model(5, CFG.N, CFG.D, CFG.p, 1.0, 0.0)
    jidd_ok = abs(rep_jidd.gain_jidd - CFG.D / (2 * CFG.N - 2 + CFG.D)) < 1e-12 and round(100 * rep_jidd.gain_jidd, 1) == 20.1
    gains = {e: latency_model(5, CFG.N, CFG.D, CFG.p, ta_sweep[e], 0.719).gain_isd for e in ta_sweep}
    top = gains[5]
    ok = jidd_ok and top >= 0.85 and abs(100 * top - 92) <= 3
    verdict("4", ok, f"JIDD gain {100 * rep_jidd.gain_jidd:.2f}% (any Eb/N0); ISD gain with beta=0.719 over 1..5 dB = "
            + ", ".join(f"{100 * g:.1f}%" for g in gains.values()) + f"; at 5 dB {100 * top:.1f}% (>= 85%, within 3 of 92)")


# ---------------------------------------------------------------- 6


@pytest.mark.slow
def test_criterion_6_ber_orderings(construction):
    frames = -(-1_000_000 // (CFG.J * CFG.A))          # >= 10^6 info bits
    runs = {
        "nsd": ReceiverConfig(algorithm="nsd", T=5),
        "noniterative": ReceiverConfig(algorithm="nsd", T=1),
        "isd": ReceiverConfig(algorithm="isd", T=5, g_th=ISD_G_TH),
        "nsd_et_off": ReceiverConfig(algorithm="nsd", T=5, early_termination=False),
    }
    res = {k: simulate_point(CFG, rx, CODEBOOK, construction, 3.0, frames, seed=SEED, keep_outcomes=True)
           for k, rx in runs.items()}
    ber = {k: r.counter.ber for k, r in res.items()}
    i_ok = ber["nsd"] * 5 < ber["noniterative"]
    ii_ok = ber["isd"] <= 2 * ber["nsd"] and ber["nsd"] <= 2 * ber["isd"]
    iii_ok = res["nsd"].counter.bit_errors == res["nsd_et_off"].counter.bit_errors
    diff = sum(a.bit_errors != b.bit_errors for a, b in zip(res["nsd"].outcomes, res["nsd_et_off"].outcomes))
    bits = res["nsd"].counter.bits
    record("6.i", i_ok, f"{bits} info bits at 3 dB: NSD(T=5) BER {ber['nsd']:.3e} vs non-iterative "
           f"{ber['noniterative']:.3e} (ratio {ber['noniterative'] / max(ber['nsd'], 1e-300):.1f}, need > 5)")
    record("6.ii", ii_ok, f"ISD BER {ber['isd']:.3e} vs NSD {ber['nsd']:.3e} (ratio {ber['isd'] / max(ber['nsd'], 1e-300):.2f}, "
           "need within 2x)")
    record("6.iii", iii_ok, f"ET on {res['nsd'].counter.bit_errors} vs ET off {res['nsd_et_off'].counter.bit_errors} "
           f"bit errors ({diff} of {res['nsd'].frames} frames differ)")
    assert i_ok and ii_ok and iii_ok, ber


# ---------------------------------------------------------------- 7


def test_criterion_7_construction_lazy_rate():
    c = monte_carlo_construct(SystemConfig(q=4, n_sym=64), 2.0, trials=10_000, seed=0)
    thresholds = np.linspace(0, 0.05, 51)
    betas = [c.with_threshold(t).beta for t in thresholds]
    monotone = all(a <= b for a, b in zip(betas, betas[1:]))
    ok = abs(c.beta - 0.536) <= 0.08 and monotone
    verdict("7", ok, f"beta(g_th=0) = {c.beta:.3f} (target 0.536 +- 0.08); non-decreasing over "
            f"{len(thresholds)} thresholds: {monotone}")


# ---------------------------------------------------------------- 8


def test_criterion_8_property_suites():
    # Each call runs the full hypothesis search (10^4 examples) defined on the property test.
    test_llr.test_damping_is_argmax_invariant()
    test_llr.test_foms_round_trip_at_certainty()
    verdict("8", True, "damping argmax-invariance and FOMS round trip: 10^4 hypothesis cases each")
