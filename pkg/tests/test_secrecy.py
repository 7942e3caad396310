"""Mutual-information estimator and secrecy-rate assembly."""

import math

import numpy as np
import pytest

from risim.harness import SchemeConfig
from risim.secrecy import (
    dcmc_rate,
    estimate_rate_bob_rasm,
    estimate_rate_bob_rassk,
    estimate_rate_eve_rasm,
    estimate_secrecy,
    secrecy_rate,
)


def _orthogonal_set(t, j, scale):
    cands = np.zeros((t, j, j), dtype=complex)
    for q in range(j):
        cands[:, q, q] = scale
    return cands


def test_single_candidate_carries_no_information(rng):
    assert dcmc_rate(np.ones((16, 1, 3), dtype=complex), 1.0, rng) == (0.0, 0.0)


def test_noiseless_rate_is_exactly_log2_j(rng):
    for j in (2, 4, 8):
        rate, se = dcmc_rate(_orthogonal_set(32, j, 1.0), 0.0, rng)
        assert rate == math.log2(j)
        assert se == 0.0


def test_noiseless_duplicates_lose_half_a_bit(rng):
    # Merging two of four symbols: I = H(1/4, 1/4, 1/2) = 1.5 bits.
    cands = _orthogonal_set(32, 4, 1.0)
    cands[:, 3] = cands[:, 2]
    rate, _ = dcmc_rate(cands, 0.0, rng)
    assert math.isclose(rate, 1.5, abs_tol=1e-12)


def test_vanishing_snr_kills_the_rate(rng):
    rate, _ = dcmc_rate(_orthogonal_set(256, 4, 1.0), 1e7, rng)
    assert 0.0 <= rate <= 0.05


def test_high_snr_saturates_the_rate(rng):
    rate, _ = dcmc_rate(_orthogonal_set(256, 4, 1.0), 1e-7, rng)
    assert rate >= 2.0 - 0.05


def _cfg(scheme, **kw):
    kw.setdefault("n", 8)
    kw.setdefault("seed", 11)
    kw.setdefault("sr_samples", 2000)
    return SchemeConfig(scheme=scheme, snr_start=0, snr_stop=0, **kw)


def test_scheme_rates_hit_their_limits(rng):
    cfg = _cfg("rasm", n_r=3, m=2)
    hi, _ = estimate_rate_bob_rasm(cfg, 60.0, 2000, rng)
    assert abs(hi - 3.0) <= 0.05
    lo, _ = estimate_rate_bob_rasm(cfg, -40.0, 2000, rng)
    assert 0.0 <= lo <= 0.05
    ck, _ = estimate_rate_bob_rassk(_cfg("rassk", n_r=3), 60.0, 2000, rng)
    assert abs(ck - 2.0) <= 0.05


@pytest.mark.parametrize("m,cap", [(2, 0.5), (4, 0.5), (8, 3.0 / 8.0)])
def test_eve_rate_saturates_at_scaled_symbol_bits(rng, m, cap):
    cfg = _cfg("rasm", n_r=3, m=m)
    r_e, _ = estimate_rate_eve_rasm(cfg, 60.0, 2000, rng)
    assert abs(r_e - cap) <= 0.05
    r_lo, _ = estimate_rate_eve_rasm(cfg, -40.0, 2000, rng)
    assert 0.0 <= r_lo <= 0.05


def test_secrecy_rate_combinator():
    assert secrecy_rate(3.0, 0.5) == 2.5
    assert secrecy_rate(1.0, 3.0) == 0.0
    assert secrecy_rate(1.75, 0.0) == 1.75


def test_estimate_secrecy_is_deterministic():
    cfg = _cfg("rasm", n_r=3, m=2)
    a = estimate_secrecy(cfg, 5.0)
    b = estimate_secrecy(cfg, 5.0)
    assert (a.r_b, a.r_e, a.sr, a.std_err) == (b.r_b, b.r_e, b.sr, b.std_err)
    assert a.sr == secrecy_rate(a.r_b, a.r_e)


def test_carrier_only_scheme_leaks_nothing():
    est = estimate_secrecy(_cfg("rassk", n_r=4), 0.0)
    assert est.r_e == 0.0
    assert est.sr == est.r_b


def test_negative_snr_points_are_supported():
    est = estimate_secrecy(_cfg("rassk", n_r=3), -30.0)
    assert est.sr >= 0.0 and math.isfinite(est.std_err)


@pytest.mark.parametrize("scheme,kw", [
    ("simo_mrc", dict(n_r=3, m=8)),
    ("tsm", dict(n_t=4, n_r=3, m=2)),
    ("tssk", dict(n_t=8, n_r=3)),
])
def test_transmit_side_benchmarks_produce_rates(scheme, kw):
    est = estimate_secrecy(_cfg(scheme, **kw), 0.0)
    assert est.r_b > 0.0
    assert est.r_e >= 0.0
    assert est.sr >= 0.0


def test_unsupported_scheme_is_rejected():
    cfg = _cfg("rgsm", n_r=4, n_s=2, m=2)
    with pytest.raises(ValueError):
        estimate_secrecy(cfg, 0.0)


def test_more_samples_tighter_error(rng):
    cfg = _cfg("rasm", n_r=3, m=2)
    wide = estimate_secrecy(cfg, 0.0, samples=1000)
    tight = estimate_secrecy(cfg, 0.0, samples=8000)
    assert tight.std_err < wide.std_err


def test_richer_symbol_load_raises_secrecy():
    # More antennas and a denser constellation buy secrecy: the eavesdropper
    # penalty scales like log2(m)/m while the legitimate rate gains the bits.
    rich = estimate_secrecy(_cfg("rasm", n_r=4, m=4, n=16, sr_samples=3000), 10.0)
    lean = estimate_secrecy(_cfg("rasm", n_r=3, m=2, n=16, sr_samples=3000), 10.0)
    assert rich.sr > lean.sr + 2.0 * (rich.std_err + lean.std_err)


def test_secrecy_rises_with_snr_within_noise():
    cfg = _cfg("rassk", n_r=4, sr_samples=3000)
    ests = [estimate_secrecy(cfg, s) for s in (-10.0, 0.0, 10.0)]
    for a, b in zip(ests, ests[1:]):
        assert b.sr >= a.sr - 2.0 * (a.std_err + b.std_err)
