"""Monte Carlo secrecy rates for the legitimate link and the eavesdropper.

Achievable rates are estimated with the discrete-input continuous-output
mutual information of the finite candidate set: for a true hypothesis j the
received sample is Y = G_j + noise, and

    I = log2(J) - E[ log2 sum_jhat exp((||Y - G_j||^2 - ||Y - G_jhat||^2) / N0) ]

averaged over hypotheses, channel draws and noise.  Squared distances are
divided by the noise level, so the estimate reaches log2(J) in the noiseless
limit and 0 in the noise-dominated limit.

The eavesdropper shares the reflector link but not the receive-side mapping
seed, so for the symbol-bearing adaptive scheme she can at best demodulate
the constellation symbol, and her rate carries the 1/M pattern-guess factor;
for the carrier-only scheme she learns nothing.  The transmit-side baselines
give her the full candidate alphabet (their mapping is public and she has
full channel knowledge).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import channel
from .baselines import BaselineConfig
from .channel import sample_eve_channel, substream
from .engine import build_received_scheme, draw_block
from .kernels import reference as _ref

__all__ = [
    "SecrecyEstimate",
    "dcmc_rate",
    "estimate_rate_bob_rasm",
    "estimate_rate_eve_rasm",
    "estimate_rate_bob_rassk",
    "secrecy_rate",
    "estimate_secrecy",
]

_ROW_CHUNK = 2048


@dataclass(frozen=True)
class SecrecyEstimate:
    r_b: float
    r_e: float
    sr: float
    samples: int
    std_err: float


def dcmc_rate(cands, n0, rng):
    """Mutual information of a uniform finite candidate set, with the noise
    drawn here (one complex sample per true hypothesis).

    cands: (T, J, L) noiseless receive vectors per sample and hypothesis.
    Returns (rate, std_err) with the per-sample average as the variance unit.
    """
    t, j, l = cands.shape
    if j < 2:
        return 0.0, 0.0
    log2j = math.log2(j)
    per_sample = np.empty(t)
    for lo in range(0, t, _ROW_CHUNK):
        hi = min(lo + _ROW_CHUNK, t)
        c = cands[lo:hi]
        noise = channel._cn(rng, c.shape)
        y = c + np.sqrt(n0) * noise if n0 > 0 else c
        diff = y[:, :, None, :] - c[:, None, :, :]
        dist = np.sum(diff.real**2 + diff.imag**2, axis=3)
        own = np.take_along_axis(
            dist, np.arange(j)[None, :, None], axis=2
        )
        if n0 > 0:
            expo = (own - dist) / n0
        else:
            expo = np.where(dist - own > 0, -np.inf, 0.0)
        peak = np.max(expo, axis=2, keepdims=True)
        lse = peak[:, :, 0] + np.log(np.sum(np.exp(expo - peak), axis=2))
        per_sample[lo:hi] = np.mean(lse, axis=1) / math.log(2.0)
    rate = log2j - float(np.mean(per_sample))
    rate = min(max(rate, 0.0), log2j)
    std_err = float(np.std(per_sample) / np.sqrt(t))
    return rate, std_err


def _received_candidates(cfg, snr_index, samples, with_eve):
    scheme = build_received_scheme(
        cfg.scheme if cfg.scheme in ("rasm", "rassk") else cfg.scheme,
        cfg.n_r,
        cfg.n,
        m=getattr(cfg, "m", None),
        constellation=getattr(cfg, "constellation", "psk"),
        n_s=getattr(cfg, "n_s", None),
        fading=channel.FadingSpec(
            rician_k=getattr(cfg, "rician_k", 0.0),
            csi_error_var=getattr(cfg, "csi_error_var", 0.0),
            csi_model=getattr(cfg, "csi_model", "additive_error"),
        ),
        e_s=getattr(cfg, "e_s", 1.0),
    )
    d = draw_block(scheme, cfg.seed, snr_index, 0, samples, with_eve=with_eve)
    unit = _ref.unit_candidates(d["h1"], d["h2_est"], scheme.targets)
    return scheme, d, unit


def _expand_symbols(unit, points):
    t, d, l = unit.shape
    cands = unit[:, :, None, :] * points[None, None, :, None]
    return cands.reshape(t, d * len(points), l)


def _eve_scalar_gain(scheme, d):
    """Cascade seen by the eavesdropper under the realized reflector phases
    (set for the drawn AC rows)."""
    casc = d["h2_est"] * d["h1"][:, None, :]
    u = casc.conj() / np.abs(casc)
    tt = scheme.targets[d["r_true"]]
    w = np.take_along_axis(u, np.clip(tt, 0, None)[:, None, :], axis=1)[:, 0, :]
    w = w * (tt >= 0)
    return np.sum(d["g2"] * w * d["h1"], axis=1)


def estimate_rate_bob_rasm(cfg, snr_db, samples, rng):
    """Legitimate rate of the symbol-bearing adaptive scheme, bpcu."""
    scheme, d, unit = _received_candidates(cfg, _snr_tag(snr_db), samples, False)
    cands = _expand_symbols(unit, scheme.points)
    return dcmc_rate(cands, _n0(cfg, snr_db), rng)


def estimate_rate_eve_rasm(cfg, snr_db, samples, rng):
    """Eavesdropper rate: symbol demodulation scaled by the pattern-guess
    factor 1/M."""
    scheme, d, unit = _received_candidates(cfg, _snr_tag(snr_db), samples, True)
    a = _eve_scalar_gain(scheme, d)
    cands = a[:, None, None] * scheme.points[None, :, None]
    rate, se = dcmc_rate(cands, _n0(cfg, snr_db), rng)
    m = len(scheme.points)
    return rate / m, se / m


def estimate_rate_bob_rassk(cfg, snr_db, samples, rng):
    """Legitimate rate of the carrier-only adaptive scheme, bpcu."""
    scheme, d, unit = _received_candidates(cfg, _snr_tag(snr_db), samples, False)
    cands = unit * scheme.points[0]
    return dcmc_rate(cands, _n0(cfg, snr_db), rng)


def secrecy_rate(r_b, r_e):
    return max(0.0, r_b - r_e)


def _n0(cfg, snr_db):
    energy = getattr(cfg, "e_s", 1.0)
    if cfg.scheme in ("rasm", "rsm", "rgsm", "tsm", "simo_mrc"):
        energy = 1.0
    return energy * 10.0 ** (-snr_db / 10.0)


def _snr_tag(snr_db):
    # Substream context must be a non-negative integer; tenth-dB resolution,
    # negative dB wrapped into the top of the seed domain.
    return int(round(10 * snr_db)) % (1 << 32)


def _transmit_candidates(cfg, snr_index, samples):
    base = BaselineConfig(
        scheme=cfg.scheme,
        n_r=cfg.n_r,
        n=cfg.n,
        n_t=getattr(cfg, "n_t", 1) or 1,
        m=getattr(cfg, "m", None),
        constellation=getattr(cfg, "constellation", "psk"),
        e_s=getattr(cfg, "e_s", 1.0),
    )
    ctx = (snr_index, 0)
    points, _ = _points(base)
    if base.scheme == "simo_mrc":
        h1 = channel.sample_tx_ris_channel(base.n, substream(cfg.seed, "h1", *ctx), batch=samples)
        h2 = channel._cn(substream(cfg.seed, "h2", *ctx), (samples, base.n_r, base.n))
        casc = h2 * h1[:, None, :]
        u = casc[:, 0, :].conj() / np.abs(casc[:, 0, :])
        h_eff = np.einsum("tmi,ti->tm", casc, u)
        bob = h_eff[:, None, :] * points[None, :, None]
        g2 = sample_eve_channel(base.n, substream(cfg.seed, "eve", *ctx), batch=samples)
        a = np.sum(g2 * u * h1, axis=1)
        eve = a[:, None, None] * points[None, :, None]
        return bob, eve
    h1 = channel._cn(substream(cfg.seed, "h1", *ctx), (samples, base.n_t, base.n))
    h2 = channel._cn(substream(cfg.seed, "h2", *ctx), (samples, base.n_r, base.n))
    ref = h2[:, 0, :] * h1[:, 0, :]
    u = ref.conj() / np.abs(ref)
    cand = np.einsum("tmi,tji->tjm", h2 * u[:, None, :], h1)
    bob = _expand_symbols(cand, points)
    g2 = sample_eve_channel(base.n, substream(cfg.seed, "eve", *ctx), batch=samples)
    a = np.einsum("ti,tji->tj", g2 * u, h1)
    eve = _expand_symbols(a[:, :, None], points)
    return bob, eve


def _points(base):
    if base.m is None:
        return np.array([np.sqrt(base.e_s) + 0j]), None
    from .mapping import build_constellation

    const = build_constellation(base.constellation, base.m)
    return np.asarray(const.points, dtype=complex), const.labels


def estimate_secrecy(cfg, snr_db, samples=None):
    """(R_B, R_E, SR) with a combined standard error, at one SNR point."""
    samples = samples or getattr(cfg, "sr_samples", 20000)
    tag = _snr_tag(snr_db)
    rng = substream(cfg.seed, "secrecy", tag)
    n0 = _n0(cfg, snr_db)
    if cfg.scheme == "rasm":
        r_b, se_b = estimate_rate_bob_rasm(cfg, snr_db, samples, rng)
        r_e, se_e = estimate_rate_eve_rasm(cfg, snr_db, samples, rng)
    elif cfg.scheme == "rassk":
        r_b, se_b = estimate_rate_bob_rassk(cfg, snr_db, samples, rng)
        r_e, se_e = 0.0, 0.0
    elif cfg.scheme in ("tsm", "tssk", "simo_mrc"):
        bob, eve = _transmit_candidates(cfg, tag, samples)
        r_b, se_b = dcmc_rate(bob, n0, rng)
        r_e, se_e = dcmc_rate(eve, n0, rng)
    else:
        raise ValueError(f"secrecy estimation not defined for scheme {cfg.scheme!r}")
    return SecrecyEstimate(
        r_b=r_b,
        r_e=r_e,
        sr=secrecy_rate(r_b, r_e),
        samples=samples,
        std_err=float(np.hypot(se_b, se_e)),
    )
