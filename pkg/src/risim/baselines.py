"""Reference schemes the proposed ones are measured against.

Receive-side fixed mappings (single antenna or fixed-size groups) reuse the
adaptive pipeline verbatim with a substituted AC table.  Transmit-side index
modulation and the beamformed single-stream receiver get their own small
simulators: there the reflector cannot follow the information-bearing antenna
choice, so its phases are locked to the cascade of the first transmit antenna
toward the first receive antenna.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .channel import _cn
from .engine import popcount
from .mapping import AcTable, AntennaCombination, build_constellation

__all__ = [
    "BaselineConfig",
    "build_fixed_ac_table",
    "simulate_transmit_im",
    "simulate_simo_mrc",
    "transmit_im_block",
    "simo_mrc_block",
]

TRANSMIT_SCHEMES = ("tsm", "tssk", "simo_mrc")

_CHUNK = 10_000


class BaselineError(ValueError):
    pass


def build_fixed_ac_table(scheme, n_r, n_s=None):
    """Non-adaptive receive-side tables.

    rsm/rssk: one antenna per row, needs a power-of-two array.
    rgsm/rgssk: the first 2^floor(log2 C(n_r, n_s)) size-n_s groups in
    lexicographic order.
    """
    if scheme in ("rsm", "rssk"):
        if n_r < 2 or n_r & (n_r - 1):
            raise BaselineError(f"{scheme} needs a power-of-two antenna count >= 2")
        entries = tuple(AntennaCombination((i,)) for i in range(n_r))
        return AcTable(n_r=n_r, entries=entries)
    if scheme in ("rgsm", "rgssk"):
        if n_s is None or not 1 <= n_s <= n_r:
            raise BaselineError(f"{scheme} needs 1 <= n_s <= n_r")
        all_groups = list(combinations(range(n_r), n_s))
        d = 1 << (len(all_groups).bit_length() - 1)
        if d < 2:
            raise BaselineError("group mapping carries no bits for this (n_r, n_s)")
        entries = tuple(AntennaCombination(g) for g in all_groups[:d])
        return AcTable(n_r=n_r, entries=entries)
    raise BaselineError(f"unknown fixed-table scheme {scheme!r}")


@dataclass(frozen=True)
class BaselineConfig:
    """Transmit-side baseline parameters."""

    scheme: str
    n_r: int
    n: int
    n_t: int = 1
    m: int | None = None
    constellation: str = "psk"
    e_s: float = 1.0

    def __post_init__(self):
        if self.scheme not in TRANSMIT_SCHEMES:
            raise BaselineError(f"unknown transmit baseline {self.scheme!r}")
        if self.scheme in ("tsm", "tssk"):
            if self.n_t < 2 or self.n_t & (self.n_t - 1):
                raise BaselineError("antenna-index bits need a power-of-two n_t")
        elif self.n_t != 1:
            raise BaselineError("simo_mrc is single-transmit-antenna")
        if self.scheme in ("tsm", "simo_mrc"):
            if self.m is None or self.m < 2 or self.m & (self.m - 1):
                raise BaselineError(f"{self.scheme} needs a power-of-two constellation order")
        elif self.m is not None:
            raise BaselineError("tssk carries no constellation symbol")
        if min(self.n_r, self.n) < 1 or self.e_s <= 0:
            raise BaselineError("invalid array sizes or symbol energy")

    @property
    def bits_per_trial(self):
        bits = self.n_t.bit_length() - 1
        if self.m is not None:
            bits += self.m.bit_length() - 1
        return bits


def _points_labels(cfg):
    if cfg.m is None:
        return np.array([np.sqrt(cfg.e_s) + 0j]), np.zeros(1, dtype=np.uint32)
    const = build_constellation(cfg.constellation, cfg.m)
    return np.asarray(const.points, dtype=complex), const.labels


def transmit_im_block(cfg, n0, trials, rng):
    """One block of transmit-side index modulation with ML detection.

    Draw order from the single stream: per-antenna transmit links, receive
    links, noise, then the transmitted indices.
    """
    points, labels = _points_labels(cfg)
    m = len(points)
    h1 = _cn(rng, (trials, cfg.n_t, cfg.n))
    h2 = _cn(rng, (trials, cfg.n_r, cfg.n))
    noise = _cn(rng, (trials, cfg.n_r))
    j_true = rng.integers(0, cfg.n_t, trials)
    k_true = rng.integers(0, m, trials)
    ref = h2[:, 0, :] * h1[:, 0, :]
    u = ref.conj() / np.abs(ref)
    h2u = h2 * u[:, None, :]
    cand = np.einsum("tmi,tji->tjm", h2u, h1)
    base = np.take_along_axis(cand, j_true[:, None, None], axis=1)[:, 0, :]
    y = base * points[k_true][:, None] + np.sqrt(n0) * noise
    corr = np.einsum("tm,tjm->tj", y, cand.conj())
    gpow = np.einsum("tjm,tjm->tj", cand, cand.conj()).real
    metric = (
        -2.0 * np.real(corr[:, :, None] * points.conj()[None, None, :])
        + gpow[:, :, None] * (np.abs(points) ** 2)[None, None, :]
    )
    flat = np.argmin(metric.reshape(trials, cfg.n_t * m), axis=1)
    j_hat = flat // m
    k_hat = flat % m
    errors = int(np.sum(popcount(j_true ^ j_hat)))
    if cfg.m is not None:
        errors += int(np.sum(popcount(labels[k_true] ^ labels[k_hat])))
    return trials * cfg.bits_per_trial, errors


def simo_mrc_block(cfg, n0, trials, rng):
    """Beamformed single-stream transmission, MRC combining, symbol ML."""
    points, labels = _points_labels(cfg)
    m = len(points)
    h1 = _cn(rng, (trials, cfg.n))
    h2 = _cn(rng, (trials, cfg.n_r, cfg.n))
    noise = _cn(rng, (trials, cfg.n_r))
    k_true = rng.integers(0, m, trials)
    casc = h2 * h1[:, None, :]
    u = casc[:, 0, :].conj() / np.abs(casc[:, 0, :])
    h_eff = np.einsum("tmi,ti->tm", casc, u)
    y = h_eff * points[k_true][:, None] + np.sqrt(n0) * noise
    z = np.einsum("tm,tm->t", h_eff.conj(), y) / np.einsum(
        "tm,tm->t", h_eff, h_eff.conj()
    ).real
    k_hat = np.argmin(np.abs(z[:, None] - points[None, :]) ** 2, axis=1)
    errors = int(np.sum(popcount(labels[k_true] ^ labels[k_hat])))
    return trials * cfg.bits_per_trial, errors


def _run_blocks(block_fn, cfg, snr_db, trials, rng):
    n0 = cfg.e_s * 10.0 ** (-snr_db / 10.0)
    bits = errors = 0
    done = 0
    while done < trials:
        step = min(_CHUNK, trials - done)
        b, e = block_fn(cfg, n0, step, rng)
        bits += b
        errors += e
        done += step
    return errors / bits


def simulate_transmit_im(cfg, snr_db, trials, rng):
    """BER of the tsm/tssk baseline at one SNR."""
    if cfg.scheme not in ("tsm", "tssk"):
        raise BaselineError("simulate_transmit_im handles tsm/tssk")
    return _run_blocks(transmit_im_block, cfg, snr_db, trials, rng)


def simulate_simo_mrc(cfg, snr_db, trials, rng):
    """BER of the beamformed MRC baseline at one SNR."""
    if cfg.scheme != "simo_mrc":
        raise BaselineError("simulate_simo_mrc handles simo_mrc")
    return _run_blocks(simo_mrc_block, cfg, snr_db, trials, rng)
