"""Fading generators, CSI error model and reproducible random substreams.

All links are normalized to unit average power per entry.  The transmitter to
reflector link and the reflector to eavesdropper link are Rayleigh; the
reflector to receiver link is Rician with a deterministic rank-one line of
sight component exp(-j*pi*(m + i)/4) over 0-based antenna index m and element
index i.

Channel state error applies to the reflector-to-receiver link only.  The
default model keeps the estimate and the realized channel jointly Gaussian:

    h2_est    = sqrt(1 - delta2) * h2_raw
    h2_true   = h2_est + sqrt(delta2) * e,   e fresh unit CN

so the realized channel stays unit power for every delta2, and delta2 = 0
returns the identical array for both (bit-exact perfect-CSI behaviour).  A
literal two-stream weighting variant is available as ``literal_weighted``.

Randomness: every purpose (each link, the noise, the drawn indices) owns an
independent substream derived from the master seed plus integer context, so
results do not depend on batch sizes or worker counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FadingSpec",
    "ChannelRealization",
    "substream",
    "sample_tx_ris_channel",
    "sample_ris_rx_channel",
    "sample_eve_channel",
    "apply_csi_error",
]

# Fixed purpose tags keep substreams disjoint and stable across versions.
PURPOSE = {
    "h1": 11,
    "h2": 12,
    "noise": 13,
    "eve": 14,
    "csi": 15,
    "symbols": 16,
    "secrecy": 17,
}

CSI_MODELS = ("additive_error", "literal_weighted")


class ChannelError(ValueError):
    pass


def substream(seed, purpose, *context):
    """Independent generator for (seed, purpose, context...) via SeedSequence."""
    if purpose not in PURPOSE:
        raise ChannelError(f"unknown stream purpose {purpose!r}")
    key = (int(seed), PURPOSE[purpose]) + tuple(int(c) for c in context)
    return np.random.default_rng(key)


@dataclass(frozen=True)
class FadingSpec:
    """Static description of the fading environment."""

    rician_k: float = 0.0
    csi_error_var: float = 0.0
    csi_model: str = "additive_error"

    def __post_init__(self):
        if self.rician_k < 0:
            raise ChannelError("Rician K factor must be >= 0")
        if not 0.0 <= self.csi_error_var < 1.0:
            raise ChannelError("csi_error_var must lie in [0, 1)")
        if self.csi_model not in CSI_MODELS:
            raise ChannelError(f"csi_model must be one of {CSI_MODELS}")


@dataclass
class ChannelRealization:
    """One draw of every link.  Detectors may touch h1 and h2_est only;
    propagation uses h2_true."""

    h1: np.ndarray
    h2_true: np.ndarray
    h2_est: np.ndarray
    g2: np.ndarray | None = None


def _cn(rng, shape):
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def sample_tx_ris_channel(n, rng, batch=None):
    """Unit-power Rayleigh transmitter-to-reflector vector, shape (n,) or
    (batch, n)."""
    if n < 1:
        raise ChannelError("element count must be >= 1")
    shape = (n,) if batch is None else (int(batch), n)
    return _cn(rng, shape)


def los_ramp(n_r, n):
    m = np.arange(n_r)[:, None]
    i = np.arange(n)[None, :]
    return np.exp(-1j * np.pi * (m + i) / 4.0)


def sample_ris_rx_channel(n_r, n, k, rng, batch=None):
    """Rician reflector-to-receiver matrix, shape (n_r, n) or (batch, n_r, n).

    k = 0 reduces to i.i.d. Rayleigh.  Entries keep unit mean square power
    for every k because the LoS ramp has unit modulus.
    """
    if n_r < 1 or n < 1:
        raise ChannelError("array sizes must be >= 1")
    if k < 0:
        raise ChannelError("Rician K factor must be >= 0")
    shape = (n_r, n) if batch is None else (int(batch), n_r, n)
    nlos = _cn(rng, shape)
    if k == 0:
        return nlos
    los = los_ramp(n_r, n)
    return np.sqrt(k / (k + 1.0)) * los + np.sqrt(1.0 / (k + 1.0)) * nlos


def sample_eve_channel(n, rng, batch=None):
    """Unit-power Rayleigh reflector-to-eavesdropper vector."""
    return sample_tx_ris_channel(n, rng, batch)


def apply_csi_error(h2_raw, spec, rng):
    """Split a raw unit-power draw into (h2_true, h2_est) per the CSI model.

    The returned pair preserves unit power of h2_true for every error
    variance.  delta2 = 0 short-circuits to the identity in both models, so a
    zero-error run is bit-identical to a perfect-CSI run on the same streams.
    """
    d2 = spec.csi_error_var
    if d2 == 0.0:
        return h2_raw, h2_raw
    if spec.csi_model == "additive_error":
        h2_est = np.sqrt(1.0 - d2) * h2_raw
        h2_true = h2_est + np.sqrt(d2) * _cn(rng, h2_raw.shape)
        return h2_true, h2_est
    # literal_weighted: composite = d2 * est + (1 - d2) * err with
    # est ~ CN(0, 1 - d2), err ~ CN(0, d2).  Kept for comparison runs; note
    # the composite is not unit power under this weighting.
    h2_est = np.sqrt(1.0 - d2) * h2_raw
    err = np.sqrt(d2) * _cn(rng, h2_raw.shape)
    h2_true = d2 * h2_est + (1.0 - d2) * err
    return h2_true, h2_est
