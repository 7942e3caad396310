"""Block Monte Carlo engine for the receive-side schemes.

A sweep is a grid of SNR points, each simulated in blocks of trials.  Every
block draws its randomness from substreams keyed by (seed, purpose,
snr_index, block_index), so a block's outcome is a pure function of those
integers: early stopping, chunking and worker counts cannot change results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channel
from .channel import FadingSpec, apply_csi_error, sample_ris_rx_channel, sample_tx_ris_channel, substream
from .frontend import table_targets
from .mapping import build_constellation, select_predefined_acs

__all__ = ["ReceivedScheme", "build_received_scheme", "simulate_received_block", "BLOCK_TRIALS"]

BLOCK_TRIALS = 10_000

_POPCOUNT = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.uint8)


def popcount(words):
    return _POPCOUNT[np.asarray(words, dtype=np.uint32) & 0xFFFF] + _POPCOUNT[
        np.asarray(words, dtype=np.uint32) >> 16
    ]


@dataclass(frozen=True)
class ReceivedScheme:
    """Resolved static state for one receive-side configuration."""

    name: str
    table: object
    targets: np.ndarray
    points: np.ndarray
    labels: np.ndarray
    ac_bits: int
    sym_bits: int
    n: int
    n_r: int
    fading: FadingSpec
    e_s: float = 1.0

    @property
    def bits_per_trial(self):
        return self.ac_bits + self.sym_bits


def build_received_scheme(name, n_r, n, m=None, constellation="psk", n_s=None,
                          fading=None, e_s=1.0, table=None):
    """Resolve a scheme name into its AC table, constellation and targets.

    The fixed-table schemes reuse the adaptive pipeline verbatim with a
    substituted table.
    """
    from .baselines import build_fixed_ac_table

    fading = fading or FadingSpec()
    if table is None:
        if name in ("rasm", "rassk"):
            table = select_predefined_acs(n_r)
        elif name in ("rsm", "rssk", "rgsm", "rgssk"):
            table = build_fixed_ac_table(name, n_r, n_s=n_s)
        else:
            raise ValueError(f"unknown received-side scheme {name!r}")
    max_na = max(ac.n_a for ac in table.entries)
    if n < max_na:
        raise ValueError("need at least one reflecting element per selected antenna")
    symbol_bearing = name in ("rasm", "rsm", "rgsm")
    if symbol_bearing:
        if m is None:
            raise ValueError(f"{name} needs a constellation order")
        const = build_constellation(constellation, m)
        points = np.asarray(const.points, dtype=np.complex128)
        labels = np.asarray(const.labels, dtype=np.uint32)
        sym_bits = const.bits_per_symbol
    else:
        if m not in (None, 1):
            raise ValueError(f"{name} carries no constellation symbol")
        points = np.array([np.sqrt(e_s)], dtype=np.complex128)
        labels = np.zeros(1, dtype=np.uint32)
        sym_bits = 0
    return ReceivedScheme(
        name=name,
        table=table,
        targets=np.ascontiguousarray(table_targets(table, n), dtype=np.int32),
        points=points,
        labels=labels,
        ac_bits=table.bits_per_ac,
        sym_bits=sym_bits,
        n=n,
        n_r=n_r,
        fading=fading,
        e_s=e_s,
    )


def draw_block(scheme, seed, snr_index, block_index, trials, with_eve=False):
    """All random inputs for one block, drawn from the purpose substreams."""
    ctx = (snr_index, block_index)
    h1 = sample_tx_ris_channel(scheme.n, substream(seed, "h1", *ctx), batch=trials)
    raw = sample_ris_rx_channel(
        scheme.n_r, scheme.n, scheme.fading.rician_k, substream(seed, "h2", *ctx), batch=trials
    )
    h2_true, h2_est = apply_csi_error(raw, scheme.fading, substream(seed, "csi", *ctx))
    noise = channel._cn(substream(seed, "noise", *ctx), (trials, scheme.n_r))
    sym_rng = substream(seed, "symbols", *ctx)
    r_true = sym_rng.integers(0, len(scheme.table), trials)
    k_true = sym_rng.integers(0, len(scheme.points), trials)
    out = {
        "h1": h1,
        "h2_true": h2_true,
        "h2_est": h2_est,
        "noise": noise,
        "r_true": r_true,
        "k_true": k_true,
    }
    if with_eve:
        out["g2"] = channel.sample_eve_channel(
            scheme.n, substream(seed, "eve", *ctx), batch=trials
        )
    return out


def simulate_received_block(scheme, n0, seed, snr_index, block_index, trials, backend):
    """Run one block; returns (bits_sent, bit_errors, trials)."""
    d = draw_block(scheme, seed, snr_index, block_index, trials)
    r_hat, k_hat = backend.detect_received_block(
        d["h1"],
        d["h2_est"],
        d["h2_true"],
        d["noise"],
        float(np.sqrt(n0)),
        scheme.targets,
        scheme.points,
        d["r_true"],
        d["k_true"],
    )
    errors = int(np.sum(popcount(d["r_true"] ^ r_hat)))
    if scheme.sym_bits:
        errors += int(np.sum(popcount(scheme.labels[d["k_true"]] ^ scheme.labels[k_hat])))
    return trials * scheme.bits_per_trial, errors, trials
