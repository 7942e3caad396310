"""Maximum-likelihood detection at the legitimate receiver and eavesdropper.

The receiver scans every (antenna combination, symbol) hypothesis, rebuilding
what the array would have seen for each from its channel knowledge (h1 and
the estimated receiver-side link only), and keeps the nearest in Euclidean
distance.  Candidates are built once per realization and scaled by each
symbol, since the noiseless receive vector is linear in the symbol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frontend import compute_phase_config, partition_res, table_targets
from .kernels import reference as _ref

__all__ = [
    "Hypothesis",
    "candidate_signal_rasm",
    "unit_candidates",
    "ml_detect_rasm",
    "ml_detect_rassk",
    "ml_detect_eve",
    "mrc_combine",
]


@dataclass(frozen=True)
class Hypothesis:
    """Detected table row and constellation position (None for carrier-only)."""

    ac_index: int
    symbol_index: int | None = None


def unit_candidates(ch, table, targets=None):
    """Unit-symbol candidate receive vectors, shape (D, n_r), from the
    receiver's channel knowledge."""
    n = ch.h1.shape[-1]
    if targets is None:
        targets = table_targets(table, n)
    g = _ref.unit_candidates(ch.h1[None, :], ch.h2_est[None, :, :], targets)
    return g[0]

def candidate_signal_rasm(ch, table, r, k, constellation):
    """Hypothesized noiseless receive vector for table row r and symbol
    position k."""
    ac = table.entries[r]
    part = partition_res(ch.h1.shape[-1], ac)
    phases = compute_phase_config(part, ch.h1, ch.h2_est)
    v = np.where(phases.active, np.exp(1j * phases.phases), 0.0) * ch.h1
    return ch.h2_est @ v * constellation.points[k]


def _scan(y, cands, points):
    # || y - g x ||^2 for every (row, symbol); ties keep the lowest indices.
    diff = y[None, None, :] - cands[:, None, :] * points[None, :, None]
    metric = np.sum(np.abs(diff) ** 2, axis=2)
    flat = int(np.argmin(metric))
    return flat // len(points), flat % len(points)


def ml_detect_rasm(y, ch, table, constellation):
    cands = unit_candidates(ch, table)
    r, k = _scan(y, cands, constellation.points)
    return Hypothesis(ac_index=r, symbol_index=k)


def ml_detect_rassk(y, ch, table, e_s=1.0):
    cands = unit_candidates(ch, table)
    r, _ = _scan(y, cands, np.array([np.sqrt(e_s) + 0j]))
    return Hypothesis(ac_index=r, symbol_index=None)


def ml_detect_eve(y_e, h1, g2, phase_matrix, constellation):
    """Symbol-only scan over the eavesdropper's scalar channel; she cannot
    resolve the antenna mapping, only the carried symbol."""
    v = np.where(phase_matrix.active, np.exp(1j * phase_matrix.phases), 0.0) * h1
    a = np.sum(g2 * v)
    metric = np.abs(y_e - a * constellation.points) ** 2
    return Hypothesis(ac_index=-1, symbol_index=int(np.argmin(metric)))


def mrc_combine(y, h_eff):
    """Maximum-ratio combine a receive vector against a known effective
    channel; returns the scalar decision statistic."""
    denom = np.sum(np.abs(h_eff) ** 2)
    if denom == 0:
        raise ValueError("effective channel is identically zero")
    return np.sum(np.conj(h_eff) * y) / denom
