"""Reflector-side processing: element partition, phase control, synthesis.

For a selected antenna combination the N reflecting elements are split into
n_a contiguous blocks of n_e = floor(N / n_a) elements; block q serves the
q-th selected antenna (ascending order) and the N - n_a * n_e leftover
elements at the tail stay idle (zero reflection amplitude).  Each active
element cancels the cascaded phase of its own block's target antenna, so the
block adds coherently there and lands with uniformly random phase everywhere
else.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import _cn
from .mapping import AntennaCombination

__all__ = [
    "RePartition",
    "PhaseMatrix",
    "partition_res",
    "table_targets",
    "compute_phase_config",
    "reflection_coefficients",
    "synthesize_received_rasm",
    "synthesize_received_rassk",
    "synthesize_eve_signal",
    "compute_selected_snr",
]


class FrontendError(ValueError):
    pass


@dataclass(frozen=True)
class RePartition:
    """Element-to-antenna assignment for one antenna combination.

    targets[i] is the served receive antenna of element i, -1 for idle.
    """

    n: int
    ac: AntennaCombination
    n_e: int
    targets: np.ndarray

    @property
    def idle(self):
        return int(np.sum(self.targets < 0))


def partition_res(n, ac):
    if n < ac.n_a:
        raise FrontendError("need at least one element per selected antenna")
    n_e = n // ac.n_a
    targets = np.full(n, -1, dtype=np.int32)
    for q, antenna in enumerate(ac.indices):
        targets[q * n_e : (q + 1) * n_e] = antenna
    targets.setflags(write=False)
    return RePartition(n=n, ac=ac, n_e=n_e, targets=targets)


def table_targets(table, n):
    """Stacked (D, n) target matrix for a whole AC table."""
    return np.stack([partition_res(n, ac).targets for ac in table.entries])


@dataclass(frozen=True)
class PhaseMatrix:
    """Reflection phases in (-pi, pi] plus the active-element mask."""

    phases: np.ndarray
    active: np.ndarray

    def __post_init__(self):
        act = np.asarray(self.active, dtype=bool)
        ph = np.asarray(self.phases, dtype=float)
        if ph.shape != act.shape:
            raise FrontendError("phases and active mask must share a shape")
        if np.any((ph[act] <= -np.pi) | (ph[act] > np.pi)):
            raise FrontendError("phases must lie in (-pi, pi]")


def _wrap_phase(phi):
    out = np.mod(phi + np.pi, 2.0 * np.pi) - np.pi
    # Move the branch point so the interval is (-pi, pi].
    out = np.where(out == -np.pi, np.pi, out)
    return out


def compute_phase_config(part, h1, h2_est):
    """Phases that cancel the cascaded phase toward each element's target.

    Uses the estimated receiver-side channel; with channel error the residual
    rotation is what degrades the coherent sums downstream.
    """
    active = part.targets >= 0
    phases = np.zeros(part.n)
    idx = np.nonzero(active)[0]
    casc = h2_est[part.targets[idx], idx] * h1[idx]
    phases[idx] = _wrap_phase(-np.angle(casc))
    phases.setflags(write=False)
    active.setflags(write=False)
    return PhaseMatrix(phases=phases, active=active)


def reflection_coefficients(phase_matrix):
    """Complex per-element reflection, zero amplitude on idle elements."""
    return np.where(phase_matrix.active, np.exp(1j * phase_matrix.phases), 0.0)


def synthesize_received_rasm(ch, part, phase_matrix, x_k, n0, rng):
    """Receive-array sample for one channel use carrying symbol x_k."""
    v = reflection_coefficients(phase_matrix) * ch.h1
    y = ch.h2_true @ v * x_k
    if n0 > 0:
        y = y + np.sqrt(n0) * _cn(rng, y.shape)
    return y


def synthesize_received_rassk(ch, part, phase_matrix, e_s, n0, rng):
    """Carrier-only channel use: the symbol degenerates to sqrt(e_s)."""
    if e_s <= 0:
        raise FrontendError("symbol energy must be positive")
    return synthesize_received_rasm(ch, part, phase_matrix, np.sqrt(e_s), n0, rng)


def synthesize_eve_signal(h1, g2, phase_matrix, x_k, n0, rng):
    """Scalar eavesdropper sample through her own reflector-side link."""
    v = reflection_coefficients(phase_matrix) * h1
    y = np.sum(g2 * v) * x_k
    if n0 > 0:
        y = y + complex(_cn(rng, ())) * np.sqrt(n0)
    return y


def compute_selected_snr(ch, part, phase_matrix, x_or_es, n0):
    """Post-alignment SNR per selected antenna.

    The coherent (own-block) and residual (other-block) contributions are
    power-added separately.  ``x_or_es`` is a complex symbol or, when real,
    a plain symbol energy.
    """
    if n0 <= 0:
        raise FrontendError("noise level must be positive for an SNR")
    power = abs(x_or_es) ** 2 if np.iscomplexobj(np.asarray(x_or_es)) else float(x_or_es)
    v = reflection_coefficients(phase_matrix) * ch.h1
    casc = ch.h2_true * v[None, :]
    out = np.empty(part.ac.n_a)
    for q, antenna in enumerate(part.ac.indices):
        own = part.targets == antenna
        coherent = np.abs(np.sum(casc[antenna, own])) ** 2
        residual = np.abs(np.sum(casc[antenna, ~own & (part.targets >= 0)])) ** 2
        out[q] = power * (coherent + residual) / n0
    return out
