"""Antenna-combination tables and Gray-coded constellations.

Receive-side index modulation carries bits in *which* receive antennas the
reflector steers power to.  An antenna combination (AC) is a non-empty subset
of the receive array; the adaptive schemes use a pre-defined table of
D = 2^(N_r - 1) combinations, filled with the smallest subsets first so that
each selected antenna keeps as many reflecting elements as possible.

Index words are plain unsigned integers: the AC bit word of length
``bits_per_ac`` is the row index into the table, and symbol bit words are the
Gray labels attached to constellation points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

import numpy as np

__all__ = [
    "AntennaCombination",
    "AcTable",
    "Constellation",
    "enumerate_acs",
    "select_predefined_acs",
    "table_from_indices",
    "ac_to_bits",
    "bits_to_ac",
    "build_constellation",
    "bits_to_symbol",
    "symbol_to_bits",
]


class MappingError(ValueError):
    pass


@dataclass(frozen=True)
class AntennaCombination:
    """A sorted, duplicate-free subset of receive antenna indices (0-based)."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(idx) == 0:
            raise MappingError("antenna combination must be non-empty")
        if any(i < 0 for i in idx):
            raise MappingError("antenna indices are 0-based and non-negative")
        if tuple(sorted(set(idx))) != idx:
            raise MappingError("antenna indices must be sorted and distinct")
        object.__setattr__(self, "indices", idx)

    @property
    def n_a(self):
        return len(self.indices)

    def mask(self, n_r):
        m = np.zeros(n_r, dtype=bool)
        m[list(self.indices)] = True
        return m


def enumerate_acs(n_r):
    """All 2^n_r - 1 non-empty antenna subsets of an n_r antenna array."""
    if n_r < 1:
        raise MappingError("n_r must be >= 1")
    out = []
    for word in range(1, 1 << n_r):
        idx = tuple(i for i in range(n_r) if word >> i & 1)
        out.append(AntennaCombination(idx))
    return out


@dataclass(frozen=True)
class AcTable:
    """An ordered power-of-two list of antenna combinations.

    The row index is the AC bit word, so ``bits_per_ac = log2(len(entries))``.
    """

    n_r: int
    entries: tuple

    def __post_init__(self):
        d = len(self.entries)
        if d < 2 or d & (d - 1):
            raise MappingError("table size must be a power of two and >= 2")
        seen = set()
        for ac in self.entries:
            if not isinstance(ac, AntennaCombination):
                raise MappingError("entries must be AntennaCombination")
            if ac.indices in seen:
                raise MappingError("duplicate antenna combination in table")
            if ac.indices[-1] >= self.n_r:
                raise MappingError("antenna index out of range for n_r")
            seen.add(ac.indices)
        object.__setattr__(self, "entries", tuple(self.entries))

    def __len__(self):
        return len(self.entries)

    @property
    def bits_per_ac(self):
        return len(self.entries).bit_length() - 1

    def index_of(self, ac):
        for i, entry in enumerate(self.entries):
            if entry.indices == ac.indices:
                return i
        raise MappingError(f"combination {ac.indices} not in table")

    def masks(self):
        """Boolean (D, n_r) selection matrix, row per table entry."""
        return np.stack([ac.mask(self.n_r) for ac in self.entries])

    def as_json(self):
        return json.dumps(
            {
                "n_r": self.n_r,
                "bits_per_ac": self.bits_per_ac,
                "entries": [list(ac.indices) for ac in self.entries],
            }
        )


def select_predefined_acs(n_r):
    """Pre-defined adaptive table: drop the full set, sort ascending by
    cardinality (lexicographic within), keep the first 2^(n_r - 1).

    Small subsets come first so each steered antenna keeps a large reflector
    block; the full array is excluded because it leaves no spatial contrast.
    """
    if n_r < 2:
        raise MappingError("adaptive mapping needs n_r >= 2")
    candidates = [ac for ac in enumerate_acs(n_r) if ac.n_a != n_r]
    candidates.sort(key=lambda ac: (ac.n_a, ac.indices))
    d = 1 << (n_r - 1)
    return AcTable(n_r=n_r, entries=tuple(candidates[:d]))


def table_from_indices(n_r, index_sets):
    """Explicit table override, e.g. to replicate a published mapping."""
    entries = tuple(AntennaCombination(tuple(sorted(s))) for s in index_sets)
    return AcTable(n_r=n_r, entries=entries)


def ac_to_bits(table, ac_index):
    if not 0 <= ac_index < len(table):
        raise MappingError("AC index out of range")
    return int(ac_index)


def bits_to_ac(table, word):
    if not 0 <= word < len(table):
        raise MappingError("AC bit word out of range")
    return table.entries[word]


def _gray(p):
    return p ^ (p >> 1)


def _gray_inverse(g):
    p = 0
    while g:
        p ^= g
        g >>= 1
    return p


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy point set with Gray bit labels.

    ``points[p]`` is the complex point at position p and ``labels[p]`` its bit
    word; positions are what the detectors index over.
    """

    kind: str
    m: int
    points: np.ndarray
    labels: np.ndarray

    @property
    def bits_per_symbol(self):
        return self.m.bit_length() - 1


def build_constellation(kind, m):
    if m < 2 or m & (m - 1):
        raise MappingError("constellation order must be a power of two >= 2")
    if kind == "psk":
        p = np.arange(m)
        if m == 2:
            angles = np.pi * p
        else:
            # Offset so no point sits on an axis.
            angles = (2 * p + 1) * np.pi / m
        points = np.exp(1j * angles)
        labels = np.array([_gray(int(i)) for i in p], dtype=np.uint32)
    elif kind == "qam":
        b = m.bit_length() - 1
        bx = (b + 1) // 2
        by = b - bx
        lx, ly = 1 << bx, 1 << by
        points = np.empty(m, dtype=complex)
        labels = np.empty(m, dtype=np.uint32)
        for i in range(lx):
            for q in range(ly):
                pos = i * ly + q
                points[pos] = (2 * i - (lx - 1)) + 1j * (2 * q - (ly - 1))
                labels[pos] = (_gray(i) << by) | _gray(q)
        points = points / np.sqrt(np.mean(np.abs(points) ** 2))
    else:
        raise MappingError(f"unknown constellation kind {kind!r}")
    points.setflags(write=False)
    labels.setflags(write=False)
    return Constellation(kind=kind, m=m, points=points, labels=labels)


def bits_to_symbol(constellation, word):
    if not 0 <= word < constellation.m:
        raise MappingError("symbol bit word out of range")
    if constellation.kind == "psk":
        return constellation.points[_gray_inverse(word)]
    pos = int(np.nonzero(constellation.labels == word)[0][0])
    return constellation.points[pos]


def symbol_to_bits(constellation, position):
    if not 0 <= position < constellation.m:
        raise MappingError("symbol position out of range")
    return int(constellation.labels[position])
