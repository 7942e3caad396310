"""Sweep orchestration, aggregation and result serialization.

Every sweep row is reproducible from (seed, snr_index, block_index); early
stopping consumes blocks in index order, so the numbers cannot depend on how
many workers ran them.  RIS_IM_THREADS caps the worker count (the kernels
release the interpreter lock, so a small thread pool scales on multicore
hosts and degrades to serial on one).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import baselines, engine, secrecy
from .analysis import AberContext, RECEIVED_SCHEMES, aber_union_bound
from .baselines import BaselineConfig, TRANSMIT_SCHEMES
from .channel import (
    CSI_MODELS,
    FadingSpec,
    _cn,
    apply_csi_error,
    sample_ris_rx_channel,
    sample_tx_ris_channel,
    substream,
)
from .kernels import get_backend
from .mapping import build_constellation, table_from_indices

__all__ = [
    "ConfigError",
    "SchemeConfig",
    "SnrPoint",
    "SweepResult",
    "wilson_interval",
    "aggregate_stats",
    "run_ber_trial",
    "run_ber_sweep",
    "run_sr_sweep",
    "write_manifest",
    "load_config",
]

FORMAT_VERSION = 1
BER_HEADER = "snr_db,trials,bit_errors,ber,ci95_low,ci95_high,aber_bound,aber_se"
SR_HEADER = "snr_db,r_b,r_e,sr,std_err"
_Z95 = 1.959963984540054

ALL_SCHEMES = RECEIVED_SCHEMES + TRANSMIT_SCHEMES


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SchemeConfig:
    """One sweep: scheme, geometry, fading, grid and stopping rules."""

    scheme: str = "rasm"
    n_r: int = 4
    n: int = 16
    m: int | None = None
    constellation: str = "psk"
    n_s: int | None = None
    n_t: int | None = None
    rician_k: float = 0.0
    csi_error_var: float = 0.0
    csi_model: str = "additive_error"
    e_s: float = 1.0
    snr_start: float = 0.0
    snr_stop: float = 10.0
    snr_step: float = 2.0
    seed: int = 1234
    max_trials: int = 3_000_000
    min_errors: int = 100
    block_trials: int = engine.BLOCK_TRIALS
    sr_samples: int = 20_000
    quadrature_points: int = 64
    ac_table: tuple | None = None
    backend: str | None = None

    def validate(self):
        if self.scheme not in ALL_SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {ALL_SCHEMES}")
        symbol_bearing = self.scheme in ("rasm", "rsm", "rgsm", "tsm", "simo_mrc")
        if symbol_bearing:
            if self.m is None or self.m < 2 or self.m & (self.m - 1):
                raise ConfigError(f"{self.scheme} needs a power-of-two constellation order m")
            if self.constellation not in ("psk", "qam"):
                raise ConfigError("constellation must be psk or qam")
        elif self.m is not None:
            raise ConfigError(f"{self.scheme} carries no constellation symbol")
        if self.scheme in ("rgsm", "rgssk"):
            if self.n_s is None or not 1 <= self.n_s <= self.n_r:
                raise ConfigError(f"{self.scheme} needs 1 <= n_s <= n_r")
        if self.scheme in ("tsm", "tssk"):
            if self.n_t is None or self.n_t < 2 or self.n_t & (self.n_t - 1):
                raise ConfigError(f"{self.scheme} needs a power-of-two n_t >= 2")
        if self.n_r < 1 or self.n < 1:
            raise ConfigError("array sizes must be positive")
        if self.scheme in ("rasm", "rassk") and self.n_r < 2:
            raise ConfigError("adaptive mapping needs n_r >= 2")
        if self.e_s <= 0:
            raise ConfigError("symbol energy must be positive")
        if self.rician_k < 0:
            raise ConfigError("Rician K must be >= 0")
        if not 0 <= self.csi_error_var < 1:
            raise ConfigError("csi_error_var must lie in [0, 1)")
        if self.csi_model not in CSI_MODELS:
            raise ConfigError(f"csi_model must be one of {CSI_MODELS}")
        if self.snr_step <= 0 or self.snr_stop < self.snr_start:
            raise ConfigError("need snr_start <= snr_stop and a positive step")
        if self.max_trials < 1000:
            raise ConfigError("max_trials below 1000 cannot produce a usable estimate")
        if self.min_errors < 10:
            raise ConfigError("min_errors below 10 gives meaningless intervals")
        if self.block_trials < 1:
            raise ConfigError("block_trials must be positive")
        if self.sr_samples < 2 or self.quadrature_points < 2:
            raise ConfigError("sample and quadrature counts must be >= 2")
        return self

    def snr_grid(self):
        count = int(math.floor((self.snr_stop - self.snr_start) / self.snr_step + 1e-9)) + 1
        return [round(self.snr_start + i * self.snr_step, 10) for i in range(count)]

    def fading(self):
        return FadingSpec(
            rician_k=self.rician_k,
            csi_error_var=self.csi_error_var,
            csi_model=self.csi_model,
        )

    def to_dict(self):
        d = asdict(self)
        d["ac_table"] = None if self.ac_table is None else [list(e) for e in self.ac_table]
        return d


def resolve_received(cfg):
    table = None
    if cfg.ac_table is not None:
        table = table_from_indices(cfg.n_r, cfg.ac_table)
    return engine.build_received_scheme(
        cfg.scheme,
        cfg.n_r,
        cfg.n,
        m=cfg.m,
        constellation=cfg.constellation,
        n_s=cfg.n_s,
        fading=cfg.fading(),
        e_s=cfg.e_s,
        table=table,
    )


def _noise_level(cfg, snr_db):
    energy = 1.0 if cfg.scheme in ("rasm", "rsm", "rgsm", "tsm", "simo_mrc") else cfg.e_s
    return energy * 10.0 ** (-snr_db / 10.0)


@dataclass(frozen=True)
class SnrPoint:
    snr_db: float
    trials: int
    bit_errors: int
    ber: float
    ci95_low: float
    ci95_high: float
    aber_bound: float | None = None
    aber_se: float | None = None
    r_b: float | None = None
    r_e: float | None = None
    sr: float | None = None
    std_err: float | None = None


@dataclass
class SweepResult:
    kind: str
    config: SchemeConfig
    points: list = field(default_factory=list)
    backend: str = ""

    def to_csv(self):
        if self.kind == "ber":
            lines = [BER_HEADER]
            for p in self.points:
                bound = "" if p.aber_bound is None else f"{p.aber_bound:.10g}"
                se = "" if p.aber_se is None else f"{p.aber_se:.10g}"
                lines.append(
                    f"{p.snr_db:g},{p.trials},{p.bit_errors},{p.ber:.10g},"
                    f"{p.ci95_low:.10g},{p.ci95_high:.10g},{bound},{se}"
                )
        elif self.kind == "sr":
            lines = [SR_HEADER]
            for p in self.points:
                lines.append(
                    f"{p.snr_db:g},{p.r_b:.10g},{p.r_e:.10g},{p.sr:.10g},{p.std_err:.10g}"
                )
        else:
            raise ValueError(f"unknown result kind {self.kind!r}")
        return "\n".join(lines) + "\n"

    def write(self, path):
        text = self.to_csv()
        with open(path, "w") as fh:
            fh.write(text)
        return text


def wilson_interval(errors, total):
    """95% Wilson score interval for an error proportion."""
    if total <= 0:
        raise ValueError("need a positive number of Bernoulli trials")
    p = errors / total
    z2 = _Z95**2
    center = (p + z2 / (2 * total)) / (1 + z2 / total)
    half = (
        _Z95
        * math.sqrt(p * (1 - p) / total + z2 / (4 * total**2))
        / (1 + z2 / total)
    )
    return max(0.0, center - half), min(1.0, center + half)


def aggregate_stats(batches):
    """Pool (bits, errors) batches into (ber, (ci_low, ci_high))."""
    bits = sum(b for b, _ in batches)
    errors = sum(e for _, e in batches)
    if bits <= 0:
        raise ValueError("no bits simulated")
    return errors / bits, wilson_interval(errors, bits)


def _worker_count():
    raw = os.environ.get("RIS_IM_THREADS", "1")
    try:
        count = int(raw)
    except ValueError as exc:
        raise ConfigError(f"RIS_IM_THREADS must be an integer, got {raw!r}") from exc
    return max(1, count)


def run_ber_trial(cfg, snr_db, rng):
    """One channel use; returns (bits_sent, bit_errors).

    snr_db may be math.inf for a zero-noise consistency run.  The passed
    generator supplies every draw, in the block engine's order.
    """
    cfg.validate()
    if cfg.scheme in TRANSMIT_SCHEMES:
        base = _baseline_config(cfg)
        n0 = 0.0 if math.isinf(snr_db) else _noise_level(cfg, snr_db)
        fn = baselines.simo_mrc_block if cfg.scheme == "simo_mrc" else baselines.transmit_im_block
        return fn(base, n0, 1, rng)[:2]
    scheme = resolve_received(cfg)
    n0 = 0.0 if math.isinf(snr_db) else _noise_level(cfg, snr_db)
    h1 = sample_tx_ris_channel(scheme.n, rng, batch=1)
    raw = sample_ris_rx_channel(scheme.n_r, scheme.n, scheme.fading.rician_k, rng, batch=1)
    h2_true, h2_est = apply_csi_error(raw, scheme.fading, rng)
    noise = _cn(rng, (1, scheme.n_r))
    r_true = rng.integers(0, len(scheme.table), 1)
    k_true = rng.integers(0, len(scheme.points), 1)
    backend = get_backend(cfg.backend)
    r_hat, k_hat = backend.detect_received_block(
        h1, h2_est, h2_true, noise, float(np.sqrt(n0)), scheme.targets,
        scheme.points, r_true, k_true,
    )
    errors = int(engine.popcount(r_true ^ r_hat)[0])
    if scheme.sym_bits:
        errors += int(engine.popcount(scheme.labels[k_true] ^ scheme.labels[k_hat])[0])
    return scheme.bits_per_trial, errors


def _baseline_config(cfg):
    return BaselineConfig(
        scheme=cfg.scheme,
        n_r=cfg.n_r,
        n=cfg.n,
        n_t=cfg.n_t or 1,
        m=cfg.m,
        constellation=cfg.constellation,
        e_s=cfg.e_s,
    )


def _block_sizes(cfg):
    sizes = []
    left = cfg.max_trials
    while left > 0:
        step = min(cfg.block_trials, left)
        sizes.append(step)
        left -= step
    return sizes


def _run_point_received(cfg, scheme, backend, snr_index, n0, workers):
    sizes = _block_sizes(cfg)

    def job(block_index):
        return engine.simulate_received_block(
            scheme, n0, cfg.seed, snr_index, block_index, sizes[block_index], backend
        )

    bits = errors = trials = 0
    if workers == 1:
        for b in range(len(sizes)):
            nb, ne, nt = job(b)
            bits += nb
            errors += ne
            trials += nt
            if errors >= cfg.min_errors:
                break
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            done = 0
            stop = False
            while done < len(sizes) and not stop:
                wave = list(range(done, min(done + workers, len(sizes))))
                for nb, ne, nt in pool.map(job, wave):
                    bits += nb
                    errors += ne
                    trials += nt
                    if errors >= cfg.min_errors:
                        stop = True
                        break
                done = wave[-1] + 1
    return bits, errors, trials


def _run_point_transmit(cfg, base, snr_index, n0, workers):
    sizes = _block_sizes(cfg)
    fn = baselines.simo_mrc_block if cfg.scheme == "simo_mrc" else baselines.transmit_im_block

    def job(block_index):
        rng = substream(cfg.seed, "h1", snr_index, block_index)
        return fn(base, n0, sizes[block_index], rng)

    bits = errors = trials = 0
    for b in range(len(sizes)):
        nb, ne = job(b)
        bits += nb
        errors += ne
        trials += sizes[b]
        if errors >= cfg.min_errors:
            break
    return bits, errors, trials


def run_ber_sweep(cfg, bound=False):
    """Monte Carlo BER over the SNR grid, optional analytical bound column."""
    cfg.validate()
    workers = _worker_count()
    transmit = cfg.scheme in TRANSMIT_SCHEMES
    backend = None
    ctx = None
    if not transmit:
        scheme = resolve_received(cfg)
        backend = get_backend(cfg.backend)
    if bound:
        if cfg.scheme not in ("rasm", "rassk"):
            raise ConfigError("the analytical bound covers the adaptive schemes only")
        if cfg.rician_k != 0 or cfg.csi_error_var != 0:
            raise ConfigError("the analytical bound assumes Rayleigh fading and exact CSI")
        const = build_constellation(cfg.constellation, cfg.m) if cfg.scheme == "rasm" else None
        ctx = AberContext(
            table=scheme.table,
            n=cfg.n,
            constellation=const,
            e_s=cfg.e_s,
            quadrature_points=cfg.quadrature_points,
        )
    result = SweepResult(kind="ber", config=cfg, backend="none" if transmit else backend.NAME)
    for snr_index, snr_db in enumerate(cfg.snr_grid()):
        n0 = _noise_level(cfg, snr_db)
        if transmit:
            bits, errors, trials = _run_point_transmit(
                cfg, _baseline_config(cfg), snr_index, n0, workers
            )
        else:
            bits, errors, trials = _run_point_received(
                cfg, scheme, backend, snr_index, n0, workers
            )
        ber, (lo, hi) = aggregate_stats([(bits, errors)])
        b, se = (None, None)
        if ctx is not None:
            b, se = aber_union_bound(ctx, n0, with_se=True)
        result.points.append(
            SnrPoint(
                snr_db=snr_db,
                trials=trials,
                bit_errors=errors,
                ber=ber,
                ci95_low=lo,
                ci95_high=hi,
                aber_bound=b,
                aber_se=se,
            )
        )
    return result


def run_sr_sweep(cfg):
    """Secrecy-rate sweep over the SNR grid."""
    cfg.validate()
    if cfg.scheme not in ("rasm", "rassk") + TRANSMIT_SCHEMES:
        raise ConfigError(f"secrecy sweep not defined for scheme {cfg.scheme!r}")
    result = SweepResult(kind="sr", config=cfg, backend="numpy")
    for snr_db in cfg.snr_grid():
        est = secrecy.estimate_secrecy(cfg, snr_db, cfg.sr_samples)
        result.points.append(
            SnrPoint(
                snr_db=snr_db,
                trials=est.samples,
                bit_errors=0,
                ber=0.0,
                ci95_low=0.0,
                ci95_high=0.0,
                r_b=est.r_b,
                r_e=est.r_e,
                sr=est.sr,
                std_err=est.std_err,
            )
        )
    return result


def write_manifest(path, cfg, csv_text, backend, kind):
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "config": cfg.to_dict(),
        "backend": backend,
        "content_sha256": hashlib.sha256(csv_text.encode()).hexdigest(),
        "created_unix": int(time.time()),
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


_BOOLEAN = {"true": True, "false": False}


def _parse_value(raw):
    raw = raw.strip()
    low = raw.lower()
    if low in ("none", "null", ""):
        return None
    if low in _BOOLEAN:
        return _BOOLEAN[low]
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def load_config(path):
    """Read a flat key = value file or a JSON config/manifest."""
    path = os.fspath(path)
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json") or text.lstrip().startswith("{"):
        data = json.loads(text)
        if "config" in data and isinstance(data["config"], dict):
            data = data["config"]
    else:
        data = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = line.split("=", 1)
            data[key.strip()] = _parse_value(raw)
    return config_from_dict(data)


def config_from_dict(data):
    known = {f for f in SchemeConfig.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if data.get("ac_table") is not None:
        data = dict(data)
        data["ac_table"] = tuple(tuple(int(i) for i in row) for row in data["ac_table"])
    try:
        cfg = SchemeConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()
