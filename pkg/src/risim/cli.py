"""Command line front end.

Subcommands cover the Monte Carlo sweeps (ber, sr), the closed-form tools
(aber, se, complexity, actable) and a backend micro-benchmark (bench).
Config files and flags feed the same SchemeConfig; a flag given on the
command line wins over the file.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import __version__, engine
from .analysis import (
    AberContext,
    AnalysisError,
    aber_bound_curve,
    detection_complexity,
    spectral_efficiency,
)
from .baselines import BaselineError
from .channel import ChannelError
from .frontend import FrontendError
from .harness import (
    ConfigError,
    config_from_dict,
    load_config,
    run_ber_sweep,
    run_sr_sweep,
    write_manifest,
)
from .kernels import available_backends, get_backend
from .mapping import MappingError, build_constellation, select_predefined_acs

_USER_ERRORS = (
    ConfigError,
    AnalysisError,
    MappingError,
    ChannelError,
    FrontendError,
    BaselineError,
    OSError,
)

# (flag, config key, type, help)
_CONFIG_FLAGS = [
    ("--scheme", "scheme", str, "scheme name (rasm, rassk, rsm, rssk, rgsm, rgssk, tsm, tssk, simo_mrc)"),
    ("--nr", "n_r", int, "receive antennas"),
    ("--n", "n", int, "reflecting elements"),
    ("--m", "m", int, "constellation order"),
    ("--constellation", "constellation", str, "psk or qam"),
    ("--ns", "n_s", int, "active receive antennas of the fixed-group schemes"),
    ("--nt", "n_t", int, "transmit antennas of the transmit-side baselines"),
    ("--rician-k", "rician_k", float, "Rician K factor of the RIS-receiver link"),
    ("--csi-error", "csi_error_var", float, "channel estimate error variance in [0, 1)"),
    ("--csi-model", "csi_model", str, "additive_error or literal_weighted"),
    ("--es", "e_s", float, "carrier symbol energy"),
    ("--snr-start", "snr_start", float, "grid start in dB"),
    ("--snr-stop", "snr_stop", float, "grid stop in dB"),
    ("--snr-step", "snr_step", float, "grid step in dB"),
    ("--seed", "seed", int, "master seed"),
    ("--max-trials", "max_trials", int, "trial budget per SNR point"),
    ("--min-errors", "min_errors", int, "early-stop error target per SNR point"),
    ("--block-trials", "block_trials", int, "trials per scheduling block"),
    ("--samples", "sr_samples", int, "Monte Carlo samples per rate estimate"),
    ("--quadrature-points", "quadrature_points", int, "Gauss-Legendre node count"),
    ("--backend", "backend", str, "detection backend (auto, cython, numpy)"),
]


def _add_config_flags(sub, keys=None):
    sub.add_argument("--config", help="key = value file or JSON (manifest accepted)")
    for flag, key, typ, help_text in _CONFIG_FLAGS:
        if keys is None or key in keys:
            sub.add_argument(flag, dest=key, type=typ, default=None, help=help_text)


def _merge_config(args):
    data = load_config(args.config).to_dict() if args.config else {}
    for _, key, _, _ in _CONFIG_FLAGS:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    return config_from_dict(data)


def _emit(result, args):
    if args.out:
        text = result.write(args.out)
        manifest_path = args.manifest or args.out + ".manifest.json"
        write_manifest(manifest_path, result.config, text, result.backend, result.kind)
        print(f"wrote {args.out} and {manifest_path}")
    else:
        sys.stdout.write(result.to_csv())


def _cmd_ber(args):
    cfg = _merge_config(args)
    result = run_ber_sweep(cfg, bound=args.bound)
    _emit(result, args)
    return 0


def _cmd_sr(args):
    cfg = _merge_config(args)
    result = run_sr_sweep(cfg)
    _emit(result, args)
    return 0


def _cmd_aber(args):
    cfg = _merge_config(args)
    if cfg.scheme not in ("rasm", "rassk"):
        raise ConfigError("the analytical bound covers the adaptive schemes only")
    from .harness import resolve_received

    scheme = resolve_received(cfg)
    const = build_constellation(cfg.constellation, cfg.m) if cfg.scheme == "rasm" else None
    ctx = AberContext(
        table=scheme.table,
        n=cfg.n,
        constellation=const,
        e_s=cfg.e_s,
        quadrature_points=cfg.quadrature_points,
        pep_model=args.pep_model,
    )
    grid = cfg.snr_grid()
    values, ses = aber_bound_curve(ctx, grid, method=args.method, with_se=True)
    lines = ["snr_db,aber_bound,aber_se"]
    lines.extend(f"{s:g},{v:.10g},{e:.10g}" for s, v, e in zip(grid, values, ses))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_se(args):
    print(spectral_efficiency(args.scheme, args.n_r, m=args.m, n_s=args.n_s))
    return 0


def _cmd_complexity(args):
    print(detection_complexity(args.scheme, args.n_r, args.n, args.d, m=args.m))
    return 0


def _cmd_actable(args):
    print(select_predefined_acs(args.n_r).as_json())
    return 0


def _cmd_bench(args):
    data = {
        "scheme": args.scheme,
        "n_r": args.n_r,
        "n": args.n,
        "seed": args.seed,
    }
    if args.scheme == "rasm":
        data["m"] = args.m
    cfg = config_from_dict(data)
    from .harness import _noise_level, resolve_received

    scheme = resolve_received(cfg)
    n0 = _noise_level(cfg, args.snr)
    results = {}
    for name in available_backends():
        backend = get_backend(name)
        t0 = time.perf_counter()
        bits, errors, trials = engine.simulate_received_block(
            scheme, n0, cfg.seed, 0, 0, args.trials, backend
        )
        dt = time.perf_counter() - t0
        results[name] = errors
        rate = trials / dt if dt > 0 else float("inf")
        print(f"{name:>8s}: {trials} trials in {dt:8.3f} s  ({rate:12,.0f} trials/s)")
    if len(set(results.values())) > 1:
        print(f"backend outputs disagree: {results}", file=sys.stderr)
        return 1
    if len(results) > 1:
        print("backends agree on the error count")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="risim",
        description="Link-level simulator for RIS-driven receive index modulation",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ber", help="Monte Carlo bit error rate sweep")
    _add_config_flags(p)
    p.add_argument("--bound", action="store_true", help="attach the analytical bound column")
    p.add_argument("--out", help="CSV output path (stdout when omitted)")
    p.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")
    p.set_defaults(func=_cmd_ber)

    p = sub.add_parser("aber", help="analytical average BER bound curve")
    _add_config_flags(
        p,
        keys={"scheme", "n_r", "n", "m", "constellation", "e_s",
              "snr_start", "snr_stop", "snr_step", "quadrature_points"},
    )
    p.add_argument("--method", choices=("quadrature", "q_bound"), default="quadrature")
    p.add_argument("--pep-model", choices=("sampled", "gaussian"), default="sampled",
                   help="pairwise error statistics: exact-law draws or the closed-form fit")
    p.add_argument("--out", help="CSV output path (stdout when omitted)")
    p.set_defaults(func=_cmd_aber)

    p = sub.add_parser("sr", help="ergodic secrecy rate sweep")
    _add_config_flags(p)
    p.add_argument("--out", help="CSV output path (stdout when omitted)")
    p.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")
    p.set_defaults(func=_cmd_sr)

    p = sub.add_parser("se", help="spectral efficiency in bits per channel use")
    p.add_argument("--scheme", required=True)
    p.add_argument("--nr", dest="n_r", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--ns", dest="n_s", type=int, default=None)
    p.set_defaults(func=_cmd_se)

    p = sub.add_parser("complexity", help="real-operation count of the ML detector")
    p.add_argument("--scheme", required=True)
    p.add_argument("--nr", dest="n_r", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.set_defaults(func=_cmd_complexity)

    p = sub.add_parser("actable", help="print the pre-defined antenna combination table")
    p.add_argument("--nr", dest="n_r", type=int, required=True)
    p.set_defaults(func=_cmd_actable)

    p = sub.add_parser("bench", help="time the detection backends on one block")
    p.add_argument("--scheme", choices=("rasm", "rassk"), default="rasm")
    p.add_argument("--nr", dest="n_r", type=int, default=4)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--snr", type=float, default=10.0)
    p.add_argument("--trials", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=1234)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
