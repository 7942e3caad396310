"""Link-level toolkit for RIS-driven receive index modulation.

The surface most callers need: scheme configuration plus the sweep runners
in harness, the closed-form tools in analysis, and the mapping helpers.
"""

__version__ = "0.1.0"

from .analysis import (
    AberContext,
    aber_bound_curve,
    aber_union_bound,
    detection_complexity,
    spectral_efficiency,
)
from .harness import (
    ConfigError,
    SchemeConfig,
    load_config,
    run_ber_sweep,
    run_ber_trial,
    run_sr_sweep,
    wilson_interval,
)
from .mapping import build_constellation, select_predefined_acs
from .secrecy import estimate_secrecy

__all__ = [
    "__version__",
    "AberContext",
    "aber_bound_curve",
    "aber_union_bound",
    "detection_complexity",
    "spectral_efficiency",
    "ConfigError",
    "SchemeConfig",
    "load_config",
    "run_ber_sweep",
    "run_ber_trial",
    "run_sr_sweep",
    "wilson_interval",
    "build_constellation",
    "select_predefined_acs",
    "estimate_secrecy",
]
