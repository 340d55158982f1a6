"""Python access to the fermigas solvers.

Configs are passed as JSON strings or dicts with the same schema the CLI reads.
"""
import json as _json

from ._core import (
    CapError,
    NumericError,
    ValidationError,
    __version__,
    binomial_upper_tail,
    df_uniform_check,
    mismatch_factor,
    oracle_ground_state,
    run_cli,
    tf_constants,
)
from . import _core


def _as_json(config):
    return config if isinstance(config, str) else _json.dumps(config)


def tf_minimize(config):
    return _core.tf_minimize(_as_json(config))


def vlasov_check(config, tol=1e-3):
    return _core.vlasov_check(_as_json(config), tol)


__all__ = [
    "CapError",
    "NumericError",
    "ValidationError",
    "__version__",
    "binomial_upper_tail",
    "df_uniform_check",
    "mismatch_factor",
    "oracle_ground_state",
    "run_cli",
    "tf_constants",
    "tf_minimize",
    "vlasov_check",
]
