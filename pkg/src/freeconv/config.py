"""Experiment configuration: parsing, validation and semantic hashing.

Configs are JSON objects.  Complex numbers are ``[re, im]`` pairs and an
m x m matrix is a row-major list of rows of such pairs.  Validation fills
defaults, rejects unknown keys at every level, and names the offending
field in every diagnostic.  The config hash covers exactly the semantic
fields (after defaulting), so it is stable under key reordering and blind
to the output directory and worker count.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .ensembles import parse_distribution
from .freeprob.solver import FreeModel
from .ncpoly import CoefficientPencil, parse as parse_poly


class ConfigError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"config field {field!r}: {message}")
        self.field = field


EXPERIMENTS = (
    "solve", "density", "norm-predict", "converge", "master-check-iid",
    "master-check-wishart", "correction-check", "variance-check",
    "wishart-ibp", "containment",
)


def _require(cfg, field, kind=None):
    if field not in cfg:
        raise ConfigError(field, "missing")
    v = cfg[field]
    if kind is not None and not isinstance(v, kind):
        raise ConfigError(field, f"expected {kind}, got {type(v).__name__}")
    return v


def _reject_unknown(cfg, allowed, context=""):
    for k in cfg:
        if k not in allowed:
            where = f"{context}.{k}" if context else k
            raise ConfigError(where, "unknown key")


def decode_complex(v, field):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ConfigError(field, "expected a number or [re, im] pair")


def decode_matrix(v, field):
    try:
        rows = [[decode_complex(x, field) for x in row] for row in v]
        a = np.array(rows, dtype=complex)
    except (TypeError, ConfigError):
        raise ConfigError(field, "expected a row-major list of [re, im] pairs")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigError(field, "matrix must be square")
    return a


def decode_pencil(v, field="pencil"):
    if not isinstance(v, dict):
        raise ConfigError(field, "expected an object with m and coefficients")
    _reject_unknown(v, {"m", "coefficients"}, field)
    m = _require(v, "m", int)
    coeffs = _require(v, "coefficients", list)
    mats = [decode_matrix(c, f"{field}.coefficients[{i}]") for i, c in enumerate(coeffs)]
    try:
        return CoefficientPencil(m, tuple(mats))
    except ValueError as exc:
        raise ConfigError(field, str(exc))


def decode_model(v, field="model"):
    if not isinstance(v, dict):
        raise ConfigError(field, "expected an object with kind")
    _reject_unknown(v, {"kind", "alpha"}, field)
    try:
        return FreeModel(_require(v, "kind", str), alpha=v.get("alpha"))
    except ValueError as exc:
        raise ConfigError(field, str(exc))


def decode_distribution(v, field="distribution"):
    if not isinstance(v, str):
        raise ConfigError(field, "expected a string spec")
    try:
        return parse_distribution(v)
    except ValueError as exc:
        raise ConfigError(field, str(exc))


def decode_polynomial(v, field="polynomial"):
    if not isinstance(v, dict):
        raise ConfigError(field, "expected an object with text and num_generators")
    _reject_unknown(v, {"text", "num_generators"}, field)
    try:
        return parse_poly(_require(v, "text", str), _require(v, "num_generators", int))
    except ValueError as exc:
        raise ConfigError(field, str(exc))


def decode_lambda(v, m, field="lambda"):
    if isinstance(v, dict):
        _reject_unknown(v, {"scalar", "matrix"}, field)
        if "scalar" in v:
            return decode_complex(v["scalar"], f"{field}.scalar") * np.eye(m)
        if "matrix" in v:
            mat = decode_matrix(v["matrix"], f"{field}.matrix")
            if mat.shape != (m, m):
                raise ConfigError(field, f"matrix must be {m} x {m}")
            return mat
    raise ConfigError(field, "expected {scalar: [re, im]} or {matrix: ...}")


def decode_ensemble(v, field="ensemble"):
    from .montecarlo.resolvent import WignerEnsemble, WishartEnsemble

    if not isinstance(v, dict):
        raise ConfigError(field, "expected an object with kind")
    _reject_unknown(v, {"kind", "distribution", "alpha"}, field)
    kind = _require(v, "kind", str)
    if kind == "wigner":
        return WignerEnsemble(decode_distribution(_require(v, "distribution", str),
                                                  f"{field}.distribution"))
    if kind == "wishart":
        alpha = _require(v, "alpha", (int, float))
        if alpha < 1:
            raise ConfigError(f"{field}.alpha", "must be >= 1")
        return WishartEnsemble(float(alpha))
    raise ConfigError(f"{field}.kind", "must be wigner or wishart")


def decode_int_list(v, field, minimum=1):
    if not isinstance(v, list) or not v or not all(isinstance(x, int) for x in v):
        raise ConfigError(field, "expected a nonempty list of integers")
    if any(x < minimum for x in v):
        raise ConfigError(field, f"entries must be >= {minimum}")
    return list(v)


def decode_replicas(v, n_values, field="replicas"):
    """Replica counts: an int applied to every n, or one int per n value."""
    if isinstance(v, int):
        return [v] * len(n_values)
    counts = decode_int_list(v, field)
    if len(counts) != len(n_values):
        raise ConfigError(field, f"need one count per n value ({len(n_values)})")
    return counts


# -- field tables ------------------------------------------------------------

_COMMON = {"experiment", "seed"}

_FIELDS = {
    "solve": {"pencil", "model", "lambda", "tol"},
    "density": {"pencil", "model", "grid", "y_levels", "threshold", "edge_floor"},
    "norm-predict": {"polynomial", "model", "tol", "expected", "expected_tol"},
    "converge": {"polynomial", "ensemble", "n_values", "seeds", "prediction",
                 "final_bound"},
    "master-check-iid": {"pencil", "distribution", "lambda", "n_values", "replicas",
                         "rn_replicas", "control_moments", "without_slope_range",
                         "with_slope_range"},
    "master-check-wishart": {"pencil", "alpha", "lambda", "n_values", "replicas",
                             "slope_range", "consistency_factor"},
    "correction-check": {"pencil", "distribution", "lambda", "n_values", "replicas",
                         "control_moments"},
    "variance-check": {"target", "ensemble", "n_values", "replicas", "slope_range"},
    "wishart-ibp": {"n", "p", "phi", "h_entry", "replicas", "validated_only"},
    "containment": {"pencil", "ensemble", "n", "epsilon", "seeds", "support",
                    "pass_rate"},
}


def validate_config(raw):
    """Validate a raw config dict; returns (experiment, canonical dict).

    The canonical dict has defaults filled and only semantic fields, ready
    for hashing and decoding.
    """
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be an object")
    exp = _require(raw, "experiment", str)
    if exp not in EXPERIMENTS:
        raise ConfigError("experiment",
                          f"unknown experiment {exp!r}; valid: {', '.join(EXPERIMENTS)}")
    allowed = _COMMON | _FIELDS[exp]
    _reject_unknown(raw, allowed)
    cfg = dict(raw)
    cfg.setdefault("seed", 0)
    if not isinstance(cfg["seed"], int):
        raise ConfigError("seed", "expected an integer")
    return exp, cfg


def config_hash(cfg):
    """sha256 of the canonical (sorted-key) JSON, truncated to 12 hex chars."""
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]
