"""Builders that turn plain-dict specifications into models, densities and
families. Shared by the experiment harness (whose reports echo these dicts)
and the command-line interface. Unknown keys are rejected.
"""

from __future__ import annotations

from typing import Any, Mapping

import numpy as np

from .distributions import (
    Density,
    make_gamma,
    make_gaussian,
    make_laplace,
    make_logistic,
    make_mixture,
    make_spike,
    make_uniform,
)
from .models import BayesModel, exponential_model, gaussian_mean_model, mvn_mean_model
from .varfit import FAMILY_BUILDERS, VariationalFamily

__all__ = ["ConfigError", "build_model", "build_density", "build_family", "check_keys"]


class ConfigError(ValueError):
    """A configuration dict is malformed (unknown key, bad value, ...)."""


def check_keys(d: Mapping[str, Any], allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) {sorted(unknown)} in {where}; allowed: {sorted(allowed)}"
        )


def build_model(spec: Mapping[str, Any]) -> BayesModel:
    """Model spec: {"name": "gaussian-mean", "mu0": 0.0, "sigma": 1.0},
    {"name": "mvn-mean", "mu0": [..], "Sigma": [[..]]} or
    {"name": "exponential", "prior": <density spec, optional>}."""
    if "name" not in spec:
        raise ConfigError("model spec needs a 'name'")
    name = spec["name"]
    if name == "gaussian-mean":
        check_keys(spec, {"name", "mu0", "sigma"}, "model spec")
        return gaussian_mean_model(float(spec.get("mu0", 0.0)), float(spec.get("sigma", 1.0)))
    if name == "mvn-mean":
        check_keys(spec, {"name", "mu0", "Sigma"}, "model spec")
        return mvn_mean_model(
            np.asarray(spec.get("mu0", [0.0, 0.0]), dtype=float),
            np.asarray(spec.get("Sigma", np.eye(2)), dtype=float),
        )
    if name == "exponential":
        check_keys(spec, {"name", "prior"}, "model spec")
        prior = build_density(spec["prior"]) if "prior" in spec else None
        return exponential_model(prior)
    raise ConfigError(
        f"unknown model {name!r}; valid: gaussian-mean, mvn-mean, exponential"
    )


def build_density(spec: Mapping[str, Any]) -> Density:
    """Density spec by kind: gaussian (mean, cov), laplace (loc, scale),
    logistic (loc, scale), gamma (shape, rate), uniform (lo, hi),
    spike (center, width), mixture (weights, components)."""
    if "kind" not in spec:
        raise ConfigError("density spec needs a 'kind'")
    kind = spec["kind"]
    if kind == "gaussian":
        check_keys(spec, {"kind", "mean", "cov"}, "density spec")
        return make_gaussian(
            np.asarray(spec["mean"], dtype=float), np.asarray(spec["cov"], dtype=float)
        )
    if kind == "laplace":
        check_keys(spec, {"kind", "loc", "scale"}, "density spec")
        return make_laplace(float(spec["loc"]), float(spec["scale"]))
    if kind == "logistic":
        check_keys(spec, {"kind", "loc", "scale"}, "density spec")
        return make_logistic(float(spec["loc"]), float(spec["scale"]))
    if kind == "gamma":
        check_keys(spec, {"kind", "shape", "rate"}, "density spec")
        return make_gamma(float(spec["shape"]), float(spec["rate"]))
    if kind == "uniform":
        check_keys(spec, {"kind", "lo", "hi"}, "density spec")
        return make_uniform(float(spec["lo"]), float(spec["hi"]))
    if kind == "spike":
        check_keys(spec, {"kind", "center", "width"}, "density spec")
        return make_spike(float(spec["center"]), float(spec["width"]))
    if kind == "mixture":
        check_keys(spec, {"kind", "weights", "components"}, "density spec")
        return make_mixture(
            [float(w) for w in spec["weights"]],
            [build_density(c) for c in spec["components"]],
        )
    raise ConfigError(f"unknown density kind {kind!r}")


def build_family(name: str) -> VariationalFamily:
    if name not in FAMILY_BUILDERS:
        raise ConfigError(
            f"unknown family {name!r}; valid: {sorted(FAMILY_BUILDERS)}"
        )
    return FAMILY_BUILDERS[name]()
