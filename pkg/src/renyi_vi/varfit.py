"""Minimize a divergence objective over a parametric variational family.

Two optimizers: a deterministic one (coarse grid over location x log-spaced
grid over scale, then coordinate golden-section refinement) for objectives
computable by closed form or quadrature, and a stochastic one that descends
the Monte-Carlo evidence upper bound with central finite differences under
common random numbers.

Objectives are dispatched per pair: Gaussian/Gaussian uses the closed forms
(validated against quadrature in the test suite), everything else is scored
by quadrature. An infinite objective region (dominance failure or a
divergent integral) is skipped by the grid and reported as an error only
when the whole initial grid is infinite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .distributions import Density, make_gamma, make_gaussian, make_laplace, make_logistic
from .divergence import (
    DivergenceEstimate,
    kl_forward,
    kl_reverse,
    renyi_gauss_closed,
    renyi_quadrature,
)
from .models import BayesModel

__all__ = [
    "OBJECTIVE_KINDS",
    "FAMILY_BUILDERS",
    "VariationalFamily",
    "FitResult",
    "DominanceError",
    "gaussian_family",
    "laplace_family",
    "logistic_family",
    "gamma_family",
    "isotropic_gaussian_family",
    "fit",
    "fit_stochastic",
]

OBJECTIVE_KINDS = ("renyi-alpha", "kl-reverse", "kl-forward", "mc-upper-bound")

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class DominanceError(ValueError):
    """The family cannot dominate the target: objective infinite everywhere."""


@dataclass(frozen=True)
class VariationalFamily:
    """Parametric map from a parameter vector to a Density.

    ``param_roles`` marks each coordinate "location" or "scale"; scales are
    optimized in log space. ``std_sampler``/``assemble`` provide the
    location-scale reparameterization (theta = loc + scale * eps) where the
    family admits one; they are None otherwise.
    """

    name: str
    dim: int
    param_names: tuple[str, ...]
    param_roles: tuple[str, ...]
    param_bounds: tuple[tuple[float, float], ...]
    unpack: Callable[[np.ndarray], Density]
    init_from: Callable[[Density], np.ndarray]
    std_sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None
    assemble: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None

    @property
    def param_dim(self) -> int:
        return len(self.param_names)


@dataclass
class FitResult:
    """Optimization outcome: parameters, fitted density, scored objective."""

    params: np.ndarray
    density: Density
    objective: DivergenceEstimate
    objective_kind: str
    trace: list[dict]
    converged: bool
    seed: int | None
    n_evals: int
    config: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "params": [float(v) for v in np.atleast_1d(self.params)],
            "param_names": list(self.config.get("param_names", [])),
            "objective": {
                "value": float(self.objective.value),
                "method": self.objective.method,
                "error": float(self.objective.error),
                "alpha": self.objective.alpha,
            },
            "objective_kind": self.objective_kind,
            "converged": bool(self.converged),
            "seed": self.seed,
            "n_evals": int(self.n_evals),
            "trace_length": len(self.trace),
            "trace_tail": self.trace[-5:],
            "config": self.config,
            "extras": {k: v for k, v in self.extras.items() if _is_jsonable(v)},
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_json_dict(), **kwargs)


def _is_jsonable(v) -> bool:
    return isinstance(v, (int, float, str, bool, type(None), list, dict))


def _target_sd(target: Density) -> np.ndarray:
    cov = np.atleast_2d(target.cov)
    return np.sqrt(np.diag(cov))


def gaussian_family() -> VariationalFamily:
    return VariationalFamily(
        name="gaussian",
        dim=1,
        param_names=("mean", "sd"),
        param_roles=("location", "scale"),
        param_bounds=((-np.inf, np.inf), (0.0, np.inf)),
        unpack=lambda p: make_gaussian(p[0], p[1] ** 2),
        init_from=lambda t: np.array([float(np.atleast_1d(t.mean)[0]), _target_sd(t)[0]]),
        std_sampler=lambda rng, n: rng.standard_normal(n),
        assemble=lambda p, eps: p[0] + p[1] * eps,
    )


def laplace_family() -> VariationalFamily:
    return VariationalFamily(
        name="laplace",
        dim=1,
        param_names=("loc", "scale"),
        param_roles=("location", "scale"),
        param_bounds=((-np.inf, np.inf), (0.0, np.inf)),
        unpack=lambda p: make_laplace(p[0], p[1]),
        init_from=lambda t: np.array(
            [float(np.atleast_1d(t.mean)[0]), _target_sd(t)[0] / math.sqrt(2.0)]
        ),
        std_sampler=lambda rng, n: rng.laplace(0.0, 1.0, size=n),
        assemble=lambda p, eps: p[0] + p[1] * eps,
    )


def logistic_family() -> VariationalFamily:
    return VariationalFamily(
        name="logistic",
        dim=1,
        param_names=("loc", "scale"),
        param_roles=("location", "scale"),
        param_bounds=((-np.inf, np.inf), (0.0, np.inf)),
        unpack=lambda p: make_logistic(p[0], p[1]),
        init_from=lambda t: np.array(
            [float(np.atleast_1d(t.mean)[0]), _target_sd(t)[0] * math.sqrt(3.0) / math.pi]
        ),
        std_sampler=lambda rng, n: rng.logistic(0.0, 1.0, size=n),
        assemble=lambda p, eps: p[0] + p[1] * eps,
    )


def gamma_family() -> VariationalFamily:
    # parameterized by (mean, sd); shape = (m/s)^2, rate = m/s^2
    def unpack(p):
        m, s = float(p[0]), float(p[1])
        return make_gamma((m / s) ** 2, m / s**2)

    return VariationalFamily(
        name="gamma",
        dim=1,
        param_names=("mean", "sd"),
        param_roles=("location", "scale"),
        param_bounds=((0.0, np.inf), (0.0, np.inf)),
        unpack=unpack,
        init_from=lambda t: np.array([float(np.atleast_1d(t.mean)[0]), _target_sd(t)[0]]),
    )


def isotropic_gaussian_family() -> VariationalFamily:
    def unpack(p):
        return make_gaussian(np.array([p[0], p[1]]), p[2] ** 2 * np.eye(2))

    def init_from(t):
        m = np.atleast_1d(t.mean)
        s = math.sqrt(float(np.trace(np.atleast_2d(t.cov))) / 2.0)
        return np.array([float(m[0]), float(m[1]), s])

    return VariationalFamily(
        name="isotropic-gaussian-2d",
        dim=2,
        param_names=("mean_x", "mean_y", "sd"),
        param_roles=("location", "location", "scale"),
        param_bounds=((-np.inf, np.inf), (-np.inf, np.inf), (0.0, np.inf)),
        unpack=unpack,
        init_from=init_from,
        std_sampler=lambda rng, n: rng.standard_normal((n, 2)),
        assemble=lambda p, eps: np.array([p[0], p[1]]) + p[2] * eps,
    )


FAMILY_BUILDERS: dict[str, Callable[[], VariationalFamily]] = {
    "gaussian": gaussian_family,
    "laplace": laplace_family,
    "logistic": logistic_family,
    "gamma": gamma_family,
    "isotropic-gaussian-2d": isotropic_gaussian_family,
}


def _resolve_target(target) -> Density:
    if isinstance(target, Density):
        return target
    if isinstance(target, tuple) and len(target) == 2 and isinstance(target[0], BayesModel):
        model, data = target
        return model.exact_posterior(data)
    raise TypeError("target must be a Density or a (BayesModel, data) pair")


def _make_scorer(target: Density, family: VariationalFamily, kind: str,
                 alpha: float | None, quad_tol: float):
    if kind not in OBJECTIVE_KINDS:
        raise ValueError(f"unknown objective kind {kind!r}; choose from {OBJECTIVE_KINDS}")
    if kind == "renyi-alpha":
        if alpha is None or not alpha > 1.0:
            raise ValueError("renyi-alpha objective requires alpha > 1")

    def estimate(params: np.ndarray) -> DivergenceEstimate:
        q = family.unpack(params)
        if kind == "renyi-alpha":
            if target.kind == "gaussian" and q.kind == "gaussian":
                return renyi_gauss_closed(target, q, alpha)
            return renyi_quadrature(target, q, alpha, rel_tol=quad_tol)
        if kind == "kl-forward":
            return kl_forward(target, q, rel_tol=quad_tol)
        if kind == "kl-reverse":
            return kl_reverse(target, q, rel_tol=quad_tol)
        raise ValueError("mc-upper-bound is served by fit_stochastic")

    return estimate


def _positive_location(bounds) -> list[bool]:
    return [lo == 0.0 for lo, _ in bounds]


class _Objective:
    """Caching, budgeted wrapper around a parameter scorer (internal coords)."""

    def __init__(self, score, family, budget):
        self._score = score
        self._family = family
        self.budget = budget
        self.n_evals = 0
        self._cache: dict[tuple, float] = {}
        self._pos = _positive_location(family.param_bounds)
        self._roles = family.param_roles

    def natural(self, z: np.ndarray) -> np.ndarray:
        out = np.array(z, dtype=float)
        for i, role in enumerate(self._roles):
            if role == "scale" or self._pos[i]:
                out[i] = math.exp(out[i])
        return out

    def internal(self, params: np.ndarray) -> np.ndarray:
        out = np.array(params, dtype=float)
        for i, role in enumerate(self._roles):
            if role == "scale" or self._pos[i]:
                out[i] = math.log(out[i])
        return out

    def __call__(self, z: np.ndarray) -> float:
        key = tuple(np.round(np.asarray(z, dtype=float), 14))
        if key in self._cache:
            return self._cache[key]
        if self.n_evals >= self.budget:
            raise _BudgetExhausted
        self.n_evals += 1
        val = float(self._score(self.natural(np.asarray(z, dtype=float))).value)
        self._cache[key] = val
        return val


class _BudgetExhausted(Exception):
    pass


def _golden_1d(f1, lo, hi, iters):
    """Golden-section minimum of f1 on [lo, hi]; returns (x, f(x))."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f1(c), f1(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f1(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f1(d)
    return (c, fc) if fc <= fd else (d, fd)


def fit(
    target,
    family: VariationalFamily,
    objective_kind: str,
    alpha: float | None = None,
    budget: int = 400,
    seed: int | None = None,
    quad_tol: float = 1e-8,
) -> FitResult:
    """Deterministic divergence minimization over the family.

    Coarse grid (linear in locations, log-spaced in scales around a
    moment-matched start), then coordinate golden-section refinement;
    converged means the last sweep improved the objective by < 1e-8.
    Raises :class:`DominanceError` when the objective is infinite on the
    entire initial grid. ``budget`` caps objective evaluations.
    """
    if objective_kind == "mc-upper-bound":
        raise ValueError("the mc-upper-bound objective is served by fit_stochastic")
    target = _resolve_target(target)
    if target.dim != family.dim:
        raise ValueError(f"family dim {family.dim} != target dim {target.dim}")
    score = _make_scorer(target, family, objective_kind, alpha, quad_tol)
    obj = _Objective(score, family, budget)

    x0 = family.init_from(target)
    sd = _target_sd(target)
    for i, (lo, _hi) in enumerate(family.param_bounds):
        if lo == 0.0 and x0[i] <= 0.0:
            # positivity-bounded coordinate started out of range (e.g. a
            # positive-support family aimed at a zero-mean target)
            x0[i] = max(1e-8, 0.1 * float(sd[min(i, sd.size - 1)]))
    z0 = obj.internal(x0)

    # keep the coarse grid to a minority of the budget so refinement runs
    small = budget < 300 or family.param_dim >= 3
    loc_offsets = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) if small else np.array(
        [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0]
    )
    n_scale = 9 if small else 13
    amax = math.sqrt(alpha) if (alpha is not None and alpha > 1) else 1.0
    scale_offsets = np.linspace(math.log(0.2), math.log(4.0 * max(1.0, amax)), n_scale)

    axes = []
    pos = _positive_location(family.param_bounds)
    loc_seen = 0
    for i, role in enumerate(family.param_roles):
        if role == "scale":
            axes.append(z0[i] + scale_offsets)
        else:
            s = sd[min(loc_seen, sd.size - 1)]
            loc_seen += 1
            if pos[i]:
                # positive location: multiplicative grid in log space
                axes.append(z0[i] + np.log1p(np.clip(loc_offsets * s / x0[i], -0.9, 9.0)))
            else:
                axes.append(z0[i] + loc_offsets * s)
        axes[-1] = np.unique(axes[-1])

    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.column_stack([m.ravel() for m in mesh])

    trace: list[dict] = []
    best_val = np.inf
    best_z = None
    try:
        for zrow in grid:
            v = obj(zrow)
            if v < best_val:
                best_val = v
                best_z = np.array(zrow)
                trace.append(
                    {"step": obj.n_evals, "params": obj.natural(best_z).tolist(),
                     "objective": best_val}
                )
    except _BudgetExhausted:
        pass
    if best_z is None or not np.isfinite(best_val):
        raise DominanceError(
            f"family {family.name!r} cannot dominate the target: objective "
            "infinite on the entire initial grid"
        )

    steps = np.array(
        [
            (axes[i][1] - axes[i][0]) if axes[i].size > 1 else 0.5
            for i in range(len(axes))
        ]
    )
    converged = False
    try:
        for _sweep in range(8):
            sweep_start = best_val
            for i in range(len(axes)):
                zi = best_z.copy()

                def f1(v, i=i, zi=zi):
                    w = zi.copy()
                    w[i] = v
                    return obj(w)

                xi, fv = _golden_1d(f1, best_z[i] - steps[i], best_z[i] + steps[i], 30)
                if fv < best_val:
                    best_val = fv
                    best_z = zi.copy()
                    best_z[i] = xi
                    trace.append(
                        {"step": obj.n_evals, "params": obj.natural(best_z).tolist(),
                         "objective": best_val}
                    )
            steps = steps * 0.35
            if sweep_start - best_val < 1e-8:
                converged = True
                break
    except _BudgetExhausted:
        converged = False

    params = obj.natural(best_z)
    final = score(params)
    return FitResult(
        params=params,
        density=family.unpack(params),
        objective=final,
        objective_kind=objective_kind,
        trace=trace,
        converged=converged,
        seed=seed,
        n_evals=obj.n_evals,
        config={
            "family": family.name,
            "param_names": list(family.param_names),
            "objective_kind": objective_kind,
            "alpha": alpha,
            "budget": budget,
            "quad_tol": quad_tol,
        },
    )


def _resolve_log_joint(target):
    """(log_joint, target_density_for_rescoring, dim)."""
    if isinstance(target, Density):
        return target.log_pdf, target, target.dim
    if isinstance(target, tuple) and len(target) == 2 and isinstance(target[0], BayesModel):
        model, data = target
        data = np.asarray(data, dtype=float)

        def log_joint(theta):
            th = np.atleast_1d(theta)
            if model.dim == 1:
                th1 = th.reshape(-1)
                return model.prior.log_pdf(th1) + model.loglik(data, th1)
            th2 = th.reshape(-1, model.dim)
            return model.prior.log_pdf(th2) + model.loglik(data, th2)

        return log_joint, model.exact_posterior(data), model.dim
    raise TypeError("target must be a Density or a (BayesModel, data) pair")


def fit_stochastic(
    target,
    family: VariationalFamily,
    alpha: float,
    steps: int = 2000,
    batch_size: int = 256,
    step_size: Callable[[int], float] | float | None = None,
    seed: int = 0,
    quad_tol: float = 1e-8,
) -> FitResult:
    """Stochastic descent of the Monte-Carlo evidence upper bound.

    Gradients are central finite differences in internal coordinates with
    common random numbers (the same standard draws are pushed through both
    sides of every difference), so each step is a deterministic function of
    (seed, step index). Final parameters are re-scored by the quadrature
    Renyi objective when the dimension allows it.
    """
    if not alpha > 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    if family.std_sampler is None or family.assemble is None:
        raise ValueError(
            f"family {family.name!r} has no location-scale reparameterization"
        )
    log_joint, target_density, dim = _resolve_log_joint(target)
    if dim != family.dim:
        raise ValueError(f"family dim {family.dim} != target dim {dim}")

    if step_size is None:
        sched = lambda t: 0.25 / (1.0 + 16.0 * t / max(steps, 1))
    elif callable(step_size):
        sched = step_size
    else:
        sched = lambda t: float(step_size)

    helper = _Objective(lambda p: DivergenceEstimate(0.0, "closed-form", 0.0), family, 1)
    z = helper.internal(family.init_from(target_density))
    p = len(z)
    h = 1e-4

    def surrogate(zv: np.ndarray, eps: np.ndarray) -> float:
        if not np.all(np.isfinite(zv)):
            return np.inf
        try:
            params = helper.natural(zv)
            q = family.unpack(params)
        except (ValueError, OverflowError):
            return np.inf  # parameters blown out of the representable range
        theta = family.assemble(params, eps)
        lw = np.asarray(log_joint(theta), dtype=float) - q.log_pdf(theta)
        m = float(np.max(alpha * lw))
        if m == -np.inf:
            return np.inf
        return (m + math.log(float(np.mean(np.exp(alpha * lw - m))))) / alpha

    trace: list[dict] = []
    f_init = None
    best = (np.inf, z.copy())
    for t in range(steps):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(t,)))
        eps = family.std_sampler(rng, batch_size)
        f0 = surrogate(z, eps)
        if f_init is None:
            f_init = f0
        if f0 > f_init + 1e3:
            err = RuntimeError(
                f"divergent trajectory at step {t}: objective {f0:.3g} "
                f"exceeds initial {f_init:.3g} + 1e3"
            )
            err.trace = trace  # type: ignore[attr-defined]
            raise err
        accepted = f0 < best[0]
        if accepted:
            best = (f0, z.copy())
        trace.append(
            {"step": t, "params": helper.natural(z).tolist(), "objective": f0,
             "accepted": accepted}
        )
        grad = np.empty(p)
        for i in range(p):
            zp = z.copy()
            zm = z.copy()
            zp[i] += h
            zm[i] -= h
            grad[i] = (surrogate(zp, eps) - surrogate(zm, eps)) / (2.0 * h)
        z = z - sched(t) * grad
        if t == (3 * steps) // 4:
            z_tail_sum = z.copy()
            n_tail = 1
        elif t > (3 * steps) // 4:
            z_tail_sum += z
            n_tail += 1

    # average the tail iterates: same minimizer, much lower noise floor
    if steps >= 8:
        z = z_tail_sum / n_tail

    params = helper.natural(z)
    q_final = family.unpack(params)
    if dim <= 2:
        objective = renyi_quadrature(target_density, q_final, alpha, rel_tol=quad_tol)
    else:
        objective = DivergenceEstimate(np.nan, "monte-carlo", np.nan, alpha)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(steps,)))
    eps = family.std_sampler(rng, batch_size)
    final_mc = surrogate(z, eps)
    return FitResult(
        params=params,
        density=q_final,
        objective=objective,
        objective_kind="mc-upper-bound",
        trace=trace,
        converged=bool(np.isfinite(final_mc)),
        seed=seed,
        n_evals=steps * (1 + 2 * p),
        config={
            "family": family.name,
            "param_names": list(family.param_names),
            "objective_kind": "mc-upper-bound",
            "alpha": alpha,
            "steps": steps,
            "batch_size": batch_size,
        },
        extras={"final_mc_bound": float(final_mc)},
    )
