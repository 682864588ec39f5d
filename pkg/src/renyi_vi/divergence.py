"""Renyi divergence D_alpha(p || q) for alpha > 1, forward and reverse KL,
a Monte-Carlo evidence upper bound, and the Holder lower bound on the Renyi
integral.

Infinity is a first-class value here: D_alpha is infinite whenever q fails
to dominate p or the integral q (p/q)^alpha diverges, and both outcomes are
reported as ``value = inf`` rather than raised. The divergence-detection
threshold is :data:`OVERFLOW_NATS`: once the shifted log-integrand exceeds
it on any refinement node (i.e. the integrand keeps growing as the adaptive
pass widens), the integral is declared divergent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import Density, bulk_points, dominates
from .numerics import QuadratureSpec, integrate, integrate_2d, log_sum_exp

__all__ = [
    "CLOSED_FORM",
    "QUADRATURE",
    "MONTE_CARLO",
    "OVERFLOW_NATS",
    "DivergenceEstimate",
    "MCUpperBound",
    "renyi_quadrature",
    "renyi_gauss_closed",
    "kl_forward",
    "kl_reverse",
    "mc_renyi_upper_bound",
    "holder_lower_bound",
]

CLOSED_FORM = "closed-form"
QUADRATURE = "quadrature"
MONTE_CARLO = "monte-carlo"

# Log-integrand excess (relative to the probe-grid maximum) beyond which the
# Renyi integral is declared divergent. 700 nats is just below exp-overflow
# in float64, so a finite integral whose probe shift is sound never trips it.
OVERFLOW_NATS = 700.0


@dataclass(frozen=True)
class DivergenceEstimate:
    """A divergence value in [0, inf] with its method tag and error bound.

    ``alpha`` is None for KL estimates (the alpha -> 1 limit is served by a
    separate code path, never by renyi_*).
    """

    value: float
    method: str
    error: float
    alpha: float | None = None

    @property
    def is_infinite(self) -> bool:
        return np.isinf(self.value)


@dataclass(frozen=True)
class MCUpperBound:
    """Monte-Carlo estimate of (1/alpha) log E_q (joint/q)^alpha.

    The population value equals log p(X_n) + ((alpha-1)/alpha) *
    D_alpha(posterior || q). ``stderr`` is the delta-method standard error
    of the estimate; it is exactly 0 when every draw carries the same
    log-weight.
    """

    value: float
    stderr: float
    n_draws: int
    alpha: float


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > 1.0:
        raise ValueError(
            f"alpha must exceed 1 (got {alpha}); use kl_forward for the limit"
        )
    return alpha


def _probe_grid_1d(p: Density, q: Density) -> np.ndarray:
    pts = [bulk_points(p), bulk_points(q)]
    lo, hi = p.support[0]
    anchors = np.concatenate([a for a in pts if a.size] or [np.array([0.0])])
    span_lo, span_hi = float(anchors.min()), float(anchors.max())
    if span_hi <= span_lo:
        span_lo, span_hi = span_lo - 1.0, span_hi + 1.0
    dense = np.linspace(span_lo, span_hi, 1601)
    grid = np.concatenate([dense, anchors])
    grid = grid[(grid > lo) & (grid < hi)]
    if grid.size == 0:
        grid = np.linspace(max(lo, -1e3), min(hi, 1e3), 1601)
    return np.unique(grid)


def _renyi_quadrature_1d(p, q, alpha, rel_tol):
    def log_integrand(x):
        lp = p.log_pdf(x)
        lq = q.log_pdf(x)
        out = np.full(lp.shape, -np.inf)
        ok = lp > -np.inf
        out[ok] = alpha * lp[ok] + (1.0 - alpha) * lq[ok]
        return out

    grid = _probe_grid_1d(p, q)
    lvals = log_integrand(grid)
    shift = float(np.max(lvals))
    if shift == -np.inf:
        raise ValueError("integrand vanishes on the entire probe grid")

    overflow = {"hit": False}

    def f(x):
        if overflow["hit"]:  # integral already declared divergent
            return np.zeros(np.shape(x)[:1] if np.ndim(x) > 1 else np.shape(x))
        lv = log_integrand(x) - shift
        if np.any(lv > OVERFLOW_NATS):
            overflow["hit"] = True
            return np.zeros(lv.shape)
        return np.exp(lv)

    lo, hi = p.support[0]
    bps = tuple(np.unique(np.concatenate([grid[:: max(1, grid.size // 64)],
                                          [float(grid[int(np.argmax(lvals))])]])))
    spec = QuadratureSpec(lower=lo, upper=hi, rel_tol=rel_tol,
                          breakpoints=bps)
    res = integrate(f, spec)
    if overflow["hit"] or not np.isfinite(res.value):
        return DivergenceEstimate(np.inf, QUADRATURE, 0.0, alpha)
    if res.value <= 0.0:
        raise ArithmeticError("Renyi integral evaluated to a non-positive value")
    value = (shift + np.log(res.value)) / (alpha - 1.0)
    err = res.error / (res.value * (alpha - 1.0))
    return DivergenceEstimate(float(value), QUADRATURE, float(err), alpha)


def _renyi_quadrature_2d(p, q, alpha, rel_tol):
    def log_integrand(pts):
        lp = p.log_pdf(pts)
        lq = q.log_pdf(pts)
        out = np.full(lp.shape, -np.inf)
        ok = lp > -np.inf
        out[ok] = alpha * lp[ok] + (1.0 - alpha) * lq[ok]
        return out

    bx = np.unique(np.concatenate([bulk_points(p, 0), bulk_points(q, 0)]))
    by = np.unique(np.concatenate([bulk_points(p, 1), bulk_points(q, 1)]))
    gx = np.linspace(bx.min(), bx.max(), 81)
    gy = np.linspace(by.min(), by.max(), 81)
    mesh = np.column_stack([np.repeat(gx, gy.size), np.tile(gy, gx.size)])
    shift = float(np.max(log_integrand(mesh)))
    if shift == -np.inf:
        raise ValueError("integrand vanishes on the entire probe grid")

    overflow = {"hit": False}

    def f(pts):
        if overflow["hit"]:  # integral already declared divergent
            return np.zeros(np.shape(pts)[:1] if np.ndim(pts) > 1 else np.shape(pts))
        lv = log_integrand(pts) - shift
        if np.any(lv > OVERFLOW_NATS):
            overflow["hit"] = True
            return np.zeros(lv.shape)
        return np.exp(lv)

    spec_x = QuadratureSpec(*p.support[0], rel_tol=rel_tol, breakpoints=tuple(bx))
    spec_y = QuadratureSpec(*p.support[1], rel_tol=rel_tol, breakpoints=tuple(by))
    res = integrate_2d(f, spec_x, spec_y)
    if overflow["hit"] or not np.isfinite(res.value):
        return DivergenceEstimate(np.inf, QUADRATURE, 0.0, alpha)
    if res.value <= 0.0:
        raise ArithmeticError("Renyi integral evaluated to a non-positive value")
    value = (shift + np.log(res.value)) / (alpha - 1.0)
    err = res.error / (res.value * (alpha - 1.0))
    return DivergenceEstimate(float(value), QUADRATURE, float(err), alpha)


def renyi_quadrature(
    p: Density, q: Density, alpha: float, rel_tol: float = 1e-8
) -> DivergenceEstimate:
    """(1/(alpha-1)) log int q (p/q)^alpha by adaptive quadrature (dim <= 2).

    Returns inf when q does not dominate p, or when the integral diverges
    past :data:`OVERFLOW_NATS`.
    """
    alpha = _check_alpha(alpha)
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")
    if p.dim > 2:
        raise ValueError("quadrature divergences support dim <= 2")
    if not dominates(p, q):
        return DivergenceEstimate(np.inf, QUADRATURE, 0.0, alpha)
    if p.dim == 1:
        return _renyi_quadrature_1d(p, q, alpha, rel_tol)
    return _renyi_quadrature_2d(p, q, alpha, rel_tol)


def _gauss_moments(d: Density):
    if d.kind != "gaussian":
        raise TypeError(f"expected a Gaussian density, got kind={d.kind!r}")
    return np.atleast_1d(d.mean), np.atleast_2d(d.cov)


def renyi_gauss_closed(p: Density, q: Density, alpha: float) -> DivergenceEstimate:
    """Closed-form Gaussian Renyi divergence.

    With S* = alpha S_q + (1-alpha) S_p, finite iff S* is positive definite:

        D_alpha = (alpha/2) d' S*^{-1} d
                  - (1/(2(alpha-1))) [ log det S*
                                       - (1-alpha) log det S_p
                                       - alpha log det S_q ].
    """
    alpha = _check_alpha(alpha)
    mp, Sp = _gauss_moments(p)
    mq, Sq = _gauss_moments(q)
    if mp.size != mq.size:
        raise ValueError("dimension mismatch between Gaussian inputs")
    Ss = alpha * Sq + (1.0 - alpha) * Sp
    eig = np.linalg.eigvalsh(Ss)
    if eig.min() <= 0.0:
        return DivergenceEstimate(np.inf, CLOSED_FORM, 0.0, alpha)
    d = mp - mq
    quad = 0.5 * alpha * float(d @ np.linalg.solve(Ss, d))
    logdets = (
        np.linalg.slogdet(Ss)[1]
        - (1.0 - alpha) * np.linalg.slogdet(Sp)[1]
        - alpha * np.linalg.slogdet(Sq)[1]
    )
    value = quad - logdets / (2.0 * (alpha - 1.0))
    return DivergenceEstimate(max(float(value), 0.0), CLOSED_FORM, 0.0, alpha)


def _kl_gauss_closed(p: Density, q: Density) -> DivergenceEstimate:
    mp, Sp = _gauss_moments(p)
    mq, Sq = _gauss_moments(q)
    d = mp.size
    diff = mp - mq
    Sq_inv = np.linalg.inv(Sq)
    value = 0.5 * (
        float(np.trace(Sq_inv @ Sp))
        + float(diff @ Sq_inv @ diff)
        - d
        + np.linalg.slogdet(Sq)[1]
        - np.linalg.slogdet(Sp)[1]
    )
    return DivergenceEstimate(max(float(value), 0.0), CLOSED_FORM, 0.0, None)


def _kl_quadrature(p: Density, q: Density, rel_tol: float) -> DivergenceEstimate:
    if not dominates(p, q):
        return DivergenceEstimate(np.inf, QUADRATURE, 0.0, None)
    blown = {"hit": False}

    def f_1d(x):
        lp = p.log_pdf(x)
        lq = q.log_pdf(x)
        out = np.zeros(lp.shape)
        ok = lp > -700.0
        if np.any(ok & (lq == -np.inf)):
            blown["hit"] = True
            lq = np.where(lq == -np.inf, -1e9, lq)
        out[ok] = np.exp(lp[ok]) * (lp[ok] - lq[ok])
        return out

    if p.dim == 1:
        bps = tuple(np.unique(np.concatenate([bulk_points(p), bulk_points(q)])))
        spec = QuadratureSpec(*p.support[0], rel_tol=rel_tol, breakpoints=bps)
        res = integrate(f_1d, spec)
    elif p.dim == 2:
        bx = tuple(np.unique(np.concatenate([bulk_points(p, 0), bulk_points(q, 0)])))
        by = tuple(np.unique(np.concatenate([bulk_points(p, 1), bulk_points(q, 1)])))
        res = integrate_2d(
            f_1d,
            QuadratureSpec(*p.support[0], rel_tol=rel_tol, breakpoints=bx),
            QuadratureSpec(*p.support[1], rel_tol=rel_tol, breakpoints=by),
        )
    else:
        raise ValueError("quadrature divergences support dim <= 2")
    if blown["hit"] or not np.isfinite(res.value):
        return DivergenceEstimate(np.inf, QUADRATURE, 0.0, None)
    return DivergenceEstimate(
        max(float(res.value), 0.0), QUADRATURE, float(res.error), None
    )


def kl_forward(p: Density, q: Density, rel_tol: float = 1e-9) -> DivergenceEstimate:
    """KL(p || q) = int p log(p/q); closed form when both inputs are Gaussian."""
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")
    if p.kind == "gaussian" and q.kind == "gaussian":
        return _kl_gauss_closed(p, q)
    return _kl_quadrature(p, q, rel_tol)


def kl_reverse(p: Density, q: Density, rel_tol: float = 1e-9) -> DivergenceEstimate:
    """KL(q || p): the classical variational-Bayes (ELBO) direction."""
    return kl_forward(q, p, rel_tol=rel_tol)


def mc_renyi_upper_bound(
    q: Density,
    log_joint,
    alpha: float,
    n_draws: int,
    seed: int,
) -> MCUpperBound:
    """Estimate (1/alpha) log E_q[(joint(theta)/q(theta))^alpha] from draws.

    Plain importance weights combined through log-sum-exp; no
    self-normalization. Deterministic given (seed, n_draws).
    """
    alpha = _check_alpha(alpha)
    if n_draws < 2:
        raise ValueError("n_draws must be at least 2")
    theta = q.sample(n_draws, seed)
    lw = np.asarray(log_joint(theta), dtype=float) - q.log_pdf(theta)
    if np.all(lw == -np.inf):
        raise ValueError(
            "all importance weights vanished: q places no mass where the "
            "joint density lives"
        )
    value = (log_sum_exp(alpha * lw) - np.log(n_draws)) / alpha
    shift = np.max(alpha * lw)
    u = np.exp(alpha * lw - shift)
    mu = float(u.mean())
    sd = float(u.std(ddof=1))
    stderr = sd / (np.sqrt(n_draws) * mu * alpha)
    return MCUpperBound(
        value=float(value), stderr=float(stderr), n_draws=n_draws, alpha=alpha
    )


def holder_lower_bound(
    p: Density,
    q: Density,
    alpha: float,
    interval: tuple[float, float],
    rel_tol: float = 1e-10,
) -> float:
    """(int_K p)^alpha / (int_K q)^{alpha-1}, a lower bound on int q (p/q)^alpha."""
    alpha = _check_alpha(alpha)
    if p.dim != 1 or q.dim != 1:
        raise ValueError("holder_lower_bound is for univariate densities")
    lo, hi = float(interval[0]), float(interval[1])

    def mass(d):
        a = max(lo, d.support[0][0])
        b = min(hi, d.support[0][1])
        if not a < b:
            return 0.0
        bps = tuple(x for x in bulk_points(d) if a < x < b)
        spec = QuadratureSpec(lower=a, upper=b, rel_tol=rel_tol, breakpoints=bps)
        return max(integrate(lambda x: np.exp(d.log_pdf(x)), spec).value, 0.0)

    mp = mass(p)
    mq = mass(q)
    if mq == 0.0:
        return np.inf if mp > 0.0 else 0.0
    if mp == 0.0:
        return 0.0
    return float(np.exp(alpha * np.log(mp) - (alpha - 1.0) * np.log(mq)))
