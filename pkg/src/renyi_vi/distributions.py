"""The density zoo: Gaussian (univariate and 2-D), Laplace, Logistic, Gamma,
uniform, finite mixtures, and narrow Gaussian spikes standing in for point
masses.

A :class:`Density` bundles a vectorized log-density, per-coordinate support
intervals, exact moments where available, and a seeded sampler. Densities
are immutable after construction and sampling takes an explicit seed, so
concurrent use is race-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy.special import digamma, gammaln

from .numerics import QuadratureSpec, integrate

__all__ = [
    "Density",
    "make_gaussian",
    "make_laplace",
    "make_logistic",
    "make_gamma",
    "make_uniform",
    "make_spike",
    "make_mixture",
    "dominates",
    "bulk_points",
    "interval_mass",
]

Interval = tuple[float, float]


@dataclass(frozen=True)
class Density:
    """An evaluable probability density on R^dim with metadata.

    ``log_pdf`` accepts an (m,) array for dim 1 or an (m, dim) array for
    dim > 1 and returns (m,) log-density values (-inf outside support).
    ``sample_rng`` draws using a caller-provided Generator; ``sample`` is
    the seeded convenience wrapper.
    """

    dim: int
    support: tuple[Interval, ...]
    log_pdf: Callable[[np.ndarray], np.ndarray]
    mean: np.ndarray | None = None
    cov: np.ndarray | None = None
    sample_rng: Callable[[np.random.Generator, int], np.ndarray] | None = None
    kind: str = "custom"
    params: Mapping[str, Any] = field(default_factory=dict)
    entropy: float | None = None

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.log_pdf(x))

    def sample(self, n: int, seed: int) -> np.ndarray:
        if self.sample_rng is None:
            raise ValueError(f"density kind={self.kind!r} has no sampler")
        return self.sample_rng(np.random.default_rng(seed), n)

    @property
    def var(self) -> float:
        """Scalar variance; only meaningful for dim == 1."""
        if self.cov is None:
            raise ValueError("density has no declared covariance")
        return float(np.atleast_2d(self.cov)[0, 0])

    @property
    def sd(self) -> float:
        return float(np.sqrt(self.var))


def _as_mean_cov(mu, cov, name: str):
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    cov = np.asarray(cov, dtype=float)
    if cov.ndim == 0:
        cov = cov.reshape(1, 1)
    elif cov.ndim == 1:
        cov = np.diag(cov)
    if mu.ndim != 1 or cov.shape != (mu.size, mu.size):
        raise ValueError(f"{name}: mean/cov shapes are inconsistent")
    return mu, cov


def make_gaussian(mu, cov) -> Density:
    """Gaussian density; ``cov`` may be a scalar variance, a diagonal, or a
    full SPD matrix (dim <= 2 is all the rest of the package needs)."""
    mu, cov = _as_mean_cov(mu, cov, "make_gaussian")
    d = mu.size
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance must be symmetric positive definite") from exc
    log_det = 2.0 * float(np.log(np.diag(chol)).sum())
    const = -0.5 * (d * np.log(2.0 * np.pi) + log_det)

    def log_pdf(x):
        pts = np.atleast_1d(np.asarray(x, dtype=float))
        if d == 1:
            z = (pts.reshape(-1) - mu[0]) / chol[0, 0]
            return const - 0.5 * z * z
        pts = pts.reshape(-1, d)
        z = np.linalg.solve(chol, (pts - mu).T)
        return const - 0.5 * (z * z).sum(axis=0)

    def sample_rng(rng, n):
        z = rng.standard_normal((n, d))
        out = mu + z @ chol.T
        return out[:, 0] if d == 1 else out

    entropy = 0.5 * d * (1.0 + np.log(2.0 * np.pi)) + 0.5 * log_det
    return Density(
        dim=d,
        support=tuple((-np.inf, np.inf) for _ in range(d)),
        log_pdf=log_pdf,
        mean=mu,
        cov=cov,
        sample_rng=sample_rng,
        kind="gaussian",
        params={"mu": mu, "cov": cov},
        entropy=float(entropy),
    )


def make_laplace(k: float, b: float) -> Density:
    """Laplace density with location k and scale b; variance 2 b^2."""
    if b <= 0:
        raise ValueError(f"scale must be positive, got {b}")
    k = float(k)
    b = float(b)
    const = -np.log(2.0 * b)

    def log_pdf(x):
        return const - np.abs(np.asarray(x, dtype=float).reshape(-1) - k) / b

    return Density(
        dim=1,
        support=((-np.inf, np.inf),),
        log_pdf=log_pdf,
        mean=np.array([k]),
        cov=np.array([[2.0 * b * b]]),
        sample_rng=lambda rng, n: rng.laplace(k, b, size=n),
        kind="laplace",
        params={"loc": k, "scale": b},
        entropy=1.0 + float(np.log(2.0 * b)),
    )


def make_logistic(m: float, s: float) -> Density:
    """Logistic density with mean m and scale s; variance s^2 pi^2 / 3."""
    if s <= 0:
        raise ValueError(f"scale must be positive, got {s}")
    m = float(m)
    s = float(s)

    def log_pdf(x):
        z = (np.asarray(x, dtype=float).reshape(-1) - m) / (2.0 * s)
        # pdf = 1 / (4 s cosh^2 z); log cosh written overflow-free
        log_cosh = np.abs(z) + np.log1p(np.exp(-2.0 * np.abs(z))) - np.log(2.0)
        return -np.log(4.0 * s) - 2.0 * log_cosh

    return Density(
        dim=1,
        support=((-np.inf, np.inf),),
        log_pdf=log_pdf,
        mean=np.array([m]),
        cov=np.array([[s * s * np.pi**2 / 3.0]]),
        sample_rng=lambda rng, n: rng.logistic(m, s, size=n),
        kind="logistic",
        params={"loc": m, "scale": s},
        entropy=float(np.log(s)) + 2.0,
    )


def make_gamma(shape: float, rate: float) -> Density:
    """Gamma density with shape k and rate beta; mean k/beta, var k/beta^2."""
    if shape <= 0 or rate <= 0:
        raise ValueError(f"shape and rate must be positive, got {shape}, {rate}")
    k = float(shape)
    beta = float(rate)
    const = k * np.log(beta) - gammaln(k)

    def log_pdf(x):
        pts = np.asarray(x, dtype=float).reshape(-1)
        out = np.full(pts.shape, -np.inf)
        pos = pts > 0.0
        out[pos] = const + (k - 1.0) * np.log(pts[pos]) - beta * pts[pos]
        return out

    entropy = k - np.log(beta) + gammaln(k) + (1.0 - k) * digamma(k)
    return Density(
        dim=1,
        support=((0.0, np.inf),),
        log_pdf=log_pdf,
        mean=np.array([k / beta]),
        cov=np.array([[k / beta**2]]),
        sample_rng=lambda rng, n: rng.gamma(k, 1.0 / beta, size=n),
        kind="gamma",
        params={"shape": k, "rate": beta},
        entropy=float(entropy),
    )


def make_uniform(lo: float, hi: float) -> Density:
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    lo = float(lo)
    hi = float(hi)
    const = -np.log(hi - lo)

    def log_pdf(x):
        pts = np.asarray(x, dtype=float).reshape(-1)
        return np.where((pts >= lo) & (pts <= hi), const, -np.inf)

    return Density(
        dim=1,
        support=((lo, hi),),
        log_pdf=log_pdf,
        mean=np.array([0.5 * (lo + hi)]),
        cov=np.array([[(hi - lo) ** 2 / 12.0]]),
        sample_rng=lambda rng, n: rng.uniform(lo, hi, size=n),
        kind="uniform",
        params={"lo": lo, "hi": hi},
        entropy=float(np.log(hi - lo)),
    )


def make_spike(center: float, width: float) -> Density:
    """Narrow Gaussian surrogate for a point mass at ``center``.

    Point-mass statements in the limit are probed numerically with these;
    ``width`` is the standard deviation and should be small relative to the
    scales being compared against.
    """
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    d = make_gaussian(center, width**2)
    params = dict(d.params)
    params.update({"spike": True, "center": float(center), "width": float(width)})
    return Density(
        dim=1,
        support=d.support,
        log_pdf=d.log_pdf,
        mean=d.mean,
        cov=d.cov,
        sample_rng=d.sample_rng,
        kind="gaussian",
        params=params,
        entropy=d.entropy,
    )


def make_mixture(weights: Sequence[float], components: Sequence[Density]) -> Density:
    """Finite mixture with weights in (0,1) summing to 1."""
    w = np.asarray(weights, dtype=float)
    comps = tuple(components)
    if w.size != len(comps) or w.size == 0:
        raise ValueError("weights and components must be non-empty and aligned")
    if np.any(w <= 0.0) or np.any(w >= 1.0):
        raise ValueError("mixture weights must lie strictly inside (0, 1)")
    if abs(float(w.sum()) - 1.0) > 1e-12:
        raise ValueError(f"mixture weights must sum to 1, got {w.sum()!r}")
    dims = {c.dim for c in comps}
    if len(dims) != 1:
        raise ValueError("mixture components must share a dimension")
    d = comps[0].dim
    log_w = np.log(w)

    def log_pdf(x):
        stacked = np.stack([c.log_pdf(x) for c in comps], axis=0)
        stacked = stacked + log_w[:, None]
        m = np.max(stacked, axis=0)
        out = np.where(
            m == -np.inf,
            -np.inf,
            m + np.log(np.sum(np.exp(stacked - m), axis=0)),
        )
        return out

    support = tuple(
        (min(c.support[j][0] for c in comps), max(c.support[j][1] for c in comps))
        for j in range(d)
    )
    mean = None
    cov = None
    if all(c.mean is not None for c in comps) and all(c.cov is not None for c in comps):
        mean = np.sum([wi * c.mean for wi, c in zip(w, comps)], axis=0)
        second = np.sum(
            [wi * (c.cov + np.outer(c.mean, c.mean)) for wi, c in zip(w, comps)],
            axis=0,
        )
        cov = second - np.outer(mean, mean)

    def sample_rng(rng, n):
        counts = rng.multinomial(n, w)
        parts = [c.sample_rng(rng, int(k)) for c, k in zip(comps, counts) if k > 0]
        out = np.concatenate(parts, axis=0)
        rng.shuffle(out, axis=0)
        return out

    return Density(
        dim=d,
        support=support,
        log_pdf=log_pdf,
        mean=mean,
        cov=cov,
        sample_rng=sample_rng,
        kind="mixture",
        params={"weights": w, "components": comps},
    )


def dominates(p: Density, q: Density) -> bool:
    """True iff supp(p) is contained in supp(q), coordinate-interval-wise."""
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")
    return all(
        ql <= pl and ph <= qh
        for (pl, ph), (ql, qh) in zip(p.support, q.support)
    )


_BULK_MULT = np.array([0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0])


def bulk_points(d: Density, coord: int = 0) -> np.ndarray:
    """Abscissae straddling where the density carries its mass.

    Used to seed quadrature panels and log-density probe grids so narrow
    densities are never missed by an adaptive first pass.
    """
    lo, hi = d.support[coord]
    pts: list[float] = []
    if d.kind == "mixture":
        for c in d.params["components"]:
            pts.extend(bulk_points(c, coord).tolist())
    elif d.kind == "uniform":
        pts.extend(np.linspace(lo, hi, 9).tolist())
    elif d.mean is not None and d.cov is not None:
        c = float(np.atleast_1d(d.mean)[coord])
        s = float(np.sqrt(np.atleast_2d(d.cov)[coord, coord]))
        pts.extend((c + _BULK_MULT * s).tolist())
        pts.extend((c - _BULK_MULT * s).tolist())
    arr = np.asarray(sorted({p for p in pts if lo < p < hi and np.isfinite(p)}))
    return arr


def interval_mass(d: Density, lo: float, hi: float, rel_tol: float = 1e-9) -> float:
    """Probability d assigns to [lo, hi] (dim 1), by quadrature."""
    if d.dim != 1:
        raise ValueError("interval_mass is for univariate densities")
    slo, shi = d.support[0]
    lo = max(lo, slo)
    hi = min(hi, shi)
    if not lo < hi:
        return 0.0
    spec = QuadratureSpec(
        lower=lo,
        upper=hi,
        rel_tol=rel_tol,
        breakpoints=tuple(p for p in bulk_points(d) if lo < p < hi),
    )
    res = integrate(lambda x: np.exp(d.log_pdf(x)), spec)
    return min(max(res.value, 0.0), 1.0)
