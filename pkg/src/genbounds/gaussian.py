"""Gaussian mean-estimation example: W = t Z1 + (1 - t) Z2 with Z_i ~ N(beta, sigma^2).

Closed forms cover single Gaussians; everything involving the two-component
average joint goes through a 2-D tensor-grid quadrature. The grid's error
estimate is the gap between the full grid and its every-other-point
subgrid, so each integral costs one pass over the densities.

Axis convention: the first coordinate is the hypothesis ``w``, the second
the sample ``z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp, ndtr

from .errors import (
    DegenerateCorrelation,
    InvalidDistribution,
    NonPositiveDefinite,
    NormalizationDrift,
    NumericGuardError,
    WindowTooSmall,
)

LOG_2PI_E = math.log(2 * math.pi * math.e)
CALIBRATION_TOL = 1e-6
NORMALIZATION_TOL = 1e-6
TAIL_MASS_TOL = 1e-10
ROUNDOFF = 1e-13


class Estimate(NamedTuple):
    value: float
    error: float


@dataclass(frozen=True)
class ExampleConfig:
    sigma: float = 10.0
    c: float = 2.0
    t: float = 0.5
    beta: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.c > 0:
            raise ValueError("c must be positive")
        if not 0 < self.t < 1:
            raise ValueError("t must lie strictly inside (0, 1)")

    @property
    def var_w(self) -> float:
        t = self.t
        return self.sigma**2 * (t * t + (1 - t) ** 2)

    def weight(self, i: int) -> float:
        """Coefficient of Z_i in W."""
        if i not in (1, 2):
            raise ValueError("the example has two samples")
        return self.t if i == 1 else 1 - self.t

    def rho(self, i: int) -> float:
        t = self.t
        return self.weight(i) / math.sqrt(t * t + (1 - t) ** 2)

    @property
    def subgaussian(self) -> float:
        """Loss range [0, c^2] makes the loss c^2/2-sub-Gaussian."""
        return self.c**2 / 2


@dataclass(frozen=True, eq=False)
class BivariateGaussian:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(2)
        cov = np.array(self.cov, dtype=float).reshape(2, 2)
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * np.abs(cov).max()):
            raise NonPositiveDefinite("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        if cov[0, 0] <= 0 or np.linalg.det(cov) <= 0:
            raise NonPositiveDefinite(f"covariance {cov.tolist()} is not positive definite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def det(self) -> float:
        a, b, d = self.cov[0, 0], self.cov[0, 1], self.cov[1, 1]
        return a * d - b * b

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov))

    @property
    def conditional_std(self) -> np.ndarray:
        """Std of each coordinate given the other."""
        return np.sqrt(self.det / self.cov[::-1, ::-1].diagonal())

    @property
    def correlation(self) -> float:
        return self.cov[0, 1] / math.sqrt(self.cov[0, 0] * self.cov[1, 1])

    def logpdf(self, w, z):
        a, b, d = self.cov[0, 0], self.cov[0, 1], self.cov[1, 1]
        det = self.det
        x = w - self.mean[0]
        y = z - self.mean[1]
        quad = (d * x * x - 2 * b * x * y + a * y * y) / det
        return -0.5 * quad - math.log(2 * math.pi) - 0.5 * math.log(det)

    @property
    def components(self):
        return (self,)

    @property
    def weights(self):
        return np.ones(1)


@dataclass(frozen=True, eq=False)
class GaussianMixture2:
    weights: np.ndarray
    components: tuple

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (len(self.components),) or np.any(w < 0):
            raise InvalidDistribution("mixture weights must be one nonnegative number per component")
        if abs(w.sum() - 1) > 1e-12:
            raise InvalidDistribution(f"mixture weights sum to {w.sum()!r}")
        object.__setattr__(self, "weights", w / w.sum())
        object.__setattr__(self, "components", tuple(self.components))

    @classmethod
    def single(cls, g: BivariateGaussian) -> "GaussianMixture2":
        return cls([1.0], (g,))

    def logpdf(self, w, z):
        if len(self.components) == 1:
            return self.components[0].logpdf(w, z)
        logs = np.stack([c.logpdf(w, z) for c in self.components])
        return logsumexp(logs, axis=0, b=self.weights.reshape((-1,) + (1,) * (logs.ndim - 1)))


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor-grid rule settings.

    ``points_per_axis`` is a floor: the spacing is tightened until every
    component's narrowest conditional std spans ``min_points_per_std`` grid
    steps, and the count is rounded up to ``1 mod 4`` so the every-other-point
    subgrid is itself a valid odd grid.
    """

    half_width_sigmas: float = 8.0
    points_per_axis: int = 1201
    scheme: str = "trapezoid"
    min_points_per_std: float = 1.5
    max_points_per_axis: int = 4001

    def __post_init__(self):
        if self.half_width_sigmas < 5:
            raise ValueError("half_width_sigmas must be >= 5")
        if self.scheme not in ("trapezoid", "simpson"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.scheme == "simpson" and self.points_per_axis % 2 == 0:
            raise ValueError("Simpson needs an odd number of points per axis")
        if self.points_per_axis < 5:
            raise ValueError("need at least 5 points per axis")


@dataclass(frozen=True)
class MCSpec:
    n_samples: int = 10**6
    seed: int = 0
    stream: int = 0
    batch: int = 1 << 18

    def __post_init__(self):
        if self.n_samples < 1000:
            raise ValueError("n_samples must be >= 1000")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, self.stream]))


# -- closed forms -----------------------------------------------------------


def joint_of(cfg: ExampleConfig, i: int) -> BivariateGaussian:
    """Law of (W, Z_i)."""
    cov = cfg.weight(i) * cfg.sigma**2
    return BivariateGaussian([cfg.beta, cfg.beta], [[cfg.var_w, cov], [cov, cfg.sigma**2]])


def product_of(cfg: ExampleConfig) -> BivariateGaussian:
    """P_W x P_Z."""
    return BivariateGaussian([cfg.beta, cfg.beta], np.diag([cfg.var_w, cfg.sigma**2]))


def average_joint_mixture(cfg: ExampleConfig) -> GaussianMixture2:
    return GaussianMixture2([0.5, 0.5], (joint_of(cfg, 1), joint_of(cfg, 2)))


def gaussian_entropy(g) -> float:
    """Differential entropy in nats of a BivariateGaussian or of N(., variance)."""
    if isinstance(g, BivariateGaussian):
        return 0.5 * (2 * LOG_2PI_E + math.log(g.det))
    var = float(g)
    if not var > 0:
        raise NonPositiveDefinite(f"variance {var!r} is not positive")
    return 0.5 * (LOG_2PI_E + math.log(var))


def gaussian_mi(rho: float) -> float:
    """I(X;Y) of a bivariate normal with correlation rho."""
    if not abs(rho) < 1:
        raise DegenerateCorrelation(f"|rho| = {abs(rho)!r} must be < 1")
    return -0.5 * math.log1p(-rho * rho)


def gaussian_kl(a: BivariateGaussian, b: BivariateGaussian) -> float:
    inv = np.linalg.inv(b.cov)
    dm = b.mean - a.mean
    return 0.5 * (np.trace(inv @ a.cov) + dm @ inv @ dm - 2 + math.log(b.det / a.det))


def gaussian_lautum(rho: float) -> float:
    """L(X;Y) = D(P_X x P_Y || P_XY) of a bivariate normal."""
    if not abs(rho) < 1:
        raise DegenerateCorrelation(f"|rho| = {abs(rho)!r} must be < 1")
    r2 = rho * rho
    return r2 / (1 - r2) + 0.5 * math.log1p(-r2)


def truncated_loss(w, z, c: float):
    d = w - z
    return np.minimum(d * d, c * c)


# -- grid quadrature ----------------------------------------------------------


def _rule_weights(n: int, h: float, scheme: str) -> np.ndarray:
    wt = np.full(n, h)
    if scheme == "trapezoid":
        wt[0] = wt[-1] = h / 2
    else:
        wt[1:-1:2] = 4 * h / 3
        wt[2:-1:2] = 2 * h / 3
        wt[0] = wt[-1] = h / 3
    return wt


class Grid:
    """Tensor grid covering a set of Gaussian (mixture) densities."""

    def __init__(self, densities: Sequence, q: QuadratureSpec = QuadratureSpec()):
        comps = [c for d in densities for c in d.components]
        means = np.array([c.mean for c in comps])
        stds = np.array([c.std for c in comps])
        cstd = np.array([c.conditional_std for c in comps])
        lo = means.min(axis=0) - q.half_width_sigmas * stds.max(axis=0)
        hi = means.max(axis=0) + q.half_width_sigmas * stds.max(axis=0)
        axes, weights, coarse = [], [], []
        for k in range(2):
            n = max(q.points_per_axis, math.ceil((hi[k] - lo[k]) * q.min_points_per_std / cstd[:, k].min()) + 1)
            n += (1 - n) % 4  # n = 1 mod 4
            n = min(n, q.max_points_per_axis + (1 - q.max_points_per_axis) % 4)
            x = np.linspace(lo[k], hi[k], n)
            h = x[1] - x[0]
            axes.append(x)
            weights.append(_rule_weights(n, h, q.scheme))
            coarse.append(_rule_weights((n + 1) // 2, 2 * h, q.scheme))
        self.spec = q
        self.w, self.z = axes
        self.weights = weights
        self.coarse_weights = coarse
        self.lo, self.hi = lo, hi
        self._check_window(comps)

    @property
    def shape(self):
        return (len(self.w), len(self.z))

    def _check_window(self, comps):
        for c in comps:
            tail = 0.0
            for k in range(2):
                s = c.std[k]
                tail += ndtr((self.lo[k] - c.mean[k]) / s) + ndtr((c.mean[k] - self.hi[k]) / s)
            if tail > TAIL_MASS_TOL:
                raise WindowTooSmall(f"Gaussian tail mass {tail:.3g} falls outside the window")

    def integrate(self, fn: Callable, chunk_rows: int = 256) -> dict[str, Estimate]:
        """Integrate every array in ``fn(W, Z) -> {name: values}`` over the grid.

        Rows are processed in fixed-size blocks in a fixed order, so the
        result is deterministic for a given grid.
        """
        ww, wz = self.weights
        cw, cz = self.coarse_weights
        fine: dict[str, float] = {}
        coarse: dict[str, float] = {}
        mag: dict[str, float] = {}
        n = len(self.w)
        for start in range(0, n, chunk_rows):
            stop = min(n, start + chunk_rows)
            W, Z = np.meshgrid(self.w[start:stop], self.z, indexing="ij")
            vals = fn(W, Z)
            # rows with an even global index form the coarse subgrid
            first = start + (start % 2)
            sub = slice(first - start, stop - start, 2)
            cw_blk = cw[first // 2 : first // 2 + len(range(first, stop, 2))]
            for name, v in vals.items():
                fine[name] = fine.get(name, 0.0) + float(ww[start:stop] @ v @ wz)
                mag[name] = mag.get(name, 0.0) + float(ww[start:stop] @ np.abs(v) @ wz)
                coarse[name] = coarse.get(name, 0.0) + float(cw_blk @ v[sub, ::2] @ cz)
        # refinement gap, floored at a summation roundoff allowance
        return {k: Estimate(fine[k], abs(fine[k] - coarse[k]) + ROUNDOFF * mag[k]) for k in fine}


def _check_norm(name: str, est: Estimate):
    if abs(est.value - 1) > NORMALIZATION_TOL:
        raise NormalizationDrift(f"{name} integrates to {est.value!r} on the grid")


def _as_density(d):
    if isinstance(d, (BivariateGaussian, GaussianMixture2)):
        return d
    raise TypeError(f"expected a BivariateGaussian or GaussianMixture2, got {type(d).__name__}")


def entropy_2d(d, q: QuadratureSpec = QuadratureSpec()) -> Estimate:
    d = _as_density(d)
    grid = Grid([d], q)

    def fn(W, Z):
        lp = d.logpdf(W, Z)
        p = np.exp(lp)
        return {"norm": p, "h": -p * lp}

    out = grid.integrate(fn)
    _check_norm("density", out["norm"])
    return out["h"]


def mixture_entropy(m: GaussianMixture2, q: QuadratureSpec = QuadratureSpec()) -> Estimate:
    """Differential entropy of a 2-D Gaussian mixture, with a refinement error estimate."""
    return entropy_2d(m, q)


def _pair_pass(a, b, q):
    a, b = _as_density(a), _as_density(b)
    grid = Grid([a, b], q)

    def fn(W, Z):
        la, lb = a.logpdf(W, Z), b.logpdf(W, Z)
        pa, pb = np.exp(la), np.exp(lb)
        lm = np.logaddexp(la, lb) - math.log(2)
        out = {
            "norm_a": pa,
            "norm_b": pb,
            "tv": 0.5 * np.abs(pa - pb),
            "kl": pa * (la - lb),
            "js": 0.5 * (pa * (la - lm) + pb * (lb - lm)),
        }
        return out

    out = grid.integrate(fn)
    _check_norm("first density", out["norm_a"])
    _check_norm("second density", out["norm_b"])
    return out


def tv_2d(a, b, q: QuadratureSpec = QuadratureSpec()) -> Estimate:
    """Total variation between two 2-D densities, by grid quadrature."""
    return _pair_pass(a, b, q)["tv"]


def kl_2d(a, b, q: QuadratureSpec = QuadratureSpec()) -> Estimate:
    return _pair_pass(a, b, q)["kl"]


def js_2d(a, b, q: QuadratureSpec = QuadratureSpec()) -> Estimate:
    return _pair_pass(a, b, q)["js"]


def avg_kl(cfg: ExampleConfig, q: QuadratureSpec = QuadratureSpec()) -> Estimate:
    """D(avg joint || P_W x P_Z) as h(P_W) + h(P_Z) - h(avg joint)."""
    h = mixture_entropy(average_joint_mixture(cfg), q)
    value = gaussian_entropy(cfg.var_w) + gaussian_entropy(cfg.sigma**2) - h.value
    return Estimate(max(value, 0.0), h.error)


# -- the example in one pass ------------------------------------------------


@dataclass
class ExampleQuantities:
    """Every information quantity of the example at one configuration.

    Divergences are in nats; ``*_w1`` entries are expected 1-D Wasserstein
    distances E_Z[W1(P_{W|Z}, P_W)] for the average and per-sample
    conditionals. ``gen_quad`` is the generalization error by quadrature.
    """

    cfg: ExampleConfig
    mi: tuple
    lautum: tuple
    avg_kl: Estimate
    avg_lautum: Estimate
    avg_tv: Estimate
    ind_tv: tuple
    avg_js: Estimate
    ind_js: tuple
    avg_w1: Estimate
    ind_w1: tuple
    gen_quad: Estimate
    entropy_avg: Estimate
    calibration: dict = field(default_factory=dict)


def example_quantities(cfg: ExampleConfig, q: QuadratureSpec = QuadratureSpec()) -> ExampleQuantities:
    """Compute all example divergences with a single grid pass.

    The pass also integrates each pure Gaussian's entropy and density and
    aborts with :class:`NumericGuardError` if any disagrees with its closed
    form by more than ``1e-6``.
    """
    j1, j2, prod = joint_of(cfg, 1), joint_of(cfg, 2), product_of(cfg)
    mix = average_joint_mixture(cfg)
    grid = Grid([mix, prod], q)
    sw, s = math.sqrt(cfg.var_w), cfg.sigma
    # W | Z_i = z ~ N(beta + a_i (z - beta), var_w - a_i^2 sigma^2)
    cond = []
    for i in (1, 2):
        a = cfg.weight(i)
        cond.append((a, math.sqrt(cfg.var_w - a * a * s * s)))

    def fn(W, Z):
        l1, l2, lq = j1.logpdf(W, Z), j2.logpdf(W, Z), prod.logpdf(W, Z)
        lbar = np.logaddexp(l1, l2) - math.log(2)
        p1, p2, pq = np.exp(l1), np.exp(l2), np.exp(lq)
        pbar = 0.5 * (p1 + p2)
        out = {"norm_1": p1, "norm_2": p2, "norm_q": pq, "norm_bar": pbar}
        out["h_1"], out["h_2"], out["h_q"] = -p1 * l1, -p2 * l2, -pq * lq
        out["h_bar"] = -pbar * lbar
        out["lautum_bar"] = pq * (lq - lbar)
        out["tv_bar"] = 0.5 * np.abs(pbar - pq)
        out["tv_1"] = 0.5 * np.abs(p1 - pq)
        out["tv_2"] = 0.5 * np.abs(p2 - pq)
        for name, lp, p in (("bar", lbar, pbar), ("1", l1, p1), ("2", l2, p2)):
            lm = np.logaddexp(lp, lq) - math.log(2)
            out["js_" + name] = 0.5 * (p * (lp - lm) + pq * (lq - lm))
        loss = truncated_loss(W, Z, cfg.c)
        out["gen"] = loss * (pq - pbar)
        # E_Z W1 via |F_{W|Z=z}(w) - F_W(w)| weighted by p_Z(z)
        pz = np.exp(-0.5 * ((Z - cfg.beta) / s) ** 2) / (s * math.sqrt(2 * math.pi))
        fw = ndtr((W - cfg.beta) / sw)
        f_i = [ndtr((W - cfg.beta - a * (Z - cfg.beta)) / sd) for a, sd in cond]
        out["w1_1"] = np.abs(f_i[0] - fw) * pz
        out["w1_2"] = np.abs(f_i[1] - fw) * pz
        out["w1_bar"] = np.abs(0.5 * (f_i[0] + f_i[1]) - fw) * pz
        return out

    r = grid.integrate(fn)
    calibration = {}
    for key, g in (("1", j1), ("2", j2), ("q", prod)):
        _check_norm(f"component {key}", r["norm_" + key])
        err = abs(r["h_" + key].value - gaussian_entropy(g))
        calibration[key] = err
        if err > CALIBRATION_TOL:
            raise NumericGuardError(f"grid entropy of component {key} is off by {err:.3g} nats")
    _check_norm("average joint", r["norm_bar"])

    h_bar = r["h_bar"]
    d = gaussian_entropy(cfg.var_w) + gaussian_entropy(cfg.sigma**2) - h_bar.value
    return ExampleQuantities(
        cfg=cfg,
        mi=(gaussian_mi(cfg.rho(1)), gaussian_mi(cfg.rho(2))),
        lautum=(gaussian_lautum(cfg.rho(1)), gaussian_lautum(cfg.rho(2))),
        avg_kl=Estimate(max(d, 0.0), h_bar.error),
        avg_lautum=_nonneg(r["lautum_bar"]),
        avg_tv=r["tv_bar"],
        ind_tv=(r["tv_1"], r["tv_2"]),
        avg_js=_nonneg(r["js_bar"]),
        ind_js=(_nonneg(r["js_1"]), _nonneg(r["js_2"])),
        avg_w1=r["w1_bar"],
        ind_w1=(r["w1_1"], r["w1_2"]),
        gen_quad=r["gen"],
        entropy_avg=h_bar,
        calibration=calibration,
    )


def _nonneg(e: Estimate) -> Estimate:
    return Estimate(max(e.value, 0.0), e.error)


# -- true generalization error ------------------------------------------


def _gen_mc(cfg: ExampleConfig, mc: MCSpec) -> Estimate:
    rng = mc.generator()
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < mc.n_samples:
        m = min(mc.batch, mc.n_samples - done)
        z = rng.normal(cfg.beta, cfg.sigma, size=(3, m))
        w = cfg.t * z[0] + (1 - cfg.t) * z[1]
        # z[2] is independent of w, giving a draw from P_W x P_Z
        x = truncated_loss(w, z[2], cfg.c) - 0.5 * (truncated_loss(w, z[0], cfg.c) + truncated_loss(w, z[1], cfg.c))
        total += float(x.sum())
        total_sq += float(np.dot(x, x))
        done += m
    mean = total / done
    var = max(total_sq / done - mean * mean, 0.0) * done / (done - 1)
    return Estimate(mean, 1.959963984540054 * math.sqrt(var / done))


def _gen_quad(cfg: ExampleConfig, q: QuadratureSpec) -> Estimate:
    mix, prod = average_joint_mixture(cfg), product_of(cfg)
    grid = Grid([mix, prod], q)

    def fn(W, Z):
        return {"gen": truncated_loss(W, Z, cfg.c) * (np.exp(prod.logpdf(W, Z)) - np.exp(mix.logpdf(W, Z)))}

    return grid.integrate(fn)["gen"]


def true_gen_error(cfg: ExampleConfig, method: MCSpec | QuadratureSpec = MCSpec()) -> Estimate:
    """Expected generalization error of the truncated squared loss.

    With an :class:`MCSpec` the error field is a 95% normal-approximation
    confidence half-width; with a :class:`QuadratureSpec` it is the grid
    refinement error.
    """
    if isinstance(method, MCSpec):
        return _gen_mc(cfg, method)
    if isinstance(method, QuadratureSpec):
        return _gen_quad(cfg, method)
    raise TypeError(f"unknown method {method!r}")
