"""Generalization-error upper bounds from divergences and loss regularity.

The first half of this module is plain arithmetic on divergence values.
The second half gathers those values from either engine and assembles a
:class:`BoundReport`. Bound values are in the loss's units; the divergences
feeding them are in nats.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import avgjoint as aj
from . import gaussian as gs
from .errors import (
    AbsoluteContinuityViolation,
    GenBoundsError,
    JsOutOfRange,
    NegativeDivergence,
    NonIIDInput,
)
from .measures import (
    EUCLIDEAN,
    INDICATOR,
    LN2,
    DiscreteDist,
    Metric,
    js_array,
    kl_array,
    lautum_information,
    mutual_information,
    tv,
    wasserstein1,
)


@dataclass(frozen=True)
class LossRegularity:
    """One regularity assumption on the loss.

    ``kind`` is ``"lipschitz"`` (constant ``L`` w.r.t. a metric on W),
    ``"bounded"`` (range ``[a, b]``) or ``"subgaussian"`` (``sigma``).
    A bounded loss is also ``(b - a)/2``-sub-Gaussian and ``(b - a)``-Lipschitz
    under the indicator metric.
    """

    kind: str
    L: float | None = None
    a: float | None = None
    b: float | None = None
    sigma: float | None = None

    def __post_init__(self):
        if self.kind == "lipschitz":
            if not (self.L is not None and self.L > 0):
                raise ValueError("lipschitz regularity needs L > 0")
        elif self.kind == "bounded":
            if self.a is None or self.b is None or not self.b > self.a:
                raise ValueError("bounded regularity needs b > a")
        elif self.kind == "subgaussian":
            if not (self.sigma is not None and self.sigma > 0):
                raise ValueError("sub-Gaussian regularity needs sigma > 0")
        else:
            raise ValueError(f"unknown regularity kind {self.kind!r}")

    @classmethod
    def lipschitz(cls, L):
        return cls("lipschitz", L=float(L))

    @classmethod
    def bounded(cls, a, b):
        return cls("bounded", a=float(a), b=float(b))

    @classmethod
    def subgaussian(cls, sigma):
        return cls("subgaussian", sigma=float(sigma))

    @property
    def subgaussian_constant(self) -> float | None:
        if self.kind == "subgaussian":
            return self.sigma
        if self.kind == "bounded":
            return (self.b - self.a) / 2
        return None

    @property
    def lipschitz_constant(self) -> float | None:
        if self.kind == "lipschitz":
            return self.L
        if self.kind == "bounded":
            return self.b - self.a
        return None


# -- bound arithmetic ---------------------------------------------------------


def _require_iid(iid: bool, what: str):
    if not iid:
        raise NonIIDInput(f"{what} assumes i.i.d. training samples")


def _nonneg(x: float, what: str) -> float:
    if x < 0:
        raise NegativeDivergence(f"{what} is negative ({x!r})")
    return float(x)


def _check_js(x: float) -> float:
    if not 0 <= x <= LN2 + 1e-12:
        raise JsOutOfRange(f"JS value {x!r} outside [0, ln 2]")
    return float(x)


def avg_w_bound(L: float, expected_w: float, iid: bool = True) -> float:
    """``L * E_Z[W(avg conditional at Z, P_W)]``."""
    _require_iid(iid, "the Wasserstein bound")
    return L * _nonneg(expected_w, "expected Wasserstein distance")


def ind_w_bound(L: float, per_sample_expected_w: Sequence[float], iid: bool = True) -> float:
    _require_iid(iid, "the individual-sample Wasserstein bound")
    vals = [_nonneg(x, "expected Wasserstein distance") for x in per_sample_expected_w]
    return L * sum(vals) / len(vals)


def avg_tv_bound(a: float, b: float, tv_value: float, iid: bool = True) -> float:
    _require_iid(iid, "the total variation bound")
    return (b - a) * _nonneg(tv_value, "total variation")


def ind_tv_bound(a: float, b: float, per_sample_tv: Sequence[float], iid: bool = True) -> float:
    _require_iid(iid, "the individual-sample total variation bound")
    vals = [_nonneg(x, "total variation") for x in per_sample_tv]
    return (b - a) * sum(vals) / len(vals)


def avg_kl_bound(sigma: float, d_value: float) -> float:
    return math.sqrt(2 * sigma**2 * _nonneg(d_value, "KL divergence"))


def ismi_bound(sigma: float, mi_values: Sequence[float]) -> float:
    """Individual-sample MI bound ``(1/n) sum_i sqrt(2 sigma^2 I(W;Z_i))``."""
    vals = [_nonneg(x, "mutual information") for x in mi_values]
    return sum(math.sqrt(2 * sigma**2 * x) for x in vals) / len(vals)


def per_sample_kl_bound(sigma: float, mi_values: Sequence[float]) -> float:
    """``sqrt((2 sigma^2 / n) sum_i I(W;Z_i))``, the convexity step above the average-joint KL bound."""
    vals = [_nonneg(x, "mutual information") for x in mi_values]
    return math.sqrt(2 * sigma**2 * sum(vals) / len(vals))


def js_avg_bound(sigma: float, js_value: float) -> float:
    return 2 * math.sqrt(2 * sigma**2 * _check_js(js_value))


def js_per_sample_bound(sigma: float, js_values: Sequence[float]) -> float:
    vals = [_check_js(x) for x in js_values]
    return 2 * math.sqrt(2 * sigma**2 * sum(vals) / len(vals))


def lautum_avg_bound(sigma: float, rev_kl: float) -> float:
    if not math.isfinite(rev_kl):
        raise AbsoluteContinuityViolation("reverse KL is infinite")
    return math.sqrt(2 * sigma**2 * _nonneg(rev_kl, "reverse KL"))


def lautum_per_sample_bound(sigma: float, lautum_values: Sequence[float]) -> float:
    vals = [_nonneg(x, "Lautum information") for x in lautum_values]
    if not all(math.isfinite(x) for x in vals):
        raise AbsoluteContinuityViolation("a per-sample Lautum information is infinite")
    return math.sqrt(2 * sigma**2 * sum(vals) / len(vals))


def emp_diff_bound(sigma: float, d_ab: float) -> float:
    """Bound on ``|E L_E(A) - E L_E(B)|`` from ``D(avg joint A || avg joint B)``.

    The two average joints may come from different sample counts.
    """
    if not math.isfinite(d_ab):
        raise AbsoluteContinuityViolation("KL between the average joints is infinite")
    return math.sqrt(2 * sigma**2 * _nonneg(d_ab, "KL divergence"))


def mi_dataset_bound(sigma: float, i_ws: float, n: int, iid: bool = True) -> float:
    _require_iid(iid, "the dataset mutual information bound")
    return math.sqrt(2 * sigma**2 * _nonneg(i_ws, "I(W;S)") / n)


# -- discrete divergence helpers ----------------------------------------------


def lipschitz_constant(loss: aj.LossTable, w_coords: np.ndarray) -> float:
    """Smallest L with ``|l(w,z) - l(w',z)| <= L ||w - w'||`` on the table."""
    w_coords = np.asarray(w_coords, dtype=float)
    if w_coords.ndim == 1:
        w_coords = w_coords[:, None]
    dist = np.sqrt(((w_coords[:, None, :] - w_coords[None, :, :]) ** 2).sum(-1))
    gap = np.abs(loss.values[:, None, :] - loss.values[None, :, :]).max(axis=-1)
    off = ~np.eye(len(w_coords), dtype=bool)
    if np.any(off & (dist == 0) & (gap > 0)):
        return math.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(off & (dist > 0), gap / dist, 0.0)
    return float(ratio.max())


def expected_w(joint, metric: Metric = INDICATOR, tv_fn: Callable | None = None) -> float:
    """``E_Z[W(P_{W|Z}, P_W)]`` for a joint table.

    With ``tv_fn`` the per-z distance is that function instead of a
    transport cost (used for the total-variation form).
    """
    pw = joint.marginal_w()
    pz = joint.p.sum(axis=0)
    total = 0.0
    for k, mass in enumerate(pz):
        if mass <= 0:
            continue
        cond = joint.conditional_w(k)
        total += mass * (tv_fn(cond, pw) if tv_fn else wasserstein1(cond, pw, metric))
    return total


@dataclass
class DiscreteDivergences:
    iid: bool
    n: int
    gen: float
    avg_kl: float
    mi: list
    dataset_mi: float
    avg_tv: float
    avg_tv_conditional: float
    ind_tv: list
    avg_js: float
    ind_js: list
    avg_w: float | None
    ind_w: list | None
    avg_lautum: float | None
    ind_lautum: list | None
    lautum_refusal: str | None = None
    ind_lautum_refusal: str | None = None


def discrete_divergences(
    L: aj.LearnerSpec,
    loss: aj.LossTable,
    metric: Metric | None = INDICATOR,
    tv_fn: Callable = tv,
) -> DiscreteDivergences:
    """Every divergence the bounds need, by exact enumeration.

    ``tv_fn`` can be swapped to check that the verification suites notice
    a wrong total variation.
    """
    avg = aj.average_joint(L)
    joints = aj.per_sample_joints(L)
    p_w = L.marginal_w().probs
    p_bar = aj.average_sample(L).probs
    prod_bar = np.outer(p_w, p_bar)
    flat_prod = DiscreteDist(avg.as_dist().support, prod_bar.ravel())

    def tv_tables(A, p):
        sup = A.as_dist().support
        return tv_fn(DiscreteDist(sup, A.p.ravel()), DiscreteDist(sup, p.ravel()))

    mi = [mutual_information(J) for J in joints]
    ind_prod = [np.outer(p_w, J.p.sum(axis=0)) for J in joints]
    out = DiscreteDivergences(
        iid=L.is_iid(),
        n=L.n,
        gen=aj.gen_error_direct(L, loss),
        avg_kl=kl_array(avg.p.ravel(), flat_prod.probs),
        mi=mi,
        dataset_mi=aj.dataset_mutual_information(L),
        avg_tv=tv_tables(avg, prod_bar),
        avg_tv_conditional=expected_w(avg, tv_fn=tv_fn),
        ind_tv=[tv_tables(J, p) for J, p in zip(joints, ind_prod)],
        avg_js=js_array(avg.p.ravel(), prod_bar.ravel()),
        ind_js=[js_array(J.p.ravel(), p.ravel()) for J, p in zip(joints, ind_prod)],
        avg_w=None,
        ind_w=None,
        avg_lautum=None,
        ind_lautum=None,
    )
    if metric is not None:
        out.avg_w = expected_w(avg, metric)
        out.ind_w = [expected_w(J, metric) for J in joints]
    try:
        out.avg_lautum = kl_array(prod_bar.ravel(), avg.p.ravel())
    except AbsoluteContinuityViolation as e:
        out.lautum_refusal = str(e)
    try:
        out.ind_lautum = [lautum_information(J) for J in joints]
    except AbsoluteContinuityViolation as e:
        out.ind_lautum_refusal = str(e)
    return out


# -- reports ------------------------------------------------------------------

CSV_COLUMNS = (
    "t", "true_gen", "ci", "ismi", "avg_kl", "ind_tv", "avg_tv",
    "ind_w", "avg_w", "js_avg", "js_ps", "lautum_avg", "lautum_ps",
)
BOUND_NAMES = CSV_COLUMNS[3:]
EXTRA_NAMES = ("per_sample_kl", "mi_dataset")


@dataclass
class BoundReport:
    """Named bound values plus the true generalization error.

    A bound is ``None`` when its regularity was not supplied or its
    precondition failed; the reason is then in ``refusals``. ``errors``
    carries numeric error estimates for quadrature-based entries.
    """

    true_gen: float | None = None
    ci: float | None = None
    ismi: float | None = None
    avg_kl: float | None = None
    ind_tv: float | None = None
    avg_tv: float | None = None
    ind_w: float | None = None
    avg_w: float | None = None
    js_avg: float | None = None
    js_ps: float | None = None
    lautum_avg: float | None = None
    lautum_ps: float | None = None
    per_sample_kl: float | None = None
    mi_dataset: float | None = None
    t: float | None = None
    refusals: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def bounds(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in BOUND_NAMES + EXTRA_NAMES if getattr(self, k) is not None}

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "BoundReport":
        return cls(**d)

    def csv_row(self) -> list[str]:
        return [_fmt(getattr(self, k)) for k in CSV_COLUMNS]


def _fmt(v) -> str:
    return "" if v is None else format(float(v), ".10g")


def _attempt(report: BoundReport, name: str, fn: Callable[[], float]):
    try:
        setattr(report, name, fn())
    except GenBoundsError as e:
        report.refusals[name] = f"{type(e).__name__}: {e}"


def discrete_report(
    L: aj.LearnerSpec,
    loss: aj.LossTable,
    regularity: Iterable[LossRegularity] | None = None,
    metric: Metric | None = None,
    tv_fn: Callable = tv,
) -> BoundReport:
    """Full report for a discrete learner.

    Without explicit regularity the loss's declared range is used as a
    bounded assumption. With a Lipschitz assumption the Wasserstein bounds
    use ``metric`` (Euclidean on the hypothesis coordinates by default);
    a bounded assumption alone gives them under the indicator metric.
    """
    regs = list(regularity) if regularity is not None else [LossRegularity.bounded(loss.a, loss.b)]
    bounded = next((r for r in regs if r.kind == "bounded"), None)
    lip = next((r for r in regs if r.kind == "lipschitz"), None)
    sg_reg = next((r for r in regs if r.kind == "subgaussian"), None) or bounded
    sigma = sg_reg.subgaussian_constant if sg_reg else None
    if lip is not None:
        metric = metric or EUCLIDEAN
        lip_c = lip.L
    elif bounded is not None:
        metric = metric or INDICATOR
        lip_c = bounded.lipschitz_constant if metric is INDICATOR else None
    else:
        lip_c = None
    if lip_c is None:
        metric = None

    div = discrete_divergences(L, loss, metric, tv_fn)
    rep = BoundReport(true_gen=div.gen, ci=0.0)
    iid = div.iid
    if bounded is not None:
        a, b = bounded.a, bounded.b
        _attempt(rep, "avg_tv", lambda: avg_tv_bound(a, b, div.avg_tv, iid))
        _attempt(rep, "ind_tv", lambda: ind_tv_bound(a, b, div.ind_tv, iid))
    else:
        for k in ("avg_tv", "ind_tv"):
            rep.refusals[k] = "needs a bounded loss"
    if lip_c is not None:
        _attempt(rep, "avg_w", lambda: avg_w_bound(lip_c, div.avg_w, iid))
        _attempt(rep, "ind_w", lambda: ind_w_bound(lip_c, div.ind_w, iid))
    else:
        for k in ("avg_w", "ind_w"):
            rep.refusals[k] = "needs a Lipschitz (or bounded) loss"
    if sigma is not None:
        _attempt(rep, "avg_kl", lambda: avg_kl_bound(sigma, div.avg_kl))
        _attempt(rep, "ismi", lambda: ismi_bound(sigma, div.mi))
        _attempt(rep, "per_sample_kl", lambda: per_sample_kl_bound(sigma, div.mi))
        _attempt(rep, "mi_dataset", lambda: mi_dataset_bound(sigma, div.dataset_mi, L.n, iid))
        _attempt(rep, "js_avg", lambda: js_avg_bound(sigma, div.avg_js))
        _attempt(rep, "js_ps", lambda: js_per_sample_bound(sigma, div.ind_js))
        if div.avg_lautum is None:
            rep.refusals["lautum_avg"] = f"AbsoluteContinuityViolation: {div.lautum_refusal}"
        else:
            _attempt(rep, "lautum_avg", lambda: lautum_avg_bound(sigma, div.avg_lautum))
        if div.ind_lautum is None:
            rep.refusals["lautum_ps"] = f"AbsoluteContinuityViolation: {div.ind_lautum_refusal}"
        else:
            _attempt(rep, "lautum_ps", lambda: lautum_per_sample_bound(sigma, div.ind_lautum))
    else:
        for k in ("avg_kl", "ismi", "per_sample_kl", "mi_dataset", "js_avg", "js_ps", "lautum_avg", "lautum_ps"):
            rep.refusals[k] = "needs a sub-Gaussian (or bounded) loss"
    return rep


def _propagate(f: Callable[[float], float], est: gs.Estimate) -> float:
    base = f(est.value)
    hi = f(est.value + est.error)
    lo = f(max(est.value - est.error, 0.0))
    return max(abs(hi - base), abs(lo - base))


def _propagate_mean(f: Callable[[list], float], ests: Sequence[gs.Estimate]) -> float:
    vals = [e.value for e in ests]
    base = f(vals)
    hi = f([e.value + e.error for e in ests])
    lo = f([max(e.value - e.error, 0.0) for e in ests])
    return max(abs(hi - base), abs(lo - base))


def gaussian_report(
    cfg: gs.ExampleConfig,
    q: gs.QuadratureSpec = gs.QuadratureSpec(),
    gen_method: gs.MCSpec | gs.QuadratureSpec | None = None,
    include: Iterable[str] | None = None,
) -> BoundReport:
    """Bounds for the Gaussian example at one ``t``.

    The loss lies in ``[0, c^2]`` (sub-Gaussian constant ``c^2/2``) and is
    ``2c``-Lipschitz in ``w``. ``include`` restricts which bound columns
    are filled. The true generalization error uses ``gen_method``
    (Monte Carlo by default).
    """
    include = set(BOUND_NAMES if include is None else include)
    unknown = include - set(BOUND_NAMES)
    if unknown:
        raise ValueError(f"unknown bound names: {sorted(unknown)}")
    qv = gs.example_quantities(cfg, q)
    gen = gs.true_gen_error(cfg, gen_method or gs.MCSpec())
    sigma = cfg.subgaussian
    a, b = 0.0, cfg.c**2
    lip = 2 * cfg.c
    rep = BoundReport(true_gen=gen.value, ci=gen.error, t=cfg.t)

    def put(name, f_val, err):
        if name in include:
            setattr(rep, name, f_val)
            rep.errors[name] = err

    put("ismi", ismi_bound(sigma, qv.mi), 0.0)
    put("avg_kl", avg_kl_bound(sigma, qv.avg_kl.value), _propagate(lambda d: avg_kl_bound(sigma, d), qv.avg_kl))
    put(
        "ind_tv",
        ind_tv_bound(a, b, [e.value for e in qv.ind_tv]),
        _propagate_mean(lambda v: ind_tv_bound(a, b, v), qv.ind_tv),
    )
    put("avg_tv", avg_tv_bound(a, b, qv.avg_tv.value), _propagate(lambda v: avg_tv_bound(a, b, v), qv.avg_tv))
    put(
        "ind_w",
        ind_w_bound(lip, [e.value for e in qv.ind_w1]),
        _propagate_mean(lambda v: ind_w_bound(lip, v), qv.ind_w1),
    )
    put("avg_w", avg_w_bound(lip, qv.avg_w1.value), _propagate(lambda v: avg_w_bound(lip, v), qv.avg_w1))
    put("js_avg", js_avg_bound(sigma, qv.avg_js.value), _propagate(lambda v: js_avg_bound(sigma, min(v, LN2)), qv.avg_js))
    put(
        "js_ps",
        js_per_sample_bound(sigma, [e.value for e in qv.ind_js]),
        _propagate_mean(lambda v: js_per_sample_bound(sigma, [min(x, LN2) for x in v]), qv.ind_js),
    )
    put(
        "lautum_avg",
        lautum_avg_bound(sigma, qv.avg_lautum.value),
        _propagate(lambda v: lautum_avg_bound(sigma, v), qv.avg_lautum),
    )
    put("lautum_ps", lautum_per_sample_bound(sigma, qv.lautum), 0.0)
    rep.per_sample_kl = per_sample_kl_bound(sigma, qv.mi)
    rep.errors["gen_quad"] = list(qv.gen_quad)
    return rep
