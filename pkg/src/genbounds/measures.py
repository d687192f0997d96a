"""Exact information measures between finite discrete distributions.

Everything is in nats. Distributions carry an ordered support of hashable
labels and, optionally, a coordinate vector per point so that Euclidean
transport costs can be formed. Operations that compare two distributions
require identical ordered supports; use :func:`align` to merge supports
explicitly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linprog
from scipy.special import logsumexp, rel_entr

from .errors import (
    AbsoluteContinuityViolation,
    InfeasibleLP,
    InvalidDistribution,
    MetricUndefined,
    SupportMismatch,
)

PROB_TOL = 1e-12
LN2 = math.log(2.0)


def _validate_probs(probs, where: str = "probs") -> np.ndarray:
    p = np.array(probs, dtype=float)
    if not np.all(np.isfinite(p)):
        raise InvalidDistribution(f"{where}: non-finite entry")
    if np.any(p < 0):
        raise InvalidDistribution(f"{where}: negative entry {p.min()!r}")
    total = p.sum()
    if abs(total - 1.0) > PROB_TOL:
        raise InvalidDistribution(f"{where}: sums to {total!r}, not 1 (tol {PROB_TOL})")
    return p / total


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiscreteDist:
    """Probability vector over an ordered, labelled support.

    Parameters
    ----------
    support : sequence of hashable
        Distinct point labels.
    probs : array_like
        Nonnegative, summing to one within ``1e-12``. Inputs inside the
        tolerance are renormalized; anything else is rejected.
    coords : array_like, optional
        ``(len(support), d)`` real coordinates, needed for Euclidean costs.
        A 1-D array is read as ``d = 1``.
    """

    support: tuple
    probs: np.ndarray
    coords: np.ndarray | None = None

    def __post_init__(self):
        support = tuple(self.support)
        if len(set(support)) != len(support):
            raise InvalidDistribution("support labels are not distinct")
        probs = _validate_probs(self.probs)
        if probs.ndim != 1 or probs.shape[0] != len(support):
            raise InvalidDistribution(
                f"probs has shape {probs.shape}, support has {len(support)} points"
            )
        coords = self.coords
        if coords is not None:
            coords = np.array(coords, dtype=float)
            if coords.ndim == 1:
                coords = coords[:, None]
            if coords.ndim != 2 or coords.shape[0] != len(support):
                raise InvalidDistribution("coords must be (len(support), d)")
            coords = _freeze(coords)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", _freeze(probs))
        object.__setattr__(self, "coords", coords)

    def __len__(self):
        return len(self.support)

    @classmethod
    def point_mass(cls, label, coord=None) -> "DiscreteDist":
        coords = None if coord is None else np.atleast_2d(np.asarray(coord, dtype=float))
        return cls((label,), [1.0], coords)

    @classmethod
    def uniform(cls, support, coords=None) -> "DiscreteDist":
        k = len(support)
        return cls(support, np.full(k, 1.0 / k), coords)

    def expect(self, values) -> float:
        return float(np.dot(self.probs, np.asarray(values, dtype=float)))

    def mix(self, other: "DiscreteDist", weight: float = 0.5) -> "DiscreteDist":
        """``weight * self + (1 - weight) * other`` on a shared support."""
        _same_support(self, other)
        return DiscreteDist(self.support, weight * self.probs + (1 - weight) * other.probs, self.coords)

    def to_dict(self) -> dict:
        if self.coords is None:
            support = list(self.support)
        else:
            support = [{"label": lab, "coords": c.tolist()} for lab, c in zip(self.support, self.coords)]
        return {"support": support, "probs": self.probs.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "DiscreteDist":
        labels, coords = _parse_support(d["support"], "support")
        return cls(labels, d["probs"], coords)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DiscreteDist":
        return cls.from_dict(json.loads(text))


def _parse_support(items, where):
    labels, coords = [], []
    for k, item in enumerate(items):
        if isinstance(item, dict):
            if "label" not in item:
                raise InvalidDistribution(f"{where}[{k}]: missing 'label'")
            labels.append(item["label"])
            coords.append(item.get("coords"))
        else:
            labels.append(item)
            coords.append(None)
    if all(c is None for c in coords):
        return labels, None
    if any(c is None for c in coords):
        raise InvalidDistribution(f"{where}: coords given for some points but not all")
    return labels, np.array(coords, dtype=float)


def align(P: DiscreteDist, Q: DiscreteDist) -> tuple[DiscreteDist, DiscreteDist]:
    """Re-express P and Q on the union of their supports, zero-padding.

    The merged order is P's labels followed by Q's labels not in P.
    Coordinates must agree on shared labels.
    """
    index = {lab: k for k, lab in enumerate(P.support)}
    merged = list(P.support) + [lab for lab in Q.support if lab not in index]
    pos = {lab: k for k, lab in enumerate(merged)}
    p = np.zeros(len(merged))
    q = np.zeros(len(merged))
    p[: len(P)] = P.probs
    q[[pos[lab] for lab in Q.support]] = Q.probs

    coords = None
    if P.coords is not None and Q.coords is not None:
        if P.coords.shape[1] != Q.coords.shape[1]:
            raise SupportMismatch("coordinate dimensions differ")
        coords = np.zeros((len(merged), P.coords.shape[1]))
        coords[: len(P)] = P.coords
        for k, lab in enumerate(Q.support):
            j = pos[lab]
            if j < len(P) and not np.array_equal(coords[j], Q.coords[k]):
                raise SupportMismatch(f"label {lab!r} has different coordinates in P and Q")
            coords[j] = Q.coords[k]
    elif (P.coords is None) != (Q.coords is None):
        raise SupportMismatch("only one of P, Q carries coordinates")
    return DiscreteDist(merged, p, coords), DiscreteDist(merged, q, coords)


def _same_support(P: DiscreteDist, Q: DiscreteDist):
    if P.support != Q.support:
        raise SupportMismatch("distributions have different ordered supports; use align()")


# -- array kernels --------------------------------------------------------
# Flat probability arrays, no validation. Shared with the joint-table code.


def kl_array(p: np.ndarray, q: np.ndarray) -> float:
    bad = (p > 0) & (q <= 0)
    if np.any(bad):
        raise AbsoluteContinuityViolation(
            f"P > 0 where Q = 0 at {int(bad.sum())} point(s)"
        )
    return max(0.0, float(np.sum(rel_entr(p, q))))


def tv_array(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(p - q)))


def js_array(p: np.ndarray, q: np.ndarray) -> float:
    m = 0.5 * (p + q)
    val = 0.5 * float(np.sum(rel_entr(p, m))) + 0.5 * float(np.sum(rel_entr(q, m)))
    return min(max(val, 0.0), LN2)


# -- divergences ----------------------------------------------------------


def kl(P: DiscreteDist, Q: DiscreteDist) -> float:
    """D(P||Q) in nats. Raises if P is not absolutely continuous w.r.t. Q."""
    _same_support(P, Q)
    return kl_array(P.probs, Q.probs)


def tv(P: DiscreteDist, Q: DiscreteDist) -> float:
    _same_support(P, Q)
    return tv_array(P.probs, Q.probs)


def js(P: DiscreteDist, Q: DiscreteDist) -> float:
    """Jensen-Shannon divergence against the midpoint; lies in [0, ln 2]."""
    _same_support(P, Q)
    return js_array(P.probs, Q.probs)


def dv_gap(P: DiscreteDist, Q: DiscreteDist, g) -> float:
    """E_P[g] - log E_Q[exp g] for a witness g on the shared support.

    ``g`` is either an array aligned with the support or a callable taking a
    label. Every witness gives a lower bound on ``kl(P, Q)``.
    """
    _same_support(P, Q)
    if callable(g):
        g = [g(lab) for lab in P.support]
    g = np.asarray(g, dtype=float)
    if g.shape != P.probs.shape:
        raise SupportMismatch("witness length differs from support length")
    mask = Q.probs > 0
    log_mgf = float(logsumexp(g[mask], b=Q.probs[mask]))
    return float(np.dot(P.probs, g)) - log_mgf


# -- transport ------------------------------------------------------------


class Metric:
    """Symmetric nonnegative cost between support points.

    Subclasses override :meth:`cost`; a plain instance wraps a pairwise
    function ``f(label_a, coord_a, label_b, coord_b) -> float``.
    """

    name = "custom"

    def __init__(self, pairwise: Callable | None = None, name: str | None = None):
        self._pairwise = pairwise
        if name:
            self.name = name

    def cost(self, P: DiscreteDist, Q: DiscreteDist) -> np.ndarray:
        if self._pairwise is None:
            raise NotImplementedError
        cp = P.coords if P.coords is not None else [None] * len(P)
        cq = Q.coords if Q.coords is not None else [None] * len(Q)
        return np.array(
            [[self._pairwise(a, x, b, y) for b, y in zip(Q.support, cq)] for a, x in zip(P.support, cp)],
            dtype=float,
        )

    def __repr__(self):
        return f"Metric({self.name})"


class _Euclidean(Metric):
    name = "euclidean"

    def cost(self, P, Q):
        if P.coords is None or Q.coords is None:
            raise MetricUndefined("euclidean metric needs coordinates on every support point")
        if P.coords.shape[1] != Q.coords.shape[1]:
            raise MetricUndefined("coordinate dimensions differ")
        diff = P.coords[:, None, :] - Q.coords[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=-1))


class _Indicator(Metric):
    name = "indicator"

    def cost(self, P, Q):
        return np.array([[0.0 if a == b else 1.0 for b in Q.support] for a in P.support])


EUCLIDEAN: Metric = _Euclidean()
INDICATOR: Metric = _Indicator()


def _transport_lp(p: np.ndarray, q: np.ndarray, cost: np.ndarray) -> float:
    k, m = cost.shape
    rows = sparse.kron(sparse.eye(k), np.ones((1, m)))
    cols = sparse.kron(np.ones((1, k)), sparse.eye(m))
    a_eq = sparse.vstack([rows, cols]).tocsr()
    b_eq = np.concatenate([p, q])
    res = linprog(
        cost.ravel(),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise InfeasibleLP(f"transport LP failed: {res.message}")
    return max(0.0, float(res.fun))


def wasserstein1_cdf(P: DiscreteDist, Q: DiscreteDist) -> float:
    """W1 on the real line as the integral of |F_P - F_Q| over the merged support."""
    if P.coords is None or Q.coords is None:
        raise MetricUndefined("CDF formula needs 1-D coordinates")
    if P.coords.shape[1] != 1 or Q.coords.shape[1] != 1:
        raise MetricUndefined("CDF formula is only valid in one dimension")
    x = np.concatenate([P.coords[:, 0], Q.coords[:, 0]])
    mass = np.concatenate([P.probs, -Q.probs])
    order = np.argsort(x, kind="stable")
    x, mass = x[order], mass[order]
    cdf_gap = np.cumsum(mass)[:-1]
    return float(np.sum(np.abs(cdf_gap) * np.diff(x)))


def _indicator_coupling(P: DiscreteDist, Q: DiscreteDist) -> float:
    # Keeping min(p, q) in place is optimal under the 0/1 cost; the rest moves at cost 1.
    P, Q = align(P, Q) if P.support != Q.support else (P, Q)
    return float(np.sum(P.probs - np.minimum(P.probs, Q.probs)))


def wasserstein1(P: DiscreteDist, Q: DiscreteDist, metric: Metric = EUCLIDEAN, method: str = "auto") -> float:
    """Optimal transport cost between P and Q under ``metric``.

    ``method="lp"`` always solves the exact transport linear program (HiGHS
    dual simplex). ``"auto"`` additionally takes closed-form shortcuts: the
    CDF integral for 1-D Euclidean coordinates and the diagonal coupling for
    the indicator metric.
    """
    if method not in ("auto", "lp", "cdf"):
        raise ValueError(f"unknown method {method!r}")
    if method == "cdf":
        return wasserstein1_cdf(P, Q)
    if method == "auto":
        if metric is INDICATOR:
            return _indicator_coupling(P, Q)
        if (
            metric is EUCLIDEAN
            and P.coords is not None
            and Q.coords is not None
            and P.coords.shape[1] == Q.coords.shape[1] == 1
        ):
            return wasserstein1_cdf(P, Q)
    cost = metric.cost(P, Q)
    keep_p, keep_q = P.probs > 0, Q.probs > 0
    return _transport_lp(P.probs[keep_p], Q.probs[keep_q], cost[np.ix_(keep_p, keep_q)])


# -- joint tables ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JointTable:
    """Joint probability matrix over hypotheses (rows) and samples (columns)."""

    w_support: tuple
    z_support: tuple
    p: np.ndarray
    w_coords: np.ndarray | None = None
    z_coords: np.ndarray | None = field(default=None)

    def __post_init__(self):
        w_support, z_support = tuple(self.w_support), tuple(self.z_support)
        p = np.array(self.p, dtype=float)
        if p.shape != (len(w_support), len(z_support)):
            raise InvalidDistribution(
                f"p has shape {p.shape}, expected {(len(w_support), len(z_support))}"
            )
        p = _validate_probs(p, "p")
        for name in ("w_coords", "z_coords"):
            c = getattr(self, name)
            if c is not None:
                c = np.array(c, dtype=float)
                if c.ndim == 1:
                    c = c[:, None]
                object.__setattr__(self, name, _freeze(c))
        object.__setattr__(self, "w_support", w_support)
        object.__setattr__(self, "z_support", z_support)
        object.__setattr__(self, "p", _freeze(p))
        # marginals double as validation of the row/column sums
        self.marginal_w()
        self.marginal_z()

    @property
    def shape(self):
        return self.p.shape

    def marginal_w(self) -> DiscreteDist:
        return DiscreteDist(self.w_support, self.p.sum(axis=1), self.w_coords)

    def marginal_z(self) -> DiscreteDist:
        return DiscreteDist(self.z_support, self.p.sum(axis=0), self.z_coords)

    def product(self) -> "JointTable":
        """Product of this table's own marginals."""
        return self.with_p(np.outer(self.p.sum(axis=1), self.p.sum(axis=0)))

    def with_p(self, p) -> "JointTable":
        return JointTable(self.w_support, self.z_support, p, self.w_coords, self.z_coords)

    def conditional_w(self, z_index: int) -> DiscreteDist:
        col = self.p[:, z_index]
        mass = col.sum()
        if mass <= 0:
            raise ZeroDivisionError(f"sample point {self.z_support[z_index]!r} has zero probability")
        return DiscreteDist(self.w_support, col / mass, self.w_coords)

    def as_dist(self) -> DiscreteDist:
        """Flatten to a distribution over (w, z) label pairs, row-major."""
        labels = [(w, z) for w in self.w_support for z in self.z_support]
        return DiscreteDist(labels, self.p.ravel())

    def expect(self, values) -> float:
        return float(np.sum(self.p * np.asarray(values, dtype=float)))

    def to_dict(self) -> dict:
        def sup(labels, coords):
            if coords is None:
                return list(labels)
            return [{"label": lab, "coords": c.tolist()} for lab, c in zip(labels, coords)]

        return {
            "w_support": sup(self.w_support, self.w_coords),
            "z_support": sup(self.z_support, self.z_coords),
            "p": self.p.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "JointTable":
        w, wc = _parse_support(d["w_support"], "w_support")
        z, zc = _parse_support(d["z_support"], "z_support")
        return cls(w, z, d["p"], wc, zc)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "JointTable":
        return cls.from_dict(json.loads(text))


def _same_table_support(A: JointTable, B: JointTable):
    if A.w_support != B.w_support or A.z_support != B.z_support:
        raise SupportMismatch("joint tables have different alphabets")


def mutual_information(J: JointTable) -> float:
    """I(W;Z) = D(J || P_W x P_Z)."""
    return kl_array(J.p.ravel(), J.product().p.ravel())


def lautum_information(J: JointTable) -> float:
    """L(W;Z) = D(P_W x P_Z || J); needs J > 0 wherever the product is."""
    return kl_array(J.product().p.ravel(), J.p.ravel())


def table_kl(A: JointTable, B: JointTable) -> float:
    _same_table_support(A, B)
    return kl_array(A.p.ravel(), B.p.ravel())


def table_tv(A: JointTable, B: JointTable) -> float:
    _same_table_support(A, B)
    return tv_array(A.p.ravel(), B.p.ravel())


def table_js(A: JointTable, B: JointTable) -> float:
    _same_table_support(A, B)
    return js_array(A.p.ravel(), B.p.ravel())


def load_dist(path) -> DiscreteDist:
    with open(path) as fh:
        return DiscreteDist.from_dict(json.load(fh))


def load_table(path) -> JointTable:
    with open(path) as fh:
        return JointTable.from_dict(json.load(fh))


__all__: Sequence[str] = [
    "DiscreteDist", "JointTable", "Metric", "EUCLIDEAN", "INDICATOR", "align",
    "kl", "tv", "js", "dv_gap", "wasserstein1", "wasserstein1_cdf",
    "mutual_information", "lautum_information", "table_kl", "table_tv", "table_js",
    "load_dist", "load_table",
]
