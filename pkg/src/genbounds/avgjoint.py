"""Exact discrete engine: learners as conditional tables, average joints, gen error.

A learner is a tensor ``P(W | S)`` indexed by every n-tuple of sample
indices, paired with an arbitrary (not necessarily i.i.d.) table ``P_S``.
All expectations are exact sums over ``Z^n x W``. Sample indices ``i`` are
1-based throughout, matching ``Z_1 .. Z_n``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    AlphabetMismatch,
    DataDistMismatch,
    IndexOutOfRange,
    InvalidDistribution,
    SizeCapExceeded,
)
from .measures import PROB_TOL, DiscreteDist, JointTable, _parse_support, kl_array

DEFAULT_MAX_TUPLES = 10**6
SYMMETRY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LearnerSpec:
    """Randomized learner ``P(W|S)`` together with the data law ``P_S``.

    ``p_s`` has shape ``(|Z|,) * n``; ``p_w_given_s`` has shape
    ``(|Z|,) * n + (|W|,)`` and every row over the last axis sums to one.
    """

    n: int
    z_support: tuple
    w_support: tuple
    p_s: np.ndarray
    p_w_given_s: np.ndarray
    z_coords: np.ndarray | None = None
    w_coords: np.ndarray | None = None
    max_tuples: int = DEFAULT_MAX_TUPLES

    def __post_init__(self):
        if int(self.n) < 1:
            raise InvalidDistribution("n must be >= 1")
        n = int(self.n)
        z, w = tuple(self.z_support), tuple(self.w_support)
        if len(z) ** n > self.max_tuples:
            raise SizeCapExceeded(f"|Z|^n = {len(z)}^{n} exceeds the cap of {self.max_tuples}")
        p_s = np.array(self.p_s, dtype=float)
        cond = np.array(self.p_w_given_s, dtype=float)
        if p_s.shape != (len(z),) * n:
            raise InvalidDistribution(f"p_s has shape {p_s.shape}, expected {(len(z),) * n}")
        if cond.shape != (len(z),) * n + (len(w),):
            raise InvalidDistribution(f"p_w_given_s has shape {cond.shape}")
        if np.any(p_s < 0) or abs(p_s.sum() - 1) > PROB_TOL:
            raise InvalidDistribution(f"p_s: invalid probability table (sum {p_s.sum()!r})")
        if np.any(cond < 0):
            raise InvalidDistribution("p_w_given_s: negative entry")
        row_err = np.abs(cond.sum(axis=-1) - 1)
        if row_err.max() > PROB_TOL:
            bad = np.unravel_index(np.argmax(row_err), row_err.shape)
            raise InvalidDistribution(f"p_w_given_s row {bad} sums to {cond[bad].sum()!r}")
        cond = cond / cond.sum(axis=-1, keepdims=True)
        p_s = p_s / p_s.sum()
        for a in (p_s, cond):
            a.setflags(write=False)
        for name, labels in (("z_coords", z), ("w_coords", w)):
            c = getattr(self, name)
            if c is not None:
                c = np.array(c, dtype=float)
                if c.ndim == 1:
                    c = c[:, None]
                if c.shape[0] != len(labels):
                    raise InvalidDistribution(f"{name} has {c.shape[0]} rows for {len(labels)} labels")
                c.setflags(write=False)
                object.__setattr__(self, name, c)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "z_support", z)
        object.__setattr__(self, "w_support", w)
        object.__setattr__(self, "p_s", p_s)
        object.__setattr__(self, "p_w_given_s", cond)

    # -- constructors -----------------------------------------------------

    @classmethod
    def iid(cls, p_z: DiscreteDist, n: int, w_support, kernel, w_coords=None, **kw) -> "LearnerSpec":
        """Learner trained on ``n`` i.i.d. draws from ``p_z``.

        ``kernel`` is either the full conditional array or a callable
        mapping a tuple of sample labels to a probability vector over W.
        """
        p_s = iid_table(p_z.probs, n)
        if callable(kernel):
            cond = np.empty(p_s.shape + (len(w_support),))
            for idx in itertools.product(range(len(p_z)), repeat=n):
                cond[idx] = kernel(tuple(p_z.support[k] for k in idx))
        else:
            cond = kernel
        return cls(n, p_z.support, w_support, p_s, cond, p_z.coords, w_coords, **kw)

    @classmethod
    def deterministic(cls, p_z: DiscreteDist, n: int, fn: Callable, w_support=None, w_coords=None, **kw):
        """``W = fn(z_1, .., z_n)`` on i.i.d. samples.

        Without an explicit ``w_support`` the hypothesis alphabet is the
        sorted set of values ``fn`` produces.
        """
        tuples = list(itertools.product(range(len(p_z)), repeat=n))
        outs = [fn(*(p_z.support[k] for k in idx)) for idx in tuples]
        if w_support is None:
            w_support = sorted(set(outs))
        pos = {w: k for k, w in enumerate(w_support)}
        cond = np.zeros((len(p_z),) * n + (len(w_support),))
        for idx, out in zip(tuples, outs):
            cond[idx + (pos[out],)] = 1.0
        return cls(n, p_z.support, tuple(w_support), iid_table(p_z.probs, n), cond, p_z.coords, w_coords, **kw)

    # -- derived quantities ---------------------------------------------

    @property
    def n_tuples(self) -> int:
        return len(self.z_support) ** self.n

    def joint_ws(self) -> np.ndarray:
        """``P_{S,W}`` as a tensor of shape ``(|Z|,)*n + (|W|,)``."""
        return self.p_s[..., None] * self.p_w_given_s

    def marginal_w(self) -> DiscreteDist:
        probs = self.joint_ws().reshape(-1, len(self.w_support)).sum(axis=0)
        return DiscreteDist(self.w_support, probs, self.w_coords)

    def sample_marginal(self, i: int) -> DiscreteDist:
        _check_index(self, i)
        axes = tuple(k for k in range(self.n) if k != i - 1)
        return DiscreteDist(self.z_support, self.p_s.sum(axis=axes), self.z_coords)

    def is_iid(self, tol: float = PROB_TOL) -> bool:
        p_z = self.sample_marginal(1).probs
        return bool(np.max(np.abs(self.p_s - iid_table(p_z, self.n))) <= tol)

    def to_dict(self) -> dict:
        def key(idx):
            return ",".join(str(self.z_support[k]) for k in idx)

        def sup(labels, coords):
            if coords is None:
                return list(labels)
            return [{"label": lab, "coords": c.tolist()} for lab, c in zip(labels, coords)]

        p_s, cond = {}, {}
        for idx in itertools.product(range(len(self.z_support)), repeat=self.n):
            if self.p_s[idx] > 0:
                p_s[key(idx)] = float(self.p_s[idx])
                cond[key(idx)] = self.p_w_given_s[idx].tolist()
        return {
            "n": self.n,
            "z_support": sup(self.z_support, self.z_coords),
            "w_support": sup(self.w_support, self.w_coords),
            "p_s": p_s,
            "p_w_given_s": cond,
        }

    @classmethod
    def from_dict(cls, d: dict, **kw) -> "LearnerSpec":
        for f in ("n", "z_support", "w_support", "p_s", "p_w_given_s"):
            if f not in d:
                raise InvalidDistribution(f"learner: missing field {f!r}")
        n = d["n"]
        if not isinstance(n, int) or n < 1:
            raise InvalidDistribution(f"learner.n: expected a positive integer, got {n!r}")
        z, zc = _parse_support(d["z_support"], "learner.z_support")
        w, wc = _parse_support(d["w_support"], "learner.w_support")
        names = [str(lab) for lab in z]
        if any("," in s for s in names):
            raise InvalidDistribution("learner.z_support: labels may not contain ','")
        pos = {s: k for k, s in enumerate(names)}
        if len(z) ** n > kw.get("max_tuples", DEFAULT_MAX_TUPLES):
            raise SizeCapExceeded(f"|Z|^n = {len(z)}^{n} exceeds the cap")

        def parse_key(field, key):
            parts = key.split(",")
            if len(parts) != n or any(p not in pos for p in parts):
                raise InvalidDistribution(f"learner.{field}[{key!r}]: not an {n}-tuple of z labels")
            return tuple(pos[p] for p in parts)

        p_s = np.zeros((len(z),) * n)
        for key, val in d["p_s"].items():
            p_s[parse_key("p_s", key)] = _num(val, f"learner.p_s[{key!r}]")
        cond = np.full((len(z),) * n + (len(w),), 1.0 / len(w))
        seen = set()
        for key, row in d["p_w_given_s"].items():
            idx = parse_key("p_w_given_s", key)
            if not isinstance(row, list) or len(row) != len(w):
                raise InvalidDistribution(f"learner.p_w_given_s[{key!r}]: expected {len(w)} probabilities")
            cond[idx] = [_num(v, f"learner.p_w_given_s[{key!r}]") for v in row]
            seen.add(idx)
        for idx in zip(*np.nonzero(p_s)):
            if tuple(idx) not in seen:
                label = ",".join(names[k] for k in idx)
                raise InvalidDistribution(f"learner.p_w_given_s: missing row for {label!r}")
        try:
            return cls(n, z, w, p_s, cond, zc, wc, **kw)
        except InvalidDistribution as e:
            raise InvalidDistribution(f"learner: {e}") from None

    @classmethod
    def from_json(cls, text: str, **kw) -> "LearnerSpec":
        return cls.from_dict(json.loads(text), **kw)


def _num(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidDistribution(f"{where}: expected a number, got {v!r}")
    if not v >= 0:
        raise InvalidDistribution(f"{where}: must be >= 0, got {v!r}")
    return float(v)


def iid_table(p_z, n: int) -> np.ndarray:
    p_z = np.asarray(p_z, dtype=float)
    table = p_z
    for _ in range(n - 1):
        table = np.multiply.outer(table, p_z)
    return table


@dataclass(frozen=True, eq=False)
class LossTable:
    """Loss values ``l(w, z)`` as a ``|W| x |Z|`` matrix, declared to lie in ``[a, b]``."""

    values: np.ndarray
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise InvalidDistribution("loss.values must be a matrix")
        if self.a < 0:
            raise InvalidDistribution("loss.a: the loss must be nonnegative")
        if not self.b > self.a:
            raise InvalidDistribution("loss: need b > a")
        if np.any(v < self.a) or np.any(v > self.b):
            raise InvalidDistribution(f"loss.values: entries outside [{self.a}, {self.b}]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def range(self) -> float:
        return self.b - self.a

    def to_dict(self):
        return {"a": self.a, "b": self.b, "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d):
        for f in ("a", "b", "values"):
            if f not in d:
                raise InvalidDistribution(f"loss: missing field {f!r}")
        return cls(d["values"], _num(d["a"], "loss.a"), _num(d["b"], "loss.b"))


def _check_index(L: LearnerSpec, i: int):
    if not 1 <= i <= L.n:
        raise IndexOutOfRange(f"sample index {i} outside 1..{L.n}")


def _check_loss(L: LearnerSpec, loss: LossTable):
    if loss.values.shape != (len(L.w_support), len(L.z_support)):
        raise AlphabetMismatch(
            f"loss is {loss.values.shape}, learner alphabets are {(len(L.w_support), len(L.z_support))}"
        )


def _table(L: LearnerSpec, p) -> JointTable:
    return JointTable(L.w_support, L.z_support, p, L.w_coords, L.z_coords)


def per_sample_joint(L: LearnerSpec, i: int) -> JointTable:
    """``P_{W,Z_i}`` by summing the full joint over every other sample."""
    _check_index(L, i)
    axes = tuple(k for k in range(L.n) if k != i - 1)
    pz_w = L.joint_ws().sum(axis=axes)
    return _table(L, pz_w.T)


def per_sample_joints(L: LearnerSpec) -> list[JointTable]:
    return [per_sample_joint(L, i) for i in range(1, L.n + 1)]


def average_joint(L: LearnerSpec) -> JointTable:
    """The n-sample average of the per-sample joints ``P_{W,Z_i}``."""
    acc = np.zeros((len(L.w_support), len(L.z_support)))
    for J in per_sample_joints(L):
        acc += J.p
    return _table(L, acc / L.n)


def average_sample(L: LearnerSpec) -> DiscreteDist:
    """Average of the sample marginals; equals P_Z for i.i.d. data."""
    acc = sum(L.sample_marginal(i).probs for i in range(1, L.n + 1))
    return DiscreteDist(L.z_support, acc / L.n, L.z_coords)


def conditionals(J: JointTable) -> list[DiscreteDist | None]:
    """``P(W | Z=z)`` for every z; ``None`` where ``P(Z=z) = 0``."""
    mass = J.p.sum(axis=0)
    return [J.conditional_w(k) if mass[k] > 0 else None for k in range(len(J.z_support))]


def average_conditional(L: LearnerSpec) -> list[DiscreteDist | None]:
    """Conditional of the average joint given the average sample law.

    Under i.i.d. data this is the plain average of ``P(W | Z_i=z)`` over i.
    For other data laws the two differ and this function returns the former.
    """
    return conditionals(average_joint(L))


def is_symmetric(L: LearnerSpec, tol: float = SYMMETRY_TOL) -> bool:
    """Whether ``P(W | Z_i=z)`` is the same for every i (zero-mass z skipped)."""
    joints = per_sample_joints(L)
    ref = joints[0].p
    ref_mass = ref.sum(axis=0)
    for J in joints[1:]:
        mass = J.p.sum(axis=0)
        live = (mass > 0) & (ref_mass > 0)
        if not np.any(live):
            continue
        diff = J.p[:, live] / mass[live] - ref[:, live] / ref_mass[live]
        if np.max(np.abs(diff)) > tol:
            return False
    return True


def _empirical_risk_tensor(L: LearnerSpec, loss: LossTable) -> np.ndarray:
    """``L_E(w, s)`` over every tuple, shape ``(|Z|,)*n + (|W|,)``."""
    lt = loss.values.T  # (|Z|, |W|)
    acc = np.zeros((len(L.z_support),) * L.n + (len(L.w_support),))
    for i in range(L.n):
        shape = [1] * L.n + [len(L.w_support)]
        shape[i] = len(L.z_support)
        acc = acc + lt.reshape(shape)
    return acc / L.n


def expected_empirical_risk(L: LearnerSpec, loss: LossTable) -> float:
    """``E[L_E(W, S)]`` by exhaustive enumeration."""
    _check_loss(L, loss)
    return float(np.sum(L.joint_ws() * _empirical_risk_tensor(L, loss)))


def gen_error_direct(L: LearnerSpec, loss: LossTable) -> float:
    """Expected generalization error from its definition, by enumeration over ``Z^n x W``."""
    _check_loss(L, loss)
    emp = _empirical_risk_tensor(L, loss)
    joint = L.joint_ws()
    pop = np.tensordot(L.p_s, emp, axes=L.n)  # L_P(w) = E_{P_S}[L_E(w, S)]
    return float(np.sum(joint * (pop - emp)))


def gen_error_via_avg(L: LearnerSpec, loss: LossTable) -> float:
    """Generalization error as ``E_{P_W x avg P_Z}[l] - E_{avg joint}[l]``."""
    _check_loss(L, loss)
    avg = average_joint(L)
    prod = np.outer(L.marginal_w().probs, average_sample(L).probs)
    return float(np.sum((prod - avg.p) * loss.values))


def emp_risk_diff(LA: LearnerSpec, LB: LearnerSpec, loss: LossTable) -> float:
    """``E_{avg joint A}[l] - E_{avg joint B}[l]``.

    Learners with equal ``n`` must share ``P_S``. Different ``n`` is the
    different-sample-count setting and is accepted as long as the
    alphabets match.
    """
    if LA.z_support != LB.z_support or LA.w_support != LB.w_support:
        raise AlphabetMismatch("learners have different alphabets")
    if LA.n == LB.n and LA.p_s.shape == LB.p_s.shape and np.max(np.abs(LA.p_s - LB.p_s)) > PROB_TOL:
        raise DataDistMismatch("learners with the same n must share P_S")
    _check_loss(LA, loss)
    return average_joint(LA).expect(loss.values) - average_joint(LB).expect(loss.values)


def dataset_mutual_information(L: LearnerSpec) -> float:
    """``I(W; S)`` over the whole training tuple, by enumeration."""
    joint = L.joint_ws()
    prod = L.p_s[..., None] * L.marginal_w().probs
    return kl_array(joint.ravel(), prod.ravel())


def load_learner(path, **kw) -> LearnerSpec:
    with open(path) as fh:
        return LearnerSpec.from_dict(json.load(fh), **kw)


def load_loss(path) -> LossTable:
    with open(path) as fh:
        return LossTable.from_dict(json.load(fh))


__all__: Sequence[str] = [
    "LearnerSpec", "LossTable", "iid_table", "per_sample_joint", "per_sample_joints",
    "average_joint", "average_sample", "average_conditional", "conditionals", "is_symmetric",
    "gen_error_direct", "gen_error_via_avg", "expected_empirical_risk", "emp_risk_diff",
    "dataset_mutual_information", "load_learner", "load_loss",
]
