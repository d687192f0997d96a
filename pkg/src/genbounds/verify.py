"""Randomized invariant suites behind ``genbounds verify``.

Each property draws its own instances from a generator seeded by
``(seed, property index)`` so that adding a property never perturbs the
instances of the others.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import avgjoint as aj
from . import bounds as bd
from . import gaussian as gs
from . import measures as ms
from .random_instances import (
    random_dist,
    random_learner,
    random_lipschitz,
    random_loss,
    random_pair_1d,
)

TOL = 1e-9


class _Check:
    def __init__(self):
        self.failures = []
        self.n = 0

    def __call__(self, ok: bool, what: str):
        self.n += 1
        if not ok and len(self.failures) < 5:
            self.failures.append(what)
        return ok

    def result(self, name):
        detail = f"{self.n} checks" if not self.failures else "; ".join(self.failures)
        return {"name": name, "pass": not self.failures, "detail": detail}


def _instance(rng, **kw):
    L = random_learner(rng, **kw)
    loss = random_loss(rng, len(L.w_support), len(L.z_support))
    return L, loss


def prop_representation(rng, count, tv_fn):
    c = _Check()
    for k in range(count):
        L, loss = _instance(rng, iid=bool(k % 2))
        d, v = aj.gen_error_direct(L, loss), aj.gen_error_via_avg(L, loss)
        c(abs(d - v) <= 1e-12, f"instance {k}: direct {d!r} vs average-joint {v!r}")
    return c


def _reports(rng, count, tv_fn, positive=True):
    for k in range(count):
        L, loss = _instance(rng, positive=positive)
        regs = [bd.LossRegularity.bounded(0, 1), bd.LossRegularity.lipschitz(bd.lipschitz_constant(loss, L.w_coords))]
        yield k, L, loss, bd.discrete_report(L, loss, regs, tv_fn=tv_fn)


def prop_validity(rng, count, tv_fn):
    c = _Check()
    for k, L, loss, r in _reports(rng, count, tv_fn):
        g = abs(r.true_gen)
        for name, v in r.bounds().items():
            c(g <= v + TOL, f"instance {k}: |gen| {g:.6g} > {name} {v:.6g}")
    return c


def prop_wasserstein_ordering(rng, count, tv_fn):
    c = _Check()
    for k, L, loss, r in _reports(rng, count, tv_fn):
        c(r.avg_w <= r.ind_w + TOL, f"instance {k}: avg_w {r.avg_w:.6g} > ind_w {r.ind_w:.6g}")
    return c


def prop_tv_ordering(rng, count, tv_fn):
    """|gen| <= avg_tv <= ind_tv <= ISMI (the last step is Pinsker per sample)."""
    c = _Check()
    for k, L, loss, r in _reports(rng, count, tv_fn):
        g = abs(r.true_gen)
        c(g <= r.avg_tv + TOL, f"instance {k}: |gen| {g:.6g} > avg_tv {r.avg_tv:.6g}")
        c(r.avg_tv <= r.ind_tv + TOL, f"instance {k}: avg_tv {r.avg_tv:.6g} > ind_tv {r.ind_tv:.6g}")
        c(r.ind_tv <= r.ismi + TOL, f"instance {k}: ind_tv {r.ind_tv:.6g} > ismi {r.ismi:.6g}")
    return c


def prop_tv_forms(rng, count, tv_fn):
    c = _Check()
    for k in range(count):
        L, loss = _instance(rng)
        div = bd.discrete_divergences(L, loss, None, tv_fn)
        c(abs(div.avg_tv - div.avg_tv_conditional) <= 1e-12, f"instance {k}: joint vs conditional TV form")
    return c


def prop_kl_chain(rng, count, tv_fn):
    c = _Check()
    for k, L, loss, r in _reports(rng, count, tv_fn):
        c(r.avg_kl <= r.per_sample_kl + TOL, f"instance {k}: avg_kl > per-sample KL")
        c(r.per_sample_kl <= r.mi_dataset + TOL, f"instance {k}: per-sample KL > dataset MI bound")
        c(r.ismi <= r.mi_dataset + TOL, f"instance {k}: ismi > dataset MI bound")
    return c


def prop_js_lautum_ordering(rng, count, tv_fn):
    c = _Check()
    for k, L, loss, r in _reports(rng, count, tv_fn):
        c(r.js_avg <= r.js_ps + TOL, f"instance {k}: js_avg > js_ps")
        c(r.lautum_avg <= r.lautum_ps + TOL, f"instance {k}: lautum_avg > lautum_ps")
    return c


def prop_symmetric_collapse(rng, count, tv_fn):
    c = _Check()
    pairs = [("avg_kl", "ismi"), ("avg_tv", "ind_tv"), ("avg_w", "ind_w"), ("js_avg", "js_ps"), ("lautum_avg", "lautum_ps")]
    for k in range(count):
        L, loss = _instance(rng, symmetric=True)
        regs = [bd.LossRegularity.bounded(0, 1), bd.LossRegularity.lipschitz(bd.lipschitz_constant(loss, L.w_coords))]
        r = bd.discrete_report(L, loss, regs, tv_fn=tv_fn)
        c(aj.is_symmetric(L), f"instance {k}: exchangeable learner not detected as symmetric")
        for a, b in pairs:
            va, vb = getattr(r, a), getattr(r, b)
            c(abs(va - vb) <= 1e-6 * max(abs(vb), 1e-300) + 1e-15, f"instance {k}: {a} {va!r} != {b} {vb!r}")
    return c


def prop_emp_diff(rng, count, tv_fn):
    c = _Check()
    for k in range(count):
        n_w, n_z = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        p_z = rng.dirichlet(np.ones(n_z))
        n_a = int(rng.integers(1, 4))
        n_b = n_a if k % 2 == 0 else int(rng.integers(1, 4))
        A = random_learner(rng, n_w, n_z, n_a, p_z=p_z)
        B = random_learner(rng, n_w, n_z, n_b, p_z=p_z)
        loss = random_loss(rng, n_w, n_z)
        diff = aj.emp_risk_diff(A, B, loss)
        bound = bd.emp_diff_bound(0.5, ms.table_kl(aj.average_joint(A), aj.average_joint(B)))
        c(abs(diff) <= bound + TOL, f"instance {k}: |diff| {abs(diff):.6g} > bound {bound:.6g}")
    return c


def prop_dv_witness(rng, count, tv_fn):
    c = _Check()
    for k in range(count):
        size = int(rng.integers(2, 7))
        P, Q = random_dist(rng, size), random_dist(rng, size)
        gap, d = ms.dv_gap(P, Q, rng.normal(size=size) * 3), ms.kl(P, Q)
        c(gap <= d + 1e-12, f"instance {k}: DV gap {gap!r} > KL {d!r}")
    return c


def prop_kr_witness(rng, count, tv_fn):
    c = _Check()
    for k in range(count):
        P, Q = random_pair_1d(rng)
        g_p = random_lipschitz(rng, np.concatenate([P.coords[:, 0], Q.coords[:, 0]]))
        gap = P.expect(g_p[: len(P)]) - Q.expect(g_p[len(P):])
        w = ms.wasserstein1(P, Q)
        c(gap <= w + 1e-12, f"instance {k}: KR gap {gap!r} > W1 {w!r}")
    return c


def prop_w1_backends(rng, count, tv_fn):
    c = _Check()
    for k in range(count):
        P, Q = random_pair_1d(rng)
        lp, cdf = ms.wasserstein1(P, Q, method="lp"), ms.wasserstein1_cdf(P, Q)
        c(abs(lp - cdf) <= 1e-9, f"instance {k}: LP {lp!r} vs CDF {cdf!r}")
        size = int(rng.integers(1, 7))
        A, B = random_dist(rng, size, zeros=True), random_dist(rng, size, zeros=True)
        t, w = tv_fn(A, B), ms.wasserstein1(A, B, ms.INDICATOR, method="lp")
        c(abs(t - w) <= 1e-12, f"instance {k}: tv {t!r} vs indicator W1 {w!r}")
    return c


DISCRETE_PROPERTIES: dict[str, Callable] = {
    "representation_identity": prop_representation,
    "bound_validity": prop_validity,
    "wasserstein_ordering": prop_wasserstein_ordering,
    "tv_ordering": prop_tv_ordering,
    "tv_joint_equals_conditional_form": prop_tv_forms,
    "kl_chain": prop_kl_chain,
    "js_lautum_ordering": prop_js_lautum_ordering,
    "symmetric_collapse": prop_symmetric_collapse,
    "emp_risk_diff_bound": prop_emp_diff,
    "dv_witness": prop_dv_witness,
    "kr_witness": prop_kr_witness,
    "w1_backends": prop_w1_backends,
}


def _gaussian_props(rng, count, q):
    checks = {k: _Check() for k in ("gaussian_validity", "gaussian_orderings", "gaussian_t_symmetry")}
    for k in range(count):
        t = float(rng.uniform(0.05, 0.95))
        r = bd.gaussian_report(gs.ExampleConfig(t=t), q, gen_method=q)
        m = bd.gaussian_report(gs.ExampleConfig(t=1 - t), q, gen_method=q)
        for name, v in r.bounds().items():
            slack = r.ci + r.errors.get(name, 0.0) + 1e-9
            checks["gaussian_validity"](r.true_gen <= v + slack, f"t={t:.4f}: gen {r.true_gen:.6g} > {name} {v:.6g}")
        for a, b in (("avg_tv", "ind_tv"), ("avg_w", "ind_w"), ("avg_kl", "per_sample_kl"), ("js_avg", "js_ps"), ("lautum_avg", "lautum_ps")):
            va, vb = getattr(r, a), getattr(r, b)
            slack = r.errors.get(a, 0.0) + r.errors.get(b, 0.0) + 1e-9
            checks["gaussian_orderings"](va <= vb + slack, f"t={t:.4f}: {a} {va:.6g} > {b} {vb:.6g}")
        for name, v in r.bounds().items():
            w = getattr(m, name)
            slack = 1e-6 * max(abs(v), 1.0) + r.errors.get(name, 0.0) + m.errors.get(name, 0.0)
            checks["gaussian_t_symmetry"](abs(v - w) <= slack, f"t={t:.4f}: {name} {v:.6g} vs {w:.6g} at 1-t")
    return checks


def run_verify(
    suite: str = "all",
    seed: int = 0,
    count: int = 100,
    tv_fn: Callable = ms.tv,
    quad: gs.QuadratureSpec | None = None,
) -> dict:
    """Run the invariant suites and return ``{"suite", "pass", "properties": [...]}``."""
    if suite not in ("discrete", "gaussian", "all"):
        raise ValueError(f"unknown suite {suite!r}")
    props = []
    if count > 0 and suite in ("discrete", "all"):
        for idx, (name, fn) in enumerate(DISCRETE_PROPERTIES.items()):
            rng = np.random.default_rng([seed, idx])
            try:
                props.append(fn(rng, count, tv_fn).result(name))
            except Exception as e:  # a crash is a failed property, not a crashed suite
                props.append({"name": name, "pass": False, "detail": f"{type(e).__name__}: {e}"})
    if count > 0 and suite in ("gaussian", "all"):
        rng = np.random.default_rng([seed, 1000])
        g_count = max(1, min(count, 5)) if suite == "all" else count
        try:
            for name, c in _gaussian_props(rng, g_count, quad or gs.QuadratureSpec()).items():
                props.append(c.result(name))
        except Exception as e:
            props.append({"name": "gaussian", "pass": False, "detail": f"{type(e).__name__}: {e}"})
    return {"suite": suite, "pass": all(p["pass"] for p in props), "properties": props}

