"""Regenerate the JSON fixtures under tests/fixtures.

    python3 scripts/make_fixtures.py [--out tests/fixtures]

The memorizer golden report is computed by the discrete engine and checked
here against the closed-form generalization error before it is written.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from genbounds import avgjoint as aj
from genbounds import bounds as bd
from genbounds.measures import DiscreteDist
from genbounds.random_instances import random_learner, random_loss

STRICT_PAIRS = (
    ("avg_w", "ind_w"),
    ("avg_tv", "ind_tv"),
    ("avg_kl", "ismi"),
    ("avg_kl", "per_sample_kl"),
    ("ismi", "mi_dataset"),
    ("per_sample_kl", "mi_dataset"),
    ("js_avg", "js_ps"),
    ("lautum_avg", "lautum_ps"),
)


def dump(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def zero_one_loss(n_w, n_z):
    return aj.LossTable((np.arange(n_w)[:, None] != np.arange(n_z)[None, :]).astype(float), 0.0, 1.0)


def constant_learner():
    p_z = DiscreteDist(("a", "b", "c"), [0.2, 0.3, 0.5], coords=[0.0, 1.0, 2.0])
    return aj.LearnerSpec.deterministic(p_z, 2, lambda *_: "w0", w_support=("w0",), w_coords=[[0.0]])


def memorizer():
    """W is one of the two training samples, picked uniformly."""
    p_z = DiscreteDist(("a", "b", "c"), [0.5, 0.3, 0.2], coords=[0.0, 1.0, 2.0])

    def kernel(s):
        row = np.zeros(3)
        for z in s:
            row[p_z.support.index(z)] += 0.5
        return row

    L = aj.LearnerSpec.iid(p_z, 2, ("a", "b", "c"), kernel, w_coords=[0.0, 1.0, 2.0])
    return L, zero_one_loss(3, 3)


def asymmetric(seed=0, tries=2000):
    """First seeded random i.i.d. learner on which every ordering gap exceeds 1e-3."""
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        L = random_learner(rng, 3, 3, 2, iid=True, positive=True, symmetric=False)
        loss = random_loss(rng, 3, 3)
        regs = [bd.LossRegularity.bounded(0, 1), bd.LossRegularity.lipschitz(bd.lipschitz_constant(loss, L.w_coords))]
        r = bd.discrete_report(L, loss, regs)
        if all(getattr(r, b) - getattr(r, a) > 1e-3 for a, b in STRICT_PAIRS):
            return L, loss
    raise RuntimeError("no strict instance found")


def ismi_counterexample(seed=1, tries=5000):
    """A learner whose average-joint KL bound exceeds the mean of per-sample roots.

    Only the root of the mean is guaranteed to dominate the average-joint KL bound.
    """
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        L = random_learner(rng, 2, 2, 2, iid=True)
        loss = random_loss(rng, 2, 2)
        r = bd.discrete_report(L, loss)
        if r.avg_kl - r.ismi > 1e-4:
            return L, loss
    raise RuntimeError("no counterexample found")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "tests" / "fixtures"))
    out = Path(ap.parse_args().out)
    out.mkdir(parents=True, exist_ok=True)

    dump(out / "constant_learner.json", constant_learner().to_dict())
    dump(out / "constant_loss.json", zero_one_loss(1, 3).to_dict())

    L, loss = memorizer()
    rep = bd.discrete_report(L, loss)
    expected = (1 - np.sum(L.sample_marginal(1).probs ** 2)) / L.n
    assert abs(rep.true_gen - expected) < 1e-12, (rep.true_gen, expected)
    dump(out / "memorizer_learner.json", L.to_dict())
    dump(out / "memorizer_loss.json", loss.to_dict())
    dump(out / "memorizer_report.json", rep.to_dict())

    L, loss = asymmetric()
    dump(out / "asymmetric_learner.json", L.to_dict())
    dump(out / "asymmetric_loss.json", loss.to_dict())
    L, loss = ismi_counterexample()
    dump(out / "ismi_counterexample_learner.json", L.to_dict())
    dump(out / "ismi_counterexample_loss.json", loss.to_dict())
    print(f"fixtures written to {out}")


if __name__ == "__main__":
    main()
