"""Seeded generators of small random discrete instances for property checks."""

from __future__ import annotations

import itertools

import numpy as np

from .avgjoint import LearnerSpec, LossTable, iid_table
from .measures import DiscreteDist


def random_probs(rng: np.random.Generator, k: int, alpha: float = 1.0, zeros: bool = False) -> np.ndarray:
    p = rng.dirichlet(np.full(k, alpha))
    if zeros and k > 1:
        drop = rng.random(k) < 0.3
        drop[rng.integers(k)] = False
        p = np.where(drop, 0.0, p)
        p /= p.sum()
    return p


def random_dist(rng, k: int, alpha: float = 1.0, zeros: bool = False, dim: int | None = None) -> DiscreteDist:
    coords = None if dim is None else rng.normal(size=(k, dim))
    return DiscreteDist([f"x{j}" for j in range(k)], random_probs(rng, k, alpha, zeros), coords)


def random_pair_1d(rng, k: int | None = None, m: int | None = None) -> tuple[DiscreteDist, DiscreteDist]:
    """Two 1-D distributions on independent random point sets."""
    k = k or int(rng.integers(1, 8))
    m = m or int(rng.integers(1, 8))
    P = DiscreteDist([f"p{j}" for j in range(k)], random_probs(rng, k), rng.normal(size=k) * 3)
    Q = DiscreteDist([f"q{j}" for j in range(m)], random_probs(rng, m), rng.normal(size=m) * 3 + rng.normal())
    return P, Q


def random_learner(
    rng: np.random.Generator,
    n_w: int | None = None,
    n_z: int | None = None,
    n: int | None = None,
    iid: bool = True,
    positive: bool = True,
    symmetric: bool = False,
    alpha: float = 0.5,
    p_z: np.ndarray | None = None,
) -> LearnerSpec:
    """A random learner with 1-D coordinates on both alphabets.

    ``symmetric=True`` makes the conditional depend only on the multiset of
    samples, i.e. an exchangeable learner. ``positive=False`` sprinkles
    zeros into the conditional rows.
    """
    n_w = n_w or int(rng.integers(2, 6))
    n_z = n_z or int(rng.integers(2, 6))
    n = n or int(rng.integers(1, 4))
    if iid:
        p_z = random_probs(rng, n_z) if p_z is None else np.asarray(p_z)
        p_s = iid_table(p_z, n)
    else:
        p_s = random_probs(rng, n_z**n).reshape((n_z,) * n)
    cond = np.empty((n_z,) * n + (n_w,))
    cache = {}
    for idx in itertools.product(range(n_z), repeat=n):
        key = tuple(sorted(idx)) if symmetric else idx
        if key not in cache:
            cache[key] = random_probs(rng, n_w, alpha, zeros=not positive)
        cond[idx] = cache[key]
    z_coords = np.sort(rng.normal(size=n_z))
    w_coords = np.sort(rng.normal(size=n_w))
    return LearnerSpec(
        n, [f"z{j}" for j in range(n_z)], [f"w{j}" for j in range(n_w)], p_s, cond, z_coords, w_coords
    )


def random_loss(rng: np.random.Generator, n_w: int, n_z: int, a: float = 0.0, b: float = 1.0) -> LossTable:
    return LossTable(a + (b - a) * rng.random((n_w, n_z)), a, b)


def random_lipschitz(rng: np.random.Generator, x: np.ndarray) -> np.ndarray:
    """Values of a random 1-Lipschitz function on the 1-D points ``x``."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x)
    steps = np.diff(x[order]) * rng.uniform(-1, 1, size=len(x) - 1)
    g = np.empty(len(x))
    g[order] = rng.normal() + np.concatenate([[0.0], np.cumsum(steps)])
    return g
