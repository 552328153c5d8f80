"""Seeded point samplers.

Every sample draws from its own stream ``default_rng([seed, index])``, so a
sample can be regenerated from (seed, index) alone and partitioning a run
across workers never changes the draws.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .calculus import Sample
from .domains import (
    DomainSpec,
    Kind,
    clearance_coords,
    gauge_coords,
    polydisc_embed,
    to_coords,
)

__all__ = [
    "substream",
    "random_point",
    "random_slice_point",
    "pair_samples",
    "boundary_ray_samples",
    "default_slice_fraction",
]


def substream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def random_point(spec: DomainSpec, rng: np.random.Generator, max_gauge: float = 0.9,
                 min_gauge: float = 0.0) -> np.ndarray:
    """Gaussian direction rescaled to a spectral norm uniform in [min, max]."""
    N = spec.ambient_dim
    x = rng.normal(size=N) + 1j * rng.normal(size=N)
    x /= gauge_coords(spec, x)
    return x * rng.uniform(min_gauge, max_gauge)


def random_slice_point(spec: DomainSpec, rng: np.random.Generator, max_abs: float = 0.9) -> np.ndarray:
    r = spec.rank
    zeta = rng.uniform(0, max_abs, r) * np.exp(2j * np.pi * rng.random(r))
    return to_coords(spec, polydisc_embed(spec, zeta))


def default_slice_fraction(spec: DomainSpec) -> float:
    return 0.7 if spec.kind in (Kind.V, Kind.VI) else 0.0


def _sample(spec: DomainSpec, x: np.ndarray, y: np.ndarray, index: int, tag: str) -> Sample:
    c = float(min(clearance_coords(spec, x), clearance_coords(spec, y)))
    return Sample(np.concatenate([x, y]), clearance=c, index=index, tag=tag)


def pair_samples(
    spec: DomainSpec,
    seed: int,
    count: int,
    max_gauge: float = 0.9,
    slice_fraction: float | None = None,
    generic_gauge: float = 0.3,
    start: int = 0,
) -> Iterator[Sample]:
    """Interior pairs (z, w) as joint coordinates of length 2 * ambient_dim.

    A ``slice_fraction`` of the pairs lies on the maximal polydisc (both
    points); the rest are generic, with spectral norm up to ``max_gauge``, or
    up to ``generic_gauge`` for the exceptional kinds.
    """
    if slice_fraction is None:
        slice_fraction = default_slice_fraction(spec)
    exceptional = spec.kind in (Kind.V, Kind.VI)
    for i in range(start, start + count):
        rng = substream(seed, i)
        if rng.random() < slice_fraction:
            x = random_slice_point(spec, rng, max_gauge)
            y = random_slice_point(spec, rng, max_gauge)
            tag = "slice"
        else:
            g = generic_gauge if exceptional else max_gauge
            x = random_point(spec, rng, g)
            y = random_point(spec, rng, g)
            tag = "generic"
        yield _sample(spec, x, y, i, tag)


def boundary_ray_samples(
    spec: DomainSpec,
    seed: int,
    count: int,
    t_range: tuple[float, float] = (0.9, 0.999),
    base_gauge: float = 0.5,
    start: int = 0,
) -> Iterator[Sample]:
    """Pairs whose second point sits at spectral norm t on a random ray.

    ``1 - t`` is log-uniform over the range so both ends are represented.
    """
    lo, hi = 1.0 - t_range[1], 1.0 - t_range[0]
    N = spec.ambient_dim
    for i in range(start, start + count):
        rng = substream(seed, i)
        x = random_point(spec, rng, base_gauge)
        u = rng.normal(size=N) + 1j * rng.normal(size=N)
        u /= gauge_coords(spec, u)
        t = 1.0 - np.exp(rng.uniform(np.log(lo), np.log(hi)))
        yield _sample(spec, x, t * u, i, f"t={t:.6f}")
