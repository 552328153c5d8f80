"""Invariant functions on Omega x Omega built from the generic norm.

    delta(z, w)     = N(z, z) N(w, w) / |N(z, w)|^2            in (0, 1]
    log psi(z, w)   = -g log delta                            (g = genus)
    delta_bar(z, w) = N(z, z) N(w, w) / |N(z, conj w)|^2

``-delta**(1/r)`` is the bounded exhaustion for the diagonal action and
``-delta_bar**(1/r)`` the strictly psh one for the twisted action, both for
r >= 2 rank.

Each function comes in two forms: a scalar one on native points, and a
vectorised ``*_field`` on joint coordinates (z, w) of length 2N that the
finite-difference checks consume.  Fields return NaN off the domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .calculus import PshVerdict, Sample, psh_check
from .domains import (
    DomainSpec,
    Kind,
    clearance_coords,
    contains_coords,
    gauge_coords,
    norm_table,
    to_coords,
)
from .sampling import substream

__all__ = [
    "OutsideDomain",
    "SectionEscapedDomain",
    "log_delta_coords",
    "delta",
    "log_psi",
    "hyperconvex_fn",
    "psi_k",
    "delta_bar",
    "log_psi_field",
    "power_field",
    "psi_k_field",
    "SectionSpec",
    "random_section",
    "bundle_section_fn",
    "bundle_section_field",
    "section_samples",
    "exponent_scan",
    "ScanResult",
    "df_scan",
    "parse_grid",
]


class OutsideDomain(ValueError):
    pass


class SectionEscapedDomain(ValueError):
    pass


def log_delta_coords(spec: DomainSpec, x, y, twisted: bool = False) -> np.ndarray:
    """log delta (or log delta_bar), NaN where a point has N <= 0.

    The cross term is averaged over both orders so the value is exactly
    symmetric under swapping x and y.
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    nxx, nyy, a, b = norm_table(spec, x, y, twisted)
    nxx, nyy = nxx.real, nyy.real
    with np.errstate(invalid="ignore", divide="ignore"):
        ok = (nxx > 0) & (nyy > 0)
        out = (np.log(np.where(ok, nxx, 1.0)) + np.log(np.where(ok, nyy, 1.0))) - (
            np.log(np.abs(a)) + np.log(np.abs(b))
        )
    return np.where(ok, out, np.nan)


def _coords_pair(spec: DomainSpec, z, w) -> tuple[np.ndarray, np.ndarray]:
    x = to_coords(spec, z)
    y = to_coords(spec, w)
    if not (contains_coords(spec, x) and contains_coords(spec, y)):
        raise OutsideDomain(f"pair not inside {spec.token}")
    return x, y


def delta(spec: DomainSpec, z, w) -> float:
    x, y = _coords_pair(spec, z, w)
    return float(np.exp(log_delta_coords(spec, x, y)))


def log_psi(spec: DomainSpec, z, w, genus: float = 1.0) -> float:
    if genus <= 0:
        raise ValueError("genus must be positive")
    x, y = _coords_pair(spec, z, w)
    return float(-genus * log_delta_coords(spec, x, y))


def hyperconvex_fn(spec: DomainSpec, z, w, r: float) -> float:
    if r < 1:
        raise ValueError("r must be >= 1")
    x, y = _coords_pair(spec, z, w)
    return float(-np.exp(log_delta_coords(spec, x, y) / r))


def delta_bar(spec: DomainSpec, z, w) -> float:
    x, y = _coords_pair(spec, z, w)
    return float(np.exp(log_delta_coords(spec, x, y, twisted=True)))


def psi_k(spec: DomainSpec, points: Sequence, genus: float = 1.0) -> float:
    """log psi_k(z_1..z_k): sum of log psi around the cycle z_1 -> ... -> z_k -> z_1."""
    if len(points) < 2:
        raise ValueError("psi_k needs k >= 2 points")
    xs = [to_coords(spec, z) for z in points]
    if not all(contains_coords(spec, x) for x in xs):
        raise OutsideDomain(f"points not inside {spec.token}")
    k = len(xs)
    return float(sum(-genus * log_delta_coords(spec, xs[i], xs[(i + 1) % k]) for i in range(k)))


# ------------------------------------------------------------- fields


def log_psi_field(spec: DomainSpec, genus: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    N = spec.ambient_dim

    def f(u):
        return -genus * log_delta_coords(spec, u[..., :N], u[..., N:])

    return f


def power_field(spec: DomainSpec, mu: float, twisted: bool = False) -> Callable[[np.ndarray], np.ndarray]:
    """-delta**mu (or -delta_bar**mu) on joint coordinates."""
    N = spec.ambient_dim

    def f(u):
        return -np.exp(mu * log_delta_coords(spec, u[..., :N], u[..., N:], twisted=twisted))

    return f


def psi_k_field(spec: DomainSpec, k: int, genus: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    N = spec.ambient_dim

    def f(u):
        pts = [u[..., i * N : (i + 1) * N] for i in range(k)]
        return sum(-genus * log_delta_coords(spec, pts[i], pts[(i + 1) % k]) for i in range(k))

    return f


# ------------------------------------------------------------- sections

SECTION_KINDS = ("constant", "holomorphic_affine", "antiholomorphic_affine")


@dataclass(frozen=True, eq=False)
class SectionSpec:
    """Affine map h(xi) = offset + (xi or conj xi) @ linear from C^m into the domain."""

    kind: str
    base_dim: int
    offset: np.ndarray
    linear: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.kind not in SECTION_KINDS:
            raise ValueError(f"section kind must be one of {SECTION_KINDS}")
        off = np.asarray(self.offset, dtype=complex)
        lin = self.linear
        lin = np.zeros((self.base_dim, off.size), dtype=complex) if lin is None else np.asarray(lin, dtype=complex)
        if self.kind == "constant":
            lin = np.zeros_like(lin)
        if lin.shape != (self.base_dim, off.size):
            raise ValueError(f"linear part must have shape {(self.base_dim, off.size)}")
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "linear", lin)

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=complex)
        if self.kind == "antiholomorphic_affine":
            xi = np.conj(xi)
        return self.offset + xi @ self.linear

    def check_clearance(self, spec: DomainSpec, min_clearance: float = 0.05, probes: int = 64,
                        seed: int = 0) -> float:
        """Smallest clearance of h over the closed unit polydisc, by sampling.

        The spectral norm of an affine image is plurisubharmonic in xi, so its
        maximum sits on the torus |xi_i| = 1; the probes go there.
        """
        rng = np.random.default_rng(seed)
        xi = np.exp(2j * np.pi * rng.random((probes, self.base_dim)))
        c = float(np.min(clearance_coords(spec, self(xi))))
        if c < min_clearance:
            raise SectionEscapedDomain(f"section clearance {c:.4f} < {min_clearance}")
        return c

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "base_dim": self.base_dim,
            "offset": np.stack([self.offset.real, self.offset.imag], -1).tolist(),
            "linear": np.stack([self.linear.real, self.linear.imag], -1).tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SectionSpec":
        off = np.asarray(data["offset"], dtype=float)
        lin = np.asarray(data["linear"], dtype=float)
        return cls(data["kind"], int(data["base_dim"]), off[..., 0] + 1j * off[..., 1],
                   lin[..., 0] + 1j * lin[..., 1])


def random_section(spec: DomainSpec, kind: str, rng: np.random.Generator, base_dim: int = 2,
                   min_clearance: float = 0.05) -> SectionSpec:
    """Random affine section whose image keeps ``min_clearance`` from the boundary."""
    N = spec.ambient_dim
    # spectral-norm budget: clearance >= c needs gauge <= 1 - c (type I) or 1 - sqrt(2) c
    factor = 1.0 if spec.kind is Kind.I else np.sqrt(2.0)
    budget = 1.0 - factor * min_clearance - 1e-9

    def unit():
        v = rng.normal(size=N) + 1j * rng.normal(size=N)
        return v / gauge_coords(spec, v)

    r0 = rng.uniform(0.0, 0.5) * budget
    offset = unit() * r0
    weights = rng.dirichlet(np.ones(base_dim)) * (budget - r0) * rng.uniform(0.5, 1.0)
    linear = np.stack([unit() * wgt for wgt in weights])
    sec = SectionSpec(kind, base_dim, offset, linear)
    sec.check_clearance(spec, min_clearance)
    return sec


def bundle_section_fn(spec: DomainSpec, h: SectionSpec, xi, w, genus: float = 1.0) -> float:
    """log psi(h(xi), w)."""
    z = h(xi)
    if not contains_coords(spec, z):
        raise SectionEscapedDomain(f"h(xi) left {spec.token}")
    y = to_coords(spec, w)
    if not contains_coords(spec, y):
        raise OutsideDomain(f"w not inside {spec.token}")
    return float(-genus * log_delta_coords(spec, z, y))


def bundle_section_field(spec: DomainSpec, h: SectionSpec, genus: float = 1.0):
    """(xi, w) -> log psi(h(xi), w) on C^(m + N)."""
    m = h.base_dim

    def f(u):
        return -genus * log_delta_coords(spec, h(u[..., :m]), u[..., m:])

    return f


def section_samples(spec: DomainSpec, h: SectionSpec, seed: int, count: int,
                    base_radius: float = 0.9, max_gauge: float = 0.9, start: int = 0):
    """Joint samples (xi, w) with xi in the base polydisc of radius ``base_radius``."""
    from .sampling import random_point

    m = h.base_dim
    lin_norm = max(1.0, float(np.sum(gauge_coords(spec, h.linear))))
    factor = 1.0 if spec.kind is Kind.I else np.sqrt(2.0)
    for i in range(start, start + count):
        rng = substream(seed, i)
        xi = rng.uniform(0, base_radius, m) * np.exp(2j * np.pi * rng.random(m))
        w = random_point(spec, rng, max_gauge)
        c_img = float(clearance_coords(spec, h(xi)))
        # moving xi by t moves h(xi) by at most t * lin_norm in spectral norm
        c = min(float(clearance_coords(spec, w)), c_img / (lin_norm * factor))
        yield Sample(np.concatenate([xi, w]), clearance=c, index=i, tag=h.kind)


# ------------------------------------------------------------- scans


def parse_grid(text: str) -> list[float]:
    """'a:b:step' -> [a, a+step, ..., b] (inclusive up to rounding)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must look like 'a:b:step', got {text!r}")
    a, b, step = (float(t) for t in parts)
    if step <= 0 or b < a:
        raise ValueError(f"bad grid {text!r}")
    count = int(np.floor((b - a) / step + 1e-9)) + 1
    return [round(a + i * step, 12) for i in range(count)]


@dataclass
class ScanResult:
    grid: list[float]
    verdicts: list[PshVerdict]
    estimate: float | None
    monotone: bool

    def rows(self) -> list[dict]:
        return [
            {"mu": mu, "verdict": v.verdict, "worst_ratio": v.worst_ratio, "worst_index": v.worst_index}
            for mu, v in zip(self.grid, self.verdicts)
        ]


def _scan(spec: DomainSpec, grid: Iterable[float], samples: Sequence[Sample], tol: float,
          twisted: bool = False, **kw) -> ScanResult:
    grid = sorted(float(m) for m in grid)
    if any(not (0 < m <= 1) for m in grid):
        raise ValueError("exponents must lie in (0, 1]")
    samples = list(samples)
    verdicts = [psh_check(power_field(spec, mu, twisted), samples, tol=tol, **kw) for mu in grid]
    passed = [v.passed for v in verdicts]
    # the pass region should be an initial segment
    estimate = None
    for mu, ok in zip(grid, passed):
        if not ok:
            break
        estimate = mu
    monotone = all(not passed[i + 1] or passed[i] for i in range(len(passed) - 1))
    return ScanResult(grid, verdicts, estimate, monotone)


def exponent_scan(spec: DomainSpec, grid: Iterable[float], samples: Sequence[Sample],
                  tol: float = 1e-6, **kw) -> ScanResult:
    """psh_check of -delta**mu for each mu of the grid."""
    return _scan(spec, grid, samples, tol, **kw)


def df_scan(n: int, grid: Iterable[float], samples: Sequence[Sample] | None = None,
            tol: float = 1e-6, seed: int = 0, count: int = 60, **kw) -> ScanResult:
    """Largest grid exponent mu with -delta**mu psh on the pair of n-balls.

    The default sampler approaches the boundary along rays t in [0.9, 0.999].
    """
    from .sampling import boundary_ray_samples

    spec = DomainSpec.ball(n)
    if samples is None:
        samples = list(boundary_ray_samples(spec, seed, count))
    return _scan(spec, grid, samples, tol, **kw)
