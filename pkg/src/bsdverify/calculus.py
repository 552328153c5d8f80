"""Finite-difference complex Hessians and plurisubharmonicity certificates.

Functions handed to this module are *vectorised* real scalar fields on C^d:
they take a complex array of shape (m, d) and return m real values, with
NaN/inf marking points where the field is undefined.

The Levi form is assembled from Laplacians along complex lines.  For a
direction v, ``L(v) = d^2/dlam dlam-bar f(p + lam v)`` at lam = 0 is a
real-direction second-difference stencil applied along v and along i v.
Polarisation over the lines e_j, e_j +- e_k and e_j +- i e_k gives every entry
of H[j, k] = d^2 f / dz_j dz-bar_k twice; the two estimates are placed in the
upper and lower triangle and their Hermitian defect is recorded before
averaging.  With this convention the Levi form in direction v is
``v @ H @ v.conj()``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

__all__ = [
    "StencilOutOfDomain",
    "StepUnderflow",
    "NotHermitian",
    "HessianReport",
    "Sample",
    "PshVerdict",
    "complex_hessian_fd",
    "directional_laplacian_fd",
    "levi_form",
    "min_eigenvalue_hermitian",
    "choose_step",
    "psh_check",
    "strict_psh_check",
]

Field = Callable[[np.ndarray], np.ndarray]

MAX_STEP = 1e-3
STEP_FRACTION = 0.01
MIN_STEP = 1e-8
MAX_SHRINKS = 10
DEFAULT_TOL = 1e-6

# second-derivative stencils: offsets and weights (divide by h**2)
_STENCILS = {
    2: (np.array([1.0, -1.0]), np.array([1.0, 1.0]), -2.0),
    4: (np.array([1.0, -1.0, 2.0, -2.0]), np.array([16.0, 16.0, -1.0, -1.0]) / 12.0, -30.0 / 12.0),
}


class StencilOutOfDomain(ValueError):
    def __init__(self, msg: str, point=None):
        super().__init__(msg)
        self.point = point


class StepUnderflow(StencilOutOfDomain):
    pass


class NotHermitian(ValueError):
    pass


@dataclass
class HessianReport:
    H: np.ndarray
    min_eig: float
    max_abs_entry: float
    asym_residual: float
    step: float
    point_id: object = None

    @property
    def scale(self) -> float:
        return max(1.0, self.max_abs_entry)


@dataclass
class Sample:
    """A point of C^d handed to a psh check, with its boundary clearance."""

    x: np.ndarray
    clearance: float = 1.0
    index: int = 0
    tag: str = ""


@dataclass
class PshVerdict:
    passed: bool
    worst_point: np.ndarray | None
    worst_min_eig: float
    tolerance_used: float
    samples: int
    worst_scale: float = 1.0
    worst_index: int = -1
    worst_step: float = float("nan")
    flagged: int = 0
    strict: bool = False
    worst_tag: str = ""

    @property
    def worst_ratio(self) -> float:
        return self.worst_min_eig / max(1.0, self.worst_scale)

    @property
    def verdict(self) -> str:
        if not self.passed:
            return "fail"
        return "pass-with-flag" if self.flagged else "pass"


def _line_directions(d: int) -> tuple[np.ndarray, int]:
    """Directions e_j, then for j<k: e_j+e_k, e_j-e_k, e_j+ie_k, e_j-ie_k."""
    j, k = np.triu_indices(d, 1)
    npair = len(j)
    dirs = np.zeros((d + 4 * npair, d), dtype=complex)
    dirs[np.arange(d), np.arange(d)] = 1.0
    rows = d + 4 * np.arange(npair)
    for t, c in enumerate((1.0, -1.0, 1j, -1j)):
        dirs[rows + t, j] = 1.0
        dirs[rows + t, k] = c
    return dirs, npair


def _line_laplacians(f: Field, p: np.ndarray, dirs: np.ndarray, h: float, order: int):
    offsets, weights, center_w = _STENCILS[order]
    # each line gets offsets along v and along i v
    rot = np.concatenate([dirs, 1j * dirs])  # (2m, d)
    pts = p[None, None, :] + h * offsets[:, None, None] * rot[None, :, :]
    pts = pts.reshape(-1, p.size)
    vals = np.asarray(f(np.concatenate([p[None, :], pts])), dtype=float)
    if not np.all(np.isfinite(vals)):
        return None
    f0, rest = vals[0], vals[1:].reshape(len(offsets), 2, len(dirs))
    second = np.tensordot(weights, rest, axes=(0, 0)).sum(axis=0) + 2 * center_w * f0
    # Laplacian = 4 d^2/dlam dlam-bar
    return second / (4.0 * h * h)


def complex_hessian_fd(
    f: Field,
    point,
    step: float,
    order: int = 4,
    point_id=None,
    max_shrinks: int = MAX_SHRINKS,
) -> HessianReport:
    """Central-difference estimate of H[j, k] = d^2 f / dz_j dz-bar_k.

    ``order`` 2 is the plain O(h^2) scheme; 4 (default) uses five-point
    stencils and is O(h^4).  A non-finite value anywhere on the stencil halves
    the step, at most ``max_shrinks`` times.
    """
    p = np.asarray(point, dtype=complex).reshape(-1)
    if step <= 0:
        raise ValueError("step must be positive")
    d = p.size
    dirs, npair = _line_directions(d)
    h = float(step)
    for _ in range(max_shrinks + 1):
        if h < MIN_STEP:
            raise StepUnderflow(f"step shrank below {MIN_STEP:g}", point=p)
        L = _line_laplacians(f, p, dirs, h, order)
        if L is not None:
            break
        h *= 0.5
    else:
        raise StencilOutOfDomain("field undefined on the stencil after shrinking", point=p)

    diag = L[:d]
    j, k = np.triu_indices(d, 1)
    Lp, Lm, Lip, Lim = (L[d + t :: 4] for t in range(4))
    base = diag[j] + diag[k]
    re_up, re_lo = (Lp - base) / 2, (base - Lm) / 2
    im_up, im_lo = (Lip - base) / 2, (base - Lim) / 2
    H = np.zeros((d, d), dtype=complex)
    H[np.arange(d), np.arange(d)] = diag
    H[j, k] = re_up + 1j * im_up
    H[k, j] = re_lo - 1j * im_lo
    asym = float(np.abs(H - H.conj().T).max()) if d > 1 else 0.0
    H = 0.5 * (H + H.conj().T)
    return HessianReport(
        H=H,
        min_eig=min_eigenvalue_hermitian(H),
        max_abs_entry=float(np.abs(H).max()),
        asym_residual=asym,
        step=h,
        point_id=point_id,
    )


def directional_laplacian_fd(f: Field, point, direction, step: float, order: int = 4) -> float:
    """d^2/dlam dlam-bar of lam -> f(point + lam dir) at 0, for a unit dir."""
    p = np.asarray(point, dtype=complex).reshape(-1)
    v = np.asarray(direction, dtype=complex).reshape(-1)
    nv = np.linalg.norm(v)
    if not math.isclose(nv, 1.0, rel_tol=1e-9):
        raise ValueError(f"direction must have unit norm, got {nv}")
    L = _line_laplacians(f, p, v[None, :], float(step), order)
    if L is None:
        raise StencilOutOfDomain("field undefined on the stencil", point=p)
    return float(L[0])


def levi_form(H: np.ndarray, v) -> float:
    v = np.asarray(v, dtype=complex)
    return float(np.real(v @ H @ v.conj()))


def min_eigenvalue_hermitian(H) -> float:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise NotHermitian(f"expected a square matrix, got {H.shape}")
    defect = np.abs(H - H.conj().T).max() if H.size else 0.0
    if defect > 1e-10 * max(1.0, np.abs(H).max()):
        raise NotHermitian(f"Hermitian defect {defect:.3e}")
    return float(np.linalg.eigvalsh(0.5 * (H + H.conj().T))[0])


def choose_step(clearance: float, max_step: float = MAX_STEP, fraction: float = STEP_FRACTION) -> float:
    return min(max_step, fraction * clearance)


def _run_checks(f, samples, step, order, workers, fraction):
    def one(s: Sample):
        h = step if step is not None else choose_step(s.clearance, fraction=fraction)
        try:
            return s, complex_hessian_fd(f, s.x, h, order=order, point_id=s.index)
        except StencilOutOfDomain as exc:
            exc.point = s.x
            exc.args = (f"{exc.args[0]} (sample {s.index}, tag {s.tag!r})",)
            raise

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            yield from pool.map(one, samples)
    else:
        for s in samples:
            yield one(s)


def psh_check(
    f: Field,
    samples: Iterable[Sample],
    step: float | None = None,
    tol: float = DEFAULT_TOL,
    order: int = 4,
    workers: int = 1,
    strict: bool = False,
    step_fraction: float = STEP_FRACTION,
) -> PshVerdict:
    """Min-reduce of the normalised smallest Levi eigenvalue over samples.

    A sample's eigenvalue is judged against ``tol * max(1, scale)`` with scale
    the largest Hessian entry at that sample.  The weak check passes when
    every sample is >= -tol*scale, the strict check when every sample is
    >= +tol*scale.  Samples within +-tol*scale are counted as flagged.
    """
    worst = None
    n = 0
    flagged = 0
    for s, rep in _run_checks(f, samples, step, order, workers, step_fraction):
        n += 1
        ratio = rep.min_eig / rep.scale
        if abs(ratio) <= tol:
            flagged += 1
        if worst is None or ratio < worst[0]:
            worst = (ratio, s, rep)
    if worst is None:
        raise ValueError("no samples")
    ratio, s, rep = worst
    passed = ratio >= tol if strict else ratio >= -tol
    return PshVerdict(
        passed=bool(passed),
        worst_point=np.asarray(s.x),
        worst_min_eig=rep.min_eig,
        tolerance_used=tol,
        samples=n,
        worst_scale=rep.max_abs_entry,
        worst_index=s.index,
        worst_step=rep.step,
        flagged=flagged,
        strict=strict,
        worst_tag=s.tag,
    )


def strict_psh_check(
    f: Field,
    samples: Iterable[Sample],
    step: float | None = None,
    tol_strict: float = DEFAULT_TOL,
    **kwargs,
) -> PshVerdict:
    return psh_check(f, samples, step=step, tol=tol_strict, strict=True, **kwargs)
