"""The six irreducible bounded symmetric domains.

Points are handled in two forms:

* native: a p x q matrix (I), an n x n antisymmetric (II) or symmetric (III)
  matrix, an n-vector (IV), a (2, 8) array holding the octonions z1, z2 (V)
  or an :class:`~bsdverify.octonion.H3Matrix` (VI);
* coordinates: a complex vector of length ``spec.ambient_dim`` (independent
  entries only), the form every finite-difference routine works in.

The ``*_coords`` functions are vectorised over leading batch axes.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .octonion import H3Matrix, _det_fast, _h3_pair_arrays, _sharp_arrays

__all__ = [
    "Kind",
    "DomainSpec",
    "ShapeMismatch",
    "OutOfDisc",
    "contains",
    "generic_norm",
    "generic_norm_polarized",
    "polydisc_embed",
    "spectral_gauge",
    "clearance",
    "pfaffian",
    "to_coords",
    "from_coords",
    "conj_point",
    "norm_coords",
    "norm_table",
    "contains_coords",
    "gauge_coords",
    "clearance_coords",
    "LAMBDA_IV",
]

# w1 = lambda (z1 + z2), w2 = i lambda (z1 - z2) with lambda**2 = i/4
LAMBDA_IV = 0.5 * np.exp(0.25j * np.pi)


class ShapeMismatch(ValueError):
    pass


class OutOfDisc(ValueError):
    pass


class Kind(enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"
    VI = "VI"


_TOKEN_RE = re.compile(r"^(I|II|III|IV|V|VI)(?::(\d+)(?:,(\d+))?)?$")


@dataclass(frozen=True)
class DomainSpec:
    kind: Kind
    p: int = 0
    q: int = 0
    n: int = 0

    def __post_init__(self):
        k = self.kind
        if k is Kind.I:
            if self.p < 1 or self.q < 1:
                raise ValueError("type I needs p, q >= 1")
        elif k in (Kind.II, Kind.IV):
            if self.n < 2:
                raise ValueError(f"type {k.value} needs n >= 2")
        elif k is Kind.III:
            if self.n < 1:
                raise ValueError("type III needs n >= 1")

    @classmethod
    def I(cls, p: int, q: int) -> "DomainSpec":  # noqa: E743
        return cls(Kind.I, p=p, q=q)

    @classmethod
    def II(cls, n: int) -> "DomainSpec":
        return cls(Kind.II, n=n)

    @classmethod
    def III(cls, n: int) -> "DomainSpec":
        return cls(Kind.III, n=n)

    @classmethod
    def IV(cls, n: int) -> "DomainSpec":
        return cls(Kind.IV, n=n)

    @classmethod
    def V(cls) -> "DomainSpec":
        return cls(Kind.V)

    @classmethod
    def VI(cls) -> "DomainSpec":
        return cls(Kind.VI)

    @classmethod
    def ball(cls, n: int) -> "DomainSpec":
        """Unit ball of C^n, realised as I(1, n)."""
        return cls(Kind.I, p=1, q=n)

    @property
    def rank(self) -> int:
        k = self.kind
        if k is Kind.I:
            return min(self.p, self.q)
        if k is Kind.II:
            return self.n // 2
        if k is Kind.III:
            return self.n
        if k in (Kind.IV, Kind.V):
            return 2
        return 3

    @property
    def ambient_dim(self) -> int:
        k = self.kind
        if k is Kind.I:
            return self.p * self.q
        if k is Kind.II:
            return self.n * (self.n - 1) // 2
        if k is Kind.III:
            return self.n * (self.n + 1) // 2
        if k is Kind.IV:
            return self.n
        return 16 if k is Kind.V else 27

    @property
    def token(self) -> str:
        k = self.kind
        if k is Kind.I:
            return f"I:{self.p},{self.q}"
        if k in (Kind.II, Kind.III, Kind.IV):
            return f"{k.value}:{self.n}"
        return k.value

    @classmethod
    def from_token(cls, token: str) -> "DomainSpec":
        m = _TOKEN_RE.match(token.strip())
        if not m:
            raise ValueError(f"bad domain token {token!r}")
        name, a, b = m.groups()
        kind = Kind(name)
        if kind is Kind.I:
            if a is None or b is None:
                raise ValueError(f"type I token needs 'I:p,q', got {token!r}")
            return cls.I(int(a), int(b))
        if b is not None:
            raise ValueError(f"bad domain token {token!r}")
        if kind in (Kind.V, Kind.VI):
            if a is not None:
                raise ValueError(f"type {name} takes no dimension, got {token!r}")
            return cls(kind)
        if a is None:
            raise ValueError(f"type {name} token needs a dimension, got {token!r}")
        return cls(kind, n=int(a))

    def __str__(self) -> str:
        return self.token

    @cached_property
    def _tri(self):
        if self.kind is Kind.II:
            return np.triu_indices(self.n, 1)
        return np.triu_indices(self.n, 0)

    @property
    def pair_dim(self) -> int:
        return 2 * self.ambient_dim


# ---------------------------------------------------------------- conversions


def _matrix_from_coords(spec: DomainSpec, x: np.ndarray) -> np.ndarray:
    k = spec.kind
    if k is Kind.I:
        return x.reshape(x.shape[:-1] + (spec.p, spec.q))
    n = spec.n
    Z = np.zeros(x.shape[:-1] + (n, n), dtype=complex)
    iu, ju = spec._tri
    Z[..., iu, ju] = x
    if k is Kind.II:
        Z[..., ju, iu] = -x
    else:
        Z[..., ju, iu] = x
    return Z


def _h3_from_coords(spec: DomainSpec, x: np.ndarray):
    if spec.kind is Kind.V:
        z1, z2 = x[..., :8], x[..., 8:]
        alpha = np.zeros(x.shape[:-1] + (3,), dtype=complex)
        off = np.stack([np.zeros_like(z1), z1, z2], axis=-2)
        return alpha, off
    return x[..., :3], x[..., 3:].reshape(x.shape[:-1] + (3, 8))


def _check_native(spec: DomainSpec, Z) -> None:
    k = spec.kind
    if k is Kind.VI:
        if not isinstance(Z, H3Matrix) or Z.alpha.shape != (3,):
            raise ShapeMismatch("type VI points are single H3Matrix instances")
        return
    Z = np.asarray(Z)
    expected = {
        Kind.I: (spec.p, spec.q),
        Kind.II: (spec.n, spec.n),
        Kind.III: (spec.n, spec.n),
        Kind.IV: (spec.n,),
        Kind.V: (2, 8),
    }[k]
    if Z.shape != expected:
        raise ShapeMismatch(f"{spec.token} expects shape {expected}, got {Z.shape}")
    if k in (Kind.II, Kind.III):
        sign = 1 if k is Kind.II else -1
        scale = max(np.abs(Z).max(), 1e-300)
        if np.abs(Z + sign * Z.T).max() > 1e-12 * scale:
            what = "antisymmetric" if k is Kind.II else "symmetric"
            raise ShapeMismatch(f"{spec.token} points must be {what}")


def to_coords(spec: DomainSpec, Z) -> np.ndarray:
    """Independent complex coordinates of a native point."""
    _check_native(spec, Z)
    k = spec.kind
    if k is Kind.VI:
        return np.concatenate([Z.alpha, Z.off.reshape(24)])
    Z = np.asarray(Z, dtype=complex)
    if k is Kind.I:
        return Z.reshape(-1).copy()
    if k in (Kind.II, Kind.III):
        return Z[spec._tri].copy()
    return Z.reshape(-1).copy()


def from_coords(spec: DomainSpec, x) -> np.ndarray | H3Matrix:
    x = np.asarray(x, dtype=complex)
    if x.shape != (spec.ambient_dim,):
        raise ShapeMismatch(f"{spec.token} expects {spec.ambient_dim} coordinates, got {x.shape}")
    k = spec.kind
    if k in (Kind.I, Kind.II, Kind.III):
        return _matrix_from_coords(spec, x)
    if k is Kind.IV:
        return x.copy()
    if k is Kind.V:
        return x.reshape(2, 8).copy()
    return H3Matrix(x[:3], x[3:].reshape(3, 8))


def conj_point(spec: DomainSpec, Z):
    """Entrywise complex conjugate of a native point."""
    if spec.kind is Kind.VI:
        return Z.conj()
    return np.conj(np.asarray(Z))


# ------------------------------------------------------------------ pfaffian


def pfaffian(A: np.ndarray) -> np.ndarray:
    """Pfaffian of antisymmetric matrices (..., 2m, 2m).

    Parlett-Reid style elimination with partial pivoting, vectorised over the
    batch axes.
    """
    A = np.array(A, dtype=complex)
    n = A.shape[-1]
    batch = A.shape[:-2]
    if n % 2:
        return np.zeros(batch, dtype=complex)
    A = A.reshape((-1, n, n))
    B = A.shape[0]
    bi = np.arange(B)
    result = np.ones(B, dtype=complex)
    for k in range(0, n - 1, 2):
        kp = k + 1 + np.argmax(np.abs(A[:, k, k + 1 :]), axis=1)
        swap = kp != k + 1
        if swap.any():
            tmp = A[bi, k + 1, :].copy()
            A[bi, k + 1, :] = A[bi, kp, :]
            A[bi, kp, :] = tmp
            tmp = A[bi, :, k + 1].copy()
            A[bi, :, k + 1] = A[bi, :, kp]
            A[bi, :, kp] = tmp
            result[swap] *= -1
        piv = A[:, k, k + 1]
        result *= piv
        if k + 2 < n:
            safe = np.where(piv == 0, 1.0, piv)
            tau = A[:, k, k + 2 :] / safe[:, None]
            col = A[:, k + 2 :, k + 1]
            A[:, k + 2 :, k + 2 :] += tau[:, :, None] * col[:, None, :]
            A[:, k + 2 :, k + 2 :] -= col[:, :, None] * tau[:, None, :]
    return result.reshape(batch)


# ------------------------------------------------------------------- norms


def norm_coords(spec: DomainSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Polarised generic norm N(x, y): holomorphic in x, antiholomorphic in y."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    k = spec.kind
    if k in (Kind.I, Kind.III):
        X = _matrix_from_coords(spec, x)
        Y = _matrix_from_coords(spec, y)
        if k is Kind.I and spec.p > spec.q:
            M = np.eye(spec.q) - np.conj(np.swapaxes(Y, -1, -2)) @ X
        else:
            M = np.eye(X.shape[-2]) - X @ np.conj(np.swapaxes(Y, -1, -2))
        return np.linalg.det(M)
    if k is Kind.II:
        n = spec.n
        X = _matrix_from_coords(spec, x)
        Yb = np.conj(_matrix_from_coords(spec, y))
        X, Yb = np.broadcast_arrays(X, Yb)
        big = np.zeros(X.shape[:-2] + (2 * n, 2 * n), dtype=complex)
        big[..., :n, :n] = X
        big[..., n:, n:] = Yb
        big[..., :n, n:] = np.eye(n)
        big[..., n:, :n] = -np.eye(n)
        sign = -1.0 if (n * (n - 1) // 2) % 2 else 1.0
        return sign * pfaffian(big)
    if k is Kind.IV:
        xy = np.sum(x * np.conj(y), axis=-1)
        return 1.0 - 2.0 * xy + np.sum(x * x, axis=-1) * np.conj(np.sum(y * y, axis=-1))
    return _pair_from_parts(spec, _jordan_parts(spec, x), _jordan_parts(spec, y))


def _jordan_parts(spec: DomainSpec, x: np.ndarray):
    """(alpha, off, alpha#, off#, det) of the H3 image of V/VI coordinates."""
    a, o = _h3_from_coords(spec, x)
    sa, so = _sharp_arrays(a, o)
    det = _det_fast(a, o) if spec.kind is Kind.VI else None
    return a, o, sa, so, det


def _conj_parts(parts):
    return tuple(None if t is None else np.conj(t) for t in parts)


def _pair_from_parts(spec: DomainSpec, P, Q) -> np.ndarray:
    out = 1.0 - _h3_pair_arrays(P[0], P[1], Q[0], Q[1]) + _h3_pair_arrays(P[2], P[3], Q[2], Q[3])
    if spec.kind is Kind.VI:
        out = out - P[4] * np.conj(Q[4])
    return out


def norm_table(spec: DomainSpec, x: np.ndarray, y: np.ndarray, twisted: bool = False):
    """(N(x,x), N(y,y), N(x,y'), N(y,x')) with y' = y, x' = x, or their conjugates
    when ``twisted``.  Shares the Jordan data of each point for V and VI."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if spec.kind in (Kind.V, Kind.VI):
        P, Q = _jordan_parts(spec, x), _jordan_parts(spec, y)
        Pc, Qc = (_conj_parts(P), _conj_parts(Q)) if twisted else (P, Q)
        return (
            _pair_from_parts(spec, P, P), _pair_from_parts(spec, Q, Q),
            _pair_from_parts(spec, P, Qc), _pair_from_parts(spec, Q, Pc),
        )
    yc, xc = (np.conj(y), np.conj(x)) if twisted else (y, x)
    return (
        norm_coords(spec, x, x), norm_coords(spec, y, y),
        norm_coords(spec, x, yc), norm_coords(spec, y, xc),
    )


def contains_coords(spec: DomainSpec, x: np.ndarray) -> np.ndarray:
    """Membership test on coordinates, vectorised."""
    x = np.asarray(x, dtype=complex)
    k = spec.kind
    if k in (Kind.I, Kind.II, Kind.III):
        X = _matrix_from_coords(spec, x)
        M = np.eye(X.shape[-2]) - X @ np.conj(np.swapaxes(X, -1, -2))
        return np.linalg.eigvalsh(M)[..., 0] > 0
    if k is Kind.IV:
        zz = np.sum(np.abs(x) ** 2, axis=-1)
        s = 1.0 - 2.0 * zz + np.abs(np.sum(x * x, axis=-1)) ** 2
        return (zz < 1.0) & (s > 0)
    a, o = _h3_from_coords(spec, x)
    sa, so = _sharp_arrays(a, o)
    zz = _h3_pair_arrays(a, o, a, o).real
    ss = _h3_pair_arrays(sa, so, sa, so).real
    if k is Kind.V:
        return (1.0 - zz + ss > 0) & (2.0 - zz > 0)
    dd = np.abs(_det_fast(a, o)) ** 2
    return (1.0 - zz + ss - dd > 0) & (3.0 - 2.0 * zz + ss > 0) & (3.0 - zz > 0)


def gauge_coords(spec: DomainSpec, x: np.ndarray, iters: int = 60) -> np.ndarray:
    """Spectral norm of the Jordan triple: the domain is {gauge < 1}.

    Closed forms for I-IV; bisection along the ray t -> t x for V and VI.
    """
    x = np.asarray(x, dtype=complex)
    k = spec.kind
    if k in (Kind.I, Kind.II, Kind.III):
        X = _matrix_from_coords(spec, x)
        return np.linalg.norm(X, ord=2, axis=(-2, -1))
    if k is Kind.IV:
        zz = np.sum(np.abs(x) ** 2, axis=-1)
        disc = np.maximum(zz**2 - np.abs(np.sum(x * x, axis=-1)) ** 2, 0.0)
        return np.sqrt(zz + np.sqrt(disc))
    # star-shaped: bracket t in [lo, hi] with x/t inside for t > gauge
    flat = x.reshape(-1, x.shape[-1])
    mag = np.linalg.norm(flat, axis=-1)
    lo = np.zeros(len(flat))
    hi = 2.0 * mag + 1e-300
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = contains_coords(spec, flat / np.where(mid > 0, mid, 1.0)[:, None])
        hi = np.where(inside, mid, hi)
        lo = np.where(inside, lo, mid)
    return hi.reshape(x.shape[:-1])


def clearance_coords(spec: DomainSpec, x: np.ndarray) -> np.ndarray:
    """Euclidean radius (in coordinates) of a ball around x inside the domain.

    A coordinate perturbation of size t moves the spectral norm by at most t
    for type I and by at most sqrt(2) t otherwise.
    """
    g = gauge_coords(spec, x)
    c = 1.0 - g
    if spec.kind is not Kind.I:
        c = c / math.sqrt(2.0)
    return c


# ------------------------------------------------------- native-point API


def contains(spec: DomainSpec, Z) -> bool:
    return bool(contains_coords(spec, to_coords(spec, Z)))


def generic_norm(spec: DomainSpec, Z) -> float:
    x = to_coords(spec, Z)
    return float(norm_coords(spec, x, x).real)


def generic_norm_polarized(spec: DomainSpec, Z, W) -> complex:
    return complex(norm_coords(spec, to_coords(spec, Z), to_coords(spec, W)))


def spectral_gauge(spec: DomainSpec, Z) -> float:
    return float(gauge_coords(spec, to_coords(spec, Z)))


def clearance(spec: DomainSpec, Z) -> float:
    return float(clearance_coords(spec, to_coords(spec, Z)))


def polydisc_embed(spec: DomainSpec, zeta) -> np.ndarray | H3Matrix:
    """Point of the maximal polydisc with coordinates zeta (length rank)."""
    zeta = np.asarray(zeta, dtype=complex)
    if zeta.shape != (spec.rank,):
        raise ShapeMismatch(f"{spec.token} polydisc has dimension {spec.rank}, got {zeta.shape}")
    if np.any(np.abs(zeta) >= 1.0):
        raise OutOfDisc(f"polydisc coordinates must lie in the unit disc: {zeta}")
    k = spec.kind
    if k is Kind.I:
        Z = np.zeros((spec.p, spec.q), dtype=complex)
        Z[np.arange(spec.rank), np.arange(spec.rank)] = zeta
        return Z
    if k is Kind.II:
        Z = np.zeros((spec.n, spec.n), dtype=complex)
        for i, z in enumerate(zeta):
            Z[2 * i, 2 * i + 1] = z
            Z[2 * i + 1, 2 * i] = -z
        return Z
    if k is Kind.III:
        return np.diag(zeta)
    w1 = LAMBDA_IV * (zeta[0] + zeta[1])
    w2 = 1j * LAMBDA_IV * (zeta[0] - zeta[1])
    if k is Kind.IV:
        w = np.zeros(spec.n, dtype=complex)
        w[0], w[1] = w1, w2
        return w
    if k is Kind.V:
        # z1 = 0 reduces the type V norm to the type IV norm of z2 in C^8
        Z = np.zeros((2, 8), dtype=complex)
        Z[1, 0], Z[1, 1] = w1, w2
        return Z
    return H3Matrix(zeta, np.zeros((3, 8), dtype=complex))
