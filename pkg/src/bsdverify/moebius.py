"""Automorphism families used for invariance testing.

Type I (and, through class-preserving subgroups, types II and III) gets the
full generalised Moebius action of U(p, q),

    Z -> (A Z + B)(C Z + D)^{-1}.

Types IV, V and VI get disc Moebius maps acting on the maximal polydisc,
zeta_i -> e^{i phi_i} (zeta_i - a_i) / (1 - conj(a_i) zeta_i), plus isotropy
rotations at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, sqrtm

from .domains import DomainSpec, Kind, OutOfDisc, ShapeMismatch
from .octonion import H3Matrix

__all__ = [
    "SingularDenominator",
    "NotOrthogonal",
    "MatrixMoebius",
    "PolydiscMoebius",
    "random_matrix_moebius",
    "apply_matrix_moebius",
    "transvection",
    "unitary_isotropy",
    "disc_moebius",
    "random_class_moebius",
    "apply_polydisc_moebius",
    "random_polydisc_moebius",
    "isotropy_iv",
    "random_orthogonal",
    "phase_isotropy",
]

J_TOL = 1e-10
COND_MAX = 1e12


class SingularDenominator(ArithmeticError):
    pass


class NotOrthogonal(ValueError):
    pass


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _pairs(M: np.ndarray) -> list:
    return np.stack([M.real, M.imag], axis=-1).tolist()


def _from_pairs(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


@dataclass(frozen=True, eq=False)
class MatrixMoebius:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @property
    def p(self) -> int:
        return self.A.shape[0]

    @property
    def q(self) -> int:
        return self.D.shape[0]

    @classmethod
    def from_matrix(cls, g: np.ndarray, p: int) -> "MatrixMoebius":
        g = np.asarray(g, dtype=complex)
        return cls(g[:p, :p], g[:p, p:], g[p:, :p], g[p:, p:])

    @classmethod
    def identity(cls, p: int, q: int) -> "MatrixMoebius":
        return cls.from_matrix(np.eye(p + q, dtype=complex), p)

    def as_matrix(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])

    def J(self) -> np.ndarray:
        return np.diag(np.r_[np.ones(self.p), -np.ones(self.q)])

    def j_defect(self) -> float:
        """max |g* J g - J|, zero for members of U(p, q)."""
        g = self.as_matrix()
        J = self.J()
        return float(np.abs(g.conj().T @ J @ g - J).max())

    def __matmul__(self, other: "MatrixMoebius") -> "MatrixMoebius":
        return MatrixMoebius.from_matrix(self.as_matrix() @ other.as_matrix(), self.p)

    def inverse(self) -> "MatrixMoebius":
        J = self.J()
        return MatrixMoebius.from_matrix(J @ self.as_matrix().conj().T @ J, self.p)

    def __call__(self, Z):
        return apply_matrix_moebius(self, Z)

    def to_json(self) -> dict:
        return {"type": "matrix", "p": self.p, "q": self.q, "g": _pairs(self.as_matrix())}

    @classmethod
    def from_json(cls, data: dict) -> "MatrixMoebius":
        return cls.from_matrix(_from_pairs(data["g"]), int(data["p"]))


def random_matrix_moebius(p: int, q: int, seed=None, magnitude: float = 1.0) -> MatrixMoebius:
    """exp(X) for a random X in u(p, q) with spectral norm ``magnitude``."""
    if magnitude <= 0:
        raise ValueError("magnitude must be positive")
    rng = _rng(seed)

    def gauss(*shape):
        return rng.normal(size=shape) + 1j * rng.normal(size=shape)

    X11 = gauss(p, p)
    X22 = gauss(q, q)
    X12 = gauss(p, q)
    X = np.block([[X11 - X11.conj().T, X12], [X12.conj().T, X22 - X22.conj().T]])
    X *= magnitude / np.linalg.norm(X, 2)
    return MatrixMoebius.from_matrix(expm(X), p)


def apply_matrix_moebius(g: MatrixMoebius, Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    if Z.shape[-2:] != (g.p, g.q):
        raise ShapeMismatch(f"expected (..., {g.p}, {g.q}) points, got {Z.shape}")
    num = g.A @ Z + g.B
    den = g.C @ Z + g.D
    cond = np.linalg.cond(den)
    if np.any(~np.isfinite(cond)) or np.any(cond > COND_MAX):
        raise SingularDenominator(f"CZ + D has condition number {np.max(cond):.3e}")
    # num @ inv(den) == solve(den^T, num^T)^T
    return np.swapaxes(np.linalg.solve(np.swapaxes(den, -1, -2), np.swapaxes(num, -1, -2)), -1, -2)


def transvection(A) -> MatrixMoebius:
    """The element of U(p, q) sending A to 0 with positive-definite diagonal blocks."""
    A = np.asarray(A, dtype=complex)
    p, q = A.shape
    Lp = np.linalg.inv(sqrtm(np.eye(p) - A @ A.conj().T))
    Lq = np.linalg.inv(sqrtm(np.eye(q) - A.conj().T @ A))
    return MatrixMoebius(Lp, -Lp @ A, -Lq @ A.conj().T, Lq)


def unitary_isotropy(U, V) -> MatrixMoebius:
    """Z -> U Z V for unitary U (p x p) and V (q x q)."""
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    p, q = U.shape[0], V.shape[0]
    return MatrixMoebius(U, np.zeros((p, q)), np.zeros((q, p)), np.linalg.inv(V))


def disc_moebius(a: complex, phi: float = 0.0) -> MatrixMoebius:
    """zeta -> e^{i phi} (zeta - a) / (1 - conj(a) zeta) as a U(1, 1) element."""
    if abs(a) >= 1:
        raise OutOfDisc(f"|a| must be < 1, got {abs(a)}")
    s = 1.0 / np.sqrt(1.0 - abs(a) ** 2)
    e = np.exp(0.5j * phi)
    return MatrixMoebius(
        np.array([[e * s]]), np.array([[-e * a * s]]),
        np.array([[-np.conj(a) * s / e]]), np.array([[s / e]]),
    )


def _random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(G)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_class_moebius(spec: DomainSpec, seed=None, magnitude: float = 0.6) -> MatrixMoebius:
    """Random automorphism of a type I, II or III domain preserving its class.

    A transvection by a random class member of spectral norm < ``magnitude``
    composed with Z -> U Z V (V = U^t for II and III).
    """
    rng = _rng(seed)
    k = spec.kind
    if k is Kind.I:
        p, q = spec.p, spec.q
        A = rng.normal(size=(p, q)) + 1j * rng.normal(size=(p, q))
        U, V = _random_unitary(p, rng), _random_unitary(q, rng)
    elif k in (Kind.II, Kind.III):
        n = spec.n
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        A = A - A.T if k is Kind.II else A + A.T
        U = _random_unitary(n, rng)
        V = U.T
    else:
        raise ValueError(f"no matrix action for type {k.value}")
    A *= magnitude * rng.uniform(0.2, 1.0) / np.linalg.norm(A, 2)
    return unitary_isotropy(U, V) @ transvection(A)


@dataclass(frozen=True, eq=False)
class PolydiscMoebius:
    a: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=complex))
        phi = np.atleast_1d(np.asarray(self.phi, dtype=float))
        if a.shape != phi.shape:
            raise ValueError("a and phi need equal lengths")
        if np.any(np.abs(a) >= 1):
            raise OutOfDisc("Moebius centres must lie in the unit disc")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "phi", phi)

    def to_json(self) -> dict:
        return {"type": "polydisc", "a": _pairs(self.a), "phi": self.phi.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "PolydiscMoebius":
        return cls(_from_pairs(data["a"]), np.asarray(data["phi"], dtype=float))


def random_polydisc_moebius(rank: int, seed=None, max_abs: float = 0.7) -> PolydiscMoebius:
    rng = _rng(seed)
    a = rng.uniform(0, max_abs, rank) * np.exp(2j * np.pi * rng.random(rank))
    return PolydiscMoebius(a, rng.uniform(0, 2 * np.pi, rank))


def apply_polydisc_moebius(spec: DomainSpec, m: PolydiscMoebius, zeta) -> np.ndarray:
    zeta = np.asarray(zeta, dtype=complex)
    if zeta.shape[-1:] != (spec.rank,) or m.a.shape != (spec.rank,):
        raise ShapeMismatch(f"{spec.token} polydisc has dimension {spec.rank}")
    if np.any(np.abs(zeta) >= 1):
        raise OutOfDisc("polydisc coordinates must lie in the unit disc")
    return np.exp(1j * m.phi) * (zeta - m.a) / (1.0 - np.conj(m.a) * zeta)


def random_orthogonal(n: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    return Q * np.sign(np.diag(R))


def isotropy_iv(theta: float, O, z) -> np.ndarray:
    """z -> e^{i theta} z O for real orthogonal O."""
    O = np.asarray(O)
    if np.iscomplexobj(O) and np.abs(O.imag).max() > 0:
        raise NotOrthogonal("isotropy matrix must be real")
    O = np.real(O)
    if np.abs(O @ O.T - np.eye(O.shape[0])).max() > 1e-12:
        raise NotOrthogonal("O O^t != I")
    return np.exp(1j * theta) * (np.asarray(z, dtype=complex) @ O)


def phase_isotropy(spec: DomainSpec, theta: float, Z):
    """Z -> e^{i theta} Z, an automorphism of every circled domain."""
    c = np.exp(1j * theta)
    if spec.kind is Kind.VI:
        return H3Matrix(c * Z.alpha, c * Z.off)
    return c * np.asarray(Z, dtype=complex)
