"""Complex octonions and the exceptional Jordan algebra H3(O_C).

Octonions are stored as arrays of 8 complex coefficients on the basis
e0..e7.  Every array-level helper (``omul``, ``oconj`` ...) broadcasts over
leading batch axes, which is what the generic-norm code of the exceptional
domains relies on for speed.  The ``Octonion`` and ``H3Matrix`` classes are
thin immutable wrappers around those arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NonScalarResult",
    "Octonion",
    "H3Matrix",
    "MULT_TABLE",
    "basis",
    "mul",
    "cayley_conj",
    "complex_conj",
    "scalar_product",
    "h3_adjoint",
    "h3_det",
    "h3_scalar_product",
    "embed_m12",
    "omul",
    "oconj",
]

SCALAR_RTOL = 1e-12


class NonScalarResult(ArithmeticError):
    """An expression that must be a multiple of e0 had imaginary parts."""


def _quat_table() -> np.ndarray:
    # T[i, j, k]: coefficient of e_k in e_i e_j for the quaternions 1, i, j, k
    T = np.zeros((4, 4, 4))
    prods = {
        (0, 0): (0, 1), (0, 1): (1, 1), (0, 2): (2, 1), (0, 3): (3, 1),
        (1, 0): (1, 1), (1, 1): (0, -1), (1, 2): (3, 1), (1, 3): (2, -1),
        (2, 0): (2, 1), (2, 1): (3, -1), (2, 2): (0, -1), (2, 3): (1, 1),
        (3, 0): (3, 1), (3, 1): (2, 1), (3, 2): (1, -1), (3, 3): (0, -1),
    }
    for (i, j), (k, s) in prods.items():
        T[i, j, k] = s
    return T


def _cayley_dickson_table() -> np.ndarray:
    """Structure constants of (a, b)(c, d) = (ac - d*b, da + bc*)."""
    Q = _quat_table()
    qconj = np.array([1.0, -1.0, -1.0, -1.0])

    def qmul(x, y):
        return np.einsum("ijk,i,j->k", Q, x, y)

    T = np.zeros((8, 8, 8))
    eye = np.eye(8)
    for i in range(8):
        for j in range(8):
            a, b = eye[i, :4], eye[i, 4:]
            c, d = eye[j, :4], eye[j, 4:]
            T[i, j, :4] = qmul(a, c) - qmul(qconj * d, b)
            T[i, j, 4:] = qmul(d, a) + qmul(b, qconj * c)
    return T


MULT_TABLE: np.ndarray = _cayley_dickson_table()
MULT_TABLE.setflags(write=False)

# c = (a outer b) @ P with P the table flattened to (64, 8)
_P = MULT_TABLE.reshape(64, 8).astype(complex)

_CONJ_SIGNS = np.array([1.0, -1, -1, -1, -1, -1, -1, -1])


def omul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Octonion product of coefficient arrays of shape (..., 8)."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    outer = a[..., :, None] * b[..., None, :]
    return outer.reshape(a.shape[:-1] + (64,)) @ _P


def oconj(a: np.ndarray) -> np.ndarray:
    """Cayley conjugation (a0, -a1, ..., -a7) on coefficient arrays."""
    return _CONJ_SIGNS * np.asarray(a)


def onorm(a: np.ndarray) -> np.ndarray:
    """Scalar part of a * conj~(a), i.e. the complex bilinear sum of a_i**2."""
    a = np.asarray(a)
    return np.sum(a * a, axis=-1)


def opair(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hermitian pairing (a|b) = 2 sum a_i conj(b_i), array form."""
    return 2.0 * np.sum(np.asarray(a) * np.conj(b), axis=-1)


def basis(i: int) -> "Octonion":
    c = np.zeros(8, dtype=complex)
    c[i] = 1.0
    return Octonion(c)


@dataclass(frozen=True, eq=False)
class Octonion:
    """A complex octonion with coefficients ``coeffs[0..7]``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape[-1:] != (8,):
            raise ValueError(f"octonion needs 8 coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls) -> "Octonion":
        return cls(np.zeros(8, dtype=complex))

    def __add__(self, other: "Octonion") -> "Octonion":
        return Octonion(self.coeffs + other.coeffs)

    def __sub__(self, other: "Octonion") -> "Octonion":
        return Octonion(self.coeffs - other.coeffs)

    def __neg__(self) -> "Octonion":
        return Octonion(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Octonion):
            return Octonion(omul(self.coeffs, other.coeffs))
        return Octonion(self.coeffs * other)

    def __rmul__(self, other):
        return Octonion(other * self.coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, Octonion) and np.array_equal(self.coeffs, other.coeffs)

    def allclose(self, other: "Octonion", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=0, atol=atol))

    def __repr__(self) -> str:
        return f"Octonion({np.array2string(self.coeffs, precision=6)})"


def mul(a: Octonion, b: Octonion) -> Octonion:
    return Octonion(omul(a.coeffs, b.coeffs))


def cayley_conj(a: Octonion) -> Octonion:
    return Octonion(oconj(a.coeffs))


def complex_conj(a: Octonion) -> Octonion:
    return Octonion(np.conj(a.coeffs))


def scalar_product(a: Octonion, b: Octonion) -> complex:
    """Hermitian scalar product (a|b) = a conj~(b) + conj(b) ~a.

    The product is evaluated as an octonion and must come out as a multiple
    of e0; anything else means the multiplication table is broken.
    """
    bb = oconj(np.conj(b.coeffs))
    full = omul(a.coeffs, bb) + omul(np.conj(b.coeffs), oconj(a.coeffs))
    mag = max(np.abs(a.coeffs).max() * np.abs(b.coeffs).max(), 1e-300)
    if np.abs(full[1:]).max() > SCALAR_RTOL * mag:
        raise NonScalarResult(f"non-scalar parts {full[1:]}")
    return complex(full[0])


@dataclass(frozen=True, eq=False)
class H3Matrix:
    """Element of H3(O_C) in the layout

        [[alpha1, a3,     ~a2   ],
         [~a3,    alpha2, a1    ],
         [a2,     ~a1,    alpha3]]

    ``alpha`` has shape (..., 3) and ``off`` has shape (..., 3, 8) holding
    a1, a2, a3.  Leading axes are batch axes.
    """

    alpha: np.ndarray
    off: np.ndarray

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=complex)
        off = np.array(self.off, dtype=complex)
        if alpha.shape[-1:] != (3,) or off.shape[-2:] != (3, 8):
            raise ValueError(f"bad H3Matrix shapes {alpha.shape}, {off.shape}")
        alpha.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "off", off)

    @classmethod
    def from_parts(cls, alpha, a1: Octonion, a2: Octonion, a3: Octonion) -> "H3Matrix":
        return cls(np.asarray(alpha, dtype=complex), np.stack([a1.coeffs, a2.coeffs, a3.coeffs]))

    @classmethod
    def identity(cls) -> "H3Matrix":
        return cls(np.ones(3, dtype=complex), np.zeros((3, 8), dtype=complex))

    def a(self, i: int) -> Octonion:
        """Off-diagonal octonion a_i, 1-based as in the layout."""
        return Octonion(self.off[..., i - 1, :])

    def entries(self) -> list[list[Octonion]]:
        """The assembled 3x3 array of octonion entries."""
        a1, a2, a3 = (self.off[..., i, :] for i in range(3))
        e0 = np.zeros(8, dtype=complex)
        e0[0] = 1.0

        def s(x):
            return Octonion(x * e0)

        return [
            [s(self.alpha[..., 0]), Octonion(a3), Octonion(oconj(a2))],
            [Octonion(oconj(a3)), s(self.alpha[..., 1]), Octonion(a1)],
            [Octonion(a2), Octonion(oconj(a1)), s(self.alpha[..., 2])],
        ]

    def conj(self) -> "H3Matrix":
        """Entrywise complex conjugation."""
        return H3Matrix(np.conj(self.alpha), np.conj(self.off))

    def __add__(self, other: "H3Matrix") -> "H3Matrix":
        return H3Matrix(self.alpha + other.alpha, self.off + other.off)

    def __sub__(self, other: "H3Matrix") -> "H3Matrix":
        return H3Matrix(self.alpha - other.alpha, self.off - other.off)

    def __mul__(self, c) -> "H3Matrix":
        c = np.asarray(c)
        return H3Matrix(self.alpha * c[..., None], self.off * c[..., None, None])

    __rmul__ = __mul__

    def allclose(self, other: "H3Matrix", atol: float = 1e-12) -> bool:
        return bool(
            np.allclose(self.alpha, other.alpha, rtol=0, atol=atol)
            and np.allclose(self.off, other.off, rtol=0, atol=atol)
        )


def _sharp_arrays(alpha: np.ndarray, off: np.ndarray):
    al1, al2, al3 = alpha[..., 0], alpha[..., 1], alpha[..., 2]
    a1, a2, a3 = off[..., 0, :], off[..., 1, :], off[..., 2, :]
    c1, c2, c3 = oconj(a1), oconj(a2), oconj(a3)
    new_alpha = np.stack(
        [al2 * al3 - onorm(a1), al3 * al1 - onorm(a2), al1 * al2 - onorm(a3)], axis=-1
    )
    b1 = omul(c3, c2) - al1[..., None] * a1
    b2 = omul(c1, c3) - al2[..., None] * a2
    b3 = omul(c2, c1) - al3[..., None] * a3
    return new_alpha, np.stack([b1, b2, b3], axis=-2)


def _det_array(alpha: np.ndarray, off: np.ndarray) -> np.ndarray:
    al = alpha
    a1, a2, a3 = off[..., 0, :], off[..., 1, :], off[..., 2, :]
    # a_i ~a_i is a multiple of e0 for every a_i, so only its scalar part is kept
    quad = sum(al[..., i] * onorm(off[..., i, :]) for i in range(3))
    cubic = omul(a1, omul(a2, a3)) + omul(omul(oconj(a3), oconj(a2)), oconj(a1))
    return al[..., 0] * al[..., 1] * al[..., 2] - quad + cubic[..., 0]


def _det_fast(alpha: np.ndarray, off: np.ndarray) -> np.ndarray:
    """Same value as _det_array: (~a3~a2)~a1 is the Cayley conjugate of a1(a2a3),
    so their sum is twice the scalar part of a1(a2a3)."""
    a1 = off[..., 0, :]
    quad = sum(alpha[..., i] * onorm(off[..., i, :]) for i in range(3))
    triple = np.sum(_CONJ_SIGNS * a1 * omul(off[..., 1, :], off[..., 2, :]), axis=-1)
    return alpha[..., 0] * alpha[..., 1] * alpha[..., 2] - quad + 2.0 * triple


def _h3_pair_arrays(alpha, off, beta, boff) -> np.ndarray:
    return np.sum(alpha * np.conj(beta), axis=-1) + np.sum(opair(off, boff), axis=-1)


def h3_adjoint(A: H3Matrix) -> H3Matrix:
    """Freudenthal adjoint A^#, the analogue of the adjugate."""
    return H3Matrix(*_sharp_arrays(A.alpha, A.off))


def h3_det(A: H3Matrix):
    """Cubic norm a1 a2 a3 - sum alpha_i a_i~a_i + a1(a2a3) + (~a3~a2)~a1."""
    d = _det_array(A.alpha, A.off)
    return complex(d) if np.ndim(d) == 0 else d


def h3_scalar_product(A: H3Matrix, B: H3Matrix):
    d = _h3_pair_arrays(A.alpha, A.off, B.alpha, B.off)
    return complex(d) if np.ndim(d) == 0 else d


def embed_m12(z1: Octonion, z2: Octonion) -> H3Matrix:
    """Identify (z1, z2) with [[0, z2, ~z1], [~z2, 0, 0], [z1, 0, 0]]."""
    c1 = np.asarray(z1.coeffs)
    off = np.stack([np.zeros_like(c1), c1, np.asarray(z2.coeffs)], axis=-2)
    return H3Matrix(np.zeros(c1.shape[:-1] + (3,), dtype=complex), off)
