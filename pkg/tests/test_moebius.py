import numpy as np
import pytest
from scipy.linalg import expm

from bsdverify.domains import DomainSpec, OutOfDisc, ShapeMismatch, contains, from_coords, generic_norm, polydisc_embed
from bsdverify.exhaustions import delta, log_psi
from bsdverify.moebius import (
    MatrixMoebius,
    NotOrthogonal,
    PolydiscMoebius,
    SingularDenominator,
    apply_matrix_moebius,
    apply_polydisc_moebius,
    disc_moebius,
    isotropy_iv,
    phase_isotropy,
    random_class_moebius,
    random_matrix_moebius,
    random_orthogonal,
    random_polydisc_moebius,
    transvection,
    unitary_isotropy,
)
from bsdverify.sampling import random_point


def point(spec, rng, g=0.9):
    return from_coords(spec, random_point(spec, rng, g))


class TestMatrixMoebius:
    @pytest.mark.parametrize("p,q", [(1, 1), (2, 2), (2, 3), (3, 1)])
    def test_group_membership(self, p, q):
        for seed in range(20):
            g = random_matrix_moebius(p, q, seed, magnitude=2.0)
            assert g.j_defect() <= 1e-10

    def test_small_magnitude_near_identity(self):
        g = random_matrix_moebius(2, 2, 0, magnitude=1e-12)
        np.testing.assert_allclose(g.as_matrix(), np.eye(4), atol=1e-11)

    def test_bad_magnitude(self):
        with pytest.raises(ValueError):
            random_matrix_moebius(1, 1, 0, magnitude=0)

    def test_disc_translation_closed_form(self):
        t = 0.7
        g = MatrixMoebius.from_matrix(expm(np.array([[0, t], [t, 0]])), 1)
        assert apply_matrix_moebius(g, np.zeros((1, 1)))[0, 0] == pytest.approx(np.tanh(t))

    def test_identity_and_disc_example(self, rng):
        Z = point(DomainSpec.I(2, 3), rng)
        np.testing.assert_allclose(apply_matrix_moebius(MatrixMoebius.identity(2, 3), Z), Z)
        assert apply_matrix_moebius(disc_moebius(0.5), np.zeros((1, 1)))[0, 0] == pytest.approx(-0.5)
        assert apply_matrix_moebius(disc_moebius(0.5), np.array([[0.5]]))[0, 0] == pytest.approx(0)
        with pytest.raises(OutOfDisc):
            disc_moebius(1.0)

    def test_group_law_and_inverse(self, rng):
        spec = DomainSpec.I(2, 3)
        for seed in range(30):
            g1 = random_matrix_moebius(2, 3, seed, 1.5)
            g2 = random_matrix_moebius(2, 3, seed + 100, 1.5)
            Z = point(spec, rng)
            lhs = apply_matrix_moebius(g1, apply_matrix_moebius(g2, Z))
            np.testing.assert_allclose(lhs, apply_matrix_moebius(g1 @ g2, Z), atol=1e-10)
            back = apply_matrix_moebius(g1, apply_matrix_moebius(g1.inverse(), Z))
            np.testing.assert_allclose(back, Z, atol=1e-10)

    def test_membership_preserved(self, rng):
        spec = DomainSpec.I(2, 2)
        for seed in range(500):
            g = random_matrix_moebius(2, 2, seed, 1.5)
            assert contains(spec, apply_matrix_moebius(g, point(spec, rng, 0.95)))

    def test_singular_denominator(self):
        Z0 = np.array([[0.3, 0.1], [0.0, 0.2]])
        g = MatrixMoebius(np.eye(2), np.zeros((2, 2)), np.eye(2), -Z0)
        with pytest.raises(SingularDenominator):
            apply_matrix_moebius(g, Z0)

    def test_shape_check(self):
        with pytest.raises(ShapeMismatch):
            apply_matrix_moebius(MatrixMoebius.identity(2, 2), np.zeros((2, 3)))

    def test_transvection(self, rng):
        A = point(DomainSpec.I(2, 3), rng, 0.8)
        g = transvection(A)
        assert g.j_defect() <= 1e-10
        np.testing.assert_allclose(apply_matrix_moebius(g, A), 0, atol=1e-12)

    def test_unitary_isotropy(self, rng):
        U, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        V, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
        g = unitary_isotropy(U, V)
        Z = point(DomainSpec.I(2, 3), rng)
        np.testing.assert_allclose(apply_matrix_moebius(g, Z), U @ Z @ V, atol=1e-13)
        assert g.j_defect() <= 1e-12

    def test_json_round_trip(self):
        g = random_matrix_moebius(2, 3, 4)
        h = MatrixMoebius.from_json(g.to_json())
        np.testing.assert_array_equal(h.as_matrix(), g.as_matrix())

    @pytest.mark.parametrize("tok", ["II:4", "II:5", "III:2", "III:3"])
    def test_class_preserving(self, tok, rng):
        spec = DomainSpec.from_token(tok)
        sign = -1 if spec.kind.value == "II" else 1
        for seed in range(50):
            g = random_class_moebius(spec, seed)
            assert g.j_defect() <= 1e-10
            Z = point(spec, rng)
            W = apply_matrix_moebius(g, Z)
            assert np.abs(W - sign * W.T).max() <= 1e-12
            assert contains(spec, 0.5 * (W + sign * W.T))

    def test_class_moebius_rejects_exceptional(self):
        with pytest.raises(ValueError):
            random_class_moebius(DomainSpec.V(), 0)


class TestPolydisc:
    def test_examples(self):
        spec = DomainSpec.IV(3)
        ident = PolydiscMoebius([0, 0], [0, 0])
        np.testing.assert_allclose(apply_polydisc_moebius(spec, ident, [0.3, -0.2j]), [0.3, -0.2j])
        m = PolydiscMoebius([0.5, 0.5], [0, 0])
        np.testing.assert_allclose(apply_polydisc_moebius(spec, m, [0.5, 0.5]), 0, atol=1e-15)

    def test_errors(self):
        spec = DomainSpec.IV(3)
        with pytest.raises(OutOfDisc):
            PolydiscMoebius([1.0, 0], [0, 0])
        with pytest.raises(OutOfDisc):
            apply_polydisc_moebius(spec, PolydiscMoebius([0, 0], [0, 0]), [1.0, 0])
        with pytest.raises(ShapeMismatch):
            apply_polydisc_moebius(spec, PolydiscMoebius([0], [0]), [0.1, 0])
        with pytest.raises(ValueError):
            PolydiscMoebius([0, 0], [0])

    def test_json_round_trip(self):
        m = random_polydisc_moebius(3, 1)
        k = PolydiscMoebius.from_json(m.to_json())
        np.testing.assert_array_equal(k.a, m.a)
        np.testing.assert_array_equal(k.phi, m.phi)

    @pytest.mark.parametrize("tok", ["I:2,3", "II:4", "III:2", "IV:3", "IV:5", "V", "VI"])
    def test_slice_invariance(self, tok, rng):
        spec = DomainSpec.from_token(tok)
        for seed in range(100):
            m = random_polydisc_moebius(spec.rank, seed)
            zeta = rng.uniform(0, 0.9, spec.rank) * np.exp(2j * np.pi * rng.random(spec.rank))
            eta = rng.uniform(0, 0.9, spec.rank) * np.exp(2j * np.pi * rng.random(spec.rank))
            a = delta(spec, polydisc_embed(spec, zeta), polydisc_embed(spec, eta))
            b = delta(spec, polydisc_embed(spec, apply_polydisc_moebius(spec, m, zeta)),
                      polydisc_embed(spec, apply_polydisc_moebius(spec, m, eta)))
            assert b == pytest.approx(a, rel=1e-10)


class TestIsotropy:
    def test_identity(self, rng):
        z = rng.normal(size=4) + 1j * rng.normal(size=4)
        np.testing.assert_array_equal(isotropy_iv(0.0, np.eye(4), z), z)

    def test_preserves_norm_and_delta(self, rng):
        spec = DomainSpec.IV(4)
        for seed in range(100):
            O = random_orthogonal(4, seed)
            th = rng.uniform(0, 2 * np.pi)
            z, w = point(spec, rng), point(spec, rng)
            gz, gw = isotropy_iv(th, O, z), isotropy_iv(th, O, w)
            assert generic_norm(spec, gz) == pytest.approx(generic_norm(spec, z), abs=1e-12)
            assert delta(spec, gz, gw) == pytest.approx(delta(spec, z, w), abs=1e-12)

    def test_not_orthogonal(self):
        with pytest.raises(NotOrthogonal):
            isotropy_iv(0.0, 2 * np.eye(2), np.zeros(2))
        with pytest.raises(NotOrthogonal):
            isotropy_iv(0.0, 1j * np.eye(2), np.zeros(2))

    @pytest.mark.parametrize("tok", ["I:2,2", "II:4", "III:3", "IV:3", "V", "VI"])
    def test_phase_isotropy(self, tok, rng):
        spec = DomainSpec.from_token(tok)
        for _ in range(20):
            th = rng.uniform(0, 2 * np.pi)
            z, w = point(spec, rng), point(spec, rng)
            a = log_psi(spec, z, w)
            b = log_psi(spec, phase_isotropy(spec, th, z), phase_isotropy(spec, th, w))
            assert abs(b - a) <= 1e-10 * (1 + abs(a))
