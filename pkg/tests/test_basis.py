"""Special functions, spherical harmonics, and basis evaluation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.legendre import leggauss
from scipy.special import factorial, lpmv

from mshoa.basis import (
    BasisDomainError,
    IndexError_,
    CoefficientVector,
    basis_gradient_matrix,
    cart_to_sph,
    eval_regular_basis,
    eval_singular_basis,
    norm_legendre_triangle,
    num_coeffs,
    pack_index,
    regular_basis_matrix,
    singular_basis_matrix,
    sph_bessel_deriv,
    sph_bessel_j,
    sph_bessel_y,
    sph_hankel1,
    sph_harm,
    sph_harm_matrix,
    sph_to_cart,
    unpack_index,
)

# Reference values computed with 30-digit arbitrary-precision arithmetic
# (half-integer Bessel functions and the normalized Legendre definition).
J2_AT_1 = 0.0620350520113739
H1_AT_1 = 0.301168678939757 - 1.38177329067604j
Y11_AT_EQUATOR = -0.345494149471335
Y32_SPOT = -0.0840065624845168 + 0.115410152461118j  # Y_3^2(0.4, 1.1)
Y54_SPOT = 0.393428254475203 - 0.139875481080385j  # Y_5^4(2.0, 0.7)


def test_pack_unpack_bijection():
    l = 0
    for n in range(65):
        for m in range(-n, n + 1):
            assert pack_index(n, m) == l
            assert unpack_index(l) == (n, m)
            l += 1
    assert num_coeffs(64) == l


def test_pack_index_rejects_invalid():
    with pytest.raises(IndexError_):
        pack_index(2, 3)
    with pytest.raises(IndexError_):
        pack_index(-1, 0)
    with pytest.raises(IndexError_):
        unpack_index(-1)


def test_bessel_spot_values():
    assert sph_bessel_j(2, 1.0) == pytest.approx(J2_AT_1, rel=1e-12)
    assert sph_hankel1(1, 1.0) == pytest.approx(H1_AT_1, rel=1e-12)
    # j'_1(0) = 1/3 is a removable limit that naive quotient rules miss
    assert sph_bessel_j(1, 0.0, derivative=True) == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_bessel_domain_errors():
    with pytest.raises(BasisDomainError):
        sph_bessel_y(0, 0.0)
    with pytest.raises(BasisDomainError):
        sph_hankel1(2, -1.0)
    with pytest.raises(ValueError):
        sph_bessel_deriv("q", 1, 1.0)


def test_wronskian_identity():
    """j_n(x) y'_n(x) - j'_n(x) y_n(x) = 1/x^2 for all n, x."""
    x = np.concatenate([np.linspace(0.1, 1, 40), np.linspace(1, 100, 200)])
    for n in range(0, 61):
        w = sph_bessel_j(n, x) * sph_bessel_y(n, x, derivative=True) - sph_bessel_j(
            n, x, derivative=True
        ) * sph_bessel_y(n, x)
        assert np.max(np.abs(w * x * x - 1.0)) < 1e-10


def test_harmonic_spot_values():
    assert sph_harm(1, 1, np.pi / 2, 0.0) == pytest.approx(Y11_AT_EQUATOR, rel=1e-12)
    assert sph_harm(3, 2, 0.4, 1.1) == pytest.approx(Y32_SPOT, rel=1e-12)
    assert sph_harm(5, 4, 2.0, 0.7) == pytest.approx(Y54_SPOT, rel=1e-12)
    # Y_0^0 is the constant 1/sqrt(4 pi)
    assert sph_harm(0, 0, 1.2, 3.4) == pytest.approx(1.0 / np.sqrt(4 * np.pi))


def test_harmonic_conjugation_symmetry(rng):
    theta = rng.uniform(0.05, np.pi - 0.05, size=20)
    phi = rng.uniform(0, 2 * np.pi, size=20)
    for n in range(6):
        for m in range(0, n + 1):
            lhs = sph_harm(n, -m, theta, phi)
            rhs = (-1.0) ** m * np.conj(sph_harm(n, m, theta, phi))
            np.testing.assert_allclose(lhs, rhs, atol=1e-14)


def test_harmonic_orthonormality():
    """<Y_n^m, Y_n'^m'> = delta delta under exact product quadrature, n <= 10."""
    n_max = 10
    xg, wg = leggauss(n_max + 1)
    n_phi = 2 * n_max + 1
    phig = np.arange(n_phi) * 2 * np.pi / n_phi
    th, ph = np.meshgrid(np.arccos(xg), phig, indexing="ij")
    w = np.repeat(wg[:, None], n_phi, axis=1).ravel() * (2 * np.pi / n_phi)
    y = sph_harm_matrix(n_max, th.ravel(), ph.ravel())
    gram = (y.conj() * w[:, None]).T @ y
    assert np.max(np.abs(gram - np.eye(num_coeffs(n_max)))) < 1e-10


def test_norm_legendre_matches_factorial_form():
    x = np.linspace(-0.999, 0.999, 31)
    tri = norm_legendre_triangle(12, x)
    for n in range(13):
        for m in range(n + 1):
            norm = np.sqrt(
                (2 * n + 1) / (4 * np.pi) * factorial(n - m) / factorial(n + m)
            )
            ref = norm * lpmv(m, n, x)
            np.testing.assert_allclose(tri[n * (n + 1) // 2 + m], ref, atol=1e-12)


def test_norm_legendre_high_degree_normalization():
    """At n = 80 the recurrence keeps each row unit-norm on [-1, 1]."""
    xg, wg = leggauss(120)
    tri = norm_legendre_triangle(80, xg)
    for m in (0, 1, 40, 80):
        row = tri[80 * 81 // 2 + m]
        assert 2 * np.pi * np.sum(wg * row * row) == pytest.approx(1.0, rel=1e-10)


def test_sph_harm_matrix_agrees_with_scalar(rng):
    theta = rng.uniform(0.05, np.pi - 0.05, size=7)
    phi = rng.uniform(0, 2 * np.pi, size=7)
    mat = sph_harm_matrix(4, theta, phi)
    for n in range(5):
        for m in range(-n, n + 1):
            np.testing.assert_allclose(
                mat[:, pack_index(n, m)], sph_harm(n, m, theta, phi), atol=1e-14
            )


@settings(max_examples=50, deadline=None)
@given(
    r=st.floats(0.1, 10),
    theta=st.floats(1e-3, np.pi - 1e-3),
    phi=st.floats(0, 2 * np.pi - 1e-9),
)
def test_coordinate_roundtrip(r, theta, phi):
    p = sph_to_cart(r, theta, phi)
    r2, t2, p2 = cart_to_sph(p)
    assert r2 == pytest.approx(r, rel=1e-12)
    assert t2 == pytest.approx(theta, abs=1e-9)
    assert np.mod(p2 - phi, 2 * np.pi) == pytest.approx(0.0, abs=1e-6) or np.mod(
        phi - p2, 2 * np.pi
    ) == pytest.approx(0.0, abs=1e-6)


def test_cart_to_sph_axis_convention():
    r, theta, phi = cart_to_sph(np.array([0.0, 0.0, 2.0]))
    assert (r, theta, phi) == (2.0, 0.0, 0.0)
    r, theta, phi = cart_to_sph(np.array([0.0, -1.0, 0.0]))
    assert theta == pytest.approx(np.pi / 2)
    assert phi == pytest.approx(3 * np.pi / 2)


def test_coefficient_vector_validation():
    cv = CoefficientVector.zeros(k=2.0, n_max=3)
    assert cv.values.shape == (16,)
    assert cv.truncate(1).values.shape == (4,)
    with pytest.raises(ValueError):
        cv.truncate(5)
    with pytest.raises(ValueError):
        CoefficientVector(k=2.0, n_max=2, values=np.zeros(5))
    with pytest.raises(ValueError):
        CoefficientVector(k=-1.0, n_max=0, values=np.zeros(1))


def test_basis_matrices_match_scalar_eval(rng):
    k = 3.0
    center = np.array([0.2, -0.1, 0.4])
    pts = center + rng.normal(size=(5, 3))
    reg = regular_basis_matrix(3, k, pts, center)
    sing = singular_basis_matrix(3, k, pts, center)
    for n in range(4):
        for m in range(-n, n + 1):
            for i, p in enumerate(pts):
                assert reg[i, pack_index(n, m)] == pytest.approx(
                    eval_regular_basis(n, m, k, p, center), abs=1e-14
                )
                assert sing[i, pack_index(n, m)] == pytest.approx(
                    eval_singular_basis(n, m, k, p, center), abs=1e-14
                )


def test_regular_basis_at_center():
    assert eval_regular_basis(0, 0, 2.0, [1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == (
        pytest.approx(1.0 / np.sqrt(4 * np.pi))
    )
    assert eval_regular_basis(3, 1, 2.0, [1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0j
    with pytest.raises(BasisDomainError):
        singular_basis_matrix(2, 2.0, np.zeros((1, 3)), [0, 0, 0])


def test_gradient_matches_finite_differences(rng):
    k = 2.5
    pts = rng.normal(size=(4, 3)) + np.array([1.0, 1.0, 0.5])
    h = 1e-6
    for kind, mat in (
        ("regular", regular_basis_matrix),
        ("singular", singular_basis_matrix),
    ):
        grad = basis_gradient_matrix(kind, 4, k, pts, [0.0, 0.0, 0.0])
        for ax in range(3):
            e = np.zeros(3)
            e[ax] = h
            fd = (mat(4, k, pts + e, [0, 0, 0]) - mat(4, k, pts - e, [0, 0, 0])) / (
                2 * h
            )
            np.testing.assert_allclose(grad[:, :, ax], fd, atol=5e-9)


def test_gradient_rejects_degenerate_points():
    with pytest.raises(BasisDomainError):
        basis_gradient_matrix("regular", 2, 1.0, np.array([[0.0, 0.0, 1.0]]), [0, 0, 0])
    with pytest.raises(BasisDomainError):
        basis_gradient_matrix("regular", 2, 1.0, np.zeros((1, 3)), [0, 0, 0])
    with pytest.raises(ValueError):
        basis_gradient_matrix("other", 2, 1.0, np.array([[1.0, 0.0, 0.0]]), [0, 0, 0])
