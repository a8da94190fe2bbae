"""Re-expansion (translation) operators, checked against direct field evaluation
and an independent Wigner-coefficient construction of the overlap integrals."""

import numpy as np
import pytest

from mshoa.basis import (
    num_coeffs,
    regular_basis_matrix,
    singular_basis_matrix,
)
from mshoa.scene import plane_wave_coeffs
from mshoa.translation import (
    DegenerateDisplacementError,
    _coaxial_matrix,
    _gaunt_tensors,
    rotation_blocks,
    rr_translation,
    sr_translation,
)
from tests.conftest import random_unit_vectors


def _random_singular_coeffs(rng, n_src):
    v = rng.normal(size=num_coeffs(n_src)) + 1j * rng.normal(size=num_coeffs(n_src))
    return v


def test_gaunt_tensor_against_wigner_coefficients():
    """The overlap integrals G^m[p,l,n] equal the triple-harmonic integrals
    built from Wigner 3-j symbols: G = (-1)^m sqrt(4 pi/(2p+1))/(2 pi)
    * int Y_p^0 Y_l^m Y_n^{-m} dOmega."""
    from sympy.physics.wigner import gaunt

    n_dst, n_src = 3, 3
    g = _gaunt_tensors(n_dst, n_src)
    for m in range(n_src + 1):
        for p in range(n_dst + n_src + 1):
            for l in range(m, n_dst + 1):
                for n in range(m, n_src + 1):
                    ref = (
                        float(gaunt(p, l, n, 0, m, -m))
                        * np.sqrt(4 * np.pi / (2 * p + 1))
                        * (-1) ** m
                        / (2 * np.pi)
                    )
                    assert g[m][p, l - m, n - m] == pytest.approx(ref, abs=1e-13)


def test_gaunt_selection_rules_exact_zeros():
    g = _gaunt_tensors(6, 5)
    for m in range(6):
        for p in range(12):
            for l in range(m, 7):
                for n in range(m, 6):
                    if p < abs(l - n) or p > l + n or (p + l + n) % 2:
                        assert g[m][p, l - m, n - m] == 0.0


def test_zero_translation_is_identity():
    t = rr_translation([0.0, 0.0, 0.0], 2.0, 4, 4)
    np.testing.assert_array_equal(t.entries, np.eye(num_coeffs(4)))
    rect = rr_translation([0.0, 0.0, 0.0], 2.0, 2, 5)
    assert np.array_equal(rect.entries[:9, :9], np.eye(9))
    assert not rect.entries[9:, :].any()


def test_sr_zero_displacement_rejected():
    with pytest.raises(DegenerateDisplacementError):
        sr_translation([0.0, 0.0, 0.0], 2.0, 3, 3)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        rr_translation([1.0, 0.0, 0.0], -2.0, 3, 3)
    with pytest.raises(ValueError):
        rr_translation([1.0, 0.0, 0.0], 2.0, -1, 3)
    t = rr_translation([0.3, 0.0, 0.1], 2.0, 3, 3)
    with pytest.raises(ValueError):
        t.apply(np.zeros(9))


def test_coaxial_order_symmetry():
    m = _coaxial_matrix("SR", 0.7, 3.0, 5, 5)
    for n in range(1, 6):
        for l in range(1, 6):
            for mm in range(1, min(n, l) + 1):
                a = m[l * l + l + mm, n * n + n + mm]
                b = m[l * l + l - mm, n * n + n - mm]
                assert a == b


def test_rr_preserves_plane_wave_field(rng):
    """A regular expansion of a plane wave, re-expanded about a shifted origin,
    must still reproduce the plane wave near the new origin."""
    k = 5.0
    n_src = n_dst = 24
    for khat, t in zip(random_unit_vectors(rng, 4), rng.normal(size=(4, 3)) * 0.4):
        a = plane_wave_coeffs(khat, k, n_src)
        moved = rr_translation(t, k, n_src, n_dst).apply(a.values)
        pts = t + 0.1 * random_unit_vectors(rng, 12) * rng.uniform(0.2, 1, (12, 1))
        direct = np.exp(1j * k * pts @ khat)
        series = regular_basis_matrix(n_dst, k, pts, t) @ moved
        assert np.max(np.abs(series - direct) / np.abs(direct)) < 1e-10


def test_sr_matches_direct_singular_field(rng):
    """A radiating expansion re-read as a regular expansion about a displaced
    origin reproduces the original field inside the valid sphere."""
    k = 4.0
    n_src, n_dst = 8, 30
    for _ in range(3):
        t = random_unit_vectors(rng, 1)[0] * rng.uniform(0.8, 1.5)
        a = _random_singular_coeffs(rng, n_src)
        local = sr_translation(t, k, n_src, n_dst).apply(a)
        pts = t + 0.2 * np.linalg.norm(t) * random_unit_vectors(rng, 15)
        direct = singular_basis_matrix(n_src, k, pts, np.zeros(3)) @ a
        series = regular_basis_matrix(n_dst, k, pts, t) @ local
        assert np.max(np.abs(series - direct) / np.max(np.abs(direct))) < 1e-10


def test_rr_inverse_on_inner_block(rng):
    k = 3.0
    t = np.array([0.21, -0.33, 0.14])
    n_big, n_small = 22, 6
    fwd = rr_translation(t, k, n_big, n_big).entries
    back = rr_translation(-t, k, n_big, n_big).entries
    prod = back @ fwd
    inner = num_coeffs(n_small)
    assert np.max(np.abs(prod[:inner, :inner] - np.eye(inner))) < 1e-8


def test_rotation_blocks_are_unitary_and_consistent(rng):
    from mshoa.basis import cart_to_sph, sph_harm_matrix

    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    blocks = rotation_blocks(5, q)
    pts = random_unit_vectors(rng, 10)
    _, th, ph = cart_to_sph(pts)
    _, th_r, ph_r = cart_to_sph(pts @ q.T)
    y = sph_harm_matrix(5, th, ph)
    y_rot = sph_harm_matrix(5, th_r, ph_r)
    for n, d in enumerate(blocks):
        assert np.max(np.abs(d.conj().T @ d - np.eye(2 * n + 1))) < 1e-12
        sl = slice(n * n, (n + 1) ** 2)
        np.testing.assert_allclose(y_rot[:, sl], y[:, sl] @ d, atol=1e-12)


def test_translation_metadata():
    t = sr_translation([0.0, 0.4, 0.3], 2.0, 3, 7)
    assert t.kind == "SR"
    assert t.entries.shape == (num_coeffs(7), num_coeffs(3))
    assert t.n_src == 3 and t.n_dst == 7
