"""Translation operators between spherical expansion origins.

A translation matrix T for displacement t (source origin -> destination
origin) re-expands a field so that its value is preserved:

    sum_l' (T a)_l' F_l'(r - c_dst) = sum_l a_l F_l(r - c_src)

with F the regular basis for R|R, and the regular re-expansion of the
singular basis for S|R (valid for |r - c_dst| < |t|).

Assembly goes through the coaxial (z-aligned) case, where only equal orders
couple and the coefficients reduce to finite Gegenbauer-type sums

    T^m_{l,n}(d zhat) = 2 pi i^(l-n) sum_p i^p (2p+1) f_p(kd) G_{p,l,n}^m,

with f = j for R|R and f = h for S|R, and G the overlap integrals of a
Legendre polynomial with two orthonormalized associated Legendre functions.
The G integrals are polynomial and evaluated exactly by Gauss-Legendre
quadrature; they are cached per truncation pair.  General displacements are
handled by conjugating with per-degree spherical-harmonic rotation matrices,
themselves computed by exact quadrature projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import eval_legendre, spherical_jn, spherical_yn

from .basis import (
    cart_to_sph,
    norm_legendre_triangle,
    num_coeffs,
    pack_index,
    sph_harm_matrix,
)


class DegenerateDisplacementError(ValueError):
    """S|R translation with zero displacement has no valid region."""


@dataclass
class TranslationMatrix:
    """Dense re-expansion operator between two spherical expansion origins."""

    kind: str  # "RR" or "SR"
    t: np.ndarray
    k: float
    n_src: int
    n_dst: int
    entries: np.ndarray = field(repr=False)

    def apply(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values)
        if values.shape[0] != num_coeffs(self.n_src):
            raise ValueError(
                f"coefficient length {values.shape[0]} does not match source "
                f"truncation {self.n_src}"
            )
        return self.entries @ values


@lru_cache(maxsize=32)
def _gaunt_tensors(n_dst: int, n_src: int) -> tuple:
    """Overlap integrals G^m[p, l, n] = int_-1^1 P_p Pbar_l^m Pbar_n^m dx.

    Returned as a tuple (indexed by m) of arrays with l in m..n_dst and
    n in m..n_src; p runs over 0..n_dst+n_src.
    """
    p_max = n_dst + n_src
    # integrand degree <= 2*(n_dst+n_src); need >= (deg+1)/2 nodes
    nodes = p_max + 1 + (p_max + 1) % 2
    xg, wg = leggauss(max(nodes, 2))
    pleg = eval_legendre(np.arange(p_max + 1)[:, None], xg[None, :])  # (p, j)
    tri_d = norm_legendre_triangle(n_dst, xg)
    tri_s = tri_d if n_src == n_dst else norm_legendre_triangle(n_src, xg)

    def row(tri, n, m):
        return tri[n * (n + 1) // 2 + m]

    out = []
    for m in range(min(n_dst, n_src) + 1):
        pl = np.stack([row(tri_d, l, m) for l in range(m, n_dst + 1)])  # (L, j)
        pn = np.stack([row(tri_s, n, m) for n in range(m, n_src + 1)])  # (N, j)
        g = np.einsum("pj,lj,nj,j->pln", pleg, pl, pn, wg, optimize=True)
        # selection rules: |l-n| <= p <= l+n with even p+l+n; quadrature
        # roundoff outside that window would otherwise be amplified by h_p
        ps = np.arange(p_max + 1)[:, None, None]
        ls = np.arange(m, n_dst + 1)[None, :, None]
        ns = np.arange(m, n_src + 1)[None, None, :]
        valid = (ps >= np.abs(ls - ns)) & (ps <= ls + ns) & ((ps + ls + ns) % 2 == 0)
        g[~valid] = 0.0
        out.append(g)
    return tuple(out)


def _coaxial_matrix(kind: str, dist: float, k: float, n_src: int, n_dst: int) -> np.ndarray:
    """Translation matrix for displacement ``dist`` along +z."""
    p_max = n_dst + n_src
    ps = np.arange(p_max + 1)
    x = k * dist
    if kind == "RR":
        fp = spherical_jn(ps, x)
    else:
        fp = spherical_jn(ps, x) + 1j * spherical_yn(ps, x)
    weights = 2.0 * np.pi * (1j) ** ps * (2.0 * ps + 1.0) * fp

    gaunt = _gaunt_tensors(n_dst, n_src)
    out = np.zeros((num_coeffs(n_dst), num_coeffs(n_src)), dtype=complex)
    for m in range(min(n_dst, n_src) + 1):
        ls = np.arange(m, n_dst + 1)
        ns = np.arange(m, n_src + 1)
        block = np.einsum("p,pln->ln", weights, gaunt[m], optimize=True)
        block = block * (1j) ** ls[:, None] * (1j) ** (-ns[None, :])
        rows = ls * ls + ls + m
        cols = ns * ns + ns + m
        out[np.ix_(rows, cols)] = block
        if m > 0:
            # coaxial coefficients are identical for +m and -m
            out[np.ix_(ls * ls + ls - m, ns * ns + ns - m)] = block
    return out


def _rotation_to_z(that: np.ndarray) -> np.ndarray:
    """Proper rotation Q with Q @ zhat = that."""
    that = np.asarray(that, dtype=float)
    aux = np.array([0.0, 0.0, 1.0]) if abs(that[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(aux, that)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(that, e1)
    return np.column_stack([e1, e2, that])


@lru_cache(maxsize=64)
def _rotation_blocks_cached(n_max: int, q_key: tuple) -> tuple:
    q = np.array(q_key).reshape(3, 3)
    return tuple(rotation_blocks(n_max, q))


def rotation_blocks(n_max: int, q: np.ndarray) -> list[np.ndarray]:
    """Per-degree rotation matrices D_n for the 3x3 rotation ``q``.

    D_n satisfies Y_n^m(q @ v) = sum_m' D_n[m'+n, m+n] Y_n^m'(v); stacking the
    blocks diagonally rotates a coefficient vector into the frame where a
    field f(r) is re-read as f(q @ u).  Computed by orthonormal projection on
    an exact product quadrature grid.
    """
    xg, wg = leggauss(n_max + 1 + (n_max == 0))
    n_phi = 2 * n_max + 1
    phig = np.arange(n_phi) * 2.0 * np.pi / n_phi
    th = np.arccos(xg)
    TH, PH = np.meshgrid(th, phig, indexing="ij")
    W = (np.repeat(wg[:, None], n_phi, axis=1) * (2.0 * np.pi / n_phi)).ravel()
    pts = np.stack(
        [
            np.sin(TH) * np.cos(PH),
            np.sin(TH) * np.sin(PH),
            np.cos(TH) * np.ones_like(PH),
        ],
        axis=-1,
    ).reshape(-1, 3)
    rot = pts @ np.asarray(q, dtype=float).T
    _, th_r, ph_r = cart_to_sph(rot)
    y_orig = sph_harm_matrix(n_max, TH.ravel(), PH.ravel())
    y_rot = sph_harm_matrix(n_max, th_r, ph_r)
    blocks = []
    for n in range(n_max + 1):
        sl = slice(n * n, (n + 1) ** 2)
        blocks.append((y_orig[:, sl].conj() * W[:, None]).T @ y_rot[:, sl])
    return blocks


def _apply_rotation(blocks, mat: np.ndarray, side: str, adjoint: bool) -> np.ndarray:
    """Multiply by the block-diagonal rotation from the left or right."""
    out = np.empty_like(mat)
    for n, d in enumerate(blocks):
        b = d.conj().T if adjoint else d
        sl = slice(n * n, (n + 1) ** 2)
        if side == "left":
            out[sl, :] = b @ mat[sl, :]
        else:
            out[:, sl] = mat[:, sl] @ b
    return out


def _translation(kind: str, t, k: float, n_src: int, n_dst: int) -> TranslationMatrix:
    t = np.asarray(t, dtype=float).reshape(3)
    if n_src < 0 or n_dst < 0:
        raise ValueError("truncation degrees must be non-negative")
    if k <= 0:
        raise ValueError(f"wavenumber must be positive, got {k}")
    dist = float(np.linalg.norm(t))
    if dist == 0.0:
        if kind == "SR":
            raise DegenerateDisplacementError(
                "S|R translation requires a nonzero displacement"
            )
        entries = np.zeros((num_coeffs(n_dst), num_coeffs(n_src)), dtype=complex)
        ncom = num_coeffs(min(n_src, n_dst))
        entries[:ncom, :ncom] = np.eye(ncom)
        return TranslationMatrix(kind, t, k, n_src, n_dst, entries)

    that = t / dist
    coax = _coaxial_matrix(kind, dist, k, n_src, n_dst)
    if abs(that[2] - 1.0) < 1e-15:
        entries = coax
    else:
        q = _rotation_to_z(that)
        q_key = tuple(np.round(q.ravel(), 15))
        d_src = _rotation_blocks_cached(n_src, q_key)
        d_dst = d_src if n_dst == n_src else _rotation_blocks_cached(n_dst, q_key)
        entries = _apply_rotation(d_src, coax, "right", adjoint=False)
        entries = _apply_rotation(d_dst, entries, "left", adjoint=True)
    return TranslationMatrix(kind, t, k, n_src, n_dst, entries)


def rr_translation(t, k: float, n_src: int, n_dst: int) -> TranslationMatrix:
    """Regular-to-regular re-expansion about an origin displaced by ``t``."""
    return _translation("RR", t, k, n_src, n_dst)


def sr_translation(t, k: float, n_src: int, n_dst: int) -> TranslationMatrix:
    """Singular-to-regular re-expansion, valid for |r - c_dst| < |t|."""
    return _translation("SR", t, k, n_src, n_dst)
