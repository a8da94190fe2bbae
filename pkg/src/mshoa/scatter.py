"""Single- and multi-sphere rigid scattering: system assembly, solve, evaluation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .basis import (
    CoefficientVector,
    basis_gradient_matrix,
    degrees_upto,
    num_coeffs,
    regular_basis_matrix,
    singular_basis_matrix,
    sph_bessel_j,
    sph_hankel1,
    sph_harm_matrix,
    cart_to_sph,
)
from .scene import RsmaSpec, SceneConfig, SceneError

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """Dense solve failed or the system is numerically singular."""


@dataclass
class ScatterSolution:
    """Per-sphere local incident (A) and radiating (B) coefficients."""

    incident: list[CoefficientVector]
    radiating: list[CoefficientVector]
    residual: float
    rcond: float


@dataclass
class ForwardOperator:
    """Dense map from incident coefficients to total pressure at all capsules."""

    scene: SceneConfig
    matrix: np.ndarray = field(repr=False)
    include_coupling: bool = True
    rcond: float = np.nan

    def apply(self, coeffs: CoefficientVector) -> np.ndarray:
        if coeffs.n_max != self.scene.n_in:
            raise ValueError(
                f"expected incident truncation {self.scene.n_in}, got {coeffs.n_max}"
            )
        return self.matrix @ coeffs.values


def surface_response_matrix(sphere: RsmaSpec, k: float, n_c: int) -> np.ndarray:
    """Capsule response to incident coefficients about the sphere center.

    Entry (q, l) is i / ((kR)^2 h'_n(kR)) * Y_n^m(capsule direction): the total
    surface pressure on a rigid sphere per unit incident coefficient.
    """
    kr = k * sphere.radius
    if kr <= 0:
        raise ValueError("kR must be positive")
    _, theta, phi = cart_to_sph(sphere.capsule_dirs)
    y = sph_harm_matrix(n_c, theta, phi)
    hp = sph_hankel1(np.arange(n_c + 1), kr, derivative=True)
    gain = 1j / (kr * kr * hp[degrees_upto(n_c)])
    return y * gain[None, :]


def rigid_scatter_gain(k: float, radius: float, n_c: int) -> np.ndarray:
    """Per-mode scattering gain -j'_n(ka)/h'_n(ka), repeated over orders."""
    ka = k * radius
    ratio = -sph_bessel_j(np.arange(n_c + 1), ka, derivative=True) / sph_hankel1(
        np.arange(n_c + 1), ka, derivative=True
    )
    return ratio[degrees_upto(n_c)]


def single_sphere_total_field(
    coeffs: CoefficientVector, radius: float, k: float, points: np.ndarray
) -> np.ndarray:
    """Exact total field around one rigid sphere at the origin.

    p(r) = sum A_n^m [j_n(kr) - h_n(kr) j'_n(kR)/h'_n(kR)] Y_n^m for |r| >= R.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(points, axis=1)
    if np.any(r < radius * (1.0 - 1e-12)):
        raise SceneError("evaluation point inside the sphere")
    reg = regular_basis_matrix(coeffs.n_max, k, points, [0.0, 0.0, 0.0])
    sing = singular_basis_matrix(coeffs.n_max, k, points, [0.0, 0.0, 0.0])
    gain = rigid_scatter_gain(k, radius, coeffs.n_max)
    return reg @ coeffs.values + sing @ (gain * coeffs.values)


def assemble_system_matrix(scene: SceneConfig, include_coupling: bool = True) -> np.ndarray:
    """Block system relating local incident to radiating coefficients, A' = S B'.

    Diagonal blocks are diag(-h'_n(ka_s)/j'_n(ka_s)); the (s, t) off-diagonal
    block is minus the singular-to-regular translation from sphere t to s.
    """
    from .translation import sr_translation

    k = scene.k
    n_fwd = scene.n_fwd
    lf = num_coeffs(n_fwd)
    ns = scene.num_spheres
    out = np.zeros((ns * lf, ns * lf), dtype=complex)
    for s, sph in enumerate(scene.spheres):
        diag = 1.0 / rigid_scatter_gain(k, sph.radius, n_fwd)
        out[s * lf : (s + 1) * lf, s * lf : (s + 1) * lf] = np.diag(diag)
    if include_coupling:
        for s, sph_s in enumerate(scene.spheres):
            for t, sph_t in enumerate(scene.spheres):
                if s == t:
                    continue
                tsr = sr_translation(sph_s.center - sph_t.center, k, n_fwd, n_fwd)
                out[s * lf : (s + 1) * lf, t * lf : (t + 1) * lf] = -tsr.entries
    return out


def _local_incident_matrices(scene: SceneConfig) -> list[np.ndarray]:
    """Per-sphere (L_fwd x L_in) maps from global to truncated local coefficients."""
    from .translation import rr_translation

    k = scene.k
    n_asm = scene.n_rr_assembly if scene.n_rr_assembly is not None else scene.n_in
    lf = num_coeffs(scene.n_fwd)
    mats = []
    for sph in scene.spheres:
        t = rr_translation(sph.center, k, scene.n_in, n_asm)
        mats.append(t.entries[:lf, :])
    return mats


def _factor_system(system: np.ndarray):
    try:
        lu, piv = sla.lu_factor(system)
    except Exception as exc:  # LAPACK failures surface as generic errors
        raise SolverError(f"LU factorization of the system matrix failed: {exc}")
    anorm = np.linalg.norm(system, 1)
    gecon = sla.get_lapack_funcs("gecon", (system,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0 or not np.isfinite(rcond) or rcond == 0.0:
        raise SolverError(f"system matrix is numerically singular (rcond={rcond})")
    log.info("system matrix size %d, rcond estimate %.3e", system.shape[0], rcond)
    return lu, piv, float(rcond)


def forward_solve(
    scene: SceneConfig, a_in: CoefficientVector, include_coupling: bool = True
) -> ScatterSolution:
    """Solve the coupled scattering problem for one incident expansion."""
    if a_in.n_max != scene.n_in:
        raise ValueError(f"incident coefficients must be truncated at {scene.n_in}")
    k = scene.k
    lf = num_coeffs(scene.n_fwd)
    locmats = _local_incident_matrices(scene)
    a_local = np.concatenate([m @ a_in.values for m in locmats])
    system = assemble_system_matrix(scene, include_coupling=include_coupling)
    lu, piv, rcond = _factor_system(system)
    b_all = sla.lu_solve((lu, piv), a_local)
    res = np.linalg.norm(a_local - system @ b_all)
    scale = np.linalg.norm(a_local)
    residual = res / scale if scale > 0 else res
    inc = [
        CoefficientVector(k=k, n_max=scene.n_fwd, values=a_local[s * lf : (s + 1) * lf])
        for s in range(scene.num_spheres)
    ]
    rad = [
        CoefficientVector(k=k, n_max=scene.n_fwd, values=b_all[s * lf : (s + 1) * lf])
        for s in range(scene.num_spheres)
    ]
    return ScatterSolution(incident=inc, radiating=rad, residual=residual, rcond=rcond)


def _check_exterior(scene: SceneConfig, points: np.ndarray):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    for i, s in enumerate(scene.spheres):
        if np.any(np.linalg.norm(points - s.center[None, :], axis=1) < s.radius * (1 - 1e-12)):
            raise SceneError(f"evaluation point inside sphere {i}")
    return points


def eval_total_field(
    scene: SceneConfig,
    solution: ScatterSolution,
    a_in: CoefficientVector,
    points: np.ndarray,
) -> np.ndarray:
    """Total pressure (scattered contributions + incident) at exterior points."""
    points = _check_exterior(scene, points)
    k = scene.k
    out = regular_basis_matrix(a_in.n_max, k, points, [0.0, 0.0, 0.0]) @ a_in.values
    for sph, rad in zip(scene.spheres, solution.radiating):
        out = out + singular_basis_matrix(rad.n_max, k, points, sph.center) @ rad.values
    return out


def eval_radial_derivative(
    scene: SceneConfig,
    solution: ScatterSolution,
    a_in: CoefficientVector,
    sphere_index: int,
    direction: np.ndarray,
) -> complex:
    """Normal derivative of the total field on a sphere surface point.

    Vanishes for a converged solve (rigid boundary condition).
    """
    direction = np.asarray(direction, dtype=float).reshape(3)
    direction = direction / np.linalg.norm(direction)
    sph = scene.spheres[sphere_index]
    point = (sph.center + sph.radius * direction)[None, :]
    k = scene.k
    grad = basis_gradient_matrix("regular", a_in.n_max, k, point, [0.0, 0.0, 0.0])[0]
    total = (a_in.values[:, None] * grad).sum(axis=0)
    for c, rad in zip(scene.spheres, solution.radiating):
        g = basis_gradient_matrix("singular", rad.n_max, k, point, c.center)[0]
        total = total + (rad.values[:, None] * g).sum(axis=0)
    return complex(total @ direction)


def forward_operator(scene: SceneConfig, include_coupling: bool = True) -> ForwardOperator:
    """Assemble the dense capsule-pressure response to every incident basis."""
    k = scene.k
    lf = num_coeffs(scene.n_fwd)
    locmats = _local_incident_matrices(scene)
    a_local_all = np.vstack(locmats)  # (N_S * L_fwd, L_in)
    system = assemble_system_matrix(scene, include_coupling=include_coupling)
    lu, piv, rcond = _factor_system(system)
    b_all = sla.lu_solve((lu, piv), a_local_all)

    caps = scene.capsule_positions()
    sing = np.hstack(
        [
            singular_basis_matrix(scene.n_fwd, k, caps, sph.center)
            for sph in scene.spheres
        ]
    )  # (Q_total, N_S * L_fwd)
    matrix = sing @ b_all

    if scene.incident_eval == "direct":
        matrix = matrix + regular_basis_matrix(scene.n_in, k, caps, [0.0, 0.0, 0.0])
    else:
        row = 0
        for s, sph in enumerate(scene.spheres):
            q = sph.num_capsules
            reg = regular_basis_matrix(
                scene.n_fwd, k, sph.capsule_positions(), sph.center
            )
            matrix[row : row + q, :] += reg @ locmats[s]
            row += q
    return ForwardOperator(scene=scene, matrix=matrix, include_coupling=include_coupling, rcond=rcond)
