"""Geometry and source models: sphere arrays, capsule grids, incident fields."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import (
    CoefficientVector,
    cart_to_sph,
    num_coeffs,
    sph_harm_matrix,
    sph_hankel1,
    degrees_upto,
)

DEFAULT_SOUND_SPEED = 343.0
GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


class SceneError(ValueError):
    """Invalid scene geometry (overlap, bad source placement, ...)."""


def fibonacci_grid(q: int) -> np.ndarray:
    """Spherical Fibonacci lattice of ``q`` unit vectors.

    Point i has z = 1 - (2i+1)/q and azimuth 2*pi*i/phi with phi the golden
    ratio, giving near-uniform coverage for capsule layouts.
    """
    if q < 1:
        raise ValueError(f"need at least one point, got {q}")
    i = np.arange(q)
    z = 1.0 - (2.0 * i + 1.0) / q
    phi = 2.0 * np.pi * i / GOLDEN_RATIO
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)


@dataclass
class RsmaSpec:
    """One rigid spherical microphone array: center, radius, capsule directions."""

    center: np.ndarray
    radius: float
    capsule_dirs: np.ndarray

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float).reshape(3)
        self.capsule_dirs = np.atleast_2d(np.asarray(self.capsule_dirs, dtype=float))
        if self.radius <= 0:
            raise SceneError(f"sphere radius must be positive, got {self.radius}")
        if self.capsule_dirs.shape[0] < 1 or self.capsule_dirs.shape[1] != 3:
            raise SceneError("capsule_dirs must be a (Q, 3) array with Q >= 1")
        norms = np.linalg.norm(self.capsule_dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise SceneError("capsule directions must be unit vectors")
        if self.capsule_dirs.shape[0] > 1:
            d = self.capsule_dirs[:, None, :] - self.capsule_dirs[None, :, :]
            dist = np.linalg.norm(d, axis=-1)
            np.fill_diagonal(dist, np.inf)
            if dist.min() == 0.0:
                raise SceneError("capsule positions must be pairwise distinct")

    @classmethod
    def fibonacci(cls, center, radius: float, q: int) -> "RsmaSpec":
        return cls(center=center, radius=radius, capsule_dirs=fibonacci_grid(q))

    @property
    def num_capsules(self) -> int:
        return self.capsule_dirs.shape[0]

    def capsule_positions(self) -> np.ndarray:
        return self.center[None, :] + self.radius * self.capsule_dirs


@dataclass
class IncidentSource:
    """Plane wave (unit direction) or monopole (position + complex amplitude)."""

    kind: str
    direction: np.ndarray | None = None
    position: np.ndarray | None = None
    amplitude: complex = 1.0 + 0j

    def __post_init__(self):
        if self.kind == "plane_wave":
            if self.direction is None:
                raise SceneError("plane_wave source needs a direction")
            self.direction = np.asarray(self.direction, dtype=float).reshape(3)
            n = np.linalg.norm(self.direction)
            if abs(n - 1.0) > 1e-9:
                if n == 0:
                    raise SceneError("plane_wave direction must be nonzero")
                self.direction = self.direction / n
        elif self.kind == "monopole":
            if self.position is None:
                raise SceneError("monopole source needs a position")
            self.position = np.asarray(self.position, dtype=float).reshape(3)
            if np.linalg.norm(self.position) == 0.0:
                raise SceneError("monopole source cannot sit at the origin")
        else:
            raise SceneError(f"unknown source kind {self.kind!r}")

    def coefficients(self, k: float, n_max: int, center=(0.0, 0.0, 0.0)) -> CoefficientVector:
        """Expansion coefficients of the incident field about ``center``."""
        center = np.asarray(center, dtype=float)
        if self.kind == "plane_wave":
            cv = plane_wave_coeffs(self.direction, k, n_max)
            phase = np.exp(1j * k * float(np.dot(self.direction, center)))
            return CoefficientVector(k=k, n_max=n_max, values=cv.values * phase)
        return monopole_coeffs(self.position - center, self.amplitude, k, n_max)

    def field_at(self, k: float, points: np.ndarray) -> np.ndarray:
        """Direct (series-free) evaluation of the incident field."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "plane_wave":
            return np.exp(1j * k * points @ self.direction)
        d = np.linalg.norm(points - self.position[None, :], axis=1)
        if np.any(d == 0.0):
            raise SceneError("field evaluated at the monopole position")
        return self.amplitude * np.exp(1j * k * d) / (4.0 * np.pi * d)


def plane_wave_coeffs(direction, k: float, n_max: int) -> CoefficientVector:
    """Regular expansion of exp(i k khat . r): A_n^m = 4 pi i^n conj(Y_n^m(khat))."""
    direction = np.asarray(direction, dtype=float).reshape(3)
    direction = direction / np.linalg.norm(direction)
    _, theta, phi = cart_to_sph(direction)
    y = sph_harm_matrix(n_max, [theta], [phi])[0]
    values = 4.0 * np.pi * (1j) ** degrees_upto(n_max) * np.conj(y)
    return CoefficientVector(k=k, n_max=n_max, values=values)


def monopole_coeffs(position, amplitude: complex, k: float, n_max: int) -> CoefficientVector:
    """Regular expansion of amplitude * exp(ikd)/(4 pi d), d = |r - position|.

    Valid for |r| < |position|: A_n^m = amplitude * i k h_n(k|position|)
    conj(Y_n^m(position direction)).
    """
    position = np.asarray(position, dtype=float).reshape(3)
    r0 = np.linalg.norm(position)
    if r0 == 0.0:
        raise SceneError("monopole position cannot coincide with the expansion center")
    _, theta, phi = cart_to_sph(position)
    y = sph_harm_matrix(n_max, [theta], [phi])[0]
    hn = sph_hankel1(np.arange(n_max + 1), k * r0)
    values = amplitude * 1j * k * hn[degrees_upto(n_max)] * np.conj(y)
    return CoefficientVector(k=k, n_max=n_max, values=values)


def layout_linear(count: int, spacing: float, axis: str = "y") -> np.ndarray:
    """Equally spaced centers on one axis, centered on the origin."""
    if count < 1:
        raise SceneError(f"need at least one sphere, got {count}")
    if spacing <= 0 and count > 1:
        raise SceneError("spacing must be positive")
    idx = {"x": 0, "y": 1, "z": 2}
    if axis not in idx:
        raise SceneError(f"axis must be x, y or z, got {axis!r}")
    centers = np.zeros((count, 3))
    centers[:, idx[axis]] = (np.arange(count) - (count - 1) / 2.0) * spacing
    return centers


def layout_cartesian(rows: int, cols: int, spacing: float, plane: str = "xy") -> np.ndarray:
    """rows x cols grid of centers in the given coordinate plane, origin-centered."""
    if rows < 1 or cols < 1:
        raise SceneError("grid needs at least one row and one column")
    axes = {"xy": (0, 1), "yz": (1, 2), "xz": (0, 2)}
    if plane not in axes:
        raise SceneError(f"plane must be xy, yz or xz, got {plane!r}")
    a, bax = axes[plane]
    centers = np.zeros((rows * cols, 3))
    u = (np.arange(cols) - (cols - 1) / 2.0) * spacing
    v = (np.arange(rows) - (rows - 1) / 2.0) * spacing
    uu, vv = np.meshgrid(u, v, indexing="xy")
    centers[:, a] = uu.ravel()
    centers[:, bax] = vv.ravel()
    return centers


def recommended_forward_truncation(k: float, radius: float) -> int:
    """Common rule of thumb floor(e * k * a) for the per-sphere truncation."""
    return int(math.floor(math.e * k * radius))


@dataclass
class SceneConfig:
    """Full capture scene: sphere grid, incident source, frequency, truncations."""

    spheres: list[RsmaSpec]
    source: IncidentSource
    frequency: float
    n_in: int
    n_fwd: int
    sound_speed: float = DEFAULT_SOUND_SPEED
    sigma: float = 0.0
    incident_eval: str = "direct"  # or "translated"
    n_rr_assembly: int | None = None  # R|R assembled at this degree, then truncated

    def __post_init__(self):
        if not self.spheres:
            raise SceneError("scene needs at least one sphere")
        if self.frequency <= 0 or self.sound_speed <= 0:
            raise SceneError("frequency and sound speed must be positive")
        if self.n_fwd < 0 or self.n_in < 0:
            raise SceneError("truncation degrees must be non-negative")
        if self.n_fwd > self.n_in:
            raise SceneError(
                f"forward truncation {self.n_fwd} exceeds incident truncation {self.n_in}"
            )
        if self.sigma < 0:
            raise SceneError("regularization must be non-negative")
        if self.incident_eval not in ("direct", "translated"):
            raise SceneError(f"unknown incident_eval mode {self.incident_eval!r}")
        for i, a in enumerate(self.spheres):
            for j in range(i + 1, len(self.spheres)):
                bb = self.spheres[j]
                if np.linalg.norm(a.center - bb.center) <= a.radius + bb.radius:
                    raise SceneError(f"spheres {i} and {j} overlap")
        if self.source.kind == "monopole":
            for i, s in enumerate(self.spheres):
                if np.linalg.norm(self.source.position - s.center) <= s.radius:
                    raise SceneError(f"monopole source lies inside sphere {i}")

    @property
    def k(self) -> float:
        return 2.0 * np.pi * self.frequency / self.sound_speed

    @property
    def num_spheres(self) -> int:
        return len(self.spheres)

    @property
    def total_capsules(self) -> int:
        return sum(s.num_capsules for s in self.spheres)

    def incident_coeffs(self, n_max: int | None = None) -> CoefficientVector:
        return self.source.coefficients(self.k, self.n_in if n_max is None else n_max)

    def capsule_positions(self) -> np.ndarray:
        return np.vstack([s.capsule_positions() for s in self.spheres])

    def contains_point(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of points strictly inside any sphere."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.zeros(points.shape[0], dtype=bool)
        for s in self.spheres:
            inside |= np.linalg.norm(points - s.center[None, :], axis=1) < s.radius
        return inside
