"""Planar field reconstruction, SDR maps, sweet-spot area, hyperparameter search."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .basis import CoefficientVector, regular_basis_matrix
from .scene import IncidentSource, RsmaSpec, SceneError

SDR_CAP_DB = 150.0
SDR_FLOOR_DB = -300.0
DEFAULT_THRESHOLD_DB = 30.0

_PLANE_AXES = {"xy": (0, 1, 2), "yz": (1, 2, 0), "xz": (0, 2, 1)}


@dataclass(frozen=True)
class GridSpec:
    """Regular pixel grid on a coordinate plane.

    ``center`` is the in-plane window center, ``extent`` its (width, height),
    ``resolution`` the pixel size; ``normal_offset`` places the plane along its
    normal axis.  Pixel (i, j) is centered at lower-left + ((j+0.5), (i+0.5))
    * resolution; values arrays are row-major with shape (rows, cols).
    """

    plane: str = "xy"
    extent: tuple[float, float] = (2.0, 2.0)
    resolution: float = 0.005
    center: tuple[float, float] = (0.0, 0.0)
    normal_offset: float = 0.0

    def __post_init__(self):
        if self.plane not in _PLANE_AXES:
            raise ValueError(f"plane must be one of {sorted(_PLANE_AXES)}, got {self.plane!r}")
        if self.resolution <= 0 or self.extent[0] <= 0 or self.extent[1] <= 0:
            raise ValueError("extent and resolution must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (
            int(round(self.extent[1] / self.resolution)),
            int(round(self.extent[0] / self.resolution)),
        )

    @property
    def pixel_area(self) -> float:
        return self.resolution * self.resolution

    def points(self) -> np.ndarray:
        """Pixel-center coordinates, shape (rows*cols, 3), row-major."""
        rows, cols = self.shape
        u0 = self.center[0] - self.extent[0] / 2.0
        v0 = self.center[1] - self.extent[1] / 2.0
        u = u0 + (np.arange(cols) + 0.5) * self.resolution
        v = v0 + (np.arange(rows) + 0.5) * self.resolution
        uu, vv = np.meshgrid(u, v, indexing="xy")
        ax_u, ax_v, ax_n = _PLANE_AXES[self.plane]
        pts = np.empty((rows * cols, 3))
        pts[:, ax_u] = uu.ravel()
        pts[:, ax_v] = vv.ravel()
        pts[:, ax_n] = self.normal_offset
        return pts


@dataclass
class FieldGrid:
    """Complex pressure samples on a :class:`GridSpec`."""

    spec: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.spec.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.spec.shape}"
            )


@dataclass
class SdrReport:
    """Per-pixel SDR in dB plus the sweet-spot area above the threshold."""

    sdr_map: np.ndarray = field(repr=False)
    ssa: float = 0.0
    threshold: float = DEFAULT_THRESHOLD_DB
    mask: np.ndarray | None = field(default=None, repr=False)  # True = excluded


def reconstruct_field(
    coeffs: CoefficientVector,
    k: float,
    spec: GridSpec,
    center=(0.0, 0.0, 0.0),
    chunk: int = 4096,
) -> FieldGrid:
    """Evaluate the regular-basis series of ``coeffs`` at every pixel center."""
    pts = spec.points()
    out = np.empty(pts.shape[0], dtype=complex)
    for start in range(0, pts.shape[0], chunk):
        block = pts[start : start + chunk]
        out[start : start + chunk] = (
            regular_basis_matrix(coeffs.n_max, k, block, center) @ coeffs.values
        )
    return FieldGrid(spec=spec, values=out.reshape(spec.shape))


def ground_truth_field(source: IncidentSource, k: float, spec: GridSpec) -> FieldGrid:
    """Direct (truncation-free) incident field at every pixel center."""
    values = source.field_at(k, spec.points())
    return FieldGrid(spec=spec, values=values.reshape(spec.shape))


def sphere_mask(spec: GridSpec, spheres: Sequence[RsmaSpec]) -> np.ndarray:
    """Pixels strictly inside any sphere, shape (rows, cols)."""
    pts = spec.points()
    inside = np.zeros(pts.shape[0], dtype=bool)
    for s in spheres:
        inside |= np.linalg.norm(pts - s.center[None, :], axis=1) < s.radius
    return inside.reshape(spec.shape)


def sdr_map(
    estimated: FieldGrid,
    truth: FieldGrid,
    mask: np.ndarray | None = None,
    threshold: float = DEFAULT_THRESHOLD_DB,
) -> SdrReport:
    """Per-pixel 10*log10(|p_true|^2 / |p_est - p_true|^2), capped at +150 dB."""
    if estimated.spec != truth.spec:
        raise ValueError("estimated and ground-truth grids are not congruent")
    if mask is not None and mask.shape != truth.values.shape:
        raise ValueError("mask shape does not match the grid")
    sig = np.abs(truth.values) ** 2
    err = np.abs(estimated.values - truth.values) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        sdr = 10.0 * np.log10(sig / err)
    sdr = np.where(err == 0.0, SDR_CAP_DB, sdr)
    sdr = np.clip(np.nan_to_num(sdr, nan=SDR_FLOOR_DB), SDR_FLOOR_DB, SDR_CAP_DB)
    good = sdr > threshold
    if mask is not None:
        good &= ~mask
    ssa = float(good.sum()) * truth.spec.pixel_area
    return SdrReport(sdr_map=sdr, ssa=ssa, threshold=threshold, mask=mask)


def best_truncation_search(
    sphere: RsmaSpec,
    source: IncidentSource,
    k: float,
    n_range: Iterable[int],
    spec: GridSpec,
    sigma: float = 0.0,
    threshold: float = DEFAULT_THRESHOLD_DB,
    reference_margin: int = 12,
) -> tuple[int, SdrReport]:
    """Pick the encoding truncation with the largest sweet-spot area.

    Simulates the lone sphere: capsule pressures come from a high-degree
    reference expansion of the incident field about the sphere center; each
    candidate truncation is encoded, reconstructed about the sphere center,
    and scored by sweet-spot area.  Ties break toward the smaller truncation.
    """
    from .encode import hoa_encoder
    from .scatter import surface_response_matrix

    n_list = sorted(set(int(n) for n in n_range))
    if not n_list:
        raise ValueError("truncation search range is empty")
    n_ref = max(n_list) + max(reference_margin, int(np.ceil(np.e * k * sphere.radius)))
    a_ref = source.coefficients(k, n_ref, center=sphere.center)
    pressures = surface_response_matrix(sphere, k, n_ref) @ a_ref.values
    truth = ground_truth_field(source, k, spec)
    mask = sphere_mask(spec, [sphere])

    best: tuple[int, SdrReport] | None = None
    for n_c in n_list:
        enc = hoa_encoder(sphere, k, n_c, sigma)
        est = reconstruct_field(enc.apply(pressures), k, spec, center=sphere.center)
        report = sdr_map(est, truth, mask=mask, threshold=threshold)
        if best is None or report.ssa > best[1].ssa:
            best = (n_c, report)
    return best


def regularization_search(
    encoder_builder: Callable[[float], object],
    sigma_grid: Iterable[float],
    evaluate: Callable[[object], SdrReport],
) -> tuple[float, SdrReport]:
    """Pick the regularization with the largest sweet-spot area.

    Ties break toward the larger (more stable) value.
    """
    sigmas = sorted(set(float(s) for s in sigma_grid))
    if not sigmas:
        raise ValueError("regularization grid is empty")
    best: tuple[float, SdrReport] | None = None
    for sigma in sigmas:
        report = evaluate(encoder_builder(sigma))
        if best is None or report.ssa >= best[1].ssa:
            best = (sigma, report)
    return best


def default_sigma_grid(forward_matrix: np.ndarray, points: int = 21) -> np.ndarray:
    """Log-spaced ridge grid, 1e-8 .. 1e2 times the squared spectral norm."""
    scale = np.linalg.norm(forward_matrix, 2) ** 2
    return scale * np.logspace(-8.0, 2.0, points)
