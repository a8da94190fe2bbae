"""Experiment configuration: YAML schema, validation, canonical hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import yaml

from .fields import DEFAULT_THRESHOLD_DB, GridSpec
from .scene import (
    DEFAULT_SOUND_SPEED,
    IncidentSource,
    RsmaSpec,
    SceneConfig,
    SceneError,
    layout_cartesian,
    layout_linear,
    recommended_forward_truncation,
)

METHODS = ("HOA", "Single", "MSHOA")


class ConfigError(ValueError):
    """Unparseable or semantically invalid experiment configuration."""


@dataclass
class SigmaSearch:
    points: int = 21
    min_factor: float = 1e-8
    max_factor: float = 1e2


@dataclass
class HoaSettings:
    sphere_index: int | None = None
    n_c: int | None = None
    n_c_min: int = 1
    n_c_max: int = 14


@dataclass
class ExperimentConfig:
    scene: SceneConfig
    method: str
    grid: GridSpec
    threshold_db: float = DEFAULT_THRESHOLD_DB
    sigma: float | None = None
    sigma_search: SigmaSearch | None = None
    hoa: HoaSettings = field(default_factory=HoaSettings)
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def config_hash(self) -> str:
        return hash_config(self.raw)


def _require(mapping: dict, key: str, context: str) -> Any:
    if key not in mapping:
        raise ConfigError(f"missing required field '{key}' in {context}")
    return mapping[key]


def _vector3(value, context: str) -> np.ndarray:
    try:
        v = np.asarray(value, dtype=float).reshape(3)
    except Exception:
        raise ConfigError(f"{context} must be a 3-vector, got {value!r}")
    return v


def _parse_source(raw: dict) -> IncidentSource:
    kind = _require(raw, "kind", "scene.source")
    try:
        if kind == "plane_wave":
            return IncidentSource(kind=kind, direction=_vector3(_require(raw, "direction", "scene.source"), "source.direction"))
        if kind == "monopole":
            amp = raw.get("amplitude", 1.0)
            if isinstance(amp, (list, tuple)):
                amp = complex(amp[0], amp[1])
            return IncidentSource(
                kind=kind,
                position=_vector3(_require(raw, "position", "scene.source"), "source.position"),
                amplitude=complex(amp),
            )
    except SceneError as exc:
        raise ConfigError(f"invalid source: {exc}")
    raise ConfigError(f"unknown source kind {kind!r} (expected plane_wave or monopole)")


def _parse_spheres(raw: dict) -> list[RsmaSpec]:
    if "spheres" in raw and "layout" in raw:
        raise ConfigError("scene must use either 'spheres' or 'layout', not both")
    try:
        if "spheres" in raw:
            specs = []
            for i, entry in enumerate(raw["spheres"]):
                specs.append(
                    RsmaSpec.fibonacci(
                        center=_vector3(_require(entry, "center", f"spheres[{i}]"), "center"),
                        radius=float(_require(entry, "radius", f"spheres[{i}]")),
                        q=int(_require(entry, "capsules", f"spheres[{i}]")),
                    )
                )
            return specs
        layout = _require(raw, "layout", "scene")
        radius = float(_require(raw, "radius", "scene"))
        capsules = int(_require(raw, "capsules", "scene"))
        ltype = _require(layout, "type", "scene.layout")
        if ltype == "linear":
            spacing = float(_require(layout, "spacing", "scene.layout"))
            centers = layout_linear(
                int(_require(layout, "count", "scene.layout")), spacing, layout.get("axis", "y")
            )
        elif ltype == "cartesian":
            spacing = float(_require(layout, "spacing", "scene.layout"))
            centers = layout_cartesian(
                int(_require(layout, "rows", "scene.layout")),
                int(_require(layout, "cols", "scene.layout")),
                spacing,
                layout.get("plane", "xy"),
            )
        else:
            raise ConfigError(f"unknown layout type {ltype!r}")
        if len(centers) > 1 and spacing <= 2 * radius:
            raise ConfigError(
                f"layout spacing {spacing} must exceed the sphere diameter {2 * radius}"
            )
        return [RsmaSpec.fibonacci(c, radius, capsules) for c in centers]
    except SceneError as exc:
        raise ConfigError(f"invalid sphere geometry: {exc}")


def parse_config(raw: dict) -> ExperimentConfig:
    """Build a validated :class:`ExperimentConfig` from a parsed mapping."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a mapping")
    scene_raw = _require(raw, "scene", "configuration")
    spheres = _parse_spheres(scene_raw)
    source = _parse_source(_require(scene_raw, "source", "scene"))
    frequency = float(_require(scene_raw, "frequency", "scene"))
    sound_speed = float(scene_raw.get("sound_speed", DEFAULT_SOUND_SPEED))
    n_in = int(_require(scene_raw, "n_in", "scene"))
    if "n_fwd" in scene_raw:
        n_fwd = int(scene_raw["n_fwd"])
    else:
        k = 2.0 * np.pi * frequency / sound_speed
        n_fwd = min(n_in, recommended_forward_truncation(k, max(s.radius for s in spheres)))
    try:
        scene = SceneConfig(
            spheres=spheres,
            source=source,
            frequency=frequency,
            sound_speed=sound_speed,
            n_in=n_in,
            n_fwd=n_fwd,
            incident_eval=scene_raw.get("incident_eval", "direct"),
            n_rr_assembly=scene_raw.get("n_rr_assembly"),
        )
    except SceneError as exc:
        raise ConfigError(f"invalid scene: {exc}")

    method = raw.get("method", "MSHOA")
    if method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}, got {method!r}")

    grid_raw = raw.get("grid", {})
    try:
        grid = GridSpec(
            plane=grid_raw.get("plane", "xy"),
            extent=tuple(grid_raw.get("extent", (2.0, 2.0))),
            resolution=float(grid_raw.get("resolution", 0.005)),
            center=tuple(grid_raw.get("center", (0.0, 0.0))),
            normal_offset=float(grid_raw.get("normal_offset", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid evaluation grid: {exc}")

    sigma = raw.get("sigma")
    search_raw = raw.get("sigma_search")
    sigma_search = None
    if search_raw is not None:
        if sigma is not None:
            raise ConfigError("specify either 'sigma' or 'sigma_search', not both")
        sigma_search = SigmaSearch(
            points=int(search_raw.get("points", 21)),
            min_factor=float(search_raw.get("min_factor", 1e-8)),
            max_factor=float(search_raw.get("max_factor", 1e2)),
        )
        if sigma_search.points < 1:
            raise ConfigError("sigma_search.points must be at least 1")
    if sigma is not None and float(sigma) < 0:
        raise ConfigError("sigma must be non-negative")

    hoa_raw = raw.get("hoa", {})
    hoa = HoaSettings(
        sphere_index=hoa_raw.get("sphere_index"),
        n_c=hoa_raw.get("n_c"),
        n_c_min=int(hoa_raw.get("n_c_min", 1)),
        n_c_max=int(hoa_raw.get("n_c_max", 14)),
    )
    if hoa.sphere_index is not None and not 0 <= hoa.sphere_index < len(spheres):
        raise ConfigError(f"hoa.sphere_index {hoa.sphere_index} out of range")
    if method == "HOA" and sigma is None and sigma_search is None:
        sigma = 0.0  # the single-sphere baseline is conventionally unregularized
    if method in ("Single", "MSHOA") and sigma is None and sigma_search is None:
        sigma_search = SigmaSearch()

    return ExperimentConfig(
        scene=scene,
        method=method,
        grid=grid,
        threshold_db=float(raw.get("threshold_db", DEFAULT_THRESHOLD_DB)),
        sigma=None if sigma is None else float(sigma),
        sigma_search=sigma_search,
        hoa=hoa,
        raw=raw,
    )


def validate_config(text: str) -> ExperimentConfig:
    """Parse and validate YAML configuration text."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse configuration: {exc}")
    return parse_config(raw)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        text = fh.read()
    return validate_config(text)


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, float) and obj.is_integer():
        return int(obj)
    return obj


def hash_config(raw: dict) -> str:
    """Deterministic hash of the experiment definition (output paths excluded)."""
    payload = {k: v for k, v in raw.items() if k not in ("output", "threads")}
    text = json.dumps(_canonical(payload), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]
