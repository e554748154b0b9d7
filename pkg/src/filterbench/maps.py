"""Evaluable map specs with analytic Jacobians (and inverses where exact).

The built-ins cover the desk-check batteries: linear maps, shears, rotations
and a handful of fixed nonlinear diffeomorphisms in dimensions 2 and 3.
Vectorized over the leading axis: fn((N, d)) -> (N, d).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InverseResidualTooLarge, NotLipschitz


@dataclass(frozen=True)
class MapSpec:
    name: str
    dim: int
    fn: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]  # at a single point -> (d, d)
    inverse: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.fn(np.asarray(x, dtype=float))

    def check_inverse(self, points: np.ndarray, tol: float = 1e-9) -> None:
        if self.inverse is None:
            raise InverseResidualTooLarge(f"map {self.name} carries no inverse")
        residual = np.max(
            np.linalg.norm(self.fn(self.inverse(points)) - points, axis=-1)
        )
        if residual > tol:
            raise InverseResidualTooLarge(
                f"f(f^-1(x)) deviates by {residual:.3e} for map {self.name}"
            )


def linear_map(a: np.ndarray, name: str | None = None) -> MapSpec:
    a = np.asarray(a, dtype=float)
    inv = np.linalg.inv(a)
    return MapSpec(
        name or f"linear{a.shape[0]}d",
        a.shape[0],
        lambda x: x @ a.T,
        lambda x: a,
        lambda x: x @ inv.T,
    )


def rotation_map(theta: float) -> MapSpec:
    c, s = np.cos(theta), np.sin(theta)
    return linear_map(np.array([[c, -s], [s, c]]), name=f"rotation({theta:g})")


def shear_map(k: float) -> MapSpec:
    return linear_map(np.array([[1.0, k], [0.0, 1.0]]), name=f"shear({k:g})")


def _spec2(name, f, jac, inv=None):
    return MapSpec(name, 2, f, jac, inv)


def _spec3(name, f, jac, inv=None):
    return MapSpec(name, 3, f, jac, inv)


def builtin_nonlinear_maps() -> list[MapSpec]:
    """Fixed nonlinear diffeomorphisms with analytic Jacobians.

    The 2D ones are triangular shears with exact inverses; the 3D ones are
    triangular with unit Jacobian determinant.
    """
    maps = []
    maps.append(_spec2(
        "parabolic_shear",
        lambda p: np.stack([p[..., 0] + p[..., 1] ** 2, p[..., 1]], axis=-1),
        lambda p: np.array([[1.0, 2.0 * p[1]], [0.0, 1.0]]),
        lambda p: np.stack([p[..., 0] - p[..., 1] ** 2, p[..., 1]], axis=-1),
    ))
    maps.append(_spec2(
        "sine_shear",
        lambda p: np.stack([p[..., 0] + np.sin(p[..., 1]), p[..., 1]], axis=-1),
        lambda p: np.array([[1.0, np.cos(p[1])], [0.0, 1.0]]),
        lambda p: np.stack([p[..., 0] - np.sin(p[..., 1]), p[..., 1]], axis=-1),
    ))
    maps.append(_spec2(
        "cubic_shear",
        lambda p: np.stack([p[..., 0] + p[..., 1] ** 3, p[..., 1]], axis=-1),
        lambda p: np.array([[1.0, 3.0 * p[1] ** 2], [0.0, 1.0]]),
        lambda p: np.stack([p[..., 0] - p[..., 1] ** 3, p[..., 1]], axis=-1),
    ))
    maps.append(_spec2(
        "vertical_parabolic_shear",
        lambda p: np.stack([p[..., 0], p[..., 1] + p[..., 0] ** 2], axis=-1),
        lambda p: np.array([[1.0, 0.0], [2.0 * p[0], 1.0]]),
        lambda p: np.stack([p[..., 0], p[..., 1] - p[..., 0] ** 2], axis=-1),
    ))
    maps.append(_spec2(
        "exp_stretch",
        lambda p: np.stack(
            [p[..., 0] * np.exp(0.2 * p[..., 1]), p[..., 1]], axis=-1),
        lambda p: np.array(
            [[np.exp(0.2 * p[1]), 0.2 * p[0] * np.exp(0.2 * p[1])], [0.0, 1.0]]),
        lambda p: np.stack(
            [p[..., 0] * np.exp(-0.2 * p[..., 1]), p[..., 1]], axis=-1),
    ))
    maps.append(_spec2(
        "coupled_sine",
        lambda p: np.stack(
            [p[..., 0] + 0.3 * np.sin(p[..., 1]),
             p[..., 1] + 0.3 * np.sin(p[..., 0])], axis=-1),
        lambda p: np.array(
            [[1.0, 0.3 * np.cos(p[1])], [0.3 * np.cos(p[0]), 1.0]]),
    ))
    maps.append(_spec3(
        "double_parabolic_shear_3d",
        lambda p: np.stack(
            [p[..., 0] + p[..., 1] ** 2, p[..., 1] + p[..., 2] ** 2,
             p[..., 2]], axis=-1),
        lambda p: np.array(
            [[1.0, 2.0 * p[1], 0.0], [0.0, 1.0, 2.0 * p[2]], [0.0, 0.0, 1.0]]),
        lambda p: np.stack(
            [p[..., 0] - (p[..., 1] - p[..., 2] ** 2) ** 2,
             p[..., 1] - p[..., 2] ** 2, p[..., 2]], axis=-1),
    ))
    maps.append(_spec3(
        "sine_ladder_3d",
        lambda p: np.stack(
            [p[..., 0] + np.sin(p[..., 2]), p[..., 1] + np.sin(p[..., 0]),
             p[..., 2]], axis=-1),
        lambda p: np.array(
            [[1.0, 0.0, np.cos(p[2])],
             [np.cos(p[0]), 1.0, 0.0],
             [0.0, 0.0, 1.0]]),
    ))
    maps.append(_spec3(
        "cubic_twist_3d",
        lambda p: np.stack(
            [p[..., 0], p[..., 1] + p[..., 0] ** 3,
             p[..., 2] + p[..., 0] * p[..., 1]], axis=-1),
        lambda p: np.array(
            [[1.0, 0.0, 0.0], [3.0 * p[0] ** 2, 1.0, 0.0], [p[1], p[0], 1.0]]),
    ))
    maps.append(_spec3(
        "mixed_shear_3d",
        lambda p: np.stack(
            [p[..., 0] + 0.5 * p[..., 2] ** 2, p[..., 1] - p[..., 2] ** 3,
             p[..., 2]], axis=-1),
        lambda p: np.array(
            [[1.0, 0.0, p[2]], [0.0, 1.0, -3.0 * p[2] ** 2], [0.0, 0.0, 1.0]]),
        lambda p: np.stack(
            [p[..., 0] - 0.5 * p[..., 2] ** 2, p[..., 1] + p[..., 2] ** 3,
             p[..., 2]], axis=-1),
    ))
    return maps


def estimate_lipschitz(
    spec: MapSpec, region_low, region_high, rng: np.random.Generator,
    samples: int = 2000, cap: float = 1e6,
) -> tuple[float, float]:
    """Sampled difference-quotient bounds (lower, upper) on a box region."""
    low = np.asarray(region_low, float)
    high = np.asarray(region_high, float)
    a = rng.uniform(low, high, size=(samples, spec.dim))
    b = a + rng.normal(scale=1e-3, size=a.shape)
    num = np.linalg.norm(spec(a) - spec(b), axis=-1)
    den = np.linalg.norm(a - b, axis=-1)
    keep = den > 0
    ratios = num[keep] / den[keep]
    upper = float(ratios.max())
    lower = float(ratios.min())
    if upper > cap:
        raise NotLipschitz(f"difference quotients exceed {cap:g}")
    return lower, upper


BUILTIN_MAPS: dict[str, MapSpec] = {m.name: m for m in builtin_nonlinear_maps()}
BUILTIN_MAPS["identity2d"] = linear_map(np.eye(2), name="identity2d")
BUILTIN_MAPS["rotation_quarter"] = rotation_map(np.pi / 4)
BUILTIN_MAPS["shear_half"] = shear_map(0.5)
