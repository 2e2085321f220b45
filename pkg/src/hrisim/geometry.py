"""3-D positions, array layouts, steering vectors, and pathloss.

Phase-sign convention used everywhere: a steering-vector entry is
exp(+j <k(p, center), pos_n - center>) with k(p, o) = (2*pi/lambda) * (p-o)/|p-o|.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_AXES = {"x": np.array([1.0, 0.0, 0.0]),
         "y": np.array([0.0, 1.0, 0.0]),
         "z": np.array([0.0, 0.0, 1.0])}


# =========================
# Domain types
# =========================


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna array described by its element positions in global coordinates.

    Builders place elements symmetrically so that the mean of
    `element_positions` coincides with `center`.
    """

    center: np.ndarray
    element_positions: np.ndarray  # (N, 3)
    kind: str  # "ULA" or "UPA"
    counts: tuple
    element_spacing: float

    @property
    def n_elements(self) -> int:
        return self.element_positions.shape[0]

    @property
    def offsets(self) -> np.ndarray:
        return self.element_positions - self.center

    @classmethod
    def ula(cls, num: int, center, spacing: float, axis: str = "y") -> "ArrayGeometry":
        """Uniform linear array of `num` elements along a coordinate axis."""
        if num < 1:
            raise ValueError("num must be >= 1")
        center = np.asarray(center, dtype=float)
        direction = _AXES[axis]
        idx = np.arange(num) - (num - 1) / 2.0
        positions = center + np.outer(idx * spacing, direction)
        return cls(center, positions, "ULA", (num,), spacing)

    @classmethod
    def upa(cls, n_x: int, n_z: int, center, spacing: float) -> "ArrayGeometry":
        """Uniform planar array spanning the x-z plane, element n = ix + n_x*iz."""
        if n_x < 1 or n_z < 1:
            raise ValueError("counts must be >= 1")
        center = np.asarray(center, dtype=float)
        ix = np.arange(n_x) - (n_x - 1) / 2.0
        iz = np.arange(n_z) - (n_z - 1) / 2.0
        gx, gz = np.meshgrid(ix, iz, indexing="xy")  # iz varies over rows
        offsets = np.stack([gx.ravel() * spacing,
                            np.zeros(n_x * n_z),
                            gz.ravel() * spacing], axis=1)
        return cls(center, center + offsets, "UPA", (n_x, n_z), spacing)


@dataclass(frozen=True)
class PathlossModel:
    """Distance power law with LoS/NLoS exponents, log-normal shadowing and
    a one-parameter blockage model P(LoS) = exp(-d / p_los_scale).

    `gamma0` is the linear power gain at reference distance `d0`;
    `shadow_std_db` is the dB standard deviation of the shadowing draw.
    """

    gamma0: float = 1.0
    d0: float = 1.0
    beta_los: float = 2.0
    beta_nlos: float = 4.0
    shadow_std_db: float = 0.0
    p_los_scale: float = field(default=30.0)  # meters

    def __post_init__(self) -> None:
        if self.gamma0 <= 0 or self.d0 <= 0:
            raise ValueError("gamma0 and d0 must be positive")
        if self.beta_los > self.beta_nlos:
            raise ValueError("beta_los must not exceed beta_nlos")
        if self.shadow_std_db < 0:
            raise ValueError("shadow_std_db must be >= 0")
        if self.p_los_scale <= 0:
            raise ValueError("p_los_scale must be positive")


# =========================
# Operations
# =========================


def wave_vector(p, origin, wavelength: float) -> np.ndarray:
    """Wave vector (2*pi/lambda) * (p - origin) / |p - origin|."""
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    p = np.asarray(p, dtype=float)
    origin = np.asarray(origin, dtype=float)
    diff = p - origin
    dist = np.linalg.norm(diff)
    if dist == 0.0:
        raise ValueError("p and origin coincide")
    return (2.0 * np.pi / wavelength) * diff / dist


def array_response(geom: ArrayGeometry, p, wavelength: float) -> np.ndarray:
    """Steering vector with entries exp(+j <k(p, center), pos_n - center>)."""
    k = wave_vector(p, geom.center, wavelength)
    return np.exp(1j * (geom.offsets @ k))


def pathloss(model: PathlossModel, p, q, los: bool) -> float:
    """gamma0 * (d0 / |p - q|)^beta, beta picked by the LoS flag."""
    dist = float(np.linalg.norm(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)))
    if dist == 0.0:
        raise ValueError("zero distance between endpoints")
    beta = model.beta_los if los else model.beta_nlos
    return model.gamma0 * (model.d0 / dist) ** beta


def sample_link_state(model: PathlossModel, distance: float, rng: np.random.Generator):
    """Draw (los, shadow_lin) for one link.

    los ~ Bernoulli(exp(-distance / p_los_scale)); shadowing is
    10^(-x/10) with x ~ Normal(0, shadow_std_db^2).
    """
    if distance <= 0:
        raise ValueError("distance must be positive")
    p_los = float(np.exp(-distance / model.p_los_scale))
    los = bool(rng.random() < p_los)
    x_db = model.shadow_std_db * rng.standard_normal()
    shadow_lin = float(10.0 ** (-x_db / 10.0))
    return los, shadow_lin
