"""Reflection-phase configuration: achieved and ideal configs and their gap.

The combination rule correlates the known HRIS-BS direction with the average
of the probed per-UE configurations and is loaded as-is by default. An
optional reciprocity variant loads the elementwise conjugate instead (see
`uplink_config`), which points the reflected beam coherently from the UEs
toward the BS under the +j steering convention; the achieved/ideal gap is
invariant to that flip.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import HrisConfig
from .geometry import ArrayGeometry, array_response


@dataclass(frozen=True)
class ReflectionResult:
    """Outcome of the reflection-phase computation for one trial."""

    achieved: HrisConfig
    ideal: HrisConfig
    bs_csi: HrisConfig
    frobenius_gap: float
    n_detected: int

    @property
    def optimized(self) -> bool:
        """False when no UE was detected and the surface stays specular."""
        return self.n_detected > 0


def bs_alignment_config(geom_hris: ArrayGeometry, bs_position, wavelength: float) -> HrisConfig:
    """HRIS-BS CSI as unit-modulus phases of the HRIS response toward the BS."""
    a_b = array_response(geom_hris, bs_position, wavelength)
    return HrisConfig(phases=np.angle(a_b), gains=np.ones(a_b.shape[0]))


def reflection_config(bs_csi: HrisConfig, detected_csi: Sequence[HrisConfig],
                      weights=None) -> HrisConfig:
    """Combine the HRIS-BS CSI with the average of the detected-UE CSI.

    Elementwise on the diagonals: conj(bs_csi) * mean(detected configs).
    With an empty detected set the HRIS keeps the specular identity
    configuration (unit gains, zero phases); callers flag that event via
    `ReflectionResult.optimized`. Optional `weights` replace the uniform
    1/K' average (experimental, off by default in the pipeline).
    """
    n = bs_csi.n_elements
    if not detected_csi:
        return HrisConfig.identity(n)
    stack = np.stack([c.values for c in detected_csi], axis=0)
    if stack.shape[1] != n:
        raise ValueError("configuration sizes disagree")
    if weights is None:
        combined = stack.mean(axis=0)
    else:
        weights = np.asarray(weights, dtype=float)
        if weights.shape[0] != stack.shape[0]:
            raise ValueError("one weight per detected configuration required")
        combined = weights @ stack
    return HrisConfig.from_values(np.conj(bs_csi.values) * combined)


def ideal_config(bs_csi: HrisConfig, all_ue_csi: Sequence[HrisConfig]) -> HrisConfig:
    """Same combination over the full UE set with true best directions."""
    if not all_ue_csi:
        raise ValueError("all_ue_csi must be non-empty")
    return reflection_config(bs_csi, all_ue_csi)


def uplink_config(config: HrisConfig) -> HrisConfig:
    """Reciprocity variant of a reflection configuration.

    The probe CSI stores phases pointing toward each UE, so conjugating the
    combined configuration steers the reflected uplink beam coherently
    toward the BS. Off by default in the pipeline (`uplink_conjugate`).
    """
    return config.conj()


def config_gap(a: HrisConfig, b: HrisConfig) -> float:
    """Frobenius norm of the difference of the two diagonal configurations."""
    if a.n_elements != b.n_elements:
        raise ValueError("configuration sizes disagree")
    return float(np.linalg.norm(a.values - b.values))
