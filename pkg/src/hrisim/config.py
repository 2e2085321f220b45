"""Configuration ingestion and validation.

A configuration is a flat JSON-compatible key/value document. Absent keys
fall back to the default full-scale parameter set; every key can be
overridden. dBm powers are converted to linear milliwatts once at load
time and all internal math stays linear.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .geometry import PathlossModel
from .mmimo import FrameDesign
from .orchestrator import SweepPlan
from .params import SystemParams, dbm_to_mw


class ConfigError(ValueError):
    """Invalid configuration document."""


@dataclass
class SimulationConfig:
    # system
    m_bs: int = 64
    k_ues: int = 16
    n_x: int = 8
    n_z: int = 4
    eta: float = 0.8
    rho_dbm: float = 10.0
    sigma_b_dbm: float = -94.0
    sigma_r_dbm: float = -94.0
    carrier_freq_hz: float = 28e9
    # propagation
    beta_los: float = 2.0
    beta_nlos: float = 4.0
    gamma0: float = 1.0
    d0: float = 1.0
    shadow_std_db: float = 4.0
    p_los_scale: float = 30.0
    # scenario
    area_side: float = 100.0
    bs_height: float = 10.0
    hris_height: float = 5.0
    ue_height: float = 1.5
    # frame: tau_p is always k_ues; tau_c defaults to 2 * L * tau_p
    n_subblocks: int = 128
    tau_c: Optional[int] = None
    c_values: list = field(default_factory=lambda: [0, 16, 64, 128])
    # sweep / detection
    hardware: str = "both"
    trials: int = 50
    target_pfa: float = 1e-3
    seed: int = 42
    # behavior flags
    no_hris: bool = False
    trace_channel: bool = False
    uplink_conjugate: bool = False
    mse_uses_ideal: bool = False
    weighted_reflection: bool = False
    shadow_reflected: bool = False
    # output
    out_dir: str = "results"

    # -------- derived views --------

    @property
    def tau_p(self) -> int:
        return self.k_ues

    @property
    def tau_c_effective(self) -> int:
        return self.tau_c if self.tau_c is not None else 2 * self.n_subblocks * self.tau_p

    @property
    def hardware_list(self) -> list:
        return ["signal", "power"] if self.hardware == "both" else [self.hardware]

    def system_params(self) -> SystemParams:
        return SystemParams(m_bs=self.m_bs, k_ues=self.k_ues, n_x=self.n_x, n_z=self.n_z,
                            eta=self.eta, rho=dbm_to_mw(self.rho_dbm),
                            sigma_b_sq=dbm_to_mw(self.sigma_b_dbm),
                            sigma_hris_sq=dbm_to_mw(self.sigma_r_dbm),
                            carrier_freq=self.carrier_freq_hz)

    def pathloss_model(self) -> PathlossModel:
        return PathlossModel(gamma0=self.gamma0, d0=self.d0, beta_los=self.beta_los,
                             beta_nlos=self.beta_nlos, shadow_std_db=self.shadow_std_db,
                             p_los_scale=self.p_los_scale)

    def frame(self, n_probe_subblocks: int = 0) -> FrameDesign:
        return FrameDesign(tau_c=self.tau_c_effective, tau_p=self.tau_p,
                           n_subblocks=self.n_subblocks,
                           n_probe_subblocks=n_probe_subblocks)

    def sweep_plan(self) -> SweepPlan:
        return SweepPlan(c_values=list(self.c_values), hardware=self.hardware_list,
                         trials=self.trials, base_seed=self.seed)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    # -------- validation --------

    def validate(self) -> "SimulationConfig":
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError("eta must lie in [0,1]")
        if self.m_bs < 1 or self.k_ues < 1 or self.n_x < 1 or self.n_z < 1:
            raise ConfigError("m_bs, k_ues, n_x, n_z must be >= 1")
        if self.n_subblocks < 1:
            raise ConfigError("n_subblocks must be >= 1")
        for c in self.c_values:
            if not 0 <= int(c) <= self.n_subblocks:
                raise ConfigError(f"C={c} outside [0, L={self.n_subblocks}]")
        if self.tau_c_effective < self.n_subblocks * self.tau_p:
            raise ConfigError("tau_c smaller than the channel estimation phase L*tau_p")
        if not 0.0 < self.target_pfa <= 1.0:
            raise ConfigError("target_pfa must lie in (0,1]")
        if self.beta_los > self.beta_nlos:
            raise ConfigError("beta_los must not exceed beta_nlos")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.hardware not in ("signal", "power", "both"):
            raise ConfigError("hardware must be one of signal|power|both")
        if self.area_side <= 0:
            raise ConfigError("area_side must be positive")
        if self.shadow_std_db < 0:
            raise ConfigError("shadow_std_db must be >= 0")
        return self


_FIELD_NAMES = {f.name for f in dataclasses.fields(SimulationConfig)}

# Fast desk-scale preset used by tests and the --desk CLI flag. Noise levels
# are raised from the full-scale values so that detection and estimation
# operate away from their saturation points at this small array size.
DESK_PRESET = {
    "m_bs": 8, "k_ues": 4, "n_x": 4, "n_z": 4,
    "n_subblocks": 16, "tau_c": 128,
    "c_values": [0, 4, 8, 16],
    "trials": 20,
    "sigma_b_dbm": -60.0, "sigma_r_dbm": -30.0,
}


def load_config(path=None, overrides: Optional[dict] = None) -> SimulationConfig:
    """Build a validated configuration from an optional JSON file plus overrides."""
    data: dict = {}
    if path is not None:
        text = Path(path).read_text()
        if text.strip():
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from exc
            if not isinstance(data, dict):
                raise ConfigError("config file must contain a JSON object")
    if overrides:
        data.update(overrides)

    unknown = sorted(set(data) - _FIELD_NAMES)
    if unknown:
        raise ConfigError(f"unknown config keys {unknown}; valid keys: {sorted(_FIELD_NAMES)}")
    return SimulationConfig(**data).validate()
