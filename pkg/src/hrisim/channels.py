"""Direct, HRIS-UE, BS-HRIS, reflected, and equivalent channels.

Complex Gaussian convention: CN(0, s2) has independent real/imaginary parts
with variance s2/2 each, so E|x|^2 = s2. Noise is drawn this way everywhere
except the power-detector chain (see hrisim.probe).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ArrayGeometry, PathlossModel, array_response, pathloss, sample_link_state
from .params import SystemParams


def complex_normal(rng: np.random.Generator, shape, var: float) -> np.ndarray:
    """Draw CN(0, var) samples, real/imag parts N(0, var/2) each."""
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass(frozen=True)
class HrisConfig:
    """Diagonal HRIS configuration: element n multiplies by gains[n]*exp(j*phases[n])."""

    phases: np.ndarray
    gains: np.ndarray

    def __post_init__(self) -> None:
        if self.phases.shape != self.gains.shape:
            raise ValueError("phases and gains must have equal shape")

    @property
    def n_elements(self) -> int:
        return self.phases.shape[0]

    @property
    def values(self) -> np.ndarray:
        """Diagonal entries gains * exp(j * phases)."""
        return self.gains * np.exp(1j * self.phases)

    def conj(self) -> "HrisConfig":
        return HrisConfig(phases=-self.phases, gains=self.gains.copy())

    @classmethod
    def identity(cls, n: int) -> "HrisConfig":
        """Specular configuration: unit gains, zero phase shifts."""
        return cls(phases=np.zeros(n), gains=np.ones(n))

    @classmethod
    def from_values(cls, values) -> "HrisConfig":
        values = np.asarray(values, dtype=complex)
        return cls(phases=np.angle(values), gains=np.abs(values))


@dataclass(frozen=True)
class ChannelSet:
    """All channels of one realized scenario (rows indexed by UE).

    h_direct[k] includes pathloss, shadowing, and the BS steering vector;
    r_hris_ue[k] is the HRIS-UE channel; g_bs_hris is the rank-one BS-HRIS
    channel. Immutable after construction.
    """

    h_direct: np.ndarray      # (K, M)
    r_hris_ue: np.ndarray     # (K, N)
    g_bs_hris: np.ndarray     # (M, N)
    eta: float
    shadow: np.ndarray        # (K,)
    los_flags: np.ndarray     # (K,) bool

    @property
    def n_ues(self) -> int:
        return self.h_direct.shape[0]


def build_channels(scenario, params: SystemParams, geom_bs: ArrayGeometry,
                   geom_hris: ArrayGeometry, plmodel: PathlossModel,
                   rng: np.random.Generator, shadow_reflected: bool = False) -> ChannelSet:
    """Realize all channels for one scenario.

    Only the direct BS-UE link draws a blockage state and shadowing; the
    BS-HRIS and HRIS-UE links are treated as LoS with pure pathloss.
    `shadow_reflected=True` additionally applies the per-UE shadowing draw
    to the HRIS-UE link (off by default).
    """
    lam = params.wavelength
    bs, hris = scenario.bs_position, scenario.hris_position
    ues = np.atleast_2d(scenario.ue_positions)
    k_ues = ues.shape[0] if ues.size else 0

    h_direct = np.zeros((k_ues, geom_bs.n_elements), dtype=complex)
    r_hris_ue = np.zeros((k_ues, geom_hris.n_elements), dtype=complex)
    shadow = np.ones(k_ues)
    los_flags = np.zeros(k_ues, dtype=bool)

    for k in range(k_ues):
        u = ues[k]
        dist_direct = float(np.linalg.norm(bs - u))
        los, xi = sample_link_state(plmodel, dist_direct, rng)
        los_flags[k], shadow[k] = los, xi
        h_direct[k] = np.sqrt(xi * pathloss(plmodel, bs, u, los)) * array_response(geom_bs, u, lam)
        r_gain = pathloss(plmodel, u, hris, True) * (xi if shadow_reflected else 1.0)
        r_hris_ue[k] = np.sqrt(r_gain) * array_response(geom_hris, u, lam)

    g = np.sqrt(pathloss(plmodel, bs, hris, True)) * np.outer(
        array_response(geom_bs, hris, lam),
        np.conj(array_response(geom_hris, bs, lam)))

    return ChannelSet(h_direct=h_direct, r_hris_ue=r_hris_ue, g_bs_hris=g,
                      eta=params.eta, shadow=shadow, los_flags=los_flags)


def reflected_channel(cs: ChannelSet, theta: HrisConfig, k: int) -> np.ndarray:
    """Reflected-path channel sqrt(eta) * G * diag(theta) * r_k."""
    return np.sqrt(cs.eta) * (cs.g_bs_hris @ (theta.values * cs.r_hris_ue[k]))


def equivalent_channel(cs: ChannelSet, theta: HrisConfig, k: int) -> np.ndarray:
    """Equivalent BS-UE channel: reflected path plus direct path."""
    return reflected_channel(cs, theta, k) + cs.h_direct[k]


def equivalent_channels_all(cs: ChannelSet, theta: HrisConfig) -> np.ndarray:
    """Equivalent channels for all UEs, shape (K, M)."""
    reflected = np.sqrt(cs.eta) * (theta.values * cs.r_hris_ue) @ cs.g_bs_hris.T
    return reflected + cs.h_direct


def dump_channels_csv(cs: ChannelSet, path) -> None:
    """Serialize the channel set as CSV rows (link, index, re, im)."""
    links = [("h_direct", cs.h_direct), ("r_hris_ue", cs.r_hris_ue), ("G_bs_hris", cs.g_bs_hris)]
    with open(path, "w", newline="") as f:
        f.write("link,index,re,im\n")
        for name, arr in links:
            flat = arr.ravel()
            for i, v in enumerate(flat):
                f.write(f"{name},{i},{float(v.real)!r},{float(v.imag)!r}\n")


def load_channels_csv(path, shapes: dict, eta: float) -> ChannelSet:
    """Rebuild a ChannelSet from a dump produced by `dump_channels_csv`.

    `shapes` maps link name to array shape. Shadowing and LoS flags are not
    part of the dump; they are restored as neutral values.
    """
    data = {name: np.zeros(int(np.prod(shape)), dtype=complex) for name, shape in shapes.items()}
    with open(path) as f:
        next(f)
        for line in f:
            name, idx, re, im = line.rstrip("\n").split(",")
            data[name][int(idx)] = float(re) + 1j * float(im)
    k = shapes["h_direct"][0]
    return ChannelSet(h_direct=data["h_direct"].reshape(shapes["h_direct"]),
                      r_hris_ue=data["r_hris_ue"].reshape(shapes["r_hris_ue"]),
                      g_bs_hris=data["G_bs_hris"].reshape(shapes["G_bs_hris"]),
                      eta=eta, shadow=np.ones(k), los_flags=np.ones(k, dtype=bool))
