"""Physical and protocol constants shared by all pipeline stages."""

from __future__ import annotations

from dataclasses import dataclass

SPEED_OF_LIGHT = 299_792_458.0  # m/s


def dbm_to_mw(value_dbm: float) -> float:
    """Convert a power in dBm to linear milliwatts."""
    return 10.0 ** (value_dbm / 10.0)


@dataclass(frozen=True)
class SystemParams:
    """Scalar system constants. All powers are linear milliwatts.

    Attributes
    ----------
    m_bs : number of BS antennas (ULA).
    k_ues : number of active single-antenna UEs; also the pilot length.
    n_x, n_z : HRIS element counts along the x- and z-axis (UPA).
    eta : fraction of impinging power the HRIS reflects; 1 - eta is absorbed
        and feeds the sensing chain.
    rho : UL transmit power per UE, mW.
    sigma_b_sq : BS receiver noise power, mW.
    sigma_hris_sq : HRIS receiver noise power, mW.
    carrier_freq : carrier frequency, Hz.
    """

    m_bs: int
    k_ues: int
    n_x: int
    n_z: int
    eta: float
    rho: float
    sigma_b_sq: float
    sigma_hris_sq: float
    carrier_freq: float

    def __post_init__(self) -> None:
        if self.m_bs < 1 or self.k_ues < 0 or self.n_x < 1 or self.n_z < 1:
            raise ValueError("array and user counts must be positive")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0,1]")
        if self.rho < 0 or self.sigma_b_sq < 0 or self.sigma_hris_sq < 0:
            raise ValueError("powers must be non-negative")
        if self.carrier_freq <= 0:
            raise ValueError("carrier_freq must be positive")

    @property
    def n_hris(self) -> int:
        return self.n_x * self.n_z

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq
