"""BS-side pipeline: pilot blocks under HRIS interference, LS channel
estimation, analytic MSE, MRC SINR/SE, and the use-and-then-forget bound.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .channels import ChannelSet, HrisConfig, complex_normal, equivalent_channels_all
from .params import SystemParams


# =========================
# Frame and pilots
# =========================


@dataclass(frozen=True)
class FrameDesign:
    """Coherence-block accounting.

    The channel-estimation phase holds `n_subblocks` (L) repetitions of the
    tau_p-sample pilot set; the HRIS probes during the first
    `n_probe_subblocks` (C) of them. All payload samples are uplink.
    """

    tau_c: int
    tau_p: int
    n_subblocks: int        # L
    n_probe_subblocks: int  # C

    def __post_init__(self) -> None:
        if self.tau_p < 1 or self.n_subblocks < 1:
            raise ValueError("tau_p and n_subblocks must be >= 1")
        if not 0 <= self.n_probe_subblocks <= self.n_subblocks:
            raise ValueError("n_probe_subblocks must lie in [0, n_subblocks]")
        if self.tau_chest > self.tau_c:
            raise ValueError("channel estimation phase exceeds the coherence block")

    @property
    def tau_chest(self) -> int:
        return self.n_subblocks * self.tau_p

    @property
    def tau_prob(self) -> int:
        return self.n_probe_subblocks * self.tau_p

    @property
    def tau_refl(self) -> int:
        return self.tau_c - self.tau_prob

    @property
    def tau_u(self) -> int:
        return self.tau_c - self.tau_chest


@dataclass(frozen=True)
class PilotCodebook:
    """Canonical orthogonal pilot set: sqrt(tau_p) times the identity."""

    tau_p: int

    @property
    def matrix(self) -> np.ndarray:
        """Row t is the pilot sequence of UE t, shape (tau_p, tau_p)."""
        return np.sqrt(self.tau_p) * np.eye(self.tau_p)


# =========================
# Results containers
# =========================


@dataclass
class EstimationResult:
    """LS channel estimates plus, once ground truth is attached, the
    averaged equivalent channel and per-UE error metrics."""

    h_hat: np.ndarray               # (K, M)
    est_var: float                  # total estimate variance M/(L*K) * sigma_b^2/rho
    est_var_per_entry: float        # sigma_b^2 / (L*K*rho)
    h_bar: Optional[np.ndarray] = None
    mse_analytic: Optional[np.ndarray] = None
    mse_empirical: Optional[np.ndarray] = None
    nmse: Optional[np.ndarray] = None


@dataclass
class CommMetrics:
    """Instantaneous MRC SINR/SE and the statistical lower bound."""

    sinr: Optional[np.ndarray] = None
    se: Optional[np.ndarray] = None
    uatf_sinr: Optional[np.ndarray] = None
    uatf_se: Optional[np.ndarray] = None
    nu: Optional[np.ndarray] = None   # (K, K)
    xi: Optional[np.ndarray] = None   # (K, K)

    def merged_with(self, other: "CommMetrics") -> "CommMetrics":
        updates = {f: getattr(other, f) for f in
                   ("sinr", "se", "uatf_sinr", "uatf_se", "nu", "xi")
                   if getattr(other, f) is not None}
        return replace(self, **updates)


# =========================
# Operations
# =========================


def synth_pilot_block(cs: ChannelSet, theta: HrisConfig, codebook: PilotCodebook,
                      rho: float, sigma_b_sq: float, rng: np.random.Generator) -> np.ndarray:
    """One received pilot subblock at the BS under HRIS configuration theta.

    Y = sqrt(rho) * sum_k h_k(theta) phi_k^T + N with N entries CN(0, sigma_b_sq).
    """
    h_eq = equivalent_channels_all(cs, theta)  # (K, M)
    signal = np.sqrt(rho) * (h_eq.T @ codebook.matrix)
    return signal + complex_normal(rng, signal.shape, sigma_b_sq)


def ls_estimate(blocks: np.ndarray, codebook: PilotCodebook, rho: float,
                sigma_b_sq: float) -> EstimationResult:
    """LS channel estimate from L received pilot subblocks.

    Averages the per-subblock pilot correlations and rescales:
    h_hat_k = (1/(sqrt(rho) * tau_p)) * (1/L) * sum_t Y_t conj(phi_k).
    The estimate is CN(h_bar_k, sigma_b_sq/(L*K*rho) * I).
    """
    blocks = np.asarray(blocks)
    if blocks.ndim != 3:
        raise ValueError("blocks must be stacked with shape (L, M, tau_p)")
    n_subblocks = blocks.shape[0]
    tau_p = codebook.tau_p
    corr = np.mean(blocks, axis=0) @ np.conj(codebook.matrix.T)  # (M, K)
    h_hat = (corr / (np.sqrt(rho) * tau_p)).T
    per_entry = sigma_b_sq / (n_subblocks * tau_p * rho)
    return EstimationResult(h_hat=h_hat, est_var=blocks.shape[1] * per_entry,
                            est_var_per_entry=per_entry)


def averaged_channel(cs: ChannelSet, probe_configs: Sequence[HrisConfig],
                     theta_star: HrisConfig, n_subblocks: int) -> np.ndarray:
    """Mean equivalent channel over the L subblocks, shape (K, M).

    h_bar_k = (1/L) * [sum_{t<=C} h_k(Theta_t) + (L - C) h_k(theta_star)].
    """
    n_probe = len(probe_configs)
    if n_probe > n_subblocks:
        raise ValueError("more probe configurations than subblocks")
    acc = (n_subblocks - n_probe) * equivalent_channels_all(cs, theta_star)
    for theta in probe_configs:
        acc = acc + equivalent_channels_all(cs, theta)
    return acc / n_subblocks


def mse_analytic(cs: ChannelSet, probe_configs: Sequence[HrisConfig],
                 theta_star: HrisConfig, params: SystemParams,
                 n_subblocks: int) -> np.ndarray:
    """Exact estimation MSE toward the reflection-phase channel, per UE.

    First term is the pure LS noise floor M/(L*K) * sigma_b^2/rho; the second
    is the probe distortion eta/L^2 * ||G (sum_t Theta_t - C*theta_star) r_k||^2.
    """
    k_ues = cs.n_ues
    noise_term = params.m_bs * params.sigma_b_sq / (n_subblocks * params.k_ues * params.rho)
    out = np.full(k_ues, noise_term)
    n_probe = len(probe_configs)
    if n_probe == 0:
        return out
    delta = sum(theta.values for theta in probe_configs) - n_probe * theta_star.values
    distorted = (delta * cs.r_hris_ue) @ cs.g_bs_hris.T  # (K, M)
    out += (cs.eta / n_subblocks ** 2) * np.sum(np.abs(distorted) ** 2, axis=1)
    return out


def attach_truth(est: EstimationResult, h_bar: np.ndarray, h_star: np.ndarray,
                 mse_analytic_values: np.ndarray) -> EstimationResult:
    """Fill the ground-truth-dependent fields of an estimation result."""
    err = est.h_hat - h_star
    mse_emp = np.sum(np.abs(err) ** 2, axis=1)
    est.h_bar = h_bar
    est.mse_analytic = mse_analytic_values
    est.mse_empirical = mse_emp
    est.nmse = mse_emp / np.sum(np.abs(h_star) ** 2, axis=1)
    return est


def se_from_sinr(sinr, tau_u: int, tau_c: int):
    """Spectral efficiency (tau_u / tau_c) * log2(1 + sinr)."""
    return (tau_u / tau_c) * np.log2(1.0 + np.asarray(sinr, dtype=float))


def mrc_sinr_se(est: EstimationResult, cs: ChannelSet, theta_star: HrisConfig,
                frame: FrameDesign, rho: float, sigma_b_sq: float,
                symbols: Optional[np.ndarray] = None) -> CommMetrics:
    """Instantaneous MRC SINR and SE with v_k = h_hat_k.

    Data-symbol randomness is replaced by its power rho (deterministic-power
    form): SINR_k = rho |h_hat_k^H h_k*|^2 /
    (rho sum_{i != k} |h_hat_k^H h_i*|^2 + sigma_b_sq ||h_hat_k||^2).
    Passing explicit `symbols` (K complex values of mean power rho) keeps the
    per-symbol magnitudes instead; debugging aid only.
    """
    h_star = equivalent_channels_all(cs, theta_star)  # (K, M)
    cross = est.h_hat.conj() @ h_star.T               # (K, K), [k, i] = h_hat_k^H h_i*
    power = np.abs(cross) ** 2
    if symbols is None:
        power = rho * power
    else:
        power = power * (np.abs(np.asarray(symbols)) ** 2)[None, :]
    desired = np.diag(power)
    interference = power.sum(axis=1) - desired
    noise = sigma_b_sq * np.sum(np.abs(est.h_hat) ** 2, axis=1)
    with np.errstate(divide="ignore"):
        sinr = desired / (interference + noise)
    return CommMetrics(sinr=sinr, se=se_from_sinr(sinr, frame.tau_u, frame.tau_c))


def uatf_bound(h_bar: np.ndarray, h_star: np.ndarray, est_var_per_entry: float,
               frame: FrameDesign, rho: float, sigma_b_sq: float) -> CommMetrics:
    """Use-and-then-forget lower bound on the uplink SE under LS estimates.

    nu_ki = sum_m (|h_bar_mk|^2 + v) |h_mi|^2 and
    xi_ki = Re sum_{m != m'} conj(h_bar_mk) h_bar_m'k h_mi conj(h_m'i)
    with v the per-entry estimate variance, so nu + xi equals
    E|h_hat_k^H h_i|^2. The denominator carries sigma_b_sq * E||h_hat_k||^2
    with E||h_hat_k||^2 = ||h_bar_k||^2 + M*v.
    """
    m_bs = h_bar.shape[1]
    abs_bar_sq = np.abs(h_bar) ** 2          # (K, M)
    abs_star_sq = np.abs(h_star) ** 2        # (K, M)
    cross = h_bar.conj() @ h_star.T          # (K, K), [k, i] = h_bar_k^H h_i
    cross_sq = np.abs(cross) ** 2
    diag_term = abs_bar_sq @ abs_star_sq.T   # (K, K), sum_m |h_bar_mk|^2 |h_mi|^2
    nu = diag_term + est_var_per_entry * abs_star_sq.sum(axis=1)[None, :]
    xi = cross_sq - diag_term
    desired = np.diag(cross_sq)
    total = (nu + xi).sum(axis=1)
    est_norm_sq = abs_bar_sq.sum(axis=1) + m_bs * est_var_per_entry
    with np.errstate(divide="ignore"):
        sinr = rho * desired / (rho * total - rho * desired + sigma_b_sq * est_norm_sq)
    return CommMetrics(uatf_sinr=sinr, uatf_se=se_from_sinr(sinr, frame.tau_u, frame.tau_c),
                       nu=nu, xi=xi)
