"""Scenario generation, single-trial frame execution, and parameter sweeps.

A trial runs the whole coherence block in order: realize channels, probe
(C subblocks), detect, compute the reflection configuration, synthesize all
L pilot subblocks at the BS, LS-estimate, and score estimation and
communication metrics. Trials are independent; trial i of a sweep uses the
RNG stream seeded with base_seed + i, so results do not depend on execution
order or parallelism.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import probe as probe_mod
from .channels import HrisConfig, build_channels, equivalent_channels_all
from .geometry import ArrayGeometry, PathlossModel
from .mmimo import (FrameDesign, PilotCodebook, attach_truth, averaged_channel,
                    ls_estimate, mrc_sinr_se, mse_analytic, synth_pilot_block, uatf_bound)
from .params import SystemParams
from .probe import (build_codebook, codebook_shape, detect_power, detect_signal,
                    noiseless_best_directions, power_probe, signal_probe,
                    threshold_from_pfa)
from .reflect import (ReflectionResult, bs_alignment_config, config_gap, ideal_config,
                      reflection_config, uplink_config)

HARDWARE_TYPES = (probe_mod.SIGNAL, probe_mod.POWER)


# =========================
# Scenario
# =========================


@dataclass(frozen=True)
class Scenario:
    """One realized geometry: BS and HRIS at the west/south edge midpoints
    of a square service area, UEs inside the east half."""

    area_side: float
    bs_position: np.ndarray
    hris_position: np.ndarray
    ue_positions: np.ndarray  # (K, 3)
    seed: Optional[int] = None


def generate_scenario(area_side: float, n_ues: int, rng: np.random.Generator,
                      bs_height: float = 10.0, hris_height: float = 5.0,
                      ue_height: float = 1.5, seed: Optional[int] = None) -> Scenario:
    """Draw UE positions uniformly over the east half of the square area."""
    if area_side <= 0:
        raise ValueError("area_side must be positive")
    bs = np.array([0.0, area_side / 2.0, bs_height])
    hris = np.array([area_side / 2.0, 0.0, hris_height])
    ue_x = rng.uniform(area_side / 2.0, area_side, size=n_ues)
    ue_y = rng.uniform(0.0, area_side, size=n_ues)
    ues = np.stack([ue_x, ue_y, np.full(n_ues, ue_height)], axis=1) if n_ues else np.zeros((0, 3))
    return Scenario(area_side=area_side, bs_position=bs, hris_position=hris,
                    ue_positions=ues, seed=seed)


@dataclass(frozen=True)
class SweepPlan:
    """Probing-duration sweep: C = D is used for both hardware types."""

    c_values: Sequence[int]
    hardware: Sequence[str]
    trials: int
    base_seed: int

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for hw in self.hardware:
            if hw not in HARDWARE_TYPES:
                raise ValueError(f"unknown hardware '{hw}'")


# =========================
# Single trial
# =========================


@dataclass
class TrialResult:
    """Flat per-trial record; per-UE quantities are arrays of length K."""

    trial: int
    hardware: str
    n_probe_subblocks: int
    n_subblocks: int
    detected: np.ndarray
    best_direction: np.ndarray
    alpha_best: np.ndarray
    statistics: np.ndarray
    analytic_pd: np.ndarray
    analytic_pfa: float
    frobenius_gap: float
    mse_analytic: np.ndarray
    mse_empirical: np.ndarray
    nmse: np.ndarray
    sinr: np.ndarray
    se: np.ndarray
    uatf_se: np.ndarray
    trace: Optional[np.ndarray] = None  # (L, K) |h_k(t)| when collected

    @property
    def n_detected(self) -> int:
        return int(np.count_nonzero(self.detected))

    @property
    def c_over_l(self) -> float:
        return self.n_probe_subblocks / self.n_subblocks


def bs_array(params: SystemParams, scenario: Scenario) -> ArrayGeometry:
    return ArrayGeometry.ula(params.m_bs, scenario.bs_position,
                             params.wavelength / 2.0, axis="y")


def hris_array(params: SystemParams, scenario: Scenario) -> ArrayGeometry:
    return ArrayGeometry.upa(params.n_x, params.n_z, scenario.hris_position,
                             params.wavelength / 2.0)


def run_trial(scenario: Scenario, frame: FrameDesign, hardware: str,
              params: SystemParams, plmodel: PathlossModel, rng: np.random.Generator,
              *, trial_index: int = 0, target_pfa: float = 1e-3, no_hris: bool = False,
              collect_trace: bool = False, uplink_conjugate: bool = False,
              mse_uses_ideal: bool = False, weighted_reflection: bool = False,
              shadow_reflected: bool = False) -> TrialResult:
    """Execute one full frame and return its metrics record."""
    if hardware not in HARDWARE_TYPES:
        raise ValueError(f"unknown hardware '{hardware}'")
    eff_params = replace(params, eta=0.0) if no_hris else params
    geom_bs = bs_array(eff_params, scenario)
    geom_hris = hris_array(eff_params, scenario)
    cs = build_channels(scenario, eff_params, geom_bs, geom_hris, plmodel, rng,
                        shadow_reflected=shadow_reflected)

    k_ues = eff_params.k_ues
    n_probe = 0 if no_hris else frame.n_probe_subblocks
    n_hris = eff_params.n_hris

    detected = np.zeros(k_ues, dtype=bool)
    best_direction = np.full(k_ues, -1)
    alpha_best = np.zeros(k_ues)
    statistics = np.zeros(k_ues)
    analytic_pd = np.zeros(k_ues)
    analytic_pfa = float("nan")
    gap = float("nan")
    probe_configs: list[HrisConfig] = []
    achieved = HrisConfig.identity(n_hris)
    ideal: Optional[HrisConfig] = None

    if n_probe >= 1:
        codebook = build_codebook(*codebook_shape(n_probe), geom_hris, eff_params.wavelength)
        if hardware == probe_mod.SIGNAL:
            obs = signal_probe(cs, codebook, eff_params, n_probe, rng)
            eps = threshold_from_pfa(hardware, target_pfa)
            outcome = detect_signal(obs, codebook, n_hris, n_probe,
                                    eff_params.sigma_hris_sq, eps)
            probe_configs = [HrisConfig.identity(n_hris)] * n_probe
        else:
            obs = power_probe(cs, codebook, eff_params, n_probe, rng)
            eps = threshold_from_pfa(hardware, target_pfa, n_hris, eff_params.sigma_hris_sq)
            outcome = detect_power(obs, codebook, n_hris, eff_params.sigma_hris_sq, eps)
            probe_configs = [codebook.power_config(d) for d in range(n_probe)]

        detected = outcome.detected
        best_direction = obs.best_direction.copy()
        alpha_best = np.take_along_axis(obs.alpha, obs.best_direction[:, None], axis=1)[:, 0]
        statistics = outcome.statistics
        analytic_pd = outcome.analytic_pd
        analytic_pfa = outcome.analytic_pfa

        bs_csi = bs_alignment_config(geom_hris, scenario.bs_position, eff_params.wavelength)
        detected_csi = [outcome.csi_dirs[k] for k in sorted(outcome.csi_dirs)]
        weights = None
        if weighted_reflection and detected_csi:
            amp = np.sqrt([outcome.csi_gains[k] for k in sorted(outcome.csi_gains)])
            weights = amp / amp.sum()
        achieved = reflection_config(bs_csi, detected_csi, weights=weights)
        true_dirs = noiseless_best_directions(cs, codebook)
        ideal = ideal_config(bs_csi, [codebook.signal_csi_config(d) for d in true_dirs])
        reflection = ReflectionResult(achieved=achieved, ideal=ideal, bs_csi=bs_csi,
                                      frobenius_gap=config_gap(achieved, ideal),
                                      n_detected=outcome.n_detected)
        gap = reflection.frobenius_gap

    theta_star = uplink_config(achieved) if uplink_conjugate else achieved
    mse_target = theta_star
    if mse_uses_ideal and ideal is not None:
        mse_target = uplink_config(ideal) if uplink_conjugate else ideal

    # CHEST phase: first C subblocks see the probe configs, the rest theta_star.
    pilots = PilotCodebook(frame.tau_p)
    blocks = np.empty((frame.n_subblocks, eff_params.m_bs, frame.tau_p), dtype=complex)
    trace = np.empty((frame.n_subblocks, k_ues)) if collect_trace else None
    for t in range(frame.n_subblocks):
        theta_t = probe_configs[t] if t < n_probe else theta_star
        blocks[t] = synth_pilot_block(cs, theta_t, pilots, eff_params.rho,
                                      eff_params.sigma_b_sq, rng)
        if collect_trace:
            trace[t] = np.linalg.norm(equivalent_channels_all(cs, theta_t), axis=1)

    est = ls_estimate(blocks, pilots, eff_params.rho, eff_params.sigma_b_sq)
    h_bar = averaged_channel(cs, probe_configs, theta_star, frame.n_subblocks)
    h_star = equivalent_channels_all(cs, theta_star)
    mse_vec = mse_analytic(cs, probe_configs, mse_target, eff_params, frame.n_subblocks)
    est = attach_truth(est, h_bar, h_star, mse_vec)

    comm = mrc_sinr_se(est, cs, theta_star, frame, eff_params.rho, eff_params.sigma_b_sq)
    comm = comm.merged_with(uatf_bound(h_bar, h_star, est.est_var_per_entry, frame,
                                       eff_params.rho, eff_params.sigma_b_sq))

    return TrialResult(trial=trial_index, hardware=hardware,
                       n_probe_subblocks=frame.n_probe_subblocks,
                       n_subblocks=frame.n_subblocks, detected=detected,
                       best_direction=best_direction, alpha_best=alpha_best,
                       statistics=statistics, analytic_pd=analytic_pd,
                       analytic_pfa=analytic_pfa, frobenius_gap=gap,
                       mse_analytic=est.mse_analytic, mse_empirical=est.mse_empirical,
                       nmse=est.nmse, sinr=comm.sinr, se=comm.se, uatf_se=comm.uatf_se,
                       trace=trace)


# =========================
# Sweep
# =========================


@dataclass
class SweepResult:
    records: list  # TrialResult, ordered by (hardware, C, trial)
    aggregates: list  # dicts: hardware, c_over_l, metric, mean, std, trials


TRIAL_METRICS = ("detection_rate", "mse_analytic", "mse_empirical", "nmse",
                 "sinr_db", "se", "uatf_se", "config_gap")


def _trial_metric(rec: TrialResult, metric: str) -> float:
    if metric == "detection_rate":
        return rec.n_detected / rec.detected.shape[0] if rec.detected.shape[0] else float("nan")
    if metric == "config_gap":
        return rec.frobenius_gap
    if metric == "sinr_db":
        with np.errstate(divide="ignore"):
            return float(np.mean(10.0 * np.log10(rec.sinr)))
    return float(np.mean(getattr(rec, metric)))


def run_sweep(plan: SweepPlan, params: SystemParams, plmodel: PathlossModel,
              frame_template: FrameDesign, *, area_side: float = 100.0,
              bs_height: float = 10.0, hris_height: float = 5.0, ue_height: float = 1.5,
              target_pfa: float = 1e-3, no_hris: bool = False,
              fixed_scenario: Optional[Scenario] = None, collect_trace: bool = False,
              uplink_conjugate: bool = False, mse_uses_ideal: bool = False,
              weighted_reflection: bool = False,
              shadow_reflected: bool = False) -> SweepResult:
    """Run trials for every (hardware, C) pair of the plan.

    Trial i uses seed base_seed + i regardless of hardware and C, so all
    sweep points share geometry and Monte Carlo noise streams per trial.
    Geometry is redrawn per trial unless `fixed_scenario` is given.
    """
    records = []
    for hardware in plan.hardware:
        for c in plan.c_values:
            frame = replace(frame_template, n_probe_subblocks=int(c))
            for trial in range(plan.trials):
                rng = np.random.default_rng(plan.base_seed + trial)
                if fixed_scenario is not None:
                    scenario = fixed_scenario
                else:
                    scenario = generate_scenario(area_side, params.k_ues, rng,
                                                 bs_height=bs_height, hris_height=hris_height,
                                                 ue_height=ue_height,
                                                 seed=plan.base_seed + trial)
                records.append(run_trial(scenario, frame, hardware, params, plmodel, rng,
                                         trial_index=trial, target_pfa=target_pfa,
                                         no_hris=no_hris, collect_trace=collect_trace,
                                         uplink_conjugate=uplink_conjugate,
                                         mse_uses_ideal=mse_uses_ideal,
                                         weighted_reflection=weighted_reflection,
                                         shadow_reflected=shadow_reflected))
    return SweepResult(records=records, aggregates=aggregate_records(records))


def aggregate_records(records: Sequence[TrialResult]) -> list:
    """Per (hardware, C) group means and stds of every sweep metric."""
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec.hardware, rec.n_probe_subblocks, rec.n_subblocks), []).append(rec)
    out = []
    for (hardware, c, l), recs in sorted(groups.items()):
        for metric in TRIAL_METRICS:
            # canonical reduction order keeps aggregates independent of
            # the order in which trials were executed
            vals = np.sort(np.array([_trial_metric(r, metric) for r in recs]))
            out.append({"hardware": hardware, "c_over_l": c / l, "metric": metric,
                        "mean": float(np.mean(vals)), "std": float(np.std(vals)),
                        "trials": len(recs)})
    return out
