"""HRIS probing phase: direction codebooks, pilot reception, power
measurement, GLRT detection, and local CSI output for both hardware types.

Signal-based hardware keeps the identity configuration while probing and
applies a receive combining matrix digitally; power-based hardware sweeps
one codebook configuration per subblock and only observes powers after the
RF combiner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import i0e

from .channels import ChannelSet, HrisConfig, complex_normal
from .geometry import ArrayGeometry, wave_vector
from .params import SystemParams

SIGNAL = "signal"
POWER = "power"


# =========================
# Direction codebook
# =========================


@dataclass(frozen=True)
class DirectionCodebook:
    """Uniform angular slicing of the probed half-space.

    `steering` holds the signal-based combining matrix V (N x D) with
    entries of modulus 1/N; the power-based configuration for direction d
    is N * diag(V[:, d]), which has unit-modulus diagonal entries.
    """

    d_el: int
    d_az: int
    directions: np.ndarray  # (D, 3) unit vectors
    steering: np.ndarray    # (N, D)

    @property
    def n_directions(self) -> int:
        return self.steering.shape[1]

    def power_config(self, d: int) -> HrisConfig:
        return HrisConfig.from_values(self.steering.shape[0] * self.steering[:, d])

    def signal_csi_config(self, d: int) -> HrisConfig:
        """Combiner column for direction d with gains normalized to unit modulus."""
        col = self.steering[:, d]
        return HrisConfig(phases=np.angle(col), gains=np.ones(col.shape[0]))


def codebook_angles(d_el: int, d_az: int):
    """Elevation/azimuth midpoints of the D = d_el * d_az uniform sectors."""
    d = np.arange(d_el * d_az)
    rem = np.mod(d, d_el)
    psi_el = (np.pi / d_el) * (rem + 0.5)
    psi_az = (np.pi / d_az) * ((d - rem) / d_el + 0.5)
    return psi_el, psi_az


def codebook_shape(n_directions: int):
    """Factor D into (d_el, d_az) with d_el the largest divisor <= sqrt(D)."""
    if n_directions < 1:
        raise ValueError("n_directions must be >= 1")
    d_el = 1
    for cand in range(1, int(math.isqrt(n_directions)) + 1):
        if n_directions % cand == 0:
            d_el = cand
    return d_el, n_directions // d_el


def build_codebook(d_el: int, d_az: int, geom_hris: ArrayGeometry,
                   wavelength: float) -> DirectionCodebook:
    """Build the combining matrix over D = d_el * d_az probed directions."""
    if d_el < 1 or d_az < 1:
        raise ValueError("direction counts must be >= 1")
    psi_el, psi_az = codebook_angles(d_el, d_az)
    raw = np.stack([np.sin(psi_el) * np.cos(psi_az),
                    np.sin(psi_el) * np.cos(psi_az),
                    np.cos(psi_el)], axis=1)
    norms = np.linalg.norm(raw, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("degenerate probing direction")
    directions = raw / norms[:, None]

    n = geom_hris.n_elements
    steering = np.zeros((n, directions.shape[0]), dtype=complex)
    for d, p in enumerate(directions):
        k = wave_vector(geom_hris.center + p, geom_hris.center, wavelength)
        steering[:, d] = np.exp(1j * (geom_hris.offsets @ k)) / n
    return DirectionCodebook(d_el=d_el, d_az=d_az, directions=directions, steering=steering)


# =========================
# Probe synthesis
# =========================


@dataclass(frozen=True)
class ProbeObservation:
    """Per-UE measured powers over the probed directions."""

    alpha: np.ndarray           # (K, D), >= 0
    best_direction: np.ndarray  # (K,) argmax over directions, lowest index on ties
    hardware: str
    subblocks_used: int


def pilot_matrix_at_hris(cs: ChannelSet) -> np.ndarray:
    """Stacked HRIS-UE channels [r_1, ..., r_K], shape (N, K).

    With the canonical orthogonal pilots, correlating the received subblock
    against the pilot set reduces to this matrix (one UE per pilot column).
    """
    return cs.r_hris_ue.T


def signal_probe(cs: ChannelSet, codebook: DirectionCodebook, params: SystemParams,
                 n_subblocks: int, rng: np.random.Generator) -> ProbeObservation:
    """Signal-based probing over `n_subblocks` pilot subblocks.

    Per subblock the HRIS receives sqrt((1-eta)*rho*tau_p) * R + W with W
    entries CN(0, sigma_hris_sq), combines with V^H and averages over
    subblocks, leaving per-entry noise CN(0, sigma_hris_sq / (N*C)).
    """
    if n_subblocks < 1:
        raise ValueError("n_subblocks must be >= 1")
    r = pilot_matrix_at_hris(cs)
    tau_p = params.k_ues
    amp = np.sqrt((1.0 - params.eta) * params.rho * tau_p)
    v_h = codebook.steering.conj().T  # (D, N)

    acc = np.zeros((codebook.n_directions, tau_p), dtype=complex)
    for _ in range(n_subblocks):
        w = complex_normal(rng, (r.shape[0], tau_p), params.sigma_hris_sq)
        acc += v_h @ (amp * r + w)
    ybar = acc / n_subblocks

    alpha = np.abs(ybar.T) ** 2  # (K, D)
    return ProbeObservation(alpha=alpha, best_direction=np.argmax(alpha, axis=1),
                            hardware=SIGNAL, subblocks_used=n_subblocks)


def power_probe(cs: ChannelSet, codebook: DirectionCodebook, params: SystemParams,
                n_subblocks: int, rng: np.random.Generator) -> ProbeObservation:
    """Power-based probing: one codebook configuration per subblock (C = D).

    The RF combiner sums the absorbed per-element signals; its output noise
    has independent real/imaginary parts of variance N*sigma_hris_sq each,
    so the measured noise-only power is exponential with mean
    2*N*sigma_hris_sq. The measured power per direction keeps the exact
    signal-noise cross term.
    """
    if n_subblocks != codebook.n_directions:
        raise ValueError("power-based probing requires one subblock per direction (C = D)")
    r = pilot_matrix_at_hris(cs)
    n = r.shape[0]
    tau_p = params.k_ues
    amp = np.sqrt((1.0 - params.eta) * params.rho * tau_p)

    alpha = np.zeros((tau_p, codebook.n_directions))
    for d in range(codebook.n_directions):
        theta_d = n * codebook.steering[:, d]
        noise = complex_normal(rng, tau_p, 2.0 * n * params.sigma_hris_sq)
        y_d = amp * (r.conj().T @ theta_d) + noise
        alpha[:, d] = np.abs(y_d) ** 2
    return ProbeObservation(alpha=alpha, best_direction=np.argmax(alpha, axis=1),
                            hardware=POWER, subblocks_used=n_subblocks)


def noiseless_best_directions(cs: ChannelSet, codebook: DirectionCodebook) -> np.ndarray:
    """True best codebook direction per UE (argmax of the noiseless power)."""
    proj = np.abs(codebook.steering.conj().T @ cs.r_hris_ue.T) ** 2  # (D, K)
    return np.argmax(proj, axis=0)


# =========================
# Detection
# =========================


@dataclass(frozen=True)
class ProbeOutcome:
    """Detection decisions and local CSI for the detected UEs.

    `csi_dirs` and `csi_gains` are keyed by the original UE index and
    ordered by it; config gains are normalized to unit modulus. The
    analytic detection probability follows the closed forms evaluated at
    the measured statistic; for power-based hardware it is an optimistic
    estimate because the signal-noise cross term is neglected.
    """

    detected: np.ndarray             # (K,) bool
    csi_dirs: dict                   # ue index -> HrisConfig
    csi_gains: dict                  # ue index -> measured power
    threshold: float
    statistics: np.ndarray           # (K,) lambda (signal) or alpha_best (power)
    analytic_pd: np.ndarray          # (K,)
    analytic_pfa: float
    hardware: str

    @property
    def n_detected(self) -> int:
        return int(np.count_nonzero(self.detected))


def threshold_from_pfa(hardware: str, target_pfa: float, n_elements: int | None = None,
                       sigma_hris_sq: float | None = None) -> float:
    """Detection threshold meeting a target false-alarm probability.

    Signal-based: eps = -2*ln(pfa), inverting P_FA = exp(-eps/2).
    Power-based: eps' = -2*N*sigma_hris_sq*ln(pfa), inverting
    P_FA = exp(-eps' / (2*N*sigma_hris_sq)).
    """
    if not 0.0 < target_pfa <= 1.0:
        raise ValueError("target_pfa must lie in (0, 1]")
    if hardware == SIGNAL:
        return -2.0 * math.log(target_pfa)
    if hardware == POWER:
        if n_elements is None or sigma_hris_sq is None:
            raise ValueError("power-based threshold needs n_elements and sigma_hris_sq")
        return -2.0 * n_elements * sigma_hris_sq * math.log(target_pfa)
    raise ValueError(f"unknown hardware '{hardware}'")


def detect_signal(obs: ProbeObservation, codebook: DirectionCodebook, n_elements: int,
                  n_subblocks: int, sigma_hris_sq: float, eps: float) -> ProbeOutcome:
    """GLRT on the best-direction statistic of the signal-based probe.

    The statistic lambda = (2*N*C / sigma_hris_sq) * |ybar_best|^2 is central
    chi-square with 2 dof under noise only, so P_FA = exp(-eps/2); under a
    deterministic signal it is non-central with noncentrality lambda and the
    detection probability is the Marcum Q function Q1(sqrt(lambda), sqrt(eps)).
    """
    if obs.hardware != SIGNAL:
        raise ValueError("observation does not come from a signal-based probe")
    alpha_best = np.take_along_axis(obs.alpha, obs.best_direction[:, None], axis=1)[:, 0]
    if sigma_hris_sq > 0:
        lam = (2.0 * n_elements * n_subblocks / sigma_hris_sq) * alpha_best
    else:  # noiseless limit: any measured power is a detection
        lam = np.where(alpha_best > 0, np.inf, 0.0)
    detected = lam > eps
    pd = np.array([marcum_q1(math.sqrt(l), math.sqrt(eps)) if np.isfinite(l) else 1.0
                   for l in lam])
    csi_dirs = {k: codebook.signal_csi_config(obs.best_direction[k])
                for k in range(len(detected)) if detected[k]}
    csi_gains = {k: float(alpha_best[k]) for k in range(len(detected)) if detected[k]}
    return ProbeOutcome(detected=detected, csi_dirs=csi_dirs, csi_gains=csi_gains,
                        threshold=eps, statistics=lam, analytic_pd=pd,
                        analytic_pfa=math.exp(-eps / 2.0), hardware=SIGNAL)


def detect_power(obs: ProbeObservation, codebook: DirectionCodebook, n_elements: int,
                 sigma_hris_sq: float, eps_prime: float) -> ProbeOutcome:
    """Threshold test on the best-direction measured power.

    P_FA = exp(-eps' / (2*N*sigma_hris_sq)) is exact under noise only; the
    analytic P_D plugs the measured power into the shifted-exponential form
    and is an optimistic estimate of the real detection probability.
    """
    if obs.hardware != POWER:
        raise ValueError("observation does not come from a power-based probe")
    alpha_best = np.take_along_axis(obs.alpha, obs.best_direction[:, None], axis=1)[:, 0]
    detected = alpha_best > eps_prime
    denom = 2.0 * n_elements * sigma_hris_sq
    if denom > 0:
        pd = np.exp(np.minimum(0.0, -(eps_prime - alpha_best) / denom))
        pfa = math.exp(-eps_prime / denom)
    else:
        pd = (alpha_best > 0).astype(float)
        pfa = 0.0 if eps_prime > 0 else 1.0
    csi_dirs = {k: codebook.power_config(obs.best_direction[k])
                for k in range(len(detected)) if detected[k]}
    csi_gains = {k: float(alpha_best[k]) for k in range(len(detected)) if detected[k]}
    return ProbeOutcome(detected=detected, csi_dirs=csi_dirs, csi_gains=csi_gains,
                        threshold=eps_prime, statistics=alpha_best, analytic_pd=pd,
                        analytic_pfa=pfa, hardware=POWER)


# =========================
# Marcum Q
# =========================


def marcum_q1(a: float, b: float, tol: float = 1e-12) -> float:
    """First-order Marcum Q function Q1(a, b).

    Equals the survival function at b^2 of a non-central chi-square with
    2 dof and noncentrality a^2. Uses the Poisson-mixture series for a <= b
    and the reflection identity Q1(a,b) = 1 - Q1(b,a) + exp(-(a-b)^2/2)*i0e(ab)
    for a > b, which stays accurate for arbitrarily large noncentrality.
    """
    if a < 0 or b < 0:
        raise ValueError("arguments must be non-negative")
    if b == 0.0:
        return 1.0
    if a > b:
        bessel = float(i0e(a * b)) * math.exp(-0.5 * (a - b) ** 2)
        return 1.0 - _marcum_series(b, a, tol) + bessel
    return _marcum_series(a, b, tol)


def _marcum_series(a: float, b: float, tol: float) -> float:
    # Series over Poisson(a^2/2) weights of central chi-square survivals.
    half_delta = 0.5 * a * a
    half_x = 0.5 * b * b
    pois = math.exp(-half_delta)
    chi_term = math.exp(-half_x)
    chi_cum = chi_term
    total = 0.0
    weight_cum = 0.0
    j = 0
    while True:
        total += pois * chi_cum
        weight_cum += pois
        if 1.0 - weight_cum < tol and j >= half_delta:
            break
        j += 1
        pois *= half_delta / j
        chi_term *= half_x / j
        chi_cum += chi_term
        if j > 100_000:  # unreachable for sane inputs
            break
    return min(1.0, total)
