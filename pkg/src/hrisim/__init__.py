"""Link-level Monte Carlo simulator of a massive MIMO uplink assisted by a
self-configuring hybrid RIS."""

from .channels import (ChannelSet, HrisConfig, build_channels, equivalent_channel,
                       equivalent_channels_all, reflected_channel)
from .config import DESK_PRESET, ConfigError, SimulationConfig, load_config
from .geometry import (ArrayGeometry, PathlossModel, array_response, pathloss,
                       sample_link_state, wave_vector)
from .mmimo import (CommMetrics, EstimationResult, FrameDesign, PilotCodebook,
                    averaged_channel, ls_estimate, mrc_sinr_se, mse_analytic,
                    se_from_sinr, synth_pilot_block, uatf_bound)
from .orchestrator import (Scenario, SweepPlan, TrialResult, generate_scenario,
                           run_sweep, run_trial)
from .params import SystemParams, dbm_to_mw
from .probe import (DirectionCodebook, ProbeObservation, ProbeOutcome, build_codebook,
                    codebook_shape, detect_power, detect_signal, marcum_q1, power_probe,
                    signal_probe, threshold_from_pfa)
from .reflect import (ReflectionResult, bs_alignment_config, config_gap, ideal_config,
                      reflection_config, uplink_config)

__version__ = "0.1.0"
