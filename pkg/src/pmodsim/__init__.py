"""Link adaptation for dual-polarized mobile satellite links.

Frame-level simulator and supporting library: capacity laws for the two
polarized-modulation bit streams, effective-SNR physical layer abstraction,
a maritime dual-polarized fading channel, dual-LUT MCS selection with
adaptive margins, and multi-mode spectral-efficiency comparison.
"""

__version__ = "0.1.0"

from .adaptation import (AdaptationState, FeedbackDelayLine, FeedbackRecord,
                         McsEntry, McsTable, POLARIZATION_MCS_TABLE,
                         SYMBOL_MCS_TABLE, load_mcs_table, lut_lookup,
                         select_mcs, update_margins)
from .capacity import (ExpFitModel, FitError, QPSK, SaturationError,
                       diagonal_ip_bound, fit_exponential_capacity,
                       mc_polarization_mi, mc_qpsk_mi, phi_p, phi_p_inv,
                       phi_s, phi_s_inv, pmod_ip_bound)
from .channel import (ChannelConfig, ChannelGenerator, derive_doppler,
                      read_trace, static_channel, write_trace)
from .config import CampaignSpec, ConfigError, parse_campaign, serialize_campaign
from .modes import (MimoMode, ModePrediction, optbc_prediction, pmod_prediction,
                    select_mode, siso_prediction, vblast_prediction)
from .phy import (EffectiveSnrPair, effective_snr_pair, effective_snr_polarization,
                  effective_snr_symbols, mrc_symbol_snr, predict_decode)
from .sim import CampaignMetrics, FrameReport, SimConfig, iter_frames, run_campaign, run_point
from .units import db_to_lin, lin_to_db

__all__ = [
    "AdaptationState", "CampaignMetrics", "CampaignSpec", "ChannelConfig",
    "ChannelGenerator", "ConfigError", "EffectiveSnrPair", "ExpFitModel",
    "FeedbackDelayLine", "FeedbackRecord", "FitError", "FrameReport",
    "McsEntry", "McsTable", "MimoMode", "ModePrediction",
    "POLARIZATION_MCS_TABLE", "QPSK", "SYMBOL_MCS_TABLE", "SaturationError",
    "SimConfig", "db_to_lin", "derive_doppler", "diagonal_ip_bound",
    "effective_snr_pair", "effective_snr_polarization", "effective_snr_symbols",
    "fit_exponential_capacity", "iter_frames", "lin_to_db", "load_mcs_table",
    "lut_lookup", "mc_polarization_mi", "mc_qpsk_mi", "mrc_symbol_snr",
    "optbc_prediction", "parse_campaign", "phi_p", "phi_p_inv", "phi_s",
    "phi_s_inv", "pmod_ip_bound", "pmod_prediction", "predict_decode",
    "read_trace", "run_campaign", "run_point", "select_mcs", "select_mode",
    "serialize_campaign", "siso_prediction", "static_channel", "update_margins",
    "vblast_prediction", "write_trace",
]
