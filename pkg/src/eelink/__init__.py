"""Energy-aware rate adaptation for an 802.11n-style MIMO receiver."""

from eelink.mode_space import (
    Detector,
    FrameTiming,
    McsEntry,
    PhyConstants,
    SystemMode,
    coded_rate,
    data_rate,
    decoder_cores,
    enumerate_modes,
    frame_timing,
    mcs_table,
)
from eelink.channel import ChannelRealization, draw_flat, draw_selective
from eelink.detection import (
    DetectionReport,
    RankDeficientError,
    lll_reduce,
    lrald_sinr,
    mmse_sinr,
    packet_error_oracle,
)
from eelink.energy import EnergyBreakdown, EnergyLut, dvfs_scale, e_h, eta, eta_cc, p_bb
from eelink.rate_adaptation import (
    Candidate,
    RaDecision,
    select_eg,
    select_gaeg,
    select_gg,
    select_with_aggregation,
)

__version__ = "0.1.0"
