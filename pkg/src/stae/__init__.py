"""Attention-based semantic video compression with deadline-aware offloading."""

from .attention import (
    BudgetPair,
    FrameAttentionMap,
    SelectionResult,
    SpatialAttentionMap,
    encode_semantics,
    frame_attention,
    select_frames,
    select_pixels,
    spatial_attention,
)
from .codec import EntropyStats, decode_packet, encode_packet
from .latency import (
    DeploymentProfile,
    LinkModel,
    coded_size_bits,
    comm_time_ms,
    completion_time_ms,
    compute_time_ms,
    default_profile,
    load_profile,
    raw_size_bytes,
)
from .planner import PlanDecision, crossover_rate, entropy_worthwhile, plan
from .recovery import MaskedClip, RecoveryNetConfig, fr_forward, interpolate_baseline, zero_fill
from .simulator import ChannelTrace, Scenario, export_report, integrate_transmission, run
from .tensor_core import WeightBundle

__version__ = "0.1.0"
