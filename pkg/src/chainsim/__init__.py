"""Simulator and analyzer for MAC-level link interactions in multi-hop
wireless chains: two-ray/SINR propagation, link-pair classification,
progress/ETX routing with an interaction census, and a deterministic
CSMA/CA packet simulator."""

from .radio import (
    ChannelState,
    RadioConfig,
    UnusableLinkError,
    carrier_sense_range,
    channel_state,
    delivery_probability,
    etx,
    sinr,
    transmission_range,
    two_ray_rx_power,
)
from .interactions import (
    ChainSignature,
    DirectionalEffect,
    Link,
    PairCategory,
    PairKind,
    chain_signature,
    classify_directional,
    classify_pair,
    interaction_count,
    signature_space_size,
)
from .topology import (
    CensusTable,
    Chain,
    Deployment,
    RoutingFailure,
    build_route,
    census,
    generate_uniform,
    hop_separation_study,
    nadv_next_hop,
)
from .dcf import (
    ChainLoad,
    FrameRecord,
    MacParams,
    SimResult,
    drop_percentage,
    resolve_reception,
    run,
    throughput,
)

__version__ = "0.1.0"
