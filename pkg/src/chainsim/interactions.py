"""Classification of MAC-level interactions between pairs of wireless links.

A link pair's behavior under CSMA/CA is determined by the unintended
channels between the four endpoints: whether the senders defer to each
other, and whether one sender's signal destroys or merely threatens the
other link's reception.  This module computes that classification from
deterministic two-ray mean power and composes per-chain interaction
signatures from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple

from .radio import (
    ChannelState,
    MIN_DISTANCE_M,
    RadioConfig,
    channel_state,
    sinr,
    two_ray_rx_power,
)


@dataclass(frozen=True)
class Link:
    """A directed sender -> receiver link, endpoints carried as id + position."""

    src: int
    src_pos: tuple[float, float]
    dst: int
    dst_pos: tuple[float, float]

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError(f"link endpoints must differ (node {self.src})")

    def is_decodable(self, cfg: RadioConfig) -> bool:
        """True when the link decodes in isolation (mean power at decode level)."""
        return channel_state(self.src_pos, self.dst_pos, cfg) is ChannelState.RECEPTION

    def nodes(self) -> tuple[int, int]:
        return (self.src, self.dst)


class DirectionalEffect(Enum):
    """Effect of one link's sender on another link's reception."""

    NO_EFFECT = "no_effect"
    SENDER_COUPLED = "sender_coupled"        # senders mutually carrier-sense
    CAPTURE_VULNERABLE = "capture_vulnerable"  # decodes if locked first, deaf otherwise
    COLLISION = "collision"                  # concurrent transmission destroys reception

    @property
    def severity(self) -> int:
        return _SEVERITY[self]


_SEVERITY = {
    DirectionalEffect.NO_EFFECT: 0,
    DirectionalEffect.SENDER_COUPLED: 0,
    DirectionalEffect.CAPTURE_VULNERABLE: 1,
    DirectionalEffect.COLLISION: 2,
}


class PairKind(Enum):
    """Composite category for an unordered link pair.

    SC: senders connected, CSMA serializes the links.
    HT: hidden terminal, exactly one direction suffers outright collisions.
    SYM_HT: both directions suffer collisions.
    HTC: hidden terminal with capture; the threatened receiver still decodes
         when it locks onto its frame before the interferer starts (capture
         folds the symmetric case into the same label).
    NI: no interaction.
    SYM_HTC / OTHER: reserved labels for composites outside the common set;
         the classifier maps rare mixed cases onto the dominant category and
         records the mix in ``detail``.
    """

    SC = "SC"
    HT = "HT"
    SYM_HT = "SymHT"
    HTC = "HTC"
    SYM_HTC = "SymHTC"
    NI = "NI"
    OTHER = "Other"


@dataclass(frozen=True)
class PairCategory:
    """Pair classification plus the two underlying directional effects.

    ``effect_ab`` is the effect of link a's sender on link b's reception,
    ``effect_ba`` the reverse.  ``detail`` is non-empty for composite cases
    that were folded into a dominant category.
    """

    kind: PairKind
    effect_ab: DirectionalEffect
    effect_ba: DirectionalEffect
    detail: str = ""

    @property
    def name(self) -> str:
        return self.kind.value

    def csv_row(self, link_a: Link, link_b: Link) -> list[str]:
        """Serialize as a flat CSV row: pair ids, directional effects, category."""
        return [
            f"{link_a.src}-{link_a.dst}",
            f"{link_b.src}-{link_b.dst}",
            self.effect_ab.value,
            self.effect_ba.value,
            self.name,
        ]


def _require_disjoint(a: Link, b: Link) -> None:
    shared = set(a.nodes()) & set(b.nodes())
    if shared:
        raise ValueError(
            f"links share node(s) {sorted(shared)}; adjacent hops are "
            "coordinated by the MAC and are not classified"
        )


def _mean_power(tx_pos: tuple[float, float], rx_pos: tuple[float, float],
                cfg: RadioConfig) -> float:
    d = max(math.hypot(tx_pos[0] - rx_pos[0], tx_pos[1] - rx_pos[1]), MIN_DISTANCE_M)
    return two_ray_rx_power(d, cfg)


def classify_directional(interfering: Link, victim: Link, cfg: RadioConfig) -> DirectionalEffect:
    """Effect of ``interfering``'s sender on ``victim``'s reception.

    Senders that mutually carrier-sense defer to each other (SENDER_COUPLED).
    Otherwise the interferer transmits concurrently: if the victim receiver's
    SINR falls below the capture threshold the reception is destroyed
    (COLLISION); if the interferer is merely loud enough to deafen the
    receiver before it locks, the link survives only by capture
    (CAPTURE_VULNERABLE); a quieter interferer has NO_EFFECT.
    """
    _require_disjoint(interfering, victim)
    sender_coupling = channel_state(interfering.src_pos, victim.src_pos, cfg)
    if sender_coupling is not ChannelState.NEGLIGIBLE:
        return DirectionalEffect.SENDER_COUPLED
    intended = _mean_power(victim.src_pos, victim.dst_pos, cfg)
    interference = _mean_power(interfering.src_pos, victim.dst_pos, cfg)
    if sinr(intended, [interference], cfg.noise_floor) < cfg.capture_sinr:
        return DirectionalEffect.COLLISION
    if interference >= cfg.preamble_threshold:
        return DirectionalEffect.CAPTURE_VULNERABLE
    return DirectionalEffect.NO_EFFECT


def classify_pair(a: Link, b: Link, cfg: RadioConfig) -> PairCategory:
    """Compose the two directional effects into the pair category.

    Sender coupling is mutual by reciprocity, so either direction reporting
    SENDER_COUPLED yields SC.  Collisions dominate: one direction -> HT,
    both -> SymHT.  A worst case of CAPTURE_VULNERABLE (one or both ways)
    is HTC.  Both NO_EFFECT is NI.  Mixed collision/capture composites fold
    into HT with the mix recorded in ``detail``.
    """
    e_ab = classify_directional(a, b, cfg)
    e_ba = classify_directional(b, a, cfg)
    kind, detail = _compose(e_ab, e_ba)
    return PairCategory(kind=kind, effect_ab=e_ab, effect_ba=e_ba, detail=detail)


def _compose(e_ab: DirectionalEffect, e_ba: DirectionalEffect) -> tuple[PairKind, str]:
    E = DirectionalEffect
    if E.SENDER_COUPLED in (e_ab, e_ba):
        return PairKind.SC, ""
    collisions = (e_ab is E.COLLISION) + (e_ba is E.COLLISION)
    if collisions == 2:
        return PairKind.SYM_HT, ""
    if collisions == 1:
        other = e_ba if e_ab is E.COLLISION else e_ab
        detail = "" if other is E.NO_EFFECT else f"collision+{other.value}"
        return PairKind.HT, detail
    if E.CAPTURE_VULNERABLE in (e_ab, e_ba):
        return PairKind.HTC, ""
    return PairKind.NI, ""


class SignatureEntry(NamedTuple):
    """One classified hop pair of a chain; hop indices are 1-based."""

    hop_a: int
    hop_b: int
    category: PairCategory


@dataclass(frozen=True)
class ChainSignature:
    """Ordered pair categories for a chain's non-adjacent hop pairs.

    Four-hop chains render as the triple far-pair / (first,third) /
    (second,fourth), e.g. ``HT/SC/SC``.  Signatures restricted to the
    (i, i+3) slots of longer chains render dash-separated in slot order.
    """

    entries: tuple[SignatureEntry, ...]
    style: str  # "quad" | "slots" | "pairwise"

    def categories(self) -> list[str]:
        return [e.category.name for e in self.entries]

    def render(self) -> str:
        sep = "-" if self.style == "slots" else "/"
        return sep.join(self.categories())

    def __str__(self) -> str:
        return self.render()


PAPER_PAIRS = "paper-pairs"
FULL_PAIRWISE = "full-pairwise"


def _hops_of(chain) -> list[Link]:
    hops = getattr(chain, "hops", chain)
    return list(hops)


def chain_signature(chain, cfg: RadioConfig, mode: str = PAPER_PAIRS) -> ChainSignature:
    """Classify a chain's non-adjacent hop pairs.

    ``paper-pairs`` keeps only the (i, i+3) slots, the pairs whose category
    is not forced by geometry; a 4-hop chain is rendered as the conventional
    triple (1,4)/(1,3)/(2,4).  ``full-pairwise`` classifies every pair of
    hops that do not share a node.
    """
    hops = _hops_of(chain)
    n = len(hops)
    if mode == PAPER_PAIRS:
        if n < 4:
            raise ValueError(f"paper-pairs signature requires at least 4 hops, got {n}")
        if n == 4:
            index_pairs = [(1, 4), (1, 3), (2, 4)]
            style = "quad"
        else:
            index_pairs = [(i, i + 3) for i in range(1, n - 2)]
            style = "slots"
    elif mode == FULL_PAIRWISE:
        if n < 2:
            raise ValueError(f"full-pairwise signature requires at least 2 hops, got {n}")
        index_pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 2, n + 1)]
        style = "pairwise"
    else:
        raise ValueError(f"unknown signature mode {mode!r}")
    entries = tuple(
        SignatureEntry(i, j, classify_pair(hops[i - 1], hops[j - 1], cfg))
        for i, j in index_pairs
    )
    return ChainSignature(entries=entries, style=style)


def interaction_count(n: int) -> int:
    """Number of hop pairs in an n-hop chain: n(n-1)/2."""
    if n < 1:
        raise ValueError(f"hop count must be at least 1, got {n}")
    return n * (n - 1) // 2


class SignatureSpace(NamedTuple):
    size: int
    has_free_slots: bool


def signature_space_size(n: int) -> SignatureSpace:
    """Size of the signature space over the free (i, i+3) slots: 3^(n-3).

    Chains shorter than 4 hops have no free slots; their space is the single
    fully-constrained signature, flagged via ``has_free_slots=False``.
    """
    if n < 1:
        raise ValueError(f"hop count must be at least 1, got {n}")
    if n < 4:
        return SignatureSpace(size=1, has_free_slots=False)
    return SignatureSpace(size=3 ** (n - 3), has_free_slots=True)


def classification_csv_rows(pairs: Iterable[tuple[Link, Link]], cfg: RadioConfig) -> list[list[str]]:
    """Classify link pairs and serialize each as a CSV row."""
    rows = []
    for a, b in pairs:
        cat = classify_pair(a, b, cfg)
        rows.append(cat.csv_row(a, b))
    return rows


CLASSIFICATION_CSV_HEADER = ["link_a", "link_b", "effect_a_on_b", "effect_b_on_a", "category"]
