"""Scenario builders and study drivers: canonical chain geometries, saturation
sweeps, n-hop interaction placement studies, the flow-in-the-middle topology,
and cross-chain sampling.

Offered load is normalized to the saturated capacity of a single isolated
link, computed from the closed-form airtime of one successful exchange.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field

from .dcf import ChainLoad, MacParams, SimResult, drop_percentage, run, throughput
from .interactions import (
    DirectionalEffect,
    Link,
    PAPER_PAIRS,
    PairKind,
    chain_signature,
    classify_pair,
)
from .radio import RadioConfig, carrier_sense_range, transmission_range
from .topology import Chain, Deployment, generate_uniform, routes_of_length

SUPPORTED_SIGNATURES = ("SC/SC/SC", "HT/SC/SC", "HTC/SC/SC")

# Hop-length candidates for geometry search, preferred values first.
_HOP_GRID = (200.0, 240.0, 140.0, 250.0, 170.0, 100.0, 80.0, 60.0)


def nominal_cycle_us(mac: MacParams) -> float:
    """Mean airtime of one successful exchange on an isolated saturated link:
    DIFS + mean backoff + data frame + SIFS + ACK."""
    return (mac.difs + mac.cw_min / 2.0 * mac.slot_time + mac.data_airtime_us()
            + mac.sifs + mac.ack_duration)


def single_link_capacity_bps(mac: MacParams) -> float:
    """Saturated payload throughput of one isolated link."""
    return mac.payload_bits / (nominal_cycle_us(mac) * 1e-6)


@dataclass(frozen=True)
class CanonicalChainSpec:
    """A collinear chain realizing a requested 4-hop interaction signature."""

    requested: str
    hop_lengths: tuple[float, ...]
    chain: Chain
    verified: str


def _collinear_chain(hop_lengths: list[float] | tuple[float, ...]) -> Chain:
    xs = [0.0]
    for h in hop_lengths:
        xs.append(xs[-1] + h)
    return Chain(nodes=tuple(range(len(xs))), positions=tuple((x, 0.0) for x in xs))


def build_canonical_chain(signature: str, cfg: RadioConfig) -> CanonicalChainSpec:
    """Deterministic collinear 5-node placement matching ``signature``.

    The middle hops stay at the default length; the first (and if needed the
    last) hop is tuned until the far hop pair lands in the requested
    category, verified with the classifier itself.
    """
    if signature not in SUPPORTED_SIGNATURES:
        raise ValueError(
            f"unsupported signature {signature!r}; supported: {', '.join(SUPPORTED_SIGNATURES)}"
        )
    base = {"SC/SC/SC": 140.0, "HTC/SC/SC": 200.0, "HT/SC/SC": 240.0}[signature]
    first_candidates = [base] + [h for h in _HOP_GRID if h != base]
    for hop1 in first_candidates:
        for hop4 in (200.0,) + tuple(h for h in _HOP_GRID if h != 200.0):
            hops = (hop1, 200.0, 200.0, hop4)
            chain = _collinear_chain(hops)
            if not chain.decodable(cfg):
                continue
            got = chain_signature(chain, cfg, PAPER_PAIRS).render()
            if got == signature:
                return CanonicalChainSpec(requested=signature, hop_lengths=hops,
                                          chain=chain, verified=got)
    raise ValueError(f"no collinear geometry found for {signature} under this config")


# -- saturation sweep ----------------------------------------------------------

DEFAULT_LOADS = [round(0.05 * k, 2) for k in range(1, 25)]  # 0.05 .. 1.20


@dataclass(frozen=True)
class SweepPoint:
    load: float
    throughput_bps: float
    drop_pct: float | None
    generated: int
    delivered: int


def saturation_sweep(spec: CanonicalChainSpec, loads: list[float], duration: float,
                     seed: int, mac: MacParams, cfg: RadioConfig) -> list[SweepPoint]:
    """One run per normalized offered load; loads must be sorted ascending."""
    if list(loads) != sorted(loads):
        raise ValueError("loads must be sorted ascending")
    capacity = single_link_capacity_bps(mac)
    points = []
    for load in loads:
        result = run(spec.chain.positions, [ChainLoad(spec.chain, load * capacity)],
                     duration, mac, cfg, seed)
        points.append(SweepPoint(
            load=load,
            throughput_bps=throughput(result, 0, mac=mac),
            drop_pct=drop_percentage(result, 0),
            generated=result.chains[0].generated,
            delivered=result.chains[0].delivered,
        ))
    return points


# -- n-hop interaction placement ----------------------------------------------


@dataclass(frozen=True)
class NhopRow:
    assignment: str
    load: float
    throughput_bps: float | None
    drop_pct: float | None
    skipped_reason: str = ""


def parse_assignment(text: str) -> tuple[str, ...]:
    parts = tuple(p.strip() for p in text.split("-"))
    for p in parts:
        if p not in ("SC", "HT", "HTC"):
            raise ValueError(f"unknown slot category {p!r} in assignment {text!r}")
    return parts


def all_assignments(n_hops: int) -> list[tuple[str, ...]]:
    slots = n_hops - 3
    return [tuple(c) for c in itertools.product(("SC", "HT", "HTC"), repeat=slots)]


def build_chain_with_slots(n_hops: int, categories: tuple[str, ...], cfg: RadioConfig,
                           search_budget: int = 100_000) -> Chain | None:
    """Collinear n-hop chain whose (i, i+3) hop pairs realize ``categories``.

    Hop lengths are searched back to front over a fixed grid; hop j's slot
    constraint only involves hops j..j+3, so each candidate is checked with
    the classifier on that local window.  Returns None when the grid admits
    no geometry (the assignment is geometrically unrealizable here).
    """
    if n_hops < 4:
        raise ValueError("slot construction needs at least 4 hops")
    if len(categories) != n_hops - 3:
        raise ValueError(f"{n_hops}-hop chains have {n_hops - 3} slots, "
                         f"got {len(categories)} categories")
    hops: list[float | None] = [None] * n_hops
    hops[n_hops - 1] = 200.0
    budget = [search_budget]

    def slot_ok(j: int) -> bool:
        window = hops[j:j + 4]
        xs = [0.0]
        for h in window:
            xs.append(xs[-1] + h)
        victim = Link(0, (xs[0], 0.0), 1, (xs[1], 0.0))
        far = Link(3, (xs[3], 0.0), 4, (xs[4], 0.0))
        return classify_pair(victim, far, cfg).name == categories[j]

    tx_range = transmission_range(cfg)

    def solve(j: int) -> bool:
        if j < 0:
            return True
        for h in _HOP_GRID:
            if budget[0] <= 0:
                return False
            budget[0] -= 1
            if h > tx_range:
                continue
            hops[j] = h
            if j <= n_hops - 4 and not slot_ok(j):
                hops[j] = None
                continue
            if solve(j - 1):
                return True
            hops[j] = None
        return False

    if not solve(n_hops - 2):
        return None
    chain = _collinear_chain([float(h) for h in hops])
    got = chain_signature(chain, cfg, PAPER_PAIRS)
    rendered = tuple(got.categories())
    assert rendered == categories, f"constructed {rendered}, wanted {categories}"
    return chain


def nhop_study(n_hops: int, assignments: list[tuple[str, ...]], loads: list[float],
               duration: float, seed: int, mac: MacParams,
               cfg: RadioConfig) -> list[NhopRow]:
    """Realize each slot assignment geometrically and simulate it per load."""
    if n_hops < 5:
        raise ValueError("the n-hop study needs at least 5 hops")
    space = 3 ** (n_hops - 3)
    if len(assignments) > space:
        raise ValueError(f"more assignments than the {space}-element space")
    capacity = single_link_capacity_bps(mac)
    rows = []
    for assignment in assignments:
        label = "-".join(assignment)
        chain = build_chain_with_slots(n_hops, tuple(assignment), cfg)
        if chain is None:
            rows.append(NhopRow(label, 0.0, None, None,
                                skipped_reason="no realizable hop-length geometry in grid"))
            continue
        for load in loads:
            result = run(chain.positions, [ChainLoad(chain, load * capacity)],
                         duration, mac, cfg, seed)
            rows.append(NhopRow(
                assignment=label,
                load=load,
                throughput_bps=throughput(result, 0, mac=mac),
                drop_pct=drop_percentage(result, 0),
            ))
    return rows


# -- flow in the middle ---------------------------------------------------------


@dataclass(frozen=True)
class FlowInMiddleResult:
    throughput_bps: dict[str, float]
    positions: tuple[tuple[float, float], ...]


def _fim_positions(cfg: RadioConfig) -> tuple[tuple[float, float], ...]:
    """Three links: outer senders out of carrier-sense range of each other,
    both coupled with the middle sender; receivers tucked out of harm's way."""
    cs = carrier_sense_range(cfg)
    sep = 0.82 * cs          # sender spacing: coupled with middle, outers 2*sep apart
    hop = 0.48 * transmission_range(cfg)
    return (
        (0.0, 0.0), (-hop, 0.0),            # link A: 0 -> 1
        (sep, 0.0), (sep, -hop),            # link B (middle): 2 -> 3
        (2 * sep, 0.0), (2 * sep + hop, 0.0),  # link C: 4 -> 5
    )


def flow_in_middle(duration: float, seed: int, mac: MacParams, cfg: RadioConfig,
                   drop_link: str | None = None) -> FlowInMiddleResult:
    """Saturate the three-link starvation topology and report link throughputs.

    ``drop_link`` removes one of "A"/"C" to check that the middle link's
    share recovers once only one coupled competitor remains.
    """
    pos = _fim_positions(cfg)
    links = {"A": (0, 1), "B": (2, 3), "C": (4, 5)}
    if drop_link is not None:
        if drop_link not in ("A", "C"):
            raise ValueError("only an outer link (A or C) can be dropped")
        del links[drop_link]
    capacity = single_link_capacity_bps(mac)
    names = sorted(links)
    loads = []
    for name in names:
        a, b = links[name]
        chain = Chain(nodes=(a, b), positions=(pos[a], pos[b]))
        loads.append(ChainLoad(chain, capacity))
    result = run(pos, loads, duration, mac, cfg, seed)
    tp = {name: throughput(result, i, mac=mac) for i, name in enumerate(names)}
    return FlowInMiddleResult(throughput_bps=tp, positions=pos)


# -- cross-chain interactions ----------------------------------------------------

CHAIN_CLASSES = ("SC", "HTC", "HT")
_CLASS_SIGNATURE = {"SC": "SC/SC/SC", "HTC": "HTC/SC/SC", "HT": "HT/SC/SC"}
_WEAK = ("HT", "HTC")
_EFFECT_LABEL = {
    DirectionalEffect.COLLISION: "HT",
    DirectionalEffect.CAPTURE_VULNERABLE: "HTC",
    DirectionalEffect.SENDER_COUPLED: "SC",
    DirectionalEffect.NO_EFFECT: "NI",
}
_LABEL_SEVERITY = {"HT": 3, "HTC": 2, "SC": 1, "NI": 0}


@dataclass(frozen=True)
class CrossChainSample:
    """One sampled pair of chains with its cross-interaction classification."""

    chains: tuple[Chain, Chain]
    ht_in_chain: tuple[bool, bool]
    sym_ht_pairs: int
    cross_pairs: int
    link_labels: tuple[tuple[str, str], ...]  # (self label, cross label) per link
    worst_cross: tuple[str, str]
    throughput_bps: tuple[float, float] | None
    lost_capacity_s: tuple[tuple[float, float], tuple[float, float]] | None


@dataclass
class CrossChainReport:
    category_pair: tuple[str, str]
    samples: list[CrossChainSample] = field(default_factory=list)

    @property
    def p_ht_chain1(self) -> float:
        return sum(s.ht_in_chain[0] for s in self.samples) / len(self.samples)

    @property
    def p_ht_chain2(self) -> float:
        return sum(s.ht_in_chain[1] for s in self.samples) / len(self.samples)

    @property
    def p_ht_any(self) -> float:
        return sum(any(s.ht_in_chain) for s in self.samples) / len(self.samples)

    @property
    def sym_ht_fraction(self) -> float:
        pairs = sum(s.cross_pairs for s in self.samples)
        return sum(s.sym_ht_pairs for s in self.samples) / pairs if pairs else 0.0


def _suffered_label(victim: Link, other: Link, cfg: RadioConfig) -> str:
    """Label of the effect ``other``'s sender has on ``victim``'s reception."""
    cat = classify_pair(other, victim, cfg)
    return _EFFECT_LABEL[cat.effect_ab]


def four_hop_chain_pool(dep: Deployment, cfg: RadioConfig) -> dict[str, list[Chain]]:
    """All 4-hop routes of a deployment bucketed by self-interference class."""
    pool: dict[str, list[Chain]] = {c: [] for c in CHAIN_CLASSES}
    for chain in routes_of_length(dep, 4, cfg):
        sig = chain_signature(chain, cfg, PAPER_PAIRS).render()
        for cls, wanted in _CLASS_SIGNATURE.items():
            if sig == wanted:
                pool[cls].append(chain)
                break
    return pool


def cross_chain_study(category_pair: tuple[str, str], samples: int, *,
                      n_nodes: int = 500, arena: tuple[float, float] = (1500.0, 1500.0),
                      duration: float = 30.0, seed: int = 0,
                      mac: MacParams | None = None, cfg: RadioConfig | None = None,
                      simulate: bool = True, pairs_per_deployment: int = 20,
                      max_deployments: int = 200,
                      pool_cache: "dict | None" = None) -> CrossChainReport:
    """Sample routed chain pairs of the requested classes and classify (and
    optionally simulate) their cross-chain interactions.

    Chains are drawn node-disjoint from the same deployment; deployments are
    generated from a seed sequence until enough samples are collected.
    ``pool_cache`` (dict keyed by deployment seed) lets several studies share
    the routed chain pools.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    for cls in category_pair:
        if cls not in CHAIN_CLASSES:
            raise ValueError(f"unknown chain class {cls!r}")
    mac = mac or MacParams()
    cfg = cfg or RadioConfig()
    rng = random.Random(seed)
    report = CrossChainReport(category_pair=tuple(category_pair))
    capacity = single_link_capacity_bps(mac)
    for k in range(max_deployments):
        if len(report.samples) >= samples:
            break
        dep_seed = seed * 1_000_003 + k
        if pool_cache is not None and dep_seed in pool_cache:
            dep, pool = pool_cache[dep_seed]
        else:
            dep = generate_uniform(arena[0], arena[1], n_nodes, dep_seed)
            pool = four_hop_chain_pool(dep, cfg)
            if pool_cache is not None:
                pool_cache[dep_seed] = (dep, pool)
        bucket1 = pool[category_pair[0]]
        bucket2 = pool[category_pair[1]]
        if not bucket1 or not bucket2:
            continue
        taken = 0
        for _ in range(pairs_per_deployment * 5):
            if taken >= pairs_per_deployment or len(report.samples) >= samples:
                break
            c1 = bucket1[rng.randrange(len(bucket1))]
            c2 = bucket2[rng.randrange(len(bucket2))]
            if set(c1.nodes) & set(c2.nodes):
                continue
            report.samples.append(
                _evaluate_pair(c1, c2, dep, duration, rng, mac, cfg, simulate, capacity)
            )
            taken += 1
    if len(report.samples) < samples:
        raise RuntimeError(
            f"collected only {len(report.samples)}/{samples} samples for "
            f"{category_pair} after {max_deployments} deployments"
        )
    return report


def _evaluate_pair(c1: Chain, c2: Chain, dep: Deployment, duration: float,
                   rng: random.Random, mac: MacParams, cfg: RadioConfig,
                   simulate: bool, capacity: float) -> CrossChainSample:
    hops1, hops2 = c1.hops, c2.hops
    ht_flags = [False, False]
    sym_pairs = 0
    cross_count = 0
    cross_suffered: dict[int, list[str]] = {0: ["NI"] * len(hops1), 1: ["NI"] * len(hops2)}
    for i, la in enumerate(hops1):
        for j, lb in enumerate(hops2):
            cat = classify_pair(la, lb, cfg)
            cross_count += 1
            if cat.kind is PairKind.SYM_HT:
                sym_pairs += 1
            # victim side of each direction
            label_b = _EFFECT_LABEL[cat.effect_ab]  # a's sender acting on b
            label_a = _EFFECT_LABEL[cat.effect_ba]
            if _LABEL_SEVERITY[label_a] > _LABEL_SEVERITY[cross_suffered[0][i]]:
                cross_suffered[0][i] = label_a
            if _LABEL_SEVERITY[label_b] > _LABEL_SEVERITY[cross_suffered[1][j]]:
                cross_suffered[1][j] = label_b
            if label_a in _WEAK:
                ht_flags[0] = True
            if label_b in _WEAK:
                ht_flags[1] = True
    self1 = [_max_suffered(hops1, i, cfg) for i in range(len(hops1))]
    self2 = [_max_suffered(hops2, i, cfg) for i in range(len(hops2))]
    link_labels = tuple(
        list(zip(self1, cross_suffered[0])) + list(zip(self2, cross_suffered[1]))
    )
    worst1 = max(cross_suffered[0], key=lambda l: _LABEL_SEVERITY[l])
    worst2 = max(cross_suffered[1], key=lambda l: _LABEL_SEVERITY[l])
    tp = None
    lost = None
    if simulate:
        # compact scenario: only the two chains' nodes
        node_ids = list(c1.nodes) + list(c2.nodes)
        remap = {nid: i for i, nid in enumerate(node_ids)}
        pos = [dep.position(nid) for nid in node_ids]
        rc1 = Chain(nodes=tuple(remap[n] for n in c1.nodes),
                    positions=tuple(dep.position(n) for n in c1.nodes))
        rc2 = Chain(nodes=tuple(remap[n] for n in c2.nodes),
                    positions=tuple(dep.position(n) for n in c2.nodes))
        sim_seed = rng.randrange(2 ** 62)
        result = run(pos, [ChainLoad(rc1, capacity), ChainLoad(rc2, capacity)],
                     duration, mac, cfg, sim_seed)
        tp = (throughput(result, 0, mac=mac), throughput(result, 1, mac=mac))
        lc = lost_capacity(result, cfg, mac)
        lost = (lc[0], lc[1])
    return CrossChainSample(
        chains=(c1, c2),
        ht_in_chain=tuple(ht_flags),
        sym_ht_pairs=sym_pairs,
        cross_pairs=cross_count,
        link_labels=link_labels,
        worst_cross=(worst1, worst2),
        throughput_bps=tp,
        lost_capacity_s=lost,
    )


def _max_suffered(hops: list[Link], i: int, cfg: RadioConfig) -> str:
    worst = "NI"
    for j, other in enumerate(hops):
        if abs(i - j) < 2:
            continue
        label = _suffered_label(hops[i], other, cfg)
        if _LABEL_SEVERITY[label] > _LABEL_SEVERITY[worst]:
            worst = label
    return worst


def conditional_interaction(samples: list[CrossChainSample]) -> dict[str, dict[str, float]]:
    """Empirical P(cross label X | self label Y) over all sampled links.

    Rows are normalized; conditioning labels that never occur are absent
    from the table (the undefined-entry case).
    """
    if not samples:
        raise ValueError("need at least one sample")
    counts: dict[str, dict[str, int]] = {}
    for sample in samples:
        for self_label, cross_label in sample.link_labels:
            row = counts.setdefault(self_label, {})
            row[cross_label] = row.get(cross_label, 0) + 1
    table = {}
    for self_label, row in counts.items():
        total = sum(row.values())
        table[self_label] = {k: v / total for k, v in row.items()}
    return table


def weak_cross_probability(table: dict[str, dict[str, float]], self_label: str) -> float:
    row = table.get(self_label)
    if row is None:
        raise KeyError(f"no links with self label {self_label!r} observed")
    return sum(p for label, p in row.items() if label in _WEAK)


def lost_capacity(result: SimResult, cfg: RadioConfig,
                  mac: MacParams) -> dict[int, tuple[float, float]]:
    """Airtime lost per chain: (retransmission seconds, queue-drop seconds).

    Retransmission airtime is the summed duration of failed data frames;
    queue-drop airtime charges one nominal frame airtime per packet that died
    in a queue, the upstream capacity consumed for nothing.
    """
    frame_s = mac.data_airtime_us() * 1e-6
    out = {}
    for ci in result.chains:
        failed = sum(ls.attempts - ls.acked
                     for (c, _), ls in result.links.items() if c == ci)
        qdrops = result.chains[ci].queue_drops
        out[ci] = (failed * frame_s, qdrops * frame_s)
    return out
