"""Uniform deployments, progress/ETX greedy forwarding, and the chain
interaction census over all routes of a deployment.

Routing picks, from the usable neighbors of the current node, the one
maximizing geographic progress toward the destination divided by the link's
expected transmission count.  The census builds every such route between
node pairs, keeps those of a requested hop count, and tabulates the
frequencies of their interaction signatures for each carrier-sense range of
interest.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .interactions import Link, PAPER_PAIRS, PairKind, chain_signature, classify_pair
from .radio import RadioConfig, delivery_probability, etx, two_ray_rx_power

# Links below this delivery probability are not considered usable neighbors
# (caps ETX at 100 under symmetric per-direction probabilities).
USABLE_DELIVERY_FLOOR = 0.1


@dataclass(frozen=True)
class Chain:
    """An ordered relay path; consecutive nodes form the hops."""

    nodes: tuple[int, ...]
    positions: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ValueError("a chain needs at least two nodes")
        if len(self.nodes) != len(self.positions):
            raise ValueError("nodes and positions length mismatch")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("chain revisits a node")

    @property
    def hop_count(self) -> int:
        return len(self.nodes) - 1

    @property
    def hops(self) -> list[Link]:
        return [
            Link(self.nodes[i], self.positions[i], self.nodes[i + 1], self.positions[i + 1])
            for i in range(self.hop_count)
        ]

    def decodable(self, cfg: RadioConfig) -> bool:
        """True when every hop decodes in isolation under mean two-ray power."""
        return all(h.is_decodable(cfg) for h in self.hops)


@dataclass(frozen=True)
class RoutingFailure:
    """Greedy forwarding dead-end; carries the partial path walked so far."""

    partial: tuple[int, ...]


@dataclass
class Deployment:
    """Nodes uniformly placed in a rectangular arena, regenerable from a seed."""

    width: float
    height: float
    positions: np.ndarray  # (n, 2) float64
    seed: int
    _neighbor_cache: dict = field(default_factory=dict, repr=False, compare=False)
    _route_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    def position(self, node: int) -> tuple[float, float]:
        x, y = self.positions[node]
        return (float(x), float(y))

    def chain(self, nodes: list[int] | tuple[int, ...]) -> Chain:
        return Chain(nodes=tuple(nodes), positions=tuple(self.position(i) for i in nodes))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "x", "y"])
            for i, (x, y) in enumerate(self.positions):
                w.writerow([i, repr(float(x)), repr(float(y))])

    @classmethod
    def from_csv(cls, path: str | Path, width: float = 0.0, height: float = 0.0,
                 seed: int = -1) -> "Deployment":
        rows = {}
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                rows[int(rec["id"])] = (float(rec["x"]), float(rec["y"]))
        if sorted(rows) != list(range(len(rows))):
            raise ValueError("deployment CSV must contain contiguous ids from 0")
        pos = np.array([rows[i] for i in range(len(rows))], dtype=float)
        if not width:
            width = float(pos[:, 0].max()) if len(pos) else 0.0
        if not height:
            height = float(pos[:, 1].max()) if len(pos) else 0.0
        return cls(width=width, height=height, positions=pos, seed=seed)

    # -- usable-neighbor table ------------------------------------------------

    def neighbor_table(self, cfg: RadioConfig) -> "NeighborTable":
        key = (cfg.rx_threshold, cfg.shadowing_sigma, cfg.power_numerator)
        table = self._neighbor_cache.get(key)
        if table is None:
            table = _build_neighbor_table(self, cfg)
            self._neighbor_cache[key] = table
        return table


@dataclass
class NeighborTable:
    """CSR-style usable-neighbor lists sorted by neighbor id, with ETX."""

    ptr: np.ndarray       # (n+1,) int64 offsets into the flat arrays
    nbr: np.ndarray       # flat neighbor ids
    etx: np.ndarray       # flat ETX values, aligned with nbr
    max_radius: float

    def neighbors_of(self, node: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.ptr[node], self.ptr[node + 1]
        return self.nbr[lo:hi], self.etx[lo:hi]


def _usable_radius(cfg: RadioConfig) -> float:
    """Largest distance with delivery probability >= the usable floor (bisected)."""
    lo, hi = 1.0, 2.0
    while delivery_probability(hi, cfg) >= USABLE_DELIVERY_FLOOR:
        hi *= 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if delivery_probability(mid, cfg) >= USABLE_DELIVERY_FLOOR:
            lo = mid
        else:
            hi = mid
    return hi


def _build_neighbor_table(dep: Deployment, cfg: RadioConfig) -> NeighborTable:
    pos = dep.positions
    n = len(pos)
    radius = _usable_radius(cfg)
    ptr = np.zeros(n + 1, dtype=np.int64)
    nbr_chunks = []
    etx_chunks = []
    for i in range(n):
        d = np.hypot(pos[:, 0] - pos[i, 0], pos[:, 1] - pos[i, 1])
        cand = np.nonzero((d <= radius) & (np.arange(n) != i))[0]
        keep = []
        etxs = []
        for j in cand:
            # scalar path: eligibility must match nadv_next_hop exactly
            p = delivery_probability(max(float(d[j]), 1.0), cfg)
            if p >= USABLE_DELIVERY_FLOOR:
                keep.append(j)
                etxs.append(etx(p, p))
        ptr[i + 1] = ptr[i] + len(keep)
        nbr_chunks.append(np.asarray(keep, dtype=np.int64))
        etx_chunks.append(np.asarray(etxs, dtype=float))
    nbr = np.concatenate(nbr_chunks) if nbr_chunks else np.empty(0, dtype=np.int64)
    etxs = np.concatenate(etx_chunks) if etx_chunks else np.empty(0, dtype=float)
    return NeighborTable(ptr=ptr, nbr=nbr, etx=etxs, max_radius=radius)


def generate_uniform(width: float, height: float, n_nodes: int, seed: int) -> Deployment:
    """I.i.d. uniform node positions in the arena from a seeded generator."""
    if width <= 0 or height <= 0:
        raise ValueError("arena dimensions must be positive")
    if n_nodes < 2:
        raise ValueError("a deployment needs at least 2 nodes")
    rng = np.random.default_rng(seed)
    positions = rng.uniform(low=(0.0, 0.0), high=(width, height), size=(n_nodes, 2))
    return Deployment(width=width, height=height, positions=positions, seed=seed)


def nadv_next_hop(current: int, destination: int, dep: Deployment,
                  cfg: RadioConfig) -> int | None:
    """Neighbor maximizing progress-toward-destination divided by link ETX.

    Only usable neighbors with strictly positive progress are eligible;
    ties break toward the smaller node id.  Returns None when no neighbor
    is eligible (a valid outcome, not an error).
    """
    if current == destination:
        raise ValueError("current node is already the destination")
    table = dep.neighbor_table(cfg)
    pos = dep.positions
    dist_cur = math.hypot(pos[current, 0] - pos[destination, 0],
                          pos[current, 1] - pos[destination, 1])
    nbrs, etxs = table.neighbors_of(current)
    best: int | None = None
    best_score = 0.0
    for j, e in zip(nbrs.tolist(), etxs.tolist()):
        progress = dist_cur - math.hypot(pos[j, 0] - pos[destination, 0],
                                         pos[j, 1] - pos[destination, 1])
        if progress <= 0.0:
            continue
        score = progress / e
        if best is None or score > best_score or (score == best_score and j < best):
            best = j
            best_score = score
    return best


def build_route(src: int, dst: int, dep: Deployment,
                cfg: RadioConfig) -> Chain | RoutingFailure:
    """Repeated greedy next-hop selection from src until dst is reached.

    Positive-progress eligibility makes revisits impossible; a node with no
    eligible neighbor is a dead-end and yields a RoutingFailure carrying the
    partial path.
    """
    if src == dst:
        raise ValueError("source equals destination")
    path = [src]
    current = src
    for _ in range(dep.n_nodes):
        nxt = nadv_next_hop(current, dst, dep, cfg)
        if nxt is None:
            return RoutingFailure(partial=tuple(path))
        assert nxt not in path, "greedy forwarding revisited a node"
        path.append(nxt)
        if nxt == dst:
            return dep.chain(path)
        current = nxt
    raise AssertionError("route exceeded node count without terminating")


# -- all-pairs routing (vectorized evaluation of the same forwarding rule) ----


def _next_hop_matrix(dep: Deployment, cfg: RadioConfig) -> np.ndarray:
    """next_hop[u, d]: greedy next hop from u toward d; -1 none, diag ignored."""
    table = dep.neighbor_table(cfg)
    pos = dep.positions
    n = dep.n_nodes
    ptr = table.ptr
    nbr = table.nbr
    flat_etx = table.etx
    src_of_flat = np.repeat(np.arange(n), np.diff(ptr))
    seg_start = np.minimum(ptr[:-1], max(len(nbr) - 1, 0))
    valid_seg = ptr[:-1] < ptr[1:]
    out = np.full((n, n), -1, dtype=np.int32)
    for d in range(n):
        dist_to_d = np.hypot(pos[:, 0] - pos[d, 0], pos[:, 1] - pos[d, 1])
        progress = dist_to_d[src_of_flat] - dist_to_d[nbr]
        score = np.where(progress > 0.0, progress / flat_etx, -np.inf)
        if len(score):
            seg_max = np.maximum.reduceat(score, seg_start)
        else:
            seg_max = np.full(n, -np.inf)
        seg_max = np.where(valid_seg, seg_max, -np.inf)
        winners = np.where(score == seg_max[src_of_flat], nbr, n)
        if len(winners):
            best = np.minimum.reduceat(winners, seg_start)
        else:
            best = np.full(n, n)
        best = np.where(valid_seg & np.isfinite(seg_max), best, n)
        col = np.where(best < n, best, -1).astype(np.int32)
        out[:, d] = col
    return out


def _all_routes(dep: Deployment, cfg: RadioConfig) -> list[tuple[int, ...]]:
    """Node sequences of every successful route between ordered node pairs."""
    key = (cfg.rx_threshold, cfg.shadowing_sigma, cfg.power_numerator)
    cached = dep._route_cache.get(key)
    if cached is not None:
        return cached
    nh = _next_hop_matrix(dep, cfg)
    n = dep.n_nodes
    routes: list[tuple[int, ...]] = []
    for d in range(n):
        col = nh[:, d]
        # hop distance to d, memoized along the pointer chase; -1 = unreachable
        depth = np.full(n, -2, dtype=np.int64)
        depth[d] = 0
        for s in range(n):
            if s == d:
                continue
            trail = []
            u = s
            while depth[u] == -2:
                trail.append(u)
                nxt = col[u]
                if nxt < 0:
                    depth[u] = -1
                    break
                u = nxt
            base = depth[u]
            for k, v in enumerate(reversed(trail)):
                depth[v] = -1 if base < 0 else base + k + 1
        for s in range(n):
            if s == d or depth[s] <= 0:
                continue
            path = [s]
            u = s
            while u != d:
                u = int(col[u])
                path.append(u)
            routes.append(tuple(path))
    dep._route_cache[key] = routes
    return routes


def routes_of_length(dep: Deployment, hop_count: int, cfg: RadioConfig) -> list[Chain]:
    """All greedy routes with exactly ``hop_count`` hops."""
    return [dep.chain(p) for p in _all_routes(dep, cfg) if len(p) == hop_count + 1]


# -- census -------------------------------------------------------------------


@dataclass
class CensusTable:
    """Signature occurrence probabilities per carrier-sense range value."""

    n_nodes: int
    hop_count: int
    cs_ranges: list[float]
    counts: dict[float, dict[str, int]]
    route_counts: dict[float, int]
    warnings: list[str] = field(default_factory=list)

    def probabilities(self, cs_range: float) -> dict[str, float]:
        total = self.route_counts[cs_range]
        if total == 0:
            return {}
        return {sig: c / total for sig, c in self.counts[cs_range].items()}

    def top_signatures(self, cs_range: float, k: int = 3) -> list[str]:
        probs = self.probabilities(cs_range)
        return [s for s, _ in sorted(probs.items(), key=lambda kv: (-kv[1], kv[0]))[:k]]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["cs_range", "n_nodes", "signature", "probability"])
            for cs in self.cs_ranges:
                for sig, p in sorted(self.probabilities(cs).items()):
                    w.writerow([cs, self.n_nodes, sig, repr(p)])


def config_with_cs_range(cfg: RadioConfig, cs_range: float) -> RadioConfig:
    """Config whose carrier-sense threshold is the two-ray power at ``cs_range``."""
    return replace(cfg, cs_threshold=two_ray_rx_power(cs_range, cfg))


def census(dep: Deployment, hop_count: int, cs_range_values: list[float],
           cfg: RadioConfig) -> CensusTable:
    """Classify every route of exactly ``hop_count`` hops at each CS range.

    Routes are selected once with the shadowed-ETX forwarding rule (route
    choice does not depend on the carrier-sense threshold); classification
    uses deterministic mean power with the threshold recomputed from each
    carrier-sense range via the two-ray law.
    """
    if hop_count < 4:
        raise ValueError("census needs hop_count >= 4")
    chains = routes_of_length(dep, hop_count, cfg)
    table = CensusTable(
        n_nodes=dep.n_nodes,
        hop_count=hop_count,
        cs_ranges=list(cs_range_values),
        counts={cs: {} for cs in cs_range_values},
        route_counts={cs: len(chains) for cs in cs_range_values},
    )
    if not chains:
        table.warnings.append(f"no routes of length {hop_count} in deployment")
        return table
    for cs in cs_range_values:
        cs_cfg = config_with_cs_range(cfg, cs)
        bucket = table.counts[cs]
        for chain in chains:
            sig = chain_signature(chain, cs_cfg, PAPER_PAIRS).render()
            bucket[sig] = bucket.get(sig, 0) + 1
    return table


@dataclass
class SeparationStudy:
    """Fraction of well-separated hop pairs with no interaction."""

    pair_count: int
    ni_count: int
    defined: bool

    @property
    def ni_fraction(self) -> float:
        if not self.defined:
            raise ValueError("no qualifying routes; fraction undefined")
        return self.ni_count / self.pair_count


def hop_separation_study(dep: Deployment, min_hops: int, cfg: RadioConfig,
                         separation: int = 3) -> SeparationStudy:
    """Over routes longer than ``min_hops``, classify hop pairs more than
    ``separation`` apart and report the fraction with no interaction."""
    pair_count = 0
    ni_count = 0
    for path in _all_routes(dep, cfg):
        hops = len(path) - 1
        if hops <= min_hops:
            continue
        links = dep.chain(path).hops
        for i in range(hops):
            for j in range(i + separation + 1, hops):
                pair_count += 1
                if classify_pair(links[i], links[j], cfg).kind is PairKind.NI:
                    ni_count += 1
    return SeparationStudy(pair_count=pair_count, ni_count=ni_count, defined=pair_count > 0)
