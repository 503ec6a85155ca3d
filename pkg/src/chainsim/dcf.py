"""Deterministic discrete-event CSMA/CA simulator (DCF basic access, no
RTS/CTS) over the SINR-with-capture reception model.

Time is kept in integer nanoseconds so slot arithmetic and event ordering are
exact; simultaneous events are ordered by schedule sequence number.  A node
defers whenever the aggregate power it senses from other transmitters reaches
the carrier-sense threshold.  A receiver locks onto the first frame it can
decode while not already deafened, and keeps the frame only if its SINR stays
at or above the capture threshold for the whole reception.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field

from .radio import RadioConfig, two_ray_rx_power, MIN_DISTANCE_M
from .topology import Chain

US = 1_000  # ns per microsecond


@dataclass(frozen=True)
class MacParams:
    """MAC timing and retry parameters; durations in microseconds.

    Defaults are the standard DCF values for a 6 Mbit/s OFDM-style PHY.
    ``retry_limit`` is the maximum number of transmissions of one frame
    before its packet is discarded.
    """

    slot_time: float = 9.0
    sifs: float = 16.0
    difs: float = 34.0
    cw_min: int = 15
    cw_max: int = 1023
    retry_limit: int = 7
    data_rate: float = 6e6        # bit/s
    payload_size: int = 1500      # bytes
    phy_overhead: float = 20.0    # us per frame
    ack_duration: float = 44.0    # us
    queue_capacity: int = 50      # packets

    def __post_init__(self):
        for name in ("slot_time", "sifs", "difs", "phy_overhead", "ack_duration"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for cw in (self.cw_min, self.cw_max):
            if cw < 1 or (cw & (cw + 1)) != 0:
                raise ValueError("contention windows must be of the form 2^k - 1")
        if self.cw_min >= self.cw_max:
            raise ValueError("cw_min must be smaller than cw_max")
        if self.retry_limit < 1:
            raise ValueError("retry_limit must be at least 1")
        if self.data_rate <= 0 or self.payload_size <= 0:
            raise ValueError("data_rate and payload_size must be positive")
        if self.queue_capacity < 1:
            raise ValueError("queue_capacity must be at least 1")

    @property
    def payload_bits(self) -> int:
        return self.payload_size * 8

    def data_airtime_us(self) -> float:
        """Airtime of one data frame: PHY overhead plus payload serialization."""
        return self.phy_overhead + self.payload_bits / self.data_rate * 1e6


@dataclass(frozen=True)
class ChainLoad:
    """One chain with its constant-bit-rate offered load in payload bits/s."""

    chain: Chain
    rate_bps: float

    def __post_init__(self):
        if self.rate_bps <= 0:
            raise ValueError("rate_bps must be positive")


# Frame outcomes
ACKED = "acked"
CAPTURE_WIN = "capture_win"        # acked despite a deafness-grade overlap
COLLISION_LOSS = "collision_loss"  # transmission not acknowledged
RETRY_DROP = "retry_drop"          # packet discarded after the retry limit


@dataclass(frozen=True)
class FrameRecord:
    frame_id: int
    kind: str              # "data" | "ack"
    chain: int
    packet_id: int
    hop: int
    src: int
    dst: int
    start_us: float
    end_us: float
    outcome: str
    had_overlap: bool


@dataclass
class LinkStats:
    attempts: int = 0
    acked: int = 0
    collision_losses: int = 0
    retry_drops: int = 0

    @property
    def in_flight_at_end(self) -> int:
        return self.attempts - self.acked - self.collision_losses


@dataclass
class NodeStats:
    queue_drops: int = 0
    busy_time_s: float = 0.0


@dataclass
class ChainStats:
    generated: int = 0
    delivered: int = 0
    per_hop_delivered: list[int] = field(default_factory=list)
    queue_drops: int = 0
    retry_drops: int = 0
    in_network_at_end: int = 0
    delivery_times_us: list[float] = field(default_factory=list)


@dataclass
class SimResult:
    """Per-link, per-node, and per-chain counters for one simulation run."""

    duration_s: float
    chain_nodes: list[tuple[int, ...]]
    links: dict[tuple[int, int], LinkStats]
    nodes: dict[int, NodeStats]
    chains: dict[int, ChainStats]
    frames: list[FrameRecord] | None = None
    event_log: list[tuple[float, int, str, int, str]] | None = None

    def chain_index(self, chain: "Chain | int") -> int:
        if isinstance(chain, int):
            return chain
        for idx, nodes in enumerate(self.chain_nodes):
            if nodes == chain.nodes:
                return idx
        raise KeyError("result does not cover this chain")


def throughput(result: SimResult, chain: Chain | int, payload_bits: int | None = None,
               mac: MacParams | None = None) -> float:
    """Delivered payload bits per second for one chain."""
    if result.duration_s <= 0:
        raise ValueError("duration must be positive")
    bits = payload_bits if payload_bits is not None else (mac or MacParams()).payload_bits
    idx = result.chain_index(chain)
    return result.chains[idx].delivered * bits / result.duration_s


def drop_percentage(result: SimResult, chain: Chain | int) -> float | None:
    """Failed data transmissions over the chain, per delivered packet, in percent.

    Undefined (None) when the chain delivered nothing.
    """
    idx = result.chain_index(chain)
    delivered = result.chains[idx].delivered
    if delivered == 0:
        return None
    failed = sum(
        ls.attempts - ls.acked for (c, _), ls in result.links.items() if c == idx
    )
    return 100.0 * failed / delivered


def resolve_reception(frame, arrival_power: float, overlapping: list[tuple[float, float, float]],
                      cfg: RadioConfig) -> bool:
    """Pure reception predicate for one frame against overlapping interferers.

    ``frame`` needs ``start_us``/``end_us``; ``overlapping`` holds
    (power_w, start_us, end_us) intervals.  Succeeds iff (a) no signal
    already on the air at frame start presents aggregate power at or above
    the preamble-detect floor (a receiver hearing that much, including any
    frame it locked onto, cannot lock a new frame), (b) the frame itself is
    decodable, and (c) the SINR against the sum of concurrent interferers
    plus noise never falls below the capture threshold during the frame.
    """
    fs, fe = frame.start_us, frame.end_us
    if fe <= fs:
        raise ValueError("frame interval must have positive length")
    pre = sum(p for p, s, e in overlapping if s < fs < e)
    if pre >= cfg.preamble_threshold:
        return False
    if arrival_power < cfg.rx_threshold:
        return False
    bounds = sorted({fs, fe, *(max(s, fs) for _, s, _ in overlapping),
                     *(min(e, fe) for _, _, e in overlapping)})
    for t0, t1 in zip(bounds, bounds[1:]):
        if t1 <= fs or t0 >= fe:
            continue
        interference = sum(p for p, s, e in overlapping if s <= t0 and e >= t1)
        if interference == 0.0:
            continue
        if arrival_power / (cfg.noise_floor + interference) < cfg.capture_sinr:
            return False
    return True


# -- engine internals ----------------------------------------------------------

# node MAC states
_IDLE, _WAIT, _DIFS, _BACKOFF, _TX, _WAIT_ACK = range(6)

# event kinds
(_EV_ARRIVAL, _EV_DIFS, _EV_BACKOFF, _EV_TXEND, _EV_ACKSTART, _EV_ACKTIMEOUT,
 _EV_HOLDEND) = range(7)


class _Frame:
    __slots__ = ("fid", "kind", "chain", "pkt", "hop", "src", "dst", "start", "end",
                 "corrupted", "had_overlap", "outcome", "data_ref")

    def __init__(self, fid, kind, chain, pkt, hop, src, dst, start, end, data_ref=None):
        self.fid = fid
        self.kind = kind
        self.chain = chain
        self.pkt = pkt
        self.hop = hop
        self.src = src
        self.dst = dst
        self.start = start
        self.end = end
        self.corrupted = False
        self.had_overlap = False
        self.outcome = ""
        self.data_ref = data_ref


class _Node:
    __slots__ = ("nid", "queue", "state", "gen", "cw", "hol_attempts", "remaining",
                 "anchor", "difs_end", "sensed", "busy", "busy_since", "busy_accum",
                 "transmitting", "locked", "queue_drops", "seen", "awaiting",
                 "hold_until")

    def __init__(self, nid):
        self.nid = nid
        self.queue = []
        self.state = _IDLE
        self.gen = 0
        self.cw = 0
        self.hol_attempts = 0
        self.remaining = 0
        self.anchor = 0
        self.difs_end = 0
        self.sensed = 0.0
        self.busy = False
        self.busy_since = 0
        self.busy_accum = 0
        self.transmitting = None
        self.locked = None
        self.queue_drops = 0
        self.seen = set()
        self.awaiting = None
        self.hold_until = 0


class _ChainRt:
    __slots__ = ("chain", "interval_ns", "next_pkt", "generated", "delivered",
                 "per_hop", "delivered_ids", "queue_drop_ids", "retry_drop_ids",
                 "delivery_times", "hop_of")

    def __init__(self, chain: Chain, interval_ns: int):
        self.chain = chain
        self.interval_ns = interval_ns
        self.next_pkt = 0
        self.generated = 0
        self.delivered = 0
        self.per_hop = [0] * chain.hop_count
        self.delivered_ids = set()
        self.queue_drop_ids = set()
        self.retry_drop_ids = set()
        self.delivery_times = []
        self.hop_of = {node: i for i, node in enumerate(chain.nodes)}


class _Engine:
    def __init__(self, positions, loads, duration_ns, mac, cfg, seed,
                 record_frames, record_events):
        self.cfg = cfg
        self.mac = mac
        self.duration = duration_ns
        self.rng = random.Random(seed)
        self.now = 0
        self.heap = []
        self.seq = 0
        n = len(positions)
        self.power = [[0.0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                if i != j:
                    d = max(math.hypot(positions[i][0] - positions[j][0],
                                       positions[i][1] - positions[j][1]), MIN_DISTANCE_M)
                    self.power[i][j] = two_ray_rx_power(d, cfg)
        self.nodes = [_Node(i) for i in range(n)]
        self.active: dict[int, _Frame] = {}
        # Per-node sub-slot phase: stations do not share a slot grid (clock
        # offsets, propagation), which keeps same-instant starts of mutually
        # sensing senders rare, as backoff randomization intends.
        slot_ns = round(mac.slot_time * US)
        self.phase = [self.rng.randrange(slot_ns) for _ in range(n)]
        self.chains = []
        self.link_stats: dict[tuple[int, int], LinkStats] = {}
        for ci, load in enumerate(loads):
            period_ns = max(1, round(mac.payload_bits / load.rate_bps * 1e9))
            rt = _ChainRt(load.chain, period_ns)
            self.chains.append(rt)
            for h in range(load.chain.hop_count):
                self.link_stats[(ci, h)] = LinkStats()
        # integer-ns MAC timing
        self.slot = round(mac.slot_time * US)
        self.sifs = round(mac.sifs * US)
        self.difs = round(mac.difs * US)
        self.data_dur = round(mac.data_airtime_us() * US)
        self.ack_dur = round(mac.ack_duration * US)
        self.ack_timeout = self.sifs + self.ack_dur + self.slot
        self.cs_thr = cfg.cs_threshold
        self.rx_thr = cfg.rx_threshold
        self.pre_thr = cfg.preamble_threshold
        self.noise = cfg.noise_floor
        self.next_fid = 0
        self.frames: list[_Frame] | None = [] if record_frames else None
        self.events: list | None = [] if record_events else None

    # -- plumbing --------------------------------------------------------------

    def schedule(self, t, kind, a, b=None):
        heapq.heappush(self.heap, (t, self.seq, kind, a, b))
        self.seq += 1

    def log(self, node, event, fid=-1, outcome=""):
        if self.events is not None:
            self.events.append((self.now / US, node, event, fid, outcome))

    # -- medium ----------------------------------------------------------------

    def _recompute(self):
        power = self.power
        active = list(self.active.items())
        for node in self.nodes:
            nid = node.nid
            s = 0.0
            for tx_id, _ in active:
                if tx_id != nid:
                    s += power[tx_id][nid]
            node.sensed = s
            lock = node.locked
            if lock is not None:
                interference = s - power[lock.src][nid]
                if interference > 0.0:
                    if interference >= self.pre_thr:
                        lock.had_overlap = True
                    if power[lock.src][nid] / (self.noise + interference) < self.cfg.capture_sinr:
                        lock.corrupted = True
            busy_new = (node.transmitting is not None or s >= self.cs_thr
                        or node.hold_until > self.now)
            if busy_new != node.busy:
                if busy_new:
                    node.busy = True
                    node.busy_since = self.now
                    if node.state in (_DIFS, _BACKOFF):
                        self._pause_access(node)
                else:
                    node.busy = False
                    node.busy_accum += self.now - node.busy_since
                    if node.state == _WAIT:
                        self._resume_access(node)

    def _start_tx(self, node, frame):
        rx = self.nodes[frame.dst]
        pre_sensed = rx.sensed
        node.locked = None  # transmitting kills any reception in progress
        node.transmitting = frame
        self.active[node.nid] = frame
        self._recompute()
        self.log(node.nid, "tx_start", frame.fid, frame.kind)
        if rx.transmitting is None and rx.locked is None and pre_sensed < self.pre_thr:
            p = self.power[frame.src][frame.dst]
            if p >= self.rx_thr:
                rx.locked = frame
                interference = rx.sensed - p
                if interference > 0.0 and p / (self.noise + interference) < self.cfg.capture_sinr:
                    frame.corrupted = True
        self.schedule(frame.end, _EV_TXEND, node.nid)
        if self.frames is not None:
            self.frames.append(frame)

    # -- MAC access ------------------------------------------------------------

    def _begin_attempt(self, node):
        node.cw = self.mac.cw_min
        node.hol_attempts = 0
        self._draw_and_access(node)

    def _draw_and_access(self, node):
        node.remaining = self.rng.randint(0, node.cw)
        if node.busy:
            node.state = _WAIT
        else:
            self._resume_access(node)

    def _resume_access(self, node):
        node.state = _DIFS
        node.difs_end = self.now + self.difs + self.phase[node.nid]
        self.schedule(node.difs_end, _EV_DIFS, node.nid, node.gen)

    def _pause_access(self, node):
        if node.state == _DIFS:
            if node.difs_end == self.now and node.remaining == 0:
                return  # committed to transmit in this very tick
            node.gen += 1
            node.state = _WAIT
        elif node.state == _BACKOFF:
            elapsed = (self.now - node.anchor) // self.slot
            if elapsed >= node.remaining:
                return  # countdown completes this tick; same-slot start stands
            node.remaining -= elapsed
            node.gen += 1
            node.state = _WAIT

    def _transmit_data(self, node):
        chain_idx, pkt = node.queue[0]
        rt = self.chains[chain_idx]
        hop = rt.hop_of[node.nid]
        dst = rt.chain.nodes[hop + 1]
        frame = _Frame(self.next_fid, "data", chain_idx, pkt, hop, node.nid, dst,
                       self.now, self.now + self.data_dur)
        self.next_fid += 1
        self.link_stats[(chain_idx, hop)].attempts += 1
        node.hol_attempts += 1
        node.state = _TX
        node.awaiting = frame
        self._start_tx(node, frame)

    # -- event handlers ----------------------------------------------------------

    def _on_arrival(self, chain_idx):
        rt = self.chains[chain_idx]
        pkt = rt.next_pkt
        rt.next_pkt += 1
        rt.generated += 1
        src = self.nodes[rt.chain.nodes[0]]
        self._enqueue(src, chain_idx, pkt)
        nxt = self.now + rt.interval_ns
        if nxt <= self.duration:
            self.schedule(nxt, _EV_ARRIVAL, chain_idx)

    def _enqueue(self, node, chain_idx, pkt):
        rt = self.chains[chain_idx]
        if len(node.queue) >= self.mac.queue_capacity:
            node.queue_drops += 1
            rt.queue_drop_ids.add(pkt)
            self.log(node.nid, "queue_drop", -1, f"chain{chain_idx}:pkt{pkt}")
            return
        node.queue.append((chain_idx, pkt))
        if node.state == _IDLE:
            self._begin_attempt(node)

    def _on_difs(self, nid, gen):
        node = self.nodes[nid]
        if node.gen != gen or node.state != _DIFS:
            return
        if node.remaining == 0:
            self._transmit_data(node)
        else:
            node.state = _BACKOFF
            node.anchor = self.now
            self.schedule(self.now + node.remaining * self.slot, _EV_BACKOFF, nid, node.gen)

    def _on_backoff(self, nid, gen):
        node = self.nodes[nid]
        if node.gen != gen or node.state != _BACKOFF:
            return
        node.remaining = 0
        self._transmit_data(node)

    def _on_txend(self, nid):
        node = self.nodes[nid]
        frame = node.transmitting
        node.transmitting = None
        del self.active[nid]
        if frame.kind == "data":
            # Stations that sensed the frame defer through its ACK window,
            # whether or not they could decode it (NAV/EIFS-style holdoff);
            # this governs channel access only, not receiver locking.
            hold = frame.end + self.sifs + self.ack_dur
            for other in self.nodes:
                if other.nid != nid and self.power[nid][other.nid] >= self.cs_thr:
                    if hold > other.hold_until:
                        other.hold_until = hold
                        self.schedule(hold, _EV_HOLDEND, other.nid, hold)
        self._recompute()
        rx = self.nodes[frame.dst]
        success = rx.locked is frame and not frame.corrupted
        if rx.locked is frame:
            rx.locked = None
        self.log(nid, "tx_end", frame.fid, frame.kind)
        if frame.kind == "data":
            node.state = _WAIT_ACK
            self.schedule(self.now + self.ack_timeout, _EV_ACKTIMEOUT, nid, node.gen)
            if success:
                self._receive_data(rx, frame)
        else:
            sender = self.nodes[frame.dst]
            data = frame.data_ref
            frame.outcome = ACKED if success else COLLISION_LOSS
            if success and sender.state == _WAIT_ACK and sender.awaiting is data:
                self._finalize_success(sender, data)
            # ack done; resume this node's own pending access if any
            if node.queue and node.state == _WAIT and not node.busy:
                self._resume_access(node)

    def _receive_data(self, rx, frame):
        chain_idx = frame.chain
        rt = self.chains[chain_idx]
        key = (chain_idx, frame.pkt)
        if key not in rx.seen:
            rx.seen.add(key)
            rt.per_hop[frame.hop] += 1
            if frame.hop == rt.chain.hop_count - 1:
                rt.delivered += 1
                rt.delivered_ids.add(frame.pkt)
                rt.delivery_times.append(self.now / US)
                self.log(rx.nid, "delivered", frame.fid, f"chain{chain_idx}:pkt{frame.pkt}")
            else:
                self._enqueue(rx, chain_idx, frame.pkt)
        ack = _Frame(self.next_fid, "ack", chain_idx, frame.pkt, frame.hop,
                     frame.dst, frame.src, self.now + self.sifs,
                     self.now + self.sifs + self.ack_dur, data_ref=frame)
        self.next_fid += 1
        self.schedule(ack.start, _EV_ACKSTART, rx.nid, ack)

    def _on_ackstart(self, nid, ack):
        node = self.nodes[nid]
        assert node.transmitting is None, "receiver busy at ACK time"
        if node.state in (_DIFS, _BACKOFF):
            self._pause_access(node)  # own transmission preempts pending access
            if node.state != _WAIT:
                node.gen += 1
                node.state = _WAIT
        self._start_tx(node, ack)

    def _finalize_success(self, sender, data):
        sender.gen += 1  # cancels the pending ACK timeout
        stats = self.link_stats[(data.chain, data.hop)]
        stats.acked += 1
        data.outcome = CAPTURE_WIN if data.had_overlap else ACKED
        self.log(sender.nid, "ack_ok", data.fid, data.outcome)
        sender.queue.pop(0)
        sender.awaiting = None
        sender.state = _IDLE
        if sender.queue:
            self._begin_attempt(sender)

    def _on_acktimeout(self, nid, gen):
        node = self.nodes[nid]
        if node.gen != gen or node.state != _WAIT_ACK:
            return
        data = node.awaiting
        stats = self.link_stats[(data.chain, data.hop)]
        stats.collision_losses += 1
        data.outcome = COLLISION_LOSS
        self.log(nid, "ack_timeout", data.fid, COLLISION_LOSS)
        rt = self.chains[data.chain]
        if node.hol_attempts >= self.mac.retry_limit:
            stats.retry_drops += 1
            rt.retry_drop_ids.add(data.pkt)
            self.log(nid, "retry_drop", data.fid, f"chain{data.chain}:pkt{data.pkt}")
            node.queue.pop(0)
            node.awaiting = None
            node.state = _IDLE
            if node.queue:
                self._begin_attempt(node)
        else:
            node.cw = min(2 * node.cw + 1, self.mac.cw_max)
            node.awaiting = None
            node.state = _IDLE
            self._draw_and_access(node)

    # -- main loop ---------------------------------------------------------------

    def run(self):
        for ci, rt in enumerate(self.chains):
            phase = int(self.rng.random() * rt.interval_ns)
            self.schedule(phase, _EV_ARRIVAL, ci)
        heap = self.heap
        while heap:
            t, _, kind, a, b = heapq.heappop(heap)
            if t > self.duration:
                break
            self.now = t
            if kind == _EV_ARRIVAL:
                self._on_arrival(a)
            elif kind == _EV_DIFS:
                self._on_difs(a, b)
            elif kind == _EV_BACKOFF:
                self._on_backoff(a, b)
            elif kind == _EV_TXEND:
                self._on_txend(a)
            elif kind == _EV_ACKSTART:
                self._on_ackstart(a, b)
            elif kind == _EV_ACKTIMEOUT:
                self._on_acktimeout(a, b)
            else:  # _EV_HOLDEND
                if self.nodes[a].hold_until == b:
                    self._recompute()
        self.now = self.duration
        return self._collect()

    def _collect(self) -> SimResult:
        nodes = {}
        for node in self.nodes:
            busy = node.busy_accum + (self.now - node.busy_since if node.busy else 0)
            nodes[node.nid] = NodeStats(queue_drops=node.queue_drops, busy_time_s=busy / 1e9)
        in_queue: dict[int, set[int]] = {ci: set() for ci in range(len(self.chains))}
        for node in self.nodes:
            for chain_idx, pkt in node.queue:
                in_queue[chain_idx].add(pkt)
        chains = {}
        for ci, rt in enumerate(self.chains):
            in_net = {p for p in in_queue[ci] if p not in rt.delivered_ids}
            qdrops = {p for p in rt.queue_drop_ids
                      if p not in rt.delivered_ids and p not in in_net}
            rdrops = {p for p in rt.retry_drop_ids
                      if p not in rt.delivered_ids and p not in in_net and p not in qdrops}
            chains[ci] = ChainStats(
                generated=rt.generated,
                delivered=rt.delivered,
                per_hop_delivered=list(rt.per_hop),
                queue_drops=len(qdrops),
                retry_drops=len(rdrops),
                in_network_at_end=len(in_net),
                delivery_times_us=list(rt.delivery_times),
            )
        frames = None
        if self.frames is not None:
            frames = [
                FrameRecord(f.fid, f.kind, f.chain, f.pkt, f.hop, f.src, f.dst,
                            f.start / US, f.end / US,
                            f.outcome if f.outcome else "in_flight",
                            f.had_overlap)
                for f in self.frames
            ]
        return SimResult(
            duration_s=self.duration / 1e9,
            chain_nodes=[rt.chain.nodes for rt in self.chains],
            links=self.link_stats,
            nodes=nodes,
            chains=chains,
            frames=frames,
            event_log=self.events,
        )


def run(positions, chains: list[ChainLoad], duration: float, mac: MacParams,
        cfg: RadioConfig, seed: int, record_frames: bool = False,
        record_events: bool = False) -> SimResult:
    """Simulate the given chains over shared positions for ``duration`` seconds.

    ``positions`` may be a sequence of (x, y) tuples or anything exposing
    ``.positions`` (a deployment); chain node ids index into it.  Chains must
    be decodable hop by hop under mean two-ray power, otherwise they could
    never carry traffic and the scenario is rejected.  Fully deterministic
    for a given seed.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    pos_attr = getattr(positions, "positions", positions)
    pos = [(float(p[0]), float(p[1])) for p in pos_attr]
    if not chains:
        raise ValueError("at least one chain is required")
    for load in chains:
        for node in load.chain.nodes:
            if not 0 <= node < len(pos):
                raise ValueError(f"chain references unknown node {node}")
        if not load.chain.decodable(cfg):
            raise ValueError(
                f"chain {load.chain.nodes} has a hop that cannot decode in isolation"
            )
    engine = _Engine(pos, chains, round(duration * 1e9), mac, cfg, seed,
                     record_frames, record_events)
    return engine.run()
