"""Storage I/O and network transfer time with per-link bandwidth sharing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .topology import HostPath, Topology


def effective_blkio_bw(host_bw: float, service_bw: float | None = None) -> float:
    if service_bw is None:
        return host_bw
    return min(host_bw, service_bw)


def blkio_time(blk_rw: float, host_bw: float, service_bw: float | None = None) -> float:
    """Uncontended storage time in ns; the service cap replaces the host figure when smaller."""
    if blk_rw == 0:
        return 0.0
    bw = effective_blkio_bw(host_bw, service_bw)
    if not bw > 0:
        raise ConfigError(f"{blk_rw} bytes of block I/O with zero blkio bandwidth")
    return blk_rw / bw * 1e9


def path_bandwidth(link_capacities, link_flows, sender_cap: float = math.inf, receiver_cap: float = math.inf) -> float:
    """Bytes/s for one flow: equal split per link, bottleneck over the path, then the replica caps."""
    theta = min(c / n for c, n in zip(link_capacities, link_flows))
    return min(theta, sender_cap, receiver_cap)


def transfer_time(remaining_payload: float, theta: float, latency_ns: float = 0.0) -> float:
    """Transfer time in ns at a constant bandwidth, counting the fixed latency once."""
    if remaining_payload == 0:
        return float(latency_ns)
    return remaining_payload / theta * 1e9 + latency_ns


LATENCY, BYTES, DONE = "latency", "bytes", "done"


@dataclass(eq=False)
class Transmission:
    id: int
    src_host: int
    dst_host: int
    path: HostPath
    payload: float
    remaining_payload: float
    sender_cap: float = math.inf  # bytes/s
    receiver_cap: float = math.inf
    phase: str = LATENCY
    rate: float = 0.0  # bytes per ns while in the byte phase
    owner: object = None
    version: int = 0


@dataclass
class LinkState:
    id: int
    capacity: float
    active: set[int] = field(default_factory=set)

    def share(self) -> float:
        return self.capacity / len(self.active)


class NetworkState:
    """Active byte-phase flows per directed link."""

    def __init__(self, topology: Topology):
        self.topology = topology
        self.links = [LinkState(link.id, link.capacity) for link in topology.links]
        self.flows: dict[int, Transmission] = {}

    def start_bytes(self, tx: Transmission) -> set[int]:
        """Put a flow on its links; returns ids of flows whose rate may change."""
        tx.phase = BYTES
        self.flows[tx.id] = tx
        for lid in tx.path.links:
            self.links[lid].active.add(tx.id)
        return self._neighbours(tx)

    def finish(self, tx: Transmission) -> set[int]:
        tx.phase = DONE
        self.flows.pop(tx.id, None)
        for lid in tx.path.links:
            self.links[lid].active.discard(tx.id)
        return self._neighbours(tx) - {tx.id}

    def _neighbours(self, tx: Transmission) -> set[int]:
        out: set[int] = set()
        for lid in tx.path.links:
            out |= self.links[lid].active
        return out

    def bandwidth(self, tx: Transmission) -> float:
        links = [self.links[lid] for lid in tx.path.links]
        return path_bandwidth(
            [link.capacity for link in links], [len(link.active) for link in links], tx.sender_cap, tx.receiver_cap
        )

    def rebalance(self, flow_ids) -> list[Transmission]:
        """Recompute rates (bytes/ns) for the given flows and return them."""
        out = []
        for fid in sorted(flow_ids):
            tx = self.flows.get(fid)
            if tx is None:
                continue
            tx.rate = self.bandwidth(tx) / 1e9
            out.append(tx)
        return out

    def link_load(self, lid: int) -> float:
        """Sum of rates currently allocated on a directed link, bytes/s."""
        return sum(self.flows[f].rate * 1e9 for f in self.links[lid].active)
