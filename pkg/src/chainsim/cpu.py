"""CPU time model: cgroups shares and quotas, cache-miss correction and a
CFS-style load balancer over per-core runqueues.

Share ratios live in (0, 1024] where 1024 stands for one full core.  The
pure functions at the top are what the event engine and the tests use; the
:class:`HostScheduler` keeps runqueues and evaluates the per-thread rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError
from .scenario import ThreadPrototype

FULL_SHARE = 1024.0


def compute_share(service_share: float, n_threads: int) -> float:
    return service_share / n_threads


def compute_share_ratio(
    share: float, runqueue_shares: float, guaranteed: bool, quota_cap: float = math.inf
) -> float:
    """Best Effort threads split their core by share; Guaranteed ones get their share, at most one core and the quota."""
    if not guaranteed:
        return share * FULL_SHARE / runqueue_shares
    return min(share, FULL_SHARE, quota_cap)


def normalise_ratios(ratios: list[float]) -> list[float]:
    """Scale a core's ratios down proportionally when they oversubscribe it."""
    total = sum(ratios)
    if total <= FULL_SHARE:
        return list(ratios)
    return [r * FULL_SHARE / total for r in ratios]


def _log_model(coeffs: tuple[float, float], arg: float, label: str) -> float:
    a, b = coeffs
    if a == 0:
        return b
    if not arg > 0:
        raise DomainError(f"{label} correction needs a positive argument, got {arg!r}")
    return a * math.log(arg) + b


def cmc(coeffs: tuple[float, float], cpu_limits_mc: float | None, n_threads: int) -> float:
    """Excess misses from a constrained CPU size; zero when the CPU is unlimited."""
    if cpu_limits_mc is None:
        return 0.0
    return _log_model(coeffs, cpu_limits_mc / n_threads, "CMC")


def cmt(coeffs: tuple[float, float], runqueue_maccs: float) -> float:
    """Excess misses from memory traffic of co-scheduled threads."""
    return _log_model(coeffs, runqueue_maccs, "CMT")


def cache_miss_rate(model: ThreadPrototype, cmc_value: float = 0.0, cmt_value: float = 0.0) -> float:
    return model.base_miss_rate * (cmt_value + 1.0) * (cmc_value + 1.0)


def cycle_penalty(model: ThreadPrototype, miss_rate: float) -> float:
    if model.instructions == 0:
        return 0.0
    return (model.mem_accesses / model.instructions) * miss_rate * model.cache_miss_penalty


def isolated_cpu_time(model: ThreadPrototype, clock_hz: float, miss_rate: float | None = None) -> float:
    """CPU time in ns of a thread running alone on an idle core."""
    if miss_rate is None:
        miss_rate = model.base_miss_rate
    return model.instructions * (model.cpi + cycle_penalty(model, miss_rate)) / clock_hz * 1e9


def relative_share(cpi: float, share_ratio: float, penalty: float) -> float:
    return cpi * (share_ratio / FULL_SHARE) / (cpi + penalty)


def effective_cpu_time(remaining: float, cpi: float, clock_hz: float, rel_share: float) -> float:
    """Time in ns to retire ``remaining`` instructions at a fixed relative share."""
    return remaining * cpi / clock_hz / rel_share * 1e9


def instruction_rate(cpi: float, clock_hz: float, rel_share: float) -> float:
    """Instructions retired per ns."""
    return rel_share / (cpi / clock_hz) / 1e9


def consume_instructions(remaining: float, dt_ns: float, cpi: float, clock_hz: float, rel_share: float) -> float:
    return max(0.0, remaining - dt_ns * instruction_rate(cpi, clock_hz, rel_share))


# ---------------------------------------------------------------------------
# Runtime state

CPU, BLKIO, IDLE, DONE = "cpu", "blkio", "idle", "done"


@dataclass(eq=False)
class LiveThread:
    id: int
    model: ThreadPrototype
    host: int
    group: tuple  # threads sharing an endpoint-function cgroup slice
    service_share: float
    cpu_limits: float | None
    remaining_instructions: float
    remaining_blkio: float
    remaining_idle: float
    phase: str = CPU
    share: float = 0.0
    weight: float = 0.0
    load: float = 1.0
    share_ratio: float = FULL_SHARE
    rel_share: float = 1.0
    rate: float = 0.0  # work units per ns in the current phase
    runqueue: int | None = None
    runnable_sum: float = 1.0
    runnable_period: float = 1.0
    consumed_instructions: float = 0.0
    owner: object = None  # engine bookkeeping
    version: int = 0

    @property
    def guaranteed(self) -> bool:
        return self.cpu_limits is not None and self.cpu_limits > 0

    def age(self, dt: float) -> None:
        if self.phase == CPU:
            self.runnable_sum += dt
        self.runnable_period += dt


@dataclass(frozen=True)
class CpuOptions:
    cmt_include_self: bool = True


@dataclass
class SchedTopology:
    """Two levels: core pairs inside one NUMA node spanning every core."""

    cores: int
    domains: list[list[list[list[int]]]] = field(default_factory=list)  # level -> spans -> groups -> cores

    def __post_init__(self):
        pairs = [list(range(i, min(i + 2, self.cores))) for i in range(0, self.cores, 2)]
        pair_level = [[[c] for c in pair] for pair in pairs]
        numa_level = [pairs]
        self.domains = [pair_level, numa_level]


class HostScheduler:
    """Runqueues of one host and the CFS-style balancing between them."""

    def __init__(self, cores: int, clock_hz: float, options: CpuOptions | None = None):
        self.cores = cores
        self.clock_hz = clock_hz
        self.options = options or CpuOptions()
        self.topology = SchedTopology(cores)
        self.runqueues: list[list[LiveThread]] = [[] for _ in range(cores)]

    # -- membership
    def threads(self) -> list[LiveThread]:
        return [t for rq in self.runqueues for t in rq]

    def rq_load(self, core: int) -> float:
        return sum(t.load for t in self.runqueues[core])

    def _least_loaded(self) -> int:
        for c in range(self.cores):
            if not self.runqueues[c]:
                return c
        return min(range(self.cores), key=lambda c: (self.rq_load(c), c))

    def enqueue(self, t: LiveThread) -> None:
        self.refresh_loads(extra=t)
        core = self._least_loaded()
        t.runqueue = core
        self.runqueues[core].append(t)

    def dequeue(self, t: LiveThread) -> None:
        self.runqueues[t.runqueue].remove(t)
        t.runqueue = None

    # -- shares, weights, loads
    def _group_sizes(self) -> dict[tuple, int]:
        sizes: dict[tuple, int] = {}
        for t in self.threads():
            sizes[t.group] = sizes.get(t.group, 0) + 1
        return sizes

    def refresh_loads(self, extra: LiveThread | None = None) -> None:
        threads = self.threads() + ([extra] if extra is not None else [])
        sizes: dict[tuple, int] = {}
        for t in threads:
            sizes[t.group] = sizes.get(t.group, 0) + 1
        for t in threads:
            t.share = compute_share(t.service_share, sizes[t.group])
        total = sum(t.share for t in threads)
        for t in threads:
            t.weight = t.share / total
            t.load = t.runnable_sum * t.weight / t.runnable_period

    # -- balancing
    def _migrate(self, src: int, dst: int) -> bool:
        """Greedily move threads from src to dst while that shrinks their gap."""
        moved = False
        while True:
            gap = self.rq_load(src) - self.rq_load(dst)
            pick = None
            for t in sorted(self.runqueues[src], key=lambda x: (-x.load, x.id)):
                if 0 < t.load < gap:
                    pick = t
                    break
            if pick is None:
                return moved
            self.runqueues[src].remove(pick)
            pick.runqueue = dst
            self.runqueues[dst].append(pick)
            moved = True

    def load_balance(self) -> None:
        self.refresh_loads()
        for level in self.topology.domains:
            for span in level:
                span_cores = [c for g in span for c in g]
                idle = [c for c in span_cores if not self.runqueues[c]]
                me = idle[0] if idle else span_cores[0]
                loads = [sum(self.rq_load(c) for c in g) / len(g) for g in span]
                local = next(i for i, g in enumerate(span) if me in g)
                busiest = max(range(len(span)), key=lambda i: (loads[i], -i))
                if busiest == local or loads[busiest] <= loads[local]:
                    continue
                src = max(span[busiest], key=lambda c: (self.rq_load(c), -c))
                self._migrate(src, me)
        self._idle_pull()

    def _idle_pull(self) -> None:
        while True:
            idle = [c for c in range(self.cores) if not self.runqueues[c]]
            crowded = [c for c in range(self.cores) if len(self.runqueues[c]) >= 2]
            if not idle or not crowded:
                return
            src = max(crowded, key=lambda c: (self.rq_load(c), -c))
            t = min(self.runqueues[src], key=lambda x: (x.load, x.id))
            self.runqueues[src].remove(t)
            t.runqueue = idle[0]
            self.runqueues[idle[0]].append(t)

    # -- rates
    def compute_rates(self) -> None:
        """Set share_ratio, rel_share and instruction rate for every queued thread."""
        sizes = self._group_sizes()
        for t in self.threads():
            t.share = compute_share(t.service_share, sizes[t.group])
        for rq in self.runqueues:
            if not rq:
                continue
            shares = sum(t.share for t in rq)
            maccs = sum(t.model.mem_accesses for t in rq)
            raw = []
            for t in rq:
                n = sizes[t.group]
                cap = t.cpu_limits * FULL_SHARE / 1000.0 / n if t.guaranteed else math.inf
                raw.append(compute_share_ratio(t.share, shares, t.guaranteed, cap))
            for t, ratio in zip(rq, normalise_ratios(raw)):
                m = t.model
                own = 0 if self.options.cmt_include_self else m.mem_accesses
                miss = cache_miss_rate(m, cmc(m.cmc_coeffs, t.cpu_limits, sizes[t.group]), cmt(m.cmt_coeffs, maccs - own))
                t.share_ratio = ratio
                t.rel_share = relative_share(m.cpi, ratio, cycle_penalty(m, miss))
                t.rate = instruction_rate(m.cpi, self.clock_hz, t.rel_share)
