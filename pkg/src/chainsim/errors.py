"""Exception hierarchy.

Everything the library raises derives from :class:`ChainsimError`.  Problems
with the input (bad JSON, dangling names, infeasible topologies or
placements) are :class:`ScenarioError`; failures while the event loop runs
are :class:`SimulationError`.  The CLI maps the two families to distinct
exit codes.
"""


class ChainsimError(Exception):
    pass


class ScenarioError(ChainsimError):
    """Base class for every scenario loading or preparation problem."""


class TopologyError(ScenarioError):
    """Host without exactly one router, or a cycle among routers."""


class NoPathError(TopologyError):
    """Two hosts sit in disconnected parts of the topology."""


class GraphError(ScenarioError):
    """A service chain cannot be turned into an alternative graph."""


class UnschedulableError(ScenarioError):
    """A replica found no eligible host after the requeue pass."""


class SimulationError(ChainsimError):
    pass


class DomainError(SimulationError):
    """A logarithmic cache-miss correction was evaluated outside its domain."""


class ConfigError(SimulationError):
    """A thread needs a resource that has zero capacity (e.g. blkio bandwidth)."""


class StalledTransferError(SimulationError):
    """A transmission with bytes left has zero available bandwidth."""


class DeadlockError(SimulationError):
    """Work is in flight but no event can make progress."""


class SimulationTimeout(SimulationError):
    """In-flight work did not drain before the configured cap."""
