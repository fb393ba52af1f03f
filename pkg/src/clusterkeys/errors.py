"""Exception hierarchy shared by the simulator modules."""


class ClusterKeysError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(ClusterKeysError, ValueError):
    """Invalid configuration or out-of-domain argument."""


class ClusteringError(ClusterKeysError):
    """k-means++ seeding could not place the requested number of centers."""


class RouteFailure(ClusterKeysError):
    """A query could not be delivered.

    Routing failures are expected outcomes of the simulation, so callers
    normally catch this and record ``reason`` rather than aborting.
    """

    reason = "failure"

    def __init__(self, message: str, partial: list | None = None):
        super().__init__(message)
        self.partial = list(partial or [])


class DeadEnd(RouteFailure):
    reason = "dead_end"


class LoopGuard(RouteFailure):
    reason = "loop_guard"


class ControllerDisconnected(RouteFailure):
    reason = "controller_disconnected"


class GreedyTailFailure(RouteFailure):
    reason = "greedy_tail_failure"
