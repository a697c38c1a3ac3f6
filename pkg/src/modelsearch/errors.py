"""Exception types raised across the package."""


class ModelSearchError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSearchSpaceError(ModelSearchError):
    """A search-space declaration violates its invariants."""


class DatasetError(ModelSearchError):
    """A dataset file or matrix violates the dense-format contract."""


class SchedulingError(ModelSearchError):
    """A scheduling request is malformed or infeasible."""


class ProfilingError(ModelSearchError):
    """Profiling could not produce duration estimates."""


class TrainingError(ModelSearchError):
    """A trainer rejected its configuration or input data."""


class UnknownAlgorithmError(ModelSearchError):
    """An algorithm key is not present in the trainer registry."""


class MetricError(ModelSearchError):
    """An evaluation metric is undefined or mismatched for its inputs."""


class ConfigError(ModelSearchError):
    """A search configuration file could not be parsed or validated."""


class PluginError(ModelSearchError):
    """Base class for plugin subprocess failures."""


class PluginProtocolError(PluginError):
    """A plugin violated the wire protocol (framing, handshake, schema)."""


class PluginTaskError(PluginError):
    """A plugin reported a per-request error; the handle stays usable."""


class PluginTimeoutError(PluginError):
    """A plugin did not reply within the deadline; the handle is dead."""


class PluginDeadError(PluginError):
    """The plugin subprocess exited or its pipes closed unexpectedly."""
