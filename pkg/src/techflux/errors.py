"""Error types raised by the pipeline.

All of these are ValueError subclasses so callers can catch input problems
with a single except clause; the CLI maps them to exit code 2.
"""


class TechfluxError(ValueError):
    """Base class for input/usage errors raised by techflux modules."""


class CorpusError(TechfluxError):
    pass


class LexiconError(TechfluxError):
    pass


class GraphError(TechfluxError):
    pass


class CommunityError(TechfluxError):
    pass


class TransitionError(TechfluxError):
    pass


class StatsError(TechfluxError):
    pass


class SynthError(TechfluxError):
    pass


class ConfigError(TechfluxError):
    pass
