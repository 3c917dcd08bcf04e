"""Exception hierarchy shared across the package."""


class FameError(Exception):
    """Base class for all package-specific errors."""


class UnknownCountryError(FameError):
    """Raised when a country code or name cannot be resolved."""


class EventStoreError(FameError):
    pass


class CorpusError(FameError):
    pass


class LexiconError(FameError):
    pass


class MatcherError(FameError):
    pass


class LlmError(FameError):
    pass


class TransportError(LlmError):
    """Raised when the LLM endpoint stays unreachable after retries."""


class EvalError(FameError):
    pass


class RegressionError(FameError):
    pass


class ConfigError(FameError):
    pass
