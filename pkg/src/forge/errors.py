"""Exception types shared across the forge toolkit."""


class ForgeError(Exception):
    """Base class for all forge errors."""


class StatuteParseError(ForgeError):
    """Raised when a statute source document is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TreeIntegrityError(ForgeError):
    """A path or node does not belong to the tree it was used with."""


class IntegrityError(ForgeError):
    """Internally inconsistent data (e.g. mismatched rollout array lengths)."""


class TemplateError(ForgeError):
    """Prompt template rendering failed (missing or undeclared slot)."""


class TransportError(ForgeError):
    """The chat-completion backend stayed unreachable after all retries."""


class ProtocolError(ForgeError):
    """The backend answered, but not in the chat-completion wire shape."""


class CaseValidationError(ForgeError):
    """A generated case did not satisfy the five-field schema."""

    def __init__(self, message: str, keys: list[str] | None = None):
        self.keys = keys or []
        super().__init__(message)


class PipelineError(ForgeError):
    """A whole generation batch failed; carries the rejects log path."""

    def __init__(self, message: str, rejects_path=None):
        self.rejects_path = rejects_path
        super().__init__(message)


class ConfigError(ForgeError):
    """An invalid configuration value."""


class EvaluationError(ForgeError):
    """Scoring input did not satisfy the harness preconditions."""


class IngestionError(ForgeError):
    """A safety-dataset file could not be normalized."""


class ExtrapolationParseError(ForgeError):
    """A generated extrapolation response was missing a required section."""


class AnnotationError(ForgeError):
    """Invalid annotation-service request (bad rating, unknown session...)."""


class SessionNotFoundError(AnnotationError):
    """The referenced annotation session does not exist."""
