"""Exception hierarchy shared by every splatscene module."""


class SplatSceneError(Exception):
    """Base class for all domain failures (CLI exit code 1)."""


class DomainError(SplatSceneError, ValueError):
    """A precondition of an operation was violated."""


class PlyFormatError(SplatSceneError):
    """A PLY payload could not be decoded."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class PlyEncodeError(SplatSceneError):
    """A cloud holds values the PLY encoding cannot represent."""

    def __init__(self, message: str, field: str = "", index: int | None = None):
        where = field if index is None else f"{field}[{index}]"
        super().__init__(f"{where}: {message}" if where else message)
        self.field = field
        self.index = index


class SchemaError(SplatSceneError):
    """A planning document does not match its schema."""


class ContradictoryRelationsError(SchemaError, DomainError):
    """Two relation edges between the same pair cannot both hold."""


class TemplateError(SplatSceneError):
    """A prompt template is malformed or could not be fully rendered."""


class PlannerError(SplatSceneError):
    """Base class for planner client failures."""


class PlannerNetworkError(PlannerError):
    """The planner endpoint could not be reached or answered with an HTTP error."""


class MissingCredentialError(PlannerError):
    """The environment variable holding the planner key is unset."""


class InvalidPlanError(PlannerError):
    """The planner reply could not be interpreted as a chat completion."""


class RetryExhaustedError(PlannerError):
    """Every attempt for one planning document failed validation."""

    def __init__(self, document: str, attempts: int, last_error: str):
        super().__init__(
            f"{document}: no valid document after {attempts} attempt(s): {last_error}"
        )
        self.document = document
        self.attempts = attempts
        self.last_error = last_error


class InfeasibleLayoutError(SplatSceneError):
    """No admissible position exists for an instance."""

    def __init__(self, instance: str, detail: str = ""):
        msg = f"no feasible placement for '{instance}'"
        super().__init__(f"{msg}: {detail}" if detail else msg)
        self.instance = instance


class UnknownInstanceError(SplatSceneError, KeyError):
    """An instance id is not part of the graph, layout or package."""

    def __init__(self, instance: str):
        super().__init__(f"unknown instance '{instance}'")
        self.instance = instance

    def __str__(self) -> str:
        return str(self.args[0])
