"""Exception hierarchy shared across the framework."""


class OrchError(Exception):
    """Base class for all framework errors."""


class DuplicateToolsetError(OrchError):
    pass


class UnknownToolsetError(OrchError):
    pass


class UnknownToolError(OrchError):
    pass


class TransportFailure(OrchError):
    """Subprocess spawn or protocol handshake failed."""


class SandboxViolation(OrchError):
    """A tool call tried to reach outside its confinement policy."""


class ArgumentValidationError(OrchError):
    """Arguments rejected by the tool's schema before execution."""


class BackendUnreachable(OrchError):
    pass


class UnknownAdapterError(OrchError):
    pass


class ScriptExhaustedError(OrchError):
    """Scripted backend received more requests than it has replies."""


class AdapterMismatchError(OrchError):
    """Scripted backend saw a request for an unexpected adapter."""


class ConstraintViolationError(OrchError):
    """Backend reply could not be coerced to the request constraint."""


class InvalidArgumentsError(OrchError):
    """Argument generation kept failing schema validation after retries."""


class MalformedTrajectoryError(OrchError):
    pass


class GeneratorFailure(OrchError):
    pass


class LintBudgetExhausted(OrchError):
    """Query synthesis could not produce enough lint-clean queries."""


class InsufficientQueriesError(OrchError):
    pass


class MalformedVerdictError(OrchError):
    """LLM judge reply did not match the strict verdict contract."""


class JudgeUnreachableError(OrchError):
    pass
