"""Exception hierarchy. Each class carries a stable ``code`` used by the CLI."""


class ScreenAuditError(Exception):
    code = "error"


class SchemaError(ScreenAuditError, ValueError):
    code = "schema_mismatch"


class InsufficientDataError(ScreenAuditError, ValueError):
    code = "insufficient_data"


class ParameterError(ScreenAuditError, ValueError):
    code = "invalid_parameter"


class EvaluationError(ScreenAuditError, ValueError):
    code = "evaluation_failed"

    def __init__(self, message: str, cell: int | None = None):
        super().__init__(message)
        self.cell = cell


class TrainingError(ScreenAuditError, RuntimeError):
    code = "training_failed"

    def __init__(self, message: str, last_params=None, iteration: int | None = None):
        super().__init__(message)
        self.last_params = last_params
        self.iteration = iteration


class SelectionError(ScreenAuditError, ValueError):
    code = "selection_infeasible"
