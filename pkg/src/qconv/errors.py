"""Exception hierarchy shared by every module.

Each domain error carries a stable machine-readable ``code`` that the CLI
emits on stderr (exit status 2).
"""


class QconvError(Exception):
    """Base class for domain errors."""

    code = "QCONV_ERROR"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class DimensionError(QconvError, ValueError):
    code = "DIMENSION"


class LabelError(QconvError, KeyError):
    code = "LABEL"

    def __str__(self):
        # KeyError quotes its argument; keep plain messages
        return str(self.args[0]) if self.args else ""


class SingularError(QconvError, ArithmeticError):
    code = "SINGULAR"


class UnitarityError(QconvError, ValueError):
    code = "NOT_UNITARY"


class NoConstructionError(QconvError):
    code = "NO_CONSTRUCTION"


class OrthogonalityError(QconvError, ValueError):
    code = "NOT_ORTHOGONAL"


class BasisError(QconvError, ValueError):
    code = "BASIS"


class StructureError(QconvError, ValueError):
    code = "STRUCTURE"


class InputError(QconvError, ValueError):
    code = "INPUT"


class BudgetError(QconvError):
    code = "BUDGET"


class FormatError(QconvError, ValueError):
    code = "FORMAT"


class SearchFailed(QconvError):
    """Raised when no restart of a search converges.

    Attributes
    ----------
    best : object
        Best state reached (lowest residual), if any.
    history : list
        Per-restart residual traces.
    """

    code = "SEARCH_FAILED"

    def __init__(self, message, best=None, history=None):
        super().__init__(message)
        self.best = best
        self.history = history if history is not None else []
