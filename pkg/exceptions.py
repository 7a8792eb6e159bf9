"""
Exception hierarchy with error codes and context for the reduction toolkit
"""

from enum import Enum
from typing import Any, Dict, Optional


class ErrorCode(str, Enum):
    """Error code enum for consistency"""

    INVALID_PARAMETER = "INVALID_PARAMETER"
    RESOURCE_NOT_FOUND = "RESOURCE_NOT_FOUND"
    PORE_TOUCHES_BOUNDARY = "PORE_TOUCHES_BOUNDARY"
    UNMATCHED_BOUNDARY_NODE = "UNMATCHED_BOUNDARY_NODE"
    NON_POSITIVE_JACOBIAN = "NON_POSITIVE_JACOBIAN"
    NO_CONVERGENCE = "NO_CONVERGENCE"
    RANK_DEFICIENT = "RANK_DEFICIENT"
    CLUSTERING_FAILED = "CLUSTERING_FAILED"
    DISCONNECTED_GRAPH = "DISCONNECTED_GRAPH"
    ZERO_DEGREE_NODE = "ZERO_DEGREE_NODE"
    SINGULAR_LOCAL_SYSTEM = "SINGULAR_LOCAL_SYSTEM"
    RANK_DEFICIENT_EMBEDDING = "RANK_DEFICIENT_EMBEDDING"
    SINGULAR_NEIGHBORHOOD = "SINGULAR_NEIGHBORHOOD"
    ZERO_REFERENCE = "ZERO_REFERENCE"
    INTERNAL_ERROR = "INTERNAL_ERROR"


class ApplicationError(Exception):
    """Base application exception with error codes and context"""

    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        error_code: ErrorCode = ErrorCode.INTERNAL_ERROR,
        context: Optional[Dict[str, Any]] = None,
    ):
        self.message = message
        self.exit_code = exit_code
        self.error_code = error_code
        self.context = context or {}
        super().__init__(self.message)

    def with_context(self, **context: Any) -> "ApplicationError":
        """Attach more context (load step, path id, ...) while propagating"""
        self.context.update(context)
        return self

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to dictionary for machine-readable output"""
        return {
            "error": self.message,
            "error_code": self.error_code.value,
            "exit_code": self.exit_code,
            "context": self.context if self.context else None,
        }

    def to_line(self) -> str:
        """Single-line ``ERROR <code>: <detail>`` form used by the CLI"""
        detail = self.message
        if self.context:
            pairs = " ".join(f"{k}={v}" for k, v in sorted(self.context.items()))
            detail = f"{detail} [{pairs}]"
        return f"ERROR {self.error_code.value}: {detail}"


class InvalidParameterError(ApplicationError):
    """Precondition violated by caller-supplied parameters"""

    def __init__(self, message: str, context: Optional[Dict] = None):
        super().__init__(
            message,
            exit_code=1,
            error_code=ErrorCode.INVALID_PARAMETER,
            context=context,
        )


class ResourceNotFoundError(ApplicationError):
    """Artifact file not found"""

    def __init__(self, message: str, context: Optional[Dict] = None):
        super().__init__(
            message,
            exit_code=1,
            error_code=ErrorCode.RESOURCE_NOT_FOUND,
            context=context,
        )


class PoreTouchesBoundaryError(ApplicationError):
    """A pore sphere intersects the outer RVE surface"""

    def __init__(self, message: str, context: Optional[Dict] = None):
        super().__init__(
            message, error_code=ErrorCode.PORE_TOUCHES_BOUNDARY, context=context
        )


class UnmatchedBoundaryNodeError(ApplicationError):
    """A plus-face node has no periodic partner"""

    def __init__(self, message: str, context: Optional[Dict] = None):
        super().__init__(
            message, error_code=ErrorCode.UNMATCHED_BOUNDARY_NODE, context=context
        )


class NonPositiveJacobianError(ApplicationError):
    """Inverted element (det F <= 0 or det J <= 0)"""

    def __init__(self, message: str, context: Optional[Dict] = None):
        super().__init__(
            message, error_code=ErrorCode.NON_POSITIVE_JACOBIAN, context=context
        )


class NoConvergenceError(ApplicationError):
    """Newton iteration budget exhausted"""

    def __init__(
        self,
        message: str,
        step: Optional[int] = None,
        iteration: Optional[int] = None,
        residual: Optional[float] = None,
        context: Optional[Dict] = None,
    ):
        super().__init__(
            message,
            error_code=ErrorCode.NO_CONVERGENCE,
            context={
                **(context or {}),
                "step": step,
                "iteration": iteration,
                "residual": residual,
            },
        )
        self.step = step
        self.iteration = iteration
        self.residual = residual


class RankDeficientError(ApplicationError):
    """Requested basis size exceeds the numerical rank of the snapshots"""

    def __init__(self, message: str, context: Optional[Dict] = None):
        super().__init__(message, error_code=ErrorCode.RANK_DEFICIENT, context=context)


class ClusteringFailedError(ApplicationError):
    """Lloyd restarts exhausted without meeting the core cluster size"""

    def __init__(self, message: str, context: Optional[Dict] = None):
        super().__init__(
            message, error_code=ErrorCode.CLUSTERING_FAILED, context=context
        )


class DisconnectedGraphError(ApplicationError):
    """Neighbour graph has more than one connected component"""

    def __init__(
        self, message: str, components: int, context: Optional[Dict] = None
    ):
        super().__init__(
            message,
            error_code=ErrorCode.DISCONNECTED_GRAPH,
            context={**(context or {}), "components": components},
        )
        self.components = components


class ZeroDegreeNodeError(ApplicationError):
    """Graph node without any weighted edge"""

    def __init__(self, message: str, context: Optional[Dict] = None):
        super().__init__(
            message, error_code=ErrorCode.ZERO_DEGREE_NODE, context=context
        )


class SingularLocalSystemError(ApplicationError):
    """Regularised local reconstruction system could not be solved"""

    def __init__(self, message: str, context: Optional[Dict] = None):
        super().__init__(
            message, error_code=ErrorCode.SINGULAR_LOCAL_SYSTEM, context=context
        )


class RankDeficientEmbeddingError(ApplicationError):
    """Embedding rows are linearly dependent"""

    def __init__(self, message: str, context: Optional[Dict] = None):
        super().__init__(
            message, error_code=ErrorCode.RANK_DEFICIENT_EMBEDDING, context=context
        )


class SingularNeighborhoodError(ApplicationError):
    """Too few or collapsed neighbours for a local linearisation"""

    def __init__(self, message: str, context: Optional[Dict] = None):
        super().__init__(
            message, error_code=ErrorCode.SINGULAR_NEIGHBORHOOD, context=context
        )


class ZeroReferenceError(ApplicationError):
    """Reference solution with vanishing norm in an error metric"""

    def __init__(self, message: str, context: Optional[Dict] = None):
        super().__init__(message, error_code=ErrorCode.ZERO_REFERENCE, context=context)
