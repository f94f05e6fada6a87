"""Exception taxonomy. ``exit_code`` drives the CLI process exit status:
1 input error, 2 numeric/regime error, 3 I/O error."""


class ModalStrengthError(Exception):
    exit_code = 2


class InputError(ModalStrengthError):
    """Invalid user input: schema violations, bad references, dimension mismatch."""

    exit_code = 1


class TopologyError(InputError):
    """Disconnected network or otherwise unusable graph."""


class ConsistencyError(InputError):
    """Declared device parameters contradict the homogeneous structure."""


class NumericError(ModalStrengthError):
    """Numerical failure in an otherwise valid problem."""

    exit_code = 2


class ReductionError(NumericError):
    """Singular interior block during network reduction."""


class PowerFlowDivergenceError(NumericError):
    """Newton iteration failed to converge."""


class RegimeError(NumericError):
    """Problem left the supported regime (e.g. complex pencil spectrum)."""


class DegeneracyError(NumericError):
    """Degenerate or defective pencil (e.g. multiple zero eigenvalues)."""


class ObservabilityError(NumericError):
    """Mode unobservable/uncontrollable at the requested bus pair."""


class BridgeViolationError(NumericError):
    """gSCR / modal-spring sign equivalence violated."""


class IntegratorError(NumericError):
    """Fixed-step integration became unstable for a nominally stable system."""


class OutputError(ModalStrengthError):
    """Filesystem failure while emitting results."""

    exit_code = 3
