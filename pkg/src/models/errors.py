"""
Exception hierarchy

Validation errors subclass ValueError so callers that only know the
standard library still catch them; the CLI maps them to exit code 1.
"""


class EntailKitError(Exception):
    """Base class for every error raised by entailkit"""


class EntailKitValidationError(EntailKitError, ValueError):
    """Input, config or artifact failed validation"""


class ShapeMismatchError(EntailKitValidationError):
    """A primitive received operands with incompatible shapes"""

    def __init__(self, op: str, shapes: dict[str, tuple[int, ...]]):
        self.op = op
        self.shapes = shapes
        described = ", ".join(f"{name}={tuple(shape)}" for name, shape in shapes.items())
        super().__init__(f"Shape mismatch in '{op}': {described}")


class ConfigError(EntailKitValidationError):
    """Unknown key, bad type or out-of-range configuration value"""


class CorpusValidationError(EntailKitValidationError):
    """Retrieval corpus violates referential integrity"""


class DanglingIdError(CorpusValidationError):
    """A record references an id that does not exist"""


class DuplicateIdError(CorpusValidationError):
    """The same id is declared twice"""


class MissingImageError(CorpusValidationError):
    """An image record points at a file that does not exist"""


class ExampleValidationError(EntailKitValidationError):
    """An entailment example violates the task-form invariants"""


class PlanValidationError(EntailKitValidationError):
    """A batch plan violates the regular/weak alternation law"""


class CheckpointFormatError(EntailKitValidationError):
    """A checkpoint file is truncated or carries the wrong magic header"""


class KappaUndefinedError(EntailKitValidationError):
    """Fleiss' kappa is undefined for the given rating matrix"""


class PrecisionError(EntailKitValidationError):
    """A finite-difference check was requested outside float64 mode"""


class DivergenceError(EntailKitError, RuntimeError):
    """Training produced a non-finite loss"""
