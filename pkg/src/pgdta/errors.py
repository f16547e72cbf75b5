"""Exception hierarchy.

Every failure the engine reports is a subclass of :class:`PgdtaError`; the
class name doubles as the machine-readable error name printed by the CLI.
"""


class PgdtaError(Exception):
    """Base class for all engine errors."""

    #: CLI exit code used when this error escapes a command.
    exit_code = 2

    @property
    def name(self):
        return type(self).__name__


# -- smiles ------------------------------------------------------------------

class SmilesError(PgdtaError, ValueError):
    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class EmptyInput(SmilesError):
    pass


class UnbalancedParentheses(SmilesError):
    pass


class UnmatchedRingClosure(SmilesError):
    pass


class UnknownElement(SmilesError):
    pass


class MalformedBracketAtom(SmilesError):
    pass


class DisconnectedMolecule(SmilesError):
    pass


class NonRingAromatic(SmilesError):
    pass


class MisplacedBond(SmilesError):
    pass


# -- tensor ------------------------------------------------------------------

class TensorError(PgdtaError, ValueError):
    exit_code = 3


class ShapeMismatch(TensorError):
    pass


class AllMaskedRow(TensorError):
    pass


class EmptyAxis(TensorError):
    pass


class NonScalarOutput(TensorError):
    pass


class EmptyGraph(TensorError):
    pass


# -- protein -----------------------------------------------------------------

class InvalidResidue(PgdtaError, ValueError):
    pass


class EmbeddingFormatError(PgdtaError, ValueError):
    pass


class BadMagic(EmbeddingFormatError):
    pass


class DimMismatch(EmbeddingFormatError):
    pass


class TruncatedFile(EmbeddingFormatError):
    pass


class DuplicateId(EmbeddingFormatError):
    pass


# -- contact -----------------------------------------------------------------

class NoAtomRecords(PgdtaError, ValueError):
    pass


class MalformedAtomLine(PgdtaError, ValueError):
    pass


class MatrixFormatError(PgdtaError, ValueError):
    """Plain-text matrix file could not be parsed."""


class MatrixInvariantError(PgdtaError, ValueError):
    exit_code = 3


class NotSquare(MatrixInvariantError):
    pass


class OutOfRange(MatrixInvariantError):
    pass


class NotSymmetric(MatrixInvariantError):
    pass


# -- model / train / data ----------------------------------------------------

class MissingInput(PgdtaError, ValueError):
    pass


class LengthMismatch(PgdtaError, ValueError):
    pass


class EmptyBatch(PgdtaError, ValueError):
    pass


class CheckpointError(PgdtaError, ValueError):
    pass


class UnresolvableSample(PgdtaError, ValueError):
    def __init__(self, message, sample_id=None):
        super().__init__(message)
        self.sample_id = sample_id


class EmptyDataset(PgdtaError, ValueError):
    pass


class MissingProtein(PgdtaError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class MalformedRow(PgdtaError, ValueError):
    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class NonPositiveKd(PgdtaError, ValueError):
    pass


class DegenerateSplit(PgdtaError, ValueError):
    pass


class ConfigError(PgdtaError, ValueError):
    exit_code = 1
