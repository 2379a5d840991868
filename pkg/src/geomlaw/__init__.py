"""Multivariate geometric distributions with the lack-of-memory property:
construction, exact evaluation, sampling, sequence classification,
extendibility analysis, and dependence measures."""

__version__ = "0.1.0"

from .errors import GeomlawError, NotRepresentableError, ValidationError
from .exchangeable import ExchangeableSeq, SeqRole
from .extendibility import ExtensionInterval, InfDivLaw, LawKind, classify_family
from .sampling import Mixing, RngStream, SampleBatch, partition_stats
from .sequences import SequenceClassReport, classify_sequence
from .shock import NarrowParams, WideParams, validate_narrow, validate_wide

__all__ = [
    "ExchangeableSeq",
    "ExtensionInterval",
    "GeomlawError",
    "InfDivLaw",
    "LawKind",
    "Mixing",
    "NarrowParams",
    "NotRepresentableError",
    "RngStream",
    "SampleBatch",
    "SeqRole",
    "SequenceClassReport",
    "ValidationError",
    "WideParams",
    "classify_family",
    "classify_sequence",
    "partition_stats",
    "validate_narrow",
    "validate_wide",
    "__version__",
]
