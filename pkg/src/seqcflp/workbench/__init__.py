"""Instance generation, file formats, and report emission."""

from .generate import GeneratorSpec, SplitMix64, generate_instance, weights_from_geometry
from .io import (
    InstanceFormatError,
    document_from_instance,
    instance_from_document,
    read_document,
    read_instance,
    write_instance,
)

__all__ = [
    "GeneratorSpec",
    "SplitMix64",
    "generate_instance",
    "weights_from_geometry",
    "InstanceFormatError",
    "document_from_instance",
    "instance_from_document",
    "read_document",
    "read_instance",
    "write_instance",
]
