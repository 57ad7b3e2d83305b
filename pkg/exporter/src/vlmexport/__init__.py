"""Embedding bundle exporter for vision-language checkpoints."""

__version__ = "0.1.0"

from .backends import BACKENDS, BackendError, HFClipBackend, StubBackend, make_backend
from .job import DEFAULT_TEMPLATES, ExportJob, JobError, load_job, scan_imagefolder
from .runner import ExportError, export, validate_with_engine
from .writer import write_bundle_dir

__all__ = [
    "BACKENDS",
    "BackendError",
    "DEFAULT_TEMPLATES",
    "ExportError",
    "ExportJob",
    "HFClipBackend",
    "JobError",
    "StubBackend",
    "export",
    "load_job",
    "make_backend",
    "scan_imagefolder",
    "validate_with_engine",
    "write_bundle_dir",
]
