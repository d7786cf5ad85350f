"""Reading and writing of data files, artifacts and reports."""

from .artifacts import (
    ConvergenceRecord,
    FitArtifact,
    Manifest,
    MatrixPayload,
    TruthDocument,
    build_manifest,
    read_json,
    sha256_file,
    write_json,
)
from .data import read_panel, subject_files, write_edge_list, write_matrix, write_subject_csvs

__all__ = [
    "ConvergenceRecord",
    "FitArtifact",
    "Manifest",
    "MatrixPayload",
    "TruthDocument",
    "build_manifest",
    "read_json",
    "read_panel",
    "sha256_file",
    "subject_files",
    "write_edge_list",
    "write_json",
    "write_matrix",
    "write_subject_csvs",
]
