"""CSV ingestion of subject data and export of edge lists and matrices."""

import re
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..core.panel import TimeSeriesPanel, build_panel
from ..exceptions import IngestionError, InvalidInputError
from ..utils.logging import get_logger

logger = get_logger(__name__)

SUBJECT_PATTERN = re.compile(r"^subject_(\d+)\.csv$")
FLOAT_FORMAT = "%.17g"


def subject_files(data_dir: Union[str, Path]) -> List[Path]:
    """Subject CSV files of a directory in numeric order of their index."""
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise IngestionError(f"Data directory {data_dir} does not exist", files=[str(data_dir)])
    matched = []
    for path in data_dir.iterdir():
        match = SUBJECT_PATTERN.match(path.name)
        if match:
            matched.append((int(match.group(1)), path))
    if not matched:
        raise IngestionError(f"No subject_<k>.csv files in {data_dir}", files=[str(data_dir)])
    return [path for _, path in sorted(matched)]


def read_panel(data_dir: Union[str, Path], standardize: bool = True) -> Tuple[TimeSeriesPanel, List[Path]]:
    """
    Read every subject file of a directory into a panel.

    The first row of each file holds the ROI names, which must agree across files.

    Args:
        data_dir: Directory with subject_<k>.csv files
        standardize: Scale columns to unit standard deviation

    Returns:
        The panel and the files in subject order

    Raises:
        IngestionError: On missing files, header mismatches, non-numeric values
            or data that fails panel construction
    """
    files = subject_files(data_dir)
    frames = []
    for path in files:
        try:
            frames.append(pd.read_csv(path))
        except (OSError, ValueError, pd.errors.ParserError) as e:
            raise IngestionError(f"Cannot read {path.name}: {e}", files=[str(path)]) from e

    header = list(frames[0].columns)
    mismatched = [str(path) for path, frame in zip(files, frames) if list(frame.columns) != header]
    if mismatched:
        raise IngestionError(
            f"Header of {', '.join(Path(f).name for f in mismatched)} differs from {files[0].name}",
            files=[str(files[0])] + mismatched,
        )

    matrices = []
    for path, frame in zip(files, frames):
        try:
            matrices.append(frame.apply(pd.to_numeric, errors="raise").to_numpy(dtype=float))
        except (ValueError, TypeError) as e:
            raise IngestionError(f"{path.name} contains non-numeric values: {e}", files=[str(path)]) from e

    try:
        panel = build_panel(matrices, standardize=standardize, roi_names=[str(c) for c in header])
    except InvalidInputError as e:
        raise IngestionError(f"Invalid subject data in {data_dir}: {e}", files=[str(p) for p in files]) from e
    logger.info(f"Read {panel.K} subjects with p={panel.p} from {data_dir}")
    return panel, files


def write_subject_csvs(
    out_dir: Union[str, Path],
    matrices: Sequence[np.ndarray],
    roi_names: Sequence[str],
) -> List[Path]:
    """Write one subject_<k>.csv per matrix with an ROI header row."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, data in enumerate(matrices):
        path = out_dir / f"subject_{k}.csv"
        pd.DataFrame(np.asarray(data), columns=list(roi_names)).to_csv(
            path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
        )
        paths.append(path)
    return paths


def write_edge_list(path: Union[str, Path], precision: np.ndarray, threshold: float = 1e-8) -> Path:
    """Write the nonzero upper-triangle entries as ``node_i, node_j, weight`` rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    M = np.asarray(precision)
    rows, cols = np.nonzero(np.triu(np.abs(M) > threshold, k=1))
    frame = pd.DataFrame({"node_i": rows, "node_j": cols, "weight": M[rows, cols]})
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def write_matrix(path: Union[str, Path], matrix: np.ndarray, names: Optional[Sequence[str]] = None) -> Path:
    """Write a square matrix with variable names as header and index."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    M = np.asarray(matrix)
    labels = list(names) if names is not None else [str(i) for i in range(M.shape[0])]
    pd.DataFrame(M, index=labels, columns=labels).to_csv(path, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path
