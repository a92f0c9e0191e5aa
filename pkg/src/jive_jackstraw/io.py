"""Matrix CSV ingestion and writing.

Format: UTF-8 CSV, first row = case IDs (corner cell ignored), first column
= feature names, cell (i, j) = value.  Scientific notation accepted.  Floats
are written with repr so files round-trip bit-exactly and contain no
locale-dependent formatting.
"""

import csv
import os

import numpy as np

from .ajive import DataBlock

__all__ = [
    "read_block_csv",
    "write_block_csv",
    "write_matrix_csv",
    "read_labels_csv",
    "write_labels_csv",
]


def read_block_csv(path, name=None):
    """Load one data block, streaming row by row."""
    if name is None:
        name = os.path.splitext(os.path.basename(path))[0]
    feature_names = []
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise ValueError(f"{path}: need a header row with at least one case id")
        case_ids = [c.strip() for c in header[1:]]
        width = len(case_ids)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width + 1:
                raise ValueError(
                    f"{path}:{lineno}: expected {width + 1} cells, got {len(row)}"
                )
            feature_names.append(row[0].strip())
            try:
                rows.append(np.asarray(row[1:], dtype=np.float64))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return DataBlock(
        name=name,
        matrix=np.vstack(rows),
        feature_names=feature_names,
        case_ids=case_ids,
    )


def write_matrix_csv(path, matrix, row_names, col_names, corner=""):
    """Write a labeled matrix; floats via repr for exact round-trips."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got ndim={matrix.ndim}")
    if matrix.shape != (len(row_names), len(col_names)):
        raise ValueError(
            f"matrix shape {matrix.shape} does not match "
            f"{len(row_names)} row names x {len(col_names)} column names"
        )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([corner] + [str(c) for c in col_names])
        for rname, row in zip(row_names, matrix):
            writer.writerow([str(rname)] + [repr(float(v)) for v in row])


def write_block_csv(block, path):
    """Write a DataBlock in the block CSV format."""
    write_matrix_csv(path, block.matrix, block.feature_names, block.case_ids)


def read_labels_csv(path):
    """Read a two-column (case_id, label) CSV with a header row.

    Returns (case_ids, labels) in file order.
    """
    case_ids = []
    labels = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise ValueError(f"{path}: need a header row with two columns")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected two cells")
            case_ids.append(row[0].strip())
            labels.append(row[1].strip())
    if not case_ids:
        raise ValueError(f"{path}: no label rows")
    return case_ids, labels


def write_labels_csv(path, case_ids, labels):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["case_id", "label"])
        for cid, lab in zip(case_ids, labels):
            writer.writerow([str(cid), str(lab)])
