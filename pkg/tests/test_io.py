import numpy as np
import pytest

from jive_jackstraw.ajive import DataBlock
from jive_jackstraw.io import (
    read_block_csv,
    read_labels_csv,
    write_block_csv,
    write_labels_csv,
    write_matrix_csv,
)


def _block(seed=0, d=7, n=5, name="genes"):
    rng = np.random.default_rng(seed)
    return DataBlock(
        name=name,
        matrix=rng.normal(size=(d, n)),
        feature_names=[f"f{i}" for i in range(d)],
        case_ids=[f"c{j}" for j in range(n)],
    )


def test_block_round_trip_bit_exact(tmp_path):
    block = _block(seed=1)
    path = tmp_path / "genes.csv"
    write_block_csv(block, path)
    loaded = read_block_csv(path)
    assert loaded.name == "genes"
    assert loaded.feature_names == block.feature_names
    assert loaded.case_ids == block.case_ids
    assert np.array_equal(loaded.matrix, block.matrix)


def test_repr_floats_survive(tmp_path):
    # 0.1 + 0.2 is not 0.3; repr output must preserve the exact bits
    value = 0.1 + 0.2
    path = tmp_path / "x.csv"
    write_matrix_csv(path, [[value]], ["f0"], ["c0"])
    loaded = read_block_csv(path)
    assert loaded.matrix[0, 0] == value
    assert repr(value) in path.read_text()


def test_name_defaults_to_filename_stem(tmp_path):
    path = tmp_path / "methylation.csv"
    write_block_csv(_block(name="whatever"), path)
    assert read_block_csv(path).name == "methylation"
    assert read_block_csv(path, name="given").name == "given"


def test_corner_cell_ignored(tmp_path):
    path = tmp_path / "b.csv"
    path.write_text("anything,c0,c1\nf0,1.0,2.0\nf1,3e-1,4.5\n")
    block = read_block_csv(path)
    assert block.case_ids == ["c0", "c1"]
    assert block.feature_names == ["f0", "f1"]
    assert np.array_equal(block.matrix, [[1.0, 2.0], [0.3, 4.5]])


def test_blank_lines_skipped(tmp_path):
    path = tmp_path / "b.csv"
    path.write_text(",c0,c1\nf0,1,2\n\nf1,3,4\n")
    assert read_block_csv(path).matrix.shape == (2, 2)


def test_ragged_row_reports_line_number(tmp_path):
    path = tmp_path / "b.csv"
    path.write_text(",c0,c1\nf0,1,2\nf1,3\n")
    with pytest.raises(ValueError, match=r"b\.csv:3"):
        read_block_csv(path)


def test_non_numeric_cell_reports_line_number(tmp_path):
    path = tmp_path / "b.csv"
    path.write_text(",c0,c1\nf0,1,oops\n")
    with pytest.raises(ValueError, match=r"b\.csv:2"):
        read_block_csv(path)


def test_empty_and_header_only_files_fail(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError, match="header"):
        read_block_csv(empty)
    header_only = tmp_path / "ho.csv"
    header_only.write_text(",c0,c1\n")
    with pytest.raises(ValueError, match="no data rows"):
        read_block_csv(header_only)


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        read_block_csv(tmp_path / "nope.csv")


def test_write_matrix_shape_validation(tmp_path):
    path = tmp_path / "m.csv"
    with pytest.raises(ValueError):
        write_matrix_csv(path, np.ones((2, 2)), ["a"], ["c0", "c1"])
    with pytest.raises(ValueError):
        write_matrix_csv(path, np.ones(4), ["a"], ["c0", "c1"])


def test_labels_round_trip(tmp_path):
    path = tmp_path / "labels.csv"
    write_labels_csv(path, ["c0", "c1", "c2"], ["tumor", "normal", "tumor"])
    case_ids, labels = read_labels_csv(path)
    assert case_ids == ["c0", "c1", "c2"]
    assert labels == ["tumor", "normal", "tumor"]


def test_labels_header_required(tmp_path):
    path = tmp_path / "labels.csv"
    path.write_text("")
    with pytest.raises(ValueError, match="need a header row with two columns"):
        read_labels_csv(path)
    path.write_text("case_id,label\n")
    with pytest.raises(ValueError, match="no label rows"):
        read_labels_csv(path)
    path.write_text("case_id,label\nc0\n")
    with pytest.raises(ValueError, match="expected two cells"):
        read_labels_csv(path)


def test_large_block_reads_quickly(tmp_path):
    # wide expression-style matrix must stream in well under the 10 s budget
    import time

    d, n = 20249, 1038
    rng = np.random.default_rng(0)
    path = tmp_path / "big.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("," + ",".join(f"c{j}" for j in range(n)) + "\n")
        chunk = 512
        for lo in range(0, d, chunk):
            hi = min(lo + chunk, d)
            block = rng.normal(size=(hi - lo, n))
            lines = []
            for i in range(hi - lo):
                row = block[i]
                lines.append(f"f{lo + i}," + ",".join("%.6f" % v for v in row))
            fh.write("\n".join(lines) + "\n")
    start = time.perf_counter()
    loaded = read_block_csv(path)
    elapsed = time.perf_counter() - start
    assert loaded.matrix.shape == (d, n)
    assert elapsed < 10.0, f"ingestion took {elapsed:.2f}s, budget is 10s"
