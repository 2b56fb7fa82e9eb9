import numpy as np
import pytest

from screenaudit.errors import SchemaError
from screenaudit.io import (dumps, read_dataset, read_schema, read_world, write_dataset, write_schema,
                            write_world)
from screenaudit.scenarios import ScenarioSpec, generate, random_world


def test_dataset_roundtrip_with_censoring(tmp_path):
    sc = generate(ScenarioSpec("selective_labels", n=200, seed=1))
    write_dataset(tmp_path / "d.csv", sc.data)
    write_schema(tmp_path / "s.json", sc.data.schema)
    back = read_dataset(tmp_path / "d.csv", read_schema(tmp_path / "s.json"))
    assert back.ids == sc.data.ids
    np.testing.assert_array_equal(back.X, sc.data.X)
    np.testing.assert_array_equal(back.outcome("productivity"), sc.data.outcome("productivity"))
    assert "NA" in (tmp_path / "d.csv").read_text()


def test_comment_lines_skipped(tmp_path):
    sc = generate(ScenarioSpec("false_arrests", n=20, seed=0))
    write_dataset(tmp_path / "d.csv", sc.data)
    text = "# produced elsewhere\n" + (tmp_path / "d.csv").read_text()
    (tmp_path / "d.csv").write_text(text)
    assert read_dataset(tmp_path / "d.csv", sc.data.schema).n == 20


def test_bad_cells(tmp_path):
    sc = generate(ScenarioSpec("false_arrests", n=5, seed=0))
    write_dataset(tmp_path / "d.csv", sc.data)
    lines = (tmp_path / "d.csv").read_text().splitlines()
    lines[1] = lines[1].replace(",", ",x", 1)
    (tmp_path / "d.csv").write_text("\n".join(lines))
    with pytest.raises(SchemaError):
        read_dataset(tmp_path / "d.csv", sc.data.schema)


def test_out_of_range_category(tmp_path):
    sc = generate(ScenarioSpec("false_arrests", n=5, seed=0))
    write_dataset(tmp_path / "d.csv", sc.data)
    header, *rows = (tmp_path / "d.csv").read_text().splitlines()
    cells = rows[0].split(",")
    cells[2] = "9"
    (tmp_path / "d.csv").write_text("\n".join([header, ",".join(cells), *rows[1:]]))
    with pytest.raises(SchemaError):
        read_dataset(tmp_path / "d.csv", sc.data.schema)


def test_world_roundtrip(tmp_path):
    w = random_world(8)
    write_world(tmp_path / "w.json", w)
    back = read_world(tmp_path / "w.json")
    assert back.digest() == w.digest()


def test_dumps_is_strict_json():
    text = dumps({"a": np.float64(np.nan), "b": np.arange(3), "c": (1.5, np.int64(2))})
    assert text == '{\n  "a": null,\n  "b": [\n    0,\n    1,\n    2\n  ],\n  "c": [\n    1.5,\n    2\n  ]\n}\n'
