import json

import numpy as np
import pytest

from semelbow.errors import InvalidInputError, ParseError
from semelbow.fileio import (
    DatasetSpec,
    Orientation,
    RunConfig,
    dumps_json,
    export_graph,
    import_graph_json,
    load_dataset,
    meta_block,
    read_curve_csv,
    write_csv,
    write_dataset,
)
from semelbow.matrix_core import GraphSignalMatrix, symmetrize_hollow


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_load_observation_rows(tmp_path):
    p = write(tmp_path, "a,b,Arousal,Valence\n1,2,3,4\n5,6,7,8\n")
    x = load_dataset(DatasetSpec(p))
    assert x.node_names == ("a", "b", "Arousal", "Valence")
    assert x.output_nodes == {2, 3}
    np.testing.assert_array_equal(x.data, [[1, 5], [2, 6], [3, 7], [4, 8]])


def test_load_feature_rows(tmp_path):
    p = write(tmp_path, "name,o1,o2\na,1,5\nb,2,6\nArousal,3,7\nValence,4,8\n")
    x = load_dataset(DatasetSpec(p, Orientation.ROWS_ARE_FEATURES, "Arousal,Valence"))
    assert x.node_names == ("a", "b", "Arousal", "Valence")
    np.testing.assert_array_equal(x.data, [[1, 5], [2, 6], [3, 7], [4, 8]])


def test_orientations_agree(tmp_path):
    a = load_dataset(DatasetSpec(write(tmp_path, "a,b,c\n1,2,3\n4,5,6\n", "a.csv")))
    b = load_dataset(DatasetSpec(write(tmp_path, "_,1,2\na,1,4\nb,2,5\nc,3,6\n", "b.csv"), "features"))
    np.testing.assert_array_equal(a.data, b.data)
    assert a.output_nodes == b.output_nodes == {1, 2}


def test_parse_error_location(tmp_path):
    rows = ["a,b,c"] + ["1,2,3"] * 4 + ["1,oops,3"]
    p = write(tmp_path, "\n".join(rows) + "\n")
    with pytest.raises(ParseError) as info:
        load_dataset(DatasetSpec(p))
    assert (info.value.row, info.value.col) == (5, 2)
    assert "(row=5, col=2)" in str(info.value)


def test_ragged_row(tmp_path):
    with pytest.raises(ParseError) as info:
        load_dataset(DatasetSpec(write(tmp_path, "a,b,c\n1,2,3\n1,2\n")))
    assert info.value.row == 2


def test_non_finite_cell(tmp_path):
    with pytest.raises(ParseError):
        load_dataset(DatasetSpec(write(tmp_path, "a,b\n1,nan\n2,3\n")))


def test_missing_output_column(tmp_path):
    with pytest.raises(ParseError):
        load_dataset(DatasetSpec(write(tmp_path, "a,b\n1,2\n"), output_columns="zz"))
    with pytest.raises(InvalidInputError):
        load_dataset(DatasetSpec(write(tmp_path, "a,b\n1,2\n", "e.csv"), output_columns="last:3"))


def test_normalize(tmp_path):
    x = load_dataset(DatasetSpec(write(tmp_path, "a,b\n1,10\n3,10\n5,10\n"), normalize=True))
    np.testing.assert_allclose(x.data.mean(axis=1), 0, atol=1e-15)
    np.testing.assert_allclose(x.data[0].std(), 1.0)
    assert x.transform[1] == (10.0, 1.0)  # constant row keeps unit scale


def test_dataset_roundtrip(tmp_path):
    x = GraphSignalMatrix(np.random.default_rng(0).standard_normal((4, 7)), ("p", "q", "Arousal", "Valence"))
    write_dataset(x, tmp_path / "x.csv")
    y = load_dataset(DatasetSpec(str(tmp_path / "x.csv")))
    np.testing.assert_array_equal(x.data, y.data)
    assert y.node_names == x.node_names


def test_json_is_deterministic_and_nan_safe():
    doc = {"b": 1.0 / 3.0, "a": float("nan"), "c": np.float64(2.5), "d": [np.int64(3)]}
    text = dumps_json(doc)
    assert text == dumps_json(doc)
    assert list(json.loads(text)) == ["b", "a", "c", "d"]
    assert json.loads(text)["a"] is None
    assert json.loads(text)["b"] == 1.0 / 3.0


def test_csv_meta_and_curve_read(tmp_path):
    p = tmp_path / "c.csv"
    write_csv(p, ["z", "v", "lambda"], [(0, 1.0, 3.0), (1, 0.5, 2.0), (2, 0.0, 1.0)], {"tool": "t"})
    assert p.read_text().startswith('# {"tool":"t"}\n')
    assert read_curve_csv(p) == [(0.0, 1.0, 3.0), (1.0, 0.5, 2.0), (2.0, 0.0, 1.0)]


def test_curve_csv_needs_columns(tmp_path):
    p = tmp_path / "c.csv"
    write_csv(p, ["z", "err"], [(0, 1.0)])
    with pytest.raises(ParseError):
        read_curve_csv(p)


def test_graph_json_roundtrip():
    a = symmetrize_hollow(np.array([[0, 0.5, 0], [0.5, 0, -0.25], [0, -0.25, 0]]), [(0, 2)])
    text = export_graph(a, ["x", "y", "z"], "json", meta={"k": 1})
    b, names = import_graph_json(text)
    assert names == ["x", "y", "z"]
    np.testing.assert_array_equal(a.weights, b.weights)
    assert b.forbidden_mask == {(0, 2)}
    assert json.loads(text)["meta"] == {"k": 1, "forbidden": [[0, 2]]}


def test_graph_dot():
    a = symmetrize_hollow(np.array([[0, 0.5, 0], [0.5, 0, -0.25], [0, -0.25, 0]]))
    dot = export_graph(a, ["x", 'y"q', "z"], "dot", outputs=[2], meta={"k": 1})
    assert dot.startswith('// meta: {"k":1}\ngraph G {')
    assert 'n1 [label="y\\"q"]' in dot
    assert "n2 [label=\"z\" style=filled" in dot
    assert "n0 -- n1 [weight=0.5 penwidth=5.000]" in dot
    assert "n1 -- n2 [weight=-0.25 penwidth=2.750]" in dot


def test_graph_bad_format():
    with pytest.raises(InvalidInputError):
        export_graph(symmetrize_hollow(np.zeros((2, 2))), ["a", "b"], "gml")


def test_meta_block():
    m = meta_block(RunConfig("sweep", seed=3, extra={"x": 1}))
    assert m["tool"] == "semelbow" and m["config"] == {"command": "sweep", "seed": 3, "x": 1}
