import numpy as np
import pytest

from robust_subsample import Dataset, EnvironmentSpec, InvalidArgument, Noise, SeededRng, generate
from robust_subsample.io import dataset_to_csv, dumps_json, read_csv, sidecar_path, write_csv


def test_csv_round_trip_is_exact(tmp_path):
    d = generate(EnvironmentSpec(25, 3, 1, noise=Noise("student_t", 1.0, 3.0)), SeededRng(1))
    path = tmp_path / "d.csv"
    write_csv(d, path)
    back = read_csv(path)
    assert back.x.tobytes() == d.x.tobytes() and back.y.tobytes() == d.y.tobytes()
    assert dataset_to_csv(d).splitlines()[0] == "x1,x2,x3,y"


def test_csv_without_response(tmp_path):
    path = tmp_path / "m.csv"
    write_csv(Dataset([[0.1, 1e-300]]), path)
    back = read_csv(path)
    assert back.y is None and back.x[0, 1] == 1e-300


@pytest.mark.parametrize(
    "text",
    ["", "a,b\n1,2\n", "x1,x2\n", "x1,y\n1,2\n3\n", "x1\nfoo\n", "x2,x1\n1,2\n"],
)
def test_bad_csv_rejected(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(InvalidArgument):
        read_csv(path)


def test_sidecar_path_and_json_stability(tmp_path):
    assert sidecar_path("out/data.csv").name == "data.json"
    assert sidecar_path("out/data.txt").name == "data.txt.json"
    assert dumps_json({"b": 0.1, "a": [1, 2]}) == dumps_json({"a": [1, 2], "b": 0.1})
    with pytest.raises(ValueError):
        dumps_json({"x": float("nan")})
    assert not list(tmp_path.glob(".*.tmp"))
