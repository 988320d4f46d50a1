import json
from fractions import Fraction

import pytest

from nestcast.errors import ModelValidationError
from nestcast.model import (
    build_special_case,
    load_model,
    model_to_dict,
    reachable_trajectory_support,
    save_model,
    validate_model,
)


def minimal_raw():
    return {
        "alphabets": {"U": 2, "V": 2, "X": 2, "Y": 2, "Z": 2},
        "horizon": 1,
        "source": {
            "initial": ["1/4", "1/4", "1/4", "1/4"],
            "transition": [["1", "0", "0", "0"]] * 4,
        },
        "channel": {
            "inner": [["1", "0"], ["0", "1"]],
            "outer": [["1", "0"], ["0", "1"]],
        },
        "distortion": {
            "rho_max": "1",
            "rho1": [[["0", "1"], ["1", "0"]]],
            "rho2": [[["0", "1"], ["1", "0"]]],
        },
    }


def test_validate_accepts_minimal():
    model = validate_model(minimal_raw())
    assert model.ns == 4
    assert model.trajectory_count() == 16
    assert model.source.initial[0] == Fraction(1, 4)


def test_validate_rejects_nonstochastic_row():
    raw = minimal_raw()
    raw["source"]["initial"] = ["1/2", "1/4", "1/4", "1/4"]
    with pytest.raises(ModelValidationError, match="source.initial"):
        validate_model(raw)


def test_validate_rejects_negative_probability():
    raw = minimal_raw()
    raw["channel"]["inner"][0] = ["3/2", "-1/2"]
    with pytest.raises(ModelValidationError, match="channel.inner"):
        validate_model(raw)


def test_validate_rejects_distortion_above_rho_max():
    raw = minimal_raw()
    raw["distortion"]["rho1"][0][0][1] = "2"
    with pytest.raises(ModelValidationError, match="distortion.rho1"):
        validate_model(raw)


def test_validate_rejects_bad_shapes():
    raw = minimal_raw()
    raw["channel"]["outer"] = [["1", "0"]]
    with pytest.raises(ModelValidationError, match="channel.outer"):
        validate_model(raw)


def test_validate_rejects_missing_field():
    raw = minimal_raw()
    del raw["distortion"]
    with pytest.raises(ModelValidationError, match="distortion"):
        validate_model(raw)


def test_round_trip_and_hash(tmp_path):
    model = validate_model(minimal_raw())
    path = tmp_path / "model.json"
    save_model(model, path)
    again = load_model(path)
    assert model_to_dict(again) == model_to_dict(model)
    assert again.content_hash() == model.content_hash()
    # the stored file is valid JSON with lossless numbers
    raw = json.loads(path.read_text())
    assert raw["source"]["initial"] == ["1/4", "1/4", "1/4", "1/4"]


def test_hash_changes_with_content():
    a = validate_model(minimal_raw())
    raw = minimal_raw()
    raw["horizon"] = 1
    raw["distortion"]["rho2"] = [[["0", "1"], ["1", "1"]]]
    b = validate_model(raw)
    assert a.content_hash() != b.content_hash()


def test_special_case_structure():
    model = build_special_case(2, 3, 2)
    assert model.ns == 6
    assert model.nx == model.ny == model.nz == 6
    # frozen pair: identity transition
    assert model.source.transition[2][2] == 1
    # zero distortion before the final stage
    assert all(x == 0 for row in model.distortion.rho1[0] for x in row)
    assert model.distortion.rho1[1][0][1] == 1
    assert model.distortion.rho1[1][0][0] == 0


def test_trajectory_support_sums_to_one(binary_t2):
    support = reachable_trajectory_support(
        binary_t2, lambda t, us, vs, ys, zs: us[-1]
    )
    total = sum(p for *_, p in support)
    assert total == 1
    # noisy channels: every (y, z) combination is reachable
    assert len(support) == binary_t2.trajectory_count() / 4
