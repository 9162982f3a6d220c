import json

import numpy as np
import pytest

from puppet.errors import ModelError
from puppet.kinematics.model import (
    load_model,
    model_from_dict,
    model_to_dict,
    planar_arm,
)


def _minimal_doc():
    return {
        "name": "one",
        "joints": [
            {
                "translation": [0, 0, 0.1],
                "rotation_rpy": [0, 0, 0],
                "axis": [0, 0, 1],
                "limits": [-1.0, 1.0],
                "vel_limit": 1.0,
            }
        ],
        "ee_offset": {"translation": [0.2, 0, 0], "rotation_rpy": [0, 0, 0]},
    }


def test_load_builtin_panda(panda):
    assert panda.dof == 7
    assert panda.name == "panda_7dof"
    assert np.all(panda.lower_limits < panda.upper_limits)
    assert np.all(panda.vel_limits > 0)
    assert np.all(panda.home >= panda.lower_limits)
    assert np.all(panda.home <= panda.upper_limits)


def test_unknown_builtin_rejected():
    with pytest.raises(ModelError, match="builtin"):
        load_model("no_such_model")


def test_load_from_file(tmp_path):
    p = tmp_path / "arm.json"
    p.write_text(json.dumps(_minimal_doc()))
    m = load_model(p)
    assert m.dof == 1


def test_syntax_error_reports_line(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{\n "name": "x",\n broken\n}')
    with pytest.raises(ModelError, match=r":3:"):
        load_model(p)


@pytest.mark.parametrize(
    "mutate,needle",
    [
        (lambda d: d.pop("joints"), "joints"),
        (lambda d: d["joints"][0].pop("axis"), r"joints\[0\]"),
        (lambda d: d["joints"][0].update(axis=[0, 0, 2]), "axis"),
        (lambda d: d["joints"][0].update(limits=[1.0, -1.0]), "limits"),
        (lambda d: d["joints"][0].update(vel_limit=0.0), "vel_limit"),
        (lambda d: d["joints"][0].update(translation=[0, 0]), "translation"),
        (lambda d: d.update(joints=[]), "joints"),
        (lambda d: d.update(home=[5.0]), "home"),
    ],
)
def test_validation_errors_carry_path(mutate, needle):
    doc = _minimal_doc()
    mutate(doc)
    with pytest.raises(ModelError, match=needle):
        model_from_dict(doc, "model.json")


def test_roundtrip_through_dict(panda):
    doc = model_to_dict(panda)
    again = model_from_dict(doc)
    assert again.dof == panda.dof
    for a, b in zip(again.joints, panda.joints):
        assert np.array_equal(a.translation, b.translation)
        assert np.array_equal(a.rotation, b.rotation)
        assert np.array_equal(a.axis, b.axis)
        assert a.limits == b.limits
    assert np.array_equal(again.home, panda.home)
    assert np.array_equal(again.ee_offset, panda.ee_offset)


def test_extra_fields_tolerated():
    doc = _minimal_doc()
    doc["comment"] = "anything"
    doc["joints"][0]["debug"] = True
    m = model_from_dict(doc)
    assert m.dof == 1


def test_planar_arm_home_override():
    m = planar_arm(1.0, 1.0, home=np.array([0.3, -0.3]))
    assert np.allclose(m.home, [0.3, -0.3])
