import json
import math
from pathlib import Path

import numpy as np
import pytest

import diskcalabi as dc
from diskcalabi.mapspec import SCHEMA, parse_mapspec

ROOT = Path(__file__).resolve().parent.parent


def test_rotation_roundtrip():
    m = parse_mapspec({"kind": "rotation", "theta0": 0.25})
    assert isinstance(m, dc.RigidRotation)
    assert np.allclose(m((1.0, 0.0)), (0.0, 1.0), atol=1e-15)


def test_twist_pieces_in_global_coefficients():
    m = parse_mapspec({
        "kind": "twist", "delta": 0.0,
        "profile": {"pieces": [[0.0, 1.0, 0.0, 0.0, 0.3]]},
    })
    assert isinstance(m, dc.RadialTwist)
    assert m.theta0 == pytest.approx(0.3, abs=1e-15)
    assert dc.calabi(m).value == pytest.approx(0.2, abs=1e-12)


def test_multi_piece_twist_requires_contiguity():
    with pytest.raises(dc.InvalidInputError):
        parse_mapspec({
            "kind": "twist",
            "profile": {"pieces": [[0.0, 0.4, 0.1], [0.5, 1.0, 0.1]]},
        })


def test_non_c1_profile_rejected():
    with pytest.raises(dc.InvalidInputError):
        parse_mapspec({
            "kind": "twist",
            "profile": {"pieces": [[0.0, 0.5, 0.0, 0.2], [0.5, 1.0, 0.3, 0.0]]},
        })


def test_hamiltonian_kinds():
    poly = parse_mapspec({
        "kind": "hamiltonian", "steps": 16,
        "hamiltonian": {"type": "polynomial", "terms": [[0.5, 2, 0], [0.5, 0, 2]]},
    })
    assert isinstance(poly, dc.HamiltonianFlow)
    bump = parse_mapspec({
        "kind": "hamiltonian", "steps": 16, "order": 2, "delta": 0.3,
        "hamiltonian": {"type": "radial_bump", "center": [0.4, 0.0],
                         "radius": 0.2, "strength": 0.05, "power": 6},
    })
    assert bump.order == 2
    assert bump((0.0, 0.0)) == pytest.approx((0.0, 0.0))


def test_composition_nested():
    m = parse_mapspec({
        "kind": "composition",
        "factors": [
            {"kind": "rotation", "theta0": 0.2},
            {"kind": "composition", "factors": [{"kind": "rotation", "theta0": 0.1}]},
        ],
    })
    assert m.theta0 == pytest.approx(0.3, abs=1e-15)


def test_unknown_kind_reports_path():
    with pytest.raises(dc.InvalidInputError) as err:
        parse_mapspec({"kind": "moebius"})
    assert "kind" in str(err.value)


def test_nested_error_reports_factor_path():
    with pytest.raises(dc.InvalidInputError) as err:
        parse_mapspec({
            "kind": "composition",
            "factors": [{"kind": "rotation"}],  # theta0 missing
        })
    assert "factors[0]" in str(err.value)


def test_load_mapspec_reports_json_position(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "rotation",\n  "theta0": }\n')
    with pytest.raises(dc.InvalidInputError) as err:
        dc.load_mapspec(bad)
    assert ":2:" in str(err.value)


def test_published_schema_matches_source():
    published = json.loads((ROOT / "docs" / "schema" / "mapspec.schema.json").read_text())
    assert published == SCHEMA
