import json

import numpy as np
import pytest

from cmvwalk.errors import SchemaError
from cmvwalk.modelspec import load_model, parse_model

from oracles import haar_unitary


class TestParseModel:
    def test_zero(self):
        handle = parse_model({"model": "zero"})
        assert handle.kind == "zero" and handle.sequence.support_end == -1

    def test_explicit(self):
        handle = parse_model(
            {"model": "explicit", "alphas": [[0.5, 0.0], [0.0, -0.25]]}
        )
        assert handle.sequence.coefficient(0).alpha == 0.5
        assert handle.sequence.coefficient(1).alpha == -0.25j

    def test_explicit_with_boundary_phase(self):
        handle = parse_model(
            {
                "model": "explicit",
                "alphas": [[0.5, 0.0]],
                "lambda_phase_radians": np.pi,
            }
        )
        assert handle.sequence.coefficient(0).alpha == pytest.approx(-0.5)

    def test_sparse_with_list(self):
        handle = parse_model({"model": "sparse", "eta": 0.5, "lengths": [2, 4]})
        assert handle.sparse.lengths == (2, 4)
        assert handle.eta == 0.5
        assert handle.sequence.coefficient(4).rho == 0.5

    def test_sparse_with_rule(self):
        handle = parse_model(
            {"model": "sparse", "eta": 0.5, "lengths": {"log2_factorial": 3}}
        )
        assert handle.sparse.lengths == (2, 4, 64)

    def test_walk_rule(self):
        handle = parse_model({"model": "walk", "eta": 0.5, "lengths": [5]})
        assert handle.is_walk
        assert handle.sequence.coefficient(9).rho == pytest.approx(1.0 / 3.0)

    def test_walk_explicit_rotation_coins(self):
        handle = parse_model(
            {"model": "walk", "coins": [[[0.6, 0], [-0.8, 0], [0.8, 0], [0.6, 0]]]}
        )
        assert handle.sequence.coefficient(1).rho == 0.6

    def test_walk_general_coins_take_gauge_route(self):
        rng = np.random.default_rng(5)
        u = haar_unitary(rng)
        coins = [[[u[i, j].real, u[i, j].imag] for i, j in
                  ((0, 0), (0, 1), (1, 0), (1, 1))]]
        handle = parse_model({"model": "walk", "coins": coins})
        assert set(handle.sequence.entries) <= {1}
        c = handle.sequence.coefficient(1)
        assert c.rho == pytest.approx(abs(u[1, 1]))

    @pytest.mark.parametrize(
        "doc,field",
        [
            ({}, "model"),
            ({"model": "waffle"}, "model"),
            ({"model": "sparse", "lengths": [2]}, "eta"),
            ({"model": "sparse", "eta": 2.0, "lengths": [2]}, "eta"),
            ({"model": "sparse", "eta": 0.5, "lengths": []}, "lengths"),
            ({"model": "sparse", "eta": 0.5, "lengths": [4, 4]}, "lengths"),
            ({"model": "sparse", "eta": 0.5, "lengths": [2.5]}, "lengths[0]"),
            ({"model": "explicit", "alphas": [[1.2, 0.0]]}, "alphas[0]"),
            ({"model": "explicit", "alphas": [0.5]}, "alphas[0]"),
            ({"model": "zero", "alphas": []}, "alphas"),
            ({"model": "walk", "coins": [[[1, 0], [0, 0], [0, 0], [2, 0]]]}, "coins[0]"),
            ({"model": "walk", "coins": [], "eta": 0.5}, "eta"),
        ],
    )
    def test_schema_violations_carry_field(self, doc, field):
        with pytest.raises(SchemaError) as info:
            parse_model(doc)
        assert info.value.field == field

    def test_non_object_document(self):
        with pytest.raises(SchemaError):
            parse_model([1, 2, 3])


class TestLoadModel:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"model": "sparse", "eta": 0.5, "lengths": [4]}))
        assert load_model(path).kind == "sparse"

    def test_bad_json_reports_line(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text('{"model": "zero",\n  oops}')
        with pytest.raises(SchemaError) as info:
            load_model(path)
        assert "line 2" in str(info.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError):
            load_model(tmp_path / "nope.json")
