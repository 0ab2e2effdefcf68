"""Job schema, dispatch, exit codes, and output formats of the batch
front-end."""

import json

import pytest

from nesthilb.ringcore import parse_rational
from nesthilb.cli import (
    JobSpec, SchemaError, run, main, porteous_two_routes,
    delta_euler_forms, segre_two_routes, _series_coefficient,
    EXIT_OK, EXIT_SCHEMA, EXIT_MATH, EXIT_RESIDUAL,
)


def job(**fields):
    return JobSpec(fields)


class TestJobSpec:
    def test_minimal_commands(self):
        assert job(command="verify", suite="segre").suite == "segre"
        assert job(command="push", formula="porteous:1,1,1").formula
        j = job(command="integrate", surface="P2", formula="euler", n=2)
        assert j.n_range == (2,)
        j = job(command="vw", surface="P2", beta=[1], n="0:2")
        assert j.n_range == (0, 1, 2)
        assert job(command="fit", n=0).n_range == (0,)

    def test_unknown_field(self):
        with pytest.raises(SchemaError, match="unknown field"):
            job(command="verify", suite="segre", extra=1)

    def test_unknown_command(self):
        with pytest.raises(SchemaError, match="command"):
            job(command="solve")

    def test_bad_surface(self):
        with pytest.raises(SchemaError, match="bad surface"):
            job(command="integrate", surface="QX", formula="euler", n=1)

    def test_beta_outside_lattice(self):
        with pytest.raises(SchemaError, match="lattice"):
            job(command="vw", surface="P2", beta=[1, 2], n=0)

    def test_beta_parsing(self):
        j = job(command="vw", surface="P1xP1", beta="2,1", n=0)
        assert j.beta == (2, 1)
        with pytest.raises(SchemaError, match="non-rational"):
            job(command="vw", surface="P2", beta=["x"], n=0)

    def test_n_range_validation(self):
        with pytest.raises(SchemaError, match="range is empty"):
            job(command="vw", surface="P2", beta=[1], n=[2, 0])
        with pytest.raises(SchemaError, match="at least"):
            job(command="vw", surface="P2", beta=[1], n=-1)
        with pytest.raises(SchemaError, match="single n"):
            job(command="fit", n=[0, 1])

    def test_missing_required(self):
        with pytest.raises(SchemaError, match="needs field 'surface'"):
            job(command="integrate", formula="euler", n=1)
        with pytest.raises(SchemaError, match="needs field 'beta'"):
            job(command="vw", surface="P2", n=0)
        with pytest.raises(SchemaError, match="suite"):
            job(command="verify", suite="everything")

    def test_evaluator_pinning(self):
        with pytest.raises(SchemaError, match="equivariant evaluator"):
            job(command="integrate", surface="P2", formula="euler",
                n=1, evaluator="formal")
        j = job(command="push", formula="porteous:1,1,1")
        assert j.evaluator == "formal"

    def test_format_and_counts(self):
        with pytest.raises(SchemaError, match="format"):
            job(command="fit", n=0, format="xml")
        with pytest.raises(SchemaError, match="threads"):
            job(command="fit", n=0, threads=0)
        with pytest.raises(SchemaError, match="order"):
            job(command="fit", n=0, order=-1)

    def test_general_type_reference(self):
        j = job(command="fit", n=0, surface="general_type:2,3")
        assert j.surface.K2 == 2 and j.surface.chiO == 3


class TestSuiteRoutes:
    def test_porteous_routes_agree(self):
        det_route, loc_route = porteous_two_routes(2, 2, 3)
        assert det_route == loc_route
        assert not det_route.is_zero()

    def test_delta_forms_agree_with_virtual_subtraction(self):
        det_val, euler_val = delta_euler_forms(2, 3, 2, 1)
        assert det_val == euler_val

    def test_segre_routes_agree(self):
        push, segre = segre_two_routes(3, 2)
        assert push == segre

    def test_series_coefficients(self):
        assert [_series_coefficient(3, n) for n in range(5)] \
            == [1, 3, 9, 22, 51]
        assert [_series_coefficient(4, n) for n in range(5)] \
            == [1, 4, 14, 40, 105]


class TestRun:
    def test_integrate_euler_value(self):
        code, text = run(job(command="integrate", surface="P2",
                             formula="euler", n=2))
        assert code == EXIT_OK
        assert text == "9\n# seed 0\n"

    def test_vw_zero_at_nonzero_dimension(self):
        code, text = run(job(command="vw", surface="P2", beta=[1], n=0))
        assert code == EXIT_OK
        assert text == "0\n# seed 0\n"

    def test_verify_suites_green(self):
        for suite in ("porteous", "delta", "segre", "euler",
                      "characters"):
            code, text = run(job(command="verify", suite=suite))
            assert code == EXIT_OK, suite
            assert "all green" in text and "FAIL" not in text

    def test_vw_supplied_table_csv(self):
        sw = {"entries": [{"beta": ["0"], "sw": "1"}]}
        code, text = run(job(command="vw", surface="P2", beta=[0],
                             n=[0, 2], sw=sw, format="csv"))
        assert code == EXIT_OK
        lines = text.splitlines()
        assert lines[0] == "# seed 0"
        assert lines[1] == "beta,n,n1,n2,value,t_order"
        totals = [ln for ln in lines if ",,," in ln]
        values = [ln.split(",")[4] for ln in totals]
        assert values == ["1/1024", "-9/512", "69/512"]
        for ln in lines[2:]:
            parse_rational(ln.split(",")[4])

    def test_vw_missing_entry_exits_math(self):
        code, text = run(job(command="vw", surface="P2", beta=[0], n=0))
        assert code == EXIT_MATH
        doc = json.loads(text)
        assert doc["error"]["code"] == EXIT_MATH
        assert "missing SW entry" in doc["error"]["message"]

    def test_fit_default_runs(self):
        code, text = run(job(command="fit", n=0, format="json"))
        assert code == EXIT_OK
        doc = json.loads(text)
        assert doc["residual"] == "0"
        assert doc["runs"] == 6 and doc["seed"] == 0
        assert set(doc["monomials"]) \
            == {"1", "c1sq", "betasq", "c1beta"}

    def test_fit_rank_deficient_design_exits_residual(self):
        params = {"monomials": ["1", "c1sq", "c2", "betasq", "c1beta"]}
        code, text = run(job(command="fit", n=0, params=params))
        assert code == EXIT_RESIDUAL
        assert json.loads(text)["error"]["code"] == EXIT_RESIDUAL

    def test_push_porteous_class(self):
        code, text = run(job(command="push",
                             formula="porteous:2,2,3", format="json"))
        assert code == EXIT_OK
        doc = json.loads(text)
        assert doc["class"] == [["c3^2", "1"], ["c2*c4", "-1"]]
        assert doc["codim"] == 6
        code, text = run(job(command="push", formula="porteous:1,1,2",
                             format="json"))
        assert json.loads(text)["class"] == [["c2", "1"]]

    def test_push_reduced_tree(self):
        code, text = run(job(command="push", formula="reduced",
                             surface="P2", beta=[1], n2=1,
                             params={"h2_vanishing": True},
                             format="json"))
        assert code == EXIT_OK
        doc = json.loads(text)
        assert doc["expr"]["kind"]
        assert set(doc["info"]) == {"d", "reduced_vd", "degree"}

    def test_push_reduced_needs_flag(self):
        code, text = run(job(command="push", formula="reduced",
                             surface="P2", beta=[1], n2=1))
        assert code == EXIT_MATH
        assert "H2-vanishing" in json.loads(text)["error"]["message"]

    def test_integrate_co_vanishing(self):
        code, text = run(job(command="integrate", surface="P2",
                             formula="co:2", beta=[1], n=1))
        assert code == EXIT_OK
        assert text.splitlines()[0] == "0"

    def test_unknown_formula_exits_schema(self):
        code, text = run(job(command="push", formula="mystery"))
        assert code == EXIT_SCHEMA
        assert json.loads(text)["error"]["code"] == EXIT_SCHEMA

    def test_byte_reproducible(self):
        spec = dict(command="fit", n=0, format="json", seed=3)
        assert run(job(**spec)) == run(job(**spec))

    def test_seed_recorded(self):
        code, text = run(job(command="vw", surface="P2", beta=[1],
                             n=0, seed=5))
        assert text.endswith("# seed 5\n")
        code, text = run(job(command="vw", surface="P2", beta=[1],
                             n=0, seed=5, format="json"))
        assert json.loads(text)["seed"] == 5


class TestMain:
    def test_flag_example(self, capsys):
        code = main(["integrate", "--surface", "P2", "--formula",
                     "euler", "--n", "2"])
        assert code == EXIT_OK
        assert capsys.readouterr().out == "9\n# seed 0\n"

    def test_job_file_with_override(self, tmp_path, capsys):
        path = tmp_path / "job.json"
        path.write_text(json.dumps(
            {"command": "vw", "surface": "P2", "beta": [1], "n": 0,
             "seed": 1}))
        code = main(["vw", "--job", str(path), "--seed", "2"])
        assert code == EXIT_OK
        assert capsys.readouterr().out == "0\n# seed 2\n"

    def test_out_file(self, tmp_path, capsys):
        target = tmp_path / "result.txt"
        code = main(["vw", "--surface", "P2", "--beta", "1", "--n",
                     "0", "--out", str(target)])
        assert code == EXIT_OK
        assert capsys.readouterr().out == ""
        assert target.read_text() == "0\n# seed 0\n"

    def test_schema_error_json(self, capsys):
        code = main(["integrate", "--surface", "P2", "--formula",
                     "euler"])
        assert code == EXIT_SCHEMA
        doc = json.loads(capsys.readouterr().out)
        assert doc["error"]["code"] == EXIT_SCHEMA

    def test_malformed_job_file(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{")
        code = main(["vw", "--job", str(path)])
        assert code == EXIT_SCHEMA
        assert "not valid JSON" \
            in json.loads(capsys.readouterr().out)["error"]["message"]
