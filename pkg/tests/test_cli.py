import json

import pytest

from heisenqk.cli import EXIT_CONSTRAINT, EXIT_FAIL, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCatalog:
    def test_lists_all_families(self, capsys):
        code, out, _ = run(capsys, "catalog", "--format", "json")
        assert code == EXIT_OK
        assert len(json.loads(out)["families"]) == 11

    def test_constraints(self, capsys):
        code, out, _ = run(capsys, "catalog", "--family", "NegativeTimelike")
        assert code == EXIT_OK
        assert "NegativeTimelike" in out and "constraints" in out


class TestExitCodes:
    def test_bad_branch(self, capsys):
        code, _, err = run(capsys, "verify", "--family", "NegativeTimelike", "--epslambda", "-50", "--branch", "2")
        assert code == EXIT_CONSTRAINT
        assert "-50" in err

    def test_usage(self, capsys):
        assert run(capsys, "verify", "--samples", "many")[0] == EXIT_USAGE
        assert run(capsys, "frobnicate")[0] == EXIT_USAGE

    def test_lambda_and_epslambda_exclusive(self, capsys):
        assert run(capsys, "verify", "--lambda", "1", "--epslambda", "1")[0] == EXIT_USAGE

    def test_failing_check(self, capsys):
        # a tolerance no residual can meet
        code, out, _ = run(capsys, "verify", "--family", "StationaryTimelike", "--samples", "4", "--tol-algebraic", "1e-300", "--no-probe")
        assert code == EXIT_FAIL
        assert json.loads(out)["passed"] is False


class TestVerify:
    ARGS = ("verify", "--family", "StationaryTimelike", "--k", "1", "--lambda", "-6", "--samples", "10", "--seed", "3")

    def test_passes(self, capsys):
        code, out, _ = run(capsys, *self.ARGS)
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["records"][0]["checks"]["einstein"]["passed"]

    def test_deterministic(self, capsys):
        first = run(capsys, *self.ARGS)[1]
        second = run(capsys, *self.ARGS)[1]
        assert first == second

    def test_csv(self, capsys):
        code, out, _ = run(capsys, *self.ARGS, "--format", "csv")
        assert code == EXIT_OK
        assert len(out.strip().splitlines()) == 2

    def test_config_file_and_override(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# sweep\nfamily = HyperKahlerTimelike\nk = 0.5, 2\nsamples = 6\n")
        code, out, _ = run(capsys, "verify", "--config", str(cfg), "--no-probe")
        assert code == EXIT_OK
        assert [r["params"]["k"] for r in json.loads(out)["records"]] == [0.5, 2.0]
        code, out, _ = run(capsys, "verify", "--config", str(cfg), "--k", "1", "--no-probe")
        assert [r["params"]["k"] for r in json.loads(out)["records"]] == [1.0]

    def test_json_config(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"family": ["HyperKahlerTimelike"], "samples": 4}))
        assert run(capsys, "verify", "--config", str(cfg), "--no-probe")[0] == EXIT_OK

    def test_unknown_config_key(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("colour = blue\n")
        assert run(capsys, "verify", "--config", str(cfg))[0] == EXIT_USAGE

    def test_report(self, capsys, tmp_path):
        path = tmp_path / "rep.json"
        assert run(capsys, *self.ARGS, "--out", str(path))[0] == EXIT_OK
        code, out, _ = run(capsys, "report", str(path))
        assert code == EXIT_OK
        assert "1 records, 0 failing" in out
        code, out, _ = run(capsys, "report", str(path), "--format", "csv")
        assert len(out.strip().splitlines()) == 2


class TestOtherCommands:
    def test_evolve(self, capsys):
        code, out, _ = run(capsys, "evolve", "--family", "NegativeTimelike", "--epslambda", "-100", "--branch", "3")
        assert code == EXIT_OK
        assert json.loads(out)["crosschecks"][0]["max_relative_deviation"] < 1e-7

    def test_geodesic(self, capsys):
        code, out, _ = run(capsys, "geodesic", "--family", "HyperKahlerTimelike", "--k", "1")
        assert code == EXIT_OK
        probe = json.loads(out)["probes"][0]
        assert probe["verdict"] == "IncompleteEvidence"
        assert abs(probe["length"] - 1 / 3) < 1e-9

    def test_sample(self, capsys):
        code, out, _ = run(capsys, "sample", "--family", "StationaryTimelike", "--format", "csv")
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0].split(",")[:5] == ["spec", "t", "x", "y", "z"]
        assert len(lines) == 1 + 5**4

    @pytest.mark.parametrize("fmt", ["json", "csv"])
    def test_sample_grid(self, capsys, fmt):
        code, out, _ = run(capsys, "sample", "--family", "HyperKahlerLightlike", "--grid", "2", "--format", fmt)
        assert code == EXIT_OK
        if fmt == "json":
            assert len(json.loads(out)["tables"][0]["rows"]) == 16
