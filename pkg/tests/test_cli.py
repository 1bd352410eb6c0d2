import json
import os

import numpy as np
import pytest

from irrevkit import fixture_names
from irrevkit.cli import main


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("fixtures")
    assert main(["fixtures", "--dir", str(d)]) == 0
    return d


def load_report(path):
    with open(path) as fh:
        return json.load(fh)


def write_doc(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


class TestFixtures:
    def test_all_names_written(self, corpus):
        files = sorted(p.name for p in corpus.glob("*.json"))
        assert files == [f"{n}.json" for n in fixture_names()]
        assert len(files) == 10

    def test_validate_accepts_corpus(self, corpus):
        paths = [str(p) for p in sorted(corpus.glob("*.json"))]
        assert main(["validate", *paths]) == 0


class TestRun:
    def test_lt_report_content(self, corpus, tmp_path):
        out = tmp_path / "lt.report.json"
        code = main(["run", str(corpus / "lt-error-qubit.json"), "-o", str(out)])
        assert code == 0
        rep = load_report(out)
        assert rep["schema"] == "irrevkit/1"
        assert rep["kind"] == "lt"
        assert abs(rep["result"]["value"] - 1.0) < 1e-9
        assert os.path.exists(str(out) + ".meta.json")

    def test_epsilon_report_value(self, corpus, tmp_path):
        out = tmp_path / "eps.report.json"
        assert main(["run", str(corpus / "epsilon-projective-qubit.json"), "-o", str(out)]) == 0
        rep = load_report(out)
        assert abs(rep["result"]["value"] - 2.0) < 1e-6
        # resolved configuration is echoed with defaults expanded
        assert rep["inputs"]["extraction"]["thetas"]

    def test_way_scenario_passes(self, corpus, tmp_path):
        out = tmp_path / "way.report.json"
        assert main(["run", str(corpus / "way-error-tight.json"), "-o", str(out)]) == 0
        rep = load_report(out)
        assert rep["result"]["pass"] is True
        assert rep["result"]["slack"] >= -1e-9

    def test_reports_byte_identical(self, corpus, tmp_path):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        src = str(corpus / "otoc-cp-qubit.json")
        assert main(["run", src, "-o", str(a)]) == 0
        assert main(["run", src, "-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_multiple_scenarios_threaded(self, corpus, monkeypatch):
        monkeypatch.setenv("IRREVKIT_THREADS", "2")
        paths = [str(corpus / "lt-error-qubit.json"), str(corpus / "blw-error-qubit.json")]
        assert main(["run", *paths]) == 0

    def test_output_flag_rejected_for_batches(self, corpus, tmp_path):
        paths = [str(corpus / "lt-error-qubit.json"), str(corpus / "blw-error-qubit.json")]
        assert main(["run", *paths, "-o", str(tmp_path / "x.json")]) == 2


class TestExitCodes:
    def test_malformed_json_is_2(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{nope")
        assert main(["run", str(p)]) == 2

    def test_unknown_kind_is_2(self, corpus, tmp_path):
        doc = load_report(corpus / "lt-error-qubit.json")
        doc["kind"] = "bogus"
        assert main(["run", write_doc(tmp_path, "k.json", doc)]) == 2

    def test_missing_required_field_is_2(self, corpus, tmp_path):
        doc = load_report(corpus / "lt-error-qubit.json")
        del doc["payload"]["state"]
        assert main(["validate", write_doc(tmp_path, "m.json", doc)]) == 2

    def test_invalid_state_content_is_2(self, corpus, tmp_path):
        doc = load_report(corpus / "lt-error-qubit.json")
        doc["payload"]["state"]["matrix"] = [[2.0, 0.0], [0.0, -1.0]]
        assert main(["run", write_doc(tmp_path, "s.json", doc)]) == 2

    def test_conservation_failure_is_3(self, corpus, tmp_path):
        doc = load_report(corpus / "way-error-tight.json")
        charges = json.loads(json.dumps(doc["payload"]["implementation"]["charges"]))
        charges["alpha"]["matrix"][0][0] = [5.0, 0.0]
        doc["payload"]["charges"] = charges
        assert main(["run", write_doc(tmp_path, "t.json", doc)]) == 3

    def test_tolerance_violation_is_4(self, corpus, tmp_path):
        # the tight scenario sits at slack ~ -3e-16; tolerance 0 trips it
        doc = load_report(corpus / "way-error-tight.json")
        doc["payload"]["tolerance"] = 0.0
        doc["output"] = "strict.report.json"
        assert main(["run", write_doc(tmp_path, "strict.json", doc)]) == 4
        rep = load_report(tmp_path / "strict.report.json")
        assert rep["result"]["pass"] is False


class TestSweep:
    def test_tau_sweep_rows(self, corpus, tmp_path):
        out = tmp_path / "chain.csv"
        code = main(
            ["sweep", str(corpus / "otoc-ising-chain.json"), "-p", "tau", "-g", "0,0.5,1.0", "-o", str(out)]
        )
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "tau,c_direct,c_iep,gap"
        assert len(lines) == 4
        # equal-time row: W and V act on different sites, so both paths give 0
        first = [float(x) for x in lines[1].split(",")]
        assert first[0] == 0.0
        assert abs(first[1]) < 1e-12
        assert abs(first[2]) < 1e-6

    def test_theta_sweep_reproduces_grid_diagnostics(self, corpus, tmp_path):
        out = tmp_path / "theta.csv"
        src = str(corpus / "epsilon-projective-qubit.json")
        assert main(["sweep", src, "-p", "theta", "-g", "0.01,0.005", "-o", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "theta,delta_squared"
        rows = [[float(x) for x in ln.split(",")] for ln in lines[1:]]

        rep_out = tmp_path / "eps.report.json"
        doc = load_report(src)
        doc["payload"].setdefault("extraction", {})["thetas"] = [0.01, 0.005]
        assert main(["run", write_doc(tmp_path, "eps.json", doc), "-o", str(rep_out)]) == 0
        grid = load_report(rep_out)["result"]["theta_grid"]
        assert np.allclose(rows, grid)

    def test_empty_grid_is_2(self, corpus):
        assert main(["sweep", str(corpus / "otoc-ising-chain.json"), "-p", "tau", "-g", " ,"]) == 2

    def test_non_numeric_grid_is_2(self, corpus):
        assert main(["sweep", str(corpus / "otoc-ising-chain.json"), "-p", "tau", "-g", "a,b"]) == 2

    def test_unknown_parameter_is_2(self, corpus):
        assert main(["sweep", str(corpus / "otoc-ising-chain.json"), "-p", "no.such", "-g", "1"]) == 2

    def test_violating_sweep_is_4(self, corpus, tmp_path):
        doc = load_report(corpus / "way-error-tight.json")
        doc["payload"]["tolerance"] = 0.0
        src = write_doc(tmp_path, "strict.json", doc)
        out = tmp_path / "strict.csv"
        assert main(["sweep", src, "-p", "tolerance", "-g", "0", "-o", str(out)]) == 4
        assert out.exists()


class TestScenarioForms:
    def test_pauli_string_form_matches_dense(self, corpus, tmp_path):
        doc = load_report(corpus / "otoc-ising-chain.json")
        assert isinstance(doc["payload"]["scenario"]["h"], list)
        out = tmp_path / "string.report.json"
        assert main(["run", write_doc(tmp_path, "c.json", doc), "-o", str(out)]) == 0
        rep = load_report(out)
        assert abs(rep["result"]["direct"] - 0.5318542611700483) < 1e-9
        # the echo resolves strings to dense matrices
        assert isinstance(rep["inputs"]["scenario"]["h"], dict)

    def test_mismatched_sites_rejected(self, corpus, tmp_path):
        doc = load_report(corpus / "otoc-ising-chain.json")
        doc["payload"]["scenario"]["w0"] = "XI"
        assert main(["run", write_doc(tmp_path, "w.json", doc)]) == 2
