from __future__ import annotations

import json
import subprocess
import sys
from dataclasses import replace

import pytest

from sievecert import cli, combinatorics, exponents
from sievecert.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, Config, read_config, run

CHEAP_CLAIMS = ("largetau", "smalltau-1A-0.36", "smalltau-2A-0.315")


def _report(path) -> dict:
    return json.loads(path.read_text())


def _without_timestamp(path) -> str:
    doc = _report(path)
    doc.pop("timestamp")
    return json.dumps(doc, indent=2)


def test_verify_omega(tmp_path):
    out = tmp_path / "r.json"
    assert run(["verify-omega", "--report", str(out)]) == EXIT_OK
    doc = _report(out)
    assert set(doc) == {"version", "command", "config", "claims", "summary", "timestamp"}
    assert doc["summary"]["all_passed"]
    rec = doc["claims"][0]
    assert set(rec) >= {"id", "anchor", "kind", "value", "err", "bound", "relation", "status", "margin"}


@pytest.mark.parametrize(
    "argv",
    [
        ["verify-everything"],
        ["verify-omega", "--no-such-flag"],
        ["verify-omega", "--eps1", "1e-3"],
        ["verify-omega", "--quad-tol", "-1"],
        ["verify-exponents", "--claim", "no-such-claim"],
        ["verify-decomposition", "--case", "0.1-0.2"],
        ["verify-combinatorics", "--case", "VII(i)"],
    ],
)
def test_usage_errors(tmp_path, argv):
    assert run(argv + ["--report", str(tmp_path / "r.json")]) == EXIT_USAGE


def test_help_exits_cleanly():
    assert run(["--help"]) == EXIT_OK


def test_decomposition_case_that_passes(tmp_path):
    out = tmp_path / "r.json"
    assert run(["verify-decomposition", "--case", "a<=0.53", "--report", str(out)]) == EXIT_OK
    ids = [c["id"] for c in _report(out)["claims"]]
    assert ids[-3:] == ["a<=0.53/total", "a<=0.53/budget", "a<=0.53/checksum"]


def test_decomposition_case_with_failing_term(tmp_path):
    out = tmp_path / "r.json"
    assert run(["verify-decomposition", "--case", "0.53-0.545", "--report", str(out)]) == EXIT_FAIL
    failing = _report(out)["summary"]["failing"]
    assert failing == ["0.53-0.545/theta10", "0.53-0.545/total"]


def test_single_claim(tmp_path):
    out = tmp_path / "r.json"
    assert run(["verify-exponents", "--claim", "smoothfull-0.335", "--report", str(out)]) == EXIT_OK
    (rec,) = _report(out)["claims"]
    assert rec["status"] == "CERTIFIED"
    assert rec["margin"] >= 1e-4


def test_single_combinatorics_case(tmp_path):
    out = tmp_path / "r.json"
    argv = ["verify-combinatorics", "--case", "I(i)", "--count", "2000", "--seeds", "1,2", "--report", str(out)]
    assert run(argv) == EXIT_OK
    recs = _report(out)["claims"]
    assert [r["status"] for r in recs] == ["FALSIFICATION-PASSED"] * 2


def test_reports_are_identical_apart_from_timestamp(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        argv = ["verify-combinatorics", "--case", "II(ii)", "--count", "3000", "--report", str(p)]
        assert run(argv) == EXIT_OK
    assert _without_timestamp(paths[0]) == _without_timestamp(paths[1])


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# test config\nfalsify_count = 1500\nseeds = 4, 5\nepsilon1 = 1e-7\n")
    assert read_config(cfg) == {"falsify_count": 1500, "seeds": (4, 5), "epsilon1": 1e-7}
    out = tmp_path / "r.json"
    argv = ["verify-combinatorics", "--case", "I(i)", "--config", str(cfg), "--seeds", "9", "--report", str(out)]
    assert run(argv) == EXIT_OK
    conf = _report(out)["config"]
    assert conf["falsify_count"] == 1500
    assert conf["seeds"] == [9]
    assert conf["epsilon1"] == 1e-7


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("color = blue\n")
    assert run(["verify-omega", "--config", str(cfg), "--report", str(tmp_path / "r.json")]) == EXIT_USAGE
    with pytest.raises(ValueError):
        read_config(cfg)


def test_config_defaults_validate():
    Config().validate()
    with pytest.raises(ValueError):
        Config(seeds=()).validate()


def test_dump_catalog(tmp_path):
    out = tmp_path / "catalog.json"
    omega = tmp_path / "omega.txt"
    assert run(["dump-catalog", "--report", str(out), "--omega", str(omega)]) == EXIT_OK
    doc = _report(out)
    assert [c["case"] for c in doc["decomposition"]][0] == "a<=0.53"
    assert len(doc["exponents"]) == len(exponents.catalog_claims())
    assert len(doc["combinatorics"]) == 56
    assert omega.read_text().startswith("omega-table v1 ")


def test_emit_csv(tmp_path):
    out = tmp_path / "r.json"
    csv_dir = tmp_path / "csv"
    assert run(["verify-decomposition", "--case", "a<=0.53", "--emit-csv", str(csv_dir), "--report", str(out)]) == 0
    assert (csv_dir / "omega.csv").read_text().startswith("u,omega")
    rows = (csv_dir / "thetas.csv").read_text().splitlines()
    assert rows[0] == "case,term,eps1,value,err,bound"
    assert len(rows) == 8


def test_parallel_jobs_match_serial(tmp_path):
    reports = []
    for jobs in ("1", "2"):
        p = tmp_path / f"j{jobs}.json"
        argv = ["verify-combinatorics", "--case", "I(ii)", "--count", "2000", "--jobs", jobs, "--report", str(p)]
        assert run(argv) == EXIT_OK
        reports.append(_report(p)["claims"])
    assert reports[0] == reports[1]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "sievecert", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "verify-all" in res.stdout


# ---------------------------------------------------------------------------
# exit codes under injected catalogs


def _claims_with(mutants: tuple[str, ...]):
    base = [exponents.claim_by_id(cid) for cid in CHEAP_CLAIMS]
    extra = [replace(exponents.claim_by_id(cid).tightened(0.05), id=f"{cid}-tightened") for cid in mutants]
    return base + extra


@pytest.mark.parametrize("mutants", [(), ("largetau",), ("smalltau-1A-0.36", "smalltau-2A-0.315")])
def test_exit_code_follows_injected_exponent_catalog(tmp_path, monkeypatch, mutants):
    claims = _claims_with(mutants)
    monkeypatch.setattr(exponents, "catalog_claims", lambda: claims)
    out = tmp_path / "r.json"
    code = run(["verify-exponents", "--report", str(out)])
    assert code == (EXIT_FAIL if mutants else EXIT_OK)
    failing = _report(out)["summary"]["failing"]
    assert failing == [f"{m}-tightened" for m in mutants]


@pytest.mark.parametrize("with_mutant", [False, True])
def test_exit_code_follows_injected_combinatorics_catalog(tmp_path, monkeypatch, with_mutant):
    cases = [combinatorics.case_by_id("I(i)")]
    if with_mutant:
        cases.append(combinatorics.mutant_case())
    monkeypatch.setattr(combinatorics, "case_catalog", lambda: tuple(cases))
    out = tmp_path / "r.json"
    code = run(["verify-combinatorics", "--count", "8192", "--seeds", "1", "--report", str(out)])
    assert code == (EXIT_FAIL if with_mutant else EXIT_OK)
    statuses = {r["id"]: r["status"] for r in _report(out)["claims"]}
    assert statuses["mutant-narrow-chi1"] == "DETECTED"
    if with_mutant:
        assert statuses["mutant-narrow-chi1/seed1"] == "FALSIFIED"


def test_inconclusive_counts_as_failure():
    claims = [{"id": "x", "status": "INCONCLUSIVE"}, {"id": "y", "status": "CERTIFIED"}]
    s = cli.summarize(claims)
    assert s["failing"] == ["x"]
    assert not s["all_passed"]
