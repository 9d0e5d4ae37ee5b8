from __future__ import annotations

import json
import subprocess
import sys

import pytest

import kautz_census.oracle as oracle
from kautz_census import cli
from kautz_census.oracle import Spectrum
from kautz_census.transfer import REFERENCE_DELTAS


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def body_of(out):
    return cli.parse_json_document(out)[1]


def test_spectrum_rho_json(capsys):
    code, out, _ = run(capsys, "spectrum", "--d", "2", "--D", "3", "--kind", "rho", "--format", "json")
    assert code == 0
    assert body_of(out) == {"1": "6", "2": "6", "3": "12"}
    meta = cli.parse_json_document(out)[0]
    assert meta["convention"]["word_length"] == "m = D"
    assert meta["d"] == 2 and meta["D"] == 3 and meta["method"] == "oracle"


def test_spectrum_sigma(capsys):
    code, out, _ = run(capsys, "spectrum", "--d", "2", "--D", "3", "--kind", "sigma")
    assert code == 0
    assert body_of(out) == {"1": "24", "2": "42", "3": "66"}


def test_spectrum_recursion_matches_oracle(capsys):
    _, a, _ = run(capsys, "spectrum", "--d", "2", "--D", "9", "--kind", "sigma")
    _, b, _ = run(capsys, "spectrum", "--d", "2", "--D", "9", "--kind", "sigma", "--method", "recursion")
    assert body_of(a) == body_of(b)


def test_spectrum_rejects_degree_one(capsys):
    code, _, err = run(capsys, "spectrum", "--d", "1", "--D", "3")
    assert code == 2
    assert "d must be >= 2" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["spectrum", "--d", "2"])
    assert info.value.code == 2


def test_cap_refusal_names_override(capsys, monkeypatch):
    code, _, err = run(capsys, "spectrum", "--d", "2", "--D", "12", "--cap", "1000")
    assert code == 3
    assert "KAUTZ_EDGE_CAP" in err and "--cap" in err
    monkeypatch.setenv("KAUTZ_EDGE_CAP", "100")
    assert run(capsys, "spectrum", "--d", "2", "--D", "8")[0] == 3


def test_csv_contract_and_roundtrip(capsys):
    code, out, _ = run(capsys, "spectrum", "--d", "2", "--D", "10", "--kind", "rho", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "d,D,k,kind,count"
    parsed = cli.parse_csv_document(out)
    _, js, _ = run(capsys, "spectrum", "--d", "2", "--D", "10", "--kind", "rho")
    assert parsed == {(2, 10, "rho"): {int(k): int(v) for k, v in body_of(js).items()}}


def test_json_roundtrip_and_byte_stability(capsys, tmp_path):
    out_file = tmp_path / "rho.json"
    assert run(capsys, "spectrum", "--d", "3", "--D", "5", "--out", str(out_file))[0] == 0
    first = out_file.read_bytes()
    assert run(capsys, "spectrum", "--d", "3", "--D", "5", "--out", str(out_file))[0] == 0
    assert out_file.read_bytes() == first
    doc = json.loads(first)
    assert cli.render_json(doc).encode() == first
    assert all(isinstance(v, str) for v in doc["body"].values())


def test_large_counts_stay_exact(capsys):
    _, out, _ = run(capsys, "necklace", "--n", "60", "--q", "9")
    body = body_of(out)
    assert int(body["oriented_edge_count"]) % 60 == 0
    assert len(body["oriented_edge_count"]) > 50


def test_delta_oracle(capsys):
    _, out, _ = run(capsys, "delta", "--d", "2", "--D", "3", "--method", "oracle")
    assert body_of(out) == {"1": "0", "2": "0", "3": "12"}
    _, out, _ = run(capsys, "delta", "--d", "2", "--D", "11", "--method", "oracle")
    body = body_of(out)
    assert [body[str(k)] for k in range(7, 11)] == ["6", "18", "96", "384"]
    assert len(body) == 11


def test_delta_transfer_needs_calibration(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, _, err = run(capsys, "delta", "--d", "2", "--D", "10", "--method", "transfer")
    assert code == 4
    assert "calibrate" in err


def test_delta_transfer_with_pinned_schedule(capsys, tmp_path):
    schedule = tmp_path / "s.json"
    code, _, _ = run(
        capsys, "calibrate", "--D-max", "4", "--out", str(schedule),
        "--pin", "sectionB/as-written/mask-after-transfer/row+0",
    )
    assert code == 0
    code, out, _ = run(capsys, "delta", "--d", "2", "--D", "10", "--method", "transfer", "--schedule", str(schedule))
    assert code == 0
    doc = json.loads(out)
    assert sorted(doc["body"], key=int) == [str(k) for k in range(1, 11)]
    assert len(doc["per_start"]["9"]) == 6
    assert doc["meta"]["schedule"]["offset_formula"] == "sectionB"
    assert all(int(v) % 6 == 0 for v in doc["body"].values())


def test_delta_transfer_missing_masks(capsys, tmp_path):
    schedule = tmp_path / "s.json"
    run(capsys, "calibrate", "--D-max", "3", "--out", str(schedule), "--pin", "sectionB/as-written/mask-after-transfer/row+0")
    code, _, err = run(capsys, "delta", "--d", "3", "--D", "5", "--method", "transfer", "--schedule", str(schedule))
    assert code == 2
    assert "masks" in err


@pytest.mark.parametrize("d, D_max", [(2, 10), (3, 6)])
def test_verify_passes(capsys, d, D_max):
    code, out, _ = run(capsys, "verify", "--d", str(d), "--D-max", str(D_max))
    assert code == 0
    assert json.loads(out)["body"]["passed"] is True


def test_verify_strict_fails_on_necklace_claim(capsys):
    code, out, _ = run(capsys, "verify", "--d", "2", "--D-max", "6", "--strict")
    assert code == 1
    failing = json.loads(out)["body"]["failing_records"]
    assert {r["identity"] for r in failing} == {"necklace_top"}


def test_verify_detects_corrupted_census(capsys, monkeypatch):
    real = oracle.sigma_census

    def corrupted(params, *args, **kwargs):
        spec = real(params, *args, **kwargs)
        if params.D == 3:
            counts = dict(spec.counts)
            counts[2] += 1
            return Spectrum(params, "sigma", counts)
        return spec

    monkeypatch.setattr(oracle, "sigma_census", corrupted)
    code, out, _ = run(capsys, "verify", "--d", "2", "--D-max", "5")
    assert code == 1
    failing = json.loads(out)["body"]["failing_records"]
    assert any(r["identity"] == "sigma_recursion" and r["D"] == 2 and r["k"] == 1 for r in failing)


def test_necklace_commands(capsys):
    _, out, _ = run(capsys, "necklace", "--n", "4", "--q", "3", "--method", "formula")
    assert body_of(out) == {"primitive_count": "3", "oriented_edge_count": "12"}
    _, out, _ = run(capsys, "necklace", "--n", "2", "--q", "3", "--method", "enumerate")
    assert body_of(out)["primitive_count"] == "3"
    code, _, err = run(capsys, "necklace", "--n", "2", "--q", "3", "--method", "formula")
    assert code == 2
    assert "enumerate" in err


def test_calibrate_reports_no_match_and_writes_report(capsys, tmp_path):
    target = tmp_path / "schedule.json"
    code, out, err = run(capsys, "calibrate", "--d", "2", "--D-max", "12", "--out", str(target))
    assert code == 5
    assert "calibration failed" in err
    report = json.loads(target.read_text())
    assert report["outcome"] == "no-match"
    assert len(report["candidates"]) == 16
    assert out.count("/row+") == 16
    assert f"0/{len(REFERENCE_DELTAS)}" in out


def test_calibrate_short_range(capsys, tmp_path):
    code, _, _ = run(capsys, "calibrate", "--D-max", "4", "--out", str(tmp_path / "s.json"))
    assert code == 5
    report = json.loads((tmp_path / "s.json").read_text())
    assert report["outcome"] == "no-match"


def test_calibrate_is_idempotent(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "calibrate", "--D-max", "8", "--out", str(a))
    run(capsys, "calibrate", "--D-max", "8", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_schedule_env_var(capsys, tmp_path, monkeypatch):
    schedule = tmp_path / "env.json"
    run(capsys, "calibrate", "--D-max", "3", "--out", str(schedule), "--pin", "sectionA/reversed/mask-before-transfer/row+1")
    monkeypatch.setenv(cli.SCHEDULE_ENV, str(schedule))
    code, out, _ = run(capsys, "delta", "--d", "2", "--D", "6", "--method", "transfer")
    assert code == 0
    doc = json.loads(out)
    assert doc["meta"]["schedule"]["row_offset"] == 1
    assert doc["meta"]["out_of_domain"] == [6]
    assert sorted(doc["body"], key=int) == ["1", "2", "3", "4", "5"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "kautz_census", "spectrum", "--d", "2", "--D", "2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["body"] == {"1": "6", "2": "6"}
