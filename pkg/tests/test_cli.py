"""Batch front-end: records, manifests, CSV schema, subcommands."""

import json
import subprocess
import sys

import pytest

from symmpt import run_pt2
from symmpt.cli import (CSV_COLUMNS, PointError, load_manifest, main,
                        records_to_csv, run_point, run_scan)

from conftest import fixture_path, partitioned


H2O_MANIFEST = fixture_path("h2o_sto3g", "manifest.json")
H2O_FCIDUMP = fixture_path("h2o_sto3g", "points", "r1.8.fcidump")
H2O_AUGMENTED = fixture_path("h2o_sto3g", "groupings", "augmented.json")


def strip_wall(csv_text):
    rows = [line.rsplit(",", 1)[0] for line in csv_text.splitlines()]
    return "\n".join(rows)


def test_run_point_without_methods_reports_e0_only():
    rec = run_point(H2O_FCIDUMP, H2O_AUGMENTED, frozen=(0,), methods=(), tag="t")
    assert rec["e0"] is not None
    assert rec["e2_uc"] is None and rec["e2_sc"] is None and rec["e2_en"] is None
    assert rec["e_total_sc"] is None


def test_run_point_counts_match_resource_table():
    rec = run_point(H2O_FCIDUMP, H2O_AUGMENTED, frozen=(0,), methods=("sc",))
    assert rec["n_det_ref"] == 16
    assert rec["n_qubits_tapered"] == 4
    assert rec["n_irreps"] == 20


def test_cli_record_matches_library_bit_exactly():
    rec = run_point(H2O_FCIDUMP, H2O_AUGMENTED, frozen=(0,), methods=("sc",))
    part, target = partitioned("h2o_sto3g", "augmented")
    res = run_pt2(part, target, methods=("sc",))
    assert rec["e2_sc"] == res.e2["sc"]
    assert rec["e0"] == res.e0


def test_manifest_loading_and_scan_single_point(tmp_path):
    man = load_manifest(H2O_MANIFEST)
    man["points"] = [p for p in man["points"] if p["tag"] == "r1.8"]
    records, failures = run_scan(man, methods=("sc",))
    assert not failures
    assert len(records) == 1
    assert records[0]["tag"] == "r1.8"
    assert records[0]["error_mEh"] is not None


def test_csv_schema_and_determinism():
    man = load_manifest(H2O_MANIFEST)
    man["points"] = man["points"][:3]
    records, _ = run_scan(man, methods=("sc",))
    csv1 = records_to_csv(records)
    header = csv1.splitlines()
    assert header[0].startswith("#")
    assert header[1] == ",".join(CSV_COLUMNS)
    records2, _ = run_scan(man, methods=("sc",))
    csv2 = records_to_csv(records2)
    # byte-identical apart from the wall-time column
    assert strip_wall(csv1) == strip_wall(csv2)


def test_scan_workers_preserve_order():
    man = load_manifest(H2O_MANIFEST)
    man["points"] = man["points"][:4]
    serial, _ = run_scan(man, methods=("sc",), workers=1)
    threaded, _ = run_scan(man, methods=("sc",), workers=3)
    assert [r["tag"] for r in serial] == [r["tag"] for r in threaded]
    for a, b in zip(serial, threaded):
        assert a["e0"] == b["e0"]


def test_scan_failure_handling(tmp_path):
    man = load_manifest(H2O_MANIFEST)
    man["points"] = list(man["points"][:2])
    man["points"][1] = dict(man["points"][1], fcidump=str(tmp_path / "x.fcidump"))
    (tmp_path / "x.fcidump").write_text("&FCI NORB=1,NELEC=2 &END\nbroken\n")
    with pytest.raises(PointError):
        run_scan(man, methods=("sc",))
    records, failures = run_scan(man, methods=("sc",), keep_going=True)
    assert len(failures) == 1
    assert records[1]["e0"] is None


def test_duplicate_tags_rejected(tmp_path):
    man = json.load(open(H2O_MANIFEST))
    man["points"] = [man["points"][0], dict(man["points"][0])]
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(man))
    with pytest.raises(ValueError):
        load_manifest(path)


def test_main_run_exit_code(capsys):
    code = main(["run", "--fcidump", H2O_FCIDUMP, "--grouping", H2O_AUGMENTED,
                 "--frozen", "0", "--method", "sc", "--tag", "r1.8"])
    assert code == 0
    out = capsys.readouterr().out
    assert "r1.8" in out


def test_main_resources(capsys):
    code = main([
        "resources", "--fcidump", H2O_FCIDUMP, "--frozen", "0",
        "--grouping", "exact=" + fixture_path("h2o_sto3g", "groupings", "exact.json"),
        "--grouping", "augmented=" + H2O_AUGMENTED,
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "exact,6,9,125" in out
    assert "augmented,4,4,16" in out


def test_main_taper_verify(capsys):
    code = main(["taper-verify", "--fcidump",
                 fixture_path("h2_sto3g", "points", "r0.74.fcidump"),
                 "--grouping", fixture_path("h2_sto3g", "groupings", "exact.json")])
    assert code == 0
    out = capsys.readouterr().out
    assert "4 -> 2" in out


def test_main_sci_single_point(capsys, tmp_path):
    code = main(["sci", "--fcidump", H2O_FCIDUMP, "--grouping", H2O_AUGMENTED,
                 "--frozen", "0", "--eps1", "0", "--eps2", "0",
                 "--out", str(tmp_path / "sel")])
    assert code == 0
    out = capsys.readouterr().out
    assert "n_dets=116" in out
    assert "n_irreps=20" in out
    assert (tmp_path / "sel.selection.json").exists()


def test_main_scan_writes_outputs(tmp_path, capsys):
    # restrict to two points through a temporary manifest for speed
    man = json.load(open(H2O_MANIFEST))
    man["points"] = man["points"][:2]
    for p in man["points"]:
        p["fcidump"] = fixture_path("h2o_sto3g", p["fcidump"])
    man["grouping"] = H2O_AUGMENTED
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(man))
    code = main(["scan", "--manifest", str(path), "--method", "sc",
                 "--out", str(tmp_path / "scan")])
    assert code == 0
    assert (tmp_path / "scan.csv").exists()
    assert (tmp_path / "scan.json").exists()
    data = json.load(open(tmp_path / "scan.json"))
    assert len(data) == 2


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "symmpt.cli", "resources",
         "--fcidump", fixture_path("n2_sto3g", "points", "r1.8.fcidump"),
         "--frozen", "0,5",
         "--grouping", "augmented=" + fixture_path("n2_sto3g", "groupings", "augmented.json")],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "augmented,6,5,32" in proc.stdout
