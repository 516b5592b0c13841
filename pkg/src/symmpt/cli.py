"""Batch front-end: single points, geometry scans, SCI studies, resource
and tapering reports, driven by FCIDUMP files plus JSON groupings/manifests.

CSV rows follow a fixed, versioned schema; energies print with 10
decimals (hartree) and errors additionally in milli-hartree.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import time

import numpy as np

from . import eigensolver, pt2, sci
from .hamiltonian import partition_hamiltonian
from .integrals import freeze_core, load_fcidump
from .qubits import (jordan_wigner_terms, pauli_matrix, plan_tapering,
                     resource_report, sector_basis_states, taper)
from .symmetry import load_grouping

CSV_SCHEMA = "symmpt-scan-csv-v1"
CSV_COLUMNS = ("tag", "e0", "e1_diag", "e2_uc", "e2_sc", "e2_en", "e_total_sc",
               "ref_energy", "error_mEh", "n_det_ref", "n_irreps",
               "n_qubits_tapered", "wall_ms")


class PointError(RuntimeError):
    def __init__(self, tag, cause):
        super().__init__(f"point {tag!r} failed: {cause}")
        self.tag = tag
        self.cause = cause


def _load_system(fcidump_path, frozen, grouping_path):
    s = load_fcidump(fcidump_path)
    if frozen:
        s = freeze_core(s, frozen)
    model, target = load_grouping(grouping_path, s.n_alpha, s.n_beta)
    return s, model, target


def run_point(fcidump_path, grouping_path, frozen=(), methods=("sc",),
              ref_energy=None, tag="point", dense_limit=eigensolver.DENSE_LIMIT,
              regularize=False):
    """One second-order evaluation; returns a flat record dict."""
    t0 = time.perf_counter()
    s, model, target = _load_system(fcidump_path, frozen, grouping_path)
    part = partition_hamiltonian(s, model)
    result = pt2.run_pt2(part, target, methods=methods,
                           dense_limit=dense_limit, regularize=regularize)
    plan = plan_tapering(model, target, 2 * s.n_spatial)
    wall_ms = (time.perf_counter() - t0) * 1e3
    record = {
        "tag": tag,
        "e0": result.e0,
        "e1_diag": result.e1,
        "e2_uc": result.e2.get("uc"),
        "e2_sc": result.e2.get("sc"),
        "e2_en": result.e2.get("en"),
        "e_total_sc": (result.e0 + result.e2["sc"]) if "sc" in result.e2 else None,
        "ref_energy": ref_energy,
        "error_mEh": None,
        "n_det_ref": result.n_det_ref,
        "n_irreps": result.n_irreps,
        "n_qubits_tapered": 2 * s.n_spatial - plan.n_tapered,
        "wall_ms": wall_ms,
        "contributions": {
            method: {"".join(map(str, k)): v for k, v in contribs.items()}
            for method, contribs in result.contributions.items()
        },
    }
    if ref_energy is not None and record["e_total_sc"] is not None:
        record["error_mEh"] = (record["e_total_sc"] - ref_energy) * 1e3
    return record


def load_manifest(path):
    base = os.path.dirname(os.path.abspath(path))
    with open(path) as fh:
        data = json.load(fh)
    tags = [p["tag"] for p in data["points"]]
    if len(set(tags)) != len(tags):
        raise ValueError("manifest point tags must be unique")
    for p in data["points"]:
        p["fcidump"] = os.path.join(base, p["fcidump"])
        if not os.path.exists(p["fcidump"]):
            raise FileNotFoundError(p["fcidump"])
    data["grouping"] = os.path.join(base, data["grouping"])
    if not os.path.exists(data["grouping"]):
        raise FileNotFoundError(data["grouping"])
    data.setdefault("frozen_core", [])
    data.setdefault("methods", ["sc"])
    return data


def _fmt(value, decimals=10):
    if value is None:
        return ""
    return f"{value:.{decimals}f}"


def records_to_csv(records):
    lines = ["# " + CSV_SCHEMA, ",".join(CSV_COLUMNS)]
    for r in records:
        row = [
            str(r["tag"]),
            _fmt(r["e0"]), _fmt(r["e1_diag"]), _fmt(r["e2_uc"]),
            _fmt(r["e2_sc"]), _fmt(r["e2_en"]), _fmt(r["e_total_sc"]),
            _fmt(r["ref_energy"]),
            _fmt(r["error_mEh"], 6),
            str(r["n_det_ref"]), str(r["n_irreps"]),
            str(r["n_qubits_tapered"]),
            _fmt(r["wall_ms"], 3),
        ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def run_scan(manifest, methods=None, dense_limit=eigensolver.DENSE_LIMIT,
             regularize=False, workers=1, keep_going=False):
    """Evaluate every manifest point, preserving manifest order.

    Returns (records, failures); failures is a list of PointError.
    """
    methods = tuple(methods or manifest["methods"])
    frozen = tuple(manifest["frozen_core"])
    grouping = manifest["grouping"]

    def job(point):
        try:
            return run_point(point["fcidump"], grouping, frozen=frozen,
                             methods=methods, ref_energy=point.get("ref_energy"),
                             tag=point["tag"], dense_limit=dense_limit,
                             regularize=regularize)
        except Exception as exc:  # tagged and re-raised / collected
            raise PointError(point["tag"], exc) from exc

    records, failures = [], []
    points = manifest["points"]
    if workers <= 1:
        futures = [(point, None) for point in points]
    else:
        pool = concurrent.futures.ThreadPoolExecutor(max_workers=workers)
        futures = [(point, pool.submit(job, point)) for point in points]
    for point, fut in futures:
        try:
            records.append(job(point) if fut is None else fut.result())
        except PointError as err:
            if not keep_going:
                if workers > 1:
                    pool.shutdown(wait=False, cancel_futures=True)
                raise
            failures.append(err)
            records.append(_error_record(err.tag))
    if workers > 1:
        pool.shutdown()
    return records, failures


def _error_record(tag):
    return {key: None for key in CSV_COLUMNS} | {"tag": tag, "contributions": {}}


def _write_outputs(records, out_prefix):
    csv_text = records_to_csv(records)
    with open(out_prefix + ".csv", "w") as fh:
        fh.write(csv_text)
    with open(out_prefix + ".json", "w") as fh:
        json.dump(records, fh, indent=1, sort_keys=True)
        fh.write("\n")


# -- subcommand drivers -------------------------------------------------------

def _cmd_run(args):
    record = run_point(args.fcidump, args.grouping, frozen=args.frozen,
                       methods=args.method or ("sc",), tag=args.tag,
                       dense_limit=args.dense_limit,
                       regularize=args.regularize_intruders)
    if args.out:
        _write_outputs([record], args.out)
    print(records_to_csv([record]), end="")
    return 0


def _cmd_scan(args):
    manifest = load_manifest(args.manifest)
    records, failures = run_scan(
        manifest, methods=args.method or None, dense_limit=args.dense_limit,
        regularize=args.regularize_intruders, workers=args.workers,
        keep_going=args.keep_going)
    if args.out:
        _write_outputs(records, args.out)
    print(records_to_csv(records), end="")
    for err in failures:
        print(str(err), file=sys.stderr)
    return 1 if failures else 0


def _cmd_sci(args):
    if args.manifest:
        manifest = load_manifest(args.manifest)
        cfg = manifest.get("sci", {})
        eps1 = args.eps1 if args.eps1 is not None else cfg.get("eps1", 0.0)
        eps2 = args.eps2 if args.eps2 is not None else cfg.get("eps2", 0.0)
        sel_tag = args.selection_point or cfg.get("selection_point",
                                                  manifest["points"][0]["tag"])
        points = {p["tag"]: p for p in manifest["points"]}
        if sel_tag not in points:
            raise ValueError(f"selection point {sel_tag!r} not in manifest")
        frozen = tuple(manifest["frozen_core"])
        grouping = manifest["grouping"]
        selection = _select_at(points[sel_tag]["fcidump"], grouping, frozen,
                               eps1, eps2, sel_tag)
        rows = []
        for p in manifest["points"]:
            s = load_fcidump(p["fcidump"])
            if frozen:
                s = freeze_core(s, frozen)
            energy = sci.sci_energy(selection, s)
            ref = p.get("ref_energy")
            err = (energy - ref) * 1e3 if ref is not None else None
            rows.append((p["tag"], energy, ref, err))
        print(f"# sci eps1={eps1:g} eps2={eps2:g} selection_point={sel_tag} "
              f"n_dets={selection.n_dets} n_irreps={selection.n_irreps}")
        print("tag,e_sci,ref_energy,error_mEh")
        for tag, energy, ref, err in rows:
            print(f"{tag},{_fmt(energy)},{_fmt(ref)},{_fmt(err, 6)}")
        if args.out:
            sci.save_selection(args.out + ".selection.json", selection)
        return 0

    selection = _select_at(args.fcidump, args.grouping, args.frozen,
                           args.eps1 or 0.0, args.eps2 or 0.0, args.tag)
    s = load_fcidump(args.fcidump)
    if args.frozen:
        s = freeze_core(s, args.frozen)
    energy = sci.sci_energy(selection, s)
    print(f"# sci eps1={selection.eps1:g} eps2={selection.eps2:g} "
          f"n_dets={selection.n_dets} n_irreps={selection.n_irreps}")
    print(f"{args.tag},{_fmt(energy)},,")
    if args.out:
        sci.save_selection(args.out + ".selection.json", selection)
    return 0


def _select_at(fcidump_path, grouping_path, frozen, eps1, eps2, tag):
    s, model, target = _load_system(fcidump_path, frozen, grouping_path)
    part = partition_hamiltonian(s, model)
    sol = pt2.reference_energy(part, target)
    perturbers = pt2.perturber_states(part, sol)
    _, contribs = pt2.second_order_sc(part, sol, perturbers=perturbers)
    return sci.select(sol, perturbers, contribs, eps1, eps2, selection_point=tag)


def _cmd_resources(args):
    s = load_fcidump(args.fcidump)
    if args.frozen:
        s = freeze_core(s, args.frozen)
    rows = []
    for spec in args.grouping:
        name, _, path = spec.partition("=")
        if not path:
            name, path = os.path.splitext(os.path.basename(spec))[0], spec
        model, target = load_grouping(path, s.n_alpha, s.n_beta)
        rows.append((name, model, target))
    report = resource_report(s, rows)
    print("name,n_orbitals,n_qubits,n_configurations")
    for row in report:
        print(f"{row.name},{row.n_orbitals},{row.n_qubits},{row.n_configurations}")
    return 0


def _cmd_taper_verify(args):
    s, model, target = _load_system(args.fcidump, args.frozen, args.grouping)
    n_qubits = 2 * s.n_spatial
    if n_qubits > args.max_qubits:
        print(f"refusing dense check on {n_qubits} qubits "
              f"(limit {args.max_qubits})", file=sys.stderr)
        return 2
    # augmented generators commute with the reference Hamiltonian only, so
    # that is the operator being tapered (equal to full H for exact groupings)
    part = partition_hamiltonian(s, model)
    ph = jordan_wigner_terms(part.ref_terms, n_qubits, constant=part.core_energy)
    plan = plan_tapering(model, target, n_qubits)
    tapered = taper(ph, plan)
    states = sector_basis_states(plan)
    projected = pauli_matrix(ph, states)
    reduced = pauli_matrix(tapered)
    w_proj = np.linalg.eigvalsh(projected)
    w_tap = np.linalg.eigvalsh(reduced)
    deviation = float(np.abs(w_proj - w_tap).max())
    print(f"qubits: {n_qubits} -> {tapered.n_qubits}")
    print(f"sector dimension: {len(states)}")
    print(f"max spectral deviation: {deviation:.3e}")
    if args.out:
        with open(args.out + ".pauli.txt", "w") as fh:
            fh.write(tapered.export_text())
    return 0 if deviation < 1e-10 else 1


def _int_list(text):
    return [int(tok) for tok in text.split(",") if tok != ""]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="symmpt",
        description="Symmetry-partitioned PT2, selected CI, and qubit "
                    "resource reports over FCIDUMP inputs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grouping=True):
        p.add_argument("--fcidump", help="FCIDUMP input file")
        if grouping:
            p.add_argument("--grouping", help="grouping JSON file")
        p.add_argument("--frozen", type=_int_list, default=[],
                       help="comma-separated core spatial orbitals")
        p.add_argument("--dense-limit", type=int, default=eigensolver.DENSE_LIMIT)
        p.add_argument("--regularize-intruders", action="store_true")
        p.add_argument("--out", help="output path prefix")
        p.add_argument("--tag", default="point")

    p_run = sub.add_parser("run", help="single-point second-order run")
    common(p_run)
    p_run.add_argument("--method", action="append", choices=pt2.METHODS,
                       help="correction(s) to evaluate; repeatable")
    p_run.set_defaults(func=_cmd_run)

    p_scan = sub.add_parser("scan", help="manifest-driven geometry scan")
    p_scan.add_argument("--manifest", required=True)
    p_scan.add_argument("--method", action="append", choices=pt2.METHODS)
    p_scan.add_argument("--workers", type=int, default=1)
    p_scan.add_argument("--keep-going", action="store_true",
                        help="record failures and continue")
    p_scan.add_argument("--dense-limit", type=int, default=eigensolver.DENSE_LIMIT)
    p_scan.add_argument("--regularize-intruders", action="store_true")
    p_scan.add_argument("--out")
    p_scan.set_defaults(func=_cmd_scan)

    p_sci = sub.add_parser("sci", help="selected-CI study")
    common(p_sci)
    p_sci.add_argument("--manifest")
    p_sci.add_argument("--eps1", type=float)
    p_sci.add_argument("--eps2", type=float)
    p_sci.add_argument("--selection-point")
    p_sci.set_defaults(func=_cmd_sci)

    p_res = sub.add_parser("resources", help="qubit/configuration counts")
    p_res.add_argument("--fcidump", required=True)
    p_res.add_argument("--frozen", type=_int_list, default=[])
    p_res.add_argument("--grouping", action="append", required=True,
                       metavar="NAME=PATH")
    p_res.set_defaults(func=_cmd_resources)

    p_tv = sub.add_parser("taper-verify",
                          help="check tapered vs sector-projected spectra")
    common(p_tv)
    p_tv.add_argument("--max-qubits", type=int, default=14)
    p_tv.set_defaults(func=_cmd_taper_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PointError as err:
        print(str(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
