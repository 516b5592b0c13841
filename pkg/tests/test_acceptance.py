"""Acceptance gate: one test per primary criterion, at stated tolerances.

Each criterion prints an `ACCEPTANCE PASS/FAIL: <name>` line (visible with
pytest -s, or in captured output).  Runtime budgets are asserted where the
criterion states one.
"""

import time
from contextlib import contextmanager
from itertools import combinations

import numpy as np

from symmpt import (build_sector_matrix, count_sector, diagonal_values,
                    enumerate_sector, first_order, full_hamiltonian_matrix,
                    jordan_wigner, jordan_wigner_terms, matrix_element,
                    partition_hamiltonian, pauli_matrix, perturber_states,
                    plan_tapering, reference_energy, resource_report, run_pt2,
                    second_order_sc, second_order_uc, sector_basis_states,
                    sector_labels, taper)
from symmpt.sci import select, sci_energy
from symmpt.symmetry import SymmetryModel, Z2Generator

from conftest import grouping, integrals, partitioned, ref_energy, scan_tags


@contextmanager
def criterion(name):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE FAIL: {name}")
        raise
    else:
        print(f"ACCEPTANCE PASS: {name} ({time.perf_counter() - start:.2f}s)")


def _resource_table(family, names):
    s = integrals(family, scan_tags(family)[0] if family != "h2o_sto3g" else "r1.8")
    rows = [(name,) + grouping(family, name) for name in names]
    return resource_report(s, rows)


def test_resource_counts_h2o():
    with criterion("resource counts H2O: configs 125/36/16/9, qubits 9/6/4/4, < 1 s"):
        t0 = time.perf_counter()
        report = _resource_table("h2o_sto3g", ("exact", "cas44", "augmented", "cas43"))
        configs = tuple(r.n_configurations for r in report)
        qubits = tuple(r.n_qubits for r in report)
        elapsed = time.perf_counter() - t0
        assert configs == (125, 36, 16, 9), configs
        assert qubits == (9, 6, 4, 4), qubits
        assert elapsed < 1.0, f"runtime {elapsed:.2f}s"


def test_resource_counts_n2():
    with criterion("resource counts N2: configs 396/56/16/32, qubits 11/7/6/5, < 1 s"):
        t0 = time.perf_counter()
        report = _resource_table("n2_sto3g", ("exact", "cas66", "cas65", "augmented"))
        configs = tuple(r.n_configurations for r in report)
        qubits = tuple(r.n_qubits for r in report)
        elapsed = time.perf_counter() - t0
        assert configs == (396, 56, 16, 32), configs
        assert elapsed < 1.0, f"runtime {elapsed:.2f}s"
        assert qubits == (11, 7, 6, 5), (
            f"tapered qubit counts {qubits}: the cas65 row tapers to "
            "5 qubits under rank-based tapering for any grouping that "
            "also reproduces its 16 configurations; see the decisions "
            "ledger for the analysis of the published value 6")


GROUPINGS = {
    "h2o_sto3g": ("exact", "cas44", "augmented", "cas43", "augmented_altsplit"),
    "n2_sto3g": ("exact", "cas66", "cas65", "augmented"),
    "h2_sto3g": ("exact",),
}


def test_first_order_vanishing():
    with criterion("first-order term below 1e-10 for every point and grouping"):
        worst = 0.0
        for family, names in GROUPINGS.items():
            for tag in scan_tags(family):
                for name in names:
                    part, target = partitioned(family, name, tag)
                    sol = reference_energy(part, target)
                    e1 = first_order(part, sol)  # raises at >= 1e-10
                    worst = max(worst, abs(e1))
        assert worst < 1e-10
        print(f"  worst |E1| = {worst:.2e}")


def test_variational_bound():
    with criterion("E0 >= sector FCI everywhere; equality for the exact grouping"):
        min_margin = np.inf
        for family in ("h2o_sto3g", "n2_sto3g", "h2_sto3g"):
            for tag in scan_tags(family):
                fci = ref_energy(family, tag)
                part, target = partitioned(family, "augmented" if family != "h2_sto3g"
                                           else "exact", tag)
                sol = reference_energy(part, target)
                margin = sol.energy - fci
                assert margin >= -1e-10, (family, tag, margin)
                min_margin = min(min_margin, margin)
                part_e, target_e = partitioned(family, "exact", tag)
                sol_e = reference_energy(part_e, target_e)
                assert abs(sol_e.energy - fci) < 1e-10, (family, tag)
        print(f"  smallest margin E0 - E_FCI = {min_margin:.3e} hartree")


def _dense_resolvent_oracle(s, part, target, sol):
    trivial = SymmetryModel(s.n_alpha, s.n_beta, ())
    full_basis = enumerate_sector(trivial, (), s.n_spatial)
    hfull = full_hamiltonian_matrix(full_basis, s).toarray()
    index = {int(d): i for i, d in enumerate(full_basis)}
    psi = np.zeros(len(full_basis))
    for i, d in enumerate(sol.basis):
        psi[index[int(d)]] = sol.vector[i]
    w = hfull @ psi
    total = 0.0
    for label, dets in sector_labels(full_basis, part.model).items():
        if label == tuple(target):
            continue
        rows = np.array([index[int(d)] for d in dets])
        evals, evecs = np.linalg.eigh(hfull[np.ix_(rows, rows)])
        overlaps = evecs.T @ w[rows]
        total += float(np.sum(overlaps ** 2 / (sol.energy - evals)))
    return total


def test_uncontracted_matches_dense_resolvent_oracle():
    with criterion("uncontracted E2 equals the dense resolvent oracle "
                   "within 1e-10 on H2O and N2, < 10 s"):
        t0 = time.perf_counter()
        for family in ("h2o_sto3g", "n2_sto3g"):
            s = integrals(family, "r1.8")
            part, target = partitioned(family, "augmented")
            sol = reference_energy(part, target)
            e2, _ = second_order_uc(part, sol)
            oracle = _dense_resolvent_oracle(s, part, target, sol)
            assert abs(e2 - oracle) < 1e-10, (family, e2, oracle)
        elapsed = time.perf_counter() - t0
        assert elapsed < 10.0, f"runtime {elapsed:.2f}s"


def _hf_determinant(s):
    trivial = SymmetryModel(s.n_alpha, s.n_beta, ())
    dets = enumerate_sector(trivial, (), s.n_spatial)
    return int(dets[np.argmin(diagonal_values(dets, s))])


def test_epstein_nesbet_reduction():
    with criterion("per-spin-orbital grouping reproduces single-reference "
                   "Epstein-Nesbet PT2 within 1e-10"):
        for family, tag in (("h2o_sto3g", "r1.0"), ("n2_sto3g", "r1.2")):
            s = integrals(family, tag)
            det0 = _hf_determinant(s)
            gens = tuple(Z2Generator((p,)) for p in range(2 * s.n_spatial))
            target = tuple((det0 >> p) & 1 for p in range(2 * s.n_spatial))
            model = SymmetryModel(s.n_alpha, s.n_beta, gens)
            part = partition_hamiltonian(s, model)
            res = run_pt2(part, target, methods=("en",))

            e_hf = matrix_element(det0, det0, s)
            occ = [p for p in range(2 * s.n_spatial) if (det0 >> p) & 1]
            virt = [p for p in range(2 * s.n_spatial) if not (det0 >> p) & 1]
            oracle = 0.0
            hole_sets = list(combinations(occ, 1)) + list(combinations(occ, 2))
            part_sets = list(combinations(virt, 1)) + list(combinations(virt, 2))
            for holes in hole_sets:
                for parts_ in part_sets:
                    if len(holes) != len(parts_):
                        continue
                    det = det0
                    for h in holes:
                        det &= ~(1 << h)
                    for p in parts_:
                        det |= 1 << p
                    num = matrix_element(det, det0, s)
                    if num:
                        oracle += num * num / (e_hf - matrix_element(det, det, s))
            assert abs(res.e0 - e_hf) < 1e-10
            assert abs(res.e2["en"] - oracle) < 1e-10, family


def test_sc_sanity():
    with criterion("SC tracks UC better than EN on stretched N2; H2O "
                   "SC total error stays below 25 mEh"):
        for tag in ("r2.0", "r2.2", "r2.4", "r2.6", "r2.8"):
            part, target = partitioned("n2_sto3g", "augmented", tag)
            res = run_pt2(part, target, methods=("uc", "sc", "en"))
            assert (abs(res.e2["sc"] - res.e2["uc"])
                    < abs(res.e2["en"] - res.e2["uc"])), tag
        worst = 0.0
        for tag in scan_tags("h2o_sto3g"):
            part, target = partitioned("h2o_sto3g", "augmented", tag)
            res = run_pt2(part, target, methods=("sc",))
            err = abs(res.e0 + res.e2["sc"] - ref_energy("h2o_sto3g", tag))
            worst = max(worst, err)
        assert worst < 25e-3, f"max |error| = {worst * 1e3:.2f} mEh"
        print(f"  max H2O SC error = {worst * 1e3:.2f} mEh")


def test_sci_counts_and_bounds():
    with criterion("zero-cutoff selection: 116 dets / 20 irreps (H2O), "
                   "280 / 28 (N2); variational and monotone everywhere"):
        selections = {}
        for family, n_dets, n_irreps in (("h2o_sto3g", 116, 20),
                                         ("n2_sto3g", 280, 28)):
            part, target = partitioned(family, "augmented", "r1.8")
            sol = reference_energy(part, target)
            perturbers = perturber_states(part, sol)
            _, contribs = second_order_sc(part, sol, perturbers=perturbers)
            tight = select(sol, perturbers, contribs, 0.0, 0.0,
                           selection_point="r1.8")
            assert tight.n_dets == n_dets, (family, tight.n_dets)
            assert tight.n_irreps == n_irreps, (family, tight.n_irreps)
            loose = select(sol, perturbers, contribs, 0.0, 0.1,
                           selection_point="r1.8")
            selections[family] = (loose, tight)
        for family, (loose, tight) in selections.items():
            for tag in scan_tags(family):
                s = integrals(family, tag)
                e_loose = sci_energy(loose, s)
                e_tight = sci_energy(tight, s)
                fci = ref_energy(family, tag)
                assert e_tight >= fci - 1e-10, (family, tag)
                assert e_tight <= e_loose + 1e-12, (family, tag)


def test_tapering_spectral_exactness():
    with criterion("tapered spectra equal sector-projected spectra within "
                   "1e-10 (H2 full H, H2O 12-qubit), < 60 s"):
        t0 = time.perf_counter()
        h2 = integrals("h2_sto3g", "r0.74")
        model, target = grouping("h2_sto3g", "exact")
        ph = jordan_wigner(h2)
        plan = plan_tapering(model, target, 4)
        w_proj = np.linalg.eigvalsh(pauli_matrix(ph, sector_basis_states(plan)))
        w_tap = np.linalg.eigvalsh(pauli_matrix(taper(ph, plan)))
        assert np.abs(np.sort(w_proj) - np.sort(w_tap)).max() < 1e-10

        s = integrals("h2o_sto3g", "r1.8")
        # augmented plan acts on the reference Hamiltonian (12 -> 4 qubits)
        part, target = partitioned("h2o_sto3g", "augmented")
        ph_ref = jordan_wigner_terms(part.ref_terms, 12,
                                     constant=part.core_energy)
        plan = plan_tapering(part.model, target, 12)
        tapered = taper(ph_ref, plan)
        assert tapered.n_qubits == 4
        w_proj = np.linalg.eigvalsh(pauli_matrix(ph_ref, sector_basis_states(plan)))
        w_tap = np.linalg.eigvalsh(pauli_matrix(tapered))
        assert np.abs(np.sort(w_proj) - np.sort(w_tap)).max() < 1e-10

        # exact plan acts on the full Hamiltonian (12 -> 9 qubits)
        model_e, target_e = grouping("h2o_sto3g", "exact")
        ph_full = jordan_wigner(s)
        plan_e = plan_tapering(model_e, target_e, 12)
        tapered_e = taper(ph_full, plan_e)
        assert tapered_e.n_qubits == 9
        states = sector_basis_states(plan_e)
        w_proj = np.linalg.eigvalsh(pauli_matrix(ph_full, states))
        w_tap = np.linalg.eigvalsh(pauli_matrix(tapered_e))
        assert np.abs(np.sort(w_proj) - np.sort(w_tap)).max() < 1e-10
        elapsed = time.perf_counter() - t0
        assert elapsed < 60.0, f"runtime {elapsed:.1f}s"


def test_jw_determinant_consistency():
    with criterion("Pauli-form sector matrices equal Slater-Condon matrices "
                   "within 1e-10 (H2 and the H2O reference sector)"):
        h2 = integrals("h2_sto3g", "r0.74")
        model, target = grouping("h2_sto3g", "exact")
        basis = enumerate_sector(model, target, h2.n_spatial)
        direct = full_hamiltonian_matrix(basis, h2).toarray()
        assert np.abs(pauli_matrix(jordan_wigner(h2), basis) - direct).max() < 1e-10

        s = integrals("h2o_sto3g", "r1.8")
        part, target = partitioned("h2o_sto3g", "augmented")
        basis = enumerate_sector(part.model, target, s.n_spatial)
        assert len(basis) == 16
        ph_ref = jordan_wigner_terms(part.ref_terms, 12,
                                     constant=part.core_energy)
        direct = build_sector_matrix(basis, part.ref_terms, 12,
                                     core_energy=part.core_energy).toarray()
        assert np.abs(pauli_matrix(ph_ref, basis) - direct).max() < 1e-10


def test_larger_basis_enumeration():
    with criterion("6-31G enumeration: reference sectors 41472 / 25088, "
                   "tapered qubits 21 / 17, exact sector 2388528, < 60 s"):
        t0 = time.perf_counter()
        s = integrals("n2_631g", "r1.8")
        assert s.n_spatial == 16
        report = resource_report(
            s, [(name,) + grouping("n2_631g", name) for name in ("a4", "a6")])
        table = {r.name: (r.n_qubits, r.n_configurations) for r in report}
        assert table["a4"] == (21, 41472)
        assert table["a6"] == (17, 25088)
        model, target = grouping("n2_631g", "exact")
        assert count_sector(model, target, 16) == 2388528
        elapsed = time.perf_counter() - t0
        assert elapsed < 60.0, f"runtime {elapsed:.1f}s"
