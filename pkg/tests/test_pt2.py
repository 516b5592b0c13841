"""Zeroth order, vanishing first order, and the three second-order paths."""

import numpy as np
import pytest
import scipy.linalg

from symmpt import (IntegralSet, IntruderStateError,
                    diagonal_values, enumerate_sector, first_order,
                    full_hamiltonian_matrix, matrix_element,
                    partition_hamiltonian, perturber_states, reference_energy,
                    run_pt2, second_order_en, second_order_sc, second_order_uc,
                    sector_labels)
from symmpt.hamiltonian import PartitioningError
from symmpt.symmetry import SymmetryModel, Z2Generator

from conftest import integrals, partitioned, ref_energy, scan_tags


def hf_determinant(s):
    """Lowest-diagonal determinant of the Ms-restricted space."""
    trivial = SymmetryModel(s.n_alpha, s.n_beta, ())
    dets = enumerate_sector(trivial, (), s.n_spatial)
    return int(dets[np.argmin(diagonal_values(dets, s))])


def singleton_grouping(s):
    """Every spin orbital its own generator; target = aufbau determinant."""
    det = hf_determinant(s)
    gens = tuple(Z2Generator((p,)) for p in range(2 * s.n_spatial))
    target = tuple((det >> p) & 1 for p in range(2 * s.n_spatial))
    model = SymmetryModel(s.n_alpha, s.n_beta, gens)
    return model, target


def test_reference_energy_unaugmented_equals_sector_fci(h2o_r18):
    part, target = partitioned("h2o_sto3g", "exact")
    sol = reference_energy(part, target)
    assert abs(sol.energy - ref_energy("h2o_sto3g", "r1.8")) < 1e-9


def test_reference_sector_size(h2o_r18):
    part, target = partitioned("h2o_sto3g", "augmented")
    sol = reference_energy(part, target)
    assert len(sol.basis) == 16


def test_reference_energy_is_upper_bound_everywhere():
    for family in ("h2o_sto3g", "n2_sto3g"):
        for tag in scan_tags(family):
            part, target = partitioned(family, "augmented", tag)
            sol = reference_energy(part, target)
            assert sol.energy >= ref_energy(family, tag) - 1e-10, (family, tag)


def test_empty_sector_and_state_range_errors(h2o_r18):
    part, target = partitioned("h2o_sto3g", "augmented")
    with pytest.raises(ValueError):
        reference_energy(part, target, n=10**6)


def test_first_order_vanishes(h2o_r18):
    part, target = partitioned("h2o_sto3g", "augmented")
    sol = reference_energy(part, target)
    assert abs(first_order(part, sol)) < 1e-10


def test_first_order_negative_control(h2o_r18):
    """Deliberately mis-partitioned Hamiltonian: a zero-shift term moved
    into a perturbation block makes the first order nonzero and raises."""
    part, target = partitioned("h2o_sto3g", "augmented")
    sol = reference_energy(part, target)
    import copy

    bad = copy.copy(part)
    bad.pert_blocks = {k: list(v) for k, v in part.pert_blocks.items()}
    moved = next(t for t in part.ref_terms
                 if len(t.indices) == 2 and t.indices[0] == t.indices[1])
    some_shift = sorted(bad.pert_blocks)[0]
    bad.pert_blocks[some_shift] = bad.pert_blocks[some_shift] + [moved]
    with pytest.raises(PartitioningError):
        first_order(bad, sol)


def test_first_order_vanishes_for_random_groupings():
    """Property: any parity grouping built from distinct supports yields a
    strictly zero first-order term under the optimal partitioning."""
    s = integrals("h2o_sto3g", "r1.4")
    rng = np.random.default_rng(23)
    det0 = hf_determinant(s)
    for trial in range(8):
        k = int(rng.integers(1, 5))
        seen = set()
        gens = []
        while len(gens) < k:
            size = int(rng.integers(1, 7))
            sup = tuple(sorted(rng.choice(12, size=size, replace=False).tolist()))
            if sup in seen:
                continue
            seen.add(sup)
            gens.append(Z2Generator(sup))
        model = SymmetryModel(s.n_alpha, s.n_beta, tuple(gens))
        part = partition_hamiltonian(s, model)
        from symmpt import irrep_of
        target = irrep_of(det0, model)
        sol = reference_energy(part, target)
        assert abs(first_order(part, sol)) < 1e-10


def test_second_order_zero_without_perturbation(h2o_r18):
    part, target = partitioned("h2o_sto3g", "exact")
    res = run_pt2(part, target, methods=("uc", "sc", "en"))
    assert res.e2 == {"uc": 0, "sc": 0, "en": 0}
    assert abs(res.e0 - ref_energy("h2o_sto3g", "r1.8")) < 1e-9


def test_uc_matches_dense_resolvent_oracle(h2o_r18):
    """Exact Rayleigh-Schroedinger sum over the dense eigenbasis of the
    sector-projected Hamiltonian."""
    part, target = partitioned("h2o_sto3g", "augmented")
    sol = reference_energy(part, target)
    e2, _ = second_order_uc(part, sol)

    trivial = SymmetryModel(h2o_r18.n_alpha, h2o_r18.n_beta, ())
    full_basis = enumerate_sector(trivial, (), h2o_r18.n_spatial)
    hfull = full_hamiltonian_matrix(full_basis, h2o_r18).toarray()
    index = {int(d): i for i, d in enumerate(full_basis)}
    psi = np.zeros(len(full_basis))
    for i, d in enumerate(sol.basis):
        psi[index[int(d)]] = sol.vector[i]
    w = hfull @ psi
    oracle = 0.0
    for label, dets in sector_labels(full_basis, part.model).items():
        if label == tuple(target):
            continue
        rows = np.array([index[int(d)] for d in dets])
        evals, evecs = np.linalg.eigh(hfull[np.ix_(rows, rows)])
        overlaps = evecs.T @ w[rows]
        oracle += float(np.sum(overlaps ** 2 / (sol.energy - evals)))
    assert abs(e2 - oracle) < 1e-10


def test_sc_equals_uc_for_one_dimensional_sectors(h2):
    """Contraction is exact when every perturber sector holds a single
    determinant (two-orbital system with per-spin-orbital generators)."""
    model, target = singleton_grouping(h2)
    part = partition_hamiltonian(h2, model)
    res = run_pt2(part, target, methods=("uc", "sc", "en"))
    assert res.e2["uc"] == pytest.approx(res.e2["sc"], abs=1e-12)
    assert res.e2["uc"] == pytest.approx(res.e2["en"], abs=1e-12)
    for shift, ps in perturber_states(
            part, reference_energy(part, target)).items():
        assert len(ps.basis) == 1


def test_en_reduces_to_single_reference_pt2():
    """With one generator per spin orbital the mean-field correction is
    textbook single-reference Epstein-Nesbet PT2 (independent oracle over
    singles and doubles)."""
    for family, tag in (("h2o_sto3g", "r1.0"), ("n2_sto3g", "r1.2")):
        s = integrals(family, tag)
        model, target = singleton_grouping(s)
        part = partition_hamiltonian(s, model)
        res = run_pt2(part, target, methods=("en",))
        det0 = hf_determinant(s)
        e_hf = matrix_element(det0, det0, s)
        assert abs(res.e0 - e_hf) < 1e-10

        # oracle: loop singles and doubles directly
        occ = [p for p in range(2 * s.n_spatial) if (det0 >> p) & 1]
        virt = [p for p in range(2 * s.n_spatial) if not (det0 >> p) & 1]
        e2 = 0.0
        from itertools import combinations
        excitations = [(i, a) for i in occ for a in virt]
        seen = set()
        for holes in list(combinations(occ, 1)) + list(combinations(occ, 2)):
            for parts_ in list(combinations(virt, 1)) + list(combinations(virt, 2)):
                if len(holes) != len(parts_):
                    continue
                det = det0
                for h in holes:
                    det &= ~(1 << h)
                for p in parts_:
                    det |= 1 << p
                if det in seen:
                    continue
                seen.add(det)
                num = matrix_element(det, det0, s)
                if num == 0.0:
                    continue
                e2 += num * num / (e_hf - matrix_element(det, det, s))
        assert abs(res.e2["en"] - e2) < 1e-10, family


def test_en_numerator_matches_dense_block(h2o_r18):
    from symmpt import materialize_block

    part, target = partitioned("h2o_sto3g", "augmented")
    sol = reference_energy(part, target)
    for shift, ps in list(perturber_states(part, sol).items())[:5]:
        dense = materialize_block(part.pert_blocks[shift], sol.basis, ps.basis)
        assert np.abs(ps.xi - dense @ sol.vector).max() < 1e-12


def test_contributions_negative_below_perturber_spectra(h2o_r18):
    from symmpt import build_sector_matrix

    part, target = partitioned("h2o_sto3g", "augmented")
    sol = reference_energy(part, target)
    e2, contribs = second_order_uc(part, sol)
    perturbers = perturber_states(part, sol)
    for shift, ps in perturbers.items():
        href = build_sector_matrix(ps.basis, part.ref_terms,
                                   part.n_spin_orbitals,
                                   core_energy=part.core_energy)
        lowest = scipy.linalg.eigvalsh(href.toarray())[0]
        if sol.energy < lowest:  # precondition of the sign property
            assert contribs[ps.irrep] <= 1e-14


def test_sc_closer_to_uc_than_en_on_stretched_n2():
    for tag in ("r2.0", "r2.2"):
        part, target = partitioned("n2_sto3g", "augmented", tag)
        res = run_pt2(part, target, methods=("uc", "sc", "en"))
        assert abs(res.e2["sc"] - res.e2["uc"]) < abs(res.e2["en"] - res.e2["uc"])


def test_intruder_state_detection_and_regularization():
    """A degenerate two-level toy system collapses the denominator: hard
    error by default, finite answer with regularization."""
    one = np.array([[0.0, 0.1], [0.1, 0.0]])
    s = IntegralSet(n_spatial=2, n_electrons=2, spin_multiplicity=1,
                    core_energy=0.0, one_body=one,
                    two_body=np.zeros((2, 2, 2, 2)))
    model, target = singleton_grouping(s)
    part = partition_hamiltonian(s, model)
    sol = reference_energy(part, target)
    with pytest.raises(IntruderStateError) as err:
        second_order_en(part, sol)
    assert err.value.denominator == pytest.approx(0.0, abs=1e-12)
    e2, _ = second_order_en(part, sol, regularize=True)
    assert np.isfinite(e2)
    with pytest.raises(IntruderStateError):
        second_order_uc(part, sol)
    with pytest.raises(IntruderStateError):
        second_order_sc(part, sol)


def test_run_pt2_counts(h2o_r18):
    part, target = partitioned("h2o_sto3g", "augmented")
    res = run_pt2(part, target, methods=("sc",))
    assert res.n_det_ref == 16
    assert res.n_irreps == 20
    assert res.e2["sc"] == pytest.approx(sum(res.contributions["sc"].values()),
                                         abs=1e-12)


def test_unknown_method_rejected(h2o_r18):
    part, target = partitioned("h2o_sto3g", "augmented")
    with pytest.raises(ValueError):
        run_pt2(part, target, methods=("bogus",))


def test_sc_stays_within_a_few_millihartree_of_uc():
    """The contracted correction shadows the exact one along the scan."""
    for tag in scan_tags("h2o_sto3g"):
        part, target = partitioned("h2o_sto3g", "augmented", tag)
        res = run_pt2(part, target, methods=("uc", "sc"))
        assert abs(res.e2["sc"] - res.e2["uc"]) < 3e-3, tag
