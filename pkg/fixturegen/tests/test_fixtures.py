"""Fixture generator verification: integral anchors, emission determinism,
label consistency, and the closure loop against the consumer CLI."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from fixturegen.basis import ANGSTROM_TO_BOHR, build_shells
from fixturegen.fci import fci_ground_energy, freeze_core_integrals
from fixturegen.gaussians import build_eri, build_one_electron
from fixturegen.generate import (_charges, diatomic_atoms, generate_h2o,
                                 h2o_atoms)
from fixturegen.scf import run_rhf, transform_to_mo

FIXTURES = os.path.abspath(os.path.join(os.path.dirname(__file__),
                                        os.pardir, os.pardir, "fixtures"))


def test_h2_integral_anchors():
    """Textbook minimal-basis H2 values at 1.4 bohr."""
    r = 1.4 / ANGSTROM_TO_BOHR
    atoms = diatomic_atoms("H", r)
    shells = build_shells(atoms, "sto-3g")
    s, t, _ = build_one_electron(shells, _charges(atoms))
    eri = build_eri(shells)
    assert s[0, 1] == pytest.approx(0.6593, abs=2e-4)
    assert t[0, 0] == pytest.approx(0.7600, abs=2e-4)
    assert eri[0, 0, 0, 0] == pytest.approx(0.7746, abs=2e-4)
    res = run_rhf(shells, _charges(atoms), 2)
    assert res.energy == pytest.approx(-1.1167, abs=2e-4)


def test_h2o_scf_anchor():
    """Cross-code anchor: O(0,0,0)/H(0,1,0)/H(0,0,1) angstrom, minimal
    basis, restricted SCF.  Tolerance covers truncated basis constants."""
    c = ANGSTROM_TO_BOHR
    atoms = [("O", np.zeros(3)), ("H", np.array([0.0, c, 0.0])),
             ("H", np.array([0.0, 0.0, c]))]
    shells = build_shells(atoms, "sto-3g")
    res = run_rhf(shells, _charges(atoms), 10)
    assert res.converged
    assert res.energy == pytest.approx(-74.9611711378677, abs=5e-7)


def test_n2_pi_degeneracy():
    """Blocked occupations keep the pi MOs exactly degenerate."""
    atoms = diatomic_atoms("N", 1.0977)
    shells = build_shells(atoms, "sto-3g")
    from fixturegen.scf import salc_blocks

    blocks = salc_blocks(shells, [2, 1, 0])
    occ = {(1, 1, 1): 3, (-1, 1, 1): 2, (1, 1, -1): 1, (1, -1, 1): 1}
    res = run_rhf(shells, _charges(atoms), 14, blocks=blocks,
                  block_occupations=[occ.get(sig, 0) for sig, _ in blocks])
    eps = np.sort(res.mo_energies)
    gaps = np.diff(eps)
    # two exactly degenerate pairs: bonding and antibonding pi
    assert np.sum(gaps < 1e-12) >= 2
    assert res.energy == pytest.approx(-107.4958, abs=2e-4)


def test_frozen_core_fold_matches_explicit_occupation():
    atoms = h2o_atoms(1.0)
    shells = build_shells(atoms, "sto-3g")
    from fixturegen.scf import salc_blocks

    blocks = salc_blocks(shells, [2])
    occ = {(-1,): 1, (1,): 4}
    res = run_rhf(shells, _charges(atoms), 10, blocks=blocks,
                  block_occupations=[occ[sig] for sig, _ in blocks])
    h1, eri = transform_to_mo(res)
    full = fci_ground_energy(h1, eri, res.e_nuc, nelec=10)
    h1f, erif, e0f = freeze_core_integrals(h1, eri, res.e_nuc, [0])
    frozen = fci_ground_energy(h1f, erif, e0f, nelec=8)
    assert frozen >= full - 1e-10
    assert frozen == pytest.approx(full, abs=2e-3)  # core excitation is tiny


def test_regeneration_is_deterministic(tmp_path):
    """A regenerated scan point is byte-identical to the committed one."""
    out = tmp_path / "h2o_sto3g"
    generate_h2o(str(out), rs=[1.8])
    fresh = (out / "points" / "r1.8.fcidump").read_bytes()
    committed = open(os.path.join(FIXTURES, "h2o_sto3g", "points",
                                  "r1.8.fcidump"), "rb").read()
    assert fresh == committed
    for name in ("exact", "cas44", "augmented", "cas43", "augmented_altsplit"):
        fresh = (out / "groupings" / f"{name}.json").read_bytes()
        committed = open(os.path.join(FIXTURES, "h2o_sto3g", "groupings",
                                      f"{name}.json"), "rb").read()
        assert fresh == committed, name


def test_orbsym_consistent_with_groupings():
    """The committed exact-reflection groupings follow the ORBSYM labels."""
    import re

    for family, frozen, odd_sets in (
            ("h2o_sto3g", [0], {0: {2}}),           # generator 0: a'' orbitals
            ("n2_sto3g", [0, 5], {0: {5, 6, 7},     # z-flip-odd irreps
                                  1: {3, 7},        # y-flip-odd
                                  2: {2, 6}})):     # x-flip-odd
        man = json.load(open(os.path.join(FIXTURES, family, "manifest.json")))
        fcid = open(os.path.join(FIXTURES, family,
                                 man["points"][0]["fcidump"])).read()
        orbsym = [int(x) for x in
                  re.search(r"ORBSYM=([\d,]+)", fcid).group(1).split(",") if x]
        kept = [sym for i, sym in enumerate(orbsym) if i not in man["frozen_core"]]
        grouping = json.load(open(os.path.join(FIXTURES, family,
                                               "groupings", "exact.json")))
        for gi, odd_irreps in odd_sets.items():
            expect = set()
            for p, sym in enumerate(kept):
                if sym in odd_irreps:
                    expect.update((2 * p, 2 * p + 1))
            assert set(grouping["generators"][gi]["orbitals"]) == expect, (family, gi)


def test_provenance_records_convergence():
    for family in ("h2o_sto3g", "n2_sto3g"):
        prov = json.load(open(os.path.join(FIXTURES, family, "provenance.json")))
        assert all(p["converged"] for p in prov["points"])


def _run_cli(args):
    proc = subprocess.run([sys.executable, "-m", "symmpt.cli"] + args,
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def test_closure_loop_against_consumer_cli(tmp_path):
    """The consumer's exact-grouping ground energy reproduces this
    generator's FCI reference at all 22 scan points (and H2), through the
    published file formats and command line only."""
    for family in ("h2o_sto3g", "n2_sto3g", "h2_sto3g"):
        man = json.load(open(os.path.join(FIXTURES, family, "manifest.json")))
        man = dict(man)
        man["grouping"] = os.path.join("groupings", "exact.json")
        man["methods"] = []
        path = tmp_path / f"{family}.json"
        base = os.path.join(FIXTURES, family)
        man["points"] = [dict(p, fcidump=os.path.join(base, p["fcidump"]))
                         for p in man["points"]]
        man["grouping"] = os.path.join(base, man["grouping"])
        path.write_text(json.dumps(man))
        out = _run_cli(["scan", "--manifest", str(path)])
        rows = [line.split(",") for line in out.splitlines()[2:]]
        assert len(rows) == len(man["points"])
        for row, point in zip(rows, man["points"]):
            e0 = float(row[1])
            assert abs(e0 - point["ref_energy"]) < 1e-8, (family, row[0])
