"""Fixture corpus driver: RHF scans, orbital pinning, FCIDUMP emission.

Orbital order is pinned by (point-group irrep, approximate reflection
parity where relevant, occupied-before-virtual, orbital energy) so shared
grouping files and reused determinant selections stay valid across every
scan point and across regenerations.
"""

from __future__ import annotations

import argparse
import os

import numpy as np

from . import __version__
from .basis import ANGSTROM_TO_BOHR, ATOMIC_NUMBER, build_shells
from .emit import (write_fcidump, write_grouping, write_manifest,
                   write_provenance)
from .fci import fci_ground_energy, freeze_core_integrals
from .scf import (SCFError, mo_approx_parity, run_rhf, salc_blocks,
                  transform_to_mo)

# Molpro D2h irrep ids keyed by reflection characters (s_xy, s_xz, s_yz)
D2H_IDS = {
    (1, 1, 1): 1, (1, 1, -1): 2, (1, -1, 1): 3, (1, -1, -1): 4,
    (-1, 1, 1): 5, (-1, 1, -1): 6, (-1, -1, 1): 7, (-1, -1, -1): 8,
}


def h2o_atoms(r, delta=0.01, angle_deg=104.5):
    """Deformed water in the xy plane, bisector on +y, bond lengths r and
    r + delta (angstrom)."""
    half = np.radians(angle_deg) / 2.0
    conv = ANGSTROM_TO_BOHR
    return [
        ("O", np.zeros(3)),
        ("H", conv * r * np.array([np.sin(half), np.cos(half), 0.0])),
        ("H", conv * (r + delta) * np.array([-np.sin(half), np.cos(half), 0.0])),
    ]


def diatomic_atoms(element, r):
    conv = ANGSTROM_TO_BOHR
    z = conv * r / 2.0
    return [(element, np.array([0.0, 0.0, -z])), (element, np.array([0.0, 0.0, z]))]


def _charges(atoms):
    return [(ATOMIC_NUMBER[el], xyz) for el, xyz in atoms]


def _spins(spatials):
    out = []
    for p in spatials:
        out.extend((2 * p, 2 * p + 1))
    return out


def _solve_point(atoms, basis, nelec, block_axes, occupations, dm0=None):
    """occupations: {block signature: doubly occupied count}.

    The core guess comes first so each point regenerates identically on
    its own; a chained density from the previous scan point is only a
    fallback for stubborn geometries.
    """
    shells = build_shells(atoms, basis)
    charges = _charges(atoms)
    blocks = salc_blocks(shells, block_axes)
    occ_list = [occupations.get(sig, 0) for sig, _ in blocks]
    result = run_rhf(shells, charges, nelec, blocks=blocks,
                     block_occupations=occ_list, dm0=None)
    if not result.converged and dm0 is not None:
        result = run_rhf(shells, charges, nelec, blocks=blocks,
                         block_occupations=occ_list, dm0=dm0, max_iter=600)
    if not result.converged:
        result = run_rhf(shells, charges, nelec, blocks=blocks,
                         block_occupations=occ_list, dm0=None, max_iter=900)
    if not result.converged:
        raise SCFError("SCF did not converge")
    return shells, result


def _order_and_labels(result, labels, key_extra=None):
    """Stable sort by (label, extra key, occupied first, energy)."""
    nmo = len(result.mo_energies)
    occ = result.occ_mask
    keys = []
    for p in range(nmo):
        extra = key_extra[p] if key_extra is not None else 0
        keys.append((labels[p], extra, not occ[p], result.mo_energies[p], p))
    order = [k[-1] for k in sorted(keys)]
    return order, occ


def generate_h2o(outdir, basis="sto-3g", rs=None, delta=0.01, angle=104.5):
    rs = rs if rs is not None else [round(0.6 + 0.2 * i, 1) for i in range(11)]
    os.makedirs(os.path.join(outdir, "points"), exist_ok=True)
    os.makedirs(os.path.join(outdir, "groupings"), exist_ok=True)

    points, prov_points = [], []
    layout_ref = None
    dm = None
    for r in rs:
        atoms = h2o_atoms(r, delta=delta, angle_deg=angle)
        shells, result = _solve_point(atoms, basis, nelec=10, block_axes=[2],
                                      occupations={(-1,): 1, (1,): 4}, dm0=dm)
        dm = result.density

        plane = np.array([sig[0] for sig in result.mo_signatures])
        irreps = np.where(plane > 0, 1, 2)  # a' = 1, a'' = 2
        approx = np.sign(mo_approx_parity(result, shells, 0)).astype(int)
        # key 0 for even, 1 for odd under the near-reflection
        order, occ = _order_and_labels(result, irreps,
                                       key_extra=(approx < 0).astype(int))
        layout = tuple((int(irreps[p]), int(approx[p] < 0), bool(occ[p]))
                       for p in order)
        if layout_ref is None:
            layout_ref = layout
        elif layout != layout_ref:
            raise SCFError(f"orbital class layout changed at r={r}: "
                           f"{layout} vs {layout_ref}")

        h1, eri = transform_to_mo(result, order=order)
        orbsym = [int(irreps[p]) for p in order]
        tag = f"r{r:.1f}"
        fname = os.path.join("points", f"{tag}.fcidump")
        write_fcidump(os.path.join(outdir, fname), h1, eri, result.e_nuc,
                      nelec=10, ms2=0, orbsym=orbsym)

        h1f, erif, e0f = freeze_core_integrals(h1, eri, result.e_nuc, [0])
        ref = fci_ground_energy(h1f, erif, e0f, nelec=8)
        points.append({"tag": tag, "fcidump": fname, "ref_energy": ref})
        prov_points.append({
            "tag": tag, "r_angstrom": r, "scf_energy": result.energy,
            "scf_iterations": result.n_iter, "converged": result.converged,
            "mo_energies": [result.mo_energies[p] for p in order],
            "approx_yz_parity": [float(mo_approx_parity(result, shells, 0)[p])
                                 for p in order],
        })

    # post-freeze classes from the pinned layout (core = orbital 0)
    post = layout_ref[1:]

    def idx(irrep, odd, occupied):
        return [i for i, lab in enumerate(post) if lab == (irrep, odd, occupied)]

    a_even_occ = idx(1, 0, True)      # 2a1, 3a1
    a_odd_occ = idx(1, 1, True)       # 1b2
    a_odd_virt = idx(1, 1, False)     # 2b2
    a2_orbs = idx(2, 0, True) + idx(2, 1, True) + idx(2, 0, False)  # 1b1
    b2_pair = a_odd_occ + a_odd_virt
    low = a_even_occ[0]
    ref_det = set(_spins(a_even_occ + a_odd_occ + a2_orbs))

    g = os.path.join(outdir, "groupings")
    write_grouping(os.path.join(g, "exact.json"),
                   [(_spins(a2_orbs), "exact-point-group")], ref_det)
    cas44 = [([2 * low], "particle-number"), ([2 * low + 1], "particle-number"),
             ([2 * a2_orbs[0]], "particle-number"),
             ([2 * a2_orbs[0] + 1], "particle-number")]
    write_grouping(os.path.join(g, "cas44.json"), cas44, ref_det)
    augmented_set = cas44 + [
        ([2 * p for p in b2_pair], "approximate-point-group"),
        ([2 * p + 1 for p in b2_pair], "approximate-point-group"),
    ]
    write_grouping(os.path.join(g, "augmented.json"), augmented_set, ref_det)
    cas43 = cas44 + [([2 * a_odd_virt[0]], "particle-number"),
                     ([2 * a_odd_virt[0] + 1], "particle-number")]
    write_grouping(os.path.join(g, "cas43.json"), cas43, ref_det)
    # alternative split of the b2 pair by orbital rather than by spin,
    # kept for the grouping-ranking comparison
    alt = cas44 + [
        (_spins([b2_pair[0]]), "approximate-point-group"),
        (_spins([b2_pair[1]]), "approximate-point-group"),
    ]
    write_grouping(os.path.join(g, "augmented_altsplit.json"), alt, ref_det)

    write_manifest(
        os.path.join(outdir, "manifest.json"), points,
        frozen_core=[0], grouping_rel=os.path.join("groupings", "augmented.json"),
        methods=["uc", "sc", "en"],
        sci={"eps1": 0.0, "eps2": 0.0, "selection_point": "r1.8"},
    )
    write_provenance(os.path.join(outdir, "provenance.json"), {
        "generator": f"fixturegen {__version__}",
        "molecule": "H2O (deformed)", "basis": basis,
        "angle_deg": angle, "delta_r_angstrom": delta,
        "orbital_order": "irrep, approx-yz-parity, occupied, energy",
        "points": prov_points,
    })


def _diatomic_labels(shells, result):
    # block signatures are ordered (z-flip, y-flip, x-flip) characters
    sigs = result.mo_signatures
    irreps = np.array([D2H_IDS[sig] for sig in sigs])
    parities = np.array(sigs)
    return irreps, parities[:, 0], parities[:, 1], parities[:, 2]


def generate_n2(outdir, basis="sto-3g", rs=None, n_frozen=2,
                skip_reference=False):
    rs = rs if rs is not None else [round(0.8 + 0.2 * i, 1) for i in range(11)]
    os.makedirs(os.path.join(outdir, "points"), exist_ok=True)
    os.makedirs(os.path.join(outdir, "groupings"), exist_ok=True)

    points, prov_points = [], []
    layout_ref = None
    dm = None
    for r in rs:
        atoms = diatomic_atoms("N", r)
        shells, result = _solve_point(
            atoms, basis, nelec=14, block_axes=[2, 1, 0],
            occupations={(1, 1, 1): 3, (-1, 1, 1): 2,
                         (1, 1, -1): 1, (1, -1, 1): 1}, dm0=dm)
        dm = result.density
        irreps, p_xy, p_xz, p_yz = _diatomic_labels(shells, result)
        order, occ = _order_and_labels(result, irreps)
        layout = tuple((int(irreps[p]), bool(occ[p])) for p in order)
        if layout_ref is None:
            layout_ref = layout
        elif layout != layout_ref:
            raise SCFError(f"orbital class layout changed at r={r}")

        h1, eri = transform_to_mo(result, order=order)
        orbsym = [int(irreps[p]) for p in order]
        tag = f"r{r:.1f}"
        fname = os.path.join("points", f"{tag}.fcidump")
        write_fcidump(os.path.join(outdir, fname), h1, eri, result.e_nuc,
                      nelec=14, ms2=0, orbsym=orbsym)

        core = _core_indices(layout_ref, n_frozen)
        ref = None
        if not skip_reference:
            h1f, erif, e0f = freeze_core_integrals(h1, eri, result.e_nuc, core)
            ref = fci_ground_energy(h1f, erif, e0f, nelec=14 - 2 * n_frozen)
        points.append({"tag": tag, "fcidump": fname, "ref_energy": ref})
        prov_points.append({
            "tag": tag, "r_angstrom": r, "scf_energy": result.energy,
            "scf_iterations": result.n_iter, "converged": result.converged,
            "mo_energies": [result.mo_energies[p] for p in order],
        })

    core = _core_indices(layout_ref, n_frozen)
    post = [lab for i, lab in enumerate(layout_ref) if i not in core]

    def idx(irrep, occupied=None):
        return [i for i, lab in enumerate(post)
                if lab[0] == irrep and (occupied is None or lab[1] == occupied)]

    sig_g_occ = idx(1, True)          # 2(sigma g), 3(sigma g), ...
    pix_u = idx(2)                    # B3u: pi_x ungerade
    piy_u = idx(3)
    sig_u_occ = idx(5, True)
    sig_u_virt = idx(5, False)
    pix_g = idx(6)
    piy_g = idx(7)
    xy_odd = idx(5) + idx(6) + idx(7)
    ref_det = set(_spins(sig_g_occ + sig_u_occ + [pix_u[0], piy_u[0]]))

    g = os.path.join(outdir, "groupings")
    reflections = [
        (_spins(xy_odd), "exact-point-group"),
        (_spins(piy_u + piy_g), "exact-point-group"),
        (_spins(pix_u + pix_g), "exact-point-group"),
    ]
    write_grouping(os.path.join(g, "exact.json"), reflections, ref_det)

    if basis == "sto-3g":
        ext = [([2 * sig_g_occ[0]], "particle-number"),
               ([2 * sig_g_occ[0] + 1], "particle-number"),
               ([2 * sig_u_occ[0]], "particle-number"),
               ([2 * sig_u_occ[0] + 1], "particle-number")]
        write_grouping(os.path.join(g, "cas66.json"), ext + reflections, ref_det)
        cas65 = ext + [([2 * sig_u_virt[0]], "particle-number"),
                       ([2 * sig_u_virt[0] + 1], "particle-number")]
        write_grouping(os.path.join(g, "cas65.json"), cas65 + reflections, ref_det)
        augmented_set = ext + [(_spins(xy_odd), "exact-point-group")] + [
            ([2 * p for p in pix_u + pix_g], "approximate-point-group"),
            ([2 * p + 1 for p in pix_u + pix_g], "approximate-point-group"),
            ([2 * p for p in piy_u + piy_g], "approximate-point-group"),
            ([2 * p + 1 for p in piy_u + piy_g], "approximate-point-group"),
        ]
        write_grouping(os.path.join(g, "augmented.json"), augmented_set, ref_det)
        grouping_rel = os.path.join("groupings", "augmented.json")
    else:
        # 6-31G groupings act on the full frozen-core space: the pi shells
        # split pairwise by spin (a4) or with the outer shell frozen per
        # spin orbital (a6)
        pairs = {
            "pix_inner": [pix_u[0], pix_g[0]], "pix_outer": [pix_u[1], pix_g[1]],
            "piy_inner": [piy_u[0], piy_g[0]], "piy_outer": [piy_u[1], piy_g[1]],
        }
        xy_gen = (_spins(xy_odd), "exact-point-group")
        a4 = [xy_gen]
        for name in ("pix_inner", "pix_outer", "piy_inner", "piy_outer"):
            orbs = pairs[name]
            a4.append(([2 * p for p in orbs], "approximate-point-group"))
            a4.append(([2 * p + 1 for p in orbs], "approximate-point-group"))
        write_grouping(os.path.join(g, "a4.json"), a4, ref_det)
        a6 = [xy_gen]
        for name in ("pix_inner", "piy_inner"):
            orbs = pairs[name]
            a6.append(([2 * p for p in orbs], "approximate-point-group"))
            a6.append(([2 * p + 1 for p in orbs], "approximate-point-group"))
        for p in pairs["pix_outer"] + pairs["piy_outer"]:
            a6.append(([2 * p], "particle-number"))
            a6.append(([2 * p + 1], "particle-number"))
        write_grouping(os.path.join(g, "a6.json"), a6, ref_det)
        ext = [([2 * sig_g_occ[0]], "particle-number"),
               ([2 * sig_g_occ[0] + 1], "particle-number"),
               ([2 * sig_u_occ[0]], "particle-number"),
               ([2 * sig_u_occ[0] + 1], "particle-number")]
        write_grouping(os.path.join(g, "cas614.json"), ext + reflections, ref_det)
        grouping_rel = os.path.join("groupings", "a4.json")

    write_manifest(
        os.path.join(outdir, "manifest.json"), points,
        frozen_core=core, grouping_rel=grouping_rel,
        methods=["uc", "sc", "en"] if basis == "sto-3g" else [],
        sci={"eps1": 0.0, "eps2": 0.0, "selection_point": "r1.8"}
        if basis == "sto-3g" else None,
    )
    write_provenance(os.path.join(outdir, "provenance.json"), {
        "generator": f"fixturegen {__version__}",
        "molecule": "N2", "basis": basis,
        "orbital_order": "irrep, occupied, energy",
        "points": prov_points,
    })


def _core_indices(layout, n_frozen):
    """Lowest sigma-g and sigma-u positions in the pinned order."""
    if n_frozen == 0:
        return []
    ag_first = next(i for i, lab in enumerate(layout) if lab[0] == 1)
    b1u_first = next(i for i, lab in enumerate(layout) if lab[0] == 5)
    return sorted([ag_first, b1u_first])[:n_frozen]


def generate_h2(outdir, r=0.74):
    os.makedirs(os.path.join(outdir, "points"), exist_ok=True)
    os.makedirs(os.path.join(outdir, "groupings"), exist_ok=True)
    atoms = diatomic_atoms("H", r)
    shells, result = _solve_point(atoms, "sto-3g", nelec=2, block_axes=[2, 1, 0],
                                  occupations={(1, 1, 1): 1})
    irreps, *_ = _diatomic_labels(shells, result)
    order, occ = _order_and_labels(result, irreps)
    h1, eri = transform_to_mo(result, order=order)
    tag = f"r{r:.2f}"
    fname = os.path.join("points", f"{tag}.fcidump")
    write_fcidump(os.path.join(outdir, fname), h1, eri, result.e_nuc,
                  nelec=2, ms2=0, orbsym=[int(irreps[p]) for p in order])
    ref = fci_ground_energy(h1, eri, result.e_nuc, nelec=2)
    write_grouping(os.path.join(outdir, "groupings", "exact.json"), [], {0, 1})
    write_manifest(os.path.join(outdir, "manifest.json"),
                   [{"tag": tag, "fcidump": fname, "ref_energy": ref}],
                   frozen_core=[], grouping_rel=os.path.join("groupings", "exact.json"),
                   methods=["uc", "sc", "en"])
    write_provenance(os.path.join(outdir, "provenance.json"), {
        "generator": f"fixturegen {__version__}", "molecule": "H2",
        "basis": "sto-3g", "r_angstrom": r,
        "scf_energy": result.energy, "fci_energy": ref,
    })


FAMILIES = {
    "h2_sto3g": lambda out: generate_h2(os.path.join(out, "h2_sto3g")),
    "h2o_sto3g": lambda out: generate_h2o(os.path.join(out, "h2o_sto3g")),
    "n2_sto3g": lambda out: generate_n2(os.path.join(out, "n2_sto3g")),
    "n2_631g": lambda out: generate_n2(
        os.path.join(out, "n2_631g"), basis="6-31g", rs=[1.8],
        skip_reference=True),
}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="fixturegen")
    parser.add_argument("--out", required=True, help="fixture root directory")
    parser.add_argument("--only", action="append", choices=sorted(FAMILIES),
                        help="generate a subset of fixture families")
    args = parser.parse_args(argv)
    names = args.only or sorted(FAMILIES)
    for name in names:
        print(f"generating {name} ...", flush=True)
        FAMILIES[name](args.out)
    print("done")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
