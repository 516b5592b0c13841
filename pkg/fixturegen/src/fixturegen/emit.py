"""FCIDUMP / grouping / manifest writers for the fixture corpus."""

from __future__ import annotations

import json

import numpy as np


def write_fcidump(path, h1, eri, e_core, nelec, ms2, orbsym, threshold=1e-16):
    """Molpro-convention FCIDUMP: namelist header then `value i j k l`
    records (1-based; chemist integrals, 8-fold canonical loop)."""
    norb = h1.shape[0]
    lines = [f"&FCI NORB={norb},NELEC={nelec},MS2={ms2},"]
    lines.append("  ORBSYM=" + ",".join(str(int(x)) for x in orbsym) + ",")
    lines.append("  ISYM=1,")
    lines.append("&END")
    for i in range(norb):
        for j in range(i + 1):
            for k in range(i + 1):
                lmax = j + 1 if k == i else k + 1
                for l in range(lmax):
                    v = eri[i, j, k, l]
                    if abs(v) > threshold:
                        lines.append("%.17g %d %d %d %d"
                                     % (v, i + 1, j + 1, k + 1, l + 1))
    for i in range(norb):
        for j in range(i + 1):
            v = h1[i, j]
            if abs(v) > threshold:
                lines.append("%.17g %d %d 0 0" % (v, i + 1, j + 1))
    lines.append("%.17g 0 0 0 0" % e_core)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_grouping(path, generators, reference_det_spin_orbitals):
    """Grouping JSON; target parities derived from the reference det.

    generators: list of (spin-orbital index list, origin tag).
    reference_det_spin_orbitals: set of occupied spin orbitals.
    """
    occ = set(reference_det_spin_orbitals)
    data = {
        "generators": [
            {"orbitals": sorted(int(x) for x in orbs), "origin": origin}
            for orbs, origin in generators
        ],
        "target_parities": [
            int(len(occ & set(orbs)) % 2) for orbs, _ in generators
        ],
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return data["target_parities"]


def write_manifest(path, points, frozen_core, grouping_rel, methods,
                   sci=None, extra=None):
    data = {
        "points": points,
        "frozen_core": [int(x) for x in frozen_core],
        "grouping": grouping_rel,
        "methods": list(methods),
    }
    if sci:
        data["sci"] = sci
    if extra:
        data.update(extra)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_provenance(path, payload):
    def default(obj):
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        raise TypeError(type(obj))

    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True, default=default)
        fh.write("\n")
