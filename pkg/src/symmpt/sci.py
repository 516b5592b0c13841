"""Selected CI driven by the contracted second-order contributions.

Sectors are kept when their relative second-order weight clears eps1;
within each kept sector (and the reference sector) determinants are kept
by coefficient magnitude against eps2.  The selected subspace is then
diagonalized exactly, so the result is variational by construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import eigensolver
from .hamiltonian import full_hamiltonian_matrix
from .integrals import IntegralSet
from .pt2 import SectorSolution

ZERO_FLOOR = 1e-12  # coefficient floor applied when eps2 == 0


@dataclass
class SCISelection:
    eps1: float
    eps2: float
    selected_irreps: list
    selected_dets: np.ndarray
    reference_irrep: tuple
    selection_point: str = ""

    @property
    def n_dets(self):
        return len(self.selected_dets)

    @property
    def n_irreps(self):
        """Selected sectors including the reference sector."""
        return len(self.selected_irreps) + 1


def select(sol: SectorSolution, perturbers: dict, sc_contributions: dict,
           eps1: float, eps2: float, selection_point: str = "",
           apply_eps2_to_reference: bool = True) -> SCISelection:
    """Choose sectors by |E_sector / E0| > eps1, then determinants by
    coefficient magnitude > eps2 within each normalized perturber state.

    Reference-sector determinants pass through the same coefficient test
    on psi0 unless apply_eps2_to_reference is False (then the whole
    reference sector is kept).  eps2 = 0 keeps coefficients above a 1e-12
    floor rather than exact nonzero.
    """
    floor = max(eps2, ZERO_FLOOR)
    chosen = []
    e0 = sol.energy
    for shift in sorted(perturbers):
        ps = perturbers[shift]
        contrib = sc_contributions.get(ps.irrep, 0.0)
        if abs(contrib / e0) > eps1:
            chosen.append(ps)

    kept = []
    if apply_eps2_to_reference:
        mask = np.abs(sol.vector) > floor
        kept.append(sol.basis[mask])
    else:
        kept.append(sol.basis)
    for ps in chosen:
        nrm = np.sqrt(ps.norm_sq)
        if nrm < ZERO_FLOOR:
            continue
        mask = np.abs(ps.xi / nrm) > floor
        kept.append(ps.basis[mask])

    dets = np.unique(np.concatenate(kept)) if kept else np.zeros(0, dtype=np.uint64)
    return SCISelection(
        eps1=eps1,
        eps2=eps2,
        selected_irreps=[ps.irrep for ps in chosen],
        selected_dets=dets,
        reference_irrep=sol.irrep,
        selection_point=selection_point,
    )


def sci_energy(selection: SCISelection, s: IntegralSet,
               tol=eigensolver.DAVIDSON_TOL) -> float:
    """Lowest eigenvalue of the full H restricted to the selection."""
    if selection.n_dets == 0:
        raise ValueError("empty selection")
    h = full_hamiltonian_matrix(selection.selected_dets, s)
    pairs = eigensolver.lowest_eigenpairs(h, 1, tol=tol)
    return pairs[0].value


def save_selection(path, selection: SCISelection):
    data = {
        "eps1": "%.17g" % selection.eps1,
        "eps2": "%.17g" % selection.eps2,
        "reference_irrep": list(selection.reference_irrep),
        "selected_irreps": [list(t) for t in selection.selected_irreps],
        "selected_dets": ["%x" % int(d) for d in selection.selected_dets],
        "selection_point": selection.selection_point,
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_selection(path) -> SCISelection:
    with open(path) as fh:
        data = json.load(fh)
    return SCISelection(
        eps1=float(data["eps1"]),
        eps2=float(data["eps2"]),
        selected_irreps=[tuple(t) for t in data["selected_irreps"]],
        selected_dets=np.array(sorted(int(h, 16) for h in data["selected_dets"]),
                               dtype=np.uint64),
        reference_irrep=tuple(data["reference_irrep"]),
        selection_point=data.get("selection_point", ""),
    )
