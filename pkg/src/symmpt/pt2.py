"""Second-order perturbation engine over symmetry-partitioned Hamiltonians.

Given the optimal partitioning H = H_ref + sum of irrep-shifting blocks,
this module solves H_ref in the target sector for the zeroth-order energy,
checks that the first-order term vanishes (it must, by sector
orthogonality), and evaluates three second-order corrections:

  uncontracted (uc): exact sum over every H_ref eigenstate per sector,
  contracted (sc):   one collapsed state per sector,
  epstein_nesbet (en): single-determinant denominators from the full-H
                       diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import eigensolver
from .hamiltonian import (PartitionedHamiltonian, PartitioningError,
                          apply_block, build_sector_matrix, diagonal_values)
from .symmetry import enumerate_sector

METHODS = ("uc", "sc", "en")
FIRST_ORDER_TOL = 1e-10
INTRUDER_TOL = 1e-8
REGULARIZE_FLOOR = 1e-6
XI_NORM_CUTOFF = 1e-12
# couplings at roundoff level (symmetry partners are exactly orthogonal)
# are dropped before the intruder check; their worst-case contribution is
# AMPLITUDE_CUTOFF^2 / INTRUDER_TOL ~ 1e-12, far below any tolerance here
AMPLITUDE_CUTOFF = 1e-10


class EmptySectorError(ValueError):
    pass


class IntruderStateError(RuntimeError):
    """A perturber denominator collapsed (near-degenerate with E0)."""

    def __init__(self, shift, state, denominator):
        super().__init__(
            f"intruder state: sector shift {shift}, state {state}, "
            f"denominator {denominator:.3e}; rerun with regularization "
            "if this is expected")
        self.shift = shift
        self.state = state
        self.denominator = denominator


@dataclass
class SectorSolution:
    """Zeroth-order eigenpair of H_ref in one irrep sector."""

    energy: float
    vector: np.ndarray
    basis: np.ndarray
    irrep: tuple
    state_index: int = 0


@dataclass
class PerturberState:
    """The unnormalized image of the reference state in one shifted sector."""

    irrep: tuple
    shift: tuple
    basis: np.ndarray
    xi: np.ndarray

    @property
    def norm_sq(self):
        return float(self.xi @ self.xi)


@dataclass
class PT2Result:
    e0: float
    e1: float
    e2: dict
    contributions: dict
    n_det_ref: int
    n_irreps: int


def reference_energy(part: PartitionedHamiltonian, target: tuple, n: int = 0,
                     tol: float = eigensolver.DAVIDSON_TOL) -> SectorSolution:
    """n-th eigenpair of H_ref restricted to the target sector."""
    basis = enumerate_sector(part.model, target, part.integrals.n_spatial)
    if len(basis) == 0:
        raise EmptySectorError(f"sector {target} is empty")
    if n >= len(basis):
        raise ValueError(f"state index {n} outside sector of dimension {len(basis)}")
    href = build_sector_matrix(basis, part.ref_terms, part.n_spin_orbitals,
                               core_energy=part.core_energy)
    pairs = eigensolver.lowest_eigenpairs(href, n + 1, tol=tol)
    return SectorSolution(energy=pairs[n].value, vector=pairs[n].vector,
                          basis=basis, irrep=tuple(target), state_index=n)


def first_order(part: PartitionedHamiltonian, sol: SectorSolution) -> float:
    """<psi0|H_pert|psi0>, which the optimal partitioning forces to zero.

    The value is returned for diagnostics only.  A magnitude at or above
    1e-10 means some term classified as perturbation fails to shift the
    irrep, i.e. the partition is corrupt, and raises PartitioningError.
    """
    value = 0.0
    for shift in part.sorted_shifts():
        back = apply_block(part.pert_blocks[shift], sol.vector,
                           sol.basis, sol.basis, strict=False)
        value += float(sol.vector @ back)
    if abs(value) >= FIRST_ORDER_TOL:
        raise PartitioningError(
            f"first-order correction {value:.3e} is nonzero; a reference "
            "term is misclassified as perturbation")
    return value


def perturber_states(part: PartitionedHamiltonian, sol: SectorSolution) -> dict:
    """Xi = V(shift) psi0 for every perturbation block, keyed by shift."""
    out = {}
    m = part.integrals.n_spatial
    for shift in part.sorted_shifts():
        target = tuple(t ^ d for t, d in zip(sol.irrep, shift))
        basis = enumerate_sector(part.model, target, m)
        if len(basis) == 0:
            continue
        xi = apply_block(part.pert_blocks[shift], sol.vector, sol.basis, basis)
        out[shift] = PerturberState(irrep=target, shift=shift, basis=basis, xi=xi)
    return out


def _safe_denominator(d, shift, state, regularize):
    if abs(d) < INTRUDER_TOL:
        if not regularize:
            raise IntruderStateError(shift, state, d)
        return np.copysign(max(abs(d), REGULARIZE_FLOOR), d if d != 0 else 1.0)
    return d


def second_order_uc(part, sol, dense_limit=eigensolver.DENSE_LIMIT,
                    regularize=False, perturbers=None):
    """Exact second order: full H_ref spectrum in every shifted sector."""
    perturbers = perturbers if perturbers is not None else perturber_states(part, sol)
    contributions = {}
    for shift in sorted(perturbers):
        ps = perturbers[shift]
        href = build_sector_matrix(ps.basis, part.ref_terms, part.n_spin_orbitals,
                                   core_energy=part.core_energy)
        pairs = eigensolver.full_spectrum(href, dense_limit=dense_limit)
        contrib = 0.0
        for mth, pair in enumerate(pairs):
            overlap = float(pair.vector @ ps.xi)
            if abs(overlap) < AMPLITUDE_CUTOFF:
                continue
            denom = _safe_denominator(sol.energy - pair.value, shift, mth, regularize)
            contrib += overlap * overlap / denom
        contributions[ps.irrep] = contrib
    return sum(contributions.values()), contributions


def second_order_sc(part, sol, regularize=False, perturbers=None):
    """Contracted second order: one collapsed perturber state per sector."""
    perturbers = perturbers if perturbers is not None else perturber_states(part, sol)
    contributions = {}
    for shift in sorted(perturbers):
        ps = perturbers[shift]
        nsq = ps.norm_sq
        if nsq < XI_NORM_CUTOFF:
            contributions[ps.irrep] = 0.0
            continue
        hxi = build_sector_matrix(ps.basis, part.ref_terms, part.n_spin_orbitals,
                                  core_energy=part.core_energy).matvec(ps.xi)
        e_sc = float(ps.xi @ hxi) / nsq
        denom = _safe_denominator(sol.energy - e_sc, shift, None, regularize)
        contributions[ps.irrep] = nsq / denom
    return sum(contributions.values()), contributions


def second_order_en(part, sol, regularize=False, perturbers=None):
    """Mean-field second order: determinant denominators from the full-H
    diagonal."""
    perturbers = perturbers if perturbers is not None else perturber_states(part, sol)
    contributions = {}
    for shift in sorted(perturbers):
        ps = perturbers[shift]
        diag = diagonal_values(ps.basis, part.integrals)
        contrib = 0.0
        for i, amp in enumerate(ps.xi):
            if abs(amp) < AMPLITUDE_CUTOFF:
                continue
            denom = _safe_denominator(sol.energy - diag[i], shift, int(i), regularize)
            contrib += amp * amp / denom
        contributions[ps.irrep] = contrib
    return sum(contributions.values()), contributions


_METHOD_FUNCS = {
    "uc": second_order_uc,
    "sc": second_order_sc,
    "en": second_order_en,
}


def run_pt2(part: PartitionedHamiltonian, target: tuple, methods=("sc",),
              n: int = 0, dense_limit=eigensolver.DENSE_LIMIT,
              regularize=False) -> PT2Result:
    """Solve the reference sector and evaluate the requested corrections."""
    unknown = [m for m in methods if m not in _METHOD_FUNCS]
    if unknown:
        raise ValueError(f"unknown methods {unknown}; choose from {METHODS}")
    sol = reference_energy(part, target, n=n)
    e1 = first_order(part, sol)
    perturbers = perturber_states(part, sol)
    e2 = {}
    contributions = {}
    for method in methods:
        kwargs = {"regularize": regularize, "perturbers": perturbers}
        if method == "uc":
            kwargs["dense_limit"] = dense_limit
        e2[method], contributions[method] = _METHOD_FUNCS[method](part, sol, **kwargs)
    return PT2Result(
        e0=sol.energy,
        e1=e1,
        e2=e2,
        contributions=contributions,
        n_det_ref=len(sol.basis),
        n_irreps=len(perturbers) + 1,
    )
