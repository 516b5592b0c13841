"""Fermionic term lists, Slater-Condon elements, and sector matrices.

The second-quantized Hamiltonian is held as a flat list of normal-ordered
terms: one-body (p, q) meaning a+_p a_q, and two-body (p, q, r, s) meaning
a+_p a+_q a_r a_s with p < q and r > s.  Classifying every term by the
parity flip it induces on each Z2 generator splits H into a reference part
(no flips) and perturbation blocks keyed by the flip pattern.

Phase convention: spin orbitals are ordered by ascending index inside a
determinant and every ladder operator picks up (-1)^(occupied below its
index), which is exactly the Jordan-Wigner Z-string sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .integrals import IntegralSet, spin_integrals, COEFF_CUTOFF
from .symmetry import SymmetryModel, popcount_array


class PartitioningError(ValueError):
    """The reference/perturbation split violates its parity contract."""


@dataclass(frozen=True)
class FermTerm:
    """A single normal-ordered fermionic term.

    indices: (p, q) for a+_p a_q, or (p, q, r, s) for a+_p a+_q a_r a_s
    with p < q and r > s.
    """

    indices: tuple
    coeff: float

    @property
    def is_two_body(self):
        return len(self.indices) == 4

    def ladder_ops(self):
        """(create?, index) pairs in application order (rightmost first)."""
        if self.is_two_body:
            p, q, r, s = self.indices
            return ((False, s), (False, r), (True, q), (True, p))
        p, q = self.indices
        return ((False, q), (True, p))


def build_terms(s: IntegralSet):
    """Expand an IntegralSet into the canonical spin-orbital term list.

    Terms with |coeff| <= 1e-14 are dropped so term counts are
    reproducible across platforms.
    """
    spin = spin_integrals(s)
    n = spin.n_spin
    terms = []
    h1 = spin.h1
    for p in range(n):
        for q in range(n):
            c = h1[p, q]
            if abs(c) > COEFF_CUTOFF:
                terms.append(FermTerm((p, q), float(c)))
    g = spin.g_anti
    for p in range(n):
        for q in range(p + 1, n):
            for k in range(n):
                for l in range(k + 1, n):
                    c = g[p, q, k, l]
                    if abs(c) > COEFF_CUTOFF:
                        # a+_p a+_q a_l a_k with l > k
                        terms.append(FermTerm((p, q, l, k), float(c)))
    return terms


def classify_term(t: FermTerm, model: SymmetryModel) -> tuple:
    """Parity flip the term induces on each generator (counted with
    multiplicity over all its creation and annihilation indices)."""
    shift = []
    for g in model.generators:
        mask = g.mask
        bits = 0
        for idx in t.indices:
            bits ^= (mask >> idx) & 1
        shift.append(bits)
    return tuple(shift)


@dataclass
class PartitionedHamiltonian:
    """H split into reference terms (no parity flips) and perturbation
    blocks keyed by their irrep shift."""

    integrals: IntegralSet
    model: SymmetryModel
    ref_terms: list
    pert_blocks: dict
    core_energy: float
    n_spin_orbitals: int

    @property
    def n_terms(self):
        return len(self.ref_terms) + sum(len(v) for v in self.pert_blocks.values())

    def sorted_shifts(self):
        return sorted(self.pert_blocks)


def partition_hamiltonian(s: IntegralSet, model: SymmetryModel) -> PartitionedHamiltonian:
    """Classify every term of H by its irrep shift (optimal partitioning)."""
    ref = []
    blocks: dict = {}
    for t in build_terms(s):
        shift = classify_term(t, model)
        if any(shift):
            blocks.setdefault(shift, []).append(t)
        else:
            ref.append(t)
    return PartitionedHamiltonian(
        integrals=s,
        model=model,
        ref_terms=ref,
        pert_blocks=blocks,
        core_energy=s.core_energy,
        n_spin_orbitals=2 * s.n_spatial,
    )


# ---------------------------------------------------------------------------
# Pairwise Slater-Condon rules (the small-scale oracle path)
# ---------------------------------------------------------------------------

def _occ_list(det):
    out = []
    p = 0
    while det:
        if det & 1:
            out.append(p)
        det >>= 1
        p += 1
    return out


def _position(det, idx):
    """Number of occupied spin orbitals below idx."""
    return (det & ((1 << idx) - 1)).bit_count()


def matrix_element(a: int, b: int, s: IntegralSet) -> float:
    """<a|H|b> by the Slater-Condon rules (zero beyond double excitations).

    Diagonal elements include the core energy.  Both determinants must
    carry the same electron count.
    """
    a = int(a)
    b = int(b)
    if a.bit_count() != b.bit_count():
        raise ValueError("determinants carry different electron counts")
    spin = spin_integrals(s)
    diff = a ^ b
    degree = diff.bit_count() // 2

    if degree == 0:
        occ = _occ_list(a)
        val = spin.core_energy
        for i in occ:
            val += spin.h1[i, i]
        for ii, i in enumerate(occ):
            for j in occ[ii + 1:]:
                val += spin.g_anti[i, j, i, j]
        return val

    if degree == 1:
        i = (b & diff).bit_length() - 1
        x = (a & diff).bit_length() - 1
        sign = -1.0 if (_position(b, i) + _position(a, x)) & 1 else 1.0
        val = spin.h1[x, i]
        common = a & b
        for j in _occ_list(common):
            val += spin.g_anti[x, j, i, j]
        return sign * val

    if degree == 2:
        holes = _occ_list(b & diff)
        parts = _occ_list(a & diff)
        i, j = holes
        x, y = parts
        perm = _position(b, i) + _position(b, j) + _position(a, x) + _position(a, y)
        sign = -1.0 if perm & 1 else 1.0
        return sign * spin.g_anti[x, y, i, j]

    return 0.0


def diagonal_values(dets, s: IntegralSet) -> np.ndarray:
    """Vectorized <det|H|det> (core energy included) for an array of dets."""
    spin = spin_integrals(s)
    dets = np.asarray(dets, dtype=np.uint64)
    n = spin.n_spin
    occ = np.zeros((len(dets), n))
    for p in range(n):
        occ[:, p] = (dets >> np.uint64(p)) & np.uint64(1)
    gdiag = np.einsum("ijij->ij", spin.g_anti)
    e = occ @ np.diag(spin.h1).copy()
    e += 0.5 * np.einsum("di,ij,dj->d", occ, gdiag, occ)
    return e + spin.core_energy


# ---------------------------------------------------------------------------
# Vectorized term application and matrix assembly
# ---------------------------------------------------------------------------

def _apply_term(dets: np.ndarray, term: FermTerm):
    """Apply one term to an array of determinants.

    Returns (alive mask, resulting dets, signs).  Entries the term
    annihilates are flagged dead; their outputs are garbage and must be
    masked by the caller.
    """
    cur = dets.copy()
    alive = np.ones(len(dets), dtype=bool)
    parity = np.zeros(len(dets), dtype=np.uint64)
    one = np.uint64(1)
    for create, idx in term.ladder_ops():
        bit = np.uint64(1 << idx)
        below = np.uint64((1 << idx) - 1)
        occupied = (cur & bit) != 0
        alive &= (occupied != create)
        parity ^= popcount_array(cur & below) & one
        cur = cur ^ bit
    signs = np.where(parity == 0, 1.0, -1.0)
    return alive, cur, signs


@dataclass
class SectorMatrix:
    """A Hamiltonian block over an ordered determinant basis."""

    basis: np.ndarray
    entries: sp.csr_matrix

    @property
    def dim(self):
        return len(self.basis)

    def toarray(self):
        return self.entries.toarray()

    def diagonal(self):
        return self.entries.diagonal()

    def matvec(self, v):
        return self.entries @ v


def _check_basis(basis):
    basis = np.asarray(basis, dtype=np.uint64)
    if len(basis) > 1 and not np.all(basis[:-1] < basis[1:]):
        raise ValueError("basis must be strictly sorted and duplicate-free")
    return basis


def _lookup(basis, dets):
    """Indices of dets in a sorted basis; -1 where absent."""
    if len(basis) == 0:
        return np.full(len(dets), -1, dtype=np.int64)
    pos = np.searchsorted(basis, dets)
    pos = np.minimum(pos, len(basis) - 1)
    hit = basis[pos] == dets
    return np.where(hit, pos, -1)


def build_sector_matrix(basis, terms, n_spin_orbitals, core_energy=0.0) -> SectorMatrix:
    """Assemble the matrix of a term list over one sector basis.

    The basis must be sorted and duplicate-free (usage error otherwise).
    The core energy, when given, lands on the diagonal.  Assembly is
    term-ordered and deterministic, so repeated builds are bit-identical.
    """
    basis = _check_basis(basis)
    n = len(basis)
    dense = np.zeros((n, n))
    cols = np.arange(n)
    for t in terms:
        alive, out, signs = _apply_term(basis, t)
        rows = _lookup(basis, out[alive])
        src = cols[alive]
        ok = rows >= 0
        np.add.at(dense, (rows[ok], src[ok]), t.coeff * signs[alive][ok])
    if core_energy:
        dense[np.diag_indices(n)] += core_energy
    return SectorMatrix(basis=basis, entries=sp.csr_matrix(dense))


def apply_block(terms, psi, source_basis, target_basis, strict=True) -> np.ndarray:
    """Apply a perturbation block to a coefficient vector.

    Returns the unnormalized image vector on target_basis.  Determinants
    the block annihilates contribute nothing.  With strict=True a landing
    determinant absent from the target basis is a usage error (the target
    does not match the block's irrep shift).
    """
    source_basis = _check_basis(source_basis)
    target_basis = _check_basis(target_basis)
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (len(source_basis),):
        raise ValueError("psi length differs from source basis")
    out = np.zeros(len(target_basis))
    for t in terms:
        alive, dets, signs = _apply_term(source_basis, t)
        rows = _lookup(target_basis, dets[alive])
        if strict and np.any(rows < 0):
            raise ValueError("block image leaves the target basis; "
                             "shift/target mismatch")
        ok = rows >= 0
        np.add.at(out, rows[ok], t.coeff * (signs[alive] * psi[alive])[ok])
    return out


def materialize_block(terms, source_basis, target_basis) -> np.ndarray:
    """Dense rectangular matrix of a term list between two bases."""
    source_basis = _check_basis(source_basis)
    target_basis = _check_basis(target_basis)
    mat = np.zeros((len(target_basis), len(source_basis)))
    src = np.arange(len(source_basis))
    for t in terms:
        alive, dets, signs = _apply_term(source_basis, t)
        rows = _lookup(target_basis, dets[alive])
        ok = rows >= 0
        np.add.at(mat, (rows[ok], src[alive][ok]), t.coeff * signs[alive][ok])
    return mat


def full_hamiltonian_matrix(basis, s: IntegralSet) -> SectorMatrix:
    """Full H over a basis via the term path (core on the diagonal)."""
    return build_sector_matrix(basis, build_terms(s), 2 * s.n_spatial,
                               core_energy=s.core_energy)
