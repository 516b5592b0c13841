"""Restricted Hartree-Fock with AO symmetry blocking and MO labeling.

Reflections that fix every atom act diagonally on the AO basis (p
components flip sign); grouping AOs by those signs block-diagonalizes the
Fock matrix exactly, so converged MOs carry exact parities.  Reflections
that permute atoms (and approximate reflections of deformed geometries)
are evaluated after the fact as expectation values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .basis import ao_descriptor, n_aos
from .gaussians import build_eri, build_one_electron, build_overlap_cross


class SCFError(RuntimeError):
    pass


def nuclear_repulsion(atoms):
    e = 0.0
    for i, (zi, ri) in enumerate(atoms):
        for zj, rj in atoms[i + 1:]:
            e += zi * zj / np.linalg.norm(np.asarray(ri) - np.asarray(rj))
    return e


def reflection_matrix(shells, axis, atol=1e-8):
    """Signed AO permutation of the reflection flipping `axis`.

    Requires the geometry to be exactly invariant; raises if any shell
    image is missing.
    """
    descr = ao_descriptor(shells)
    n = len(descr)
    mat = np.zeros((n, n))
    centers = np.array([sh.center for sh in shells])
    for col, (si, comp) in enumerate(descr):
        target = shells[si].center.copy()
        target[axis] = -target[axis]
        image = None
        for sj, sh in enumerate(shells):
            if sh.l == shells[si].l and len(sh.exps) == len(shells[si].exps) \
                    and np.allclose(sh.exps, shells[si].exps) \
                    and np.linalg.norm(sh.center - target) < atol:
                image = sj
                break
        if image is None:
            raise SCFError(f"geometry not invariant under axis-{axis} reflection")
        row = _ao_index(descr, image, comp)
        sign = -1.0 if (shells[si].l == 1 and comp[axis] == 1) else 1.0
        mat[row, col] = sign
    _ = centers
    return mat


def _ao_index(descr, shell_index, comp):
    for i, (si, c) in enumerate(descr):
        if si == shell_index and c == comp:
            return i
    raise SCFError("AO component lookup failed")


def salc_blocks(shells, axes):
    """Symmetry-adapted AO combinations for a set of reflections.

    Each reflection is a signed AO permutation (atom-permuting ones
    included); their joint eigenbasis splits the AO space into irrep
    blocks.  Returns a list of (signature, column matrix) pairs sorted by
    signature, where signature holds the +-1 characters in `axes` order.
    """
    n = n_aos(shells)
    mats = [reflection_matrix(shells, axis) for axis in axes]
    weights = np.zeros((n, n))
    for k, mat in enumerate(mats):
        if np.abs(mat @ mat - np.eye(n)).max() > 1e-10:
            raise SCFError("reflection matrix is not an involution")
        weights += 3.0 ** k * mat
    if not axes:
        return [((), np.eye(n))]
    _, vecs = np.linalg.eigh(weights)
    groups = {}
    for col in range(n):
        v = vecs[:, col]
        sig = []
        for mat in mats:
            char = float(v @ mat @ v)
            if abs(abs(char) - 1.0) > 1e-8:
                raise SCFError("SALC construction failed to split irreps")
            sig.append(int(np.sign(char)))
        groups.setdefault(tuple(sig), []).append(v)
    return [(sig, np.column_stack(cols)) for sig, cols in sorted(groups.items())]


@dataclass
class RHFResult:
    energy: float
    mo_energies: np.ndarray
    mo_coeffs: np.ndarray  # AO x MO
    occ_mask: np.ndarray   # doubly occupied MOs, aligned with mo_energies
    mo_signatures: list    # reflection characters per MO (block signature)
    density: np.ndarray
    converged: bool
    n_iter: int
    overlap: np.ndarray
    hcore: np.ndarray
    eri: np.ndarray
    e_nuc: float


def run_rhf(shells, atoms, nelec, blocks=None, block_occupations=None, dm0=None,
            max_iter=300, conv_dens=1e-9, conv_energy=1e-11):
    """Closed-shell SCF.

    blocks: list of (signature, column matrix) pairs from salc_blocks;
    block_occupations pins the number of doubly occupied MOs per block,
    which keeps the iteration from cutting through degenerate pairs (pi
    shells) or hopping configurations along a dissociation scan.  Without
    it, occupation is global aufbau.
    """
    if nelec % 2:
        raise SCFError("closed-shell SCF needs an even electron count")
    nocc = nelec // 2
    s, t, v = build_one_electron(shells, atoms)
    hcore = t + v
    eri = build_eri(shells)
    e_nuc = nuclear_repulsion(atoms)
    n = len(s)
    if blocks is None:
        blocks = [((), np.eye(n))]
    if block_occupations is not None:
        if len(block_occupations) != len(blocks):
            raise SCFError("block_occupations length differs from blocks")
        if sum(block_occupations) != nocc:
            raise SCFError("block occupations do not sum to nelec/2")

    def solve(fock):
        energies = np.full(n, np.inf)
        coeffs = np.zeros((n, n))
        occ = np.zeros(n, dtype=bool)
        sigs = [()] * n
        cursor = 0
        for bi, (sig, u) in enumerate(blocks):
            fb = u.T @ fock @ u
            sb = u.T @ s @ u
            eps, cb = scipy.linalg.eigh(fb, sb)
            for k in range(u.shape[1]):
                energies[cursor] = eps[k]
                coeffs[:, cursor] = u @ cb[:, k]
                sigs[cursor] = sig
                if block_occupations is not None and k < block_occupations[bi]:
                    occ[cursor] = True
                cursor += 1
        order = np.argsort(energies, kind="stable")
        energies, coeffs, occ = energies[order], coeffs[:, order], occ[order]
        sigs = [sigs[i] for i in order]
        if block_occupations is None:
            occ = np.zeros(n, dtype=bool)
            occ[:nocc] = True
        return energies, coeffs, occ, sigs

    if dm0 is None:
        _, c, occ, _ = solve(hcore)
        dm = 2.0 * c[:, occ] @ c[:, occ].T
    else:
        dm = dm0.copy()

    diis_f, diis_e = [], []
    energy = 0.0
    for it in range(1, max_iter + 1):
        j = np.einsum("ijkl,kl->ij", eri, dm)
        k = np.einsum("ikjl,kl->ij", eri, dm)
        fock = hcore + j - 0.5 * k
        new_energy = 0.5 * np.einsum("ij,ij->", dm, hcore + fock) + e_nuc
        err = fock @ dm @ s - s @ dm @ fock
        err_norm = np.abs(err).max()

        diis_f.append(fock.copy())
        diis_e.append(err.ravel().copy())
        if len(diis_f) > 8:
            diis_f.pop(0)
            diis_e.pop(0)
        if len(diis_f) >= 2:
            fock = _diis_extrapolate(diis_f, diis_e)

        eps, c, occ, sigs = solve(fock)
        dm_new = 2.0 * c[:, occ] @ c[:, occ].T
        if it <= 4 and dm0 is None:
            dm_new = 0.7 * dm_new + 0.3 * dm  # damp the first core-guess steps
        de = abs(new_energy - energy)
        energy = new_energy
        dm = dm_new
        if err_norm < conv_dens and de < conv_energy and it > 2:
            return RHFResult(energy=energy, mo_energies=eps, mo_coeffs=c,
                             occ_mask=occ, mo_signatures=sigs, density=dm,
                             converged=True, n_iter=it, overlap=s, hcore=hcore,
                             eri=eri, e_nuc=e_nuc)
    return RHFResult(energy=energy, mo_energies=eps, mo_coeffs=c, occ_mask=occ,
                     mo_signatures=sigs, density=dm, converged=False,
                     n_iter=max_iter, overlap=s, hcore=hcore, eri=eri,
                     e_nuc=e_nuc)


def _diis_extrapolate(focks, errors):
    m = len(focks)
    b = -np.ones((m + 1, m + 1))
    b[m, m] = 0.0
    for i in range(m):
        for j in range(m):
            b[i, j] = errors[i] @ errors[j]
    rhs = np.zeros(m + 1)
    rhs[m] = -1.0
    try:
        coeffs = np.linalg.solve(b, rhs)[:m]
    except np.linalg.LinAlgError:
        return focks[-1]
    out = np.zeros_like(focks[0])
    for ci, fi in zip(coeffs, focks):
        out += ci * fi
    return out


def mo_reflection_parity(result: RHFResult, refl_matrix, tol=1e-6):
    """Exact +-1 parity of each MO under a signed-permutation reflection."""
    smr = result.overlap @ refl_matrix
    vals = np.einsum("ip,ij,jp->p", result.mo_coeffs, smr, result.mo_coeffs)
    if np.any(np.abs(np.abs(vals) - 1.0) > tol):
        raise SCFError(f"MO is not a reflection eigenstate: {vals}")
    return np.sign(vals).astype(int)


def mo_approx_parity(result: RHFResult, shells, axis):
    """Approximate parity: overlap of each MO with its reflected image.

    Useful when the geometry breaks the reflection slightly; values sit
    near +-1 and the sign is the label.
    """
    from copy import deepcopy

    reflected = deepcopy(shells)
    for sh in reflected:
        sh.center = sh.center.copy()
        sh.center[axis] = -sh.center[axis]
    cross = build_overlap_cross(shells, reflected)
    descr = ao_descriptor(shells)
    signs = np.array([
        -1.0 if (shells[si].l == 1 and comp[axis] == 1) else 1.0
        for si, comp in descr
    ])
    mixed = cross * signs[None, :]
    return np.einsum("ip,ij,jp->p", result.mo_coeffs, mixed, result.mo_coeffs)


def transform_to_mo(result: RHFResult, order=None):
    """MO-basis one/two-electron integrals; optional column reordering."""
    c = result.mo_coeffs if order is None else result.mo_coeffs[:, order]
    h1 = c.T @ result.hcore @ c
    eri = np.einsum("pi,pqrs->iqrs", c, result.eri, optimize=True)
    eri = np.einsum("qj,iqrs->ijrs", c, eri, optimize=True)
    eri = np.einsum("rk,ijrs->ijks", c, eri, optimize=True)
    eri = np.einsum("sl,ijks->ijkl", c, eri, optimize=True)
    return h1, eri
