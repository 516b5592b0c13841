"""Dense determinant FCI over spatial-orbital alpha/beta strings.

This is the reference-energy oracle for the emitted fixtures.  It works
directly with spatial-orbital integrals and (alpha, beta) occupation
tuples, deliberately sharing no machinery (and no spin-orbital
interleaving) with any consumer of the FCIDUMP files it validates.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
import scipy.sparse
import scipy.sparse.linalg


def freeze_core_integrals(h1, eri, e0, core):
    """Fold doubly occupied core orbitals into (h1', eri', e0')."""
    core = sorted(core)
    keep = [p for p in range(h1.shape[0]) if p not in core]
    e_frozen = e0
    for c in core:
        e_frozen += 2.0 * h1[c, c]
        for d in core:
            e_frozen += 2.0 * eri[c, c, d, d] - eri[c, d, d, c]
    h_eff = h1[np.ix_(keep, keep)].copy()
    for c in core:
        h_eff += 2.0 * eri[np.ix_(keep, keep, [c], [c])][:, :, 0, 0]
        h_eff -= eri[np.ix_(keep, [c], [c], keep)][:, 0, 0, :]
    eri_eff = eri[np.ix_(keep, keep, keep, keep)].copy()
    return h_eff, eri_eff, e_frozen


def _excitation(bra, ket):
    """(holes, particles) between two sorted occupation tuples."""
    bs, ks = set(bra), set(ket)
    return sorted(ks - bs), sorted(bs - ks)


def _perm_sign(occ, removed, added):
    """Sign of aligning `occ` (sorted) after removed -> added substitution."""
    sign = 1
    work = list(occ)
    for r, a in zip(removed, added):
        i = work.index(r)
        work.pop(i)
        j = 0
        while j < len(work) and work[j] < a:
            j += 1
        work.insert(j, a)
        if (i + j) & 1:
            sign = -sign
    return sign


class DeterminantSpace:
    def __init__(self, norb, na, nb):
        self.norb = norb
        self.alpha = list(combinations(range(norb), na))
        self.beta = list(combinations(range(norb), nb))
        self.index = {}
        for ia, sa in enumerate(self.alpha):
            for ib, sb in enumerate(self.beta):
                self.index[(sa, sb)] = ia * len(self.beta) + ib

    @property
    def size(self):
        return len(self.alpha) * len(self.beta)


def _diagonal(space, h1, eri):
    na = len(space.alpha)
    nb = len(space.beta)
    diag = np.zeros(na * nb)
    j_mat = np.einsum("ppqq->pq", eri)
    k_mat = np.einsum("pqqp->pq", eri)
    occ_a = np.zeros((na, space.norb))
    occ_b = np.zeros((nb, space.norb))
    for ia, sa in enumerate(space.alpha):
        occ_a[ia, list(sa)] = 1.0
    for ib, sb in enumerate(space.beta):
        occ_b[ib, list(sb)] = 1.0
    hdiag = np.diag(h1)
    e_a = occ_a @ hdiag + 0.5 * np.einsum("dp,pq,dq->d", occ_a, j_mat - k_mat, occ_a)
    e_b = occ_b @ hdiag + 0.5 * np.einsum("dp,pq,dq->d", occ_b, j_mat - k_mat, occ_b)
    cross = occ_a @ j_mat @ occ_b.T
    diag = (e_a[:, None] + e_b[None, :] + cross).ravel()
    return diag


def _single_value(p, q, occ_same, occ_other, h1, eri):
    """<p<-q one-spin single> with fixed remaining occupations."""
    val = h1[p, q]
    for r in occ_same:
        if r == q:
            continue
        val += eri[p, q, r, r] - eri[p, r, r, q]
    for r in occ_other:
        val += eri[p, q, r, r]
    return val


def fci_ground_energy(h1, eri, e0, nelec, ms2=0, tol=1e-10):
    """Lowest eigenvalue of the determinant-basis FCI matrix."""
    norb = h1.shape[0]
    na = (nelec + ms2) // 2
    nb = nelec - na
    space = DeterminantSpace(norb, na, nb)
    nbeta = len(space.beta)
    rows, cols, vals = [], [], []

    diag = _diagonal(space, h1, eri)
    for i, d in enumerate(diag):
        rows.append(i)
        cols.append(i)
        vals.append(d)

    virt = {occ: sorted(set(range(norb)) - set(occ)) for occ in
            set(space.alpha) | set(space.beta)}

    def singles(occ):
        out = []
        for q in occ:
            for p in virt[occ]:
                new = tuple(sorted(set(occ) - {q} | {p}))
                out.append((new, p, q, _perm_sign(occ, [q], [p])))
        return out

    def doubles(occ):
        out = []
        for q1, q2 in combinations(occ, 2):
            for p1, p2 in combinations(virt[occ], 2):
                new = tuple(sorted(set(occ) - {q1, q2} | {p1, p2}))
                sign = _perm_sign(occ, [q1, q2], [p1, p2])
                out.append((new, p1, p2, q1, q2, sign))
        return out

    alpha_singles = {sa: singles(sa) for sa in space.alpha}
    beta_singles = {sb: singles(sb) for sb in space.beta}
    alpha_index = {sa: i for i, sa in enumerate(space.alpha)}
    beta_index = {sb: i for i, sb in enumerate(space.beta)}

    # same-spin singles and doubles (other spin string fixed)

    for sa, ia in alpha_index.items():
        for new, p, q, sign in alpha_singles[sa]:
            ja = alpha_index[new]
            if ja < ia:
                continue
            for sb, ib in beta_index.items():
                val = sign * _single_value(p, q, sa, sb, h1, eri)
                if abs(val) < 1e-14:
                    continue
                r, c = ia * nbeta + ib, ja * nbeta + ib
                rows.extend((r, c))
                cols.extend((c, r))
                vals.extend((val, val))
        for new, p1, p2, q1, q2, sign in doubles(sa):
            ja = alpha_index[new]
            if ja < ia:
                continue
            val = sign * (eri[p1, q1, p2, q2] - eri[p1, q2, p2, q1])
            if abs(val) < 1e-14:
                continue
            for ib in range(nbeta):
                r, c = ia * nbeta + ib, ja * nbeta + ib
                rows.extend((r, c))
                cols.extend((c, r))
                vals.extend((val, val))

    for sb, ib in beta_index.items():
        for new, p, q, sign in beta_singles[sb]:
            jb = beta_index[new]
            if jb < ib:
                continue
            for sa, ia in alpha_index.items():
                val = sign * _single_value(p, q, sb, sa, h1, eri)
                if abs(val) < 1e-14:
                    continue
                r, c = ia * nbeta + ib, ia * nbeta + jb
                rows.extend((r, c))
                cols.extend((c, r))
                vals.extend((val, val))
        for new, p1, p2, q1, q2, sign in doubles(sb):
            jb = beta_index[new]
            if jb < ib:
                continue
            val = sign * (eri[p1, q1, p2, q2] - eri[p1, q2, p2, q1])
            if abs(val) < 1e-14:
                continue
            for ia in range(len(space.alpha)):
                r, c = ia * nbeta + ib, ia * nbeta + jb
                rows.extend((r, c))
                cols.extend((c, r))
                vals.extend((val, val))

    # alpha-beta doubles: one single in each spin
    for sa, ia in alpha_index.items():
        for new_a, p, q, sign_a in alpha_singles[sa]:
            ja = alpha_index[new_a]
            for sb, ib in beta_index.items():
                for new_b, r, s_, sign_b in beta_singles[sb]:
                    jb = beta_index[new_b]
                    rc = ia * nbeta + ib
                    cc = ja * nbeta + jb
                    if cc <= rc:
                        continue
                    val = sign_a * sign_b * eri[p, q, r, s_]
                    if abs(val) < 1e-14:
                        continue
                    rows.extend((rc, cc))
                    cols.extend((cc, rc))
                    vals.extend((val, val))

    mat = scipy.sparse.csr_matrix(
        (vals, (rows, cols)), shape=(space.size, space.size))
    if space.size <= 4:
        w = np.linalg.eigvalsh(mat.toarray())
        return float(w[0]) + e0
    w, _ = scipy.sparse.linalg.eigsh(mat, k=1, which="SA", tol=tol,
                                     maxiter=5000)
    return float(w[0]) + e0
