"""McMurchie-Davidson evaluation of Gaussian integrals (s and p shells).

Everything is vectorized over primitive pairs/quartets of a shell pair or
quartet; the shell loops themselves run in Python, which is fast enough
for the fixture molecules (at most 18 basis functions).
"""

from __future__ import annotations

import numpy as np
from scipy.special import hyp1f1

from .basis import COMPONENTS, n_aos


def boys(n, x):
    return hyp1f1(n + 0.5, n + 1.5, -x) / (2.0 * n + 1.0)


def _hermite_e(imax, jmax, q_dist, a, b):
    """Hermite expansion tables E[(i, j, t)] over primitive-pair arrays.

    q_dist is the scalar A_x - B_x for the dimension; a and b are the
    flattened exponent arrays of the pair list.
    """
    p = a + b
    mu = a * b / p
    tables = {(0, 0, 0): np.exp(-mu * q_dist * q_dist)}

    def get(i, j, t):
        if t < 0 or t > i + j or i < 0 or j < 0:
            return 0.0
        return tables[(i, j, t)]

    for i in range(1, imax + 1):
        for t in range(i + 1):
            tables[(i, 0, t)] = (
                get(i - 1, 0, t - 1) / (2.0 * p)
                - (mu * q_dist / a) * get(i - 1, 0, t)
                + (t + 1) * get(i - 1, 0, t + 1)
            )
    for j in range(1, jmax + 1):
        for i in range(imax + 1):
            for t in range(i + j + 1):
                tables[(i, j, t)] = (
                    get(i, j - 1, t - 1) / (2.0 * p)
                    + (mu * q_dist / b) * get(i, j - 1, t)
                    + (t + 1) * get(i, j - 1, t + 1)
                )
    return tables


class ShellPair:
    """Primitive-pair data for a pair of shells, E tables included."""

    def __init__(self, sha, shb, extra_j=0):
        a = np.repeat(sha.exps, len(shb.exps))
        b = np.tile(shb.exps, len(sha.exps))
        self.p = a + b
        self.coef = np.repeat(sha.coefs, len(shb.coefs)) * np.tile(shb.coefs,
                                                                   len(sha.coefs))
        self.center = (a[:, None] * sha.center + b[:, None] * shb.center) / self.p[:, None]
        self.la = sha.l
        self.lb = shb.l
        self.e = [
            _hermite_e(sha.l, shb.l + extra_j, sha.center[d] - shb.center[d], a, b)
            for d in range(3)
        ]


def shell_pair_overlap(sha, shb):
    """Contracted overlap block between two shells (components x components)."""
    pair = ShellPair(sha, shb)
    pref = (np.pi / pair.p) ** 1.5
    out = np.zeros((sha.n_components, shb.n_components))
    for ia, ca in enumerate(COMPONENTS[sha.l]):
        for ib, cb in enumerate(COMPONENTS[shb.l]):
            prim = pref.copy()
            for d in range(3):
                prim = prim * pair.e[d][(ca[d], cb[d], 0)]
            out[ia, ib] = float(pair.coef @ prim)
    return out


def _overlap_prim(pair, ca, cb):
    """Primitive-resolved overlap for given components (array over pairs)."""
    prim = (np.pi / pair.p) ** 1.5
    for d in range(3):
        key = (ca[d], cb[d], 0)
        prim = prim * (pair.e[d][key] if key in pair.e[d] else 0.0)
    return prim


def shell_pair_kinetic(sha, shb):
    pair = ShellPair(sha, shb, extra_j=2)
    b = np.tile(shb.exps, len(sha.exps))
    out = np.zeros((sha.n_components, shb.n_components))
    for ia, ca in enumerate(COMPONENTS[sha.l]):
        for ib, cb in enumerate(COMPONENTS[shb.l]):
            l2, m2, n2 = cb
            term = b * (2.0 * (l2 + m2 + n2) + 3.0) * _overlap_prim(pair, ca, cb)
            term = term - 2.0 * b * b * (
                _overlap_prim(pair, ca, (l2 + 2, m2, n2))
                + _overlap_prim(pair, ca, (l2, m2 + 2, n2))
                + _overlap_prim(pair, ca, (l2, m2, n2 + 2))
            )
            for which, lv in enumerate((l2, m2, n2)):
                if lv >= 2:
                    low = list(cb)
                    low[which] -= 2
                    term = term - 0.5 * lv * (lv - 1) * _overlap_prim(pair, ca, tuple(low))
            out[ia, ib] = float(pair.coef @ term)
    return out


class _HermiteR:
    """Memoized Hermite Coulomb integrals R_{tuv} over a quartet array."""

    def __init__(self, p, pc):
        self.p = p
        self.pc = pc
        r2 = np.sum(pc * pc, axis=1)
        self.x = p * r2
        self._boys = {}
        self._memo = {}

    def _f(self, n):
        if n not in self._boys:
            self._boys[n] = boys(n, self.x)
        return self._boys[n]

    def get(self, t, u, v, n=0):
        if t < 0 or u < 0 or v < 0:
            return 0.0
        key = (t, u, v, n)
        if key in self._memo:
            return self._memo[key]
        if t == u == v == 0:
            val = (-2.0 * self.p) ** n * self._f(n)
        elif t > 0:
            val = (t - 1) * self.get(t - 2, u, v, n + 1) \
                + self.pc[:, 0] * self.get(t - 1, u, v, n + 1)
        elif u > 0:
            val = (u - 1) * self.get(t, u - 2, v, n + 1) \
                + self.pc[:, 1] * self.get(t, u - 1, v, n + 1)
        else:
            val = (v - 1) * self.get(t, u, v - 2, n + 1) \
                + self.pc[:, 2] * self.get(t, u, v - 1, n + 1)
        self._memo[key] = val
        return val


def shell_pair_nuclear(sha, shb, atoms):
    """Nuclear-attraction block, atoms = [(Z, xyz)]."""
    pair = ShellPair(sha, shb)
    out = np.zeros((sha.n_components, shb.n_components))
    for z, center in atoms:
        rtab = _HermiteR(pair.p, pair.center - np.asarray(center))
        pref = 2.0 * np.pi / pair.p
        for ia, ca in enumerate(COMPONENTS[sha.l]):
            for ib, cb in enumerate(COMPONENTS[shb.l]):
                acc = 0.0
                for t in range(ca[0] + cb[0] + 1):
                    ex = pair.e[0][(ca[0], cb[0], t)]
                    for u in range(ca[1] + cb[1] + 1):
                        ey = pair.e[1][(ca[1], cb[1], u)]
                        for v in range(ca[2] + cb[2] + 1):
                            ez = pair.e[2][(ca[2], cb[2], v)]
                            acc = acc + ex * ey * ez * rtab.get(t, u, v)
                out[ia, ib] += -z * float(pair.coef @ (pref * acc))
    return out


def _eri_quartet(bra, ket):
    """Contracted (ab|cd) component block for two shell pairs."""
    nb = len(bra.p)
    nk = len(ket.p)
    pb = np.repeat(bra.p, nk)
    pk = np.tile(ket.p, nb)
    alpha = pb * pk / (pb + pk)
    pq = np.repeat(bra.center, nk, axis=0) - np.tile(ket.center, (nb, 1))
    rtab = _HermiteR(alpha, pq)
    pref = 2.0 * np.pi ** 2.5 / (pb * pk * np.sqrt(pb + pk))
    weights = np.repeat(bra.coef, nk) * np.tile(ket.coef, nb)

    na1 = 1 if bra.la == 0 else 3
    na2 = 1 if bra.lb == 0 else 3
    na3 = 1 if ket.la == 0 else 3
    na4 = 1 if ket.lb == 0 else 3
    out = np.zeros((na1, na2, na3, na4))
    comps_a = COMPONENTS[bra.la]
    comps_b = COMPONENTS[bra.lb]
    comps_c = COMPONENTS[ket.la]
    comps_d = COMPONENTS[ket.lb]
    for i1, c1 in enumerate(comps_a):
        for i2, c2 in enumerate(comps_b):
            ebra = [
                [np.repeat(bra.e[d][(c1[d], c2[d], t)] * np.ones(nb), nk)
                 for t in range(c1[d] + c2[d] + 1)]
                for d in range(3)
            ]
            for i3, c3 in enumerate(comps_c):
                for i4, c4 in enumerate(comps_d):
                    eket = [
                        [np.tile(ket.e[d][(c3[d], c4[d], t)] * np.ones(nk), nb)
                         for t in range(c3[d] + c4[d] + 1)]
                        for d in range(3)
                    ]
                    acc = 0.0
                    for t in range(c1[0] + c2[0] + 1):
                        for u in range(c1[1] + c2[1] + 1):
                            for v in range(c1[2] + c2[2] + 1):
                                left = ebra[0][t] * ebra[1][u] * ebra[2][v]
                                for tt in range(c3[0] + c4[0] + 1):
                                    for uu in range(c3[1] + c4[1] + 1):
                                        for vv in range(c3[2] + c4[2] + 1):
                                            sign = -1.0 if (tt + uu + vv) & 1 else 1.0
                                            acc = acc + sign * left \
                                                * eket[0][tt] * eket[1][uu] * eket[2][vv] \
                                                * rtab.get(t + tt, u + uu, v + vv)
                    out[i1, i2, i3, i4] = float(weights @ (pref * acc))
    return out


def build_one_electron(shells, atoms):
    """Overlap, kinetic, and nuclear-attraction matrices over all AOs."""
    n = n_aos(shells)
    s = np.zeros((n, n))
    t = np.zeros((n, n))
    v = np.zeros((n, n))
    offsets = _offsets(shells)
    for ia, sha in enumerate(shells):
        for ib, shb in enumerate(shells):
            if ib < ia:
                continue
            oa, ob = offsets[ia], offsets[ib]
            sblk = shell_pair_overlap(sha, shb)
            tblk = shell_pair_kinetic(sha, shb)
            vblk = shell_pair_nuclear(sha, shb, atoms)
            for x in range(sha.n_components):
                for y in range(shb.n_components):
                    s[oa + x, ob + y] = s[ob + y, oa + x] = sblk[x, y]
                    t[oa + x, ob + y] = t[ob + y, oa + x] = tblk[x, y]
                    v[oa + x, ob + y] = v[ob + y, oa + x] = vblk[x, y]
    return s, t, v


def build_overlap_cross(shells_bra, shells_ket):
    """Rectangular overlap between two independent shell lists."""
    nb = n_aos(shells_bra)
    nk = n_aos(shells_ket)
    out = np.zeros((nb, nk))
    ob = _offsets(shells_bra)
    ok = _offsets(shells_ket)
    for ia, sha in enumerate(shells_bra):
        for ib, shb in enumerate(shells_ket):
            blk = shell_pair_overlap(sha, shb)
            for x in range(sha.n_components):
                for y in range(shb.n_components):
                    out[ob[ia] + x, ok[ib] + y] = blk[x, y]
    return out


def build_eri(shells):
    """Full chemist-convention (ij|kl) tensor with 8-fold symmetry."""
    n = n_aos(shells)
    eri = np.zeros((n, n, n, n))
    offsets = _offsets(shells)
    nsh = len(shells)
    pairs = {}
    for a in range(nsh):
        for b in range(a + 1):
            pairs[(a, b)] = ShellPair(shells[a], shells[b])
    plist = sorted(pairs)
    for ip, (a, b) in enumerate(plist):
        for (c, d) in plist[: ip + 1]:
            block = _eri_quartet(pairs[(a, b)], pairs[(c, d)])
            oa, ob_, oc, od = offsets[a], offsets[b], offsets[c], offsets[d]
            for x in range(block.shape[0]):
                for y in range(block.shape[1]):
                    for zc in range(block.shape[2]):
                        for w in range(block.shape[3]):
                            val = block[x, y, zc, w]
                            i, j, k, l = oa + x, ob_ + y, oc + zc, od + w
                            for (ii, jj, kk, ll) in (
                                (i, j, k, l), (j, i, k, l), (i, j, l, k),
                                (j, i, l, k), (k, l, i, j), (l, k, i, j),
                                (k, l, j, i), (l, k, j, i),
                            ):
                                eri[ii, jj, kk, ll] = val
    return eri


def _offsets(shells):
    offsets = []
    cursor = 0
    for sh in shells:
        offsets.append(cursor)
        cursor += sh.n_components
    return offsets
