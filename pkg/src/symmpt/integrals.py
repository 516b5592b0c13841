"""Molecular integral containers, FCIDUMP I/O, and frozen-core folding.

Spatial orbitals are indexed 0..M-1.  Spin orbitals are interleaved:
alpha of spatial p is 2p, beta is 2p+1.  Two-electron integrals are stored
in chemist convention (pq|rs) with the full 8-fold permutation symmetry;
physicist elements <pq|rs> = (pr|qs) are derived on demand.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

COEFF_CUTOFF = 1e-14


class FcidumpError(ValueError):
    """Malformed FCIDUMP input (carries a line number when known)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConflictError(FcidumpError):
    """Duplicate FCIDUMP records with conflicting values."""


@dataclass
class IntegralSet:
    """Second-quantized Hamiltonian data over M spatial orbitals.

    Treat instances as immutable after construction; they are shared
    freely between workers and cached against.

    Attributes:
        n_spatial: number of spatial orbitals M.
        n_electrons: total electron count N.
        spin_multiplicity: 2S+1.
        core_energy: constant term in hartree (nuclear repulsion plus any
            folded frozen-core energy).
        one_body: (M, M) symmetric array of h_pq in hartree.
        two_body: (M, M, M, M) array of chemist integrals (pq|rs).
        orb_irreps: per-orbital point-group irrep label (small integers).
    """

    n_spatial: int
    n_electrons: int
    spin_multiplicity: int
    core_energy: float
    one_body: np.ndarray
    two_body: np.ndarray
    orb_irreps: tuple = ()

    def __post_init__(self):
        m = self.n_spatial
        if self.one_body.shape != (m, m):
            raise ValueError("one_body must be M x M")
        if self.two_body.shape != (m, m, m, m):
            raise ValueError("two_body must be M^4")
        if self.orb_irreps and len(self.orb_irreps) != m:
            raise ValueError("orb_irreps must have exactly M entries")

    @property
    def ms2(self):
        return self.spin_multiplicity - 1

    @property
    def n_alpha(self):
        return (self.n_electrons + self.ms2) // 2

    @property
    def n_beta(self):
        return self.n_electrons - self.n_alpha

    @property
    def n_spin_orbitals(self):
        return 2 * self.n_spatial


def alpha_index(p):
    """Spin-orbital index of the alpha spin orbital of spatial orbital p."""
    return 2 * p


def beta_index(p):
    return 2 * p + 1


def spatial_of(so):
    """Spatial orbital of spin orbital index so."""
    return so // 2


@dataclass
class SpinIntegrals:
    """Spin-orbital view of an IntegralSet, built once and cached.

    h1: (2M, 2M) one-body matrix (zero between opposite spins).
    g_phys: (2M, 2M, 2M, 2M) physicist elements <ij|kl>.
    g_anti: antisymmetrized <ij|kl> - <ij|lk>.
    """

    h1: np.ndarray
    g_phys: np.ndarray
    g_anti: np.ndarray
    core_energy: float
    n_spin: int


_SPIN_CACHE: dict = {}


def spin_integrals(s: IntegralSet) -> SpinIntegrals:
    """Expand an IntegralSet to spin orbitals (memoized per object)."""
    key = id(s)
    hit = _SPIN_CACHE.get(key)
    if hit is not None and hit[0] is s:
        return hit[1]
    m = s.n_spatial
    n = 2 * m
    h1 = np.zeros((n, n))
    h1[0::2, 0::2] = s.one_body
    h1[1::2, 1::2] = s.one_body
    # <ij|kl> = (ik|jl) * delta(sigma_i, sigma_k) * delta(sigma_j, sigma_l)
    g = np.zeros((n, n, n, n))
    chem = s.two_body
    for si in (0, 1):
        for sj in (0, 1):
            g[si::2, sj::2, si::2, sj::2] = chem.transpose(0, 2, 1, 3)
    g_anti = g - g.transpose(0, 1, 3, 2)
    out = SpinIntegrals(h1=h1, g_phys=g, g_anti=g_anti,
                        core_energy=s.core_energy, n_spin=n)
    _SPIN_CACHE[key] = (s, out)
    return out


_NAMELIST_KEYS = ("NORB", "NELEC", "MS2", "ORBSYM", "ISYM", "IUHF")


def _parse_header(lines):
    """Parse the free-form &FCI ... &END / '/' namelist.

    Returns (fields dict, index of first record line).
    """
    if not lines:
        raise FcidumpError("empty input", line=1)
    header = []
    end_line = None
    for i, raw in enumerate(lines):
        header.append(raw)
        stripped = raw.strip()
        if "&END" in stripped.upper() or stripped.endswith("/"):
            end_line = i
            break
    if end_line is None:
        raise FcidumpError("namelist not terminated by &END or /", line=len(lines))
    text = " ".join(header)
    text = re.sub(r"&FCI", " ", text, flags=re.IGNORECASE)
    text = re.sub(r"&END", " ", text, flags=re.IGNORECASE)
    text = text.replace("/", " ")
    fields = {}
    for match in re.finditer(r"([A-Za-z0-9]+)\s*=\s*([^=]*?)(?=[A-Za-z0-9]+\s*=|$)", text):
        key = match.group(1).upper()
        val = match.group(2).strip().rstrip(",").strip()
        fields[key] = val
    for required in ("NORB", "NELEC"):
        if required not in fields:
            raise FcidumpError(f"missing {required} in namelist", line=end_line + 1)
    return fields, end_line + 1


def parse_fcidump(text: str) -> IntegralSet:
    """Parse FCIDUMP text (Molpro convention) into an IntegralSet.

    Records are `value i j k l` with 1-based indices; i=j=k=l=0 carries the
    core energy, k=l=0 a one-body element, and the rest two-body chemist
    integrals (ij|kl).  All 8-fold symmetry partners are populated.  Molpro
    orbital-energy records (i>0, j=k=l=0) are skipped.

    Raises FcidumpError (with a line number) on malformed input, indices
    outside [1, NORB], or duplicate records that disagree by more than 1e-12.
    """
    lines = text.splitlines()
    fields, first_record = _parse_header(lines)
    try:
        norb = int(fields["NORB"])
        nelec = int(fields["NELEC"])
        ms2 = int(fields.get("MS2", "0") or "0")
    except ValueError as exc:
        raise FcidumpError(f"bad namelist value: {exc}", line=1)
    if norb <= 0:
        raise FcidumpError("NORB must be positive", line=1)
    orbsym = ()
    if "ORBSYM" in fields and fields["ORBSYM"]:
        try:
            orbsym = tuple(int(tok) for tok in re.split(r"[,\s]+", fields["ORBSYM"]) if tok)
        except ValueError:
            raise FcidumpError("bad ORBSYM entry", line=1)
        if len(orbsym) != norb:
            raise FcidumpError("ORBSYM length differs from NORB", line=1)

    one = np.zeros((norb, norb))
    two = np.zeros((norb, norb, norb, norb))
    core = 0.0
    seen: dict = {}

    for lineno, raw in enumerate(lines[first_record:], start=first_record + 1):
        stripped = raw.strip()
        if not stripped:
            continue
        parts = stripped.split()
        if len(parts) != 5:
            raise FcidumpError(f"expected `value i j k l`, got {stripped!r}", line=lineno)
        try:
            value = float(parts[0])
            i, j, k, l = (int(tok) for tok in parts[1:])
        except ValueError:
            raise FcidumpError(f"unparsable record {stripped!r}", line=lineno)
        for idx in (i, j, k, l):
            if idx < 0 or idx > norb:
                raise FcidumpError(f"orbital index {idx} outside [0, {norb}]", line=lineno)
        if i == j == k == l == 0:
            key = ("core",)
            if key in seen and abs(seen[key] - value) > 1e-12:
                raise ConflictError("conflicting core-energy records", line=lineno)
            seen[key] = value
            core = value
        elif k == 0 and l == 0:
            if j == 0:
                continue  # orbital-energy record, not an integral
            a, b = i - 1, j - 1
            key = ("one", min(a, b), max(a, b))
            if key in seen and abs(seen[key] - value) > 1e-12:
                raise ConflictError(f"conflicting h({i},{j}) records", line=lineno)
            seen[key] = value
            one[a, b] = value
            one[b, a] = value
        else:
            if i == 0 or j == 0 or k == 0 or l == 0:
                raise FcidumpError("mixed zero/nonzero indices in two-body record",
                                   line=lineno)
            a, b, c, d = i - 1, j - 1, k - 1, l - 1
            key = ("two", _canonical_chem(a, b, c, d))
            if key in seen and abs(seen[key] - value) > 1e-12:
                raise ConflictError(f"conflicting ({i}{j}|{k}{l}) records", line=lineno)
            seen[key] = value
            for (w, x, y, z) in _chem_equivalents(a, b, c, d):
                two[w, x, y, z] = value

    return IntegralSet(
        n_spatial=norb,
        n_electrons=nelec,
        spin_multiplicity=ms2 + 1,
        core_energy=core,
        one_body=one,
        two_body=two,
        orb_irreps=orbsym,
    )


def load_fcidump(path) -> IntegralSet:
    with open(path) as fh:
        return parse_fcidump(fh.read())


def _canonical_chem(a, b, c, d):
    ab = (max(a, b), min(a, b))
    cd = (max(c, d), min(c, d))
    return max(ab, cd) + min(ab, cd)


def _chem_equivalents(a, b, c, d):
    return {
        (a, b, c, d), (b, a, c, d), (a, b, d, c), (b, a, d, c),
        (c, d, a, b), (d, c, a, b), (c, d, b, a), (d, c, b, a),
    }


def emit_fcidump(s: IntegralSet, threshold: float = 0.0) -> str:
    """Serialize to FCIDUMP text, bit-stable for a given IntegralSet.

    Floats are printed with 17 significant digits so a parse/emit round
    trip reproduces values exactly.
    """
    m = s.n_spatial
    lines = [f"&FCI NORB={m},NELEC={s.n_electrons},MS2={s.ms2},"]
    if s.orb_irreps:
        lines.append("  ORBSYM=" + ",".join(str(x) for x in s.orb_irreps) + ",")
    lines.append("  ISYM=1,")
    lines.append("&END")
    fmt = "%.17g"

    def rec(value, i, j, k, l):
        lines.append(f"{fmt % value} {i} {j} {k} {l}")

    for i in range(m):
        for j in range(i + 1):
            for k in range(i + 1):
                lmax = j + 1 if k == i else k + 1
                for l in range(lmax):
                    v = s.two_body[i, j, k, l]
                    if abs(v) > threshold:
                        rec(v, i + 1, j + 1, k + 1, l + 1)
    for i in range(m):
        for j in range(i + 1):
            v = s.one_body[i, j]
            if abs(v) > threshold:
                rec(v, i + 1, j + 1, 0, 0)
    rec(s.core_energy, 0, 0, 0, 0)
    return "\n".join(lines) + "\n"


def freeze_core(s: IntegralSet, core) -> IntegralSet:
    """Fold doubly occupied core orbitals into effective integrals.

    The returned set spans the M - |core| remaining orbitals.  The core
    energy absorbs 2*sum_c h_cc plus the core Coulomb/exchange energy, and
    each remaining h_pq gains sum_c [2(pq|cc) - (pc|cq)].
    """
    core = sorted(set(core))
    if not core:
        return s
    m = s.n_spatial
    for c in core:
        if c < 0 or c >= m:
            raise ValueError(f"core orbital {c} outside [0, {m})")
    if 2 * len(core) > s.n_electrons:
        raise ValueError("more core electrons than electrons present")
    keep = [p for p in range(m) if p not in core]

    ecore = s.core_energy
    for c in core:
        ecore += 2.0 * s.one_body[c, c]
    for c in core:
        for d in core:
            ecore += 2.0 * s.two_body[c, c, d, d] - s.two_body[c, d, d, c]

    one = s.one_body[np.ix_(keep, keep)].copy()
    for c in core:
        one += 2.0 * s.two_body[np.ix_(keep, keep, [c], [c])][:, :, 0, 0]
        one -= s.two_body[np.ix_(keep, [c], [c], keep)][:, 0, 0, :]
    two = s.two_body[np.ix_(keep, keep, keep, keep)].copy()

    irreps = tuple(s.orb_irreps[p] for p in keep) if s.orb_irreps else ()
    return IntegralSet(
        n_spatial=len(keep),
        n_electrons=s.n_electrons - 2 * len(core),
        spin_multiplicity=s.spin_multiplicity,
        core_energy=ecore,
        one_body=one,
        two_body=two,
        orb_irreps=irreps,
    )
