"""Z2 symmetry models, determinant irrep labels, and sector enumeration.

A determinant is a plain Python int (or numpy uint64) whose bit p is set
iff spin orbital p is occupied, under the interleaved convention (alpha
of spatial orbital q at bit 2q, beta at 2q+1).  An irrep label is a tuple
of K parity bits, one per Z2 generator of the model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

import numpy as np

GENERATOR_ORIGINS = ("exact-point-group", "approximate-point-group", "particle-number")


def popcount_array(a):
    """Bit population count for an unsigned numpy array."""
    return np.bitwise_count(a)


@dataclass(frozen=True)
class Z2Generator:
    """One Z2 symmetry: electron-count parity on a set of spin orbitals."""

    orbitals: tuple
    origin: str = "particle-number"

    def __post_init__(self):
        orbs = tuple(sorted(set(self.orbitals)))
        object.__setattr__(self, "orbitals", orbs)
        if not orbs:
            raise ValueError("generator support must be nonempty")
        if any(p < 0 for p in orbs):
            raise ValueError("negative spin-orbital index")
        if self.origin not in GENERATOR_ORIGINS:
            raise ValueError(f"unknown origin {self.origin!r}")

    @property
    def mask(self) -> int:
        m = 0
        for p in self.orbitals:
            m |= 1 << p
        return m


@dataclass(frozen=True)
class SymmetryModel:
    """Fixed alpha/beta electron counts plus K Z2 parity generators."""

    n_alpha: int
    n_beta: int
    generators: tuple

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        supports = [g.orbitals for g in self.generators]
        if len(set(supports)) != len(supports):
            raise ValueError("generators must be distinct as sets")

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    def masks(self):
        return [g.mask for g in self.generators]


def irrep_of(det: int, model: SymmetryModel) -> tuple:
    """Parity of the occupation on each generator support."""
    det = int(det)
    return tuple((int(det) & g.mask).bit_count() & 1 for g in model.generators)


def _alpha_beta_parts(mask: int, n_spatial: int):
    """Split a spin-orbital mask into spatial-orbital masks per spin."""
    am = bm = 0
    for p in range(n_spatial):
        if mask >> (2 * p) & 1:
            am |= 1 << p
        if mask >> (2 * p + 1) & 1:
            bm |= 1 << p
    return am, bm


def _spread_even(x):
    """Interleave zeros: spatial-orbital bits -> spin-orbital alpha bits."""
    x = np.asarray(x, dtype=np.uint64)
    x = (x | (x << np.uint64(8))) & np.uint64(0x00FF00FF00FF00FF)
    x = (x | (x << np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    x = (x | (x << np.uint64(2))) & np.uint64(0x3333333333333333)
    x = (x | (x << np.uint64(1))) & np.uint64(0x5555555555555555)
    return x


def _strings(n_spatial, n_occ):
    """All C(M, n) occupation strings as uint64, ascending."""
    out = []
    for occ in combinations(range(n_spatial), n_occ):
        v = 0
        for p in occ:
            v |= 1 << p
        out.append(v)
    return np.array(sorted(out), dtype=np.uint64)


def _string_signatures(strings, spatial_masks):
    """(n_strings, K) parity bits of each string on each spatial mask."""
    if not spatial_masks:
        return np.zeros((len(strings), 0), dtype=np.uint8)
    cols = [
        (popcount_array(strings & np.uint64(m)) & 1).astype(np.uint8)
        for m in spatial_masks
    ]
    return np.stack(cols, axis=1)


def _split_masks(model, n_spatial):
    amasks, bmasks = [], []
    for g in model.generators:
        am, bm = _alpha_beta_parts(g.mask, n_spatial)
        amasks.append(am)
        bmasks.append(bm)
    return amasks, bmasks


def enumerate_sector(model: SymmetryModel, target: tuple, n_spatial: int) -> np.ndarray:
    """All determinants with the model's alpha/beta counts and irrep `target`.

    Returns a sorted uint64 array (ascending bitstring value, duplicate
    free).  An infeasible sector yields an empty array.
    """
    if model.n_alpha > n_spatial or model.n_beta > n_spatial:
        raise ValueError("electron count exceeds orbital count")
    if len(target) != model.n_generators:
        raise ValueError("target parity length differs from generator count")

    astr = _strings(n_spatial, model.n_alpha)
    bstr = _strings(n_spatial, model.n_beta)
    amasks, bmasks = _split_masks(model, n_spatial)
    asig = _string_signatures(astr, amasks)
    bsig = _string_signatures(bstr, bmasks)

    target_arr = np.array(target, dtype=np.uint8)
    a_groups = _group_by_signature(astr, asig)
    b_groups = _group_by_signature(bstr, bsig)

    chunks = []
    for sig_a, dets_a in a_groups.items():
        need_b = tuple(np.bitwise_xor(np.array(sig_a, dtype=np.uint8), target_arr))
        dets_b = b_groups.get(need_b)
        if dets_b is None:
            continue
        spread_a = _spread_even(dets_a)
        spread_b = _spread_even(dets_b) << np.uint64(1)
        combined = (spread_a[:, None] | spread_b[None, :]).ravel()
        chunks.append(combined)
    if not chunks:
        return np.zeros(0, dtype=np.uint64)
    out = np.concatenate(chunks)
    out.sort()
    return out


def _group_by_signature(strings, signatures):
    groups = {}
    if signatures.shape[1] == 0:
        return {(): strings}
    keys = [tuple(row) for row in signatures]
    order = {}
    for i, key in enumerate(keys):
        order.setdefault(key, []).append(i)
    for key, idx in order.items():
        groups[key] = strings[np.array(idx)]
    return groups


def count_sector(model: SymmetryModel, target: tuple, n_spatial: int) -> int:
    """Sector size without materializing determinants."""
    astr = _strings(n_spatial, model.n_alpha)
    bstr = _strings(n_spatial, model.n_beta)
    amasks, bmasks = _split_masks(model, n_spatial)
    a_groups = _group_by_signature(astr, _string_signatures(astr, amasks))
    b_groups = _group_by_signature(bstr, _string_signatures(bstr, bmasks))
    target_arr = np.array(target, dtype=np.uint8)
    total = 0
    for sig_a, dets_a in a_groups.items():
        need_b = tuple(np.bitwise_xor(np.array(sig_a, dtype=np.uint8), target_arr))
        dets_b = b_groups.get(need_b)
        if dets_b is not None:
            total += len(dets_a) * len(dets_b)
    return total


def sector_labels(dets, model: SymmetryModel):
    """Group an array of determinants by irrep label.

    Returns {label tuple: sorted uint64 array}.
    """
    dets = np.asarray(dets, dtype=np.uint64)
    masks = model.masks()
    sig = np.zeros((len(dets), len(masks)), dtype=np.uint8)
    for a, m in enumerate(masks):
        sig[:, a] = (popcount_array(dets & np.uint64(m)) & 1).astype(np.uint8)
    groups = {}
    for i, row in enumerate(sig):
        groups.setdefault(tuple(row), []).append(i)
    return {
        label: np.sort(dets[np.array(idx)])
        for label, idx in groups.items()
    }


def load_grouping(path, n_alpha: int, n_beta: int):
    """Read a grouping file: {"generators": [...], "target_parities": [...]}.

    Spin-orbital indices in the file are 0-based under the interleaved
    convention.  Returns (SymmetryModel, target label tuple).
    """
    with open(path) as fh:
        data = json.load(fh)
    gens = tuple(
        Z2Generator(tuple(entry["orbitals"]), entry.get("origin", "particle-number"))
        for entry in data["generators"]
    )
    target = tuple(int(x) for x in data.get("target_parities", ()))
    model = SymmetryModel(n_alpha=n_alpha, n_beta=n_beta, generators=gens)
    if len(target) != len(gens):
        raise ValueError("target_parities length differs from generator count")
    return model, target


def save_grouping(path, model: SymmetryModel, target):
    data = {
        "generators": [
            {"orbitals": list(g.orbitals), "origin": g.origin}
            for g in model.generators
        ],
        "target_parities": [int(x) for x in target],
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")


def suggest_grouping(integral_set, candidates):
    """Rank candidate symmetry models by perturbation strength.

    The figure of merit is the 2-norm of the coefficients of all terms
    that break at least one generator of the candidate (nothing in the
    literature pins a norm; the coefficient 2-norm is basis stable and
    monotone under adding terms).  Candidates are returned as a list of
    (model, norm) sorted by ascending norm; ties prefer more generators,
    then input order.
    """
    from . import hamiltonian as ham

    if not candidates:
        raise ValueError("no candidates given")
    terms = ham.build_terms(integral_set)
    ranked = []
    for pos, model in enumerate(candidates):
        sq = 0.0
        for t in terms:
            if any(bit for bit in ham.classify_term(t, model)):
                sq += t.coeff * t.coeff
        ranked.append((np.sqrt(sq), -model.n_generators, pos, model))
    ranked.sort(key=lambda item: item[:3])
    return [(model, float(norm)) for norm, _, _, model in ranked]
