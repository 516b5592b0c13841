"""Jordan-Wigner mapping, Z-string symmetries, qubit tapering, resources.

Pauli strings are handled in symplectic form: a pair of bitmasks (x, z)
with the operator X^x Z^z and a scalar amplitude.  Letter strings use
'IXYZ' with qubit 0 leftmost.  Spin orbital p maps to qubit p, so a
determinant's bitstring doubles as the computational basis state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .integrals import IntegralSet
from .hamiltonian import build_terms
from .symmetry import SymmetryModel

PAULI_CUTOFF = 1e-12


class SymmetryViolationError(RuntimeError):
    """A Pauli term fails to commute with a tapering generator."""


class PlanError(ValueError):
    """Tapering plan is unusable (dependent generators, bad pivots)."""


# -- symplectic Pauli helpers ------------------------------------------------

def jw_ladder(p: int, create: bool):
    """Jordan-Wigner image of a_p / a+_p as [(coeff, xmask, zmask)]."""
    bit = 1 << p
    below = bit - 1
    second = 0.5 if create else -0.5
    return [(0.5, bit, below), (second, bit, below | bit)]


def pauli_product(terms_a, terms_b):
    """Product of two real-coefficient symplectic Pauli sums."""
    out = {}
    for ca, xa, za in terms_a:
        for cb, xb, zb in terms_b:
            sign = -1.0 if (za & xb).bit_count() & 1 else 1.0
            key = (xa ^ xb, za ^ zb)
            out[key] = out.get(key, 0.0) + ca * cb * sign
    return [(c, x, z) for (x, z), c in out.items() if c != 0.0]


def combine_pauli_terms(terms):
    out = {}
    for c, x, z in terms:
        key = (x, z)
        out[key] = out.get(key, 0.0) + c
    return {k: v for k, v in out.items() if abs(v) > PAULI_CUTOFF}


def _symplectic_to_string(x, z, n_qubits):
    letters = []
    for q in range(n_qubits):
        xb = (x >> q) & 1
        zb = (z >> q) & 1
        letters.append("IXZY"[xb + 2 * zb])
    return "".join(letters)


def _string_to_symplectic(string):
    x = z = 0
    for q, letter in enumerate(string):
        if letter in ("X", "Y"):
            x |= 1 << q
        if letter in ("Z", "Y"):
            z |= 1 << q
    return x, z


@dataclass
class PauliHamiltonian:
    """Real-coefficient Pauli-string expansion of a Hermitian operator."""

    n_qubits: int
    terms: dict

    @property
    def n_terms(self):
        return len(self.terms)

    def export_text(self):
        """Deterministic `coefficient<TAB>PAULISTRING` lines (qubit 0
        leftmost, 17 significant digits)."""
        lines = []
        for string in sorted(self.terms):
            lines.append("%.17g\t%s" % (self.terms[string], string))
        return "\n".join(lines) + "\n"


def parse_pauli_text(text, n_qubits):
    terms = {}
    for raw in text.splitlines():
        if not raw.strip():
            continue
        coeff, string = raw.split("\t")
        if len(string) != n_qubits:
            raise ValueError("Pauli string length differs from qubit count")
        terms[string] = float(coeff)
    return PauliHamiltonian(n_qubits=n_qubits, terms=terms)


def _finalize(acc, n_qubits):
    """Turn accumulated symplectic terms into a letter-string dict.

    X^x Z^z carries a factor i^(-n_y) relative to the letter string, so
    surviving odd-Y amplitudes would be imaginary; a real Hamiltonian
    cancels them exactly and we assert as much.
    """
    out = {}
    for (x, z), c in acc.items():
        n_y = (x & z).bit_count()
        if n_y & 1:
            if abs(c) > 1e-10:
                raise ValueError("imaginary Pauli amplitude survived; "
                                 "input operator was not Hermitian")
            continue
        if n_y & 2:
            c = -c
        if abs(c) > PAULI_CUTOFF:
            out[_symplectic_to_string(x, z, n_qubits)] = c
    return out


def jordan_wigner_terms(terms, n_qubits, constant=0.0) -> PauliHamiltonian:
    """Map a fermionic term list to Pauli strings; the constant rides on
    the identity string."""
    acc = {}
    if constant:
        acc[(0, 0)] = constant
    for t in terms:
        ops = list(reversed(t.ladder_ops()))  # leftmost operator first
        prod = jw_ladder(ops[0][1], ops[0][0])
        for create, idx in ops[1:]:
            prod = pauli_product(prod, jw_ladder(idx, create))
        for c, x, z in prod:
            key = (x, z)
            acc[key] = acc.get(key, 0.0) + t.coeff * c
    return PauliHamiltonian(n_qubits=n_qubits, terms=_finalize(acc, n_qubits))


def jordan_wigner(s: IntegralSet) -> PauliHamiltonian:
    """Full second-quantized H in Pauli form (core energy on identity)."""
    return jordan_wigner_terms(build_terms(s), 2 * s.n_spatial,
                               constant=s.core_energy)


# -- tapering ----------------------------------------------------------------

@dataclass
class TaperingPlan:
    """Z-string generators in reduced echelon form with one pivot each.

    Every generator acts as Z exactly on its support; pivots are distinct,
    each inside its own generator's support and absent from all others.
    sector_signs are the +-1 eigenvalues the target sector assigns.
    """

    n_qubits: int
    zmasks: list
    pivots: list
    sector_signs: list

    def __post_init__(self):
        seen = set()
        for mask, pivot in zip(self.zmasks, self.pivots):
            if pivot in seen:
                raise PlanError(f"pivot {pivot} assigned twice")
            seen.add(pivot)
            if not (mask >> pivot) & 1:
                raise PlanError(f"pivot {pivot} outside its generator support")
        for i, mask in enumerate(self.zmasks):
            for j, pivot in enumerate(self.pivots):
                if i != j and (mask >> pivot) & 1:
                    raise PlanError("pivot collision: generator "
                                    f"{i} overlaps pivot {pivot}")

    @property
    def n_tapered(self):
        return len(self.pivots)


def plan_tapering(model: SymmetryModel, target, n_qubits,
                  include_spin_parity=True) -> TaperingPlan:
    """Build a tapering plan from a symmetry model and its target sector.

    The particle-number structure contributes the two spin parities; the
    model's generators contribute their Z-strings with signs (-1)^parity.
    The raw set is brought to reduced echelon form over F2 (pivot = the
    smallest support index not claimed by an earlier generator); redundant
    rows are dropped after checking their sector sign is consistent.
    """
    rows = []
    if include_spin_parity:
        alpha_mask = sum(1 << p for p in range(0, n_qubits, 2))
        beta_mask = alpha_mask << 1
        rows.append((alpha_mask, -1 if model.n_alpha & 1 else 1))
        rows.append((beta_mask, -1 if model.n_beta & 1 else 1))
    for g, parity in zip(model.generators, target):
        rows.append((g.mask, -1 if parity else 1))

    kept_masks: list = []
    kept_signs: list = []
    pivots: list = []
    for mask, sign in rows:
        for k, pivot in enumerate(pivots):
            if (mask >> pivot) & 1:
                mask ^= kept_masks[k]
                sign *= kept_signs[k]
        if mask == 0:
            if sign != 1:
                raise PlanError("inconsistent sector signs: a redundant "
                                "generator contradicts the others")
            continue
        pivot = (mask & -mask).bit_length() - 1
        for k in range(len(kept_masks)):
            if (kept_masks[k] >> pivot) & 1:
                kept_masks[k] ^= mask
                kept_signs[k] *= sign
        kept_masks.append(mask)
        kept_signs.append(sign)
        pivots.append(pivot)
    return TaperingPlan(n_qubits=n_qubits, zmasks=kept_masks,
                        pivots=pivots, sector_signs=kept_signs)


def taper(ph: PauliHamiltonian, plan: TaperingPlan) -> PauliHamiltonian:
    """Conjugate by the plan's Clifford and substitute sector eigenvalues.

    Each term must commute with every generator (violations raise
    SymmetryViolationError naming the term).  Pivot qubits end up acting
    as I or X only; X at a pivot becomes its sector sign and the pivot
    qubits are removed.
    """
    if plan.n_qubits != ph.n_qubits:
        raise PlanError("plan and Hamiltonian disagree on qubit count")
    keep = [q for q in range(ph.n_qubits) if q not in set(plan.pivots)]
    newpos = {q: i for i, q in enumerate(keep)}

    acc = {}
    for string, coeff in ph.terms.items():
        x, z = _string_to_symplectic(string)
        for mask in plan.zmasks:
            if (x & mask).bit_count() & 1:
                raise SymmetryViolationError(
                    f"term {string} anticommutes with a tapering generator; "
                    "it breaks the declared symmetry")
        n_y = (x & z).bit_count()
        amp = coeff * (-1.0 if n_y & 2 else 1.0)  # letters -> X^x Z^z scale
        # i^{n_y} with n_y even is +-1; odd n_y cannot appear for real coeffs
        for mask, pivot in zip(plan.zmasks, plan.pivots):
            if (z >> pivot) & 1:
                x ^= 1 << pivot
                z ^= mask
        for pivot, sign in zip(plan.pivots, plan.sector_signs):
            if (x >> pivot) & 1:
                amp *= sign
                x ^= 1 << pivot
        nx = nz = 0
        for q in keep:
            if (x >> q) & 1:
                nx |= 1 << newpos[q]
            if (z >> q) & 1:
                nz |= 1 << newpos[q]
        n_y_new = (nx & nz).bit_count()
        if n_y_new & 1:
            raise ValueError("tapered term acquired odd Y count")
        amp *= -1.0 if n_y_new & 2 else 1.0  # X^x Z^z -> letters
        key = (nx, nz)
        acc[key] = acc.get(key, 0.0) + amp

    n_new = ph.n_qubits - plan.n_tapered
    terms = {
        _symplectic_to_string(x, z, n_new): c
        for (x, z), c in acc.items() if abs(c) > PAULI_CUTOFF
    }
    return PauliHamiltonian(n_qubits=n_new, terms=terms)


def sector_basis_states(plan: TaperingPlan) -> np.ndarray:
    """All computational states in the plan's joint symmetry sector."""
    states = np.arange(1 << plan.n_qubits, dtype=np.uint64)
    keep = np.ones(len(states), dtype=bool)
    for mask, sign in zip(plan.zmasks, plan.sector_signs):
        parity = np.bitwise_count(states & np.uint64(mask)) & np.uint64(1)
        keep &= (parity == 0) if sign == 1 else (parity == 1)
    return states[keep]


def pauli_matrix(ph: PauliHamiltonian, states=None) -> np.ndarray:
    """Dense matrix of a Pauli Hamiltonian over given basis states.

    states defaults to the full 2^n computational basis.  The result is
    checked to be real (real-coefficient Hermitian input).
    """
    if states is None:
        states = np.arange(1 << ph.n_qubits, dtype=np.uint64)
    states = np.asarray(states, dtype=np.uint64)
    index = {int(v): i for i, v in enumerate(states)}
    n = len(states)
    mat = np.zeros((n, n), dtype=complex)
    for string, coeff in ph.terms.items():
        x, z = _string_to_symplectic(string)
        amp = coeff * (1j) ** ((x & z).bit_count() % 4)
        targets = states ^ np.uint64(x)
        zsign = 1.0 - 2.0 * (np.bitwise_count(states & np.uint64(z))
                             & np.uint64(1)).astype(float)
        for col in range(n):
            row = index.get(int(targets[col]))
            if row is not None:
                mat[row, col] += amp * zsign[col]
    if np.abs(mat.imag).max() > 1e-10:
        raise ValueError("Pauli matrix has imaginary entries")
    return mat.real


# -- resource reporting ------------------------------------------------------

@dataclass
class ResourceRow:
    name: str
    n_orbitals: int
    n_qubits: int
    n_configurations: int


def resource_report(s: IntegralSet, rows) -> list:
    """(name, model, target) rows -> orbital/qubit/configuration counts.

    Orbitals counts exclude spatial orbitals fully frozen by per-spin
    singleton generators; qubit counts are 2M minus the number of
    independent Z2 parities (spin parities included); configuration
    counts are the target-sector dimensions.
    """
    from .symmetry import count_sector

    out = []
    for name, model, target in rows:
        singles = {g.orbitals[0] for g in model.generators if len(g.orbitals) == 1}
        frozen = sum(
            1 for p in range(s.n_spatial)
            if 2 * p in singles and 2 * p + 1 in singles
        )
        plan = plan_tapering(model, target, 2 * s.n_spatial)
        out.append(ResourceRow(
            name=name,
            n_orbitals=s.n_spatial - frozen,
            n_qubits=2 * s.n_spatial - plan.n_tapered,
            n_configurations=count_sector(model, target, s.n_spatial),
        ))
    return out
