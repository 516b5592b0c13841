"""Gaussian basis-set data (STO-3G, 6-31G) for H, N, O and shell setup.

Only s and p shells appear in these sets, which covers every fixture
molecule.  Coefficients are the standard published contraction values;
primitive and contracted normalization are applied at build time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ANGSTROM_TO_BOHR = 1.0 / 0.529177210903

# element -> list of (l, exponents, contraction coefficients)
BASIS_DATA = {
    "sto-3g": {
        "H": [
            (0, [3.425250914, 0.6239137298, 0.1688554040],
                [0.1543289673, 0.5353281423, 0.4446345422]),
        ],
        "N": [
            (0, [99.10616896, 18.05231239, 4.885660238],
                [0.1543289673, 0.5353281423, 0.4446345422]),
            (0, [3.780455879, 0.8784966449, 0.2857143744],
                [-0.09996722919, 0.3995128261, 0.7001154689]),
            (1, [3.780455879, 0.8784966449, 0.2857143744],
                [0.1559162750, 0.6076837186, 0.3919573931]),
        ],
        "O": [
            (0, [130.7093214, 23.80886605, 6.443608313],
                [0.1543289673, 0.5353281423, 0.4446345422]),
            (0, [5.033151319, 1.169596125, 0.3803889600],
                [-0.09996722919, 0.3995128261, 0.7001154689]),
            (1, [5.033151319, 1.169596125, 0.3803889600],
                [0.1559162750, 0.6076837186, 0.3919573931]),
        ],
    },
    "6-31g": {
        "N": [
            (0, [4173.51146, 627.457911, 142.902093, 40.2343293,
                 12.8202129, 4.39043701],
                [0.00183477216, 0.0139946271, 0.0685866222, 0.232240873,
                 0.469069948, 0.360455199]),
            (0, [11.6263619, 2.71627981, 0.772218397],
                [-0.114961182, -0.169117478, 1.14585195]),
            (1, [11.6263619, 2.71627981, 0.772218397],
                [0.0675797234, 0.323907229, 0.740895141]),
            (0, [0.212031498], [1.0]),
            (1, [0.212031498], [1.0]),
        ],
    },
}

ATOMIC_NUMBER = {"H": 1, "N": 7, "O": 8}

DOUBLE_FACTORIAL = {-1: 1, 0: 1, 1: 1, 2: 2, 3: 3, 4: 8, 5: 15}


@dataclass
class Shell:
    """One contracted shell: angular momentum l, center, primitives."""

    l: int
    center: np.ndarray
    exps: np.ndarray
    coefs: np.ndarray  # includes primitive norms and contraction scaling

    @property
    def n_components(self):
        return 1 if self.l == 0 else 3


# cartesian powers of each AO component, x/y/z order for p shells
COMPONENTS = {0: [(0, 0, 0)], 1: [(1, 0, 0), (0, 1, 0), (0, 0, 1)]}


def _primitive_norm(alpha, lmn):
    l, m, n = lmn
    total = l + m + n
    num = (2.0 * alpha / np.pi) ** 0.75 * (4.0 * alpha) ** (total / 2.0)
    den = np.sqrt(DOUBLE_FACTORIAL[2 * l - 1] * DOUBLE_FACTORIAL[2 * m - 1]
                  * DOUBLE_FACTORIAL[2 * n - 1])
    return num / den


def build_shells(atoms, basis_name):
    """atoms: list of (element, xyz in bohr).  Returns list of Shell."""
    table = BASIS_DATA[basis_name.lower()]
    shells = []
    for element, xyz in atoms:
        for l, exps, coefs in table[element]:
            exps = np.asarray(exps, dtype=float)
            coefs = np.asarray(coefs, dtype=float)
            lmn = COMPONENTS[l][0]
            scaled = coefs * np.array([_primitive_norm(a, lmn) for a in exps])
            shell = Shell(l=l, center=np.asarray(xyz, dtype=float),
                          exps=exps, coefs=scaled)
            _normalize_contracted(shell)
            shells.append(shell)
    return shells


def _normalize_contracted(shell):
    """Scale coefficients so the contracted AO has unit self-overlap."""
    from .gaussians import shell_pair_overlap

    block = shell_pair_overlap(shell, shell)
    shell.coefs = shell.coefs / np.sqrt(block[0, 0])


def n_aos(shells):
    return sum(sh.n_components for sh in shells)


def ao_descriptor(shells):
    """List of (shell index, component lmn) per AO, in basis order."""
    out = []
    for si, sh in enumerate(shells):
        for comp in COMPONENTS[sh.l]:
            out.append((si, comp))
    return out
