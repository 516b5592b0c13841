"""Lowest eigenpairs (Davidson) and full spectra (dense) of sector matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

DENSE_FALLBACK = 32
DENSE_LIMIT = 4096
DAVIDSON_TOL = 1e-9
MAX_SUBSPACE = 40
RESTART_SIZE = 8
PRECOND_FLOOR = 1e-6


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CapacityError(RuntimeError):
    """Dense solve requested beyond the configured dimension limit."""


@dataclass
class EigenPair:
    value: float
    vector: np.ndarray


def _fix_sign(vec):
    """Make the largest-magnitude coefficient positive (first index on ties)."""
    i = int(np.argmax(np.abs(vec)))
    if vec[i] < 0:
        return -vec
    return vec


def _as_operator(m):
    """Accept SectorMatrix, scipy sparse, or ndarray."""
    if hasattr(m, "entries"):
        m = m.entries
    return m


def lowest_eigenpairs(m, k, tol=DAVIDSON_TOL, dense_threshold=DENSE_FALLBACK,
                      max_subspace=MAX_SUBSPACE, max_iter=200):
    """k lowest eigenpairs, ascending, each with residual below tol.

    Small problems (dim <= dense_threshold) are solved densely; larger
    ones by Davidson iteration with a diagonal preconditioner.  Raises
    ConvergenceError (carrying the worst residual) if the subspace
    iteration stalls.
    """
    a = _as_operator(m)
    n = a.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds dimension {n}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if n <= dense_threshold:
        dense = a if isinstance(a, np.ndarray) else a.toarray()
        w, v = scipy.linalg.eigh(dense)
        return [EigenPair(float(w[i]), _fix_sign(v[:, i])) for i in range(k)]
    return _davidson(a, k, tol, max_subspace, max_iter)


def _davidson(a, k, tol, max_subspace, max_iter):
    """Block Davidson with root buffering.

    A couple of roots beyond the requested k are tracked and expanded;
    single-root expansion is prone to locking onto an excited state of
    strongly multi-reference sectors while the ground root stagnates.
    """
    n = a.shape[0]
    diag = a.diagonal() if not isinstance(a, np.ndarray) else np.diag(a).copy()
    k_track = min(n, k + 2)
    nguess = min(n, max(2 * k_track, 4))
    guess_idx = np.argsort(diag, kind="stable")[:nguess]
    v = np.zeros((n, nguess))
    v[guess_idx, np.arange(nguess)] = 1.0

    basis = v
    last_resid = None
    for _ in range(max_iter):
        basis, _ = np.linalg.qr(basis)
        sigma = a @ basis
        small = basis.T @ sigma
        small = 0.5 * (small + small.T)
        w, y = scipy.linalg.eigh(small)
        m_track = min(k_track, basis.shape[1])
        ritz_vals = w[:m_track]
        ritz_vecs = basis @ y[:, :m_track]
        ritz_sigs = sigma @ y[:, :m_track]
        residuals = ritz_sigs - ritz_vecs * ritz_vals
        norms = np.linalg.norm(residuals, axis=0)
        last_resid = float(norms[:k].max())
        if last_resid < tol:
            return [
                EigenPair(float(ritz_vals[i]), _fix_sign(ritz_vecs[:, i]))
                for i in range(k)
            ]
        new_dirs = []
        for i in range(m_track):
            if norms[i] < tol:
                continue
            denom = ritz_vals[i] - diag
            denom = np.where(np.abs(denom) < PRECOND_FLOOR,
                             np.copysign(PRECOND_FLOOR, denom + (denom == 0)),
                             denom)
            new_dirs.append(residuals[:, i] / denom)
        if basis.shape[1] + len(new_dirs) > max_subspace:
            keep = min(basis.shape[1], max(RESTART_SIZE, k_track))
            basis = basis @ y[:, :keep]
        if new_dirs:
            basis = np.column_stack([basis] + new_dirs)
    raise ConvergenceError(
        f"Davidson failed to reach {tol:g} in {max_iter} iterations",
        residual=last_resid,
    )


def full_spectrum(m, dense_limit=DENSE_LIMIT):
    """Complete orthonormal eigenbasis, values ascending.

    Meant for perturber sectors whose every excited state is needed; a
    dimension above dense_limit raises CapacityError (use the contracted
    or mean-field second-order paths for such sectors).
    """
    a = _as_operator(m)
    n = a.shape[0]
    if n > dense_limit:
        raise CapacityError(
            f"dimension {n} exceeds dense limit {dense_limit}; use the "
            "contracted (SC) or mean-field (EN) correction instead")
    if n == 0:
        return []
    dense = a if isinstance(a, np.ndarray) else a.toarray()
    w, v = scipy.linalg.eigh(dense)
    return [EigenPair(float(w[i]), _fix_sign(v[:, i])) for i in range(n)]
