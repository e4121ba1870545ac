"""
Hermitian linear algebra: validation, spectral decomposition, eigenprojectors
and exact unitary propagators.

Units: hbar = 1, so a Hamiltonian with eigenvalues ``nu_j`` generates the
propagator ``U(tau) = sum_j exp(-1j * nu_j * tau) E_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import NotHermitian, NumericalFailure

__all__ = [
    "HERMITIAN_TOL",
    "SPECTRAL_GAP_TOL",
    "HermitianOperator",
    "SpectralData",
    "spectral_decompose",
    "projectors",
    "propagator",
    "reconstruct",
    "random_hermitian",
]

HERMITIAN_TOL = 1e-10
# relative to max |nu|
SPECTRAL_GAP_TOL = 1e-9


def _frozen(a):
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """
    A complex Hermitian matrix.

    Parameters
    ----------
    matrix : array_like
        Square complex matrix. Symmetry is checked against
        ``HERMITIAN_TOL * max(1, max|A_ij|)``.
    """

    matrix: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.matrix)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise NotHermitian(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NotHermitian("matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(a))))
        asym = float(np.max(np.abs(a - a.conj().T)))
        if asym > HERMITIAN_TOL * scale:
            raise NotHermitian(f"max |A - A^H| = {asym:.3e} exceeds tolerance")
        object.__setattr__(self, "matrix", _frozen(a))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def diagonal(cls, values) -> "HermitianOperator":
        return cls(np.diag(np.asarray(values, dtype=float)))

    def __eq__(self, other):
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        return self.matrix.shape == other.matrix.shape and bool(
            np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash(self.matrix.tobytes())


@dataclass(frozen=True, eq=False)
class SpectralData:
    """
    Eigen-decomposition of a Hermitian operator.

    Attributes
    ----------
    eigenvalues : ndarray, shape (n,)
        Ascending real eigenvalues.
    eigenbasis : ndarray, shape (n, n)
        Orthonormal eigenvectors as columns, phase-fixed.
    degeneracy_classes : tuple of tuple of int
        Partition of the 0-based column indices into groups of equal
        eigenvalue (within ``SPECTRAL_GAP_TOL`` relative to ``max|nu|``).
    """

    eigenvalues: np.ndarray
    eigenbasis: np.ndarray
    degeneracy_classes: Tuple[Tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def class_of(self, index: int) -> int:
        """Position of the degeneracy class containing 0-based ``index``."""
        for k, cls in enumerate(self.degeneracy_classes):
            if index in cls:
                return k
        raise IndexError(index)

    def degenerate(self, i: int, j: int) -> bool:
        """True when 0-based eigen-indices ``i`` and ``j`` share an eigenvalue."""
        return self.class_of(i) == self.class_of(j)

    def to_eigenbasis(self, vector) -> np.ndarray:
        """Components ``<j|psi>`` of a vector in the eigenbasis."""
        return self.eigenbasis.conj().T @ np.asarray(vector, dtype=complex)

    def from_eigenbasis(self, coeffs) -> np.ndarray:
        return self.eigenbasis @ np.asarray(coeffs, dtype=complex)


def _fix_phase(v):
    # first component of (numerically) largest modulus made real-positive
    mag = np.abs(v)
    k = int(np.argmax(mag >= mag.max() * (1.0 - 1e-8)))
    out = v * (np.conj(v[k]) / mag[k])
    out[k] = mag[k]
    return out


def _sort_key(v):
    # descending lexicographic order on (re, im) pairs; rounding keeps
    # last-bit noise from reordering ties
    return tuple(x for c in v for x in (-round(c.real, 12), -round(c.imag, 12)))


def _group(values, tol):
    classes = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] <= tol:
            classes[-1].append(i)
        else:
            classes.append([i])
    return classes


def spectral_decompose(A: HermitianOperator) -> SpectralData:
    """
    Deterministic spectral decomposition of ``A``.

    Eigenvalues ascend; inside a degeneracy class the eigenvectors are
    ordered lexicographically (descending) after phase fixing, so a diagonal
    matrix keeps its canonical basis order within each eigenspace.
    """
    if not isinstance(A, HermitianOperator):
        A = HermitianOperator(A)
    m = A.matrix
    herm = 0.5 * (m + m.conj().T)
    try:
        w, v = np.linalg.eigh(herm)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver did not converge: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise NumericalFailure("eigensolver returned non-finite values")

    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    vecs = [_fix_phase(v[:, k]) for k in range(len(w))]

    tol = SPECTRAL_GAP_TOL * max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    groups = _group(w, tol)
    perm: List[int] = []
    for g in groups:
        perm.extend(sorted(g, key=lambda k: _sort_key(vecs[k])))
    eigenvalues = w[perm].astype(float)
    eigenbasis = np.column_stack([vecs[k] for k in perm])
    eigenvalues.setflags(write=False)
    eigenbasis.setflags(write=False)
    # group membership does not change under the within-group permutation
    return SpectralData(eigenvalues, eigenbasis, tuple(tuple(g) for g in groups))


def projectors(S: SpectralData) -> List[HermitianOperator]:
    """Rank-one eigenprojectors ``E_j = |j><j|`` in eigenvalue order."""
    return [
        HermitianOperator(np.outer(S.eigenbasis[:, j], S.eigenbasis[:, j].conj()))
        for j in range(S.dim)
    ]


def reconstruct(S: SpectralData) -> np.ndarray:
    """``sum_j nu_j E_j`` as a dense matrix."""
    V = S.eigenbasis
    return (V * S.eigenvalues) @ V.conj().T


def propagator(S: SpectralData, tau: float) -> np.ndarray:
    """
    Exact propagator ``U(tau) = sum_j exp(-i nu_j tau) E_j``.

    Parameters
    ----------
    S : SpectralData
    tau : float
        Evolution time (finite).

    Returns
    -------
    ndarray, shape (n, n)
        Unitary matrix.
    """
    tau = float(tau)
    if not np.isfinite(tau):
        raise ValueError("tau must be finite")
    V = S.eigenbasis
    return (V * np.exp(-1j * S.eigenvalues * tau)) @ V.conj().T


def random_hermitian(rng: np.random.Generator, n: int, distinct: bool = True,
                     scale: float = 1.0, min_gap: float = 1e-3) -> HermitianOperator:
    """
    Random Hermitian matrix, GUE-like. With ``distinct`` the draw is repeated
    until consecutive eigenvalues differ by at least ``min_gap * scale``.
    """
    while True:
        z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = scale * 0.5 * (z + z.conj().T) / np.sqrt(2.0)
        if not distinct or n < 2:
            return HermitianOperator(h)
        if np.min(np.diff(np.linalg.eigvalsh(h))) >= min_gap * scale:
            return HermitianOperator(h)
