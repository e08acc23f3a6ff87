"""Truncated Hilbert space of a three-level atom times one cavity mode.

Basis ordering is atom-major: all Fock states of ``b`` first, then ``g``,
then ``e``.  The composite index of ``|i, n>`` is
``atom_index(i) * (n_max + 1) + n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

LEVELS = ("b", "g", "e")
HERMITIAN_RTOL = 1e-10


def atom_index(level: str) -> int:
    try:
        return LEVELS.index(level)
    except ValueError:
        raise ValidationError(f"unknown atomic level {level!r}; expected one of {LEVELS}") from None


@dataclass(frozen=True)
class TruncatedSpace:
    """Fock cutoff and composite indexing for ``{b, g, e} x Fock``."""

    n_max: int
    atom_dim: int = 3

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 2:
            raise ValidationError(f"n_max must be an integer >= 2 (|b,2> must exist), got {self.n_max}")
        if self.atom_dim != 3:
            raise ValidationError("only three atomic levels are supported")

    @property
    def n_fock(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return self.atom_dim * self.n_fock

    def index(self, level: str, n: int) -> int:
        if not 0 <= n <= self.n_max:
            raise ValidationError(f"Fock number {n} outside [0, {self.n_max}]")
        return atom_index(level) * self.n_fock + n

    def label(self, index: int) -> tuple[str, int]:
        if not 0 <= index < self.dim:
            raise ValidationError(f"index {index} outside [0, {self.dim})")
        a, n = divmod(index, self.n_fock)
        return LEVELS[a], n

    def block(self, level: str) -> slice:
        start = atom_index(level) * self.n_fock
        return slice(start, start + self.n_fock)


def build_space(n_max: int) -> TruncatedSpace:
    return TruncatedSpace(n_max)


def basis_state(space: TruncatedSpace, level: str, n: int) -> np.ndarray:
    psi = np.zeros(space.dim, dtype=complex)
    psi[space.index(level, n)] = 1.0
    return psi


def projector(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def annihilation(space: TruncatedSpace) -> np.ndarray:
    """Cavity ``a`` acting as identity on the atomic factor."""
    a_fock = np.diag(np.sqrt(np.arange(1, space.n_fock)), k=1)
    return np.kron(np.eye(space.atom_dim), a_fock).astype(complex)


def number(space: TruncatedSpace) -> np.ndarray:
    return np.kron(np.eye(space.atom_dim), np.diag(np.arange(space.n_fock))).astype(complex)


def atomic_transition(space: TruncatedSpace, i: str, j: str) -> np.ndarray:
    """``|i><j|`` tensored with the Fock identity."""
    sigma = np.zeros((space.atom_dim, space.atom_dim))
    sigma[atom_index(i), atom_index(j)] = 1.0
    return np.kron(sigma, np.eye(space.n_fock)).astype(complex)


def is_hermitian(h: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    return bool(np.max(np.abs(h - h.conj().T), initial=0.0) <= rtol * scale)


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray


def hermitian_eigen(h: np.ndarray) -> EigenDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors (as columns)."""
    h = np.asarray(h)
    if not is_hermitian(h):
        raise ValidationError("matrix is not Hermitian within tolerance")
    values, vectors = np.linalg.eigh(0.5 * (h + h.conj().T))
    return EigenDecomposition(values, vectors)
