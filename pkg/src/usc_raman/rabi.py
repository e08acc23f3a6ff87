"""Quantum Rabi spectrum and the dressed eigenbasis of the undriven system."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import hilbert
from .errors import ValidationError
from .hilbert import TruncatedSpace

DEFAULT_N_MAX = 20


@dataclass(frozen=True)
class SystemParams:
    """Model frequencies and couplings, all in units of the cavity frequency.

    Defaults are the level scheme used throughout: ``omega_b = -5``,
    ``omega_e = 1``, ``omega_g = 0`` with the drives switched off.
    """

    omega_c: float = 1.0
    omega_b: float = -5.0
    omega_e: float = 1.0
    omega_g: float = 0.0
    lam: float = 0.5
    omega_p: float = 0.0
    omega_s: float = 0.0
    Omega_p: float = 0.0
    Omega_s: float = 0.0

    def __post_init__(self):
        for name in ("omega_c", "omega_b", "omega_e", "omega_g", "lam",
                     "omega_p", "omega_s", "Omega_p", "Omega_s"):
            if not np.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.omega_c <= 0:
            raise ValidationError("omega_c must be positive")
        for name in ("lam", "Omega_p", "Omega_s"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    @property
    def eta(self) -> float:
        """Stokes-to-pump strength ratio."""
        if self.Omega_p == 0:
            return float("inf") if self.Omega_s > 0 else 0.0
        return self.Omega_s / self.Omega_p


@dataclass(frozen=True)
class RabiSpectrum:
    """Eigen-decomposition of the g/e sector of the Rabi Hamiltonian.

    ``c[m, n] = <E_m|g,n>`` and ``d[m, n] = <E_m|e,n>``; rows follow
    ascending ``energies``.
    """

    energies: np.ndarray
    c: np.ndarray
    d: np.ndarray
    parity: np.ndarray = field(repr=False)

    @property
    def n_states(self) -> int:
        return len(self.energies)

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    @property
    def eta_c(self) -> float:
        """Optimal Stokes ratio ``|c00| / |c02|``."""
        c02 = abs(self.c[0, 2])
        if c02 == 0:
            return float("inf")
        return abs(self.c[0, 0]) / c02

    def sector_vectors(self) -> np.ndarray:
        """Eigenvectors as columns in the (g-block, e-block) sector basis."""
        return np.hstack([self.c, self.d]).T


@dataclass(frozen=True)
class DressedBasis:
    """Energy-sorted eigenstates of the undriven Hamiltonian.

    ``tags[j]`` is ``("b", n)`` for a bare ``|b,n>`` state or ``("E", m)``
    for the Rabi eigenstate ``|E_m>``.  ``vectors`` holds the states as
    columns in the product basis.
    """

    energies: np.ndarray
    vectors: np.ndarray
    tags: tuple

    def __len__(self):
        return len(self.energies)

    def index(self, tag: tuple) -> int:
        try:
            return self.tags.index(tuple(tag))
        except ValueError:
            raise ValidationError(f"no dressed state tagged {tag!r}") from None


def rabi_hamiltonian(params: SystemParams, space: TruncatedSpace) -> np.ndarray:
    """Rabi Hamiltonian on the full space; the b block carries only the free cavity term."""
    a = hilbert.annihilation(space)
    x = a + a.conj().T
    ee = hilbert.atomic_transition(space, "e", "e")
    gg = hilbert.atomic_transition(space, "g", "g")
    coupling = hilbert.atomic_transition(space, "e", "g") + hilbert.atomic_transition(space, "g", "e")
    return (params.omega_e * ee + params.omega_g * gg
            + params.omega_c * hilbert.number(space)
            + params.lam * x @ coupling)


def bare_hamiltonian(params: SystemParams, space: TruncatedSpace) -> np.ndarray:
    """Undriven Hamiltonian ``H0 = H_R + omega_b |b><b|``."""
    return rabi_hamiltonian(params, space) + params.omega_b * hilbert.atomic_transition(space, "b", "b")


def _sector_hamiltonian(params: SystemParams, n_fock: int) -> np.ndarray:
    n = np.arange(n_fock)
    x = np.diag(np.sqrt(n[1:]), 1)
    x = x + x.T
    free = params.omega_c * np.diag(n.astype(float))
    eye = np.eye(n_fock)
    return np.block([
        [params.omega_g * eye + free, params.lam * x],
        [params.lam * x, params.omega_e * eye + free],
    ])


def _fix_sign(vec: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    nz = np.flatnonzero(np.abs(vec) > tol)
    if nz.size and vec[nz[0]] < 0:
        return -vec
    return vec


def rabi_spectrum(params: SystemParams, space: TruncatedSpace) -> RabiSpectrum:
    """Diagonalize the g/e sector, one parity block at a time.

    Parity ``(-1)^n`` for ``|g,n>`` and ``-(-1)^n`` for ``|e,n>`` is
    conserved, so each eigenvector has exact zeros on the opposite parity.
    """
    nf = space.n_fock
    h = _sector_hamiltonian(params, nf)
    n = np.arange(nf)
    parity_of = np.concatenate([(-1) ** n, -((-1) ** n)])
    energies, vectors, parities = [], [], []
    for p in (1, -1):
        idx = np.flatnonzero(parity_of == p)
        eig = hilbert.hermitian_eigen(h[np.ix_(idx, idx)])
        block = np.zeros((2 * nf, len(idx)))
        block[idx, :] = eig.vectors.real
        energies.append(eig.values)
        vectors.append(block)
        parities.append(np.full(len(idx), p))
    energies = np.concatenate(energies)
    vectors = np.hstack(vectors)
    parities = np.concatenate(parities)
    order = np.argsort(energies, kind="stable")
    energies, vectors, parities = energies[order], vectors[:, order], parities[order]
    vectors = np.column_stack([_fix_sign(v) for v in vectors.T])
    return RabiSpectrum(energies=energies, c=vectors[:nf].T.copy(), d=vectors[nf:].T.copy(), parity=parities)


def h0_dressed_basis(params: SystemParams, space: TruncatedSpace,
                     spectrum: RabiSpectrum | None = None) -> DressedBasis:
    """Union of the bare b-ladder and the Rabi eigenstates, sorted by energy.

    Ties keep b-ladder states first.
    """
    if spectrum is None:
        spectrum = rabi_spectrum(params, space)
    nf, dim = space.n_fock, space.dim
    b_energies = params.omega_b + params.omega_c * np.arange(nf)
    vectors = np.zeros((dim, dim))
    vectors[:nf, :nf] = np.eye(nf)
    vectors[nf:, nf:] = spectrum.sector_vectors()
    energies = np.concatenate([b_energies, spectrum.energies])
    tags = [("b", n) for n in range(nf)] + [("E", m) for m in range(spectrum.n_states)]
    order = np.argsort(energies, kind="stable")
    return DressedBasis(energies=energies[order], vectors=vectors[:, order],
                        tags=tuple(tags[i] for i in order))


def ground_state_amplitudes(params: SystemParams, space: TruncatedSpace) -> tuple[float, float, float]:
    """``(|c00|, |c02|, |c04|)`` of the Rabi ground state."""
    c = rabi_spectrum(params, space).c
    return abs(c[0, 0]), abs(c[0, 2]), abs(c[0, 4]) if space.n_max >= 4 else 0.0


def coefficient_sweep(lambdas: Sequence[float], space: TruncatedSpace,
                      params: SystemParams | None = None, workers: int = 1) -> np.ndarray:
    """Rows ``(lambda, |c00|, |c02|, |c04|)`` in input order."""
    base = params or SystemParams()

    def point(lam):
        return (float(lam), *ground_state_amplitudes(base.with_(lam=float(lam)), space))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(point, lambdas))
    else:
        rows = [point(lam) for lam in lambdas]
    return np.array(rows, dtype=float).reshape(-1, 4)


def truncation_drift(quantity: Callable[[TruncatedSpace], float | np.ndarray],
                     n_max: int = DEFAULT_N_MAX) -> tuple:
    """Evaluate ``quantity`` at ``n_max`` and ``2 n_max``.

    Returns ``(q_n, q_2n, relative_drift)`` with the drift measured as
    ``max|q_n - q_2n| / max|q_2n|``.
    """
    q1 = np.asarray(quantity(hilbert.build_space(n_max)))
    q2 = np.asarray(quantity(hilbert.build_space(2 * n_max)))
    scale = float(np.max(np.abs(q2))) or 1.0
    return q1, q2, float(np.max(np.abs(q1 - q2)) / scale)
