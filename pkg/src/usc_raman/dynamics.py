"""Closed-system propagation of the bichromatically driven atom-cavity system.

States are integrated in the interaction picture of the undriven
Hamiltonian, expressed in its energy eigenbasis.  The transformation is
exact; populations of undriven eigenstates such as ``|b,2>`` are identical
in both pictures, and the state is mapped back to the lab frame on output.
Working in this frame removes the large bare energies from the generator,
so a fixed-step RK4 only has to resolve the drive-induced phases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, effective, hilbert
from .errors import NumericalError, ValidationError
from .hilbert import TruncatedSpace
from .rabi import DressedBasis, SystemParams, bare_hamiltonian, h0_dressed_basis, rabi_spectrum

NORM_TOL = 1e-6
COUPLING_FLOOR = 1e-12
# phase advance per step of the fastest coupled component
PHASE_PER_STEP = 0.25


def drive_amplitude(params: SystemParams, t: float) -> float:
    return params.Omega_p * math.cos(params.omega_p * t) + params.Omega_s * math.cos(params.omega_s * t)


def drive_operator(space: TruncatedSpace) -> np.ndarray:
    """``|b><g| + |g><b|``."""
    return hilbert.atomic_transition(space, "b", "g") + hilbert.atomic_transition(space, "g", "b")


def full_hamiltonian(params: SystemParams, space: TruncatedSpace, t: float) -> np.ndarray:
    """Lab-frame ``H0 + H_D(t)``."""
    return bare_hamiltonian(params, space) + drive_amplitude(params, t) * drive_operator(space)


class DressedFrame:
    """Interaction-picture generator in the undriven eigenbasis.

    In this frame ``H_I(t) = f(t) P(t) V P(t)^*`` with ``V`` the drive
    operator in the dressed basis, ``P(t) = diag(exp(i eps_j t))`` and
    ``f(t)`` the scalar drive amplitude.
    """

    def __init__(self, params: SystemParams, space: TruncatedSpace, basis: DressedBasis | None = None):
        self.params = params
        self.space = space
        self.basis = basis if basis is not None else h0_dressed_basis(params, space)
        self.energies = self.basis.energies
        self.U = self.basis.vectors
        v = self.U.T @ drive_operator(space).real @ self.U
        v[np.abs(v) < COUPLING_FLOOR] = 0.0
        self.V = v
        rows, cols = np.nonzero(v)
        self.csr = (
            np.concatenate([[0], np.cumsum(np.count_nonzero(v, axis=1))]).astype(np.int64),
            cols.astype(np.int64),
            np.ascontiguousarray(v[rows, cols], dtype=float),
        )

    def max_frequency(self) -> float:
        """Fastest phase rotation present in ``H_I(t)``."""
        rows, cols = np.nonzero(self.V)
        if rows.size == 0:
            return 0.0
        gap = float(np.max(np.abs(self.energies[rows] - self.energies[cols])))
        drive = max(abs(self.params.omega_p), abs(self.params.omega_s))
        return gap + drive

    def default_dt(self) -> float:
        w = self.max_frequency()
        return PHASE_PER_STEP / w if w > 0 else 1.0

    def phases(self, t: float) -> np.ndarray:
        return np.exp(1j * self.energies * t)

    def generator(self, t: float) -> np.ndarray:
        """``H_I(t)`` as a dense matrix."""
        p = self.phases(t)
        return drive_amplitude(self.params, t) * (p[:, None] * self.V * p.conj()[None, :])

    def to_frame(self, psi: np.ndarray, t: float = 0.0) -> np.ndarray:
        return self.phases(t) * (self.U.T @ psi)

    def from_frame(self, phi: np.ndarray, t: float) -> np.ndarray:
        return self.U @ (self.phases(t).conj() * phi)

    def operator_to_frame(self, rho: np.ndarray, t: float = 0.0) -> np.ndarray:
        p = self.phases(t)
        return p[:, None] * (self.U.T @ rho @ self.U) * p.conj()[None, :]

    def operator_from_frame(self, rho_i: np.ndarray, t: float) -> np.ndarray:
        p = self.phases(t).conj()
        return self.U @ (p[:, None] * rho_i * p.conj()[None, :]) @ self.U.T

    def dressed_schrodinger(self, rho_i: np.ndarray, t: float) -> np.ndarray:
        """Schrodinger-picture density matrix in the dressed basis."""
        p = self.phases(t).conj()
        return p[:, None] * rho_i * p.conj()[None, :]


def step_grid(t_final: float, dt_max: float, samples: int | None) -> tuple[int, int, float]:
    """``(n_steps, stride, dt)`` with ``dt <= dt_max`` and ``n_steps`` a multiple of ``stride``."""
    if t_final <= 0:
        raise ValidationError("t_final must be positive")
    if dt_max <= 0:
        raise ValidationError("dt_max must be positive")
    n = max(1, math.ceil(t_final / dt_max - 1e-9))
    stride = 1 if not samples else max(1, math.ceil(n / samples))
    n = stride * math.ceil(n / stride)
    return n, stride, t_final / n


@dataclass
class Trajectory:
    t: np.ndarray
    observables: dict = field(default_factory=dict)
    final_state: np.ndarray | None = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        if self.t.size > 1 and np.any(np.diff(self.t) <= 0):
            raise ValidationError("time grid must be strictly increasing")
        for name, series in self.observables.items():
            if len(series) != len(self.t):
                raise ValidationError(f"series {name!r} length differs from the time grid")

    def __getitem__(self, name):
        return self.observables[name]


def evolve(psi0: np.ndarray, params: SystemParams, space: TruncatedSpace, t_final: float,
           dt_max: float | None = None, samples: int | None = 2000,
           frame: DressedFrame | None = None) -> Trajectory:
    """Integrate the Schrodinger equation from ``psi0`` up to ``t_final``.

    Records ``P2 = |<b,2|psi>|^2``, ``P0``, ``PE0`` (population of
    ``|E_0>``) and ``norm``.  Raises ``NumericalError`` if the norm drifts by
    more than ``1e-6``.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (space.dim,):
        raise ValidationError(f"initial state must have shape ({space.dim},)")
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise ValidationError("initial state is not normalized")
    frame = frame or DressedFrame(params, space)
    n_steps, stride, dt = step_grid(t_final, dt_max or frame.default_dt(), samples)

    i_b0 = frame.basis.index(("b", 0))
    i_b2 = frame.basis.index(("b", 2))
    i_e0 = frame.basis.index(("E", 0))
    drive = (params.Omega_p, params.omega_p, params.Omega_s, params.omega_s)
    phi = np.ascontiguousarray(frame.to_frame(psi0, 0.0))
    n_rec = n_steps // stride + 1
    ts = np.empty(n_rec)
    rec = {k: np.empty(n_rec) for k in ("P2", "P0", "PE0", "norm")}

    def record(i, t, phi):
        pops = np.abs(phi) ** 2
        ts[i] = t
        rec["P2"][i] = pops[i_b2]
        rec["P0"][i] = pops[i_b0]
        rec["PE0"][i] = pops[i_e0]
        rec["norm"][i] = math.sqrt(pops.sum())

    record(0, 0.0, phi)
    for i in range(1, n_rec):
        _kernels.schrodinger_advance(phi, (i - 1) * stride * dt, dt, stride, frame.energies, *frame.csr, *drive)
        record(i, i * stride * dt, phi)
        if abs(rec["norm"][i] - 1) > NORM_TOL:
            raise NumericalError(f"norm drift {rec['norm'][i] - 1:.2e} at t={ts[i]:.4g}; reduce dt_max")
    return Trajectory(ts, rec, final_state=frame.from_frame(phi, n_steps * dt))


def p2_comparison(params: SystemParams, space: TruncatedSpace, mode: str, t_final: float | None = None,
                  dt_max: float | None = None, samples: int | None = 2000,
                  m_cutoff: int = effective.DEFAULT_M_CUTOFF) -> Trajectory:
    """Exact ``P2(t)`` next to the matching effective-model prediction.

    ``mode="resonant"`` pairs the exact curve with the Lambda-system formula,
    ``mode="off_resonant"`` with the two-level Raman formula.  The returned
    trajectory carries ``P2_exact``, ``P2_effective`` and ``norm``.
    """
    spectrum = rabi_spectrum(params, space)
    if mode == "resonant":
        sys = effective.lambda_system(params, spectrum)
        model = lambda t: effective.resonant_p2(t, sys)  # noqa: E731
        default_t = 1.5 * sys.transfer_time
    elif mode == "off_resonant":
        eff = effective.two_level_effective(params, spectrum, m_cutoff)
        if eff.g02 == 0:
            raise NumericalError("effective Raman coupling vanishes")
        model = lambda t: effective.two_level_p2(t, eff)  # noqa: E731
        default_t = 1.5 * np.pi / eff.rabi_frequency
    else:
        raise ValidationError(f"mode must be 'resonant' or 'off_resonant', got {mode!r}")
    psi0 = hilbert.basis_state(space, "b", 0)
    traj = evolve(psi0, params, space, t_final or default_t, dt_max=dt_max, samples=samples)
    return Trajectory(traj.t, {
        "P2_exact": traj["P2"],
        "P2_effective": model(traj.t),
        "norm": traj["norm"],
    }, final_state=traj.final_state)
