"""Zero-temperature master equation with dressed-state jump operators.

Dissipation is written in the eigenbasis ``{|eps_j>}`` of the undriven
Hamiltonian: every downward pair ``eps_j < eps_k`` gets a dissipator
``D[|eps_j><eps_k|]`` with rate ``sum_nu gamma_nu |C^(nu)_jk|^2``, where
``C^(nu)`` are matrix elements of the three system-bath coupling operators
(``e<->g`` dipole, ``g<->b`` dipole, cavity quadrature).  Output photon
statistics use the energy-lowering quadrature ``X^-`` in place of ``a``.

The module also carries the closed-form steady states of the two reduced
models (resonant Lambda system and far-detuned two-level system) and a
null-space solver for the same reduced Liouvillians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from . import _kernels, effective, hilbert
from .dynamics import DressedFrame, step_grid
from .errors import NumericalError, ValidationError
from .hilbert import TruncatedSpace
from .rabi import DressedBasis, SystemParams, h0_dressed_basis, rabi_spectrum

DEGENERACY_TOL = 1e-9
DEFAULT_N_MAX = 10
TRACE_TOL = 1e-6
POSITIVITY_FLOOR = -1e-5


@dataclass(frozen=True)
class DampingRates:
    """Bath rates: ``gamma1`` (e<->g), ``gamma2`` (g<->b), ``gamma3`` (cavity)."""

    gamma1: float = 0.0
    gamma2: float = 0.0
    gamma3: float = 0.0

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "gamma3"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValidationError(f"{name} must be a finite non-negative rate, got {value}")

    @classmethod
    def uniform(cls, gamma: float) -> "DampingRates":
        return cls(gamma, gamma, gamma)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.gamma1, self.gamma2, self.gamma3)


def coupling_operators(space: TruncatedSpace) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """System operators coupled to baths 1, 2, 3 (product basis)."""
    a = hilbert.annihilation(space)
    eg = hilbert.atomic_transition(space, "e", "g")
    gb = hilbert.atomic_transition(space, "g", "b")
    return eg + eg.conj().T, gb + gb.conj().T, a + a.conj().T


def downward_mask(energies: np.ndarray, tol: float = DEGENERACY_TOL) -> np.ndarray:
    """``mask[j, k]`` is true when ``eps_k - eps_j > tol``."""
    return (energies[None, :] - energies[:, None]) > tol


@dataclass(frozen=True)
class JumpSet:
    """Dressed-basis jumps.

    ``transition[nu - 1][j, k] = C^(nu)_jk`` and ``rates[k, j]`` is the total
    rate of the jump ``|eps_k> -> |eps_j>``; ``partial[nu - 1]`` holds the
    per-bath contributions with the same indexing.
    """

    basis: DressedBasis
    transition: tuple
    partial: tuple
    rates: np.ndarray
    tol: float = DEGENERACY_TOL

    def rate(self, upper: tuple, lower: tuple, bath: int | None = None) -> float:
        k, j = self.basis.index(upper), self.basis.index(lower)
        table = self.rates if bath is None else self.partial[bath - 1]
        return float(table[k, j])

    def channels(self) -> list[tuple[float, int, int]]:
        """``(rate, j, k)`` for every nonzero jump ``|eps_j><eps_k|``."""
        ks, js = np.nonzero(self.rates)
        return [(float(self.rates[k, j]), int(j), int(k)) for k, j in zip(ks, js)]

    def operators(self) -> list[tuple[float, np.ndarray]]:
        """``(rate, |eps_j><eps_k|)`` in the product basis."""
        U = self.basis.vectors
        return [(r, np.outer(U[:, j], U[:, k]).astype(complex)) for r, j, k in self.channels()]

    def gain_decay(self) -> tuple[np.ndarray, np.ndarray]:
        """Population feeding matrix and coherence damping matrix of the dissipator."""
        gain = np.ascontiguousarray(self.rates.T)
        out = self.rates.sum(axis=1)
        return gain, 0.5 * (out[:, None] + out[None, :])


def build_jumps(params: SystemParams, space: TruncatedSpace, rates: DampingRates,
                basis: DressedBasis | None = None, tol: float = DEGENERACY_TOL) -> JumpSet:
    basis = basis if basis is not None else h0_dressed_basis(params, space)
    U = basis.vectors
    mask = downward_mask(basis.energies, tol)
    transition, partial = [], []
    for gamma, op in zip(rates.as_tuple(), coupling_operators(space)):
        c = U.T @ op.real @ U
        c[np.abs(c) < 1e-14] = 0.0
        transition.append(c)
        partial.append(np.where(mask, gamma * np.abs(c) ** 2, 0.0).T)
    total = sum(partial)
    return JumpSet(basis=basis, transition=tuple(transition), partial=tuple(partial), rates=total, tol=tol)


@dataclass(frozen=True)
class XOperators:
    """Energy-lowering cavity quadrature and its adjoint (product basis)."""

    minus: np.ndarray
    plus: np.ndarray
    minus_dressed: np.ndarray = field(repr=False)


def x_operators(jumps: JumpSet) -> XOperators:
    basis = jumps.basis
    xd = np.where(downward_mask(basis.energies, jumps.tol), jumps.transition[2], 0.0)
    U = basis.vectors
    minus = (U @ xd @ U.T).astype(complex)
    return XOperators(minus=minus, plus=minus.conj().T, minus_dressed=xd)


def photon_flux(rho: np.ndarray, x: XOperators, rates: DampingRates) -> float:
    """Output photon rate ``gamma3 <X+ X->``."""
    return float(rates.gamma3 * np.real(np.trace(x.plus @ x.minus @ rho)))


def g2_equal_time(rho: np.ndarray, x: XOperators) -> float:
    """Equal-time second-order coherence with ``X^-`` in place of ``a``."""
    n1 = np.real(np.trace(x.plus @ x.minus @ rho))
    if n1 <= 0:
        raise NumericalError("<X+X-> vanishes; G2 is undefined")
    n2 = np.real(np.trace(x.plus @ x.plus @ x.minus @ x.minus @ rho))
    return float(n2 / n1**2)


def check_density(rho: np.ndarray, trace_tol: float = 1e-8, herm_tol: float = 1e-10,
                  eig_floor: float = -1e-8) -> None:
    rho = np.asarray(rho)
    if abs(np.trace(rho) - 1) > trace_tol:
        raise ValidationError(f"trace {np.trace(rho).real:.12g} differs from 1")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise ValidationError("density matrix is not Hermitian")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < eig_floor:
        raise ValidationError("density matrix has a negative eigenvalue")


class _MasterPropagator:
    """RK4 stepping of the master equation in the dressed interaction picture.

    Each jump operator ``|eps_j><eps_k|`` only acquires a phase in this
    frame, so the dissipator is time independent there.
    """

    def __init__(self, params, space, rates, dt_max=None, jumps=None):
        self.params, self.space, self.rates = params, space, rates
        basis = jumps.basis if jumps is not None else None
        self.frame = DressedFrame(params, space, basis)
        self.jumps = jumps if jumps is not None else build_jumps(params, space, rates, self.frame.basis)
        self.x = x_operators(self.jumps)
        xd = self.x.minus_dressed
        self.n1 = xd.T @ xd
        self.n2 = (xd.T @ xd.T) @ (xd @ xd)
        self.gain, self.decay = self.jumps.gain_decay()
        self.dt_max = dt_max or self.frame.default_dt()
        self.drive = (params.Omega_p, params.omega_p, params.Omega_s, params.omega_s)

    def to_frame(self, rho0):
        rho0 = np.asarray(rho0, dtype=complex)
        if rho0.shape != (self.space.dim, self.space.dim):
            raise ValidationError(f"density matrix must be {self.space.dim}x{self.space.dim}")
        check_density(rho0)
        return np.ascontiguousarray(self.frame.operator_to_frame(rho0, 0.0))

    def advance(self, rho_i, t0, dt, n_steps, avg=None):
        if avg is None:
            avg = np.zeros_like(rho_i)
        _kernels.master_advance(rho_i, t0, dt, n_steps, self.frame.energies, *self.frame.csr,
                                *self.drive, self.gain, self.decay, avg)
        return avg

    def flux(self, rho_d):
        """``gamma3 <X+X->`` for a Schrodinger-picture state in the dressed basis."""
        return float(self.rates.gamma3 * np.real(np.sum(self.n1 * rho_d.T)))

    def g2(self, rho_d):
        n1 = np.real(np.sum(self.n1 * rho_d.T))
        if n1 <= 0:
            return float("nan")
        return float(np.real(np.sum(self.n2 * rho_d.T)) / n1**2)

    def to_product(self, rho_d):
        U = self.frame.U
        return U @ rho_d @ U.T


@dataclass
class MasterTrajectory:
    t: np.ndarray
    observables: dict
    states: list | None = None
    final_state: np.ndarray | None = None

    def __getitem__(self, name):
        return self.observables[name]


def master_evolve(rho0: np.ndarray, params: SystemParams, space: TruncatedSpace, rates: DampingRates,
                  t_final: float, dt_max: float | None = None, samples: int | None = 2000,
                  store_states: bool = False, jumps: JumpSet | None = None) -> MasterTrajectory:
    """Integrate the master equation from ``rho0`` (product basis).

    Records ``phi_out``, ``trace`` and ``min_eig`` at each sample; with
    ``store_states`` the sampled density matrices (product basis) are kept.
    """
    prop = _MasterPropagator(params, space, rates, dt_max, jumps)
    rho = prop.to_frame(rho0)
    n_steps, stride, dt = step_grid(t_final, prop.dt_max, samples)
    n_rec = n_steps // stride + 1
    ts = np.arange(n_rec) * stride * dt
    obs = {k: np.empty(n_rec) for k in ("phi_out", "trace", "min_eig")}
    states = [] if store_states else None
    scratch = np.zeros_like(rho)

    def record(i, t):
        rho_d = prop.frame.dressed_schrodinger(rho, t)
        obs["phi_out"][i] = prop.flux(rho_d)
        obs["trace"][i] = np.real(np.trace(rho_d))
        obs["min_eig"][i] = np.linalg.eigvalsh(rho_d)[0]
        if abs(obs["trace"][i] - 1) > TRACE_TOL:
            raise NumericalError(f"trace drift {obs['trace'][i] - 1:.2e} at t={t:.4g}")
        if obs["min_eig"][i] < POSITIVITY_FLOOR:
            raise NumericalError(f"negative eigenvalue {obs['min_eig'][i]:.2e} at t={t:.4g}")
        if states is not None:
            states.append(prop.to_product(rho_d))

    record(0, 0.0)
    for i in range(1, n_rec):
        prop.advance(rho, ts[i - 1], dt, stride, scratch)
        record(i, ts[i])
    final = prop.to_product(prop.frame.dressed_schrodinger(rho, ts[-1]))
    return MasterTrajectory(ts, obs, states, final)


@dataclass
class SteadyState:
    rho: np.ndarray
    phi_out: float
    g2: float
    t_end: float
    window: float
    window_flux: np.ndarray
    converged: bool


def steady_state_numeric(params: SystemParams, space: TruncatedSpace, rates: DampingRates,
                         window: float | None = None, rtol: float = 5e-3, t_max: float = 1e5,
                         block: int = 8, dt_max: float | None = None, jumps: JumpSet | None = None,
                         rho0: np.ndarray | None = None, raise_on_failure: bool = True) -> SteadyState:
    """Window-averaged long-time state of the driven, damped system.

    The lab-frame generator has two incommensurate drive frequencies and no
    strict fixed point, so the state is averaged over consecutive windows
    (default ``20 * 2 pi / omega_p``).  Relaxation can be hundreds of windows
    long, so a small change between two windows alone does not mean the
    transient is over.  Windows are therefore grouped in blocks of
    ``block``; integration stops when consecutive windows differ by less
    than ``rtol`` and the drift between block means, extrapolated as a
    geometric tail, is below ``rtol`` too.  The returned observables are
    averages over the last block.
    """
    if params.omega_p <= 0:
        raise ValidationError("steady state requires a pump frequency omega_p > 0")
    if params.Omega_p == 0 and params.Omega_s == 0:
        raise ValidationError("steady state requires at least one drive")
    period = 2 * np.pi / params.omega_p
    window = window or 20 * period
    if window < 10 * period:
        raise ValidationError("window must span at least 10 pump periods")
    prop = _MasterPropagator(params, space, rates, dt_max, jumps)
    if rho0 is None:
        rho0 = hilbert.projector(hilbert.basis_state(space, "b", 0))
    rho = prop.to_frame(rho0)
    n_win = max(1, math.ceil(window / prop.dt_max))
    dt = window / n_win

    fluxes, block_avgs, t = [], [], 0.0
    avg = np.zeros_like(rho)
    acc = np.zeros_like(rho)
    converged = False
    while t < t_max:
        avg[:] = 0
        prop.advance(rho, t, dt, n_win, avg)
        t += window
        avg /= n_win
        fluxes.append(prop.flux(avg))
        acc += avg
        if len(fluxes) % block:
            continue
        block_avgs.append(acc / block)
        acc = np.zeros_like(rho)
        if _settled(fluxes, [prop.flux(b) for b in block_avgs], rtol):
            converged = True
            break
    if not converged and raise_on_failure:
        raise NumericalError(f"windowed flux did not settle within t_max={t_max:g}")
    last = block_avgs[-1] if block_avgs else avg
    rho_p = prop.to_product(last)
    rho_p = 0.5 * (rho_p + rho_p.conj().T)
    return SteadyState(rho=rho_p, phi_out=prop.flux(last), g2=prop.g2(last), t_end=t, window=window,
                       window_flux=np.array(fluxes), converged=converged)


def _settled(fluxes, block_flux, rtol):
    if len(block_flux) < 3:
        return False
    cur = block_flux[-1]
    scale = abs(cur)
    if scale == 0:
        return False
    if abs(fluxes[-1] - fluxes[-2]) > rtol * scale:
        return False
    d1 = block_flux[-1] - block_flux[-2]
    d0 = block_flux[-2] - block_flux[-3]
    # fluctuations well below tolerance: nothing left to extrapolate
    if abs(d1) <= 0.1 * rtol * scale:
        return True
    if d0 == 0 or d1 * d0 < 0 or abs(d1) >= abs(d0):
        return False
    r = abs(d1 / d0)
    return abs(d1) * r / (1 - r) <= rtol * scale


# ---------------------------------------------------------------------------
# reduced models

class FourLevelRates(NamedTuple):
    """Total rates among ``1=|b,0>, 2=|b,1>, 3=|b,2>, 4=|E_0>``; ``Gkj`` is ``k -> j``."""

    G21: float
    G31: float
    G32: float
    G41: float
    G42: float
    G43: float


class LadderRates(NamedTuple):
    """Cavity-bath rates among ``1=|b,0>, 2=|b,1>, 3=|b,2>``."""

    G21: float
    G31: float
    G32: float


FOUR_LEVEL_TAGS = (("b", 0), ("b", 1), ("b", 2), ("E", 0))


def four_level_rates(jumps: JumpSet) -> FourLevelRates:
    t = FOUR_LEVEL_TAGS
    return FourLevelRates(
        G21=jumps.rate(t[1], t[0]), G31=jumps.rate(t[2], t[0]), G32=jumps.rate(t[2], t[1]),
        G41=jumps.rate(t[3], t[0]), G42=jumps.rate(t[3], t[1]), G43=jumps.rate(t[3], t[2]),
    )


def ladder_rates(jumps: JumpSet) -> LadderRates:
    t = FOUR_LEVEL_TAGS
    return LadderRates(
        G21=jumps.rate(t[1], t[0], bath=3), G31=jumps.rate(t[2], t[0], bath=3),
        G32=jumps.rate(t[2], t[1], bath=3),
    )


def liouvillian(h: np.ndarray, channels) -> np.ndarray:
    """Superoperator for column-stacked ``vec(rho)``; ``channels`` yields ``(rate, L)``."""
    d = h.shape[0]
    eye = np.eye(d)
    sup = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for rate, op in channels:
        if rate == 0:
            continue
        ldl = op.conj().T @ op
        sup += rate * (np.kron(op.conj(), op) - 0.5 * np.kron(eye, ldl) - 0.5 * np.kron(ldl.T, eye))
    return sup


def null_space_steady(sup: np.ndarray, dim: int) -> np.ndarray:
    """Unique unit-trace fixed point of ``sup``."""
    ns = scipy.linalg.null_space(sup)
    if ns.shape[1] != 1:
        raise NumericalError(f"Liouvillian null space has dimension {ns.shape[1]}, expected 1")
    rho = ns[:, 0].reshape(dim, dim, order="F")
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)


def _jump(d, j, k):
    op = np.zeros((d, d), dtype=complex)
    op[j, k] = 1.0
    return op


def lambda_hamiltonian_4(Omega_p_prime: float, Omega_s_prime: float) -> np.ndarray:
    """Lambda Hamiltonian in the ordered basis ``(|b,0>, |b,1>, |b,2>, |E_0>)``."""
    h = np.zeros((4, 4), dtype=complex)
    h[3, 0] = Omega_p_prime
    h[3, 2] = Omega_s_prime
    return h + h.conj().T


def four_level_liouvillian(Omega_p_prime: float, Omega_s_prime: float, G: FourLevelRates) -> np.ndarray:
    pairs = {(1, 0): G.G21, (2, 0): G.G31, (2, 1): G.G32, (3, 0): G.G41, (3, 1): G.G42, (3, 2): G.G43}
    return liouvillian(lambda_hamiltonian_4(Omega_p_prime, Omega_s_prime),
                       [(rate, _jump(4, j, k)) for (k, j), rate in pairs.items()])


def lambda_liouvillian_steady(params: SystemParams, space: TruncatedSpace, rates: DampingRates,
                              jumps: JumpSet | None = None) -> np.ndarray:
    """Null-space steady state of the resonant Lambda model with dressed damping.

    Rates are taken from the full dressed jump set restricted to
    ``|b,0>, |b,1>, |b,2>, |E_0>``.
    """
    spectrum = rabi_spectrum(params, space)
    sys = effective.lambda_system(params, spectrum)
    jumps = jumps if jumps is not None else build_jumps(params, space, rates)
    return null_space_steady(four_level_liouvillian(sys.Omega_p_prime, sys.Omega_s_prime,
                                                    four_level_rates(jumps)), 4)


def resonant_intermediates(Omega_p_prime: complex, Omega_s_prime: complex,
                           G: FourLevelRates) -> tuple[float, float, float]:
    """``(x, y, A1)`` of the closed-form resonant steady state."""
    x = G.G31 + G.G32
    y = G.G41 + G.G42 + G.G43
    p2, s2 = abs(Omega_p_prime) ** 2, abs(Omega_s_prime) ** 2
    u = G.G41 + G.G42 + x
    a1 = (G.G21 * (16 * s2**2 * u + x * y * ((x + y) * (8 * s2 + x * y) - 4 * s2 * G.G43))
          + 16 * p2**2 * (x * (2 * G.G21 + G.G42) + (G.G21 + G.G32) * G.G43)
          + 4 * p2 * (4 * s2 * (G.G32 * u + y * G.G21) + x * G.G21 * (2 * x**2 + 2 * x * y + y**2))
          + 4 * p2 * x * (x + y) * (x * G.G42 + (G.G21 + G.G32) * G.G43))
    return x, y, a1


def appendix_resonant_ss(Omega_p_prime: complex, Omega_s_prime: complex, G: FourLevelRates) -> np.ndarray:
    """Closed-form steady state of the damped Lambda system.

    Ordered basis ``(|b,0>, |b,1>, |b,2>, |E_0>)``.
    """
    x, y, a1 = resonant_intermediates(Omega_p_prime, Omega_s_prime, G)
    if a1 == 0:
        raise NumericalError("normalizer A1 vanishes")
    op, os_ = Omega_p_prime, Omega_s_prime
    p2, s2 = abs(op) ** 2, abs(os_) ** 2
    u = G.G41 + G.G42 + x
    g21 = G.G21
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = (g21 / a1 * 4 * p2 * (4 * s2 * (G.G43 - x) + x * (x**2 + x * y + y**2))
                 + 4 * g21 / a1 * x * y * s2 * (2 * u + G.G43)
                 + g21 / a1 * x**2 * y**2 * (x + y)
                 + 16 * g21 / a1 * s2**2 * u
                 + 16 * g21 / a1 * x * p2**2)
    pref = -4 * os_ * g21 * np.conj(op) / a1
    rho[0, 2] = pref * u * (4 * s2 + x * y) + pref * (4 * p2 * (G.G43 - x) + x * y * G.G43)
    pref = 2j * x * g21 * np.conj(op) / a1
    rho[0, 3] = pref * (u * (4 * s2 + x * y)) + pref * (x * y * G.G43 + 4 * y * p2)
    rho[1, 1] = (4 * p2 / a1 * (G.G31 * G.G42 + G.G32 * (G.G42 + G.G43)) * (4 * p2 + x * (x + y))
                 + 16 * p2 / a1 * G.G32 * s2 * u)
    rho[2, 2] = 4 * g21 * p2 / a1 * (G.G43 * (4 * p2 + x * (x + y)) + 4 * s2 * u)
    rho[2, 3] = -8j * x * g21 * p2 * np.conj(os_) / a1 * u
    rho[3, 3] = 4 * x * g21 * p2 / a1 * (4 * p2 + x * (x + y))
    upper = np.triu(rho, 1)
    return np.diag(np.diag(rho)) + upper + upper.conj().T


def offres_normalizer(g02: complex, delta0: float, delta2: float, G: LadderRates) -> float:
    """``A2`` of the closed-form far-detuned steady state."""
    return (4 * abs(g02) ** 2 * (2 * G.G21 + G.G32)
            + G.G21 * ((G.G31 + G.G32) ** 2 + 4 * (delta0 - delta2) ** 2))


def appendix_offres_ss(g02: complex, delta0: float, delta2: float, G: LadderRates) -> np.ndarray:
    """Closed-form steady state of the damped two-level Raman model.

    Ordered basis ``(|b,0>, |b,1>, |b,2>)``.
    """
    a2 = offres_normalizer(g02, delta0, delta2, G)
    if a2 == 0:
        raise NumericalError("normalizer A2 vanishes")
    g2 = abs(g02) ** 2
    rho = np.zeros((3, 3), dtype=complex)
    rho[0, 0] = 1 - 4 * g2 * (G.G21 + G.G32) / a2
    rho[1, 1] = 4 * g2 * G.G32 / a2
    rho[2, 2] = 4 * g2 * G.G21 / a2
    rho[0, 2] = 2 * g02 * G.G21 / a2 * (1j * G.G31 + 1j * G.G32 + 2 * delta0 - 2 * delta2)
    rho[2, 0] = np.conj(rho[0, 2])
    return rho


def ladder_liouvillian(eff: effective.TwoLevelEffective, G: LadderRates) -> np.ndarray:
    """Liouvillian of the two-level Raman model on ``(|b,0>, |b,1>, |b,2>)``."""
    h = np.zeros((3, 3), dtype=complex)
    h[0, 0], h[2, 2] = eff.delta0, eff.delta2
    h[2, 0] = eff.g02
    h[0, 2] = np.conj(eff.g02)
    return liouvillian(h, [(G.G21, _jump(3, 0, 1)), (G.G31, _jump(3, 0, 2)), (G.G32, _jump(3, 1, 2))])


def flux_ss_analytic(rho_ss: np.ndarray, gamma3: float) -> float:
    """``gamma3 (rho_22 + 2 rho_33)`` from a reduced steady state."""
    return float(gamma3 * np.real(rho_ss[1, 1] + 2 * rho_ss[2, 2]))


def g2_ss_analytic(rho_ss: np.ndarray) -> float:
    """``2 rho_33 / (rho_22 + 2 rho_33)^2`` from a reduced steady state."""
    r22, r33 = np.real(rho_ss[1, 1]), np.real(rho_ss[2, 2])
    den = (r22 + 2 * r33) ** 2
    if den == 0:
        raise NumericalError("no photons in the reduced steady state; G2 undefined")
    return float(2 * r33 / den)
