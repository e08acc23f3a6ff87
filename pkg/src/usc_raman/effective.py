"""Adiabatic elimination of the dressed levels.

Two reductions of the driven problem are provided:

* far detuning: an effective two-level Hamiltonian on ``{|b,0>, |b,2>}``
  with AC Stark shifts ``Delta_n`` and Raman coupling ``g_{n,n+2}``;
* pump and Stokes on resonance with ``|E_0>``: a Lambda system on
  ``{|b,0>, |b,2>, |E_0>}`` with its dark state.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import hilbert
from .errors import AdiabaticEliminationError, NumericalError, ValidationError
from .hilbert import TruncatedSpace
from .rabi import RabiSpectrum, SystemParams

DEFAULT_M_CUTOFF = 40
DETUNING_FLOOR = 1e-6
RESONANCE_TOL = 1e-9


def raman_resonant_omega_s(omega_p: float, omega_c: float = 1.0) -> float:
    """Stokes frequency satisfying ``omega_p - omega_s = 2 omega_c``."""
    omega_s = omega_p - 2.0 * omega_c
    if abs(omega_s) < 1e-12:
        warnings.warn("Raman-resonant Stokes frequency is zero (static drive)", RuntimeWarning, stacklevel=2)
    return omega_s


def drive_coupling(params: SystemParams, spectrum: RabiSpectrum, l: str, m: int, n: int) -> float:
    """``Omega_{l,mn} = (Omega_l / 2) c_mn``."""
    return 0.5 * _strength(params, l) * spectrum.c[m, n]


def detuning(params: SystemParams, spectrum: RabiSpectrum, m: int, n: int, q: int, l: str) -> float:
    """``delta_{mn,ql} = E_m - omega_b - n omega_c + q omega_l``."""
    return spectrum.energies[m] - params.omega_b - n * params.omega_c + q * _frequency(params, l)


def _strength(params, l):
    if l == "p":
        return params.Omega_p
    if l == "s":
        return params.Omega_s
    raise ValidationError(f"drive label must be 'p' or 's', got {l!r}")


def _frequency(params, l):
    if l == "p":
        return params.omega_p
    if l == "s":
        return params.omega_s
    raise ValidationError(f"drive label must be 'p' or 's', got {l!r}")


def _m_range(spectrum, m_cutoff):
    if m_cutoff < 1:
        raise ValidationError("m_cutoff must be >= 1")
    return range(min(m_cutoff, spectrum.n_states))


def _check_n(spectrum, n):
    if not 0 <= n < spectrum.c.shape[1]:
        raise ValidationError(f"Fock index {n} outside the truncated space")


def _safe_inverse(delta, m, n, q, l):
    if abs(delta) < DETUNING_FLOOR:
        raise AdiabaticEliminationError(
            f"detuning delta_({m}{n},{q:+d}{l}) = {delta:.3e} is near resonance; "
            "adiabatic elimination is invalid")
    return 1.0 / delta


def effective_g(n: int, params: SystemParams, spectrum: RabiSpectrum,
                m_cutoff: int = DEFAULT_M_CUTOFF) -> complex:
    """Raman coupling ``g_{n,n+2}`` between ``|b,n>`` and ``|b,n+2>``."""
    _check_n(spectrum, n + 2)
    total = 0.0 + 0.0j
    for m in _m_range(spectrum, m_cutoff):
        num = drive_coupling(params, spectrum, "p", m, n) * np.conj(drive_coupling(params, spectrum, "s", m, n + 2))
        if num == 0:
            continue
        total -= num * (_safe_inverse(detuning(params, spectrum, m, n, +1, "s"), m, n, +1, "s")
                        + _safe_inverse(detuning(params, spectrum, m, n, -1, "p"), m, n, -1, "p"))
    return complex(total)


def stark_shift(n: int, params: SystemParams, spectrum: RabiSpectrum,
                m_cutoff: int = DEFAULT_M_CUTOFF) -> float:
    """AC Stark shift ``Delta_n`` of ``|b,n>``."""
    _check_n(spectrum, n)
    total = 0.0
    for m in _m_range(spectrum, m_cutoff):
        for l in ("p", "s"):
            weight = abs(drive_coupling(params, spectrum, l, m, n)) ** 2
            if weight == 0:
                continue
            for q in (+1, -1):
                total -= weight * _safe_inverse(detuning(params, spectrum, m, n, q, l), m, n, q, l)
    return float(total)


def stark_f(x: float, params: SystemParams, spectrum: RabiSpectrum,
            m_cutoff: int = DEFAULT_M_CUTOFF) -> float:
    """Lorentzian-weighted difference whose zero balances ``Delta_0`` and ``Delta_2``."""
    total = 0.0
    for m in _m_range(spectrum, m_cutoff):
        for n, sign in ((2, 1.0), (0, -1.0)):
            w = abs(spectrum.c[m, n]) ** 2
            if w == 0:
                continue
            a = spectrum.energies[m] - params.omega_b - n * params.omega_c
            denom = a * a - x * x
            if abs(denom) < DETUNING_FLOOR:
                raise AdiabaticEliminationError(f"F({x}) has a near-zero denominator at m={m}, n={n}")
            total += sign * w * a / denom
    return float(total)


def stark_balance_ratio(params: SystemParams, spectrum: RabiSpectrum,
                        m_cutoff: int = DEFAULT_M_CUTOFF) -> float:
    """Stokes/pump strength ratio that equalizes ``Delta_0`` and ``Delta_2``."""
    fp = stark_f(params.omega_p, params, spectrum, m_cutoff)
    fs = stark_f(params.omega_s, params, spectrum, m_cutoff)
    if fs == 0 or fp * fs > 0:
        raise NumericalError(f"F(omega_p)={fp:.6g} and F(omega_s)={fs:.6g} do not have opposite signs; "
                             "no real Stark-balancing ratio exists")
    return float(np.sqrt(-fp / fs))


@dataclass(frozen=True)
class TwoLevelEffective:
    delta0: float
    delta2: float
    g02: complex
    g24: complex | None = None

    @property
    def rabi_frequency(self) -> float:
        return float(np.hypot(abs(self.g02), 0.5 * (self.delta2 - self.delta0)))

    def hamiltonian(self) -> np.ndarray:
        """Matrix in the ordered basis ``(|b,0>, |b,2>)``."""
        return np.array([[self.delta0, np.conj(self.g02)], [self.g02, self.delta2]], dtype=complex)


def two_level_effective(params: SystemParams, spectrum: RabiSpectrum,
                        m_cutoff: int = DEFAULT_M_CUTOFF) -> TwoLevelEffective:
    g24 = effective_g(2, params, spectrum, m_cutoff) if spectrum.c.shape[1] > 4 else None
    return TwoLevelEffective(
        delta0=stark_shift(0, params, spectrum, m_cutoff),
        delta2=stark_shift(2, params, spectrum, m_cutoff),
        g02=effective_g(0, params, spectrum, m_cutoff),
        g24=g24,
    )


def two_level_p2(t, eff: TwoLevelEffective):
    """Population of ``|b,2>`` starting from ``|b,0>`` (detuned Rabi formula)."""
    t = np.asarray(t, dtype=float)
    w = eff.rabi_frequency
    if w == 0:
        return np.zeros_like(t)
    return abs(eff.g02) ** 2 / w**2 * np.sin(w * t) ** 2


@dataclass(frozen=True)
class LambdaSystem:
    Omega_p_prime: float
    Omega_s_prime: float
    Omega: float
    eta: float
    eta_c: float

    @property
    def transfer_time(self) -> float:
        """Time ``pi / Omega`` of the first maximum of P2."""
        return np.pi / self.Omega

    def max_p2(self) -> float:
        p2, s2 = self.Omega_p_prime**2, self.Omega_s_prime**2
        if p2 + s2 == 0:
            return 0.0
        return 4 * p2 * s2 / (p2 + s2) ** 2

    def hamiltonian(self) -> np.ndarray:
        """Matrix in the ordered basis ``(|b,0>, |b,2>, |E_0>)``."""
        h = np.zeros((3, 3), dtype=complex)
        h[2, 0] = self.Omega_p_prime
        h[2, 1] = self.Omega_s_prime
        return h + h.conj().T


def is_lambda_resonant(params: SystemParams, spectrum: RabiSpectrum, tol: float = RESONANCE_TOL) -> bool:
    e0 = spectrum.ground_energy
    return (abs(e0 - params.omega_b - params.omega_p) <= tol
            and abs(e0 - params.omega_b - 2 * params.omega_c - params.omega_s) <= tol)


def lambda_system(params: SystemParams, spectrum: RabiSpectrum, check_resonance: bool = True) -> LambdaSystem:
    if check_resonance and not is_lambda_resonant(params, spectrum):
        raise ValidationError("drives are not on resonance with |b,0> <-> |E_0> <-> |b,2>")
    c00, c02 = spectrum.c[0, 0], spectrum.c[0, 2]
    if abs(c02) < 1e-12:
        raise ValidationError("c02 vanishes (Jaynes-Cummings regime); eta_c is undefined")
    op = 0.5 * params.Omega_p * c00
    os_ = 0.5 * params.Omega_s * c02
    return LambdaSystem(
        Omega_p_prime=float(op),
        Omega_s_prime=float(os_),
        Omega=float(np.hypot(op, os_)),
        eta=params.eta,
        eta_c=float(abs(c00) / abs(c02)),
    )


def resonant_p2(t, sys: LambdaSystem):
    """Population of ``|b,2>`` under the Lambda Hamiltonian starting from ``|b,0>``."""
    t = np.asarray(t, dtype=float)
    return sys.max_p2() * np.sin(0.5 * sys.Omega * t) ** 4


def embed_ground_rabi(space: TruncatedSpace, spectrum: RabiSpectrum) -> np.ndarray:
    """``|E_0>`` as a vector in the product basis."""
    vec = np.zeros(space.dim, dtype=complex)
    vec[space.block("g")] = spectrum.c[0]
    vec[space.block("e")] = spectrum.d[0]
    return vec


def lambda_hamiltonian(sys: LambdaSystem, space: TruncatedSpace, spectrum: RabiSpectrum) -> np.ndarray:
    e0 = embed_ground_rabi(space, spectrum)
    b0 = hilbert.basis_state(space, "b", 0)
    b2 = hilbert.basis_state(space, "b", 2)
    h = sys.Omega_p_prime * np.outer(e0, b0.conj()) + sys.Omega_s_prime * np.outer(e0, b2.conj())
    return h + h.conj().T


def dark_state(sys: LambdaSystem, space: TruncatedSpace) -> np.ndarray:
    """Drive-decoupled superposition of ``|b,0>`` and ``|b,2>``."""
    norm = np.hypot(sys.Omega_p_prime, sys.Omega_s_prime)
    if norm == 0:
        raise ValidationError("dark state undefined when both drives vanish")
    return (sys.Omega_s_prime * hilbert.basis_state(space, "b", 0)
            - sys.Omega_p_prime * hilbert.basis_state(space, "b", 2)) / norm


def resonant_drive(params: SystemParams, spectrum: RabiSpectrum, Omega_p: float,
                   eta: float | None = None) -> SystemParams:
    """Tune pump to ``E_0 - omega_b`` and Stokes two cavity quanta below.

    ``eta=None`` picks the optimal ratio ``eta_c``.
    """
    if eta is None:
        eta = spectrum.eta_c
    omega_p = spectrum.ground_energy - params.omega_b
    return params.with_(omega_p=omega_p, omega_s=omega_p - 2 * params.omega_c,
                        Omega_p=Omega_p, Omega_s=eta * Omega_p)


def offresonant_drive(params: SystemParams, spectrum: RabiSpectrum, Omega_p: float,
                      detuning_: float, ratio: float | None = None,
                      m_cutoff: int = DEFAULT_M_CUTOFF) -> SystemParams:
    """Pump detuned by ``detuning_`` below ``E_0 - omega_b``, Raman-resonant Stokes.

    ``ratio=None`` applies the Stark-balancing ratio.
    """
    omega_p = spectrum.ground_energy - params.omega_b - detuning_
    p = params.with_(omega_p=omega_p, omega_s=raman_resonant_omega_s(omega_p, params.omega_c),
                     Omega_p=Omega_p, Omega_s=0.0)
    if ratio is None:
        ratio = stark_balance_ratio(p, spectrum, m_cutoff)
    return p.with_(Omega_s=ratio * Omega_p)


def validity_monitors(params: SystemParams, spectrum: RabiSpectrum,
                      m_cutoff: int = DEFAULT_M_CUTOFF) -> dict:
    """Dimensionless indicators of how trustworthy the reductions are.

    ``weak_drive``: ``max |Omega_{l,mn} / (E_m - omega_b - n omega_c - omega_l)|``
    over ``m >= 1`` and ``n in {0, 1, 2}``; ``large_detuning``: pump and
    Stokes couplings to ``|E_0>`` over their detunings; ``g24_over_g02``:
    relative size of the neglected ladder coupling (``None`` when the
    far-detuned expansion does not apply).
    """
    e0 = spectrum.ground_energy
    weak = 0.0
    for m in range(1, min(m_cutoff, spectrum.n_states)):
        for n in (0, 1, 2):
            for l in ("p", "s"):
                num = abs(drive_coupling(params, spectrum, l, m, n))
                if num == 0:
                    continue
                den = abs(spectrum.energies[m] - params.omega_b - n * params.omega_c - _frequency(params, l))
                weak = max(weak, np.inf if den == 0 else num / den)

    def ratio(num, den):
        if num == 0:
            return 0.0
        return np.inf if den == 0 else abs(num / den)

    large = max(
        ratio(0.5 * params.Omega_p * spectrum.c[0, 0], e0 - params.omega_b - params.omega_p),
        ratio(0.5 * params.Omega_s * spectrum.c[0, 2], e0 - params.omega_b - 2 * params.omega_c - params.omega_s),
    )
    try:
        g02 = effective_g(0, params, spectrum, m_cutoff)
        g24 = effective_g(2, params, spectrum, m_cutoff)
        g_ratio = float(abs(g24) / abs(g02)) if g02 != 0 else None
    except AdiabaticEliminationError:
        g_ratio = None
    return {"weak_drive": float(weak), "large_detuning": float(large), "g24_over_g02": g_ratio}
