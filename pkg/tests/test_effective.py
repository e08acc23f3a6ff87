import warnings

import numpy as np
import pytest
from scipy.optimize import brentq

from usc_raman import effective, hilbert, rabi
from usc_raman.errors import AdiabaticEliminationError, NumericalError, ValidationError

# Fig. 3 setting: lambda = 0.5, Omega_p = 2e-3, pump 10 Omega_p below E0 - omega_b
OMEGA_P = 2e-3
DETUNING = 10 * OMEGA_P
# regression constants from the brute-force oracle below (n_max = 40, m_cutoff = 40)
G02_FIG3 = -4.172235965491e-05
DELTA0_FIG3 = -1.009477361111e-04
RATIO_FIG3 = 9.487104311504


def brute_force(params, n_max=40, m_cutoff=40):
    """Direct summation over a product-basis diagonalization of the Rabi Hamiltonian."""
    space = hilbert.build_space(n_max)
    h = rabi.rabi_hamiltonian(params, space)
    idx = np.r_[space.block("g"), space.block("e")]
    w, v = np.linalg.eigh(h[np.ix_(idx, idx)].real)
    c = v[: space.n_fock, :].T
    amp = {"p": params.Omega_p, "s": params.Omega_s}
    freq = {"p": params.omega_p, "s": params.omega_s}

    def delta(m, n, q, l):
        return w[m] - params.omega_b - n * params.omega_c + q * freq[l]

    g02 = 0.0
    shifts = {0: 0.0, 2: 0.0}
    for m in range(m_cutoff):
        g02 -= (amp["p"] / 2 * c[m, 0]) * (amp["s"] / 2 * c[m, 2]) * (
            1 / delta(m, 0, +1, "s") + 1 / delta(m, 0, -1, "p"))
        for n in shifts:
            for l in "ps":
                for q in (1, -1):
                    shifts[n] -= (amp[l] / 2 * c[m, n]) ** 2 / delta(m, n, q, l)
    return g02, shifts[0], shifts[2]


@pytest.fixture(scope="module")
def fig3(spec05):
    params = effective.offresonant_drive(rabi.SystemParams(lam=0.5), spec05, OMEGA_P, DETUNING)
    return params, spec05


def test_raman_resonant_omega_s():
    assert effective.raman_resonant_omega_s(4.85) == pytest.approx(2.85)
    with pytest.warns(RuntimeWarning):
        assert effective.raman_resonant_omega_s(2.0) == 0.0


def test_resonant_drive_frequencies(spec05):
    p = effective.resonant_drive(rabi.SystemParams(lam=0.5), spec05, 1e-3)
    assert p.omega_p == pytest.approx(spec05.ground_energy + 5)
    assert p.omega_s == pytest.approx(spec05.ground_energy + 5 - 2)
    assert p.Omega_s == pytest.approx(spec05.eta_c * 1e-3)
    assert effective.is_lambda_resonant(p, spec05)


def test_fig3_against_brute_force(fig3):
    params, spec = fig3
    g02, d0, d2 = brute_force(params)
    assert effective.effective_g(0, params, spec) == pytest.approx(g02, rel=1e-8)
    assert effective.stark_shift(0, params, spec) == pytest.approx(d0, rel=1e-8)
    assert effective.stark_shift(2, params, spec) == pytest.approx(d2, rel=1e-8)
    assert g02 == pytest.approx(G02_FIG3, rel=1e-9)
    assert d0 == pytest.approx(DELTA0_FIG3, rel=1e-9)


def test_fig3_ratio_by_root_finding(fig3):
    params, spec = fig3

    def imbalance(ratio):
        _, d0, d2 = brute_force(params.with_(Omega_s=ratio * OMEGA_P))
        return d0 - d2

    ratio = brentq(imbalance, 1.0, 50.0, xtol=1e-13)
    assert effective.stark_balance_ratio(params, spec) == pytest.approx(ratio, rel=1e-8)
    assert ratio == pytest.approx(RATIO_FIG3, rel=1e-9)


def test_balance_property(fig3):
    params, spec = fig3
    d0 = effective.stark_shift(0, params, spec)
    d2 = effective.stark_shift(2, params, spec)
    assert abs(d0 - d2) <= 1e-10 * max(abs(d0), abs(d2))


def test_m_sum_convergence(fig3):
    params, _ = fig3
    spec = rabi.rabi_spectrum(rabi.SystemParams(lam=0.5), hilbert.build_space(50))
    for fn in (lambda m: effective.effective_g(0, params, spec, m),
               lambda m: effective.stark_shift(0, params, spec, m),
               lambda m: effective.stark_shift(2, params, spec, m),
               lambda m: effective.stark_f(params.omega_p, params, spec, m)):
        assert abs(fn(40) - fn(80)) <= 1e-8 * abs(fn(80))


def test_zero_stokes_gives_zero_coupling(fig3):
    params, spec = fig3
    assert effective.effective_g(0, params.with_(Omega_s=0.0), spec) == 0


def test_no_raman_coupling_without_virtual_photons(space20):
    params0 = rabi.SystemParams(lam=0.0)
    spec = rabi.rabi_spectrum(params0, space20)
    p = params0.with_(omega_p=4.9, omega_s=2.9, Omega_p=1e-3, Omega_s=1e-2)
    assert effective.effective_g(0, p, spec) == 0


def test_zero_drive_gives_zero_shift(fig3):
    params, spec = fig3
    assert effective.stark_shift(0, params.with_(Omega_p=0.0, Omega_s=0.0), spec) == 0


def test_near_resonant_denominator_rejected(spec05):
    p = effective.resonant_drive(rabi.SystemParams(lam=0.5), spec05, 1e-3)
    with pytest.raises(AdiabaticEliminationError):
        effective.effective_g(0, p, spec05)
    with pytest.raises(AdiabaticEliminationError):
        effective.stark_shift(0, p, spec05)


def test_same_sign_f_rejected(spec05):
    omega_p = spec05.ground_energy + 5 + 0.5
    p = rabi.SystemParams(lam=0.5).with_(omega_p=omega_p, omega_s=omega_p - 2, Omega_p=OMEGA_P)
    with pytest.raises(NumericalError):
        effective.stark_balance_ratio(p, spec05)


def test_two_level_p2():
    eff = effective.TwoLevelEffective(delta0=0.3, delta2=0.3, g02=2e-3)
    assert effective.two_level_p2(0.0, eff) == 0
    assert effective.two_level_p2(np.pi / (2 * 2e-3), eff) == pytest.approx(1.0)
    detuned = effective.TwoLevelEffective(delta0=0.0, delta2=4e-3, g02=2e-3)
    t = np.linspace(0, 5000, 200001)
    assert effective.two_level_p2(t, detuned).max() == pytest.approx(0.5, abs=1e-8)


def test_two_level_p2_matches_matrix_exponential(fig3):
    from scipy.linalg import expm
    params, spec = fig3
    eff = effective.two_level_effective(params, spec)
    eff = effective.TwoLevelEffective(eff.delta0, eff.delta0 + 3e-5, eff.g02)
    for t in (1e3, 1e4, 3e4):
        psi = expm(-1j * eff.hamiltonian() * t) @ np.array([1, 0])
        assert effective.two_level_p2(t, eff) == pytest.approx(abs(psi[1]) ** 2, abs=1e-12)


@pytest.mark.parametrize("lam, eta_c", [(0.5, 10.2909), (0.6, 6.8538)])
def test_lambda_system_eta_c(lam, eta_c, space20):
    params = rabi.SystemParams(lam=lam)
    spec = rabi.rabi_spectrum(params, space20)
    sys = effective.lambda_system(effective.resonant_drive(params, spec, 1e-3), spec)
    assert sys.eta_c == pytest.approx(eta_c, rel=1e-3)
    assert sys.Omega == pytest.approx(0.5e-3 * np.sqrt(spec.c[0, 0] ** 2 + sys.eta**2 * spec.c[0, 2] ** 2))


def test_lambda_system_errors(space20, spec05):
    params = rabi.SystemParams(lam=0.0)
    spec = rabi.rabi_spectrum(params, space20)
    with pytest.raises(ValidationError):
        effective.lambda_system(effective.resonant_drive(params, spec, 1e-3, eta=1.0), spec)
    off = rabi.SystemParams(lam=0.5).with_(omega_p=4.85, omega_s=2.85, Omega_p=1e-3)
    with pytest.raises(ValidationError):
        effective.lambda_system(off, spec05)


def test_resonant_p2(spec05):
    base = rabi.SystemParams(lam=0.5)
    sys = effective.lambda_system(effective.resonant_drive(base, spec05, 0.8e-3), spec05)
    assert effective.resonant_p2(sys.transfer_time, sys) == pytest.approx(1.0, abs=1e-12)
    assert effective.resonant_p2(0.0, sys) == 0
    zero = effective.lambda_system(effective.resonant_drive(base, spec05, 0.8e-3, eta=0.0), spec05)
    assert np.all(effective.resonant_p2(np.linspace(0, 1e5, 50), zero) == 0)
    for eta in (1.0, 3.0, spec05.eta_c + 2, 30.0):
        s = effective.lambda_system(effective.resonant_drive(base, spec05, 0.8e-3, eta=eta), spec05)
        ec = spec05.eta_c
        assert s.max_p2() == pytest.approx(4 * eta**2 * ec**2 / (ec**2 + eta**2) ** 2)
        assert effective.resonant_p2(s.transfer_time, s) == pytest.approx(s.max_p2())


def test_resonant_p2_matches_three_level_exponential(spec05):
    from scipy.linalg import expm
    sys = effective.lambda_system(effective.resonant_drive(rabi.SystemParams(lam=0.5), spec05, 0.8e-3, eta=3.0), spec05)
    for t in (500.0, 3000.0, 9000.0):
        psi = expm(-1j * sys.hamiltonian() * t) @ np.array([1, 0, 0])
        assert effective.resonant_p2(t, sys) == pytest.approx(abs(psi[1]) ** 2, abs=1e-12)


def test_dark_state(space20, spec05):
    sys = effective.lambda_system(effective.resonant_drive(rabi.SystemParams(lam=0.5), spec05, 0.8e-3), spec05)
    d = effective.dark_state(sys, space20)
    assert np.vdot(d, d).real == pytest.approx(1.0)
    h = effective.lambda_hamiltonian(sys, space20, spec05)
    assert np.linalg.norm(h @ d) <= 1e-12
    only_pump = effective.LambdaSystem(1e-3, 0.0, 1e-3, 0.0, sys.eta_c)
    assert np.allclose(effective.dark_state(only_pump, space20), -hilbert.basis_state(space20, "b", 2))
    with pytest.raises(ValidationError):
        effective.dark_state(effective.LambdaSystem(0.0, 0.0, 0.0, 0.0, 1.0), space20)


def test_validity_monitors(fig3, spec05):
    params, spec = fig3
    mon = effective.validity_monitors(params, spec)
    assert set(mon) == {"weak_drive", "large_detuning", "g24_over_g02"}
    assert 0 < mon["weak_drive"] < 0.05
    assert mon["large_detuning"] == pytest.approx(0.5 * OMEGA_P * spec.c[0, 0] / DETUNING, rel=1e-6)
    assert mon["g24_over_g02"] < 0.1
    res = effective.resonant_drive(rabi.SystemParams(lam=0.5), spec05, 0.8e-3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        mon = effective.validity_monitors(res, spec05)
    assert mon["large_detuning"] == np.inf and mon["g24_over_g02"] is None
