import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from usc_raman import effective, hilbert, lindblad, rabi
from usc_raman.errors import NumericalError, ValidationError
from usc_raman.lindblad import DampingRates

GAMMA = 2e-3


@pytest.fixture(scope="module")
def base06():
    return rabi.SystemParams(lam=0.6)


@pytest.fixture(scope="module")
def spec06_10(base06, space10):
    return rabi.rabi_spectrum(base06, space10)


@pytest.fixture(scope="module")
def jumps06(base06, space10):
    return lindblad.build_jumps(base06, space10, DampingRates(0.011, 0.013, 0.017))


def pure(space, level, n):
    return hilbert.projector(hilbert.basis_state(space, level, n))


def test_damping_rates_validation():
    assert DampingRates.uniform(0.1).as_tuple() == (0.1, 0.1, 0.1)
    for bad in ({"gamma1": -1e-3}, {"gamma3": np.inf}):
        with pytest.raises(ValidationError):
            DampingRates(**bad)


def test_transition_matrix_structure(jumps06, space10, spec06_10):
    basis = jumps06.basis
    c1, c2, c3 = jumps06.transition
    ladder = [j for j, t in enumerate(basis.tags) if t[0] == "b"]
    rabi_states = [j for j, t in enumerate(basis.tags) if t[0] == "E"]
    assert np.all(c3[np.ix_(ladder, rabi_states)] == 0)
    assert np.all(c1[np.ix_(ladder, ladder)] == 0)
    for n in range(space10.n_fock):
        for m in range(spec06_10.n_states):
            assert c2[basis.index(("b", n)), basis.index(("E", m))] == pytest.approx(spec06_10.c[m, n], abs=1e-12)


def test_only_downward_jumps(jumps06):
    e = jumps06.basis.energies
    ks, js = np.nonzero(jumps06.rates)
    assert ks.size > 0
    assert np.all(e[ks] - e[js] > lindblad.DEGENERACY_TOL)
    for rate, j, k in jumps06.channels():
        assert rate > 0 and e[k] > e[j]


def test_rate_examples(jumps06, spec06_10, space10):
    for n in range(1, space10.n_fock):
        assert jumps06.rate(("b", n), ("b", n - 1), bath=3) == pytest.approx(0.017 * n)
        assert jumps06.rate(("b", n), ("b", n - 1), bath=1) == 0
    for n in (0, 2, 4):
        assert jumps06.rate(("E", 0), ("b", n), bath=2) == pytest.approx(0.013 * spec06_10.c[0, n] ** 2)
    assert jumps06.rate(("E", 0), ("b", 1), bath=2) == 0


def test_degenerate_pairs_excluded():
    params = rabi.SystemParams(omega_b=0.0, lam=0.0)
    space = hilbert.build_space(3)
    jumps = lindblad.build_jumps(params, space, DampingRates.uniform(0.1))
    e = jumps.basis.energies
    same = np.abs(e[:, None] - e[None, :]) < lindblad.DEGENERACY_TOL
    assert np.all(jumps.rates[same] == 0)


def test_x_operators(jumps06, space10):
    x = lindblad.x_operators(jumps06)
    assert np.allclose(x.plus, x.minus.conj().T)
    assert np.all(np.tril(x.minus_dressed) == 0)
    ground = jumps06.basis.vectors[:, 0]
    assert np.all(x.minus @ ground == 0)


def test_flux_and_g2_on_ladder_states(jumps06, space10):
    x = lindblad.x_operators(jumps06)
    rates = DampingRates(0.011, 0.013, 0.017)
    assert lindblad.photon_flux(pure(space10, "b", 0), x, rates) == 0
    assert lindblad.photon_flux(pure(space10, "b", 2), x, rates) == pytest.approx(2 * 0.017)
    assert lindblad.g2_equal_time(pure(space10, "b", 2), x) == pytest.approx(0.5)
    assert lindblad.g2_equal_time(pure(space10, "b", 1), x) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(NumericalError):
        lindblad.g2_equal_time(pure(space10, "b", 0), x)


def test_free_decay_of_one_photon(base06):
    space = hilbert.build_space(4)
    rates = DampingRates(0.0, 0.0, 0.05)
    traj = lindblad.master_evolve(pure(space, "b", 1), base06, space, rates, 60.0, samples=12, store_states=True)
    i1, i0 = space.index("b", 1), space.index("b", 0)
    p1 = np.array([s[i1, i1].real for s in traj.states])
    p0 = np.array([s[i0, i0].real for s in traj.states])
    assert np.allclose(p1, np.exp(-0.05 * traj.t), atol=1e-9)
    assert np.allclose(p0 + p1, 1, atol=1e-9)


def test_unitary_limit_keeps_purity(base06, spec06_10, space10):
    params = effective.resonant_drive(base06, spec06_10, 0.02)
    rng = np.random.default_rng(5)
    psi = rng.normal(size=space10.dim) + 1j * rng.normal(size=space10.dim)
    psi /= np.linalg.norm(psi)
    traj = lindblad.master_evolve(np.outer(psi, psi.conj()), params, space10, DampingRates(), 100.0, samples=4)
    rho = traj.final_state
    assert np.real(np.trace(rho @ rho)) == pytest.approx(1.0, abs=1e-8)


def test_zero_temperature_relaxation(base06):
    space = hilbert.build_space(3)
    rates = DampingRates.uniform(0.2)
    jumps = lindblad.build_jumps(base06, space, rates)
    out = jumps.rates.sum(axis=1)
    slowest = out[out > 0].min()
    assert np.count_nonzero(out == 0) == 1
    rng = np.random.default_rng(11)
    m = rng.normal(size=(space.dim, space.dim)) + 1j * rng.normal(size=(space.dim, space.dim))
    rho0 = m @ m.conj().T
    rho0 /= np.trace(rho0)
    traj = lindblad.master_evolve(rho0, base06, space, rates, 20 / slowest, samples=10, jumps=jumps)
    i0 = space.index("b", 0)
    assert traj.final_state[i0, i0].real >= 1 - 1e-6
    assert np.all(np.abs(traj["trace"] - 1) <= 1e-8)
    assert np.all(traj["min_eig"] >= -1e-8)


def test_master_input_validation(base06, space10):
    with pytest.raises(ValidationError):
        lindblad.master_evolve(np.eye(space10.dim), base06, space10, DampingRates(), 1.0)
    with pytest.raises(ValidationError):
        lindblad.master_evolve(np.eye(3) / 3, base06, space10, DampingRates(), 1.0)


def test_fig6a_rises_without_overshoot(base06, spec06_10, space10):
    params = effective.resonant_drive(base06, spec06_10, 8e-3)
    traj = lindblad.master_evolve(pure(space10, "b", 0), params, space10, DampingRates.uniform(2e-2), 600.0, samples=120)
    phi = traj["phi_out"]
    assert phi[0] == 0 and phi[-1] > 0
    assert phi.max() <= 1.02 * phi[-1]
    assert np.all(np.abs(traj["trace"] - 1) <= 1e-8)
    assert np.all(traj["min_eig"] >= -1e-8)


def test_fig6b_oscillates_then_settles(base06, spec06_10, space10):
    params = effective.resonant_drive(base06, spec06_10, 8e-3)
    traj = lindblad.master_evolve(pure(space10, "b", 0), params, space10, DampingRates.uniform(GAMMA), 2500.0, samples=250)
    phi = traj["phi_out"]
    assert phi.max() > 1.2 * phi[-1]
    tail = phi[traj.t > 2000]
    assert np.ptp(tail) < 0.05 * tail.mean()


def test_offresonant_flux_is_smaller(base06, spec06_10, space10):
    rates = DampingRates.uniform(GAMMA)
    res = effective.resonant_drive(base06, spec06_10, 8e-3)
    off = res.with_(omega_p=4.85, omega_s=2.85)
    phi_res = lindblad.flux_ss_analytic(lindblad.lambda_liouvillian_steady(res, space10, rates), GAMMA)
    phi_off = lindblad.steady_state_numeric(off, space10, rates).phi_out
    assert phi_off < phi_res


def test_steady_state_numeric_arguments(base06, spec06_10, space10):
    rates = DampingRates.uniform(GAMMA)
    params = effective.resonant_drive(base06, spec06_10, 8e-3)
    with pytest.raises(ValidationError):
        lindblad.steady_state_numeric(params, space10, rates, window=5 * 2 * np.pi / params.omega_p)
    with pytest.raises(ValidationError):
        lindblad.steady_state_numeric(params.with_(omega_p=0.0), space10, rates)
    with pytest.raises(NumericalError):
        lindblad.steady_state_numeric(params, space10, rates, t_max=100.0)


def test_lambda_steady_without_drive(base06, spec06_10, space10):
    params = effective.resonant_drive(base06, spec06_10, 0.0)
    rho = lindblad.lambda_liouvillian_steady(params, space10, DampingRates.uniform(GAMMA))
    expected = np.zeros((4, 4))
    expected[0, 0] = 1
    assert np.allclose(rho, expected, atol=1e-12)


def test_null_space_dimension_checked():
    sup = lindblad.liouvillian(np.zeros((2, 2)), [])
    with pytest.raises(NumericalError):
        lindblad.null_space_steady(sup, 2)


def test_four_level_rates_from_jumps(jumps06, spec06_10):
    G = lindblad.four_level_rates(jumps06)
    assert G.G21 == pytest.approx(0.017)
    assert G.G32 == pytest.approx(2 * 0.017)
    assert G.G31 == 0 and G.G42 == 0
    assert G.G41 == pytest.approx(0.013 * spec06_10.c[0, 0] ** 2)
    assert G.G43 == pytest.approx(0.013 * spec06_10.c[0, 2] ** 2)


rates_st = st.floats(1e-3, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.tuples(*[rates_st] * 6), st.floats(1e-3, 1.0), st.floats(1e-3, 1.0))
def test_resonant_closed_form_matches_null_space(rates, op, os_):
    G = lindblad.FourLevelRates(*rates)
    rho_a = lindblad.appendix_resonant_ss(op, os_, G)
    rho_n = lindblad.null_space_steady(lindblad.four_level_liouvillian(op, os_, G), 4)
    assert np.max(np.abs(rho_a - rho_n)) <= 1e-8
    assert np.trace(rho_a).real == pytest.approx(1.0, abs=1e-10)
    x, y, a1 = lindblad.resonant_intermediates(op, os_, G)
    assert x == G.G31 + G.G32 and y == G.G41 + G.G42 + G.G43
    # rho_44 = 4 x G21 |Op|^2 (4 |Op|^2 + x (x + y)) / A1
    assert a1 == pytest.approx(4 * x * G.G21 * op**2 * (4 * op**2 + x * (x + y)) / rho_n[3, 3].real, rel=1e-8)


def test_resonant_closed_form_structure():
    G = lindblad.FourLevelRates(0.02, 0.0, 0.04, 0.017, 0.0, 4e-4)
    rho = lindblad.appendix_resonant_ss(3e-3, 2e-3, G)
    assert rho[0, 1] == 0 and rho[1, 2] == 0 and rho[1, 3] == 0
    assert np.allclose(rho, rho.conj().T)
    weak = lindblad.appendix_resonant_ss(1e-9, 1e-9, G)
    assert weak[0, 0].real == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(NumericalError):
        lindblad.appendix_resonant_ss(0.0, 0.0, lindblad.FourLevelRates(0, 0, 0, 0, 0, 0))


@settings(max_examples=40, deadline=None)
@given(st.tuples(*[rates_st] * 3), st.floats(1e-4, 1.0), st.floats(-1, 1), st.floats(-1, 1))
def test_offres_closed_form_matches_null_space(rates, g, d0, d2):
    G = lindblad.LadderRates(*rates)
    eff = effective.TwoLevelEffective(d0, d2, g)
    rho_a = lindblad.appendix_offres_ss(g, d0, d2, G)
    rho_n = lindblad.null_space_steady(lindblad.ladder_liouvillian(eff, G), 3)
    assert np.max(np.abs(rho_a - rho_n)) <= 1e-8
    assert np.trace(rho_a).real == pytest.approx(1.0, abs=1e-10)
    a2 = lindblad.offres_normalizer(g, d0, d2, G)
    assert a2 == pytest.approx(4 * g**2 * G.G21 / rho_n[2, 2].real, rel=1e-8)


def test_offres_closed_form_examples(jumps06):
    G = lindblad.ladder_rates(jumps06)
    rho = lindblad.appendix_offres_ss(0.0, 1e-4, 2e-4, G)
    expected = np.zeros((3, 3))
    expected[0, 0] = 1
    assert np.allclose(rho, expected)
    rho = lindblad.appendix_offres_ss(1e-3, 1e-4, 1e-4, G)
    assert rho[2, 2].real / rho[1, 1].real == pytest.approx(0.5)
    with pytest.raises(NumericalError):
        lindblad.appendix_offres_ss(0.0, 0.0, 0.0, lindblad.LadderRates(0, 0, 0))


def test_g2_analytic():
    rho = np.diag([0.9, 0.1, 0.0, 0.0])
    assert lindblad.g2_ss_analytic(rho) == 0
    with pytest.raises(NumericalError):
        lindblad.g2_ss_analytic(np.diag([1.0, 0, 0, 0]))
    rho = np.diag([0.7, 0.2, 0.1, 0.0])
    assert lindblad.g2_ss_analytic(rho) == pytest.approx(0.2 / 0.16)
    assert lindblad.flux_ss_analytic(rho, 0.5) == pytest.approx(0.5 * 0.4)


def test_oracle_equivalence_grid(base06, spec06_10, space10):
    rates = DampingRates.uniform(GAMMA)
    jumps = lindblad.build_jumps(base06, space10, rates)
    G = lindblad.four_level_rates(jumps)
    for op in np.linspace(2e-4, 2e-3, 5):
        for eta in np.linspace(0.5, 2.0, 5) * spec06_10.eta_c:
            params = effective.resonant_drive(base06, spec06_10, op, eta=eta)
            sys = effective.lambda_system(params, spec06_10)
            rho_n = lindblad.lambda_liouvillian_steady(params, space10, rates, jumps)
            rho_a = lindblad.appendix_resonant_ss(sys.Omega_p_prime, sys.Omega_s_prime, G)
            assert np.max(np.abs(rho_n - rho_a)) <= 1e-8


def weak_drive_slope(quantity, lam, pumps, eta=None):
    space = hilbert.build_space(10)
    base = rabi.SystemParams(lam=lam)
    spec = rabi.rabi_spectrum(base, space)
    rates = DampingRates.uniform(GAMMA)
    values = []
    for op in pumps:
        rho = lindblad.lambda_liouvillian_steady(effective.resonant_drive(base, spec, op, eta=eta), space, rates)
        values.append(quantity(rho))
    return np.polyfit(np.log(pumps), np.log(values), 1)[0]


def test_flux_scaling_in_weak_drive_regime():
    # both drives well below the damping: Omega_s = eta_c Omega_p <= 7e-5
    slope = weak_drive_slope(lambda r: lindblad.flux_ss_analytic(r, GAMMA), 0.6, np.geomspace(1e-6, 1e-5, 7))
    assert slope == pytest.approx(2.0, abs=0.1)


def test_flux_scaling_pump_only():
    slope = weak_drive_slope(lambda r: lindblad.flux_ss_analytic(r, GAMMA), 0.6, np.geomspace(1e-6, 1e-4, 7), eta=0.0)
    assert slope == pytest.approx(2.0, abs=0.1)


def test_g2_scaling():
    slope = weak_drive_slope(lindblad.g2_ss_analytic, 0.5, np.geomspace(1e-5, 1e-4, 7))
    assert slope == pytest.approx(-2.0, abs=0.2)


def test_fig8_point_numeric_vs_analytic():
    space = hilbert.build_space(10)
    base = rabi.SystemParams(lam=0.5)
    spec = rabi.rabi_spectrum(base, space)
    rates = DampingRates.uniform(GAMMA)
    params = effective.resonant_drive(base, spec, 2e-3)
    g2_a = lindblad.g2_ss_analytic(lindblad.lambda_liouvillian_steady(params, space, rates))
    ss = lindblad.steady_state_numeric(params, space, rates)
    assert ss.converged
    assert ss.g2 == pytest.approx(g2_a, rel=0.10)
    x = lindblad.x_operators(lindblad.build_jumps(params, space, rates))
    assert lindblad.g2_equal_time(ss.rho, x) == pytest.approx(ss.g2, rel=1e-8)
    assert lindblad.photon_flux(ss.rho, x, rates) == pytest.approx(ss.phi_out, rel=1e-8)
