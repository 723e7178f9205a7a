import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, linalg, special

from gupband.boxspectrum import (NuDecomposition, OracleConvergenceError, PerturbationInvalid, WellSpec,
                                 asymptotic_B2, brute_force_oracle, ic_plus, ic_plus_expansion, is_plus,
                                 kinetic_on_exponential, kinetic_R_t, kinetic_R_t_cosine, kinetic_shift,
                                 lowest_eigenvalues, max_oracle_K, nu_average_R_t, nu_average_R_v,
                                 order_of_magnitude_table, potential_shift, projected_hamiltonian,
                                 pure_gup_shift, shift_report, solve_bound_states, wavefunction,
                                 _parity_blocks)
from gupband.deformation import ModelParams, UnsupportedError, builtin, kinetic_energy
from gupband.numerics import DomainError

KMM = builtin("kmm")
L = 1.0


def kmm_params(KL):
    return ModelParams.from_K(KMM, KL / L)


def level(w, p, n=1):
    return [lv for lv in solve_bound_states(w, p) if lv.n == n][0]


def test_wellspec_validation():
    with pytest.raises(DomainError):
        WellSpec(-1.0, 1.0)
    with pytest.raises(DomainError):
        WellSpec(1.0, -1.0)
    with pytest.raises(DomainError):
        WellSpec(1.0, 1.0, level_max=0)


def test_from_kappa_L():
    p = kmm_params(1e3)
    w = WellSpec.from_kappa_L(50.0, 2.0, p)
    assert math.isclose(math.sqrt(2 * p.mass * w.V0) * w.L / p.hbar, 50.0, rel_tol=1e-14)


def test_infinite_well_levels():
    p = kmm_params(1e4)
    lv = solve_bound_states(WellSpec(math.inf, L, 4), p)
    assert [x.n for x in lv] == [1, 2, 3, 4]
    assert [x.branch for x in lv] == ["plus", "minus", "plus", "minus"]
    for x in lv:
        assert x.k * L / math.pi == x.n
        assert x.residual < 1e-12


def test_finite_well_residual_and_quantization():
    p = kmm_params(1e4)
    w = WellSpec.from_kappa_L(20.0, L, p, level_max=4)
    for lv in solve_bound_states(w, p):
        assert lv.residual < 1e-12
        assert abs(lv.k * L - (lv.n * math.pi - 2 * math.atan(lv.k / lv.kappa))) < 1e-12


def test_shallow_well_skips_unbound_levels():
    p = kmm_params(1e4)
    w = WellSpec.from_kappa_L(4.0, L, p, level_max=3)
    with pytest.warns(UserWarning):
        lv = solve_bound_states(w, p)
    assert [x.n for x in lv] == [1, 2]


@pytest.mark.parametrize("kappa_L", [1e2, 1e3, 1e4])
def test_deep_well_limit(kappa_L):
    p = kmm_params(1e5)
    w = WellSpec.from_kappa_L(kappa_L, L, p, level_max=2)
    for lv in solve_bound_states(w, p):
        approx = lv.n * math.pi * (1 - 2 / kappa_L)
        assert abs(lv.k * L - approx) < 10 * lv.n * math.pi / kappa_L ** 2


@pytest.mark.parametrize("n", [1, 2])
def test_B_squared_asymptotics_both_branches(n):
    p = kmm_params(1e5)
    for kappa_L in (300.0, 3000.0):
        lv = level(WellSpec.from_kappa_L(kappa_L, L, p, level_max=2), p, n)
        err = abs(abs(lv.B) ** 2 - asymptotic_B2(lv)) * 2 * L
        assert err < 10 * (n * math.pi / kappa_L) ** 3 + 4 * (1 / kappa_L) ** 2 * (n * math.pi / kappa_L)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_wavefunction_normalized(n):
    p = kmm_params(1e4)
    lv = level(WellSpec.from_kappa_L(15.0, L, p, level_max=3), p, n)
    f = lambda x: abs(wavefunction(lv, x)) ** 2
    total = sum(integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
                for a, b in ((-np.inf, 0), (0, L), (L, np.inf)))
    assert abs(total - 1) < 1e-12


def test_wavefunction_continuous_with_continuous_derivative():
    p = kmm_params(1e4)
    for n in (1, 2):
        lv = level(WellSpec.from_kappa_L(15.0, L, p, level_max=2), p, n)
        h = 1e-7
        for edge in (0.0, L):
            assert abs(wavefunction(lv, edge - 1e-13) - wavefunction(lv, edge + 1e-13)) < 1e-10
            left = (wavefunction(lv, edge - h) - wavefunction(lv, edge - 2 * h)) / h
            right = (wavefunction(lv, edge + 2 * h) - wavefunction(lv, edge + h)) / h
            assert abs(left - right) < 1e-4 * abs(lv.B) * lv.k


def test_wavefunction_parity_about_center():
    p = kmm_params(1e4)
    x = np.linspace(-0.3, 0.5, 9)
    for n in (1, 2):
        lv = level(WellSpec.from_kappa_L(15.0, L, p, level_max=2), p, n)
        assert np.allclose(wavefunction(lv, L - x), lv.sign * wavefunction(lv, x), atol=1e-13)


def test_R_h_zero_for_identity():
    d = builtin("identity")
    p = ModelParams.for_deformation(d, 1e-3, K=1e4)
    lv = level(WellSpec(math.inf, L), p)
    assert pure_gup_shift(lv, d, p) == (0.0, 0.0)


def test_R_h_small_v_expansion():
    # kmm: (tan v/v)^2 - 1 = (2/3) v^2 + O(v^4), v = alpha hbar k
    n = 2
    p = ModelParams.for_deformation(KMM, 1e-3 / math.pi)
    lv = level(WellSpec(math.inf, L, 2), p, n)
    v = p.alpha * p.hbar * lv.k
    _, R_h = pure_gup_shift(lv, KMM, p)
    assert abs(R_h / (2 * v * v / 3) - 1) < 1e-5


def test_R_h_finite_well_tends_to_deep_limit():
    # the tails probe momenta ~ hbar kappa; once alpha hbar kappa >> 1 the continued
    # eigenvalue saturates and their share falls off like 1/(kappa L)
    p = ModelParams.for_deformation(KMM, 1e-2)
    _, R_inf = pure_gup_shift(level(WellSpec(math.inf, L), p), KMM, p)
    devs = [abs(pure_gup_shift(level(WellSpec.from_kappa_L(kl, L, p), p), KMM, p)[1] - R_inf)
            for kl in (300.0, 1e4, 1e5, 1e6)]
    assert devs[1] < devs[0]
    assert math.isclose(devs[2] / devs[3], 10.0, rel_tol=1e-3)


def test_perturbation_invalid_near_edge():
    p = ModelParams.for_deformation(KMM, 0.4)
    lv = level(WellSpec(math.inf, L, 3), p, 3)
    with pytest.raises(PerturbationInvalid):
        pure_gup_shift(lv, KMM, p)
    p2 = ModelParams.for_deformation(KMM, 0.1)
    with pytest.raises(PerturbationInvalid):
        pure_gup_shift(level(WellSpec(math.inf, L, 4), p2, 4), KMM, p2)


def test_finite_well_needs_continuation():
    d = dataclasses.replace(KMM, continuation=None)
    p = ModelParams.for_deformation(d, 1e-2)
    lv = level(WellSpec.from_kappa_L(30.0, L, p), p)
    with pytest.raises(UnsupportedError):
        pure_gup_shift(lv, d, p)


def test_even_levels_have_no_potential_shift():
    p = kmm_params(1e4)
    lv = level(WellSpec(math.inf, L, 2), p, 2)
    assert potential_shift(lv, p) == (0.0, 0.0)
    assert nu_average_R_v(lv, p) == 0.0


@pytest.mark.parametrize("KL", [300.0, 1e3, 1234.5, 1e4])
def test_ic_plus_against_cosine_integral(KL):
    nd = NuDecomposition.from_KL(KL)
    A = nd.KL
    b = math.pi
    si_hi, ci_hi = special.sici(A + b)
    si_lo, ci_lo = special.sici(A - b)
    ref = math.log((A + b) / (A - b)) - (ci_hi - ci_lo)
    assert abs(ic_plus(math.pi / L, L, nd) - ref) < 1e-10 * abs(ref) + 1e-15
    assert abs(is_plus(math.pi / L, L, nd) - (si_hi - si_lo)) < 1e-12


def test_ic_plus_rejects_kL_beyond_KL():
    with pytest.raises(PerturbationInvalid):
        ic_plus(10.0, L, NuDecomposition.from_KL(5.0))


def test_ic_plus_expansion_formula():
    # nu = 1/4: 4 sin^2(pi/4) = 2 and cos(pi/2) = 0
    assert math.isclose(ic_plus_expansion(1.0, 100.0, 1, 0.25), 0.02, rel_tol=1e-14)
    assert math.isclose(ic_plus_expansion(1.0, 100.0, 2, 0.0), 0.04 * math.pi ** 2, rel_tol=1e-14)


def test_R_v_average_approaches_four_over_KL_pi():
    KL = 1e4
    p = kmm_params(KL)
    lv = level(WellSpec(math.inf, L), p)
    avg = nu_average_R_v(lv, p)
    assert abs(avg / (4 / (KL * math.pi)) - 1) < 1e-3


@pytest.mark.parametrize("KL", [500.0, 1e3, 4321.0])
def test_R_t_against_scipy_si(KL):
    nd = NuDecomposition.from_KL(KL)
    ref = 2 / math.pi * special.sici(nd.KL / 2)[0] - 1
    assert abs(kinetic_R_t(nd) - ref) < 1e-13


@pytest.mark.parametrize("nu", [0.0, 0.3, 0.5, 0.85])
def test_R_t_leading_asymptotics(nu):
    # tail(z) = cos z/z + O(z^-2), so R_t = -(4/(KL pi)) cos(2 pi nu') + O(KL^-2)
    nd = NuDecomposition.from_parts(10 ** 6, nu)
    lead = -4 / (nd.KL * math.pi) * math.cos(2 * math.pi * nd.nu_prime)
    assert abs(kinetic_R_t(nd) - lead) < 10 / nd.KL ** 2


def test_R_t_cosine_form_offset_by_constant():
    # the cosine form differs from the exact value by 4/(KL pi) at every nu'
    for nu in (0.0, 0.4, 0.9):
        nd = NuDecomposition.from_parts(10 ** 6, nu)
        offset = kinetic_R_t_cosine(nd) - kinetic_R_t(nd)
        assert abs(offset - 4 / (nd.KL * math.pi)) < 10 / nd.KL ** 2


def test_kinetic_shift_nonzero_for_even_levels():
    p = kmm_params(1e3 + 0.5)
    lv = level(WellSpec(math.inf, L, 2), p, 2)
    t, R_t = kinetic_shift(lv, KMM, p)
    assert t != 0 and R_t != 0
    _, R_h = pure_gup_shift(lv, KMM, p)
    assert math.isclose(t, R_t * (1 + R_h) * lv.eps, rel_tol=1e-15)


def test_R_t_average_is_small():
    assert abs(nu_average_R_t(1e4)) < 1e-6


@given(st.integers(0, 10 ** 9), st.floats(0, 0.999999))
@settings(max_examples=60, deadline=None)
def test_nu_decomposition_consistent(N, nu):
    nd = NuDecomposition.from_parts(N, nu)
    assert 0 <= nd.nu_prime < 1
    # 2 (N' + nu') = N + nu exactly in integer and fractional parts
    assert 2 * nd.N_prime + math.floor(2 * nd.nu_prime) == N
    assert abs((2 * nd.nu_prime) % 1 - nu) < 1e-12
    assert math.isclose(nd.KL, nd.KL_prime, rel_tol=1e-15)


def test_nu_decomposition_from_KL():
    nd = NuDecomposition.from_KL(2 * math.pi * 7.25)
    assert nd.N == 7 and abs(nd.nu - 0.25) < 1e-12
    assert nd.N_prime == 3 and abs(nd.nu_prime - 0.625) < 1e-12
    with pytest.raises(DomainError):
        NuDecomposition.from_KL(-1.0)
    with pytest.raises(DomainError):
        NuDecomposition.from_parts(3, 1.0)


def test_kinetic_on_exponential():
    p = ModelParams.for_deformation(KMM, 0.1)
    s = 2.0
    assert math.isclose(kinetic_on_exponential(KMM, p, s, "oscillatory"), kinetic_energy(KMM, p, s),
                        rel_tol=1e-14)
    v = p.alpha * p.hbar * s
    assert math.isclose(kinetic_on_exponential(KMM, p, s, "decaying"),
                        -math.tanh(v) ** 2 / (2 * p.mass * p.alpha ** 2), rel_tol=1e-14)
    ident = builtin("identity")
    pi = ModelParams.for_deformation(ident, 0.1, K=10.0)
    assert kinetic_on_exponential(ident, pi, s, "decaying") == pytest.approx(-2.0)
    with pytest.raises(DomainError):
        kinetic_on_exponential(KMM, p, s, "growing")
    with pytest.raises(UnsupportedError):
        kinetic_on_exponential(dataclasses.replace(KMM, continuation=None), p, s, "decaying")


def test_order_table():
    rows = order_of_magnitude_table()
    assert [r.L for r in rows] == [1e-15, 1e-10, 1e-6]
    for r in rows:
        assert math.isclose(r.lP_over_L_sq, r.lP_over_L ** 2, rel_tol=1e-14)
        # 1/(KL) = 2 alpha hbar/(pi L) = l_P/(pi^2 L)
        assert math.isclose(r.inv_KL, r.lP_over_L / math.pi ** 2, rel_tol=1e-14)
        assert r.lP_over_L_sq < r.inv_KL


def test_potential_shift_dominates_pure_gup_shift():
    ah = 1e-4
    p = ModelParams.for_deformation(KMM, ah)
    lv = level(WellSpec(math.inf, L), p)
    _, R_h = pure_gup_shift(lv, KMM, p)
    assert nu_average_R_v(lv, p) / R_h > 0.1 * L / ah


def test_shift_report_structure():
    p = kmm_params(1e4)
    rep = shift_report(WellSpec(math.inf, L, 4), KMM, p)
    assert [r.n for r in rep.levels] == [1, 2, 3, 4]
    for r in rep.levels:
        assert math.isclose(r.total, r.h_nn + r.v_nn + r.t_nn)
        if r.n % 2 == 0:
            assert r.v_nn == 0.0 and r.I_c_plus == 0.0
    assert rep.average_target == pytest.approx(4 / (1e4 * math.pi))


def test_small_KL_warns():
    p = kmm_params(50.0)
    with pytest.warns(UserWarning):
        shift_report(WellSpec(math.inf, L, 1), KMM, p)


# oracle ---------------------------------------------------------------------

def small_oracle_setup(kappa_L=20.0, KL=120.0):
    p = kmm_params(KL)
    return WellSpec.from_kappa_L(kappa_L, L, p, level_max=3), p


def test_projected_hamiltonian_hermitian():
    w, p = small_oracle_setup()
    k, H = projected_hamiltonian(w, KMM, p, 8 * L)
    assert np.max(np.abs(H - H.conj().T)) < 1e-12 * np.max(np.abs(H))
    assert np.all(np.abs(k) < p.K)


def test_parity_blocks_reproduce_full_spectrum():
    w, p = small_oracle_setup()
    D = 8 * L
    _, H = projected_hamiltonian(w, KMM, p, D)
    full = linalg.eigh(H, eigvals_only=True)
    even, odd = _parity_blocks(w, KMM, p, D)
    blocks = np.sort(np.concatenate([linalg.eigvalsh(even), linalg.eigvalsh(odd)]))
    assert np.allclose(blocks, full, rtol=1e-10, atol=1e-9 * np.max(np.abs(full)))


def test_lowest_eigenvalues_against_direct_solver():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(40, 40))
    H = X @ X.T + np.diag(np.geomspace(1, 1e4, 40))
    ref = linalg.eigvalsh(H)[:5]
    assert np.allclose(lowest_eigenvalues(H, 5), ref, rtol=1e-11)
    # indefinite matrix: falls back to the direct route
    H2 = H - 100 * np.eye(40)
    assert np.allclose(lowest_eigenvalues(H2, 3), linalg.eigvalsh(H2)[:3], rtol=1e-11)
    assert lowest_eigenvalues(H, 0).size == 0


def test_shallow_well_matches_periodic_perturbation_theory():
    # first order: V~(0) on the constant mode; the +-k1 pair splits by +-|V~(2)|
    p = kmm_params(120.0)
    V0 = 1e-4
    w = WellSpec(V0, L, level_max=3)
    D = 8 * L
    res = brute_force_oracle(w, KMM, p, domain_length=D, check=False)
    k1 = 2 * math.pi / D
    v0 = V0 * (1 - L / D)
    split = abs(2 * V0 * math.sin(2 * k1 * L / 2) / (2 * k1 * D))
    T1 = kinetic_energy(KMM, p, k1)
    first = np.array([v0, T1 + v0 - split, T1 + v0 + split])
    assert np.allclose(res.energies, first, rtol=0, atol=10 * V0 ** 2 / T1)


def test_oracle_rejects_infinite_well_and_short_domain():
    p = kmm_params(120.0)
    with pytest.raises(DomainError):
        projected_hamiltonian(WellSpec(math.inf, L), KMM, p, 8 * L)
    w, _ = small_oracle_setup()
    with pytest.raises(DomainError):
        brute_force_oracle(w, KMM, p, domain_length=0.5 * L)


def test_oracle_converges_on_domain_doubling():
    w, p = small_oracle_setup()
    res = brute_force_oracle(w, KMM, p, rel_tol=1e-9)
    assert res.converged and res.max_rel_change < 1e-9
    assert np.all(np.diff(res.energies) > 0)


def test_oracle_strict_convergence_error():
    w, p = small_oracle_setup(kappa_L=3.0)
    with pytest.raises(OracleConvergenceError):
        brute_force_oracle(w, KMM, p, domain_length=1.2 * L, n_levels=1, rel_tol=1e-12)
    res = brute_force_oracle(w, KMM, p, domain_length=1.2 * L, n_levels=1, rel_tol=1e-12, strict=False)
    assert not res.converged


def test_oracle_lowers_K_past_basis_cap():
    w, p = small_oracle_setup(KL=2000.0)
    with pytest.warns(UserWarning):
        res = brute_force_oracle(w, KMM, p, basis_size=513, check=False)
    assert res.basis_size <= 513
    assert res.params.K < p.K
    assert math.isclose(res.params.K, max_oracle_K(L, max_basis=513), rel_tol=1e-14)


def test_levels_increase_with_n():
    p = kmm_params(1e4)
    eps = [lv.eps for lv in solve_bound_states(WellSpec.from_kappa_L(40.0, L, p, 6), p)]
    assert len(eps) == 6 and np.all(np.diff(eps) > 0)


def test_free_well_binds_nothing():
    p = kmm_params(1e3)
    with pytest.warns(UserWarning):
        assert solve_bound_states(WellSpec(0.0, L, 2), p) == []


def test_oracle_free_particle_spectrum():
    p = kmm_params(40.0)
    D = 8 * L
    r = brute_force_oracle(WellSpec(0.0, L, 5), KMM, p, domain_length=D, check=False)
    k = 2 * math.pi * np.array([0, 1, 1, 2, 2]) / D
    assert np.allclose(r.energies, kinetic_energy(KMM, p, k), rtol=1e-10, atol=1e-12)


def test_identity_oracle_deep_well_ground_state():
    d = builtin("identity")
    p = ModelParams.for_deformation(d, 0.02, K=max_oracle_K(L))
    w = WellSpec.from_kappa_L(3000.0, L, p, 1)
    r = brute_force_oracle(w, d, p, check=False)
    assert abs(r.energies[0] / (math.pi ** 2 / 2) - 1) < 1e-3
