"""Closed-form evolution against hand-derived Rabi formulas and a matrix-exponential oracle."""

import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

import cpb_cavity.evolution as evolution
from cpb_cavity import (
    ClosedFormInconsistency,
    DomainError,
    ExcitedFock,
    FigureThree,
    GroundFock,
    HilbertSpace,
    SuperposedQubitFock,
    SweepError,
    build_rwa_hamiltonian,
    closed_form_coeffs,
    closed_form_rho,
    figure_params,
    oracle_propagate,
    sweep,
)
from cpb_cavity.evolution import RwaPropagator, parallel_map

TAUS = np.linspace(0.0, 20.0, 81)


def expm_rho(params, init, tau, space):
    """Independent oracle: dense matrix exponential of the RWA Hamiltonian."""
    psi0 = init.state_vector(space).amplitudes
    psi = scipy.linalg.expm(-1j * tau * build_rwa_hamiltonian(params, space)) @ psi0
    return np.outer(psi, psi.conj())


class TestInitialStates:
    def test_figure_three_normalization(self):
        s = FigureThree(0.5, 1)
        assert s.raw_weights == (0.5, 0.5)
        assert sum(w**2 for w in s.raw_weights) == pytest.approx(0.5)
        alpha, beta = s.qubit_amplitudes()
        assert_allclose([alpha, beta], [1 / math.sqrt(2)] * 2, rtol=1e-15)

    def test_superposed_normalized(self):
        s = SuperposedQubitFock(3.0, 4.0j, 2)
        assert_allclose([s.alpha, s.beta], [0.6, 0.8j])

    @pytest.mark.parametrize("ctor", [lambda: GroundFock(-1), lambda: ExcitedFock(1.5),
                                      lambda: SuperposedQubitFock(0, 0, 1), lambda: FigureThree(0.5, -2)])
    def test_invalid(self, ctor):
        with pytest.raises(DomainError):
            ctor()

    def test_state_vector_places_amplitudes(self):
        sp = HilbertSpace(4)
        v = SuperposedQubitFock(1, 1j, 2).state_vector(sp).amplitudes
        assert_allclose(v[sp.index("g", 2)], 1 / math.sqrt(2))
        assert_allclose(v[sp.index("e", 2)], 1j / math.sqrt(2))
        assert np.count_nonzero(v) == 2


class TestCoefficients:
    @pytest.mark.parametrize("tau", [0.0, 0.7, 3.1, 9.9])
    @pytest.mark.parametrize("delta", [0.0, 0.5, 1.0])
    def test_identities(self, tau, delta):
        k = closed_form_coeffs(figure_params(2.5, delta), 1, tau)
        assert k.a_coef == pytest.approx(k.c_np1**2 + delta**2 / 4 * k.s_np1**2, abs=0)
        # survival amplitude times its conjugate reproduces A
        assert abs(k.stay_excited()) ** 2 == pytest.approx(k.a_coef, abs=1e-15)
        assert k.b_coef == pytest.approx(k.stay_excited() ** 2, abs=1e-15)

    @pytest.mark.parametrize("tau", [0.3, 1.7, 6.0])
    def test_resonant_forms(self, tau):
        k = closed_form_coeffs(figure_params(2.5, 0.0), 1, tau)
        assert k.a_coef == pytest.approx(k.c_np1**2)
        assert k.b_coef == pytest.approx(k.c_np1**2)
        assert k.c_coef == pytest.approx(1j * k.s_n * k.c_np1)

    def test_standard_argument(self, resonant):
        tau = 1.3
        k = closed_form_coeffs(resonant, 2, tau)
        g = resonant.gamma
        assert k.c_n == pytest.approx(math.cos(g * math.sqrt(2) * tau))
        assert k.s_n == pytest.approx(math.sin(g * math.sqrt(2) * tau) / (g * math.sqrt(2)))

    def test_zero_frequency_sector_is_finite(self):
        # n = 0 at resonance: mu_0 = 0, S_0 = tau
        k = closed_form_coeffs(figure_params(2.5, 0.0), 0, 2.0)
        assert k.mu_n == 0 and k.s_n == pytest.approx(2.0) and k.c_n == 1.0

    def test_unknown_mu_mode(self, resonant):
        with pytest.raises(DomainError):
            closed_form_coeffs(resonant, 1, 1.0, "bogus")


class TestRabiOracles:
    """Populations against textbook Rabi formulas."""

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_resonant_ground(self, resonant, n):
        for tau in np.linspace(0, 10, 23):
            rho = closed_form_rho(resonant, GroundFock(n), tau)
            p = rho.populations()
            assert p[f"e,{n - 1}"] == pytest.approx(math.sin(resonant.gamma * math.sqrt(n) * tau) ** 2, abs=1e-14)
            assert p[f"g,{n}"] + p[f"e,{n - 1}"] == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_resonant_excited(self, resonant, n):
        for tau in np.linspace(0, 10, 23):
            p = closed_form_rho(resonant, ExcitedFock(n), tau).populations()
            assert p[f"g,{n + 1}"] == pytest.approx(math.sin(resonant.gamma * math.sqrt(n + 1) * tau) ** 2,
                                                   abs=1e-14)

    @pytest.mark.parametrize("delta", [0.5, 1.0, -0.7])
    def test_detuned_transfer(self, delta):
        p = figure_params(2.5, delta)
        g = p.gamma
        mu = math.sqrt(delta**2 / 4 + g**2)
        for tau in np.linspace(0, 12, 31):
            pops = closed_form_rho(p, GroundFock(1), tau).populations()
            assert pops["e,0"] == pytest.approx(g**2 / mu**2 * math.sin(mu * tau) ** 2, abs=1e-14)

    def test_paper_literal_time_scale(self, resonant):
        """Paper-literal mode at resonance: transfer = sin^2(gamma^(3/2) sqrt(n) tau)."""
        g = resonant.gamma
        for tau in np.linspace(0, 10, 17):
            pops = closed_form_rho(resonant, GroundFock(1), tau, "paper_literal").populations()
            assert pops["e,0"] == pytest.approx(math.sin(g**1.5 * tau) ** 2, abs=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_periodicity(self, resonant, n):
        period = math.pi / (resonant.gamma * math.sqrt(n))
        for tau in (0.2, 1.1, 2.9):
            a = closed_form_rho(resonant, GroundFock(n), tau).populations()
            b = closed_form_rho(resonant, GroundFock(n), tau + period).populations()
            assert_allclose(list(a.values()), list(b.values()), atol=1e-12)


class TestOracle:
    @pytest.mark.parametrize("init", [GroundFock(1), ExcitedFock(2), FigureThree(0.5, 1),
                                      SuperposedQubitFock(0.3, 0.2 - 0.5j, 3)])
    def test_eigendecomposition_matches_expm(self, detuned, init):
        sp = HilbertSpace(7)
        psi0 = init.state_vector(sp)
        prop = RwaPropagator(detuned, sp)
        for tau in (0.0, 0.9, 4.4, 17.0):
            assert_allclose(prop.rho(psi0, tau).matrix, expm_rho(detuned, init, tau, sp), atol=1e-12)

    def test_oracle_propagate_convenience(self, resonant, space1):
        rho = oracle_propagate(resonant, space1, GroundFock(1).state_vector(space1), 1.0)
        assert rho.populations()["e,0"] == pytest.approx(math.sin(resonant.gamma) ** 2)

    def test_norm_preserved(self, detuned):
        sp = HilbertSpace(6)
        prop = RwaPropagator(detuned, sp)
        psi0 = FigureThree(0.5, 2).state_vector(sp).amplitudes
        for tau in np.linspace(0, 50, 11):
            assert np.linalg.norm(prop.evolve(psi0, tau)) == pytest.approx(1.0, abs=1e-12)


class TestModeAgreement:
    @pytest.mark.parametrize("cjg", [2.5, 0.4, 5.0])
    @pytest.mark.parametrize("delta", [0.0, 0.5, 1.0])
    @pytest.mark.parametrize("init", [GroundFock(1), ExcitedFock(1)])
    def test_closed_form_equals_oracle(self, cjg, delta, init):
        p = figure_params(cjg, delta)
        sp = HilbertSpace.for_photons(1)
        closed = sweep(p, init, TAUS, "closed_form", space=sp)
        oracle = sweep(p, init, TAUS, "oracle", space=sp)
        for a, b in zip(closed, oracle):
            assert np.max(np.abs(a.matrix - b.matrix)) < 1e-8

    def test_worked_example(self):
        """Delta = 1, excited start, tau = 2."""
        p = figure_params(2.5, 1.0)
        sp = HilbertSpace.for_photons(1)
        a = closed_form_rho(p, ExcitedFock(1), 2.0, space=sp)
        b = oracle_propagate(p, sp, ExcitedFock(1).state_vector(sp), 2.0)
        assert_allclose(a.matrix, b.matrix, atol=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(
        cjg=st.floats(0.1, 10.0),
        delta=st.floats(-1.0, 2.0),
        tau=st.floats(0.0, 30.0),
        n=st.integers(0, 4),
        theta=st.floats(0.0, math.pi),
        phi=st.floats(0.0, 2 * math.pi),
    )
    def test_superpositions_agree(self, cjg, delta, tau, n, theta, phi):
        """Sector phases make the closed form exact for any qubit superposition."""
        p = figure_params(cjg, delta, n)
        init = SuperposedQubitFock(math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * phi), n)
        sp = HilbertSpace.for_photons(n)
        a = closed_form_rho(p, init, tau, space=sp).matrix
        assert np.max(np.abs(a - expm_rho(p, init, tau, sp))) < 1e-9

    def test_paper_literal_disagrees(self, resonant, space1):
        a = closed_form_rho(resonant, GroundFock(1), 2.0, "paper_literal", space1)
        b = oracle_propagate(resonant, space1, GroundFock(1).state_vector(space1), 2.0)
        assert np.max(np.abs(a.matrix - b.matrix)) > 1e-2


class TestInvariants:
    @pytest.mark.parametrize("mode", ["closed_form", "oracle"])
    @pytest.mark.parametrize("mu_mode", ["standard", "paper_literal"])
    def test_unitarity_purity_excitation(self, detuned, mode, mu_mode):
        sp = HilbertSpace.for_photons(1)
        nexc = sp.excitation_number()
        rhos = sweep(detuned, FigureThree(0.5, 1), TAUS, mode, mu_mode, sp)
        e0 = rhos[0].expectation(nexc).real
        for r in rhos:
            assert abs(np.trace(r.matrix).real - 1) < 1e-10
            assert r.eigenvalues()[0] > -1e-10
            assert r.purity() > 1 - 1e-9
            assert r.expectation(nexc).real == pytest.approx(e0, abs=1e-10)

    def test_safeguard_fires(self, monkeypatch, resonant):
        def leaky(params, init, tau, mu_mode="standard"):
            return {("g", 1): 1.1 + 0j}

        monkeypatch.setattr(evolution, "closed_form_amplitudes", leaky)
        with pytest.raises(ClosedFormInconsistency) as err:
            closed_form_rho(resonant, GroundFock(1), 1.0)
        assert err.value.deviation == pytest.approx(0.21)

    def test_small_deviation_renormalized(self, monkeypatch, resonant):
        monkeypatch.setattr(evolution, "closed_form_amplitudes",
                            lambda *a, **k: {("g", 1): 1 + 1e-8 + 0j})
        rho = closed_form_rho(resonant, GroundFock(1), 1.0)
        assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-15)

    def test_negative_tau(self, resonant):
        with pytest.raises(DomainError):
            closed_form_rho(resonant, GroundFock(1), -1.0)


class TestSweep:
    @pytest.mark.parametrize("grid", [[], [0.0, 0.0], [1.0, 0.5], [-1.0, 0.0], [0.0, np.nan]])
    def test_bad_grid(self, resonant, grid):
        with pytest.raises(DomainError):
            sweep(resonant, GroundFock(1), grid)

    def test_bad_mode(self, resonant):
        with pytest.raises(DomainError):
            sweep(resonant, GroundFock(1), [0.0], mode="magic")

    def test_point_failure_carries_tau(self, resonant, monkeypatch):
        def boom(params, init, tau, mu_mode="standard"):
            if tau > 1:
                raise ValueError("boom")
            return {("g", 1): 1 + 0j}

        monkeypatch.setattr(evolution, "closed_form_amplitudes", boom)
        with pytest.raises(SweepError) as err:
            sweep(resonant, GroundFock(1), [0.0, 0.5, 1.5, 2.0], "closed_form")
        assert err.value.tau == 1.5
        assert isinstance(err.value.cause, ValueError)

    def test_workers_do_not_change_results(self, detuned):
        a = sweep(detuned, FigureThree(0.5, 1), TAUS, workers=1)
        b = sweep(detuned, FigureThree(0.5, 1), TAUS, workers=4)
        for x, y in zip(a, b):
            assert np.array_equal(x.matrix, y.matrix)

    def test_parallel_map_preserves_order(self):
        assert parallel_map(lambda x: x * x, list(range(50)), workers=8) == [x * x for x in range(50)]
        assert parallel_map(str, [1], workers=None) == ["1"]
