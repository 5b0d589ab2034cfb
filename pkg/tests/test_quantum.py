import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from susychain import BacklundChain, SeedSpec
from susychain.analysis import TwoWellParams, wronskian_sign_changes
from susychain.chain import PotentialLevel
from susychain.errors import AsymptoteNotReached, SingularPotential
from susychain.quantum import bound_states, numerov_integrate, scattering


def zero(x):
    return np.zeros_like(x)


def sech2(x):
    return -1.0 / np.cosh(x) ** 2


@pytest.fixture(scope="module")
def v2_two_well():
    return PotentialLevel(BacklundChain(TwoWellParams(1.0, 0.5, 0.0, 0.0).seeds()))


class TestNumerov:
    def test_free_sine(self):
        k = 1.3
        length = 10 * 2 * math.pi / k
        x, psi = numerov_integrate(zero, 0.0, length, 1e-3, 0.0, k, k * k / 2)
        assert np.max(np.abs(psi - np.sin(k * x))) < 1e-8

    def test_poschl_teller_ground_state(self):
        x0 = -20.0
        s0 = 1 / math.cosh(x0)
        x, psi = numerov_integrate(sech2, x0, 0.0, 1e-3, s0, -s0 * math.tanh(x0), -0.5)
        exact = 1 / np.cosh(x)
        assert np.max(np.abs(psi - exact)) / np.max(exact) < 1e-6

    def test_leftward_integration(self):
        k = 0.7
        x, psi = numerov_integrate(zero, 0.0, -20.0, 1e-3, 0.0, k, k * k / 2)
        assert x[0] == 0.0 and x[-1] == -20.0
        assert np.max(np.abs(psi - np.sin(k * x))) < 1e-8

    def test_fourth_order_convergence(self):
        k = 2.0
        errs = []
        for step in (2e-2, 1e-2):
            x, psi = numerov_integrate(zero, 0.0, 10.0, step, 0.0, k, k * k / 2)
            errs.append(abs(psi[-1] - math.sin(k * x[-1])))
        assert 12 < errs[0] / errs[1] < 20

    def test_complex_initial_data(self):
        k = 1.0
        x, psi = numerov_integrate(zero, 0.0, 5.0, 1e-3, 1 + 0j, 1j * k, 0.5)
        assert np.iscomplexobj(psi)
        assert np.max(np.abs(psi - np.exp(1j * k * x))) < 1e-8

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError):
            numerov_integrate(zero, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0)


class TestScattering:
    def test_free_particle(self):
        res = scattering(zero, 1.0, (-10, 10))
        assert res.t_sq == pytest.approx(1.0, abs=1e-10)
        assert res.r_sq < 1e-15

    @pytest.mark.parametrize("energy", [0.1, 0.5, 2.0])
    def test_single_well_reflectionless(self, energy):
        res = scattering(PotentialLevel(BacklundChain([SeedSpec("R", 1.0, 0.0)])), energy)
        assert res.r_sq < 1e-6
        assert res.flux_error < 1e-6

    def test_two_well_reflectionless(self, v2_two_well):
        res = scattering(v2_two_well, 0.5)
        assert res.r_sq < 1e-5
        assert res.flux_error < 1e-6

    def test_non_transparent_well_reflects(self):
        # -1.5 sech^2 has lambda(lambda+1)/2 = 1.5 with non-integer lambda
        res = scattering(lambda x: 1.5 * sech2(x), 0.3)
        assert res.r_sq > 1e-3
        assert res.flux_error < 1e-6

    @settings(deadline=None, max_examples=10)
    @given(energy=st.floats(0.05, 5.0))
    def test_flux_conservation(self, energy):
        res = scattering(lambda x: 0.7 * sech2(x - 1.0), energy)
        assert res.flux_error < 1e-6

    def test_grid_independence(self, v2_two_well):
        a = scattering(v2_two_well, 0.8, step=1e-3)
        b = scattering(v2_two_well, 0.8, step=5e-4)
        assert abs(a.t_sq - b.t_sq) < 1e-8

    def test_asymptote_not_reached(self):
        with pytest.raises(AsymptoteNotReached):
            scattering(lambda x: sech2(x / 10), 1.0)

    def test_singular_potential(self):
        p = TwoWellParams(0.5, 1.0, 5.0, 5.0)
        with pytest.raises(SingularPotential) as info:
            scattering(PotentialLevel(BacklundChain(p.seeds())), 1.0)
        _, locs = wronskian_sign_changes(p.seeds(), -40, 40)
        assert info.value.x == pytest.approx(locs[0], abs=1e-3)

    def test_nonfinite_potential(self):
        with pytest.raises(SingularPotential):
            scattering(lambda x: np.where(np.abs(x) < 1e-3, np.inf, 0.0), 1.0)

    def test_rejects_non_positive_energy(self):
        with pytest.raises(ValueError):
            scattering(zero, 0.0)


class TestBoundStates:
    def test_single_well(self):
        res = bound_states(PotentialLevel(BacklundChain([SeedSpec("R", 1.0, 0.0)])))
        assert len(res.energies) == 1
        assert res.energies[0] == pytest.approx(-0.5, abs=1e-6)
        assert res.node_counts == [0]

    def test_two_well(self, v2_two_well):
        res = bound_states(v2_two_well)
        np.testing.assert_allclose(res.energies, [-0.5, -0.125], atol=1e-6)
        assert res.node_counts == [0, 1]

    def test_three_level_chain(self):
        seeds = [SeedSpec("R", 0.5, 1.0), SeedSpec("S", 1.0, 0.0), SeedSpec("R", 1.5, -0.5)]
        res = bound_states(PotentialLevel(BacklundChain(seeds)))
        np.testing.assert_allclose(res.energies, [-1.125, -0.5, -0.125], atol=1e-6)
        assert res.node_counts == [0, 1, 2]

    def test_free_particle_has_none(self):
        assert bound_states(zero, search=(-1.0, -1e-6)).energies == []

    def test_empty_search_window(self):
        assert bound_states(sech2, search=(-0.1, -0.2)).energies == []
