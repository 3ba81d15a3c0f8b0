import numpy as np
import pytest
from scipy import integrate, special

from prunetree.exceptions import DomainError, NoClosedFormError, TreeSizeError
from prunetree.gw import (
    ClosedForm, GwParams, growth_probability, interior_count_pmf,
    interior_mass_cdf, interior_mass_pdf, leaf_count_pmf, length_pdf,
    make_rng, pruned_rate, sample_exp_excursion, sample_gw,
    sample_gw_length, sample_random_sink, sink_mass_cdf, sink_mass_pdf,
    survival_prob)
from prunetree.harris import level_set_tree
from prunetree.special import bessel_i, bessel_ie
from prunetree.tree import length


def small_samples(lam, seed, count, node_cap=2000):
    """Parameters of the first ``count`` streams whose tree fits the cap."""
    for stream in range(count):
        params = GwParams(lam, seed=seed, stream=stream, node_cap=node_cap)
        try:
            tree = sample_gw(params)
        except TreeSizeError:
            continue
        yield params, tree


class TestSampling(object):

    def test_reproducible(self):
        params = GwParams(1.0, seed=7, stream=3, node_cap=10 ** 5)
        try:
            assert sample_gw(params) == sample_gw(params)
        except TreeSizeError:
            pass
        assert make_rng(7, 3).random() == make_rng(7, 3).random()
        assert make_rng(7, 3).random() != make_rng(7, 4).random()

    def test_planted_binary(self):
        for _, tree in small_samples(2.0, 1, 20):
            assert tree.planted
            assert len(tree) % 2 == 1

    def test_length_without_tree(self):
        for params, tree in small_samples(0.5, 2, 20):
            assert sample_gw_length(params) == pytest.approx(length(tree))

    def test_node_cap(self):
        raised = 0
        for stream in range(50):
            try:
                tree = sample_gw(GwParams(1.0, seed=5, stream=stream,
                                          node_cap=1))
            except TreeSizeError:
                raised += 1
            else:
                assert len(tree) == 1
        assert raised > 0

    def test_excursion_is_valid(self):
        for stream in range(10):
            try:
                ex = sample_exp_excursion(
                    GwParams(1.0, seed=3, stream=stream, node_cap=2000))
            except TreeSizeError:
                continue
            assert ex.extrema[0] == ex.extrema[-1] == 0.0
            assert level_set_tree(ex).planted

    def test_invalid_parameters(self):
        with pytest.raises(DomainError):
            GwParams(0.0)
        with pytest.raises(DomainError):
            GwParams(1.0, seed=-1)


class TestRandomSink(object):

    def test_mass_rule(self):
        t = 1.5
        for stream in range(200):
            state = sample_random_sink(GwParams(1.0, seed=4, stream=stream), t)
            assert 0 <= state.mass <= 2 * t
            assert state.growing == (state.mass == 2 * t)

    def test_time_must_be_positive(self):
        with pytest.raises(DomainError):
            sample_random_sink(GwParams(1.0), 0.0)


class TestBessel(object):

    def test_against_scipy(self):
        z = np.array([0.0, 1e-3, 0.5, 1.0, 5.0, 19.9, 20.1, 35.0, 500.0])
        for nu in (0, 1):
            np.testing.assert_allclose(bessel_ie(nu, z), special.ive(nu, z),
                                       rtol=1e-9, atol=1e-300)
        np.testing.assert_allclose(bessel_i(0, z[:6]), special.iv(0, z[:6]),
                                   rtol=1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            bessel_ie(2, 1.0)
        with pytest.raises(DomainError):
            bessel_ie(0, -1.0)


class TestClosedForms(object):

    def test_survival(self):
        assert survival_prob('length', 1.0, 1.0) == pytest.approx(
            0.673667, abs=1e-6)
        assert survival_prob('height', 1.0, 2.0) == pytest.approx(0.5)
        assert survival_prob('horton', 3.0, 1.5) == pytest.approx(0.5)
        assert survival_prob('length', 1.0, 0.0) == pytest.approx(1.0)
        assert pruned_rate('height', 2.0, 1.0) == pytest.approx(1.0)

    def test_leaf_count_has_no_closed_form(self):
        with pytest.raises(NoClosedFormError):
            survival_prob('leaves', 1.0, 1.0)
        with pytest.raises(DomainError):
            survival_prob('nonsense', 1.0, 1.0)

    def test_length_density(self):
        assert length_pdf(1.0, 1.0) == pytest.approx(0.2079104, abs=1e-7)
        # A tree survives length pruning at d iff its length exceeds d.
        for d in (0.5, 3.0):
            below, _ = integrate.quad(lambda x: length_pdf(x, 2.0), 0, d)
            assert below == pytest.approx(
                1.0 - survival_prob('length', 2.0, d), abs=1e-8)
        with pytest.raises(DomainError):
            length_pdf(0.0, 1.0)

    def test_growth_probability(self):
        assert growth_probability(1.0, 1.0) == pytest.approx(0.4657596,
                                                             abs=1e-7)
        assert growth_probability(0.0, 1.0) == 1.0

    def test_sink_mass_law_is_normalised(self):
        t, lam = 1.0, 1.5
        density, atom = sink_mass_pdf(0.3, t, lam)
        assert density > 0
        assert atom == pytest.approx(growth_probability(t, lam))
        total, _ = integrate.quad(lambda a: sink_mass_pdf(a, t, lam)[0],
                                  0.0, 2 * t)
        assert total + atom == pytest.approx(1.0, abs=1e-6)
        assert sink_mass_cdf(2 * t, t, lam) == 1.0
        assert sink_mass_cdf(t, t, lam) == pytest.approx(
            integrate.quad(lambda a: sink_mass_pdf(a, t, lam)[0], 0, t)[0])
        with pytest.raises(DomainError):
            sink_mass_pdf(3.0, t, lam)

    def test_leaf_count(self):
        np.testing.assert_allclose(leaf_count_pmf([1, 2, 3, 4]),
                                   [0.5, 0.125, 0.0625, 0.0390625])
        with pytest.raises(DomainError):
            leaf_count_pmf(0)

    def test_interior_masses(self):
        t, lam = 1.0, 1.0
        assert interior_mass_cdf(2 * t, t, lam) == pytest.approx(1.0)
        assert interior_mass_cdf(0.0, t, lam) == pytest.approx(0.0)
        total, _ = integrate.quad(lambda a: interior_mass_pdf(a, t, lam),
                                  0.0, 2 * t)
        assert total == pytest.approx(1.0, abs=1e-6)
        counts = interior_count_pmf(np.arange(200), t, lam)
        assert counts.sum() == pytest.approx(1.0)

    def test_closed_form_object(self):
        closed = ClosedForm(1.0)
        assert closed.evaluate('p-length', 1.0) == pytest.approx(
            0.673667, abs=1e-6)
        assert closed.evaluate('xi', 1.0) == pytest.approx(0.4657596,
                                                           abs=1e-7)
        np.testing.assert_allclose(
            closed.evaluate('ell', np.array([0.5, 1.0])),
            [length_pdf(0.5, 1.0), length_pdf(1.0, 1.0)])
        assert closed.evaluate('mu', 0.5, 1.0) == pytest.approx(
            sink_mass_pdf(0.5, 1.0, 1.0)[0])
        with pytest.raises(DomainError):
            closed.evaluate('mu', 0.5)
        with pytest.raises(DomainError):
            closed.evaluate('zeta', 0.5)
