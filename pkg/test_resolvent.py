import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import linalg

from hillspec.errors import (
    ContourError,
    DomainError,
    HomotopyError,
    NeumannDivergenceError,
    OperatorError,
    PoleError,
    PoleProximityError,
    QuadratureError,
    RegionError,
    WindowError,
)
from hillspec.services.operator import OperatorSpec, assemble, free_eigenvalue
from hillspec.services.resolvent import (
    SCALING_PAIRS,
    Contour,
    HomotopyFamily,
    contour_trace,
    direct_resolvent,
    empirical_resolvent_norm,
    even_power_resolvent,
    free_resolvent_norm,
    gain_ratios,
    homotopy_count_invariance,
    lemma_scaling_sweep,
    neumann_resolvent,
    relative_bound_check,
    riesz_count,
    window_resolvent_norm,
)
from hillspec.services.seqspace import CoeffSeq, SpaceSpec, random_decay


def family(b0=None, b1=None, K=8, m=1, s=1.0):
    return HomotopyFamily(m=m, b0=b0 or CoeffSeq(), b1=b1 or CoeffSeq(), K=K, s=s)


class TestFreeResolventNorm:
    @pytest.mark.parametrize("lam,s,t,expected", [
        (-1, 0, 0, 1.0),
        (-3, 0, 0, 1.0 / 3.0),
        (-1, 1, -1, 1.0),
    ])
    def test_values(self, lam, s, t, expected):
        assert free_resolvent_norm(lam, 1, s, t) == pytest.approx(expected, rel=1e-12)

    def test_smoothing_tail_limit(self):
        # far to the left the supremum sits next to the k -> infinity limit pi^-2
        assert free_resolvent_norm(-1e6, 1, 1, -1) == pytest.approx(math.pi ** -2, rel=1e-3)

    def test_matches_wide_window(self):
        lam = 20 + 5j
        assert free_resolvent_norm(lam, 1, 0.5, 0) == pytest.approx(
            window_resolvent_norm(lam, 1, 0.5, 0, 400), rel=1e-12)

    def test_pole(self):
        with pytest.raises(PoleError) as info:
            free_resolvent_norm(free_eigenvalue(1, 1), 1, 0, 0)
        assert info.value.k == 1

    def test_too_much_smoothing(self):
        with pytest.raises(DomainError):
            free_resolvent_norm(-1, 1, 2, -1)

    def test_bad_order(self):
        with pytest.raises(OperatorError):
            free_resolvent_norm(-1, 0, 0, 0)


class TestEmpiricalResolventNorm:
    def test_free_section_matches_window_formula(self):
        K, lam = 16, -1 + 2j
        A = assemble(OperatorSpec(1, CoeffSeq()), K)
        measured = empirical_resolvent_norm(A, lam, SpaceSpec(-1), SpaceSpec(1))
        assert measured == pytest.approx(window_resolvent_norm(lam, 1, 1, -1, K), rel=1e-10)

    def test_unweighted_is_inverse_smallest_singular_value(self):
        A = assemble(OperatorSpec(1, random_decay(1, 0.5, window=8, seed=5)), 8)
        lam = 3 + 4j
        sigma = linalg.svdvals(lam * np.eye(A.size) - A.A)[-1]
        assert empirical_resolvent_norm(A, lam, SpaceSpec(0), SpaceSpec(0)) == pytest.approx(1 / sigma, rel=1e-10)

    def test_on_the_spectrum(self):
        A = assemble(OperatorSpec(1, CoeffSeq()), 4)
        with pytest.raises(PoleProximityError):
            empirical_resolvent_norm(A, free_eigenvalue(2, 1), SpaceSpec(0), SpaceSpec(0))


class TestHomotopyFamily:
    def test_from_split(self):
        v = random_decay(1, 0.5, window=12, seed=2)
        fam = HomotopyFamily.from_split(OperatorSpec(1, v), 0.05, 16)
        assert fam.potential() == v
        assert fam.at(0).potential() == fam.b0
        assert_allclose(fam.matrix(), assemble(OperatorSpec(1, v), 16).A, atol=1e-14)

    def test_invalid(self):
        with pytest.raises(DomainError):
            family(s=1.5)
        with pytest.raises(OperatorError):
            family(K=0)


class TestNeumann:
    def test_zero_perturbation_is_exact(self):
        fam = family(b0=CoeffSeq({0: 1}))
        result = neumann_resolvent(fam, -1 + 1j, 5)
        assert result.rho == 0 and result.error_bound == 0
        assert_allclose(result.matrix, direct_resolvent(fam, -1 + 1j), rtol=1e-14)

    def test_free_inverse(self):
        fam = family()
        lam = -2 + 0.5j
        result = neumann_resolvent(fam, lam, 0)
        assert_allclose(np.diag(result.matrix), 1 / (lam - np.diag(fam.free_part())), rtol=1e-14)

    def test_divergence(self):
        with pytest.raises(NeumannDivergenceError) as info:
            neumann_resolvent(family(b1=CoeffSeq({0: 10})), -1, 10)
        assert info.value.rho == pytest.approx(10.0)

    def test_error_bound_holds(self):
        fam = family(b1=CoeffSeq({0: 0.5}))
        result = neumann_resolvent(fam, -1, 30)
        assert result.rho == pytest.approx(0.5)
        exact = direct_resolvent(fam, -1)
        error = np.linalg.norm(result.matrix - exact, 2) / np.linalg.norm(exact, 2)
        assert error <= result.error_bound
        assert result.error_bound < 2e-9

    def test_geometric_convergence(self):
        fam = family(b1=CoeffSeq({0: 0.5}))
        lam = -1 + 1j
        exact = direct_resolvent(fam, lam)
        errors = [np.linalg.norm(neumann_resolvent(fam, lam, N).matrix - exact, 2) for N in (5, 6)]
        rho = neumann_resolvent(fam, lam, 0).rho
        assert rho == pytest.approx(0.5 / math.sqrt(2))
        assert errors[1] / errors[0] == pytest.approx(rho, rel=1e-6)

    def test_even_power_form(self):
        fam = family(b0=CoeffSeq({-1: 2, 1: 2}), b1=CoeffSeq({3: 0.5, -2: 0.3j}))
        lam = -5 + 2j
        exact = direct_resolvent(fam, lam)
        assert_allclose(even_power_resolvent(fam, lam, 20), exact, atol=1e-12)
        assert_allclose(neumann_resolvent(fam, lam, 40).matrix, exact, atol=1e-12)

    def test_negative_order(self):
        with pytest.raises(DomainError):
            neumann_resolvent(family(), -1, -1)


class TestContour:
    def test_nodes(self):
        contour = Contour(center=1 + 1j, radius=2, node_count=8)
        assert_allclose(np.abs(contour.nodes() - contour.center), 2)
        assert contour.nodes()[0] == pytest.approx(3 + 1j)
        assert contour.with_nodes(16).node_count == 16

    @pytest.mark.parametrize("radius,nodes", [(0, 64), (-1, 64), (1, 6), (1, 9)])
    def test_invalid(self, radius, nodes):
        with pytest.raises(RegionError):
            Contour(center=0, radius=radius, node_count=nodes)


class TestRieszCount:
    def test_double_eigenvalue(self):
        result = riesz_count(family(), Contour(center=math.pi ** 2, radius=1))
        assert result.count == 2 and result.direct_count == 2
        assert result.valid

    def test_lowest_eigenvalue(self):
        result = riesz_count(family(), Contour(center=0, radius=1))
        assert result.count == 1 and result.direct_count == 1

    def test_eigenvalue_on_contour(self):
        with pytest.raises(ContourError):
            riesz_count(family(), Contour(center=0, radius=math.pi ** 2))

    def test_too_few_nodes(self):
        with pytest.raises(QuadratureError):
            riesz_count(family(), Contour(center=math.pi ** 2, radius=5, node_count=8))

    @pytest.mark.parametrize("center,radius,count", [(math.pi ** 2, 5, 2), (0, 3, 1)])
    def test_node_doubling_squares_the_error(self, center, radius, count):
        matrix = family().matrix()
        contour = Contour(center=center, radius=radius, node_count=8)
        coarse = abs(contour_trace(matrix, contour) - count)
        fine = abs(contour_trace(matrix, contour.with_nodes(16)) - count)
        assert fine <= coarse ** 2


class TestHomotopy:
    def test_constant_count(self):
        fam = family(b1=CoeffSeq({0: 0.1}))
        result = homotopy_count_invariance(fam, Contour(center=math.pi ** 2, radius=1), np.linspace(0, 1, 5))
        assert result.constant
        assert [c.count for c in result.counts] == [2] * 5
        assert [c.s for c in result.counts] == pytest.approx(list(np.linspace(0, 1, 5)))

    def test_eigenvalue_crosses_contour(self):
        fam = family(b1=CoeffSeq({0: 1}))
        with pytest.raises(HomotopyError) as info:
            homotopy_count_invariance(fam, Contour(center=0, radius=0.5), [0, 0.25, 0.5, 1])
        assert info.value.s == 0.5
        assert isinstance(info.value.cause, ContourError)


class TestRelativeBound:
    def test_random_potential(self):
        v = random_decay(1, 0.5, window=16, seed=0)
        result = relative_bound_check(v, 1, 0.1, 20, 16)
        assert result.passed
        assert result.worst_margin >= 0
        assert result.violation_digest is None
        assert result.trials == 20

    def test_zero_potential(self):
        result = relative_bound_check(CoeffSeq(), 2, 0.5, 5, 8)
        assert result.passed
        assert result.cutoff == 0

    def test_deterministic(self):
        v = random_decay(1, 0.5, window=8, seed=1)
        first = relative_bound_check(v, 1, 0.2, 10, 8, seed=3)
        second = relative_bound_check(v, 1, 0.2, 10, 8, seed=3)
        assert first.worst_margin == second.worst_margin

    @pytest.mark.parametrize("delta,trials,K,error", [
        (0.0, 10, 8, DomainError),
        (0.1, 0, 8, DomainError),
        (0.1, 10, 0, WindowError),
    ])
    def test_rejects(self, delta, trials, K, error):
        with pytest.raises(error):
            relative_bound_check(CoeffSeq({0: 1}), 1, delta, trials, K)


class TestScalingSweep:
    @pytest.mark.parametrize("m", [1, 2])
    def test_unweighted_norm_is_inverse_distance(self, m):
        rows = lemma_scaling_sweep(m, [1, 2, 4], 16)
        assert [row.n for row in rows] == [1, 2, 4]
        for row in rows:
            assert set(row.norms) == set(SCALING_PAIRS)
            assert row.lam.imag == row.n ** m
            assert row.n ** m * row.norms["(-m,0)->(-m,0)"] == pytest.approx(1.0, rel=1e-10)
            assert row.n ** m * row.norms["(-m,n)->(-m,n)"] == pytest.approx(1.0, rel=1e-10)

    def test_window(self):
        with pytest.raises(WindowError):
            lemma_scaling_sweep(1, [4, 20], 16)

    @pytest.mark.parametrize("m", [1, 2])
    def test_smoothing_norm_grows_like_n_to_the_m(self, m):
        rows = lemma_scaling_sweep(m, [4, 8, 16, 32, 64], 128)
        gain = gain_ratios(rows, m)
        assert len(gain) == 4
        assert max(gain) <= 4 * min(gain)

    def test_smoothing_norm_attained_on_resonant_mode(self):
        rows = lemma_scaling_sweep(1, [8, 16, 32, 64], 128)
        for row, gain in zip(rows, gain_ratios(rows, 1)):
            n = row.n
            assert gain == pytest.approx((1 + 2 * n) * (1 + n) / n ** 2, rel=1e-9)
