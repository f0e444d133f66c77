import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate

from hillspec.errors import DomainError, PotentialError, WindowError
from hillspec.services.operator import is_formally_self_adjoint
from hillspec.services.seqspace import (
    CoeffSeq,
    SpaceSpec,
    conv_norm_estimate,
    convolution_ratio,
    convolve,
    dirac_comb,
    estimate_convolution_constant,
    make_potential,
    random_decay,
    split_tail,
    trig_poly,
    weighted_norm,
)


class TestCoeffSeq:
    def test_zero_entries_are_dropped(self):
        v = CoeffSeq({0: 1.0, 3: 0.0, -2: 0j})
        assert v.support() == [0]
        assert v[3] == 0
        assert v.radius == 0

    def test_non_finite_rejected(self):
        with pytest.raises(PotentialError):
            CoeffSeq({1: float("nan")})
        with pytest.raises(PotentialError):
            CoeffSeq({1: complex(0, math.inf)})

    def test_immutable(self):
        v = CoeffSeq({0: 1.0})
        with pytest.raises(AttributeError):
            v.decay = 2.0

    def test_window_and_span(self):
        v = CoeffSeq({-1: 2.0, 2: 1j})
        assert_allclose(v.window(2), [0, 2, 0, 0, 1j])
        dense, lo = v.span()
        assert lo == -1
        assert_allclose(dense, [2, 0, 0, 1j])
        assert (v.min_index, v.max_index, v.radius) == (-1, 2, 2)

    def test_arithmetic(self):
        v = CoeffSeq({0: 1.0, 1: 2.0})
        w = CoeffSeq({1: -2.0, 4: 1j})
        assert v + w == CoeffSeq({0: 1.0, 4: 1j})
        assert (v - v).is_zero
        assert -v == v.scale(-1)

    def test_restrict_and_tail_partition(self):
        v = random_decay(1, 0.5, window=10, seed=4)
        assert v.restrict(3) + v.tail(3) == v
        assert v.restrict(3).radius == 3
        assert min(abs(k) for k in v.tail(3)) == 4

    def test_digest_is_canonical(self):
        assert CoeffSeq({0: 1.0}).digest() == CoeffSeq({0: 1.0, 5: 0.0}).digest()
        assert CoeffSeq({0: 1.0}).digest() != CoeffSeq({0: 1.0 + 1e-15}).digest()
        assert CoeffSeq({1: 1.0, -1: 1.0}).digest() == CoeffSeq({-1: 1.0, 1: 1.0}).digest()


class TestConvolve:
    def test_identity(self):
        assert convolve(CoeffSeq({0: 1}), CoeffSeq({2: 5 - 1j})) == CoeffSeq({2: 5 - 1j})

    def test_index_shift(self):
        assert convolve(CoeffSeq({1: 2}), CoeffSeq({2: 3})) == CoeffSeq({3: 6})

    def test_cosine_square(self):
        a = CoeffSeq({-1: 1, 1: 1})
        assert convolve(a, a) == CoeffSeq({-2: 1, 0: 2, 2: 1})

    def test_empty(self):
        assert convolve(CoeffSeq(), CoeffSeq({1: 1})).is_zero


class TestWeightedNorm:
    def test_single_term(self):
        assert weighted_norm(CoeffSeq({2: 4}), 1) == pytest.approx(12.0)

    def test_unweighted(self):
        assert weighted_norm(CoeffSeq({0: 3, 1: 4}), 0) == pytest.approx(5.0)

    def test_shifted_weight(self):
        assert weighted_norm(CoeffSeq({2: 4}), -1, -2) == pytest.approx(4.0)

    def test_zero(self):
        assert weighted_norm(CoeffSeq(), 3) == 0.0


class TestSplitTail:
    def test_head_alone(self):
        split = split_tail(CoeffSeq({0: 1}), 1, 0.5)
        assert split.cutoff == 0
        assert split.v0 == CoeffSeq({0: 1})
        assert split.v1.is_zero

    def test_smallest_cutoff(self):
        v = CoeffSeq({k: 1.0 for k in range(-10, 11)})
        split = split_tail(v, 1, 0.1)

        def tail_sq(N):
            return sum((1 + abs(k)) ** -2.0 for k in range(-10, 11) if abs(k) > N)

        expected = min(N for N in range(11) if tail_sq(N) <= 0.01)
        assert split.cutoff == expected
        assert weighted_norm(split.v1, -1) <= 0.1
        assert split.v0 + split.v1 == v

    def test_zero(self):
        split = split_tail(CoeffSeq(), 2, 0.1)
        assert split.cutoff == 0 and split.v0.is_zero and split.v1.is_zero

    def test_invalid_arguments(self):
        with pytest.raises(DomainError):
            split_tail(CoeffSeq({0: 1}), 0, 0.1)
        with pytest.raises(DomainError):
            split_tail(CoeffSeq({0: 1}), 1, 0.0)


class TestPotentials:
    def test_constant(self):
        assert make_potential("constant", {"c": 7}) == CoeffSeq({0: 7})

    def test_zero(self):
        assert make_potential("zero").is_zero

    def test_mathieu_cosine(self):
        assert trig_poly(cos={1: 10.0}) == CoeffSeq({-1: 5, 1: 5})

    def test_sine(self):
        v = trig_poly(sin={2: 10j})
        assert v[2] == pytest.approx(5.0)
        assert v[-2] == pytest.approx(-5.0)

    def test_dirac_comb_at_origin(self):
        v = dirac_comb(2.0, 0.0, 2)
        assert v == CoeffSeq({k: 1.0 for k in range(-2, 3)})

    def test_dirac_comb_phase(self):
        v = dirac_comb(2.0, 0.5, 1)
        assert_allclose([v[1], v[-1]], [-1j, 1j], atol=1e-15)

    def test_random_decay_independent_of_window(self):
        small = random_decay(1, 0.5, window=8, seed=3)
        large = random_decay(1, 0.5, window=32, seed=3)
        assert large.restrict(8) == small

    def test_random_decay_profile(self):
        m, eta = 2, 0.25
        v = random_decay(m, eta, window=16, norm=1.0, seed=1)
        assert abs(v[4]) / abs(v[0]) == pytest.approx(5.0 ** (m - 0.5 - eta))
        assert weighted_norm(v, -m) <= 1.0

    def test_random_decay_seeds_differ(self):
        assert random_decay(1, 0.5, 8, seed=0) != random_decay(1, 0.5, 8, seed=1)

    def test_random_decay_real_valued(self):
        v = random_decay(1, 0.5, window=8, seed=2, real_valued=True)
        assert is_formally_self_adjoint(v)

    @pytest.mark.parametrize("kwargs", [
        {"m": 0, "eta": 0.5, "window": 4},
        {"m": 1, "eta": 0.0, "window": 4},
        {"m": 1, "eta": 0.5, "window": -1},
    ])
    def test_random_decay_rejects(self, kwargs):
        with pytest.raises(PotentialError):
            random_decay(**kwargs)

    def test_unknown_kind(self):
        with pytest.raises(PotentialError):
            make_potential("square_well")


class TestConvolutionNorms:
    def test_identity_map(self):
        assert conv_norm_estimate(CoeffSeq({0: 1}), SpaceSpec(1), SpaceSpec(0), 8) == pytest.approx(1.0)

    def test_shift_is_isometry(self):
        assert conv_norm_estimate(CoeffSeq({1: 1}), SpaceSpec(0), SpaceSpec(0), 8) == pytest.approx(1.0)

    def test_zero_symbol(self):
        assert conv_norm_estimate(CoeffSeq(), SpaceSpec(0), SpaceSpec(0), 4) == 0.0

    def test_negative_window(self):
        with pytest.raises(WindowError):
            conv_norm_estimate(CoeffSeq({0: 1}), SpaceSpec(0), SpaceSpec(0), -1)

    def test_constant_estimate(self):
        assert convolution_ratio(CoeffSeq({0: 1}), 1, 16) == pytest.approx(1.0)
        c_hat = estimate_convolution_constant(1, 16)
        assert np.isfinite(c_hat)
        assert c_hat >= 1.1 - 1e-12


def integer_sequence(rng, lo, hi):
    dense = rng.integers(-9, 10, hi - lo + 1) + 1j * rng.integers(-9, 10, hi - lo + 1)
    return CoeffSeq.from_dense(dense.astype(np.complex128), lo)


class TestConvolveAlgebra:
    @pytest.mark.parametrize("seed", range(3))
    def test_commutative(self, seed):
        rng = np.random.default_rng(seed)
        a, b = integer_sequence(rng, -3, 5), integer_sequence(rng, -6, 2)
        assert convolve(a, b) == convolve(b, a)

    @pytest.mark.parametrize("seed", range(3))
    def test_bilinear(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = integer_sequence(rng, -2, 4), integer_sequence(rng, -5, 1), integer_sequence(rng, 0, 6)
        assert convolve(a, b + c) == convolve(a, b) + convolve(a, c)
        assert convolve(a.scale(3), b) == convolve(a, b).scale(3)


class TestWeightedNormSummation:
    @pytest.mark.parametrize("s,n", [(1.0, 0), (-1.5, 4), (0.5, -7)])
    def test_reverse_order_sum(self, s, n):
        v = random_decay(1, 0.5, window=20, norm=3.0, seed=11)
        terms = [(1 + abs(k + n)) ** (2 * s) * abs(value) ** 2 for k, value in v.items()]
        total = 0.0
        for term in reversed(terms):
            total += term
        assert weighted_norm(v, s, n) == pytest.approx(math.sqrt(total), rel=1e-15)


class TestConvolutionNormWindows:
    def test_nondecreasing_in_window(self):
        a = CoeffSeq({-2: 0.5, -1: 1.0, 0: 2.0, 1: 1.0j, 2: -0.25})
        estimates = [conv_norm_estimate(a, SpaceSpec(1), SpaceSpec(-1), K) for K in range(0, 24)]
        for smaller, larger in zip(estimates, estimates[1:]):
            assert larger >= smaller * (1 - 1e-12)

    @pytest.mark.parametrize("r,t", [(1.0, -1.0), (0.0, -1.0), (2.0, 0.0)])
    def test_stable_under_window_doubling(self, r, t):
        a = CoeffSeq({-3: 1.0, -1: 0.5, 0: 2.0, 2: -1.0j, 3: 0.75})
        K = 4 * a.radius
        estimates = [conv_norm_estimate(a, SpaceSpec(r), SpaceSpec(t), K * f) for f in (1, 2, 4)]
        assert max(estimates) <= 1.05 * min(estimates)

    @pytest.mark.parametrize("m", [1, 2])
    def test_uniform_in_shift(self, m):
        a = random_decay(m, 0.5, window=16, norm=1.0, seed=42)
        estimates = [conv_norm_estimate(a, SpaceSpec(m, n), SpaceSpec(-m, n), 64) for n in (0, 8, 32)]
        assert all(np.isfinite(estimates))
        assert max(estimates) <= 1.05 * min(estimates)


class TestDiracComb:
    @pytest.mark.parametrize("center", [0.0, 0.3, -0.55])
    def test_matches_narrow_gaussian(self, center):
        amplitude, width = 2.0, 1e-3
        v = dirac_comb(amplitude, center, 3)

        def density(x):
            return amplitude * math.exp(-0.5 * ((x - center) / width) ** 2) / (width * math.sqrt(2 * math.pi))

        for k in range(-3, 4):
            re, _ = integrate.quad(lambda x: density(x) * math.cos(k * math.pi * x), -1, 1,
                                   points=[center], limit=200)
            im, _ = integrate.quad(lambda x: -density(x) * math.sin(k * math.pi * x), -1, 1,
                                   points=[center], limit=200)
            assert complex(0.5 * re, 0.5 * im) == pytest.approx(v[k], abs=1e-4)

    @pytest.mark.parametrize("m", [1, 2, 3])
    @pytest.mark.parametrize("K", [16, 64, 256])
    def test_negative_norm_converges(self, m, K):
        small = weighted_norm(dirac_comb(2.0, 0.0, K), -m)
        large = weighted_norm(dirac_comb(2.0, 0.0, 2 * K), -m)
        tail_bound = 2.0 / ((2 * m - 1) * K ** (2 * m - 1))
        assert large >= small
        assert large ** 2 - small ** 2 <= tail_bound + 1e-15
        assert large - small <= tail_bound + 1e-15
