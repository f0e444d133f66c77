import math

import numpy as np
import pytest

from hillspec.errors import DomainError, RegionError, WindowError
from hillspec.services.eig import spectrum
from hillspec.services.locate import (
    M_GRID,
    Cone,
    Disc,
    ExtM,
    Vert,
    asymptotic_ratios,
    count_inside,
    delta_disc_threshold,
    disc_radius_bounded,
    localization_report,
    min_certificate,
    perturbation_certificate,
    region_contains,
    resolvent_region_violations,
)
from hillspec.services.operator import OperatorSpec, assemble
from hillspec.services.seqspace import CoeffSeq


def solve(v, K, m=1):
    return spectrum(assemble(OperatorSpec(m, v), K))


class TestRegions:
    def test_ext_m(self):
        region = ExtM(1)
        assert region_contains(region, -2)
        assert region_contains(region, -1)
        assert not region_contains(region, 0)
        assert region_contains(region, 5 + 10j)

    def test_cone(self):
        cone = Cone(M=1, n0=1, m=1)
        assert cone.upper == 0
        assert region_contains(cone, 0)
        assert region_contains(cone, -0.5 + 0.4j)
        assert not region_contains(cone, -2)
        assert not region_contains(cone, 0.1)

    def test_cone_upper_edge(self):
        cone = Cone(M=1, n0=3, m=1)
        assert cone.upper == pytest.approx(6 * math.pi ** 2)

    def test_vert(self):
        strip = Vert(m=1, n=2, r=2.0)
        center = 4 * math.pi ** 2
        assert region_contains(strip, center + 3)
        assert region_contains(strip, center + 100j)
        assert not region_contains(strip, center + 1)
        assert not region_contains(strip, center + 2.5 * math.pi ** 2)

    def test_disc_is_open(self):
        disc = Disc(center=0, radius=1)
        assert region_contains(disc, 0.5j)
        assert not region_contains(disc, 1)

    def test_count_inside(self):
        assert count_inside(Disc(center=1, radius=2), [0, 1, 2.5, 3, -5]) == 3

    @pytest.mark.parametrize("build", [
        lambda: ExtM(0.5),
        lambda: Vert(m=1, n=1, r=math.pi ** 2),
        lambda: Vert(m=1, n=0, r=1),
        lambda: Vert(m=1, n=1, r=0),
        lambda: Cone(M=1, n0=0, m=1),
        lambda: Disc(center=0, radius=0),
    ])
    def test_invalid(self, build):
        with pytest.raises(RegionError):
            build()

    def test_unknown_region(self):
        with pytest.raises(RegionError):
            region_contains("disc", 0)


class TestLocalizationReport:
    def test_free_operator(self):
        report = localization_report(solve(CoeffSeq(), 16), M=1, n0=3, n_max=8)
        assert report.cone_count == 5
        assert report.expected_cone_count == 5
        assert [d.n for d in report.discs] == list(range(3, 9))
        assert all(d.dev_odd == 0 and d.dev_even == 0 for d in report.discs)
        assert report.certified
        assert report.disc_passes == 6

    def test_window_limits(self):
        result = solve(CoeffSeq(), 16)
        with pytest.raises(WindowError):
            localization_report(result, M=1, n0=1, n_max=9)
        with pytest.raises(WindowError):
            localization_report(result, M=1, n0=1, n_max=0)
        with pytest.raises(WindowError):
            localization_report(result, M=1, n0=5, n_max=4)

    def test_needs_operator_order(self):
        result = spectrum(np.diag(np.arange(9.0)))
        with pytest.raises(DomainError):
            localization_report(result, M=1, n0=1, n_max=2)


class TestMinCertificate:
    def test_free_operator(self):
        search = min_certificate(solve(CoeffSeq(), 16), n_max=8)
        assert search.found
        assert (search.M, search.n0) == (1, 1)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_free_operator_any_order(self, m):
        result = solve(CoeffSeq(), 16, m=m)
        search = min_certificate(result, n_max=8)
        assert search.found
        assert (search.M, search.n0) == (1, 1)
        assert all(ratio == 0.0 for _, ratio in asymptotic_ratios(result, 8))

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_free_cone_count_independent_of_M(self, m):
        result = solve(CoeffSeq(), 16, m=m)
        for n0 in range(1, 9):
            for M in M_GRID:
                assert localization_report(result, M, n0, 8).cone_count == 2 * n0 - 1

    def test_constant_shift(self):
        search = min_certificate(solve(CoeffSeq({0: 1}), 32), n_max=16)
        assert search.found
        assert (search.M, search.n0) == (1, 2)
        assert search.report.certified

    def test_large_shift_keeps_partial_report(self):
        search = min_certificate(solve(CoeffSeq({0: 100}), 32), n_max=16)
        assert not search.found
        assert search.M is None and search.n0 is None
        assert search.report is not None
        assert not search.report.certified

    def test_custom_grid(self):
        search = min_certificate(solve(CoeffSeq({0: -2.5}), 32), n_max=16, M_grid=[1.0, 4.0])
        assert search.found
        assert search.M == 4.0


class TestBoundedRadius:
    @pytest.mark.parametrize("m,R,expected", [
        (1, 1.0, 5.242640687119285),
        (2, 0.0, 0.0),
        (3, 2.0, 78.36753236814714),
    ])
    def test_values(self, m, R, expected):
        assert disc_radius_bounded(m, R) == pytest.approx(expected, rel=1e-12)

    def test_negative(self):
        with pytest.raises(DomainError):
            disc_radius_bounded(1, -1.0)


class TestAsymptotics:
    def test_constant_shift(self):
        ratios = asymptotic_ratios(solve(CoeffSeq({0: 1}), 32), 16)
        assert [n for n, _ in ratios] == list(range(1, 17))
        for n, ratio in ratios:
            assert ratio == pytest.approx(1.0 / n, rel=1e-9)

    def test_constant_shift_higher_order(self):
        ratios = asymptotic_ratios(solve(CoeffSeq({0: 2}), 16, m=2), 8)
        for n, ratio in ratios:
            assert ratio == pytest.approx(2.0 / n ** 2, rel=1e-6)

    def test_mathieu_trend(self):
        ratios = asymptotic_ratios(solve(CoeffSeq({-1: 5.0, 1: 5.0}), 128), 32)
        assert ratios[-1][1] < ratios[0][1]
        assert ratios[-1][1] < 1e-2


class TestDeltaThreshold:
    def test_constant_shift(self):
        result = solve(CoeffSeq({0: 1}), 32)
        assert delta_disc_threshold(result, 0.5, 16) == 3
        assert delta_disc_threshold(result, 0.05, 16) is None

    def test_free_operator(self):
        assert delta_disc_threshold(solve(CoeffSeq(), 16), 0.1, 8) == 1

    @pytest.mark.parametrize("delta", [0.0, 1.5])
    def test_rejects_delta(self, delta):
        with pytest.raises(DomainError):
            delta_disc_threshold(solve(CoeffSeq(), 16), delta, 8)


class TestResolventRegions:
    def test_lowest_eigenvalue_on_strip_edge(self):
        result = solve(CoeffSeq(), 16)
        assert resolvent_region_violations(result, M=1, n0=1, n_max=8) == [0]

    def test_free_operator_clear_from_two(self):
        result = solve(CoeffSeq(), 16)
        assert resolvent_region_violations(result, M=1, n0=2, n_max=8) == []

    def test_negative_eigenvalue_in_exterior(self):
        result = solve(CoeffSeq({0: -5}), 16)
        assert -5 in resolvent_region_violations(result, M=1, n0=2, n_max=8)


class TestPerturbationCertificate:
    def test_small_constant_perturbations(self):
        spec = OperatorSpec(1, CoeffSeq({0: 1}))
        certificate = perturbation_certificate(spec, [CoeffSeq({0: 0.01}), CoeffSeq({0: -0.01})], 32, 16)
        assert certificate.found
        assert (certificate.M, certificate.n0) == (1, 2)
        assert len(certificate.reports) == 3
        assert all(r.certified for r in certificate.reports)

    def test_no_common_certificate(self):
        spec = OperatorSpec(1, CoeffSeq())
        certificate = perturbation_certificate(spec, [CoeffSeq({0: 100})], 16, 8)
        assert not certificate.found
        assert certificate.reports == []
