import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from hillspec.errors import DomainError, RegionError, WindowError
from hillspec.services.eig import SpectrumResult, spectrum
from hillspec.services.operator import OperatorSpec, assemble, free_eigenvalue
from hillspec.services.parallel import ordered_map
from hillspec.services.seqspace import CoeffSeq

logger = logging.getLogger(__name__)

M_GRID = tuple(2.0 ** i for i in range(11))


def _strip_half_width(n: int, m: int) -> float:
    """n^m pi^{2m}, with pi^{2m} taken from free_eigenvalue so the n0 = 1 cone edge is exactly 0"""
    return float(n) ** m * free_eigenvalue(1, m)


# Regions of the complex plane
@dataclass(frozen=True)
class ExtM:
    """Re z <= |Im z| - M"""
    M: float

    def __post_init__(self):
        if not self.M >= 1:
            raise RegionError(f"Ext_M needs M >= 1, got {self.M}")

    def mask(self, values: np.ndarray) -> np.ndarray:
        return values.real <= np.abs(values.imag) - self.M


@dataclass(frozen=True)
class Vert:
    """n^{2m} pi^{2m} + z with |Re z| <= n^m pi^{2m} and |z| >= r"""
    m: int
    n: int
    r: float

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise RegionError(f"Vert needs m >= 1 and n >= 1, got m={self.m}, n={self.n}")
        if not 0 < self.r < _strip_half_width(self.n, self.m):
            raise RegionError(f"Vert needs 0 < r < n^m pi^(2m), got r={self.r}")

    def mask(self, values: np.ndarray) -> np.ndarray:
        z = values - free_eigenvalue(self.n, self.m)
        return (np.abs(z.real) <= _strip_half_width(self.n, self.m)) & (np.abs(z) >= self.r)


@dataclass(frozen=True)
class Cone:
    """|Im z| - M <= Re z <= (n0^{2m} - n0^m) pi^{2m}"""
    M: float
    n0: int
    m: int

    def __post_init__(self):
        if not self.M >= 1 or self.n0 < 1 or self.m < 1:
            raise RegionError(f"Cone needs M >= 1, n0 >= 1, m >= 1, got M={self.M}, n0={self.n0}, m={self.m}")

    @property
    def upper(self) -> float:
        return free_eigenvalue(self.n0, self.m) - _strip_half_width(self.n0, self.m)

    def mask(self, values: np.ndarray) -> np.ndarray:
        return (np.abs(values.imag) - self.M <= values.real) & (values.real <= self.upper)


@dataclass(frozen=True)
class Disc:
    """Open disc |z - center| < radius"""
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise RegionError(f"Disc radius must be positive, got {self.radius}")

    def mask(self, values: np.ndarray) -> np.ndarray:
        return np.abs(values - self.center) < self.radius


Region = Union[ExtM, Vert, Cone, Disc]


def region_contains(region: Region, lam: complex) -> bool:
    if not isinstance(region, (ExtM, Vert, Cone, Disc)):
        raise RegionError(f"Unknown region type {type(region).__name__}")
    return bool(region.mask(np.array([lam], dtype=np.complex128))[0])


def count_inside(region: Region, values: Sequence[complex]) -> int:
    return int(np.count_nonzero(region.mask(np.asarray(values, dtype=np.complex128))))


# Localization checks on computed spectra
@dataclass(frozen=True)
class DiscCheck:
    n: int
    dev_odd: float
    dev_even: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.dev_odd < self.bound and self.dev_even < self.bound


@dataclass
class LocalizationReport:
    M: float
    n0: int
    n_max: int
    cone_count: int
    discs: List[DiscCheck] = field(default_factory=list)

    @property
    def expected_cone_count(self) -> int:
        return 2 * self.n0 - 1

    @property
    def certified(self) -> bool:
        return self.cone_count == self.expected_cone_count and all(d.passed for d in self.discs)

    @property
    def disc_passes(self) -> int:
        return sum(d.passed for d in self.discs)


@dataclass
class CertificateSearch:
    """Outcome of min_certificate; `found` False keeps the best partial report"""
    found: bool
    report: Optional[LocalizationReport]

    @property
    def M(self) -> Optional[float]:
        return self.report.M if self.found else None

    @property
    def n0(self) -> Optional[int]:
        return self.report.n0 if self.found else None


def _require_order(result: SpectrumResult) -> int:
    if result.m is None:
        raise DomainError("Spectrum carries no operator order; solve an assembled TruncatedOperator")
    return result.m


def _check_window(result: SpectrumResult, n_max: int):
    if n_max < 1:
        raise WindowError(f"n_max must be >= 1, got {n_max}")
    if n_max > result.K / 2:
        raise WindowError(f"n_max={n_max} exceeds the reliable window K/2={result.K / 2}")


def _deviations(result: SpectrumResult, n_max: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """|lambda_{2n-1} - c_n|, |lambda_{2n} - c_n| and n^m for n = 1..n_max"""
    m = _require_order(result)
    n = np.arange(1, n_max + 1)
    centers = np.array([free_eigenvalue(int(k), m) for k in n])
    odd = np.abs(result.eigenvalues[2 * n - 1] - centers)
    even = np.abs(result.eigenvalues[2 * n] - centers)
    return odd, even, n.astype(np.float64) ** m


def localization_report(result: SpectrumResult, M: float, n0: int, n_max: int) -> LocalizationReport:
    """Cone count in T_{M,n0} and the disc inequalities for n0 <= n <= n_max"""
    m = _require_order(result)
    _check_window(result, n_max)
    if not 1 <= n0 <= n_max:
        raise WindowError(f"n0 must lie in [1, n_max={n_max}], got {n0}")
    cone = Cone(M=M, n0=n0, m=m)
    odd, even, bounds = _deviations(result, n_max)
    discs = [
        DiscCheck(n=n, dev_odd=float(odd[n - 1]), dev_even=float(even[n - 1]), bound=float(bounds[n - 1]))
        for n in range(n0, n_max + 1)
    ]
    return LocalizationReport(M=M, n0=n0, n_max=n_max, cone_count=count_inside(cone, result.eigenvalues), discs=discs)


class _CertificateTable:
    """Disc passes precomputed once per spectrum; cone counts on demand"""

    def __init__(self, result: SpectrumResult, n_max: int):
        _check_window(result, n_max)
        self.result = result
        self.m = _require_order(result)
        self.n_max = n_max
        odd, even, bounds = _deviations(result, n_max)
        passes = (odd < bounds) & (even < bounds)
        # suffix_ok[i]: every n >= i + 1 passes
        self.suffix_ok = np.logical_and.accumulate(passes[::-1])[::-1]
        self.suffix_passes = np.cumsum(passes[::-1])[::-1]

    def cone_count(self, M: float, n0: int) -> int:
        return count_inside(Cone(M=M, n0=n0, m=self.m), self.result.eigenvalues)

    def certifies(self, M: float, n0: int) -> bool:
        return bool(self.suffix_ok[n0 - 1]) and self.cone_count(M, n0) == 2 * n0 - 1

    def score(self, M: float, n0: int) -> Tuple[bool, int]:
        return self.cone_count(M, n0) == 2 * n0 - 1, int(self.suffix_passes[n0 - 1])


def min_certificate(result: SpectrumResult, n_max: int, M_grid: Sequence[float] = M_GRID) -> CertificateSearch:
    """Lexicographically smallest (n0, then M) certified by localization_report"""
    table = _CertificateTable(result, n_max)
    best, best_score = None, None
    for n0 in range(1, n_max + 1):
        for M in M_grid:
            if table.certifies(M, n0):
                logger.info(f"Certificate found: M={M:g}, n0={n0} (n_max={n_max}, K={result.K})")
                return CertificateSearch(found=True, report=localization_report(result, M, n0, n_max))
            score = table.score(M, n0)
            if best_score is None or score > best_score:
                best, best_score = (M, n0), score
    logger.warning(f"No certificate within M grid up to {max(M_grid):g} and n0 <= {n_max}")
    return CertificateSearch(found=False, report=localization_report(result, best[0], best[1], n_max))


def disc_radius_bounded(m: int, R: float) -> float:
    """(3^m sqrt(2) + 1) R"""
    if R < 0:
        raise DomainError(f"R must be >= 0, got {R}")
    return (3 ** m * math.sqrt(2.0) + 1.0) * R


def asymptotic_ratios(result: SpectrumResult, n_max: int) -> List[Tuple[int, float]]:
    """max_i |lambda_{2n-i} - n^{2m} pi^{2m}| / n^m for 1 <= n <= n_max"""
    _check_window(result, n_max)
    odd, even, bounds = _deviations(result, n_max)
    ratios = np.maximum(odd, even) / bounds
    return [(n, float(r)) for n, r in zip(range(1, n_max + 1), ratios)]


def delta_disc_threshold(result: SpectrumResult, delta: float, n_max: int) -> Optional[int]:
    """Smallest n0 with both deviations < delta n^m for every n0 <= n <= n_max"""
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    _check_window(result, n_max)
    odd, even, bounds = _deviations(result, n_max)
    passes = (odd < delta * bounds) & (even < delta * bounds)
    failing = np.flatnonzero(~passes)
    if failing.size == 0:
        return 1
    n0 = int(failing[-1]) + 2
    return n0 if n0 <= n_max else None


def resolvent_region_violations(result: SpectrumResult, M: float, n0: int, n_max: int) -> List[complex]:
    """Eigenvalues inside Ext_M or any Vert_n^m(n^m) with n0 <= n <= n_max"""
    m = _require_order(result)
    _check_window(result, n_max)
    values = result.eigenvalues
    hit = ExtM(M).mask(values)
    for n in range(n0, n_max + 1):
        hit |= Vert(m=m, n=n, r=float(n) ** m).mask(values)
    return [complex(v) for v in values[hit]]


@dataclass
class PerturbationCertificate:
    found: bool
    M: Optional[float]
    n0: Optional[int]
    reports: List[LocalizationReport] = field(default_factory=list)


def perturbation_certificate(spec: OperatorSpec, perturbations: Sequence[CoeffSeq], K: int, n_max: int,
                             M_grid: Sequence[float] = M_GRID) -> PerturbationCertificate:
    """One (M, n0) certifying v and every v + dv, smallest lexicographically"""
    potentials = [spec.v] + [spec.v + dv for dv in perturbations]

    def solve(v: CoeffSeq) -> SpectrumResult:
        return spectrum(assemble(OperatorSpec(m=spec.m, v=v), K))

    tables = [_CertificateTable(result, n_max) for result in ordered_map(solve, potentials)]
    for n0 in range(1, n_max + 1):
        if not all(t.suffix_ok[n0 - 1] for t in tables):
            continue
        for M in M_grid:
            if all(t.certifies(M, n0) for t in tables):
                reports = [localization_report(t.result, M, n0, n_max) for t in tables]
                logger.info(f"Common certificate M={M:g}, n0={n0} for {len(tables)} potentials")
                return PerturbationCertificate(found=True, M=M, n0=n0, reports=reports)
    logger.warning(f"No common certificate for {len(tables)} potentials")
    return PerturbationCertificate(found=False, M=None, n0=None)
