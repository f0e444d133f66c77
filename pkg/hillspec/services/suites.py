"""Verification suites composed from the numerical services.

Each suite receives a SuiteContext, runs its stages, writes its files and
records pass/fail assertions. NumericalError propagates out of the failing
stage; the CLI maps it to exit status 3.
"""
import logging
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from hillspec.errors import ContourError, QuadratureError
from hillspec.schemas.schemas import AssertionResult, ExperimentConfig, StageTiming, Suite
from hillspec.services import files
from hillspec.services.eig import lex_sort, spectrum, truncation_study
from hillspec.services.locate import (
    Cone,
    asymptotic_ratios,
    count_inside,
    delta_disc_threshold,
    disc_radius_bounded,
    localization_report,
    min_certificate,
    perturbation_certificate,
    resolvent_region_violations,
)
from hillspec.services.mathieu import mathieu_characteristic_values
from hillspec.services.operator import OperatorSpec, assemble, free_diagonal, is_formally_self_adjoint
from hillspec.services.resolvent import (
    SCALING_PAIRS,
    Contour,
    HomotopyFamily,
    contour_trace,
    direct_resolvent,
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
from hillspec.services.seqspace import (
    CoeffSeq,
    PotentialKind,
    constant_potential,
    dirac_comb,
    make_potential,
    random_decay,
    trig_poly,
    weighted_norm,
)

logger = logging.getLogger(__name__)

CheckFn = Callable[[int], Tuple[bool, str]]


@dataclass
class SuiteContext:
    config: ExperimentConfig
    out_dir: Path
    potential: CoeffSeq = field(default_factory=CoeffSeq)
    files: List[Path] = field(default_factory=list)
    assertions: List[AssertionResult] = field(default_factory=list)
    stages: List[StageTiming] = field(default_factory=list)
    failed_stage: Optional[str] = None

    @property
    def spec(self) -> OperatorSpec:
        return OperatorSpec(m=self.config.m, v=self.potential)

    @property
    def seed(self) -> int:
        return self.config.potential.seed

    @contextmanager
    def stage(self, name: str):
        logger.info(f"Stage {name} started")
        start = time.perf_counter()
        try:
            yield
        except Exception:
            self.failed_stage = name
            self.stages.append(StageTiming(name=name, seconds=time.perf_counter() - start, status="failed"))
            raise
        elapsed = time.perf_counter() - start
        self.stages.append(StageTiming(name=name, seconds=elapsed))
        logger.info(f"Stage {name} finished in {elapsed:.3f}s")

    def check(self, label: str, passed: bool, message: str = ""):
        self.assertions.append(AssertionResult(label=label, passed=bool(passed), message=message))
        if passed:
            logger.info(f"PASS {label}: {message}")
        else:
            logger.warning(f"FAIL {label}: {message}")

    def emit(self, *paths: Path):
        self.files.extend(paths)

    def path(self, name: str) -> Path:
        return self.out_dir / name


def build_potential(config: ExperimentConfig) -> CoeffSeq:
    """The configured potential; a coefficient file takes precedence over the kind"""
    descriptor = config.potential
    if descriptor.path:
        return files.ingest_potential(descriptor.path)
    params = dict(descriptor.params)
    if descriptor.kind is PotentialKind.RANDOM_DECAY:
        params.setdefault("m", config.m)
        params.setdefault("eta", 0.5)
        params.setdefault("window", config.window)
    elif descriptor.kind is PotentialKind.DIRAC_COMB:
        # the section reads lags up to 2K
        params.setdefault("window", 2 * config.window)
    return make_potential(descriptor.kind, params, seed=descriptor.seed)


def _n_max(config: ExperimentConfig, K: int) -> int:
    return config.n_max if config.n_max is not None else K // 2


def _free_spectrum(m: int, K: int) -> np.ndarray:
    d = free_diagonal(m, K)
    return np.sort(d).astype(np.complex128)


# Suites
def spectrum_suite(ctx: SuiteContext):
    config = ctx.config
    K = config.window
    tol = config.tolerances
    with ctx.stage("assemble"):
        A = assemble(ctx.spec, K)
        ctx.emit(files.write_matrix(ctx.path("matrix.csv"), A))
    with ctx.stage("eigensolve"):
        result = spectrum(A, tol.residual, tol.tie)
        ctx.emit(*files.write_spectrum(ctx.path("spectrum.csv"), result))
    worst_residual = float(result.residuals.max(initial=0.0))
    ctx.check("residual certification", worst_residual <= tol.residual,
              f"max residual {worst_residual:.3e} (tolerance {tol.residual:.1e})")

    v = ctx.potential
    if v.is_zero:
        expected = _free_spectrum(config.m, K)
        error = float(np.max(np.abs(result.eigenvalues - expected) / np.maximum(1.0, np.abs(expected))))
        ctx.check("free spectrum exactness", error <= 1e-12, f"max relative error {error:.3e}")
    if v.radius <= 2 * K:
        formal = is_formally_self_adjoint(v)
        ctx.check("self-adjointness agreement", formal == A.is_hermitian(),
                  f"formally self-adjoint={formal}, hermitian section={A.is_hermitian()}")
        if formal:
            worst_imag = float(np.max(np.abs(result.eigenvalues.imag)))
            ctx.check("real spectrum", worst_imag == 0.0, f"max |Im| = {worst_imag:g} via {result.path} path")

    if config.K_list:
        with ctx.stage("truncation"):
            count = min(config.count, 2 * config.K_list[0] + 1)
            study = truncation_study(ctx.spec, config.K_list, count, tol.residual, tol.tie)
            ctx.emit(files.write_truncation(ctx.path("truncation.csv"), study.rows))
        ctx.check("truncation convergence", study.cauchy, f"changes {study.changes()}")


def localize_suite(ctx: SuiteContext):
    config = ctx.config
    K = config.window
    n_max = _n_max(config, K)
    with ctx.stage("eigensolve"):
        result = spectrum(assemble(ctx.spec, K), config.tolerances.residual, config.tolerances.tie)
        ctx.emit(*files.write_spectrum(ctx.path("spectrum.csv"), result))
    with ctx.stage("certificate"):
        if config.M is not None and config.n0 is not None:
            report = localization_report(result, config.M, config.n0, n_max)
        else:
            report = min_certificate(result, n_max).report
        ctx.emit(*files.write_report(ctx.path("report.csv"), ctx.path("summary.csv"), report))
    ctx.check("localization certificate", report.certified,
              f"cone_count={report.cone_count}, expected={report.expected_cone_count}, "
              f"M={report.M:g}, n0={report.n0}, disc passes {report.disc_passes}/{len(report.discs)}")
    if not report.certified:
        return

    with ctx.stage("regions"):
        # the closed strip of Vert_1 always reaches the lowest eigenvalue
        violations = resolvent_region_violations(result, report.M, max(report.n0, 2), n_max)
        threshold = delta_disc_threshold(result, min(config.delta, 1.0), n_max)
        R = weighted_norm(ctx.potential, 0.0)
        radius = disc_radius_bounded(config.m, R)
        worst = max(max(d.dev_odd, d.dev_even) for d in report.discs)
    ctx.check("resolvent regions free of eigenvalues", not violations, f"{len(violations)} eigenvalues inside")
    ctx.check("bounded-potential disc radius", worst < radius,
              f"max deviation {worst:.6g} vs (3^m sqrt2 + 1) R = {radius:.6g}; delta-disc n0={threshold}")


def asymptotics_suite(ctx: SuiteContext):
    config = ctx.config
    K = config.window
    n_max = _n_max(config, K)
    with ctx.stage("eigensolve"):
        result = spectrum(assemble(ctx.spec, K), config.tolerances.residual, config.tolerances.tie)
    with ctx.stage("ratios"):
        ratios = asymptotic_ratios(result, n_max)
        ctx.emit(files.write_ratios(ctx.path("ratios.csv"), ratios))

    v = ctx.potential
    if v.support() == [0]:
        c = abs(v[0])
        error = max(abs(r - c / n) for n, r in ratios)
        ctx.check("constant-shift ratios", error <= 1e-10, f"max |ratio - |c|/n| = {error:.3e}")
    elif n_max >= 8:
        low = [r for n, r in ratios if 2 <= n <= min(16, n_max // 4)]
        high = [r for n, r in ratios if n > n_max // 2]
        low_med, high_med = float(np.median(low)), float(np.median(high))
        ctx.check("decaying deviation ratios", high_med <= 0.5 * low_med,
                  f"median high band {high_med:.4g} vs low band {low_med:.4g}")


def resolvent_suite(ctx: SuiteContext):
    config = ctx.config
    K = config.window
    m = config.m
    n_values = [n for n in config.n_values if n <= K]
    with ctx.stage("scaling"):
        rows = lemma_scaling_sweep(m, n_values, K)
        ctx.emit(files.write_table(
            ctx.path("scaling.csv"), ["n", "lam_re", "lam_im"] + list(SCALING_PAIRS),
            ([row.n, row.lam.real, row.lam.imag] + [row.norms[p] for p in SCALING_PAIRS] for row in rows)))
    if rows:
        scaled = [row.n ** m * row.norms["(-m,0)->(-m,0)"] for row in rows]
        cross = [row.norms["(-m,n)->(m,-n)"] for row in rows]
        ctx.check("scaled resolvent band", max(scaled) <= 2 * min(scaled),
                  f"n^m ||R|| in [{min(scaled):.4g}, {max(scaled):.4g}]")
        ctx.check("shifted-space resolvent band", max(cross) <= 4 * min(cross),
                  f"norm in [{min(cross):.4g}, {max(cross):.4g}]")
        gain = gain_ratios(rows, m)
        if len(gain) >= 2:
            ctx.check("smoothing resolvent band", max(gain) <= 4 * min(gain),
                      f"n^-m ||R|| in [{min(gain):.4g}, {max(gain):.4g}] for n in [8, 64]")

    with ctx.stage("free-norm"):
        mismatch = 0.0
        for row in rows:
            for s, t in ((0.0, 0.0), (1.0, -1.0), (0.5, 0.0)):
                exact = free_resolvent_norm(row.lam, m, s, t)
                window = window_resolvent_norm(row.lam, m, s, t, K)
                mismatch = max(mismatch, abs(exact - window) / exact)
    ctx.check("closed-form resolvent norm", mismatch <= 1e-12, f"max relative mismatch {mismatch:.3e}")

    with ctx.stage("relative-bound"):
        bound = relative_bound_check(ctx.potential, m, config.delta, config.trials, K, seed=ctx.seed)
        ctx.emit(files.write_table(ctx.path("relative_bound.csv"),
                                   ["delta", "trials", "c_hat", "cutoff", "worst_margin", "pass"],
                                   [[config.delta, bound.trials, bound.c_hat, bound.cutoff, bound.worst_margin,
                                     bound.passed]]))
    ctx.check("relative bound", bound.passed,
              f"worst margin {bound.worst_margin:.4g}" + (f", violating u {bound.violation_digest}"
                                                          if bound.violation_digest else ""))

    if config.lam is not None:
        with ctx.stage("neumann"):
            family = HomotopyFamily.from_split(ctx.spec, config.split_eps, K)
            series = neumann_resolvent(family, config.lam, config.neumann_order)
            exact = direct_resolvent(family, config.lam)
            error = float(np.linalg.norm(series.matrix - exact, 2) / np.linalg.norm(exact, 2))
            even = even_power_resolvent(family, config.lam, config.neumann_order // 2)
            even_error = float(np.linalg.norm(even - exact, 2) / np.linalg.norm(exact, 2))
        ctx.check("neumann identity", error <= series.error_bound + 1e-12,
                  f"rho={series.rho:.4g}, error {error:.3e} <= bound {series.error_bound:.3e}")
        ctx.check("even-power identity", even_error <= series.error_bound + 1e-12,
                  f"error {even_error:.3e}")


def projector_suite(ctx: SuiteContext):
    config = ctx.config
    K = config.window
    contour = Contour(config.contour.center, config.contour.radius, config.contour.nodes)
    with ctx.stage("homotopy"):
        family = HomotopyFamily.from_split(ctx.spec, config.split_eps, K)
        result = homotopy_count_invariance(family, contour, config.s_grid, config.tolerances.quadrature)
        ctx.emit(files.write_certificate(ctx.path("certificate.csv"), result.counts))
    ctx.check("count invariance", result.constant, f"counts {[c.count for c in result.counts]}")
    mismatches = [c.s for c in result.counts if c.count != c.direct_count]
    ctx.check("riesz count equals direct count", not mismatches, f"mismatch at s={mismatches}")


# verify-all: acceptance checks at desk scale
def check_free_spectrum(seed: int) -> Tuple[bool, str]:
    K = 64
    worst, bad_cones = 0.0, []
    for m in (1, 2, 3):
        result = spectrum(assemble(OperatorSpec(m, CoeffSeq()), K))
        expected = _free_spectrum(m, K)
        worst = max(worst, float(np.max(np.abs(result.eigenvalues - expected) / np.maximum(1.0, np.abs(expected)))))
        for n0 in range(1, 33):
            if count_inside(Cone(M=1.0, n0=n0, m=m), result.eigenvalues) != 2 * n0 - 1:
                bad_cones.append((m, n0))
    return worst <= 1e-12 and not bad_cones, f"max relative error {worst:.3e}, bad cones {bad_cones}"


def check_shift_covariance(seed: int) -> Tuple[bool, str]:
    K = 64
    worst = 0.0
    for m in (1, 2):
        free = free_diagonal(m, K).astype(np.complex128)
        for c in (1.0, complex(-3, 2)):
            result = spectrum(assemble(OperatorSpec(m, constant_potential(c)), K))
            expected = lex_sort(free + c)
            worst = max(worst, float(np.max(np.abs(result.eigenvalues - expected) / np.maximum(1.0, np.abs(expected)))))
    return worst <= 1e-10, f"max relative deviation {worst:.3e}"


def check_hermitian_reality(seed: int) -> Tuple[bool, str]:
    K = 64
    worst_imag, disagreements = 0.0, 0
    for i in range(25):
        m = 1 + i % 2
        real_valued = i < 20
        v = random_decay(m, 0.5, window=K, norm=2.0, seed=seed + i, real_valued=real_valued)
        A = assemble(OperatorSpec(m, v), K)
        disagreements += is_formally_self_adjoint(v) != A.is_hermitian()
        if real_valued:
            result = spectrum(A)
            worst_imag = max(worst_imag, float(np.max(np.abs(result.eigenvalues.imag))))
    return worst_imag == 0.0 and not disagreements, f"max |Im| {worst_imag:g}, disagreements {disagreements}"


def check_mathieu(seed: int) -> Tuple[bool, str]:
    spec = OperatorSpec(1, CoeffSeq({-1: 5.0, 1: 5.0}))
    small = spectrum(assemble(spec, 32)).eigenvalues[:10].real
    large = spectrum(assemble(spec, 256)).eigenvalues[:10].real
    oracle = mathieu_characteristic_values(5.0, 10)
    window_gap = float(np.max(np.abs(small - large)))
    oracle_gap = float(np.max(np.abs(large - oracle)))
    return window_gap <= 1e-10 and oracle_gap <= 1e-8, f"K=32 vs 256: {window_gap:.3e}, oracle: {oracle_gap:.3e}"


def _certificate_potential() -> CoeffSeq:
    return trig_poly(cos={1: 30.0}, sin={2: 10j})


def _small_perturbations(m: int, eps: float, count: int, seed: int) -> List[CoeffSeq]:
    rng = np.random.Generator(np.random.Philox(key=seed))
    perturbations = []
    for _ in range(count):
        dense = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        dv = CoeffSeq.from_dense(dense, -4)
        perturbations.append(dv.scale(eps * rng.random() / weighted_norm(dv, -m)))
    return perturbations


def check_localization_certificate(seed: int) -> Tuple[bool, str]:
    v = _certificate_potential()
    notes, ok = [], True
    for m in (1, 2):
        for K in (64, 128):
            n_max = K // 2
            base = min_certificate(spectrum(assemble(OperatorSpec(m, v), K)), n_max)
            common = perturbation_certificate(OperatorSpec(m, v), _small_perturbations(m, 0.05, 20, seed), K, n_max)
            ok &= base.found and common.found
            notes.append(f"m={m},K={K}: base=({base.M},{base.n0}) common=({common.M},{common.n0})")
    return ok, "; ".join(notes)


def check_bounded_radius(seed: int) -> Tuple[bool, str]:
    K, R = 64, 2.0
    rng = np.random.Generator(np.random.Philox(key=seed))
    failures = []
    for i in range(50):
        m = 1 + i % 2
        dense = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        v = CoeffSeq.from_dense(dense, -4)
        v = v.scale(R * rng.random() / weighted_norm(v, 0.0))
        search = min_certificate(spectrum(assemble(OperatorSpec(m, v), K)), K // 2)
        bound = disc_radius_bounded(m, R)
        if not search.found or any(max(d.dev_odd, d.dev_even) >= bound for d in search.report.discs):
            failures.append(i)
    return not failures, f"{len(failures)} of 50 potentials failed: {failures}"


def check_asymptotic_trend(seed: int) -> Tuple[bool, str]:
    K = 256
    notes, ok = [], True
    for name, v in (("dirac", dirac_comb(2.0, 0.0, 2 * K)),
                    ("random", random_decay(1, 0.5, window=K, norm=1.0, seed=seed))):
        ratios = dict(asymptotic_ratios(spectrum(assemble(OperatorSpec(1, v), K)), K // 2))
        low = float(np.median([ratios[n] for n in range(2, 17)]))
        high = float(np.median([ratios[n] for n in range(65, 129)]))
        ok &= high <= 0.5 * low
        notes.append(f"{name}: {high:.4g} vs {low:.4g}")
    c = 1.5
    ratios = asymptotic_ratios(spectrum(assemble(OperatorSpec(1, constant_potential(c)), K)), K // 2)
    error = max(abs(r - c / n) for n, r in ratios)
    ok &= error <= 1e-10
    notes.append(f"constant: {error:.3e}")
    return ok, "; ".join(notes)


def check_free_norm_formula(seed: int) -> Tuple[bool, str]:
    K = 64
    rng = np.random.Generator(np.random.Philox(key=seed))
    worst, used = 0.0, 0
    while used < 100:
        m = int(rng.integers(1, 4))
        diff = rng.uniform(-2.0, 2.0)
        t = rng.uniform(-1.0, 1.0)
        s = t + diff
        scale = (20.0 * math.pi) ** (2 * m)
        lam = complex(rng.uniform(-0.1, 1.0) * scale, rng.uniform(-1.0, 1.0) * scale ** 0.5)
        k = np.arange(-K, K + 1)
        terms = (1.0 + np.abs(k)) ** (m * diff) / np.abs(lam - free_diagonal(m, K))
        if abs(k[int(np.argmax(terms))]) >= K:
            continue
        exact = free_resolvent_norm(lam, m, s, t)
        worst = max(worst, abs(exact - window_resolvent_norm(lam, m, s, t, K)) / exact)
        used += 1
    return worst <= 1e-12, f"max relative mismatch {worst:.3e} over {used} samples"


def check_scaling_bands(seed: int) -> Tuple[bool, str]:
    notes, ok = [], True
    for m in (1, 2):
        rows = lemma_scaling_sweep(m, [8, 16, 32, 64], 128)
        scaled = [row.n ** m * row.norms["(-m,0)->(-m,0)"] for row in rows]
        cross = [row.norms["(-m,n)->(m,-n)"] for row in rows]
        gain = gain_ratios(rows, m)
        ok &= max(scaled) <= 2 * min(scaled) and max(cross) <= 4 * min(cross) and max(gain) <= 4 * min(gain)
        notes.append(f"m={m}: [{min(scaled):.4g}, {max(scaled):.4g}] / [{min(cross):.4g}, {max(cross):.4g}]"
                     f" / [{min(gain):.4g}, {max(gain):.4g}]")
    return ok, "; ".join(notes)


def check_riesz_counting(seed: int) -> Tuple[bool, str]:
    free = HomotopyFamily(m=1, b0=CoeffSeq(), b1=CoeffSeq(), K=32)
    worst = 0.0
    for center, radius, expected in ((0.0, 1.0, 1), (math.pi ** 2, 1.0, 2), (4 * math.pi ** 2, 2.0, 2)):
        counted = riesz_count(free, Contour(center, radius, 64))
        if counted.count != expected:
            return False, f"v=0 count {counted.count} != {expected} at center {center:g}"
        worst = max(worst, abs(counted.trace - expected))
    if worst > 1e-6:
        return False, f"v=0 trace error {worst:.3e}"

    for center, radius, expected in ((math.pi ** 2, 5.0, 2), (0.0, 3.0, 1)):
        contour = Contour(center, radius, 8)
        coarse = abs(contour_trace(free.matrix(), contour) - expected)
        fine = abs(contour_trace(free.matrix(), contour.with_nodes(16)) - expected)
        if fine > coarse ** 2:
            return False, f"node doubling error {fine:.3e} > {coarse:.3e}^2 at center {center:g}"

    rng = np.random.Generator(np.random.Philox(key=seed))
    valid, attempts = 0, 0
    while valid < 30 and attempts < 300:
        attempts += 1
        v = random_decay(1, 0.5, window=8, norm=5.0 * rng.random(), seed=seed + attempts)
        n = int(rng.integers(1, 6))
        contour = Contour(n * n * math.pi ** 2, (0.3 + 0.5 * rng.random()) * n * math.pi ** 2, 64)
        try:
            counted = riesz_count(HomotopyFamily(m=1, b0=v, b1=CoeffSeq(), K=32), contour)
        except (ContourError, QuadratureError):
            continue
        if counted.count != counted.direct_count:
            return False, f"count {counted.count} != direct {counted.direct_count}"
        valid += 1
    return valid == 30, f"trace error {worst:.3e}; {valid} random pairs agree ({attempts} drawn)"


def check_homotopy_invariance(seed: int) -> Tuple[bool, str]:
    contour = Contour(4 * math.pi ** 2, 2 * math.pi ** 2, 128)
    s_grid = [i / 10 for i in range(11)]
    counts = []
    for i in range(10):
        v = random_decay(1, 0.25, window=16, norm=3.0, seed=seed + i)
        family = HomotopyFamily.from_split(OperatorSpec(1, v), 0.05, 32)
        result = homotopy_count_invariance(family, contour, s_grid)
        if not result.constant or any(c.count != c.direct_count for c in result.counts):
            return False, f"potential {i}: counts {[c.count for c in result.counts]}"
        counts.append(result.counts[0].count)
    return True, f"constant counts {counts}"


def check_neumann_identity(seed: int) -> Tuple[bool, str]:
    K = 32
    worst = 0.0
    b0 = CoeffSeq({-1: 5.0, 1: 5.0})
    b1 = CoeffSeq({-3: 1.0, 3: 1.0, 2: 0.5j})
    for lam in (complex(-5, 5), complex(4 * math.pi ** 2, 10), complex(20, 3)):
        unit = HomotopyFamily(m=1, b0=b0, b1=b1, K=K)
        X = unit.b1_matrix() @ np.linalg.inv(lam * np.eye(unit.size) - unit.free_part() - unit.b0_matrix())
        family = HomotopyFamily(m=1, b0=b0, b1=b1.scale(0.45 / np.linalg.norm(X, 2)), K=K)
        series = neumann_resolvent(family, lam, 30)
        exact = direct_resolvent(family, lam)
        worst = max(worst, float(np.linalg.norm(series.matrix - exact, 2) / np.linalg.norm(exact, 2)))
    return worst <= 1e-8, f"max relative error {worst:.3e}"


def check_relative_bound(seed: int) -> Tuple[bool, str]:
    K = 64
    potentials = [dirac_comb(2.0, 0.0, K)] + [random_decay(1, 0.5, window=K, seed=seed + i) for i in range(10)]
    failures = []
    for i, v in enumerate(potentials):
        for delta in (0.1, 0.01):
            result = relative_bound_check(v, 1, delta, 200, K, seed=seed)
            if not result.passed:
                failures.append((i, delta, result.violation_digest))
    return not failures, f"failures {failures}"


ACCEPTANCE_CHECKS: List[Tuple[str, CheckFn]] = [
    ("free spectrum exactness", check_free_spectrum),
    ("shift covariance", check_shift_covariance),
    ("hermitian reality", check_hermitian_reality),
    ("mathieu oracle", check_mathieu),
    ("localization certificate", check_localization_certificate),
    ("bounded-potential radius", check_bounded_radius),
    ("asymptotic trend", check_asymptotic_trend),
    ("closed-form resolvent norm", check_free_norm_formula),
    ("resolvent scaling bands", check_scaling_bands),
    ("riesz counting", check_riesz_counting),
    ("homotopy invariance", check_homotopy_invariance),
    ("neumann identity", check_neumann_identity),
    ("relative bound", check_relative_bound),
]


def verify_all_suite(ctx: SuiteContext):
    for label, fn in ACCEPTANCE_CHECKS:
        with ctx.stage(label):
            try:
                passed, message = fn(ctx.seed)
            except AssertionError as e:
                passed, message = False, str(e)
        ctx.check(label, passed, message)
    ctx.emit(files.write_table(ctx.path("verify_all.csv"), ["label", "passed", "message"],
                               ([a.label, a.passed, a.message] for a in ctx.assertions)))


SUITES: Dict[Suite, Callable[[SuiteContext], None]] = {
    Suite.SPECTRUM: spectrum_suite,
    Suite.LOCALIZE: localize_suite,
    Suite.ASYMPTOTICS: asymptotics_suite,
    Suite.RESOLVENT: resolvent_suite,
    Suite.PROJECTOR: projector_suite,
    Suite.VERIFY_ALL: verify_all_suite,
}
