"""Resolvent norms, Neumann series, contour counting and the relative-bound check.

Everything here works on Galerkin sections; weighted norms use the diagonal
weight matrices of SpaceSpec on the window [-K, K].
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from hillspec.errors import (
    ContourError,
    DomainError,
    HomotopyError,
    NeumannDivergenceError,
    NumericalError,
    OperatorError,
    PoleError,
    PoleProximityError,
    QuadratureError,
    RegionError,
    WindowError,
)
from hillspec.services.eig import spectrum
from hillspec.services.operator import OperatorSpec, TruncatedOperator, assemble, free_diagonal
from hillspec.services.parallel import ordered_map
from hillspec.services.seqspace import (
    CoeffSeq,
    SpaceSpec,
    bracket,
    convolution_ratio,
    convolve,
    estimate_convolution_constant,
    split_tail,
    toeplitz_section,
    weighted_norm,
)

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e14
CONTOUR_GUARD = 1e-6
QUADRATURE_TOLERANCE = 1e-3
DEFAULT_NODES = 64


def _check_condition(matrix: np.ndarray, lam: complex) -> float:
    sv = linalg.svdvals(matrix)
    condition = math.inf if sv[-1] == 0 else float(sv[0] / sv[-1])
    if condition > CONDITION_LIMIT:
        logger.error(f"lambda={lam} is too close to the spectrum: condition {condition:.3e}")
        raise PoleProximityError(f"lambda - A is near-singular (condition {condition:.3e})", lam=lam,
                                 condition=condition)
    return condition


def free_resolvent_norm(lam: complex, m: int, s: float, t: float) -> float:
    """sup_k <k>^{m(s-t)} / |lambda - k^{2m} pi^{2m}|, the norm of (lambda - D_m)^{-1}: h^{t m} -> h^{s m}.

    The envelope G(k) = (1+k)^p / ((k pi)^{2m} - |lambda|) dominates every term
    beyond k and decreases once (k pi)^{2m} > |lambda| (p <= 2m), so the scan
    radius doubles until G(k*) drops below the scan maximum.
    """
    if m < 1:
        raise OperatorError(f"Operator order m must be >= 1, got {m}")
    if s - t > 2:
        raise DomainError(f"free_resolvent_norm needs s - t <= 2, got {s - t}")
    lam = complex(lam)
    p = m * (s - t)
    tail_limit = math.pi ** (-2 * m) if p == 2 * m else 0.0
    pi_2m = math.pi ** (2 * m)

    k_star = max(1, int(math.ceil(abs(lam) ** (1.0 / (2 * m)) / math.pi)) + 1)
    for _ in range(64):
        d = free_diagonal(m, k_star)[k_star:]
        gaps = np.abs(lam - d)
        if np.any(gaps == 0):
            k = int(np.flatnonzero(gaps == 0)[0])
            raise PoleError(f"lambda={lam} is the free eigenvalue at k={k}", lam=lam, k=k)
        scan = float(np.max(bracket(np.arange(k_star + 1)) ** p / gaps))
        envelope = (1.0 + k_star) ** p / (k_star ** (2 * m) * pi_2m - abs(lam))
        if envelope <= max(scan, tail_limit):
            return max(scan, tail_limit)
        k_star *= 2
    raise NumericalError(f"free_resolvent_norm scan did not settle for lambda={lam}, m={m}, s-t={s - t}")


def window_resolvent_norm(lam: complex, m: int, s: float, t: float, K: int) -> float:
    """The same supremum restricted to the window |k| <= K"""
    d = free_diagonal(m, K)
    return float(np.max(bracket(np.arange(-K, K + 1)) ** (m * (s - t)) / np.abs(complex(lam) - d)))


def empirical_resolvent_norm(A: TruncatedOperator, lam: complex, in_space: SpaceSpec,
                             out_space: SpaceSpec) -> float:
    """Largest singular value of W_out (lambda I - A)^{-1} W_in^{-1}"""
    matrix = complex(lam) * np.eye(A.size) - A.A
    _check_condition(matrix, lam)
    weighted = linalg.solve(matrix, np.diag(1.0 / in_space.weights(A.K)))
    weighted *= out_space.weights(A.K)[:, None]
    return float(linalg.svdvals(weighted)[0])


@dataclass(frozen=True)
class HomotopyFamily:
    """D_m + B(b0) + s B(b1) on the window [-K, K]"""
    m: int
    b0: CoeffSeq
    b1: CoeffSeq
    K: int
    s: float = 1.0

    def __post_init__(self):
        if self.m < 1:
            raise OperatorError(f"Operator order m must be >= 1, got {self.m}")
        if self.K < 1:
            raise OperatorError(f"Truncation radius K must be >= 1, got {self.K}")
        if not 0.0 <= self.s <= 1.0:
            raise DomainError(f"Homotopy parameter s must lie in [0, 1], got {self.s}")

    @classmethod
    def from_split(cls, spec: OperatorSpec, eps: float, K: int) -> "HomotopyFamily":
        split = split_tail(spec.v, spec.m, eps)
        return cls(m=spec.m, b0=split.v0, b1=split.v1, K=K)

    def at(self, s: float) -> "HomotopyFamily":
        return replace(self, s=float(s))

    @property
    def size(self) -> int:
        return 2 * self.K + 1

    def potential(self) -> CoeffSeq:
        return self.b0 + self.b1.scale(self.s)

    def free_part(self) -> np.ndarray:
        return np.diag(free_diagonal(self.m, self.K)).astype(np.complex128)

    def b0_matrix(self) -> np.ndarray:
        return toeplitz_section(self.b0, self.K).astype(np.complex128)

    def b1_matrix(self) -> np.ndarray:
        return toeplitz_section(self.b1, self.K).astype(np.complex128)

    def matrix(self) -> np.ndarray:
        return self.free_part() + self.b0_matrix() + self.s * self.b1_matrix()


# Neumann-series resolvents
@dataclass
class NeumannResult:
    matrix: np.ndarray
    rho: float
    order: int
    error_bound: float


def _neumann_parts(family: HomotopyFamily, lam: complex) -> Tuple[np.ndarray, np.ndarray, float]:
    """L_lambda^{-1} = (lambda - D_m - B0)^{-1}, X = s B1 L_lambda^{-1} and rho = ||X||_2"""
    L = complex(lam) * np.eye(family.size) - family.free_part() - family.b0_matrix()
    _check_condition(L, lam)
    L_inv = linalg.inv(L)
    X = family.s * family.b1_matrix() @ L_inv
    rho = float(np.linalg.norm(X, 2))
    if rho >= 1.0:
        logger.error(f"Neumann series diverges at lambda={lam}: rho={rho:.6g}")
        raise NeumannDivergenceError(f"||B1 L^-1|| = {rho:.6g} >= 1", rho=rho)
    return L_inv, X, rho


def neumann_resolvent(family: HomotopyFamily, lam: complex, order: int) -> NeumannResult:
    """L_lambda^{-1} sum_{k=0}^{order} (B1 L_lambda^{-1})^k.

    error_bound bounds the operator-norm error relative to the exact inverse:
    (1 + rho) rho^{order+1} / (1 - rho).
    """
    if order < 0:
        raise DomainError(f"Series order must be >= 0, got {order}")
    L_inv, X, rho = _neumann_parts(family, lam)
    identity = np.eye(family.size, dtype=np.complex128)
    series = identity.copy()
    for _ in range(order):
        series = identity + X @ series
    bound = (1.0 + rho) * rho ** (order + 1) / (1.0 - rho)
    logger.debug(f"Neumann resolvent at lambda={lam}: rho={rho:.4g}, order={order}, bound={bound:.3e}")
    return NeumannResult(matrix=L_inv @ series, rho=rho, order=order, error_bound=bound)


def even_power_resolvent(family: HomotopyFamily, lam: complex, terms: int) -> np.ndarray:
    """L^{-1} (I + T X + T X^2) with T = sum_{l=0}^{terms} X^{2l}"""
    if terms < 0:
        raise DomainError(f"Series length must be >= 0, got {terms}")
    L_inv, X, _ = _neumann_parts(family, lam)
    identity = np.eye(family.size, dtype=np.complex128)
    X2 = X @ X
    T = identity.copy()
    for _ in range(terms):
        T = identity + X2 @ T
    return L_inv @ (identity + T @ X + T @ X2)


def direct_resolvent(family: HomotopyFamily, lam: complex) -> np.ndarray:
    matrix = complex(lam) * np.eye(family.size) - family.matrix()
    _check_condition(matrix, lam)
    return linalg.inv(matrix)


# Contour counting
@dataclass(frozen=True)
class Contour:
    """Circle |z - center| = radius with equispaced trapezoidal nodes"""
    center: complex
    radius: float
    node_count: int = DEFAULT_NODES

    def __post_init__(self):
        if not self.radius > 0:
            raise RegionError(f"Contour radius must be positive, got {self.radius}")
        if self.node_count < 8 or self.node_count % 2:
            raise RegionError(f"node_count must be an even integer >= 8, got {self.node_count}")

    def with_nodes(self, node_count: int) -> "Contour":
        return replace(self, node_count=node_count)

    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.node_count) / self.node_count

    def nodes(self) -> np.ndarray:
        return self.center + self.radius * np.exp(1j * self.angles())

    def inside(self, values: Sequence[complex]) -> np.ndarray:
        return np.abs(np.asarray(values, dtype=np.complex128) - self.center) < self.radius

    def distance(self, values: Sequence[complex]) -> np.ndarray:
        return np.abs(np.abs(np.asarray(values, dtype=np.complex128) - self.center) - self.radius)


@dataclass(frozen=True)
class RieszCount:
    s: float
    trace: complex
    count: int
    direct_count: int
    tolerance: float = QUADRATURE_TOLERANCE

    @property
    def valid(self) -> bool:
        return abs(self.trace - self.count) <= self.tolerance


def contour_trace(matrix: np.ndarray, contour: Contour) -> complex:
    """Trapezoidal (1/2 pi i) contour integral of tr((lambda - A)^{-1})"""
    identity = np.eye(matrix.shape[0], dtype=np.complex128)

    def node_trace(z: complex) -> complex:
        return complex(np.trace(linalg.inv(z * identity - matrix)))

    nodes = contour.nodes()
    traces = np.array(ordered_map(node_trace, nodes.tolist()), dtype=np.complex128)
    # fixed summation order over the node index
    return complex(np.sum((nodes - contour.center) * traces) / contour.node_count)


def riesz_count(family: HomotopyFamily, contour: Contour,
                quad_tol: float = QUADRATURE_TOLERANCE) -> RieszCount:
    """Eigenvalue count inside the contour from the trace of the Riesz projector"""
    matrix = family.matrix()
    values = spectrum(matrix).eigenvalues
    distances = contour.distance(values)
    closest = int(np.argmin(distances))
    if distances[closest] < CONTOUR_GUARD * contour.radius:
        logger.error(f"Eigenvalue {values[closest]} lies within {distances[closest]:.3e} of the contour")
        raise ContourError(
            f"Eigenvalue {values[closest]} is within {CONTOUR_GUARD:g} * radius of the contour",
            eigenvalue=complex(values[closest]), distance=float(distances[closest]),
        )
    trace = contour_trace(matrix, contour)
    count = int(round(trace.real))
    if abs(trace - count) > quad_tol:
        logger.error(f"Contour trace {trace} is not within {quad_tol:g} of an integer at {contour.node_count} nodes")
        raise QuadratureError(f"Trace {trace} is not integral; increase node_count beyond {contour.node_count}",
                              trace=trace)
    direct = int(np.count_nonzero(contour.inside(values)))
    logger.debug(f"Riesz count s={family.s}: trace={trace}, count={count}, direct={direct}")
    return RieszCount(s=family.s, trace=trace, count=count, direct_count=direct, tolerance=quad_tol)


@dataclass
class HomotopyResult:
    counts: List[RieszCount] = field(default_factory=list)

    @property
    def constant(self) -> bool:
        return len({c.count for c in self.counts}) <= 1


def homotopy_count_invariance(family: HomotopyFamily, contour: Contour, s_grid: Sequence[float],
                              quad_tol: float = QUADRATURE_TOLERANCE) -> HomotopyResult:
    result = HomotopyResult()
    for s in s_grid:
        try:
            result.counts.append(riesz_count(family.at(s), contour, quad_tol))
        except NumericalError as e:
            logger.error(f"Homotopy step s={s} failed: {e}")
            raise HomotopyError(f"riesz_count failed at s={s}: {e}", s=float(s), cause=e) from e
    if not result.constant:
        logger.warning(f"Count changes along the homotopy: {[c.count for c in result.counts]}")
    return result


# Relative bound of the potential w.r.t. D_m
@dataclass
class RelativeBoundResult:
    passed: bool
    worst_margin: float
    c_hat: float
    cutoff: int
    trials: int
    violation_digest: Optional[str] = None


def _calibrated_split(v: CoeffSeq, m: int, delta: float, K: int, seed: int):
    """Split with ||v_delta||_{-m} < delta / C and C covering both parts.

    Ratios of the parts are measured on a window that holds every output of
    the convolution with inputs on [-K, K].
    """
    c_hat = estimate_convolution_constant(m, K, seed=seed)
    outer = K + v.radius
    for _ in range(32):
        split = split_tail(v, m, 0.99 * delta / c_hat)
        measured = [1.1 * convolution_ratio(part, m, outer) for part in (split.v0, split.v1) if not part.is_zero]
        updated = max([c_hat] + measured)
        if updated <= c_hat:
            return split, c_hat
        c_hat = updated
    return split, c_hat


def relative_bound_check(v: CoeffSeq, m: int, delta: float, trials: int, K: int,
                         seed: int = 0) -> RelativeBoundResult:
    """||Vu||_{-m} <= delta ||D_m u||_{-m} + (C ||v0||_m + delta) ||u||_{-m} over random u"""
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if K < 1:
        raise WindowError(f"Window radius must be >= 1, got {K}")
    split, c_hat = _calibrated_split(v, m, delta, K, seed)
    smooth = c_hat * weighted_norm(split.v0, m) + delta

    k = np.arange(-K, K + 1)
    low = bracket(k) ** (-m)
    free = free_diagonal(m, K)
    rng = np.random.Generator(np.random.Philox(key=seed))
    worst, violation = math.inf, None
    for _ in range(trials):
        u_dense = rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)
        u = CoeffSeq.from_dense(u_dense, -K)
        lhs = weighted_norm(convolve(v, u), -m)
        rhs = delta * float(np.linalg.norm(low * free * u_dense)) + smooth * float(np.linalg.norm(low * u_dense))
        margin = rhs - lhs
        if margin < worst:
            worst = margin
            if margin < 0:
                violation = u.digest()
    passed = violation is None
    log = logger.info if passed else logger.warning
    log(f"Relative bound m={m}, delta={delta}: C={c_hat:.4g}, cutoff={split.cutoff}, worst margin {worst:.4g}")
    return RelativeBoundResult(passed=passed, worst_margin=worst, c_hat=c_hat, cutoff=split.cutoff,
                               trials=trials, violation_digest=violation)


# Scaling of the free resolvent on Vert boundaries
SCALING_PAIRS = ("(-m,0)->(-m,0)", "(-m,n)->(-m,n)", "(-m,n)->(-m,0)", "(-m,0)->(m,n)", "(-m,n)->(m,-n)")


def _scaling_spaces(m: int, n: int) -> Dict[str, Tuple[SpaceSpec, SpaceSpec]]:
    return {
        "(-m,0)->(-m,0)": (SpaceSpec(-m), SpaceSpec(-m)),
        "(-m,n)->(-m,n)": (SpaceSpec(-m, n), SpaceSpec(-m, n)),
        "(-m,n)->(-m,0)": (SpaceSpec(-m, n), SpaceSpec(-m)),
        "(-m,0)->(m,n)": (SpaceSpec(-m), SpaceSpec(m, n)),
        "(-m,n)->(m,-n)": (SpaceSpec(-m, n), SpaceSpec(m, -n)),
    }


@dataclass(frozen=True)
class ScalingRow:
    n: int
    lam: complex
    norms: Dict[str, float]


def lemma_scaling_sweep(m: int, n_values: Sequence[int], K: int) -> List[ScalingRow]:
    """Weighted norms of (lambda - D_m)^{-1} at lambda = n^{2m} pi^{2m} + i n^m"""
    if any(n < 1 or n > K for n in n_values):
        raise WindowError(f"Every n must lie in [1, K={K}], got {list(n_values)}")
    section = assemble(OperatorSpec(m=m, v=CoeffSeq()), K)
    d = free_diagonal(m, K)

    def row(n: int) -> ScalingRow:
        lam = complex(d[K + n], float(n) ** m)
        norms = {name: empirical_resolvent_norm(section, lam, src, dst)
                 for name, (src, dst) in _scaling_spaces(m, n).items()}
        return ScalingRow(n=n, lam=lam, norms=norms)

    rows = ordered_map(row, list(n_values))
    logger.info(f"Scaling sweep m={m}, K={K}, n in {list(n_values)}")
    return rows


def gain_ratios(rows: Sequence[ScalingRow], m: int, n_min: int = 8, n_max: int = 64) -> List[float]:
    """n^{-m} ||R||_{h^{-m} -> h^{m,n}} for the rows with n_min <= n <= n_max"""
    return [row.norms["(-m,0)->(m,n)"] / float(row.n) ** m for row in rows if n_min <= row.n <= n_max]
