"""Dense eigensolves of Galerkin sections and the lexicographic ordering.

Three paths: diagonal matrices return their diagonal, exactly Hermitian
matrices go through LAPACK zheevd (real eigenvalues), everything else through
zgeev (Hessenberg reduction + shifted QR). Every eigenpair is certified by its
residual before the ordering stage.
"""
import hashlib
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy import linalg

from hillspec.errors import DomainError, EigensolverError
from hillspec.services.operator import OperatorSpec, TruncatedOperator, assemble
from hillspec.services.parallel import ordered_map

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-8
TIE_TOLERANCE = 1e-9
NOISE_FLOOR = 1e-10


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    K: int
    m: Optional[int]
    potential_digest: str
    path: str
    residual_tolerance: float = RESIDUAL_TOLERANCE
    tie_tolerance: float = TIE_TOLERANCE

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def metadata(self) -> dict:
        return {
            "m": self.m,
            "K": self.K,
            "size": len(self.eigenvalues),
            "potential_digest": self.potential_digest,
            "path": self.path,
            "residual_tolerance": self.residual_tolerance,
            "tie_tolerance": self.tie_tolerance,
            "max_residual": float(self.residuals.max(initial=0.0)),
        }


def lex_order(values: Sequence[complex], tie_tol: float = TIE_TOLERANCE) -> np.ndarray:
    """Permutation sorting by real part, then imaginary part inside real-part ties.

    A tie group opens at its smallest real part and takes every following
    value whose real part lies within tie_tol * (1 + max|lambda|) of that
    first member, so a group never spans more than the tolerance. The result
    depends only on the multiset of values.
    """
    values = np.asarray(values, dtype=np.complex128)
    if values.size == 0:
        return np.zeros(0, dtype=np.int64)
    by_real = np.lexsort((values.imag, values.real))
    ordered = values[by_real]
    magnitude = np.abs(ordered)
    breaks, first = [], 0
    for i in range(1, ordered.size):
        scale = tie_tol * (1.0 + max(magnitude[first], magnitude[i]))
        if ordered[i].real - ordered[first].real > scale:
            breaks.append(i)
            first = i
    pieces = []
    for group in np.split(np.arange(values.size), breaks):
        members = by_real[group]
        inner = np.lexsort((values[members].real, values[members].imag))
        pieces.append(members[inner])
    return np.concatenate(pieces)


def lex_sort(values: Sequence[complex], tie_tol: float = TIE_TOLERANCE) -> np.ndarray:
    values = np.asarray(values, dtype=np.complex128)
    return values[lex_order(values, tie_tol)]


def _unpack(A: Union[TruncatedOperator, np.ndarray]):
    if isinstance(A, TruncatedOperator):
        return np.asarray(A.A), A.K, A.spec.m, A.spec.v.digest()
    matrix = np.asarray(A, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"Eigensolve needs a square matrix, got shape {matrix.shape}")
    digest = hashlib.sha256(np.ascontiguousarray(matrix).tobytes()).hexdigest()
    return matrix, (matrix.shape[0] - 1) // 2, None, digest


def _residuals(matrix: np.ndarray, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    frob = np.linalg.norm(matrix, "fro")
    if frob == 0.0:
        return np.zeros(values.size)
    defect = matrix @ vectors - vectors * values[None, :]
    return np.linalg.norm(defect, axis=0) / (np.linalg.norm(vectors, axis=0) * frob)


def spectrum(A: Union[TruncatedOperator, np.ndarray],
             residual_tol: float = RESIDUAL_TOLERANCE,
             tie_tol: float = TIE_TOLERANCE) -> SpectrumResult:
    """All 2K+1 eigenvalues (with multiplicity), residual-certified and lex-ordered"""
    matrix, K, m, digest = _unpack(A)
    if not np.all(np.isfinite(matrix)):
        raise DomainError("Matrix has non-finite entries")
    size = matrix.shape[0]

    diagonal = np.diagonal(matrix)
    if np.count_nonzero(matrix - np.diag(diagonal)) == 0:
        path = "diagonal"
        values = diagonal.astype(np.complex128)
        residuals = np.zeros(size)
    elif np.array_equal(matrix, matrix.conj().T):
        path = "hermitian"
        try:
            real_values, vectors = linalg.eigh(matrix)
        except linalg.LinAlgError as e:
            logger.error(f"Hermitian eigensolve failed for size {size}: {e}")
            raise EigensolverError(f"zheevd did not converge: {e}", size=size, K=K)
        values = real_values.astype(np.complex128)
        residuals = _residuals(matrix, values, vectors)
    else:
        path = "general"
        try:
            values, vectors = linalg.eig(matrix)
        except linalg.LinAlgError as e:
            logger.error(f"QR iteration failed for size {size}: {e}")
            raise EigensolverError(f"zgeev did not converge: {e}", size=size, K=K)
        residuals = _residuals(matrix, values, vectors)

    worst = float(residuals.max(initial=0.0))
    if worst > residual_tol:
        logger.error(f"Residual certification failed: max residual {worst:.3e} > {residual_tol:.1e}")
        raise EigensolverError(
            f"Eigenpair residual {worst:.3e} exceeds tolerance {residual_tol:.1e}",
            size=size, K=K, partial=values,
        )

    order = lex_order(values, tie_tol)
    logger.debug(f"Spectrum K={K}, m={m}: {size} eigenvalues via {path} path, max residual {worst:.2e}")
    return SpectrumResult(
        eigenvalues=values[order],
        residuals=residuals[order],
        K=K,
        m=m,
        potential_digest=digest,
        path=path,
        residual_tolerance=residual_tol,
        tie_tolerance=tie_tol,
    )


@dataclass
class TruncationRow:
    K: int
    leading: np.ndarray
    max_change: Optional[float] = None


@dataclass
class TruncationStudy:
    rows: List[TruncationRow] = field(default_factory=list)
    non_cauchy: List[int] = field(default_factory=list)

    @property
    def cauchy(self) -> bool:
        return not self.non_cauchy

    def changes(self) -> List[float]:
        return [row.max_change for row in self.rows if row.max_change is not None]


def truncation_study(spec: OperatorSpec, K_list: Sequence[int], count: int,
                     residual_tol: float = RESIDUAL_TOLERANCE,
                     tie_tol: float = TIE_TOLERANCE) -> TruncationStudy:
    """Leading `count` eigenvalues per K and their change between consecutive K.

    A K is flagged non-Cauchy when its change grows compared with the previous
    one while staying above the round-off floor.
    """
    K_list = [int(K) for K in K_list]
    if not K_list:
        raise DomainError("K_list must not be empty")
    if any(b <= a for a, b in zip(K_list, K_list[1:])):
        raise DomainError(f"K_list must be strictly ascending, got {K_list}")
    if count < 1 or count > 2 * K_list[0] + 1:
        raise DomainError(f"count must lie in [1, {2 * K_list[0] + 1}], got {count}")

    def solve(K: int) -> np.ndarray:
        return spectrum(assemble(spec, K), residual_tol, tie_tol).eigenvalues[:count]

    leading = ordered_map(solve, K_list)
    study = TruncationStudy()
    previous_change = None
    for index, (K, values) in enumerate(zip(K_list, leading)):
        change = None
        if index:
            change = float(np.max(np.abs(values - leading[index - 1])))
            floor = NOISE_FLOOR * (1.0 + float(np.max(np.abs(values))))
            if previous_change is not None and change > previous_change and change > floor:
                study.non_cauchy.append(K)
                logger.warning(f"Non-Cauchy truncation behaviour at K={K}: change {change:.3e} > {previous_change:.3e}")
            previous_change = change
        study.rows.append(TruncationRow(K=K, leading=values, max_change=change))
    logger.info(f"Truncation study m={spec.m}, K_list={K_list}: changes {study.changes()}")
    return study
