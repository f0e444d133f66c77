"""Independent oracle for the Mathieu-type Hill operator -y'' + 2q cos(pi x) y.

In coefficients {-1: q, 1: q} the eigenproblem is the three-term recurrence
q c_{k-1} + ((k pi)^2 - lambda) c_k + q c_{k+1} = 0. It splits into even
(c_{-k} = c_k) and odd (c_{-k} = -c_k) chains, each a symmetric tridiagonal
problem. Eigenvalues are located by bisection on the Sturm count, i.e. the
number of negative pivots of the continued-fraction recurrence
p_k = (d_k - lambda) - b_k^2 / p_{k-1}.

The classical parameters are a = 4 lambda / pi^2 and q_M = 4 q / pi^2; the even
chain gives a_{2n}(q_M), the odd chain b_{2n+2}(q_M).
"""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from hillspec.errors import DomainError

logger = logging.getLogger(__name__)

_TINY = 1e-300


def _sturm_count(diag: np.ndarray, off_sq: np.ndarray, lam: float) -> int:
    """Number of eigenvalues strictly below lam"""
    count = 0
    pivot = diag[0] - lam
    if pivot < 0:
        count += 1
    for i in range(1, diag.size):
        if pivot == 0.0:
            pivot = _TINY
        pivot = (diag[i] - lam) - off_sq[i - 1] / pivot
        if pivot < 0:
            count += 1
    return count


def _bisect(diag: np.ndarray, off: np.ndarray, index: int, max_iter: int = 200) -> float:
    """index-th smallest (0-based) eigenvalue of the symmetric tridiagonal (diag, off)"""
    radius = np.zeros(diag.size)
    radius[:-1] += np.abs(off)
    radius[1:] += np.abs(off)
    lo = float(np.min(diag - radius))
    hi = float(np.max(diag + radius))
    off_sq = off * off
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _sturm_count(diag, off_sq, mid) >= index + 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def parity_chains(q: float, N: int) -> Tuple[Tuple[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]:
    """(diag, off) of the even chain k = 0..N and the odd chain k = 1..N"""
    k = np.arange(0, N + 1, dtype=np.float64)
    d = (k * np.pi) ** 2
    even_off = np.full(N, float(q))
    # symmetrized first coupling: c~_0 = sqrt(2) c_0
    even_off[0] = math.sqrt(2.0) * q
    odd_off = np.full(N - 1, float(q))
    return (d, even_off), (d[1:], odd_off)


def mathieu_characteristic_values(q: float, count: int, N: Optional[int] = None) -> np.ndarray:
    """Lowest `count` eigenvalues (ascending, with multiplicity) for v = {-1: q, 1: q}"""
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    if isinstance(q, complex) or not math.isfinite(q):
        raise DomainError(f"The oracle covers real finite q only, got {q!r}")
    N = N if N is not None else count + 30
    (even_diag, even_off), (odd_diag, odd_off) = parity_chains(q, N)
    values: List[float] = []
    for index in range(min(count, even_diag.size)):
        values.append(_bisect(even_diag, even_off, index))
    for index in range(min(count, odd_diag.size)):
        values.append(_bisect(odd_diag, odd_off, index))
    values.sort()
    logger.debug(f"Mathieu oracle q={q}, N={N}: {values[:count]}")
    return np.array(values[:count])
