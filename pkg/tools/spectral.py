import logging
from typing import Dict, List, Tuple

import numpy as np
from scipy.linalg import LinAlgError, eigh, lu_factor, lu_solve, toeplitz

from models.errors import DomainError, EigensolverError, EvaluationError, InterlacingError, SingularityError
from models.models import FourierField, LaxTruncation, Profile, SpectralLadder
from tools.profiles import canonicalize

logger = logging.getLogger("spectral")

GAP_TOL = 1e-8
DEPTH = 32
SPACING_TOL = 1e-8
DETERMINANT_TOL = 1e-8


# ---------------------------
# Truncated Lax operator
# ---------------------------
def lax_matrix(f: FourierField, eps: float, N: int) -> LaxTruncation:
    """L[h, h'] = -eps h delta(h - h') + V_{h - h'} on Hardy modes h = 0..N-1."""
    if N < 2:
        raise DomainError(f"truncation needs N >= 2, got {N}")
    column = np.zeros(N, dtype=complex)
    column[0] = f.a
    K = min(f.K, N - 1)
    column[1 : K + 1] = f.modes[:K]
    L = toeplitz(column, np.conj(column)) - eps * np.diag(np.arange(N))
    return LaxTruncation(dim=N, eps=eps, matrix=L)


def ladder(L: LaxTruncation, check_residuals: bool = True, strict: bool = False) -> SpectralLadder:
    """
    Eigenvalues in decreasing order with weights |<0|psi>|^2.

    Consecutive eigenvalues of a field sit at least eps apart; min_step
    records the smallest spacing. With strict=True a closer pair raises
    InterlacingError instead of a warning.
    """
    try:
        values, vectors = eigh(L.matrix)
    except LinAlgError as e:
        raise EigensolverError(f"Hermitian eigensolver failed on a {L.dim}x{L.dim} truncation: {e}") from e
    order = np.argsort(values)[::-1]
    values, vectors = values[order], vectors[:, order]

    if check_residuals:
        scale = np.linalg.norm(L.matrix, 2)
        residual = np.linalg.norm(L.matrix @ vectors - vectors * values, axis=0)
        if np.any(residual > 1e-10 * max(scale, 1.0)):
            raise EigensolverError(f"eigenpair residual {residual.max():.3e} exceeds tolerance")

    steps = values[:-1] - values[1:]
    min_step = float(steps.min()) if steps.size else None
    if steps.size and min_step < L.eps - SPACING_TOL:
        h = int(np.argmin(steps)) + 1
        message = f"Eigenvalues {h - 1} and {h} are closer than eps: {steps[h - 1]:.3e}"
        if strict:
            raise InterlacingError(message, index=h, gap=float(steps[h - 1] - L.eps))
        logger.warning(message)
    weights = np.abs(vectors[0]) ** 2
    return SpectralLadder(up=values, weights=weights, eps=L.eps, vectors=vectors, min_step=min_step)


def lower_ladder(sl: SpectralLadder) -> np.ndarray:
    """C_h^down = C_{h-1}^up - eps for h >= 1."""
    return sl.up[:-1] - sl.eps


def shift_check(f: FourierField, eps: float, N: int) -> float:
    """Compare the spectrum of the minor on rows 1..N-1 with -eps + spectrum of rows 0..N-2."""
    L = lax_matrix(f, eps, N).matrix
    minor = np.linalg.eigvalsh(L[1:, 1:])
    shifted = np.linalg.eigvalsh(L[:-1, :-1]) - eps
    return float(np.max(np.abs(minor - shifted)))


def dispersive_profile(
    sl: SpectralLadder, eps: float, gap_tol: float = GAP_TOL, depth: int = DEPTH
) -> Profile:
    up = sl.up
    if 2 * depth >= up.size:
        raise DomainError(f"depth {depth} too large for a ladder of {up.size} eigenvalues")
    minima, maxima = [float(up[0])], []
    for h in range(1, depth + 1):
        down = up[h - 1] - eps
        gap = down - up[h]
        if gap < -1e-10 * max(1.0, abs(up[h])):
            raise InterlacingError(f"negative gap {gap:.3e} at h = {h}", index=h, gap=float(gap))
        if gap > gap_tol:
            minima.append(float(up[h]))
            maxima.append(float(down))
    return canonicalize(minima, maxima)


def gap_indices(sl: SpectralLadder, gap_tol: float = GAP_TOL, depth: int = DEPTH) -> List[int]:
    down = lower_ladder(sl)[:depth]
    return [h for h in range(1, depth + 1) if down[h - 1] - sl.up[h] > gap_tol]


def spectral_report(sl: SpectralLadder, gap_tol: float = GAP_TOL, depth: int = DEPTH, count: int = 16) -> Dict:
    profile = dispersive_profile(sl, sl.eps, gap_tol, depth)
    down = lower_ladder(sl)
    return {
        "eigenvalues": sl.up[:count].tolist(),
        "gaps": [{"h": h, "lo": float(sl.up[h]), "hi": float(down[h - 1])} for h in gap_indices(sl, gap_tol, depth)],
        "profile": profile.to_json(),
    }


# ---------------------------
# Classical hierarchy and resolvent
# ---------------------------
def _exact_size(f: FourierField, l: int) -> int:
    return max(l * max(f.K, 1) + 1, 2)


def hierarchy(f: FourierField, eps: float, l: int) -> float:
    """T_l = (L^l)_{00}, on a truncation no path of length l from row 0 can leave."""
    if l < 0:
        raise DomainError(f"hierarchy index must be nonnegative, got {l}")
    L = lax_matrix(f, eps, _exact_size(f, l)).matrix
    return float(np.linalg.matrix_power(L, l)[0, 0].real)


def perturbation_determinant(L: LaxTruncation, u: complex) -> Tuple[complex, np.ndarray]:
    """
    det(1 + (L - L_+)(u - L)^{-1}) with L_+ the matrix with row and column 0
    removed; L - L_+ = U W^T has rank two, so the determinant is 2x2.
    Also returns the solution of (u - L) phi = e_0.
    """
    N = L.dim
    e0 = np.zeros(N, dtype=complex)
    e0[0] = 1.0
    rho = L.matrix[0].astype(complex)
    gamma = L.matrix[:, 0].astype(complex)
    gamma[0] = 0.0
    U = np.column_stack([e0, gamma])
    W = np.column_stack([rho, e0])

    shifted = u * np.eye(N) - L.matrix
    try:
        lu = lu_factor(shifted, check_finite=True)
    except (LinAlgError, ValueError) as e:
        raise SingularityError(f"u - L is singular at u = {u}", point=u) from e
    if np.any(np.abs(np.diag(lu[0])) < 1e-14 * max(1.0, abs(u))):
        raise SingularityError(f"u - L is singular at u = {u}", point=u)
    X = lu_solve(lu, U)
    det = np.linalg.det(np.eye(2) + W.T @ X)
    return complex(det), X[:, 0]


def determinant_deviation(f: FourierField, eps: float, u: complex, N: int) -> float:
    """Relative gap between T^up(u) from the linear solve and the perturbation determinant over u."""
    L = lax_matrix(f, eps, N)
    det, phi = perturbation_determinant(L, u)
    return _relative_gap(complex(phi[0]), det / u)


def _relative_gap(value: complex, determinant_value: complex) -> float:
    return float(abs(value - determinant_value) / max(1.0, abs(value)))


def resolvent_element(
    f: FourierField, eps: float, u: complex, N: int, strict: bool = False
) -> Tuple[complex, np.ndarray]:
    """
    T^up(u) = <0|(u - L)^{-1}|0> with its Baker-Akhiezer coefficients.

    The linear solve is compared with the determinant ratio; with
    strict=True a disagreement above DETERMINANT_TOL raises EvaluationError.
    """
    L = lax_matrix(f, eps, N)
    det, phi = perturbation_determinant(L, u)
    value = complex(phi[0])
    deviation = _relative_gap(value, det / u)
    if deviation > DETERMINANT_TOL:
        message = f"Resolvent {value} and determinant ratio {det / u} disagree at u = {u}"
        if strict:
            raise EvaluationError(message, location=u)
        logger.warning(message)
    return value, phi


def markov_krein(sl: SpectralLadder, u: complex) -> complex:
    return complex(np.sum(sl.weights / (u - sl.up)))


# ---------------------------
# Poisson commutativity
# ---------------------------
def hierarchy_gradient(f: FourierField, eps: float, l: int, N: int) -> Dict[int, complex]:
    """dT_l/dV_q = sum_m sum_{i-j=q} (L^m)_{0i} (L^{l-1-m})_{j0}, for |q| < N."""
    L = lax_matrix(f, eps, N).matrix
    powers = [np.eye(N, dtype=complex)]
    for _ in range(max(l - 1, 0)):
        powers.append(powers[-1] @ L)
    grad = {q: 0j for q in range(-(N - 1), N)}
    for m in range(l):
        outer = np.outer(powers[m][0], powers[l - 1 - m][:, 0])
        for q in grad:
            grad[q] += np.trace(outer, offset=-q)
    return grad


def poisson_bracket(l1: int, l2: int, f: FourierField, eps: float) -> complex:
    N = max(l1, l2) * max(f.K, 1) + 1
    g1 = hierarchy_gradient(f, eps, l1, N)
    g2 = hierarchy_gradient(f, eps, l2, N)
    total = 0j
    for k in range(1, N):
        total += 1j * k * (g1[-k] * g2[k] - g1[k] * g2[-k])
    return total


def poisson_check(l1: int, l2: int, f: FourierField, eps: float) -> float:
    value = abs(poisson_bracket(l1, l2, f, eps))
    logger.debug(f"|{{T_{l1}, T_{l2}}}| = {value:.3e}")
    return value
