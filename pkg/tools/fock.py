import logging
from functools import lru_cache
from math import factorial
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
import sympy
from scipy.linalg import eigh
from scipy.sparse import coo_matrix

from models.errors import DegeneracyError, DomainError
from models.models import Anisotropy, EigenState, FockBasis, GradeBlock, OperatorBlock, Partition
from tools.profiles import moments, partition_profile, partitions, renormalize, resolvent

logger = logging.getLogger("fock")

FockVector = Dict[Tuple[int, ...], Any]

LABEL_POINT = 10.0
LABEL_TOL = 1e-8


def _scalar(x, exact: bool):
    if not exact:
        return float(x)
    if isinstance(x, sympy.Basic):
        return x
    if isinstance(x, int):
        return sympy.Integer(x)
    return sympy.Rational(str(x))


@lru_cache(maxsize=None)
def _partitions(d: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple(p.parts for p in partitions(d))


def _counts(mu: Sequence[int]) -> Dict[int, int]:
    out: Dict[int, int] = {}
    for part in mu:
        out[part] = out.get(part, 0) + 1
    return out


def fock_norm(mu: Sequence[int], hbar, exact: bool = False):
    """||V_mu||^2 = prod_k (hbar k)^{d_k} d_k!."""
    hbar = _scalar(hbar, exact)
    value = _scalar(1, exact)
    for k, d_k in _counts(mu).items():
        value *= (hbar * k) ** d_k * factorial(d_k)
    return value


# ---------------------------
# Fock basis and ladder operators
# ---------------------------
def basis(d: int, hbar, exact: bool = False) -> FockBasis:
    if d < 0:
        raise DomainError(f"degree must be nonnegative, got {d}")
    parts = list(_partitions(d))
    return FockBasis(degree=d, partitions=parts, norms=[fock_norm(mu, hbar, exact) for mu in parts])


def ladder_apply(k: int, v: FockVector, hbar) -> FockVector:
    """k > 0 multiplies by V_k; k < 0 applies hbar |k| d/dV_|k|."""
    if k == 0:
        raise DomainError("ladder operators need a nonzero index")
    out: FockVector = {}
    for mu, coeff in v.items():
        if k > 0:
            target = tuple(sorted(mu + (k,), reverse=True))
            out[target] = out.get(target, 0) + coeff
        else:
            multiplicity = mu.count(-k)
            if multiplicity == 0:
                continue
            reduced = list(mu)
            reduced.remove(-k)
            target = tuple(reduced)
            out[target] = out.get(target, 0) + coeff * hbar * (-k) * multiplicity
    return {mu: c for mu, c in out.items() if c != 0}


def fock_inner(xi: FockVector, eta: FockVector, hbar, exact: bool = False):
    """<xi, eta> for real coefficient vectors."""
    total = _scalar(0, exact)
    for mu, coeff in xi.items():
        if mu in eta:
            total += coeff * eta[mu] * fock_norm(mu, hbar, exact)
    return total


# ---------------------------
# Grade blocks of the quantum Lax operator
# ---------------------------
def grade_basis(g: int) -> List[Tuple[Tuple[int, ...], int]]:
    """Pairs (mu, h) with |mu| + h = g, by height, partitions reverse-lexicographic."""
    return [(mu, h) for h in range(g + 1) for mu in _partitions(g - h)]


def _assemble(states, eps, hbar, a, exact: bool):
    """
    Column (nu, h') -> row (mu, h): coefficient of V_mu in V_{h'-h} V_nu,
    plus a - eps h on the diagonal.
    """
    index = {state: i for i, state in enumerate(states)}
    eps, hbar, a = (_scalar(x, exact) for x in (eps, hbar, a))
    heights = sorted({h for _, h in states})
    entries: Dict[Tuple[int, int], Any] = {}
    for col, (nu, h_src) in enumerate(states):
        entries[(col, col)] = a - eps * h_src
        for h in heights:
            if h == h_src:
                continue
            for mu, coeff in ladder_apply(h_src - h, {nu: _scalar(1, exact)}, hbar).items():
                row = index.get((mu, h))
                if row is not None:
                    entries[(row, col)] = entries.get((row, col), 0) + coeff

    n = len(states)
    if exact:
        return sympy.Matrix(sympy.SparseMatrix(n, n, entries))
    rows, cols = zip(*entries.keys()) if entries else ((), ())
    data = [float(v) for v in entries.values()]
    return coo_matrix((data, (rows, cols)), shape=(n, n)).toarray()


def grade_block(g: int, eps, hbar, a, exact: bool = False) -> GradeBlock:
    if g < 0:
        raise DomainError(f"grade must be nonnegative, got {g}")
    states = grade_basis(g)
    matrix = _assemble(states, eps, hbar, a, exact)
    weights = [fock_norm(mu, hbar, exact) for mu, _ in states]
    logger.debug(f"Grade {g} block of size {len(states)}")
    return GradeBlock(grade=g, basis=states, weights=weights, matrix=matrix)


def graded_space(gmax: int, eps, hbar, a, exact: bool = False) -> GradeBlock:
    """The operator on all (mu, h) with |mu| + h <= gmax, assembled without using the grading."""
    states = [state for g in range(gmax + 1) for state in grade_basis(g)]
    matrix = _assemble(states, eps, hbar, a, exact)
    weights = [fock_norm(mu, hbar, exact) for mu, _ in states]
    return GradeBlock(grade=gmax, basis=states, weights=weights, matrix=matrix)


def _power(M, l: int, exact: bool):
    return M**l if exact else np.linalg.matrix_power(M, l)


def _operator(d: int, label: str, matrix, hbar, exact: bool) -> OperatorBlock:
    b = basis(d, hbar, exact)
    return OperatorBlock(degree=d, label=label, partitions=b.partitions, weights=b.norms, matrix=matrix)


# ---------------------------
# Quantum hierarchy
# ---------------------------
def quantum_T_up(d: int, l: int, eps, hbar, a, exact: bool = False) -> OperatorBlock:
    """Height-0 corner of the l-th power of the grade-d block."""
    if l < 0:
        raise DomainError(f"hierarchy index must be nonnegative, got {l}")
    M = grade_block(d, eps, hbar, a, exact).matrix
    p = len(_partitions(d))
    return _operator(d, f"T{l}", _power(M, l, exact)[:p, :p], hbar, exact)


def _plus_part(M, p: int, exact: bool):
    plus = M.copy()
    if exact:
        plus[:p, :] = sympy.zeros(p, plus.cols)
        plus[:, :p] = sympy.zeros(plus.rows, p)
    else:
        plus[:p, :] = 0
        plus[:, :p] = 0
    return plus


def quantum_T_down(d: int, l: int, eps, hbar, a, exact: bool = False) -> OperatorBlock:
    """<0| L L_+^l L |0> with L_+ the block zeroed on height-0 rows and columns."""
    if l < 0:
        raise DomainError(f"hierarchy index must be nonnegative, got {l}")
    M = grade_block(d, eps, hbar, a, exact).matrix
    p = len(_partitions(d))
    inner = M * _power(_plus_part(M, p, exact), l, exact) * M if exact else M @ _power(_plus_part(M, p, exact), l, exact) @ M
    return _operator(d, f"T{l}_down", inner[:p, :p], hbar, exact)


def hamiltonian(d: int, eps, hbar, a, exact: bool = False) -> OperatorBlock:
    """O_3 = 3 T_3 - 3 a T_2 + a^3."""
    a_val = _scalar(a, exact)
    T2 = quantum_T_up(d, 2, eps, hbar, a, exact).matrix
    T3 = quantum_T_up(d, 3, eps, hbar, a, exact).matrix
    p = len(_partitions(d))
    identity = sympy.eye(p) if exact else np.eye(p)
    return _operator(d, "O3", 3 * T3 - 3 * a_val * T2 + a_val**3 * identity, hbar, exact)


def commutator_norm(d: int, l1: int, l2: int, eps, hbar, a, exact: bool = False) -> float:
    A = quantum_T_up(d, l1, eps, hbar, a, exact).matrix
    B = quantum_T_up(d, l2, eps, hbar, a, exact).matrix
    C = A * B - B * A if exact else A @ B - B @ A
    return float(np.linalg.norm(np.array(C, dtype=float), 2))


def T_up_resolvent(d: int, u: complex, eps, hbar, a) -> np.ndarray:
    """<0|(u - L)^{-1}|0> on the degree-d block."""
    M = grade_block(d, eps, hbar, a).matrix
    p = len(_partitions(d))
    rhs = np.eye(M.shape[0], p, dtype=complex)
    return np.linalg.solve(u * np.eye(M.shape[0]) - M, rhs)[:p]


def T_down_resolvent(d: int, u: complex, eps, hbar, a) -> np.ndarray:
    """sum_l u^{-l-1} <0| L L_+^l L |0> = <0| L (u - L_+)^{-1} L |0>."""
    M = grade_block(d, eps, hbar, a).matrix
    p = len(_partitions(d))
    plus = _plus_part(M, p, exact=False)
    middle = np.linalg.solve(u * np.eye(M.shape[0]) - plus, M[:, :p].astype(complex))
    return (M @ middle)[:p]


def resolvent_identity(d: int, u: complex, eps, hbar, a) -> float:
    """||(u - T_down(u))^{-1} - T_up(u)||; vanishes at a = 0."""
    down = T_down_resolvent(d, u, eps, hbar, a)
    up = T_up_resolvent(d, u, eps, hbar, a)
    lhs = np.linalg.inv(u * np.eye(up.shape[0]) - down)
    return float(np.linalg.norm(lhs - up, 2))


# ---------------------------
# Joint diagonalization and labels
# ---------------------------
def _clusters(values: np.ndarray, tol: float) -> List[List[int]]:
    groups: List[List[int]] = []
    for i in np.argsort(values):
        if groups and abs(values[i] - values[groups[-1][-1]]) <= tol * max(1.0, abs(values[i])):
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    return groups


def _refine(Y: np.ndarray, G: np.ndarray, operators: List[np.ndarray], tol: float) -> np.ndarray:
    """Rotate a G-orthonormal block Y to diagonalize the operators in turn."""
    if Y.shape[1] == 1 or not operators:
        return Y
    A = Y.T @ G @ operators[0] @ Y
    values, W = np.linalg.eigh((A + A.T) / 2)
    Y = Y @ W
    blocks = [_refine(Y[:, group], G, operators[1:], tol) for group in _clusters(values, tol)]
    return np.column_stack(blocks)


def predicted_tuple(lam: Partition, eps, hbar, a) -> List[float]:
    eps1, eps2 = renormalize(float(eps), float(hbar))
    profile = partition_profile(lam, Anisotropy(r2=eps2, r1=eps1), float(a))
    T = moments(profile, 4)
    return [T[2], T[3], T[4], resolvent(profile, LABEL_POINT).real]


def diagonalize(d: int, eps, hbar, a, tol: float = LABEL_TOL) -> List[EigenState]:
    """
    Eigenvectors of O_3 on the degree-d block, degeneracies split by T_4,
    T_5 and the resolvent, each labeled by the partition whose profile
    predicts its joint eigenvalues.
    """
    O3 = hamiltonian(d, eps, hbar, a)
    G = np.diag(np.array(O3.weights, dtype=float))
    T = {l: quantum_T_up(d, l, eps, hbar, a).matrix for l in (2, 3, 4, 5)}
    R = T_up_resolvent(d, LABEL_POINT, eps, hbar, a).real

    GO = G @ O3.matrix
    values, vectors = eigh((GO + GO.T) / 2, G)
    blocks = [_refine(vectors[:, group], G, [T[4], T[5], R], 1e-9) for group in _clusters(values, 1e-9)]
    Y = np.column_stack(blocks)

    predictions = {lam.parts: predicted_tuple(lam, eps, hbar, a) for lam in partitions(d)}
    states: List[EigenState] = []
    claimed = set()
    for column in Y.T:
        observed = [float(column @ G @ X @ column) for X in (T[2], T[3], T[4], R)]
        candidates = [
            mu
            for mu, predicted in predictions.items()
            if all(abs(o - q) <= tol * max(1.0, abs(q)) for o, q in zip(observed, predicted))
        ]
        if len(candidates) != 1 or candidates[0] in claimed:
            raise DegeneracyError(
                f"degree {d}: eigenvector with joint values {observed} matches {candidates}", candidates=candidates
            )
        claimed.add(candidates[0])
        energy = float(column @ G @ O3.matrix @ column)
        states.append(
            EigenState(
                partition=Partition(parts=candidates[0]),
                energy=energy,
                moments=[1.0, float(a)] + observed[:3],
                resolvent=complex(observed[3]),
                vector=column.tolist(),
            )
        )
    logger.debug(f"Degree {d}: labeled {len(states)} states")
    return states


def eigenvalue_formula(lam: Partition, a: float, eps2: float, eps1: float, u: complex) -> complex:
    return resolvent(partition_profile(lam, Anisotropy(r2=eps2, r1=eps1), a), u)


# ---------------------------
# Jack functions
# ---------------------------
@lru_cache(maxsize=None)
def _assignments(nu: Tuple[int, ...], rows: Tuple[int, ...]) -> int:
    """Number of maps from the parts of nu to rows exactly filling every row."""
    if not nu:
        return int(all(r == 0 for r in rows))
    first, rest = nu[0], nu[1:]
    total = 0
    for j, room in enumerate(rows):
        if room >= first:
            total += _assignments(rest, rows[:j] + (room - first,) + rows[j + 1 :])
    return total


def monomial_in_power_sums(d: int) -> sympy.Matrix:
    """Row mu holds the power-sum coefficients of m_mu, both indexed by _partitions(d)."""
    parts = _partitions(d)
    transition = sympy.Matrix(len(parts), len(parts), lambda i, j: _assignments(parts[i], parts[j]))
    return transition.inv()


def jack_oracle(lam: Partition, eps, hbar, exact: bool = False) -> FockVector:
    """
    Jack function P_lam in V coordinates, with p_k = V_k / eps1 and
    alpha = -eps2 / eps1, monic in the monomial basis.

    Gram-Schmidt of monomials in ascending lexicographic order under the
    Fock inner product, which is the alpha inner product in these coordinates.
    """
    d = lam.weight
    parts = _partitions(d)
    if exact:
        eps_s, hbar_s = _scalar(eps, True), _scalar(hbar, True)
        eps1 = (eps_s + sympy.sqrt(eps_s**2 + 4 * hbar_s)) / 2
    else:
        eps1, _ = renormalize(float(eps), float(hbar))
    C = monomial_in_power_sums(d)

    def in_v(i: int) -> FockVector:
        vec = {}
        for j, nu in enumerate(parts):
            coeff = C[i, j] if exact else float(C[i, j])
            if coeff != 0:
                vec[nu] = coeff / eps1 ** len(nu)
        return vec

    def combine(x: FockVector, y: FockVector, scale) -> FockVector:
        out = dict(x)
        for mu, coeff in y.items():
            out[mu] = out.get(mu, 0) + scale * coeff
        return out

    done: List[FockVector] = []
    for i in reversed(range(len(parts))):
        vec = in_v(i)
        for prev in done:
            vec = combine(vec, prev, -fock_inner(vec, prev, hbar, exact) / fock_inner(prev, prev, hbar, exact))
        if exact:
            vec = {mu: sympy.simplify(c) for mu, c in vec.items()}
        if parts[i] == lam.parts:
            return {mu: c for mu, c in vec.items() if c != 0}
        done.append(vec)
    raise DomainError(f"{lam.label()} is not a partition of {d}")


def overlap(xi: FockVector, eta: FockVector, hbar) -> float:
    """|<xi, eta>|^2 / (<xi, xi><eta, eta>), 1 when proportional."""
    xi = {mu: float(c) for mu, c in xi.items()}
    eta = {mu: float(c) for mu, c in eta.items()}
    cross = fock_inner(xi, eta, hbar)
    return float(cross**2 / (fock_inner(xi, xi, hbar) * fock_inner(eta, eta, hbar)))


def state_vector(state: EigenState, d: int) -> FockVector:
    return dict(zip(_partitions(d), state.vector))
