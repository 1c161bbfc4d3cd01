import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional

import numpy as np
from scipy.linalg import eigvalsh

from models.errors import DegeneracyError, DomainError
from models.models import BSState, DegreeComparison, PhaseParams, Theorem1Report
from tools import fock, multiphase
from tools.profiles import (
    classical_anisotropy,
    energy,
    partition_profile,
    partitions,
    renormalize,
    renormalized_anisotropy,
)

logger = logging.getLogger("correspondence")

GENERATING_POINTS = (10.0, 10.0 + 5.0j)
ACTION_TOL = 1e-3


def bs_enumerate(eps: float, hbar: float, a: float, dmax: int) -> List[BSState]:
    """One renormalized Bohr-Sommerfeld state per partition of weight at most dmax."""
    anis = renormalized_anisotropy(eps, hbar)
    states = []
    for d in range(dmax + 1):
        for lam in partitions(d):
            distinct = lam.multiplicities()
            values = [p for p, _ in distinct] + [0]
            profile = partition_profile(lam, anis, a)
            states.append(
                BSState(
                    partition=lam,
                    profile=profile,
                    band_multipliers=[m for _, m in distinct],
                    gap_multipliers=[values[k] - values[k + 1] for k in range(len(distinct))],
                    classical_energy=energy(profile),
                )
            )
    return states


def quantum_energies(d: int, eps: float, hbar: float, a: float) -> List[float]:
    block = fock.hamiltonian(d, eps, hbar, a)
    G = np.diag(np.array(block.weights, dtype=float))
    GO = G @ block.matrix
    return sorted(eigvalsh((GO + GO.T) / 2, G).tolist())


def _deviation(xs: List[float], ys: List[float]) -> float:
    if len(xs) != len(ys):
        return float("inf")
    if not xs:
        return 0.0
    return max(abs(x - y) / max(1.0, abs(y)) for x, y in zip(xs, ys))


def _generating_deviation(d: int, eps: float, hbar: float, a: float) -> float:
    eps1, eps2 = renormalize(eps, hbar)
    try:
        states = fock.diagonalize(d, eps, hbar, a)
    except DegeneracyError as e:
        logger.warning(f"Degree {d}: {e}")
        return float("inf")
    worst = 0.0
    for u in GENERATING_POINTS:
        R = fock.T_up_resolvent(d, u, eps, hbar, a)
        G = np.diag(np.array(fock.basis(d, hbar).norms, dtype=float))
        for state in states:
            psi = np.array(state.vector)
            observed = psi @ G @ R @ psi
            predicted = fock.eigenvalue_formula(state.partition, a, eps2, eps1, u)
            worst = max(worst, abs(observed - predicted) / max(1.0, abs(predicted)))
    return worst


def compare_degree(d: int, eps: float, hbar: float, a: float, tol: float, classical: List[float]) -> DegreeComparison:
    quantum = quantum_energies(d, eps, hbar, a)
    deviation = _deviation(quantum, classical)
    generating = _generating_deviation(d, eps, hbar, a)
    passed = bool(deviation < tol and generating < tol)
    logger.info(f"Degree {d}: {len(quantum)} states, deviation {deviation:.2e}, {'pass' if passed else 'FAIL'}")
    return DegreeComparison(
        degree=d,
        quantum=quantum,
        classical=classical,
        deviation=deviation,
        generating_deviation=generating,
        passed=passed,
    )


def negative_control(eps: float, hbar: float, a: float, d: int = 1, tol: float = 1e-8) -> Optional[Dict]:
    """Compare degree-d quantum energies with unrenormalized profiles; expected to fail."""
    try:
        anis = classical_anisotropy(eps, hbar)
    except DomainError:
        return None
    classical = sorted(energy(partition_profile(lam, anis, a)) for lam in partitions(d))
    quantum = quantum_energies(d, eps, hbar, a)
    deviation = _deviation(quantum, classical)
    return {"degree": d, "quantum": quantum, "classical": classical, "deviation": deviation, "failed": bool(deviation >= tol)}


def _workers(threads: Optional[int], jobs: int) -> int:
    cap = threads or os.cpu_count() or 1
    return max(1, min(cap, jobs))


def verify_theorem1(
    eps: float, hbar: float, a: float, dmax: int, tol: float = 1e-8, threads: Optional[int] = None
) -> Theorem1Report:
    """
    For every degree d <= dmax compare the sorted spectrum of O_3 with the sorted
    classical energies of renormalized Bohr-Sommerfeld profiles, then check each
    labeled eigenvector against the profile resolvent.
    """
    states = bs_enumerate(eps, hbar, a, dmax)
    classical = {d: sorted(s.classical_energy for s in states if s.partition.weight == d) for d in range(dmax + 1)}

    with ThreadPoolExecutor(max_workers=_workers(threads, dmax + 1)) as pool:
        degrees = list(pool.map(lambda d: compare_degree(d, eps, hbar, a, tol, classical[d]), range(dmax + 1)))

    control = negative_control(eps, hbar, a, 1, tol) if dmax >= 1 else None
    max_deviation = max(max(c.deviation, c.generating_deviation) for c in degrees)
    passed = all(c.passed for c in degrees) and (control is None or control["failed"])
    logger.info(f"Spectrum check up to degree {dmax}: {'pass' if passed else 'FAIL'}")
    return Theorem1Report(
        eps=eps,
        hbar=hbar,
        a=a,
        tol=tol,
        degrees=degrees,
        max_deviation=max_deviation,
        negative_control=control,
        passed=passed,
    )


def bridge_check(state: BSState, eps: float, hbar: float) -> List[int]:
    """Read a state's profile as classical data with dispersion eps1 and return its N_1..N_n."""
    eps1, _ = renormalize(eps, hbar)
    params = PhaseParams.from_profile(state.profile, eps1)
    return list(reversed(multiphase.periodicity_check(params)))


def part1_action_report(p: PhaseParams, hbar: float, samples: int = 256, K: int = 127) -> Dict:
    """Actions along each gap cycle divided by 2 pi hbar, with their nearest integers."""
    if hbar <= 0:
        raise DomainError(f"hbar must be positive, got {hbar}")
    multiphase.periodicity_check(p)
    rows = []
    for i in range(1, p.n + 1):
        action = multiphase.gfz_action(p, i, samples, K)
        ratio = action / (2 * np.pi * hbar)
        nearest = int(round(ratio))
        rows.append(
            {
                "i": i,
                "action": action,
                "target": 2 * np.pi * p.eps * p.gap(i),
                "ratio": ratio,
                "N_prime": nearest,
                "deviation": abs(ratio - nearest),
                "integral": nearest >= 1 and abs(ratio - nearest) < ACTION_TOL,
            }
        )
    return {"hbar": hbar, "cycles": rows, "passed": all(r["integral"] for r in rows)}
