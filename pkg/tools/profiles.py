import logging
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from models.errors import DomainError, IncommensurabilityError, OrderingError, SingularityError
from models.models import Anisotropy, Partition, Profile, QuantizationReport, validated

logger = logging.getLogger("profiles")

COMMENSURABILITY_TOL = 1e-9
MERGE_TOL = 1e-12


# ---------------------------
# Partitions
# ---------------------------
def _parts(d: int, largest: int):
    if d == 0:
        yield ()
        return
    for first in range(min(d, largest), 0, -1):
        for rest in _parts(d - first, first):
            yield (first,) + rest


def partitions(d: int) -> List[Partition]:
    """Partitions of d in reverse-lexicographic order, (d) first and (1^d) last."""
    if d < 0:
        raise DomainError(f"degree must be nonnegative, got {d}")
    return [Partition(parts=p) for p in _parts(d, d)]


@lru_cache(maxsize=None)
def partition_count(d: int) -> int:
    if d < 0:
        return 0
    return _count(d, d)


@lru_cache(maxsize=None)
def _count(d: int, largest: int) -> int:
    if d == 0:
        return 1
    return sum(_count(d - first, first) for first in range(1, min(d, largest) + 1))


# ---------------------------
# Profiles
# ---------------------------
def profile_from_corners(minima: Iterable[float], maxima: Iterable[float]) -> Profile:
    """
    Build the profile with the given local minima and maxima.

    Corners may be given in any order; they are stored descending and must
    strictly interlace, starting and ending with a minimum.
    """
    lo = tuple(sorted((float(m) for m in minima), reverse=True))
    hi = tuple(sorted((float(m) for m in maxima), reverse=True))
    if len(lo) != len(hi) + 1:
        raise OrderingError(f"need n+1 minima and n maxima, got {len(lo)} and {len(hi)}")
    return validated(Profile, OrderingError, minima=lo, maxima=hi, center=sum(lo) - sum(hi))


def canonicalize(minima: Sequence[float], maxima: Sequence[float], tol: float = MERGE_TOL) -> Profile:
    """Drop zero-length bands and gaps by merging adjacent corners closer than tol."""
    lo = sorted((float(m) for m in minima), reverse=True)
    hi = sorted((float(m) for m in maxima), reverse=True)
    corners = []
    for i, m in enumerate(hi):
        corners.extend([(lo[i], "min"), (m, "max")])
    corners.append((lo[-1], "min"))

    merged: List[Tuple[float, str]] = []
    for corner in corners:
        if merged and merged[-1][1] != corner[1] and abs(merged[-1][0] - corner[0]) < tol:
            merged.pop()
            continue
        merged.append(corner)
    if not merged or merged[0][1] != "min":
        raise OrderingError(f"corners cannot be reduced to a profile: {corners}")
    return profile_from_corners(
        [c for c, kind in merged if kind == "min"], [c for c, kind in merged if kind == "max"]
    )


def bands(f: Profile) -> List[float]:
    """Band lengths s_{i-1}^up - s_i^down for i = 1..n."""
    return [f.minima[i] - f.maxima[i] for i in range(f.n)]


def gaps(f: Profile) -> List[float]:
    """Gap lengths s_i^down - s_i^up for i = 1..n."""
    return [f.maxima[i] - f.minima[i + 1] for i in range(f.n)]


def partition_profile(lam: Partition, anis: Anisotropy, a: float) -> Profile:
    distinct = lam.multiplicities()
    values = [p for p, _ in distinct] + [0]
    minima, maxima = [], []
    rows = 0
    for k, value in enumerate(values):
        minima.append(a + (-anis.r2) * value - anis.r1 * rows)
        if k < len(distinct):
            rows += distinct[k][1]
            maxima.append(a + (-anis.r2) * value - anis.r1 * rows)
    return profile_from_corners(minima, maxima)


def _multiple(length: float, unit: float, tol: float, index: int, what: str) -> int:
    ratio = length / unit
    count = int(round(ratio))
    if count <= 0 or abs(length - count * unit) > tol:
        raise IncommensurabilityError(
            f"{what} {index} of length {length} is not a positive multiple of {unit}",
            length=length,
            unit=unit,
            index=index,
        )
    return count


def profile_partition(f: Profile, anis: Anisotropy, tol: float = COMMENSURABILITY_TOL) -> Tuple[Partition, float]:
    """Inverse of partition_profile: read multiplicities off bands and part differences off gaps."""
    counts = [_multiple(b, anis.r1, tol, i + 1, "band") for i, b in enumerate(bands(f))]
    steps = [_multiple(g, -anis.r2, tol, i + 1, "gap") for i, g in enumerate(gaps(f))]
    parts: List[int] = []
    for k in range(f.n):
        parts.extend([sum(steps[k:])] * counts[k])
    return Partition(parts=tuple(parts)), f.center


def profile_function(f: Profile, c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    value = sum(np.abs(c - m) for m in f.minima)
    return value - sum((np.abs(c - m) for m in f.maxima), np.zeros_like(c))


def _breakpoints(f: Profile) -> np.ndarray:
    return np.unique(np.array(list(f.minima) + list(f.maxima) + [f.center]))


def plot_data(f: Profile, margin: float = 1.0) -> List[Tuple[float, float]]:
    """Vertices (c, f(c)) of the profile, padded by one point beyond each end."""
    points = _breakpoints(f)
    c = np.concatenate([[points[0] - margin], points, [points[-1] + margin]])
    return list(zip(c.tolist(), profile_function(f, c).tolist()))


def enclosed_area(f: Profile) -> float:
    """Area between f and |c - center|; exact since the integrand is piecewise linear."""
    c = _breakpoints(f)
    return float(trapezoid(profile_function(f, c) - np.abs(c - f.center), c))


def resolvent(f: Profile, u: complex) -> complex:
    """prod(u - maxima) / prod(u - minima)."""
    poles = np.array(f.minima)
    if np.any(np.isclose(u, poles, rtol=0.0, atol=1e-14 * max(1.0, abs(u)))):
        raise SingularityError(f"resolvent evaluated at a minimum of the profile: u = {u}", point=u)
    return complex(np.prod([u - w for w in f.maxima]) / np.prod(u - poles))


def moments(f: Profile, lmax: int) -> List[float]:
    """Coefficients T_0..T_lmax of resolvent(f, u) = sum T_l u^(-l-1) by series long division."""
    if lmax < 0:
        raise DomainError(f"lmax must be nonnegative, got {lmax}")
    # in z = 1/u: resolvent = z * prod(1 - w z) / prod(1 - m z)
    num = np.atleast_1d(np.poly(f.maxima)) if f.maxima else np.ones(1)
    den = np.atleast_1d(np.poly(f.minima))
    out: List[float] = []
    for l in range(lmax + 1):
        value = num[l] if l < num.size else 0.0
        value -= sum(den[j] * out[l - j] for j in range(1, min(l, den.size - 1) + 1))
        out.append(float(value))
    return out


def energy(f: Profile) -> float:
    return float(sum(m**3 for m in f.minima) - sum(m**3 for m in f.maxima))


def energy_from_moments(f: Profile) -> float:
    T = moments(f, 3)
    a = f.center
    return 3 * T[3] - 3 * a * T[2] + a**3


# ---------------------------
# Renormalization and quantization
# ---------------------------
def renormalize(eps: float, hbar: float) -> Tuple[float, float]:
    """Return (eps1, eps2), the roots of r^2 - eps*r - hbar."""
    if hbar <= 0:
        raise DomainError(f"hbar must be positive, got {hbar}")
    if eps < 0:
        raise DomainError(f"eps must be nonnegative, got {eps}")
    root = np.sqrt(eps * eps + 4 * hbar)
    eps1 = (eps + root) / 2
    # -hbar / eps1 keeps eps1 * eps2 = -hbar to rounding without cancellation
    eps2 = -hbar / eps1
    return float(eps1), float(eps2)


def renormalized_anisotropy(eps: float, hbar: float) -> Anisotropy:
    eps1, eps2 = renormalize(eps, hbar)
    return Anisotropy(r2=eps2, r1=eps1)


def classical_anisotropy(eps: float, hbar: float) -> Anisotropy:
    if eps <= 0:
        raise DomainError("the unrenormalized units need eps > 0")
    if hbar <= 0:
        raise DomainError(f"hbar must be positive, got {hbar}")
    return Anisotropy(r2=-hbar / eps, r1=eps)


def check_quantization(
    f: Profile, eps: float, hbar: float, use_renormalized: bool = True, tol: float = COMMENSURABILITY_TOL
) -> QuantizationReport:
    anis = renormalized_anisotropy(eps, hbar) if use_renormalized else classical_anisotropy(eps, hbar)
    band_unit, gap_unit = anis.r1, -anis.r2

    def read(lengths: List[float], unit: float) -> Tuple[Optional[List[int]], List[float]]:
        counts, deviations = [], []
        for length in lengths:
            count = int(round(length / unit))
            deviations.append(abs(length - count * unit))
            counts.append(count)
        ok = all(c > 0 for c in counts) and all(d <= tol for d in deviations)
        return (counts if ok else None), deviations

    band_counts, band_dev = read(bands(f), band_unit)
    gap_counts, gap_dev = read(gaps(f), gap_unit)
    report = QuantizationReport(
        band_multipliers=band_counts,
        gap_multipliers=gap_counts,
        band_unit=band_unit,
        gap_unit=gap_unit,
        renormalized=use_renormalized,
        deviations=band_dev + gap_dev,
    )
    logger.debug(f"Quantization check ({'renormalized' if use_renormalized else 'classical'}): {report.passed}")
    return report


def rectangle_check(eps: float, hbar: float) -> dict:
    """
    Compare the rectangles R(eps2, eps1) and R(-hbar/eps, eps), both the
    profile of a single box anchored at the same bottom corner.
    """
    eps1, eps2 = renormalize(eps, hbar)
    quantum = partition_profile(Partition(parts=(1,)), Anisotropy(r2=eps2, r1=eps1), 0.0)
    classical = partition_profile(Partition(parts=(1,)), classical_anisotropy(eps, hbar), 0.0)
    quantum_area = enclosed_area(quantum)
    classical_area = enclosed_area(classical)

    # rotated coordinates: x along slope +1 edges, y along slope -1 edges
    q_sides = (-eps2 * np.sqrt(2), eps1 * np.sqrt(2))
    c_sides = (hbar / eps * np.sqrt(2), eps * np.sqrt(2))
    overlap = min(q_sides[0], c_sides[0]) * min(q_sides[1], c_sides[1])
    quantum_only = q_sides[0] * q_sides[1] - overlap
    classical_only = c_sides[0] * c_sides[1] - overlap
    square_side = q_sides[1] - c_sides[1]
    return {
        "eps1": eps1,
        "eps2": eps2,
        "quantum_area": quantum_area,
        "classical_area": classical_area,
        "target": 2 * hbar,
        "corner_formula": -2 * eps1 * eps2,
        "quantum_only": float(quantum_only),
        "classical_only": float(classical_only),
        "square_side": float(square_side),
        "passed": bool(
            np.isclose(quantum_area, 2 * hbar)
            and np.isclose(classical_area, 2 * hbar)
            and np.isclose(square_side, -eps2 * np.sqrt(2))
            and np.isclose(quantum_only, square_side * q_sides[0])
            and np.isclose(quantum_only, classical_only)
        ),
    }


def content_product(lam: Partition, anis: Anisotropy, a: float, u: complex) -> complex:
    """
    Resolvent of the partition profile as a product over boxes.

    A box in row i, column j has content (j-1)(-r2) - (i-1) r1 relative to a;
    adding it replaces the minimum at a + content by minima shifted by -r2 and
    -r1 and a maximum shifted by -r1 - r2.
    """
    z = u - a
    if z == 0:
        raise SingularityError("content product evaluated at the center", point=u)
    value = 1 / z
    for i, j in lam.boxes():
        c = (j - 1) * (-anis.r2) - (i - 1) * anis.r1
        den = (z - c + anis.r2) * (z - c + anis.r1)
        if den == 0:
            raise SingularityError(f"content product has a pole at u = {u}", point=u)
        value *= (z - c) * (z - c + anis.r1 + anis.r2) / den
    return complex(value)
