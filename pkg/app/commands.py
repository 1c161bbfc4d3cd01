import csv
import logging
import os
from typing import Dict, List, Tuple

import numpy as np

from app import config
from models.errors import OrderingError
from models.models import Anisotropy, FourierField, GridField, Partition, PhaseParams, validated
from registry.client import lab_instance as lab
from tools import correspondence, fock, multiphase, profiles, spectral

logger = logging.getLogger("app")


class CommandError(Exception):
    def __init__(self, status_code: int, detail: str):
        super().__init__(detail)
        self.status_code = status_code
        self.detail = detail


# ---------------------------
# Argument parsing helpers
# ---------------------------
def parse_numbers(text: str) -> List[float]:
    text = (text or "").strip()
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise CommandError(2, f"Expected a comma-separated list of numbers, got {text!r}")


def parse_partition(text: str) -> Partition:
    try:
        return Partition(parts=tuple(int(v) for v in parse_numbers(text)))
    except ValueError as e:
        raise CommandError(2, f"Invalid partition {text!r}: {e}")


def parse_phase(text: str, eps: float) -> PhaseParams:
    body = text.split(":", 1)[1] if text.startswith("phase:") else text
    s_text, _, chi_text = body.partition(";")
    s = parse_numbers(s_text)
    chi = parse_numbers(chi_text) if chi_text else [0.0] * (len(s) // 2)
    return multiphase.phase_params(s, chi, eps)


def _read_samples(path: str) -> np.ndarray:
    values = []
    with open(path, newline="") as handle:
        for row in csv.reader(handle):
            if not row:
                continue
            try:
                values.append(float(row[-1]))
            except ValueError:
                continue  # header
    return np.array(values)


def parse_field(text: str, eps: float, grid: int = config.DEFAULT_GRID) -> FourierField:
    """const:a, cos:a,delta,k, phase:s...;chi... or a CSV file of samples."""
    kind, _, body = text.partition(":")
    if kind == "const":
        return FourierField(a=float(body))
    if kind == "cos":
        a, delta, k = parse_numbers(body)
        if k < 1 or k != int(k):
            raise CommandError(2, f"cos mode must be a positive integer, got {k}")
        modes = np.zeros(int(k), dtype=complex)
        modes[int(k) - 1] = delta
        return FourierField(a=a, modes=modes)
    if kind == "phase":
        return multiphase.fourier(multiphase.sample_grid(parse_phase(text, eps), grid))
    if os.path.exists(text):
        return multiphase.fourier(validated(GridField, OrderingError, samples=_read_samples(text)))
    raise CommandError(2, f"Unrecognized field {text!r}")


def _profile(minima: str, maxima: str):
    return profiles.profile_from_corners(parse_numbers(minima), parse_numbers(maxima))


def _anisotropy(r2: float, r1: float) -> Anisotropy:
    return validated(Anisotropy, OrderingError, r2=r2, r1=r1)


# ---------------------------
# profile
# ---------------------------
@lab.tool(name="profile.partition", help={"parts": "comma-separated parts, e.g. 4,4,1"})
def profile_partition_command(parts: str = "", r2: float = -1.0, r1: float = 1.0, center: float = 0.0) -> Dict:
    """Anisotropic profile of a partition, with band and gap multipliers."""
    lam = parse_partition(parts)
    anis = _anisotropy(r2, r1)
    f = profiles.partition_profile(lam, anis, center)
    bands = [round(b / anis.r1) for b in profiles.bands(f)]
    gaps = [round(g / -anis.r2) for g in profiles.gaps(f)]
    multipliers: List[int] = []
    for i in range(f.n, 0, -1):
        multipliers.extend([gaps[i - 1], bands[i - 1]])
    inverse, inverse_center = profiles.profile_partition(f, anis)
    return {
        "partition": list(lam.parts),
        "profile": f.to_json(),
        "band_multipliers": bands,
        "gap_multipliers": gaps,
        "multipliers": multipliers,
        "enclosed_area": profiles.enclosed_area(f),
        "tiles": profiles.enclosed_area(f) / (-2 * anis.r2 * anis.r1),
        "round_trip": inverse == lam and abs(inverse_center - center) < 1e-9,
    }


@lab.tool(name="profile.invert")
def profile_invert_command(minima: str, maxima: str = "", r2: float = -1.0, r1: float = 1.0, tol: float = profiles.COMMENSURABILITY_TOL) -> Dict:
    """Partition and center of a profile whose bands and gaps are commensurate."""
    lam, center = profiles.profile_partition(_profile(minima, maxima), _anisotropy(r2, r1), tol)
    return {"partition": list(lam.parts), "center": center}


@lab.tool(name="profile.energy")
def profile_energy_command(minima: str, maxima: str = "", lmax: int = 4, u: float = 10.0) -> Dict:
    """Energy, moments and resolvent of a profile."""
    f = _profile(minima, maxima)
    return {
        "profile": f.to_json(),
        "energy": profiles.energy(f),
        "energy_from_moments": profiles.energy_from_moments(f),
        "moments": profiles.moments(f, lmax),
        "resolvent": profiles.resolvent(f, u),
    }


@lab.tool(name="profile.plot-data")
def profile_plot_command(minima: str, maxima: str = "", margin: float = 1.0) -> Dict:
    """Vertices (c, f(c)) of a profile."""
    rows = profiles.plot_data(_profile(minima, maxima), margin)
    return {"columns": ["c", "f"], "rows": [list(r) for r in rows]}


@lab.tool(name="profile.check")
def profile_check_command(
    minima: str,
    maxima: str = "",
    eps: float = config.DEFAULT_EPS,
    hbar: float = config.DEFAULT_HBAR,
    classical: bool = False,
    tol: float = profiles.COMMENSURABILITY_TOL,
) -> Dict:
    """Bohr-Sommerfeld multipliers of a profile, renormalized unless --classical."""
    report = profiles.check_quantization(_profile(minima, maxima), eps, hbar, not classical, tol)
    return {**report.model_dump(), "passed": report.passed}


@lab.tool(name="profile.rectangle")
def profile_rectangle_command(eps: float = config.DEFAULT_EPS, hbar: float = config.DEFAULT_HBAR) -> Dict:
    """Compare the quantum and classical unit rectangles."""
    return profiles.rectangle_check(eps, hbar)


# ---------------------------
# multiphase
# ---------------------------
@lab.tool(name="multiphase.eval", help={"field": "phase:s1,...,s2n+1;chi1,...,chin"})
def multiphase_eval_command(field: str, eps: float = config.DEFAULT_EPS, t: float = 0.0, grid: int = config.DEFAULT_GRID) -> Dict:
    """Samples (x, v) of a multi-phase solution."""
    g = multiphase.sample_grid(parse_phase(field, eps), grid, t)
    return {"columns": ["x", "v"], "rows": [[x, v] for x, v in zip(g.x.tolist(), g.samples.tolist())]}


@lab.tool(name="multiphase.residual")
def multiphase_residual_command(
    field: str,
    eps: float = config.DEFAULT_EPS,
    grid: int = config.DEFAULT_GRID,
    dt: float = config.DEFAULT_DT,
    offset: float = 0.0,
    threshold: float = 1e-5,
) -> Dict:
    """Sup-norm residual of the equation on a grid."""
    residual = multiphase.bo_residual(parse_phase(field, eps), grid, dt, offset)
    return {"residual": residual, "threshold": threshold, "passed": residual < threshold}


@lab.tool(name="multiphase.action")
def multiphase_action_command(
    field: str, eps: float = config.DEFAULT_EPS, i: int = 1, samples: int = config.DEFAULT_SAMPLES, modes: int = 127
) -> Dict:
    """Action integral along the cycle dual to gap i."""
    p = parse_phase(field, eps)
    action = multiphase.gfz_action(p, i, samples, modes)
    return {"i": i, "action": action, "target": 2 * np.pi * p.eps * p.gap(i)}


@lab.tool(name="multiphase.periodicity")
def multiphase_periodicity_command(field: str, eps: float = config.DEFAULT_EPS, tol: float = multiphase.PERIODICITY_TOL) -> Dict:
    """Band multipliers [N_n, ..., N_1]."""
    return {"multipliers": multiphase.periodicity_check(parse_phase(field, eps), tol)}


# ---------------------------
# lax
# ---------------------------
@lab.tool(name="lax.spectrum")
def lax_spectrum_command(field: str, eps: float = config.DEFAULT_EPS, dim: int = config.DEFAULT_DIM, count: int = 16) -> Dict:
    """Top eigenvalues of the truncated Lax operator."""
    sl = spectral.ladder(spectral.lax_matrix(parse_field(field, eps), eps, dim))
    return {"eigenvalues": sl.up[:count].tolist(), "weights": sl.weights[:count].tolist()}


@lab.tool(name="lax.profile")
def lax_profile_command(
    field: str,
    eps: float = config.DEFAULT_EPS,
    dim: int = config.DEFAULT_DIM,
    depth: int = config.DEFAULT_DEPTH,
    gap_tol: float = config.DEFAULT_GAP_TOL,
) -> Dict:
    """Dispersive action profile of a field."""
    sl = spectral.ladder(spectral.lax_matrix(parse_field(field, eps), eps, dim))
    return spectral.spectral_report(sl, gap_tol, min(depth, (dim - 1) // 2))


@lab.tool(name="lax.hierarchy")
def lax_hierarchy_command(field: str, eps: float = config.DEFAULT_EPS, lmax: int = 4) -> Dict:
    """Classical hierarchy T_0..T_lmax and the energy O_3."""
    f = parse_field(field, eps)
    T = [spectral.hierarchy(f, eps, l) for l in range(lmax + 1)]
    T3 = T[3] if lmax >= 3 else spectral.hierarchy(f, eps, 3)
    T2 = T[2] if lmax >= 2 else spectral.hierarchy(f, eps, 2)
    return {"T": T, "O3": 3 * T3 - 3 * f.a * T2 + f.a**3}


@lab.tool(name="lax.resolvent")
def lax_resolvent_command(
    field: str, eps: float = config.DEFAULT_EPS, u: float = 10.0, u_imag: float = 0.0, dim: int = config.DEFAULT_DIM
) -> Dict:
    """T(u) by a linear solve, by the perturbation determinant and by the spectral measure."""
    f = parse_field(field, eps)
    z = complex(u, u_imag)
    value, _ = spectral.resolvent_element(f, eps, z, dim)
    L = spectral.lax_matrix(f, eps, dim)
    det, _ = spectral.perturbation_determinant(L, z)
    return {
        "resolvent": value,
        "determinant": det / z,
        "deviation": spectral.determinant_deviation(f, eps, z, dim),
        "spectral_measure": spectral.markov_krein(spectral.ladder(L), z),
    }


@lab.tool(name="lax.poisson")
def lax_poisson_command(field: str, eps: float = config.DEFAULT_EPS, l1: int = 2, l2: int = 3, tol: float = 1e-9) -> Dict:
    """Poisson bracket of two hierarchy members from exact gradients."""
    value = spectral.poisson_check(l1, l2, parse_field(field, eps), eps)
    return {"l1": l1, "l2": l2, "bracket": value, "passed": value < tol}


# ---------------------------
# quantum
# ---------------------------
def _label(mu: Tuple[int, ...]) -> str:
    return Partition(parts=mu).label()


@lab.tool(name="quantum.block")
def quantum_block_command(
    grade: int = 2, eps: float = config.DEFAULT_EPS, hbar: float = config.DEFAULT_HBAR, a: float = config.DEFAULT_A, exact: bool = False
) -> Dict:
    """Grade block of the quantum Lax operator (columns are sources)."""
    block = fock.grade_block(grade, eps, hbar, a, exact)
    matrix = [[str(v) for v in row] for row in block.matrix.tolist()] if exact else block.matrix.tolist()
    return {"grade": grade, "basis": [[_label(mu), h] for mu, h in block.basis], "matrix": matrix}


@lab.tool(name="quantum.diag")
def quantum_diag_command(
    degree: int = config.DEFAULT_DEGREE, eps: float = config.DEFAULT_EPS, hbar: float = config.DEFAULT_HBAR, a: float = config.DEFAULT_A
) -> Dict:
    """Labeled eigenstates of O_3 on a degree block."""
    states = fock.diagonalize(degree, eps, hbar, a)
    partitions = fock.basis(degree, hbar).partitions
    return {
        "degree": degree,
        "states": [
            {
                "partition": list(s.partition.parts),
                "O3": s.energy,
                "T": s.moments,
                "vector": {_label(mu): c for mu, c in zip(partitions, s.vector)},
            }
            for s in states
        ],
    }


@lab.tool(name="quantum.commute")
def quantum_commute_command(
    degree: int = config.DEFAULT_DEGREE,
    l1: int = 3,
    l2: int = 4,
    eps: float = config.DEFAULT_EPS,
    hbar: float = config.DEFAULT_HBAR,
    a: float = config.DEFAULT_A,
    tol: float = 1e-10,
) -> Dict:
    """Norm of the commutator of two quantum hierarchy members."""
    value = fock.commutator_norm(degree, l1, l2, eps, hbar, a)
    return {"degree": degree, "l1": l1, "l2": l2, "norm": value, "passed": value < tol}


@lab.tool(name="quantum.resolvent-identity")
def quantum_resolvent_identity_command(
    max_degree: int = config.DEFAULT_DEGREE,
    u: float = 10.0,
    eps: float = config.DEFAULT_EPS,
    hbar: float = config.DEFAULT_HBAR,
    a: float = config.DEFAULT_A,
    tol: float = config.DEFAULT_TOL,
) -> Dict:
    """Block resolvent identity for every degree up to max_degree."""
    errors = [fock.resolvent_identity(d, u, eps, hbar, a) for d in range(max_degree + 1)]
    return {"errors": errors, "passed": max(errors) < tol}


# ---------------------------
# verify
# ---------------------------
@lab.tool(name="verify.theorem1")
def verify_theorem1_command(
    eps: float = config.DEFAULT_EPS,
    hbar: float = config.DEFAULT_HBAR,
    a: float = config.DEFAULT_A,
    max_degree: int = config.DEFAULT_DEGREE,
    tol: float = config.DEFAULT_TOL,
) -> Dict:
    """Quantum spectrum against classical energies of Bohr-Sommerfeld profiles."""
    cfg = config.run_config(eps=eps, hbar=hbar, a=a, degree=max_degree, tol=tol)
    report = correspondence.verify_theorem1(cfg.eps, cfg.hbar, cfg.a, cfg.degree, cfg.tol, cfg.threads)
    return report.model_dump()


@lab.tool(name="verify.part1")
def verify_part1_command(
    field: str,
    eps: float = config.DEFAULT_EPS,
    hbar: float = config.DEFAULT_HBAR,
    samples: int = config.DEFAULT_SAMPLES,
    modes: int = 127,
) -> Dict:
    """Action integrals in units of 2 pi hbar."""
    return correspondence.part1_action_report(parse_phase(field, eps), hbar, samples, modes)

