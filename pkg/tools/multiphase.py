import logging
from typing import List, Optional, Sequence

import numpy as np

from models.errors import DomainError, EvaluationError, IncommensurabilityError, OrderingError
from models.models import FourierField, GridField, PhaseParams, validated

logger = logging.getLogger("multiphase")

PERIODICITY_TOL = 1e-9


def phase_params(s: Sequence[float], chi: Optional[Sequence[float]], eps: float) -> PhaseParams:
    s = tuple(float(v) for v in s)
    chi = tuple(float(v) for v in chi) if chi is not None else (0.0,) * (len(s) // 2)
    return validated(PhaseParams, OrderingError, s=s, chi=chi, eps=eps)


def phase_velocities(p: PhaseParams) -> List[float]:
    """c_i = (s_i^down + s_{i-1}^up) / 2 for i = 1..n."""
    return [(p.down(i) + p.up(i - 1)) / 2 for i in range(1, p.n + 1)]


def wavenumbers(p: PhaseParams) -> List[float]:
    return [p.band(i) / p.eps for i in range(1, p.n + 1)]


# ---------------------------
# One-phase periodic traveling waves
# ---------------------------
def one_phase(s: Sequence[float], chi1: float, eps: float, x, t: float = 0.0):
    """
    Periodic traveling wave with parameters s = (s_1^up, s_1^down, s_0^up).

    eta = s_1^up + b^2 / (g + S - 2 sqrt(g S) cos(b/eps (x - chi1 - c t)))
    with band b, gap g, S = s_0^up - s_1^up and c the band midpoint.
    """
    p = phase_params(s, [chi1], eps)
    b, g = p.band(1), p.gap(1)
    S = p.up(0) - p.up(1)
    c = phase_velocities(p)[0]
    theta = (b / eps) * (np.asarray(x, dtype=float) - chi1 - c * t)
    return p.up(1) + b * b / (g + S - 2 * np.sqrt(g * S) * np.cos(theta))


def one_phase_fourier(s: Sequence[float], chi1: float, eps: float, K: int, t: float = 0.0) -> FourierField:
    """Closed-form modes: eta = a + 2b sum r^m cos(m k (x - chi1 - c t)), r = sqrt(g / S)."""
    p = phase_params(s, [chi1], eps)
    b, g = p.band(1), p.gap(1)
    r = np.sqrt(g / (p.up(0) - p.up(1)))
    k = int(round(b / eps))
    shift = chi1 + phase_velocities(p)[0] * t
    modes = np.zeros(K, dtype=complex)
    for m in range(1, K // max(k, 1) + 1):
        modes[m * k - 1] = b * r**m * np.exp(1j * m * k * shift)
    return FourierField(a=p.center, modes=modes)


# ---------------------------
# Multi-phase solutions
# ---------------------------
def _phase_matrix(p: PhaseParams, x: np.ndarray, t: float, offset: float = 0.0):
    n = p.n
    up = [p.up(i) for i in range(n + 1)]
    down = [None] + [p.down(i) for i in range(1, n + 1)]
    k = wavenumbers(p)
    c = phase_velocities(p)

    Z = np.empty(n)
    for i in range(1, n + 1):
        z = (up[i - 1] - up[n]) / (down[i] - up[n])
        for j in range(1, n + 1):
            if j != i:
                z *= ((down[i] - down[j]) * (up[i - 1] - up[j - 1])) / (
                    (up[i - 1] - down[j]) * (down[i] - up[j - 1])
                )
        Z[i - 1] = np.sqrt(z)

    cauchy = np.array([[1.0 / (up[i - 1] - down[j]) for j in range(1, n + 1)] for i in range(1, n + 1)])
    M = np.broadcast_to(-cauchy, (x.size, n, n)).astype(complex)
    dM = np.zeros_like(M)
    for i in range(n):
        E = Z[i] * np.exp(-1j * k[i] * (x - p.chi[i] - c[i] * t))
        M[:, i, i] += cauchy[i, i] * E
        dM[:, i, i] = cauchy[i, i] * E * (-1j * k[i])

    constant = up[n] - sum(up[i - 1] - down[i] for i in range(1, n + 1)) - offset
    return M, dM, constant


def multi_phase(p: PhaseParams, x, t: float = 0.0, offset: float = 0.0):
    """
    Evaluate the multi-phase solution at points x and time t.

    v = s_n^up - sum(s_{i-1}^up - s_i^down) - 2 eps Im tr(M^{-1} dM/dx).
    offset is subtracted from the constant term only and leaves the
    parameters untouched; it exists to build perturbed controls.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if p.n == 0:
        values = np.full(xs.shape, p.up(0) - offset)
        return values if np.ndim(x) else float(values[0])

    M, dM, constant = _phase_matrix(p, xs, t, offset)
    det = np.linalg.det(M)
    scale = np.prod(np.abs(np.diagonal(M, axis1=1, axis2=2)), axis=1) + 1.0
    bad = np.abs(det) < 1e-13 * scale
    if np.any(bad):
        raise EvaluationError(f"phase matrix is singular at x = {xs[bad][0]}, t = {t}", location=(float(xs[bad][0]), t))
    trace = np.trace(np.linalg.solve(M, dM), axis1=1, axis2=2)
    values = constant - 2 * p.eps * trace.imag
    return values if np.ndim(x) else float(values[0])


def sample_grid(p: PhaseParams, M: int = 256, t: float = 0.0, offset: float = 0.0) -> GridField:
    x = 2 * np.pi * np.arange(M) / M
    return GridField(samples=multi_phase(p, x, t, offset), time=t)


def periodicity_check(p: PhaseParams, tol: float = PERIODICITY_TOL) -> List[int]:
    """
    Band multipliers N_i = band_i / eps in storage order [N_n, ..., N_1].
    """
    out = []
    for i in range(p.n, 0, -1):
        ratio = p.band(i) / p.eps
        count = int(round(ratio))
        if count <= 0 or abs(ratio - count) > tol:
            raise IncommensurabilityError(
                f"band {i} of length {p.band(i)} is not a positive multiple of eps = {p.eps}",
                length=p.band(i),
                unit=p.eps,
                index=i,
            )
        out.append(count)
    return out


def _multipliers_by_index(p: PhaseParams, tol: float = PERIODICITY_TOL) -> List[int]:
    return list(reversed(periodicity_check(p, tol)))


def quasi_period_check(p: PhaseParams, i: int, M: int = 64, t: float = 0.0) -> float:
    """max |v(x; chi_i + 2 pi / N_i) - v(x; chi_i)| over a grid."""
    N = _multipliers_by_index(p)[i - 1]
    x = 2 * np.pi * np.arange(M) / M
    shifted = p.with_phase(i, p.chi[i - 1] + 2 * np.pi / N)
    return float(np.max(np.abs(multi_phase(shifted, x, t) - multi_phase(p, x, t))))


# ---------------------------
# Fourier modes and the equation
# ---------------------------
def fourier(g: GridField) -> FourierField:
    """V_k = (1/M) sum_j v(x_j) e^{i k x_j}, which is numpy's inverse FFT."""
    M = g.samples.size
    V = np.fft.ifft(g.samples)
    return FourierField(a=float(V[0].real), modes=V[1 : M // 2])


def field_from_fourier(f: FourierField, M: int) -> GridField:
    if 2 * f.K >= M:
        raise DomainError(f"grid of {M} points cannot carry {f.K} modes")
    spectrum = np.zeros(M, dtype=complex)
    spectrum[0] = f.a
    spectrum[1 : f.K + 1] = f.modes
    spectrum[M - f.K :] = np.conj(f.modes[::-1])
    return GridField(samples=np.fft.fft(spectrum).real)


def bo_residual(p: PhaseParams, M: int = 256, dt: float = 1e-6, offset: float = 0.0) -> float:
    """sup |v_t + v v_x - (eps/2) J[v_xx]| on the grid, with J e^{ikx} = -i sgn(k) e^{ikx}."""
    periodicity_check(p)
    x = 2 * np.pi * np.arange(M) / M
    v = multi_phase(p, x, 0.0, offset)
    v_t = (multi_phase(p, x, dt, offset) - multi_phase(p, x, -dt, offset)) / (2 * dt)

    k = np.fft.fftfreq(M, 1.0 / M)
    v_hat = np.fft.fft(v)
    v_x = np.fft.ifft(1j * k * v_hat).real
    hilbert_v_xx = np.fft.ifft(1j * k * np.abs(k) * v_hat).real
    residual = v_t + v * v_x - (p.eps / 2) * hilbert_v_xx
    value = float(np.max(np.abs(residual)))
    logger.debug(f"Equation residual on {M} points: {value:.3e}")
    return value


def _loop_action(p: PhaseParams, direction: np.ndarray, samples: int, K: int) -> float:
    """2 sum_k k^-1 Re V_k d Im V_k along chi(t) = chi + t * direction, t in [0, 1)."""
    M = 2 * (K + 1)
    x = 2 * np.pi * np.arange(M) / M
    base = np.asarray(p.chi, dtype=float)

    loop = np.empty((samples, K), dtype=complex)
    for j in range(samples):
        shifted = p.model_copy(update={"chi": tuple(base + (j / samples) * direction)})
        loop[j] = np.fft.ifft(multi_phase(shifted, x))[1 : K + 1]

    freq = 2 * np.pi * np.fft.fftfreq(samples, 1.0 / samples)
    d_imag = np.fft.ifft(1j * freq[:, None] * np.fft.fft(loop.imag, axis=0), axis=0).real
    k = np.arange(1, K + 1)
    density = 2 * np.sum(loop.real * d_imag / k, axis=1)
    return float(np.mean(density))


def _check_index(p: PhaseParams, i: int) -> List[int]:
    if not 1 <= i <= p.n:
        raise DomainError(f"phase index {i} outside 1..{p.n}")
    return _multipliers_by_index(p)


def phase_loop_action(p: PhaseParams, i: int, samples: int = 256, K: int = 127) -> float:
    """
    Action of the loop that advances chi_i alone by 2 pi / N_i.

    Equals 2 pi eps (g_i + ... + g_n); the x-translation loop is
    -sum_i N_i times this cycle, so sum_i N_i * action = 2 pi sum_k |V_k|^2.
    """
    N = _check_index(p, i)
    direction = np.zeros(p.n)
    direction[i - 1] = 2 * np.pi / N[i - 1]
    return _loop_action(p, direction, samples, K)


def gfz_action(p: PhaseParams, i: int, samples: int = 256, K: int = 127) -> float:
    """
    Action of the cycle dual to gap i: chi_i advances by 2 pi / N_i while
    chi_{i+1} retreats by 2 pi / N_{i+1}. Equals 2 pi eps g_i.

    The integrand is a closed form on the torus, so the cycle's action is
    the difference of two single-phase loops. d/dt is spectral along the loop.
    """
    N = _check_index(p, i)
    direction = np.zeros(p.n)
    direction[i - 1] = 2 * np.pi / N[i - 1]
    if i < p.n:
        direction[i] = -2 * np.pi / N[i]
    action = _loop_action(p, direction, samples, K)
    logger.debug(f"Action along cycle {i}: {action:.10f}")
    return action
