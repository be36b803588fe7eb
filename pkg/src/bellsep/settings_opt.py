"""Optimizers that saturate the MK and V_n bounds, and a power-iteration norm."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bell_operators import MeasurementSettings, chen_operator, mk_coefficients
from .errors import IdentityViolationError, InvalidInputError
from .tensor_core import (
    I2,
    PAULI_X,
    PAULI_Y,
    PAULIS,
    as_matrix,
    check_density_matrix,
    hermiticity_error,
    n_qubits,
    random_bloch,
)

GRID_POINTS = 64
ANGLE_TOL = 1e-10
MAX_SWEEPS = 500
MK_STALL = 1e-12
V_STALL = 1e-12
MONOTONE_SLACK = 1e-12
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class NormEstimate:
    value: float
    iterations: int
    converged: bool


def power_iteration(op, tol: float = 1e-12, max_iter: int = 1000, seed: int = 0) -> NormEstimate:
    """Largest |eigenvalue| of a Hermitian ``op`` via power iteration on op^2."""
    a = as_matrix(op)
    if hermiticity_error(a) > 1e-10:
        raise InvalidInputError("power iteration needs a Hermitian operator")
    rng = np.random.default_rng(seed)
    v = rng.normal(size=a.shape[0]) + 1j * rng.normal(size=a.shape[0])
    v /= np.linalg.norm(v)
    previous = None
    for it in range(1, max_iter + 1):
        w = a @ (a @ v)
        lam = float(np.real(np.vdot(v, w)))
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return NormEstimate(0.0, it, True)
        v = w / norm
        if previous is not None and abs(lam - previous) <= tol * abs(lam):
            return NormEstimate(math.sqrt(max(lam, 0.0)), it, True)
        previous = lam
    return NormEstimate(math.sqrt(max(previous or 0.0, 0.0)), max_iter, False)


def operator_norm(op, tol: float = 1e-12, max_iter: int = 1000, seed: int = 0) -> float:
    return power_iteration(op, tol, max_iter, seed).value


@dataclass(frozen=True)
class PlanarSettings:
    angles: tuple

    def settings(self) -> MeasurementSettings:
        return MeasurementSettings.planar(self.angles)


@dataclass(frozen=True)
class OptimizationResult:
    value: float
    argument: object
    iterations: int
    converged: bool
    restart: int = 0
    sweep_values: tuple = field(default=(), repr=False)


def xy_correlation_tensor(rho) -> np.ndarray:
    """T[p_1..p_n] = Tr[rho sigma_p1 x ... x sigma_pn] with p in {X, Y}."""
    r = check_density_matrix(rho)
    n = n_qubits(r)
    t = r.reshape((2,) * (2 * n))
    xy = np.stack([PAULI_X, PAULI_Y])  # [p, col, row]
    for i in range(n):
        t = np.tensordot(t, xy, axes=([0, n - i], [2, 1]))
    return np.real(t)


def _coefficient_tensor(n: int) -> np.ndarray:
    c = np.zeros((2,) * n)
    for k, v in mk_coefficients(n).coeff.items():
        c[k] = float(v)
    return c


def _site_matrix(phi: float) -> np.ndarray:
    """Rows: setting k; columns: Pauli X, Y."""
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, s], [-s, c]])


def _contract_except(coeff: np.ndarray, angles, skip: int | None) -> np.ndarray:
    x = coeff
    for j, phi in enumerate(angles):
        if j == skip:
            continue
        x = np.moveaxis(np.tensordot(x, _site_matrix(phi), axes=([j], [0])), -1, j)
    return x


def _mk_objective(coeff, corr, angles) -> float:
    return float(np.sum(_contract_except(coeff, angles, None) * corr))


def _golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _maximize_angle(f: Callable[[float], float], current: float) -> float:
    step = 2 * math.pi / GRID_POINTS
    grid = [g * step for g in range(GRID_POINTS)]
    values = [f(x) for x in grid]
    g = int(np.argmax(values))
    refined = _golden_max(f, grid[g] - step, grid[g] + step, ANGLE_TOL)
    best = max((refined, grid[g], current), key=f)
    return best if f(best) > f(current) else current


def _check_monotone(history):
    if len(history) > 1 and history[-1] < history[-2] - MONOTONE_SLACK:
        raise IdentityViolationError(
            f"coordinate ascent decreased the objective: {history[-2]!r} -> {history[-1]!r}"
        )


def optimize_mk(rho, n: int, restarts: int = 8, seed: int = 0) -> OptimizationResult:
    """Maximize <M_n> over planar settings for a fixed state by cyclic coordinate ascent."""
    r = check_density_matrix(rho)
    if n_qubits(r) != n:
        raise InvalidInputError(f"state has {n_qubits(r)} qubits, expected {n}")
    coeff = _coefficient_tensor(n)
    corr = xy_correlation_tensor(r)
    rng = np.random.default_rng(seed)
    starts = rng.uniform(0.0, 2 * math.pi, size=(restarts, n))
    best = None
    for index, start in enumerate(starts):
        angles = list(start)
        history = [_mk_objective(coeff, corr, angles)]
        converged = False
        sweeps = 0
        while sweeps < MAX_SWEEPS:
            sweeps += 1
            for i in range(n):
                h = np.tensordot(
                    np.moveaxis(_contract_except(coeff, angles, i), i, 0),
                    np.moveaxis(corr, i, 0),
                    axes=(list(range(1, n)), list(range(1, n))),
                )
                # objective restricted to angle i: alpha cos + beta sin
                alpha, beta = h[0, 0] + h[1, 1], h[0, 1] - h[1, 0]
                angles[i] = _maximize_angle(lambda x: alpha * math.cos(x) + beta * math.sin(x), angles[i])
            history.append(_mk_objective(coeff, corr, angles))
            _check_monotone(history)
            if history[-1] - history[-2] < MK_STALL:
                converged = True
                break
        wrapped = tuple(float(a % (2 * math.pi)) for a in angles)
        value = _mk_objective(coeff, corr, wrapped)
        result = OptimizationResult(value, PlanarSettings(wrapped), sweeps, converged, index, tuple(history))
        if best is None or result.value > best.value:
            best = result
    return best


def _ket_from_bloch(v) -> np.ndarray:
    x, y, z = v
    theta = math.acos(max(-1.0, min(1.0, z)))
    phi = math.atan2(y, x)
    return np.array([math.cos(theta / 2), complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2)])


def _kron_columns(kets) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for k in kets:
        out = np.kron(out, np.reshape(k, (-1, 1)))
    return out


def _product_value(v_op: np.ndarray, kets) -> float:
    psi = _kron_columns(kets).reshape(-1)
    return float(np.real(np.vdot(psi, v_op @ psi)))


def _effective_operator(v_op: np.ndarray, kets, i: int) -> np.ndarray:
    left = _kron_columns(kets[:i])
    right = _kron_columns(kets[i + 1:])
    proj = np.kron(np.kron(left, I2), right)
    return proj.conj().T @ v_op @ proj


def _top_bloch(h: np.ndarray):
    """Top eigenvalue and Bloch vector of a 2x2 Hermitian h = h0 I + h.sigma."""
    h0 = 0.5 * float(np.real(np.trace(h)))
    vec = 0.5 * np.real(np.einsum("ij,pji->p", h, PAULIS))
    norm = float(np.linalg.norm(vec))
    return h0 + norm, (vec / norm if norm > 0 else None)


def optimize_separable_v(settings: MeasurementSettings, restarts: int = 8, seed: int = 0) -> OptimizationResult:
    """Maximize <V_n> over pure product states by per-site top-eigenvector updates."""
    n = settings.n_parties
    v_op = chen_operator(settings)
    rng = np.random.default_rng(seed)
    best = None
    for index in range(restarts):
        blochs = [b for b in random_bloch(rng, (n,))]
        kets = [_ket_from_bloch(b) for b in blochs]
        history = [_product_value(v_op, kets)]
        converged = False
        sweeps = 0
        while sweeps < MAX_SWEEPS:
            sweeps += 1
            for i in range(n):
                _, top = _top_bloch(_effective_operator(v_op, kets, i))
                if top is not None:
                    blochs[i] = top
                    kets[i] = _ket_from_bloch(top)
            history.append(_product_value(v_op, kets))
            _check_monotone(history)
            if history[-1] - history[-2] < V_STALL:
                converged = True
                break
        argument = np.array(blochs)
        value = _product_value(v_op, [_ket_from_bloch(b) for b in argument])
        result = OptimizationResult(value, argument, sweeps, converged, index, tuple(history))
        if best is None or result.value > best.value:
            best = result
    return best
