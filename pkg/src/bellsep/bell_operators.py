"""Mermin-Klyshko coefficients and operators, Chen's V operator, spectral checks."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, Sequence, Tuple

import numpy as np

from .config import max_qubits
from .errors import CapacityError, IdentityViolationError, InvalidInputError
from .tensor_core import (
    STRUCT_TOL,
    as_matrix,
    check_bloch,
    expectation,
    kron,
    observable_from_bloch,
    random_bloch,
)

SettingTuple = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class MeasurementSettings:
    """Two orthogonal Bloch vectors per party.

    ``pairs[i, 0]`` defines the unprimed observable of party ``i`` and
    ``pairs[i, 1]`` the primed one.
    """

    pairs: np.ndarray

    def __post_init__(self):
        p = np.array(self.pairs, dtype=float)
        if p.ndim != 3 or p.shape[1:] != (2, 3) or p.shape[0] < 1:
            raise InvalidInputError(f"pairs must have shape (n, 2, 3), got {p.shape}")
        if p.shape[0] > max_qubits():
            raise CapacityError(f"{p.shape[0]} parties exceeds the cap {max_qubits()}")
        for i, (a, b) in enumerate(p):
            try:
                check_bloch(a)
                check_bloch(b)
            except InvalidInputError as exc:
                raise InvalidInputError(f"party {i}: {exc}") from None
            if abs(float(a @ b)) > STRUCT_TOL:
                raise InvalidInputError(f"party {i}: settings are not orthogonal (a.a' = {float(a @ b)!r})")
        obs = np.array([[observable_from_bloch(v) for v in pair] for pair in p])
        for i, (A, Ap) in enumerate(obs):
            if np.max(np.abs(A @ Ap + Ap @ A)) > STRUCT_TOL:
                raise InvalidInputError(f"party {i}: observables do not anticommute")
        p.setflags(write=False)
        obs.setflags(write=False)
        object.__setattr__(self, "pairs", p)
        object.__setattr__(self, "_obs", obs)

    @property
    def n_parties(self) -> int:
        return self.pairs.shape[0]

    def observable(self, party: int, setting: int) -> np.ndarray:
        return self._obs[party, setting]

    def double_primed(self, party: int) -> np.ndarray:
        """[A, A'] / 2i for one party."""
        A, Ap = self._obs[party]
        return (A @ Ap - Ap @ A) / 2j

    @classmethod
    def planar(cls, angles: Sequence[float]) -> "MeasurementSettings":
        """a = (cos t, sin t, 0), a' = (-sin t, cos t, 0) for each angle t."""
        t = np.asarray(angles, dtype=float).reshape(-1)
        c, s, z = np.cos(t), np.sin(t), np.zeros_like(t)
        return cls(np.stack([np.stack([c, s, z], -1), np.stack([-s, c, z], -1)], axis=1))

    @classmethod
    def random(cls, n: int, seed) -> "MeasurementSettings":
        """Uniform first vector, second uniform on its orthogonal great circle."""
        rng = np.random.default_rng(seed)
        pairs = []
        for _ in range(n):
            a = random_bloch(rng)
            g = rng.normal(size=3)
            g -= (g @ a) * a
            b = g / np.linalg.norm(g)
            b -= (b @ a) * a
            b /= np.linalg.norm(b)
            pairs.append([a, b])
        return cls(np.array(pairs))

    def to_json(self) -> dict:
        return {"n": self.n_parties, "pairs": self.pairs.tolist()}


def settings_from_json(obj) -> MeasurementSettings:
    """Accept ``{"n", "angles"}`` (planar, radians) or ``{"n", "pairs"}``."""
    if not isinstance(obj, dict) or "n" not in obj:
        raise InvalidInputError("settings JSON needs key 'n'")
    n = obj["n"]
    if not isinstance(n, int) or n < 1:
        raise InvalidInputError("'n' must be a positive integer")
    if "angles" in obj:
        angles = obj["angles"]
        if not isinstance(angles, list) or len(angles) != n:
            raise InvalidInputError(f"'angles' must list {n} numbers")
        return MeasurementSettings.planar([float(a) for a in angles])
    if "pairs" in obj:
        pairs = np.asarray(obj["pairs"], dtype=float)
        if pairs.shape != (n, 2, 3):
            raise InvalidInputError(f"'pairs' must have shape ({n}, 2, 3), got {pairs.shape}")
        return MeasurementSettings(pairs)
    raise InvalidInputError("settings JSON needs 'angles' or 'pairs'")


@dataclass(frozen=True)
class MKCoefficients:
    n_parties: int
    coeff: Dict[SettingTuple, Fraction]

    def __getitem__(self, k: SettingTuple) -> Fraction:
        return self.coeff.get(tuple(k), Fraction(0))

    def nonzero(self):
        return {k: c for k, c in self.coeff.items() if c != 0}


def _mk_recursion(n: int):
    """Coefficient tables of M_n and of its settings-swapped partner."""
    half = Fraction(1, 2)
    m = {(0,): Fraction(1), (1,): Fraction(0)}
    mt = {(0,): Fraction(0), (1,): Fraction(1)}
    for _ in range(1, n):
        new_m, new_mt = {}, {}
        for k in m:
            k0, k1 = k + (0,), k + (1,)
            # M_n = 1/2 M (A + A') + 1/2 M~ (A - A')
            new_m[k0] = half * m[k] + half * mt[k]
            new_m[k1] = half * m[k] - half * mt[k]
            # M~_n = 1/2 M~ (A' + A) + 1/2 M (A' - A)
            new_mt[k0] = half * mt[k] - half * m[k]
            new_mt[k1] = half * mt[k] + half * m[k]
        m, mt = new_m, new_mt
    return m, mt


def mk_coefficients(n: int) -> MKCoefficients:
    if n < 1:
        raise InvalidInputError(f"n must be at least 1, got {n}")
    m, _ = _mk_recursion(n)
    return MKCoefficients(n, {k: m[k] for k in product((0, 1), repeat=n)})


def mk_operator(settings: MeasurementSettings) -> np.ndarray:
    """Bell operator of the MK family, assembled by the two-term recursion."""
    A, Ap = settings.observable(0, 0), settings.observable(0, 1)
    m, mt = A, Ap
    for i in range(1, settings.n_parties):
        A, Ap = settings.observable(i, 0), settings.observable(i, 1)
        plus, minus = 0.5 * (A + Ap), 0.5 * (A - Ap)
        m, mt = kron(m, plus) + kron(mt, minus), kron(mt, plus) - kron(m, minus)
    return m


def mk_operator_by_terms(settings: MeasurementSettings) -> np.ndarray:
    """Same operator as a direct sum over setting tuples; slow, used as a cross-check."""
    coeffs = mk_coefficients(settings.n_parties)
    out = None
    for k, c in coeffs.nonzero().items():
        term = settings.observable(0, k[0])
        for i in range(1, settings.n_parties):
            term = kron(term, settings.observable(i, k[i]))
        out = float(c) * term if out is None else out + float(c) * term
    return out


def chen_operator(settings: MeasurementSettings) -> np.ndarray:
    m = mk_operator(settings)
    return m + m @ m


def variance(rho, op) -> float:
    """<(op - <op>)^2> evaluated directly from the centred operator."""
    o = as_matrix(op)
    mean = expectation(rho, o)
    centred = o - mean * np.eye(o.shape[0])
    return expectation(rho, centred @ centred)


@dataclass(frozen=True)
class Decomposition:
    mean: float
    mean_squared: float
    variance: float
    v_expectation: float
    residual: float


def vn_decomposition_check(rho, settings: MeasurementSettings, tol: float = 1e-12) -> Decomposition:
    """Check <V> = <M> + <M>^2 + Delta(M); raise if the residual exceeds ``tol``."""
    m = mk_operator(settings)
    mean = expectation(rho, m)
    delta = variance(rho, m)
    v = expectation(rho, m + m @ m)
    residual = abs(v - (mean + mean**2 + delta))
    if residual > tol:
        raise IdentityViolationError(f"variance decomposition residual {residual:.3e} > {tol:.1e}")
    return Decomposition(mean, mean**2, delta, v, residual)


@dataclass(frozen=True)
class SpectrumReport:
    n_parties: int
    cubic_residual: float
    square_residual: float
    tol: float

    @property
    def holds(self) -> bool:
        return self.cubic_residual <= self.tol and self.square_residual <= self.tol

    @property
    def eigenvalues(self):
        top = 2 ** ((self.n_parties - 1) / 2)
        return (top, -top, 0.0)


def check_spectrum_identity(settings: MeasurementSettings, tol: float = 1e-9) -> SpectrumReport:
    """Residuals of M^3 = 2^(n-1) M and (M^2)^2 = 2^(n-1) M^2.

    The first says the spectrum of M lies in {+-2^((n-1)/2), 0}; the second
    that M^2 has spectrum in {2^(n-1), 0}. Failure is reported, not raised.
    """
    n = settings.n_parties
    m = mk_operator(settings)
    m2 = m @ m
    scale = 2.0 ** (n - 1)
    cubic = float(np.max(np.abs(m2 @ m - scale * m)))
    square = float(np.max(np.abs(m2 @ m2 - scale * m2)))
    return SpectrumReport(n, cubic, square, tol)
