"""Dense complex linear algebra for n-qubit observables and states.

Operators and density matrices are plain ``complex128`` numpy arrays. Party 1
is the most significant tensor factor throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .config import max_dim, max_qubits
from .errors import CapacityError, IdentityViolationError, InvalidInputError

STRUCT_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([PAULI_X, PAULI_Y, PAULI_Z])


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermiticity_error(m) -> float:
    a = as_matrix(m)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def is_hermitian(m, tol: float = STRUCT_TOL) -> bool:
    return hermiticity_error(m) <= tol


def check_bloch(v, tol: float = STRUCT_TOL) -> np.ndarray:
    """Return ``v`` as a float array after checking it is a unit 3-vector."""
    a = np.asarray(v, dtype=float)
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise InvalidInputError(f"Bloch vector must be 3 finite reals, got {v!r}")
    if abs(float(a @ a) - 1.0) > tol:
        raise InvalidInputError(f"Bloch vector is not unit norm: |v|^2 = {float(a @ a)!r}")
    return a


def observable_from_bloch(v) -> np.ndarray:
    """The dichotomic observable v.sigma; eigenvalues are +1 and -1."""
    a = check_bloch(v)
    return np.tensordot(a, PAULIS, axes=1)


def pure_state_from_bloch(v) -> np.ndarray:
    """Projector (I + v.sigma)/2."""
    return 0.5 * (I2 + observable_from_bloch(v))


def bloch_from_density(rho) -> np.ndarray:
    r = as_matrix(rho)
    return np.real(np.einsum("ij,pji->p", r, PAULIS))


def kron(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    dim = a.shape[0] * b.shape[0]
    if dim > max_dim():
        raise CapacityError(f"dimension {dim} exceeds the cap {max_dim()}")
    return np.kron(a, b)


def kron_all(factors: Sequence) -> np.ndarray:
    if len(factors) == 0:
        return np.ones((1, 1), dtype=complex)
    return reduce(kron, factors)


def check_density_matrix(rho, tol: float = STRUCT_TOL) -> np.ndarray:
    r = as_matrix(rho)
    dim = r.shape[0]
    if dim & (dim - 1):
        raise InvalidInputError(f"dimension {dim} is not a power of two")
    if abs(np.trace(r) - 1.0) > tol:
        raise InvalidInputError(f"trace is {np.trace(r)!r}, expected 1")
    if hermiticity_error(r) > tol:
        raise InvalidInputError("density matrix is not Hermitian")
    diag = np.diag(r)
    if np.any(np.abs(diag.imag) > tol) or np.any(diag.real < -tol):
        raise InvalidInputError("density matrix diagonal must be real and non-negative")
    return r


def n_qubits(m) -> int:
    dim = as_matrix(m).shape[0]
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise InvalidInputError(f"dimension {dim} is not a power of two")
    return n


def expectation(rho, op) -> float:
    """Tr[rho op] for Hermitian ``op``; the imaginary part must vanish."""
    r = as_matrix(rho)
    o = as_matrix(op)
    if r.shape != o.shape:
        raise InvalidInputError(f"dimension mismatch: {r.shape} vs {o.shape}")
    value = np.einsum("ij,ji->", r, o)
    if abs(value.imag) > 1e-10:
        raise IdentityViolationError(f"expectation has imaginary part {value.imag!r}")
    return float(value.real)


def ghz_vector(n: int) -> np.ndarray:
    if not 1 <= n <= max_qubits():
        raise CapacityError(f"GHZ state needs 1 <= n <= {max_qubits()}, got {n}")
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


def ghz_state(n: int) -> np.ndarray:
    psi = ghz_vector(n)
    return np.outer(psi, psi.conj())


def maximally_mixed(n: int) -> np.ndarray:
    if not 1 <= n <= max_qubits():
        raise CapacityError(f"n must be in 1..{max_qubits()}, got {n}")
    return np.eye(2**n, dtype=complex) / 2**n


@dataclass(frozen=True, eq=False)
class SeparableState:
    """Finite convex mixture of n-fold products of single-qubit states.

    ``factors[j, i]`` is the 2x2 density matrix of party ``i`` in term ``j``.
    """

    weights: np.ndarray
    factors: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        f = np.asarray(self.factors, dtype=complex)
        if f.ndim != 4 or f.shape[2:] != (2, 2) or f.shape[0] != w.shape[0]:
            raise InvalidInputError(f"factors must have shape (terms, n, 2, 2), got {f.shape}")
        if w.shape[0] == 0 or f.shape[1] == 0:
            raise InvalidInputError("a separable state needs at least one term and one party")
        if np.any(w < 0) or abs(w.sum() - 1.0) > STRUCT_TOL:
            raise InvalidInputError("weights must be non-negative and sum to 1")
        for j in range(f.shape[0]):
            for i in range(f.shape[1]):
                try:
                    check_density_matrix(f[j, i])
                except InvalidInputError as exc:
                    raise InvalidInputError(f"factor (term {j}, party {i}): {exc}") from None
        w.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "factors", f)

    @property
    def n_parties(self) -> int:
        return self.factors.shape[1]

    @property
    def n_terms(self) -> int:
        return self.factors.shape[0]

    @classmethod
    def from_bloch(cls, weights, blochs) -> "SeparableState":
        b = np.asarray(blochs, dtype=float)
        factors = [[pure_state_from_bloch(v) for v in term] for term in b]
        return cls(np.asarray(weights, dtype=float), np.asarray(factors))


def densify(s: SeparableState) -> np.ndarray:
    if 2**s.n_parties > max_dim():
        raise CapacityError(f"2^{s.n_parties} exceeds the cap {max_dim()}")
    rho = np.zeros((2**s.n_parties,) * 2, dtype=complex)
    for p, term in zip(s.weights, s.factors):
        rho += p * kron_all(list(term))
    return rho


def random_bloch(rng: np.random.Generator, size: tuple = ()) -> np.ndarray:
    """Uniform points on the sphere from normalized Gaussian triples."""
    g = rng.normal(size=(*size, 3))
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


def random_separable(n: int, m_terms: int, seed: int) -> SeparableState:
    if n < 1 or m_terms < 1:
        raise InvalidInputError("n and m_terms must both be at least 1")
    if n > max_qubits():
        raise CapacityError(f"n = {n} exceeds the cap {max_qubits()}")
    rng = np.random.default_rng(seed)
    raw = 1.0 - rng.random(m_terms)  # in (0, 1]
    weights = raw / raw.sum()
    blochs = random_bloch(rng, (m_terms, n))
    return SeparableState.from_bloch(weights, blochs)


def separable_to_json(s: SeparableState) -> dict:
    terms = []
    for p, term in zip(s.weights, s.factors):
        factors = []
        for rho in term:
            v = bloch_from_density(rho)
            if abs(float(v @ v) - 1.0) <= STRUCT_TOL:
                factors.append([float(x) for x in v])
            else:
                factors.append({"matrix": [[float(z.real), float(z.imag)] for z in rho.reshape(-1)]})
        if all(isinstance(f, list) for f in factors):
            terms.append({"p": float(p), "bloch": factors})
        else:
            terms.append({"p": float(p), "factors": [
                f if isinstance(f, dict) else {"bloch": f} for f in factors
            ]})
    return {"n": s.n_parties, "terms": terms}


def _factor_from_json(obj, where: str) -> np.ndarray:
    if isinstance(obj, dict):
        if "matrix" in obj:
            entries = obj["matrix"]
            if len(entries) != 4 or any(len(e) != 2 for e in entries):
                raise InvalidInputError(f"{where}: 'matrix' needs four [re, im] pairs")
            return np.array([complex(re, im) for re, im in entries]).reshape(2, 2)
        if "bloch" in obj:
            return pure_state_from_bloch(obj["bloch"])
        raise InvalidInputError(f"{where}: factor needs 'matrix' or 'bloch'")
    return pure_state_from_bloch(obj)


def separable_from_json(obj) -> SeparableState:
    """Parse ``{"n": int, "terms": [{"p": float, "bloch": [[x,y,z], ...]}, ...]}``.

    A term may use ``"factors"`` instead of ``"bloch"``; each entry is then a
    Bloch triple, ``{"bloch": [x,y,z]}``, or ``{"matrix": [[re, im] x 4]}``.
    """
    if not isinstance(obj, dict) or "terms" not in obj or "n" not in obj:
        raise InvalidInputError("separable state JSON needs keys 'n' and 'terms'")
    n = obj["n"]
    if not isinstance(n, int) or n < 1:
        raise InvalidInputError("'n' must be a positive integer")
    weights, factors = [], []
    for j, term in enumerate(obj["terms"]):
        if not isinstance(term, dict) or "p" not in term:
            raise InvalidInputError(f"term {j}: missing 'p'")
        entries = term.get("bloch", term.get("factors"))
        if entries is None or len(entries) != n:
            raise InvalidInputError(f"term {j}: expected {n} factors")
        weights.append(float(term["p"]))
        factors.append([_factor_from_json(e, f"term {j} factor {i}") for i, e in enumerate(entries)])
    return SeparableState(np.asarray(weights), np.asarray(factors))
