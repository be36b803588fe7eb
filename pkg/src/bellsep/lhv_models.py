"""Local hidden-variable models over a finite hidden-variable space.

Strategy enumeration is exact: a deterministic strategy is a bit mask with bit
``2*i + k`` set when party ``i`` answers -1 to setting ``k``. The value of a
full-correlation expression at every mask is one Walsh-Hadamard transform of
an integer table, which the kernel backend evaluates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from . import kernels
from .bell_operators import MeasurementSettings, MKCoefficients
from .config import LHV_ENUMERATION_CAP
from .errors import CapacityError, InfeasibleError, InvalidInputError
from .tensor_core import STRUCT_TOL, SeparableState


@dataclass(frozen=True, eq=False)
class DeterministicStrategy:
    """``outcomes[i, k]`` is party ``i``'s +-1 answer to setting ``k``."""

    outcomes: np.ndarray

    def __post_init__(self):
        o = np.array(self.outcomes, dtype=int)
        if o.ndim != 2 or o.shape[1] != 2 or not np.all(np.abs(o) == 1):
            raise InvalidInputError("a deterministic strategy is an (n, 2) array of +-1")
        o.setflags(write=False)
        object.__setattr__(self, "outcomes", o)

    @classmethod
    def from_mask(cls, mask: int, n: int) -> "DeterministicStrategy":
        bits = [[(mask >> (2 * i + k)) & 1 for k in (0, 1)] for i in range(n)]
        return cls(1 - 2 * np.array(bits))

    def as_model(self) -> "LHVModel":
        return LHVModel(np.ones(1), self.outcomes[None, :, :].astype(float))


def _integer_table(coeffs: MKCoefficients):
    """Integer numerators on a common denominator, laid out by strategy mask."""
    n = coeffs.n_parties
    denom = 1
    for c in coeffs.coeff.values():
        denom = math.lcm(denom, Fraction(c).denominator)
    table = np.zeros(1 << (2 * n), dtype=np.int64)
    for k, c in coeffs.coeff.items():
        c = Fraction(c)
        if c == 0:
            continue
        mask = sum(1 << (2 * i + ki) for i, ki in enumerate(k))
        table[mask] += int(c * denom)
    return table, denom


def lhv_max(coeffs: MKCoefficients, cap: int = LHV_ENUMERATION_CAP) -> Fraction:
    """Exact maximum over all deterministic strategies."""
    n = coeffs.n_parties
    if n > cap:
        raise CapacityError(f"enumeration over 2^{2 * n} strategies exceeds the cap n <= {cap}")
    table, denom = _integer_table(coeffs)
    best, _ = kernels.walsh_max(table)
    return Fraction(best, denom)


def lhv_argmax(coeffs: MKCoefficients, cap: int = LHV_ENUMERATION_CAP) -> DeterministicStrategy:
    n = coeffs.n_parties
    if n > cap:
        raise CapacityError(f"enumeration exceeds the cap n <= {cap}")
    table, _ = _integer_table(coeffs)
    _, mask = kernels.walsh_max(table)
    return DeterministicStrategy.from_mask(mask, n)


def strategy_value(coeffs: MKCoefficients, strategy: DeterministicStrategy) -> Fraction:
    total = Fraction(0)
    for k, c in coeffs.coeff.items():
        sign = 1
        for i, ki in enumerate(k):
            sign *= int(strategy.outcomes[i, ki])
        total += sign * Fraction(c)
    return total


@dataclass(frozen=True, eq=False)
class LHVModel:
    """Finite hidden-variable model.

    ``responses[l, i, k]`` is the expected outcome of party ``i`` under setting
    ``k`` when the hidden variable takes its ``l``-th value.
    """

    probs: np.ndarray
    responses: np.ndarray
    lambdas: tuple = ()

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).reshape(-1)
        r = np.array(self.responses, dtype=float)
        if r.ndim != 3 or r.shape[2] != 2 or r.shape[0] != p.shape[0] or p.shape[0] == 0:
            raise InvalidInputError(f"responses must have shape (lambdas, n, 2), got {r.shape}")
        if np.any(p < 0) or abs(p.sum() - 1.0) > STRUCT_TOL:
            raise InvalidInputError("probabilities must be non-negative and sum to 1")
        if np.any(np.abs(r) > 1.0 + STRUCT_TOL):
            raise InvalidInputError("responses must lie in [-1, 1]")
        r = np.clip(r, -1.0, 1.0)
        p.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "responses", r)
        labels = tuple(self.lambdas) if self.lambdas else tuple(range(p.shape[0]))
        if len(labels) != p.shape[0]:
            raise InvalidInputError("one label per hidden-variable value is required")
        object.__setattr__(self, "lambdas", labels)

    @property
    def n_parties(self) -> int:
        return self.responses.shape[1]

    def to_json(self) -> dict:
        return {
            "lambdas": len(self.probs),
            "probs": [float(x) for x in self.probs],
            "responses": self.responses.tolist(),
        }


def model_from_json(obj) -> LHVModel:
    if not isinstance(obj, dict) or not {"probs", "responses"} <= obj.keys():
        raise InvalidInputError("LHV model JSON needs 'probs' and 'responses'")
    probs = np.asarray(obj["probs"], dtype=float)
    responses = np.asarray(obj["responses"], dtype=float)
    m = obj.get("lambdas", len(probs))
    if m != len(probs):
        raise InvalidInputError(f"'lambdas' is {m} but {len(probs)} probabilities were given")
    return LHVModel(probs, responses)


def _check_tuple(model: LHVModel, k: Sequence[int]) -> tuple:
    k = tuple(int(x) for x in k)
    if len(k) != model.n_parties or any(x not in (0, 1) for x in k):
        raise InvalidInputError(f"setting tuple must have {model.n_parties} entries in {{0, 1}}, got {k}")
    return k


def lhv_correlation(model: LHVModel, k: Sequence[int]) -> float:
    k = _check_tuple(model, k)
    picked = model.responses[:, np.arange(model.n_parties), k]
    return float(model.probs @ np.prod(picked, axis=1))


def all_correlations(model: LHVModel) -> dict:
    return {k: lhv_correlation(model, k) for k in product((0, 1), repeat=model.n_parties)}


def mk_value_lhv(model: LHVModel, coeffs: MKCoefficients) -> float:
    if coeffs.n_parties != model.n_parties:
        raise InvalidInputError("coefficient table and model disagree on the number of parties")
    return sum(float(c) * lhv_correlation(model, k) for k, c in coeffs.nonzero().items())


def synthesize_lhv(s: SeparableState, settings: MeasurementSettings) -> LHVModel:
    """Hidden variable = mixture index; responses are the local expectations."""
    if s.n_parties != settings.n_parties:
        raise InvalidInputError("state and settings disagree on the number of parties")
    obs = np.array([[settings.observable(i, k) for k in (0, 1)] for i in range(s.n_parties)])
    # Tr[rho_j^i A_i(k)] for all j, i, k
    responses = np.real(np.einsum("jirc,ikcr->jik", s.factors, obs))
    return LHVModel(s.weights, responses)


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    stderr: float
    trials: int
    positive: int


def monte_carlo_correlation(model: LHVModel, k: Sequence[int], trials: int, seed: int) -> MonteCarloEstimate:
    """Outcome-level sampling: draw lambda, then independent +-1 per party.

    Party ``i`` answers +1 with probability (1 + r)/2 for its response ``r``.
    """
    if trials < 1:
        raise InvalidInputError("trials must be at least 1")
    k = _check_tuple(model, k)
    cdf = np.cumsum(model.probs)
    thresholds = 0.5 * (1.0 + model.responses[:, np.arange(model.n_parties), k])
    positive = kernels.mc_count_positive(cdf, thresholds, int(trials), int(seed))
    estimate = (2 * positive - trials) / trials
    q = positive / trials
    # sample standard deviation of +-1 draws, ddof=1
    var = 4.0 * q * (1.0 - q) * trials / (trials - 1) if trials > 1 else 0.0
    return MonteCarloEstimate(estimate, math.sqrt(var / trials), trials, positive)


CHEN_PREMISE = "<M_n^2>_LHV <= 1, from (M_n(lambda))^2 <= 1"


def chen_claimed_bound(m: float | None = None) -> float:
    """Chen's LHV bound on <V_n>: m + m^2 + (1 - m^2) maximised over m in [-1, 1].

    The variance step assumes the premise in ``CHEN_PREMISE``, which is not a
    legitimate local realistic constraint; the value is kept for comparison.
    """
    def chain(x: float) -> float:
        return x + x * x + (1.0 - x * x)

    if m is not None:
        if not -1.0 <= m <= 1.0:
            raise InvalidInputError("m must lie in [-1, 1]")
        return chain(m)
    # chain is increasing in m, so the maximum sits at the endpoint
    return chain(1.0)


@dataclass(frozen=True)
class SpectrumLHV:
    outcomes: tuple
    probs: tuple

    @property
    def mean(self) -> float:
        return float(sum(o * p for o, p in zip(self.outcomes, self.probs)))


def spectrum_matching_lhv(target_mean: float, spectrum: Sequence[float]) -> SpectrumLHV:
    """Outcome distribution on the given eigenvalues with the requested mean.

    Weight goes only to the two extreme eigenvalues.
    """
    values = [float(x) for x in spectrum]
    if not values:
        raise InvalidInputError("spectrum is empty")
    lo, hi = min(values), max(values)
    if not lo - STRUCT_TOL <= target_mean <= hi + STRUCT_TOL:
        raise InfeasibleError(f"mean {target_mean!r} lies outside [{lo!r}, {hi!r}]")
    probs = [0.0] * len(values)
    i_hi = values.index(hi)
    i_lo = values.index(lo)
    if hi == lo:
        probs[i_hi] = 1.0
    else:
        p_hi = min(1.0, max(0.0, (target_mean - lo) / (hi - lo)))
        probs[i_hi] = p_hi
        probs[i_lo] = 1.0 - p_hi
    return SpectrumLHV(tuple(values), tuple(probs))
