"""Birth-death fixation and tridiagonal absorbing chains.

Both kernels are exact (no iteration). ``thomas_solve`` is the compiled
elimination routine reused by the urchin level sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.special import logsumexp

from .errors import ConvergenceError, InputConstraintError, ParameterDomainError


@dataclass(frozen=True)
class BirthDeathChain:
    """Transient levels ``1..m`` with forward bias ``lambdas[k-1]`` at level ``k``.

    The forward bias is the ratio of the up- to the down-probability. Level
    ``0`` and level ``m+1`` absorb.
    """

    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise InputConstraintError("a birth-death chain needs at least one transient level")
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
            bad = int(np.flatnonzero(~(np.isfinite(lam) & (lam > 0)))[0])
            raise ParameterDomainError(f"forward bias lambda_{bad + 1}={lam[bad]!r} must be positive and finite")
        object.__setattr__(self, "lambdas", lam)

    @property
    def m(self) -> int:
        return self.lambdas.size


def birth_death_fixation(chain: BirthDeathChain) -> float:
    """Probability of absorbing at the top when started on level 1.

    Evaluates ``1 / (1 + sum_k prod_{j<=k} 1/lambda_j)`` in log space, so
    neither long underflowing products nor overflowing ones (forward biases
    below one) lose precision.
    """
    if not isinstance(chain, BirthDeathChain):
        chain = BirthDeathChain(np.asarray(chain, dtype=float))
    log_terms = -np.cumsum(np.log(chain.lambdas))
    log_denominator = logsumexp(np.concatenate(([0.0], log_terms)))
    return float(np.exp(-log_denominator))


@numba.njit(cache=True)
def thomas_solve(lower, diag, upper, rhs):
    """Solve a tridiagonal system; ``lower[0]`` and ``upper[-1]`` are ignored.

    Returns ``(x, ok)``; ``ok`` is False when a pivot vanishes.
    """
    m = diag.shape[0]
    c = np.empty(m)
    d = np.empty(m)
    x = np.empty(m)
    piv = diag[0]
    if piv == 0.0:
        return x, False
    c[0] = upper[0] / piv
    d[0] = rhs[0] / piv
    for i in range(1, m):
        piv = diag[i] - lower[i] * c[i - 1]
        if piv == 0.0:
            return x, False
        c[i] = upper[i] / piv
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv
    x[m - 1] = d[m - 1]
    for i in range(m - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x, True


_ENDS = ("success", "failure", "reflect")


@dataclass(frozen=True)
class TridiagonalAbsorbingChain:
    """Interior states ``0..m-1`` on a line with two absorbing outcomes.

    From state ``i`` the chain moves ``up`` to ``i+1``, ``down`` to ``i-1``,
    absorbs directly with ``out_success`` / ``out_failure``, or stays put with
    the remaining probability ``stay``. Moving down from state ``0`` or up
    from state ``m-1`` resolves to ``bottom`` / ``top``: ``"success"``,
    ``"failure"``, or ``"reflect"`` (the move is treated as staying).
    """

    up: np.ndarray
    down: np.ndarray
    out_success: np.ndarray
    out_failure: np.ndarray
    stay: np.ndarray = field(default=None)
    bottom: str = "failure"
    top: str = "success"

    def __post_init__(self):
        arrays = {}
        m = np.asarray(self.up).size
        for name in ("up", "down", "out_success", "out_failure", "stay"):
            value = getattr(self, name)
            arr = np.zeros(m) if value is None else np.asarray(value, dtype=float).copy()
            if arr.shape != (m,):
                raise InputConstraintError(f"{name} must have length {m}")
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise ParameterDomainError(f"{name} must be finite and nonnegative")
            arrays[name] = arr
        if m == 0:
            raise InputConstraintError("chain needs at least one interior state")
        total = sum(arrays.values())
        worst = float(np.max(np.abs(total - 1.0)))
        if worst > 1e-12:
            raise ParameterDomainError(f"transition probabilities do not sum to 1 (max deviation {worst:.2e})")
        for end in (self.bottom, self.top):
            if end not in _ENDS:
                raise InputConstraintError(f"boundary behaviour must be one of {_ENDS}, got {end!r}")
        for name, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return self.up.size

    def system(self):
        """Return ``(lower, diag, upper, rhs)`` of the hitting-probability system."""
        m = self.m
        lower = -self.down.copy()
        upper = -self.up.copy()
        diag = 1.0 - self.stay
        rhs = self.out_success.copy()
        # boundary moves
        if self.bottom == "reflect":
            diag[0] -= self.down[0]
        elif self.bottom == "success":
            rhs[0] += self.down[0]
        if self.top == "reflect":
            diag[m - 1] -= self.up[m - 1]
        elif self.top == "success":
            rhs[m - 1] += self.up[m - 1]
        lower[0] = 0.0
        upper[m - 1] = 0.0
        return lower, diag, upper, rhs


def linear_chain_hit_probabilities(chain: TridiagonalAbsorbingChain) -> np.ndarray:
    """Per-state probability of absorbing in "success"."""
    lower, diag, upper, rhs = chain.system()
    x, ok = thomas_solve(lower, diag, upper, rhs)
    if not ok or not np.all(np.isfinite(x)):
        raise ConvergenceError("singular chain: no absorbing outcome reachable from some state")
    return np.clip(x, 0.0, 1.0)


def birth_death_as_tridiagonal(chain: BirthDeathChain) -> TridiagonalAbsorbingChain:
    lam = chain.lambdas
    up = lam / (1.0 + lam)
    down = 1.0 / (1.0 + lam)
    zeros = np.zeros_like(lam)
    return TridiagonalAbsorbingChain(up, down, zeros, zeros, bottom="failure", top="success")
