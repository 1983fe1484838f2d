"""Relaxed clique chain for phi-urchin graphs and the suppressor bound check.

States ``S_k`` (k infected clique vertices, no infected noses) form a line.
Infecting any nose is relaxed to immediate success, as is reaching the top
level. The resulting values therefore upper-bound fixation from one clique
vertex.

Two coefficient sets are available. The default uses clique size ``n`` and
clique degree ``n + phi^2 - 1`` with top level ``ceil(n/2)``. The structural
variant uses the constructed graph's clique size ``m = n/(phi+1)``, degree
``m - 1 + phi^2``, and top level ``ceil(m/2)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .chains import TridiagonalAbsorbingChain, linear_chain_hit_probabilities
from .errors import InputConstraintError, ParameterDomainError


@dataclass(frozen=True)
class CliqueChainParams:
    n: int
    phi: int
    r: float
    structural: bool = False

    def __post_init__(self):
        if int(self.phi) != self.phi or self.phi < 2:
            raise InputConstraintError(f"phi must be an integer >= 2 (got {self.phi})")
        if not self.r > 1:
            raise ParameterDomainError(f"r must exceed 1 (got {self.r})")
        if self.structural:
            if self.n % (self.phi + 1):
                raise InputConstraintError(f"phi+1={self.phi + 1} must divide n={self.n}")
        if self.clique_size < 2:
            raise InputConstraintError(f"clique chain needs at least 2 clique vertices (n={self.n})")

    @property
    def clique_size(self) -> int:
        return self.n // (self.phi + 1) if self.structural else self.n

    @property
    def degree(self) -> float:
        return self.clique_size - 1 + self.phi**2

    @property
    def top(self) -> int:
        return math.ceil(self.clique_size / 2)

    def coefficients(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Normalised ``(alpha, beta, gamma)`` for interior levels ``1..top-1``."""
        k = np.arange(1, self.top, dtype=float)
        m, d, phi, r = self.clique_size, self.degree, self.phi, self.r
        a = r * k * (m - k) / d
        b = k * (phi**2 / phi + (m - k) / d)
        c = r * k * phi**2 / d
        total = a + b + c
        return a / total, b / total, c / total


def clique_chain_values(p: CliqueChainParams) -> np.ndarray:
    """Values ``f(S_0)..f(S_top)`` of the relaxed chain (``f(S_0)=0``, ``f(S_top)=1``)."""
    alpha, beta, gamma = p.coefficients()
    out = np.empty(p.top + 1)
    out[0], out[-1] = 0.0, 1.0
    if p.top > 1:
        chain = TridiagonalAbsorbingChain(
            alpha, beta, gamma, np.zeros_like(alpha), bottom="failure", top="success"
        )
        out[1:-1] = linear_chain_hit_probabilities(chain)
    return out


def clique_chain_csv(values: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "value"])
    for k, v in enumerate(values):
        w.writerow([k, f"{v:.12g}"])
    return buf.getvalue()


@dataclass(frozen=True)
class SuppressorReport:
    n: int
    phi: int
    r: float
    chain_value: float
    bound: float
    margin: float
    regime_reached: bool
    passed: bool | None
    min_beta_over_alpha_excess: float  # min(beta/alpha - phi/r) over interior levels
    max_gamma_over_alpha_ratio: float  # max((gamma/alpha) / (2 phi^2 / n))
    structural_chain_value: float | None = None

    @property
    def flag(self) -> str | None:
        return None if self.regime_reached else "asymptotic regime not reached"

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "phi": self.phi,
            "r": self.r,
            "chain_value": self.chain_value,
            "bound": self.bound,
            "margin": self.margin,
            "pass": self.passed,
            "flag": self.flag,
            "ratio_checks": {
                "beta_over_alpha_exceeds_phi_over_r": self.min_beta_over_alpha_excess > 0,
                "min_beta_over_alpha_excess": self.min_beta_over_alpha_excess,
                "gamma_over_alpha_below_2phi2_over_n": self.max_gamma_over_alpha_ratio < 1,
                "max_gamma_over_alpha_ratio": self.max_gamma_over_alpha_ratio,
            },
            "structural_chain_value": self.structural_chain_value,
        }


def suppressor_bound_check(n: int, phi: int, r: float) -> SuppressorReport:
    """Compare the relaxed chain's ``f(S_1)`` against ``5 r phi / n``.

    When ``r > phi/2`` the inequality is not expected to hold yet; the report
    is flagged and ``passed`` is ``None`` rather than a verdict.
    """
    p = CliqueChainParams(n, phi, r)
    values = clique_chain_values(p)
    alpha, beta, gamma = p.coefficients()
    bound = 5.0 * r * phi / n
    value = float(values[1])
    regime = r <= phi / 2
    if alpha.size:
        beta_excess = float(np.min(beta / alpha - phi / r))
        gamma_ratio = float(np.max((gamma / alpha) / (2.0 * phi**2 / n)))
    else:
        beta_excess, gamma_ratio = math.inf, 0.0
    structural = None
    if n % (phi + 1) == 0 and n // (phi + 1) >= 2:
        structural = float(clique_chain_values(CliqueChainParams(n, phi, r, structural=True))[1])
    return SuppressorReport(
        n,
        int(phi),
        float(r),
        value,
        bound,
        bound - value,
        regime,
        (value < bound) if regime else None,
        beta_excess,
        gamma_ratio,
        structural,
    )
