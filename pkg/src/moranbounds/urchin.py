"""Urchin graph analysis: exact lumped chains and the level-by-level lower bound.

The urchin graph on ``2n`` vertices is an ``n``-clique whose vertices are each
matched to a private degree-one "nose". Because clique vertices are
exchangeable, the Moran process lumps exactly onto states ``(k, i, x)``:

* ``k``: infected noses,
* ``i``: infected clique vertices whose nose is clean ("isolated"),
* ``x``: infected noses whose clique partner is clean ("isolated").

The ``k - x`` remaining infected noses are covered by infected partners, so
``(k - x) + i`` clique vertices are infected.

The lower bound on a nose's fixation probability works level by level. At
level ``k`` two auxiliary absorbing chains are solved: the *climb* chain
(``h``, states ``0..k``) and the *spread* chain (``s``, states ``k..n``).
Their results give forward biases ``lambda_k``, and a birth-death chain over
the levels turns those into ``p1``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .chains import BirthDeathChain, TridiagonalAbsorbingChain, birth_death_fixation, thomas_solve
from .errors import ConvergenceError, InputConstraintError, ParameterDomainError, SizeCapError

EXACT_CAP = 60
DOMINATION_CAP = 40
SATURATED_LAMBDA = 1e300
RESIDUAL_TOL = 1e-12


def amplifier_constant(r: float) -> float:
    """``3 + (259r - 15)/((r - 2)(r - 5))``: the constant ``c(r)`` in ``p1 >= 1 - c(r)/n`` (r > 5)."""
    return 3.0 + (259.0 * r - 15.0) / ((r - 2.0) * (r - 5.0))


def _check_level(n: int, k: int, r: float, *, need_amplifying: bool = True) -> None:
    if n < 2:
        raise InputConstraintError(f"urchin analysis needs n >= 2 (got n={n})")
    if not 1 <= k <= n - 1:
        raise InputConstraintError(f"level k must satisfy 1 <= k <= n-1 (got k={k}, n={n})")
    if need_amplifying and not r > 1:
        raise ParameterDomainError(f"r must exceed 1 (got r={r})")
    if not r > 0:
        raise ParameterDomainError(f"r must be positive (got r={r})")


# ---------------------------------------------------------------------------
# Climb and spread chains
# ---------------------------------------------------------------------------


@numba.njit(cache=True)
def _climb_failure(n, k, r):
    """Failure probabilities ``1 - h_i`` for i = 0..k (success is state k+1)."""
    m = k + 1
    lower = np.zeros(m)
    diag = np.ones(m)
    upper = np.zeros(m)
    rhs = np.zeros(m)
    rn = r * n
    upper[0] = -rn / (rn + 1.0)
    rhs[0] = 1.0 / (rn + 1.0)
    for i in range(1, m):
        a = r * ((k - i) * n + i * (n - i)) / n
        b = i * (n - i) / n
        c = (k - i) / n
        total = a + b + c
        upper[i] = -a / total
        lower[i] = -b / total
        rhs[i] = c / total
    return thomas_solve(lower, diag, upper, rhs)


@numba.njit(cache=True)
def _spread_failure(n, k, r, climb_fail_top):
    """Failure probabilities ``1 - s_i`` for i = k..n."""
    m = n - k + 1
    lower = np.zeros(m)
    diag = np.ones(m)
    upper = np.zeros(m)
    rhs = np.zeros(m)
    upper[0] = -(1.0 - climb_fail_top)
    rhs[0] = climb_fail_top
    for j in range(1, m):
        i = k + j
        a = r * i * (n - i) / n
        b = ((i - k) * n + i * (n - i)) / n
        c = r * (i - k) / n
        total = a + b + c
        upper[j] = -a / total
        lower[j] = -b / total
    return thomas_solve(lower, diag, upper, rhs)


@numba.njit(cache=True)
def _level_failures(n, k, r):
    """``(1-h_0, 1-h_k, 1-s_k)`` by scalar elimination passes; no allocation.

    Eliminating a tridiagonal system from one end expresses each unknown
    through its neighbour on the other side, so the unknown at the far end
    falls out directly. All pivots are at least ``beta + gamma > 0``.
    """
    rn = r * n
    up0 = rn / (rn + 1.0)
    fail0 = 1.0 / (rn + 1.0)
    inv_n = 1.0 / n
    # Rates are left unnormalised: with total = a + b + c, the pivot
    # 1 - b'p (primes = normalised) becomes (total - b p) / total.
    # climb chain from the bottom: g_i = p g_{i+1} + q, ending at g_k
    p = up0
    q = fail0
    for i in range(1, k + 1):
        a = r * ((k - i) * n + i * (n - i)) * inv_n
        b = i * (n - i) * inv_n
        c = (k - i) * inv_n
        w = 1.0 / (a + b + c - b * p)
        p = a * w
        q = (c + b * q) * w
    g_top = q
    # climb chain from the top: g_i = p g_{i-1} + q, ending at g_0
    p = 0.0
    q = 0.0
    for i in range(k, 0, -1):
        a = r * ((k - i) * n + i * (n - i)) * inv_n
        b = i * (n - i) * inv_n
        c = (k - i) * inv_n
        w = 1.0 / (a + b + c - a * p)
        p = b * w
        q = (c + a * q) * w
    g0 = (fail0 + up0 * q) / (1.0 - up0 * p)
    # spread chain from the top; its interior rows have zero failure inflow
    p = 0.0
    for i in range(n, k, -1):
        a = r * i * (n - i) * inv_n
        b = ((i - k) * n + i * (n - i)) * inv_n
        c = r * (i - k) * inv_n
        p = b / (a + b + c - a * p)
    t0 = g_top / (1.0 - (1.0 - g_top) * p)
    return g0, g_top, t0


@numba.njit(cache=True)
def _level(n, k, r):
    """Return (h0, hkk, skk, lambda, saturated, ok) for one level, cancellation-free."""
    g0, g_top, t0 = _level_failures(n, k, r)
    if not (np.isfinite(g0) and np.isfinite(g_top) and np.isfinite(t0)):
        return 0.0, 0.0, 0.0, 0.0, False, False
    g0 = min(max(g0, 0.0), 1.0)
    t0 = min(max(t0, 0.0), 1.0)
    # 1 - h0*s = g0 + t0 - g0*t0
    back = g0 + t0 - g0 * t0
    forward = (1.0 - g0) * (1.0 - t0)
    if back <= 0.0 or forward / back > SATURATED_LAMBDA:
        return 1.0 - g0, 1.0 - g_top, 1.0 - t0, SATURATED_LAMBDA, True, True
    return 1.0 - g0, 1.0 - g_top, 1.0 - t0, forward / back, False, True


@numba.njit(cache=True, parallel=True)
def _sweep_levels(n, r):
    m = n - 1
    h0 = np.empty(m)
    hkk = np.empty(m)
    skk = np.empty(m)
    lam = np.empty(m)
    sat = np.zeros(m, dtype=np.bool_)
    ok = np.zeros(m, dtype=np.bool_)
    for j in numba.prange(m):
        a, b, c, d, e, f = _level(n, j + 1, r)
        h0[j] = a
        hkk[j] = b
        skk[j] = c
        lam[j] = d
        sat[j] = e
        ok[j] = f
    return h0, hkk, skk, lam, sat, ok


def climb_chain(n: int, k: int, r: float) -> TridiagonalAbsorbingChain:
    """Level-``k`` climb chain as a generic tridiagonal chain (states ``0..k``)."""
    _check_level(n, k, r)
    i = np.arange(k + 1, dtype=float)
    a = r * ((k - i) * n + i * (n - i)) / n
    b = i * (n - i) / n
    c = (k - i) / n
    total = a + b + c
    up, down, fail = a / total, b / total, c / total
    up[0], down[0], fail[0] = r * n / (r * n + 1.0), 1.0 / (r * n + 1.0), 0.0
    return TridiagonalAbsorbingChain(up, down, np.zeros(k + 1), fail, bottom="failure", top="success")


def spread_chain(n: int, k: int, r: float, h_kk: float) -> TridiagonalAbsorbingChain:
    """Level-``k`` spread chain (states ``k..n``); entry state ``k`` advances with ``h_kk``."""
    _check_level(n, k, r)
    if not 0 < h_kk <= 1:
        raise ParameterDomainError(f"h_kk must lie in (0, 1], got {h_kk}")
    i = np.arange(k, n + 1, dtype=float)
    a = r * i * (n - i) / n
    b = ((i - k) * n + i * (n - i)) / n
    c = r * (i - k) / n
    total = a + b + c
    total[0] = 1.0
    up, down, win = a / total, b / total, c / total
    up[0], down[0], win[0] = h_kk, 1.0 - h_kk, 0.0
    # the top state has no upward move; "reflect" is never exercised
    return TridiagonalAbsorbingChain(up, down, win, np.zeros_like(up), bottom="failure", top="reflect")


def h_values(n: int, k: int, r: float) -> np.ndarray:
    """Climb-chain success probabilities ``h_0..h_k`` at level ``k``."""
    _check_level(n, k, r)
    g, ok = _climb_failure(n, k, float(r))
    if not ok:
        raise ConvergenceError("singular climb chain", float("nan"))
    return 1.0 - np.clip(g, 0.0, 1.0)


def s_values(n: int, k: int, r: float, h_kk: float) -> np.ndarray:
    """Spread-chain success probabilities ``s_k..s_n`` at level ``k``."""
    _check_level(n, k, r)
    if not 0 < h_kk <= 1:
        raise ParameterDomainError(f"h_kk must lie in (0, 1], got {h_kk}")
    t, ok = _spread_failure(n, k, float(r), 1.0 - float(h_kk))
    if not ok:
        raise ConvergenceError("singular spread chain", float("nan"))
    return 1.0 - np.clip(t, 0.0, 1.0)


@dataclass(frozen=True)
class LevelSolution:
    n: int
    k: int
    r: float
    h: np.ndarray  # h_0..h_{k+1}, last entry is 1
    s: np.ndarray  # s_k..s_n
    lam: float
    saturated: bool


def level_solution(n: int, k: int, r: float) -> LevelSolution:
    h = h_values(n, k, r)
    s = s_values(n, k, r, float(h[-1]))
    h0, _, skk, lam, sat, _ = _level(n, k, float(r))
    return LevelSolution(n, k, float(r), np.append(h, 1.0), s, float(lam), bool(sat))


@dataclass(frozen=True)
class LevelTable:
    """Per-level summary used for the birth-death bound."""

    n: int
    r: float
    h0: np.ndarray
    hkk: np.ndarray
    skk: np.ndarray
    lam: np.ndarray
    saturated: np.ndarray

    @property
    def k(self) -> np.ndarray:
        return np.arange(1, self.n)

    def p1(self) -> float:
        return birth_death_fixation(BirthDeathChain(self.lam))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "h0", "hkk", "skk", "lambda", "saturated", "cum_prod_inv_lambda"])
        log_cum = -np.cumsum(np.log(self.lam))
        for j, k in enumerate(self.k):
            w.writerow(
                [
                    int(k),
                    f"{self.h0[j]:.12g}",
                    f"{self.hkk[j]:.12g}",
                    f"{self.skk[j]:.12g}",
                    f"{self.lam[j]:.12g}",
                    int(self.saturated[j]),
                    f"{math.exp(log_cum[j]):.12g}",
                ]
            )
        return buf.getvalue()


def level_table(n: int, r: float, threads: Optional[int] = None) -> LevelTable:
    """Solve every level ``k = 1..n-1``; O(n) work per level."""
    if n < 2:
        raise InputConstraintError(f"urchin analysis needs n >= 2 (got n={n})")
    if not r > 1:
        raise ParameterDomainError(f"r must exceed 1 (got r={r})")
    if threads is not None:
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
    h0, hkk, skk, lam, sat, ok = _sweep_levels(int(n), float(r))
    if not ok.all():
        bad = int(np.flatnonzero(~ok)[0]) + 1
        raise ConvergenceError(f"singular level chain at k={bad}", float("nan"))
    return LevelTable(int(n), float(r), h0, hkk, skk, lam, sat)


def lambda_values(n: int, r: float, threads: Optional[int] = None) -> np.ndarray:
    return level_table(n, r, threads).lam


def nose_lower_bound(n: int, r: float, threads: Optional[int] = None) -> float:
    """Certified lower bound ``p1`` on a nose's fixation probability in the urchin graph."""
    return level_table(n, r, threads).p1()


# ---------------------------------------------------------------------------
# Exact lumped chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LumpedUrchinState:
    n: int
    k: int
    i: int
    x: int

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.k <= self.n or not 0 <= self.i <= self.n - self.k or not 0 <= self.x <= self.k:
            raise InputConstraintError(f"invalid lumped urchin state {self}")

    @property
    def covered(self) -> int:
        return self.k - self.x

    @property
    def infected_clique(self) -> int:
        return self.k - self.x + self.i

    @classmethod
    def nose(cls, n: int) -> "LumpedUrchinState":
        return cls(n, 1, 0, 1)

    @classmethod
    def clique_vertex(cls, n: int) -> "LumpedUrchinState":
        return cls(n, 0, 1, 0)

    @classmethod
    def from_configuration(cls, n: int, infected) -> "LumpedUrchinState":
        """Lump a vertex set of ``make_urchin(n)`` (clique ``0..n-1``, nose of ``j`` is ``n+j``)."""
        s = set(int(v) for v in infected)
        k = i = x = 0
        for j in range(n):
            c, nose = j in s, (n + j) in s
            k += nose
            i += c and not nose
            x += nose and not c
        return cls(n, k, i, x)


def _moves(n: int, r: float, k, i, x):
    """Lumped transition rates from arrays of states: list of (rate, dk, di, dx)."""
    c = (k - x) + i
    return [
        (r / n * c * x + r * x, 0, 0, -1),  # partner of an isolated nose gets infected
        (r / n * c * (n - c - x), 0, 1, 0),  # new isolated clique vertex
        ((k - x) * (n - c) / n, 0, 0, 1),  # covered clique vertex lost: its nose becomes isolated
        (i * (n - c) / n + i * 1.0, 0, -1, 0),  # isolated clique vertex lost
        (i * r / n, 1, -1, 0),  # isolated clique vertex infects its nose
        (x / n, -1, 0, -1),  # isolated nose lost
    ]


class _FullIndex:
    def __init__(self, n: int):
        self.n = n
        sizes = np.array([(n - k + 1) * (k + 1) for k in range(n + 1)], dtype=np.int64)
        self.offset = np.concatenate(([0], np.cumsum(sizes)))
        ks, is_, xs = [], [], []
        for k in range(n + 1):
            ii, xx = np.meshgrid(np.arange(n - k + 1), np.arange(k + 1), indexing="ij")
            ks.append(np.full(ii.size, k))
            is_.append(ii.ravel())
            xs.append(xx.ravel())
        self.k = np.concatenate(ks)
        self.i = np.concatenate(is_)
        self.x = np.concatenate(xs)

    @property
    def size(self) -> int:
        return int(self.offset[-1])

    def __call__(self, k, i, x):
        return self.offset[k] + i * (k + 1) + x


def _solve_sparse(rows, cols, vals, rhs, size):
    a = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
    a = sp.identity(size, format="csr") - a
    sol = spla.spsolve(a.tocsc(), rhs, permc_spec="MMD_AT_PLUS_A")
    residual = float(np.max(np.abs(a @ sol - rhs))) if size else 0.0
    if not np.all(np.isfinite(sol)) or residual > RESIDUAL_TOL:
        raise ConvergenceError(f"sparse solve residual {residual:.3e} exceeds {RESIDUAL_TOL}", residual)
    return sol, residual


@dataclass(frozen=True)
class UrchinExactTable:
    n: int
    r: float
    values: np.ndarray
    residual: float
    _index: _FullIndex

    def __getitem__(self, state: LumpedUrchinState) -> float:
        return float(self.values[self._index(state.k, state.i, state.x)])


def urchin_exact_table(n: int, r: float, cap: int = EXACT_CAP) -> UrchinExactTable:
    """Fixation probability from every lumped state, no relaxation."""
    if n < 1:
        raise InputConstraintError(f"n must be positive (got {n})")
    if n > cap:
        raise SizeCapError(f"lumped exact solver is capped at n={cap} (got n={n})")
    if not r > 0:
        raise ParameterDomainError(f"r must be positive (got r={r})")
    idx = _FullIndex(n)
    k, i, x = idx.k, idx.i, idx.x
    src = np.arange(idx.size)
    fix = idx(n, 0, 0)
    interior = (src != fix) & (src != idx(0, 0, 0))
    moves = _moves(n, float(r), k.astype(float), i.astype(float), x.astype(float))
    total = sum(m[0] for m in moves)
    rows, cols, vals = [], [], []
    rhs = np.zeros(idx.size)
    for rate, dk, di, dx in moves:
        live = interior & (rate > 0)
        s = src[live]
        dst = idx(k[live] + dk, i[live] + di, x[live] + dx)
        p = rate[live] / total[live]
        to_fix = dst == fix
        rhs[s[to_fix]] += p[to_fix]
        keep = ~to_fix
        rows.append(s[keep])
        cols.append(dst[keep])
        vals.append(p[keep])
    # absorbing rows stay identity: 0 for extinction, 1 for fixation
    rhs[fix] = 1.0
    values, residual = _solve_sparse(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), rhs, idx.size)
    return UrchinExactTable(n, float(r), np.clip(values, 0.0, 1.0), residual, idx)


def urchin_exact_fixation(n: int, r: float, start: Optional[LumpedUrchinState] = None) -> float:
    """Exact fixation probability on the urchin graph; default start is a single nose."""
    start = LumpedUrchinState.nose(n) if start is None else start
    if start.n != n:
        raise InputConstraintError(f"start state belongs to n={start.n}, not n={n}")
    return urchin_exact_table(n, r)[start]


@dataclass(frozen=True)
class LevelHitting:
    """Within-level probabilities ``q[i, x]`` of gaining a nose before losing one."""

    n: int
    k: int
    r: float
    q: np.ndarray  # shape (n-k+1, k+1)
    residual: float

    def p(self, j: int) -> float:
        """Value at the canonical state with ``j`` infected clique vertices."""
        if j > self.k:
            return float(self.q[j - self.k, 0])
        return float(self.q[0, self.k - j])


def q_exact_level(n: int, r: float, k: int) -> LevelHitting:
    _check_level(n, k, r, need_amplifying=False)
    ni, nx = n - k + 1, k + 1
    ii, xx = np.meshgrid(np.arange(ni), np.arange(nx), indexing="ij")
    i, x = ii.ravel().astype(float), xx.ravel().astype(float)
    size = ni * nx
    src = np.arange(size)
    moves = _moves(n, float(r), np.full(size, float(k)), i, x)
    total = sum(m[0] for m in moves)
    rows, cols, vals = [], [], []
    rhs = np.zeros(size)
    for rate, dk, di, dx in moves:
        live = rate > 0
        p = rate[live] / total[live]
        if dk == 1:
            rhs[src[live]] += p
            continue
        if dk == -1:
            continue
        dst = (ii.ravel()[live] + di) * nx + (xx.ravel()[live] + dx)
        rows.append(src[live])
        cols.append(dst)
        vals.append(p)
    q, residual = _solve_sparse(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), rhs, size)
    return LevelHitting(n, k, float(r), np.clip(q, 0.0, 1.0).reshape(ni, nx), residual)


@dataclass(frozen=True)
class DominationReport:
    n: int
    r: float
    passed: bool
    checked: int
    worst_step_margin: float  # min q[i,x] - q[i-1,x-1] over i, x >= 1
    worst_canonical_margin: float  # min q[i,x] - p_{k+i-x} over states with min(i, x) >= 1
    failures: tuple = ()

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "pass": self.passed,
            "checked": self.checked,
            "worst_step_margin": self.worst_step_margin,
            "worst_canonical_margin": self.worst_canonical_margin,
            "failures": [list(f) for f in self.failures],
        }


def verify_domination(n: int, r: float, cap: int = DOMINATION_CAP) -> DominationReport:
    """Check ``q[i,x] > q[i-1,x-1]`` and ``q[i,x] >= p_{k+i-x}`` on every level."""
    if n > cap:
        raise SizeCapError(f"domination check is capped at n={cap} (got n={n})")
    if n < 2:
        raise InputConstraintError(f"urchin analysis needs n >= 2 (got n={n})")
    step = canon = math.inf
    checked = 0
    failures = []
    for k in range(1, n):
        lvl = q_exact_level(n, r, k)
        q = lvl.q
        for i in range(n - k + 1):
            for x in range(k + 1):
                checked += 1
                target = lvl.p(k + i - x)
                margin = q[i, x] - target
                if min(i, x) >= 1:
                    canon = min(canon, margin)
                    d = q[i, x] - q[i - 1, x - 1]
                    step = min(step, d)
                    if d <= 0:
                        failures.append(("step", k, i, x, float(d)))
                    if margin <= 0:
                        failures.append(("canonical", k, i, x, float(margin)))
                elif margin < -RESIDUAL_TOL:
                    failures.append(("canonical", k, i, x, float(margin)))
    step = step if math.isfinite(step) else 0.0
    canon = canon if math.isfinite(canon) else 0.0
    return DominationReport(n, float(r), not failures, checked, float(step), float(canon), tuple(failures))


@dataclass(frozen=True)
class BoundCheck:
    name: str
    checked: int  # levels where the bound's hypotheses hold and its RHS is in [0, 1]
    violations: int
    worst_margin: float  # min(value - bound) over checked levels

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {"checked": self.checked, "violations": self.violations, "worst_margin": self.worst_margin}


def _bound_check(name: str, value: np.ndarray, bound: np.ndarray, mask: np.ndarray, tol: float) -> BoundCheck:
    mask = mask & (bound >= 0) & (bound <= 1)
    if not mask.any():
        return BoundCheck(name, 0, 0, math.inf)
    margin = value[mask] - bound[mask]
    return BoundCheck(name, int(mask.sum()), int((margin < -tol).sum()), float(margin.min()))


def level_bound_checks(table: LevelTable, tol: float = 1e-12) -> dict[str, BoundCheck]:
    """Evaluate the four per-level inequalities wherever their hypotheses hold.

    * ``hkk``: ``h_k >= 1 - 2/(n(r-1)+1)`` (r > 1)
    * ``h0``: ``h_0 >= 1 - (k+2)/(n(r-1))`` (r > 1)
    * ``skk``: ``s_k >= 1 - 64r/((r-5)(r-1)) * n/(n-k)^2`` (r > 5)
    * ``skk_floor``: ``s_k >= 1/n`` (5 < r < n)
    """
    n, r = table.n, table.r
    k = table.k.astype(float)
    everywhere = np.ones(k.size, dtype=bool)
    checks = [
        _bound_check("hkk", table.hkk, np.full(k.size, 1.0 - 2.0 / (n * (r - 1.0) + 1.0)), everywhere, tol),
        _bound_check("h0", table.h0, 1.0 - (k + 2.0) / (n * (r - 1.0)), everywhere, tol),
    ]
    if r > 5:
        c = 64.0 * r / ((r - 5.0) * (r - 1.0))
        checks.append(_bound_check("skk", table.skk, 1.0 - c * n / (n - k) ** 2, everywhere, tol))
    else:
        checks.append(BoundCheck("skk", 0, 0, math.inf))
    floor_mask = everywhere if 5 < r < n else ~everywhere
    checks.append(_bound_check("skk_floor", table.skk, np.full(k.size, 1.0 / n), floor_mask, tol))
    return {c.name: c for c in checks}
