"""QoS-constrained power allocation solvers for one NOMA cell.

Everything here works in the cumulative-power coordinates
x = (s_2, ..., s_K) with s_1 = 1 fixed and s_{K+1} = 0 implied.  In
those coordinates each QoS requirement R_k >= T_k linearizes exactly:
with c_k = 2^{T_k} and alpha_k = 1 - eps + c_k * eps,

    alpha_k * s_k - c_k * s_{k+1} >= (c_k - 1) * m_k          (k < K)
    alpha_K * s_K                 >= (c_K - 1) * m_K          (k = K)

so the feasible set is a polytope: the QoS rows above plus the
monotone slab 1 >= s_2 >= ... >= s_K >= 0.  Feasibility reduces to a
forward recursion that propagates the largest admissible s_{k+1} down
the chain; the chain point doubles as the solver starting iterate.

Two maximizers share one projected-gradient ascent core:

* ``maximize_sum_rate``   - total spectral efficiency.  The landscape
  is multi-extremal with maxima at QoS-tight vertices, so the ascent
  runs from both chain endpoints (top-down and bottom-up tight chains)
  and keeps the better result.
* ``maximize_min_rate``   - worst-user rate via the smooth softmin
  surrogate -(1/beta) ln sum exp(-beta R_i), sharpened over a warm-
  started beta continuation; the reported objective is the true
  minimum rate.

``brute_force_oracle`` enumerates the monotone grid and serves as the
independent check on both solvers (K <= 4 only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .noma import (
    CumulativePower,
    LinkBudget,
    PowerAllocation,
    UserSet,
    from_cumulative,
    m_coefficient,
)

__all__ = [
    "InfeasibleError",
    "SolverConfig",
    "FeasibleRegion",
    "SolveResult",
    "build_feasible_region",
    "check_feasibility",
    "project",
    "sum_rate_gradient",
    "softmin",
    "softmin_gradient",
    "maximize_sum_rate",
    "maximize_min_rate",
    "brute_force_oracle",
]

_LN2 = math.log(2.0)


class InfeasibleError(Exception):
    """No power split can satisfy every QoS target.

    ``stage`` is the 1-based user index whose requirement broke the
    feasibility recursion (0 when a grid search found no feasible
    point).
    """

    def __init__(self, message: str, stage: int = 0) -> None:
        super().__init__(message)
        self.stage = stage


@dataclass(frozen=True)
class SolverConfig:
    """Tunables of the projected-gradient ascent."""

    max_iterations: int = 5000
    gradient_tolerance: float = 1e-7
    backtracking_shrink: float = 0.5
    backtracking_accept: float = 0.01
    initial_step: float = 1.0
    softmin_beta: float = 1250.0
    projection_tolerance: float = 1e-9

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.gradient_tolerance <= 0.0:
            raise ValueError("gradient_tolerance must be positive")
        if not 0.0 < self.backtracking_shrink < 1.0:
            raise ValueError("backtracking_shrink must lie in (0, 1)")
        if not 0.0 < self.backtracking_accept < 1.0:
            raise ValueError("backtracking_accept must lie in (0, 1)")
        if self.initial_step <= 0.0:
            raise ValueError("initial_step must be positive")
        if self.softmin_beta <= 0.0:
            raise ValueError("softmin_beta must be positive")
        if self.projection_tolerance <= 0.0:
            raise ValueError("projection_tolerance must be positive")


@dataclass(frozen=True)
class FeasibleRegion:
    """Polytope {x : G x <= h} over x = (s_2 ... s_K), rows unit-normalized.

    ``witness_x`` is a feasible point (the forward-chain point) or None
    when the region is empty.  Row order: QoS rows for users 1..K, then
    the monotone-slab rows.
    """

    dim: int
    G: np.ndarray
    h: np.ndarray
    labels: tuple[str, ...]
    witness_x: np.ndarray | None
    _G_rows: list[list[float]] = field(repr=False, default_factory=list)
    _h_list: list[float] = field(repr=False, default_factory=list)

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"point must have shape ({self.dim},), got {x.shape}")
        if self.G.size == 0:
            return True
        return bool(np.all(self.G @ x <= self.h + tol))


@dataclass(frozen=True)
class SolveResult:
    """Solver output; ``objective`` is the criterion value actually achieved.

    ``trace`` rows are (iteration, objective, step, min_rate) when
    tracing was requested.
    """

    allocation: PowerAllocation
    cumulative: CumulativePower
    rates: np.ndarray
    objective: float
    iterations: int
    converged: bool
    trace: list[tuple[int, float, float, float]] | None = None


# ---------------------------------------------------------------------------
# feasibility and region construction


def _qos_data(budget: LinkBudget, users: UserSet):
    m = [m_coefficient(budget, float(h)) for h in users.gains]
    eps = budget.residual_interference
    c = [2.0 ** float(t) for t in users.qos_targets]
    alpha = [1.0 - eps + ck * eps for ck in c]
    return m, eps, c, alpha


def _chain_forward(m, c, alpha) -> tuple[bool, list[float], int]:
    """Largest admissible cumulative chain; (feasible, s chain, failing stage)."""
    K = len(m)
    s = [1.0]
    for k in range(K - 1):
        cap = (alpha[k] * s[k] - (c[k] - 1.0) * m[k]) / c[k]
        nxt = min(s[k], cap)
        if nxt < -1e-12:
            return False, s + [nxt], k + 1
        s.append(max(nxt, 0.0))
    floor_k = (c[K - 1] - 1.0) * m[K - 1] / alpha[K - 1]
    if s[K - 1] < floor_k - 1e-12:
        return False, s, K
    return True, s, 0


def _chain_backward(m, c, alpha) -> list[float]:
    """Smallest admissible chain (QoS tight from the strongest user up)."""
    K = len(m)
    s = [0.0] * K
    s[K - 1] = (c[K - 1] - 1.0) * m[K - 1] / alpha[K - 1]
    for k in range(K - 2, 0, -1):
        need = (c[k] * s[k + 1] + (c[k] - 1.0) * m[k]) / alpha[k]
        s[k] = max(s[k + 1], need)
    s[0] = 1.0
    return s


def check_feasibility(
    budget: LinkBudget, users: UserSet
) -> tuple[bool, CumulativePower | None, int]:
    """Decide whether the QoS targets admit any power split.

    Returns (feasible, witness, stage): a witness cumulative-power
    vector when feasible, else the 1-based user index whose
    requirement closed the admissible chain.
    """
    m, eps, c, alpha = _qos_data(budget, users)
    ok, s, stage = _chain_forward(m, c, alpha)
    if not ok:
        return False, None, stage
    return True, CumulativePower(np.array(s)), 0


def build_feasible_region(budget: LinkBudget, users: UserSet) -> FeasibleRegion:
    """Assemble the QoS polytope over (s_2 ... s_K)."""
    m, eps, c, alpha = _qos_data(budget, users)
    K = len(m)
    dim = K - 1
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    labels: list[str] = []

    def add(coeffs: np.ndarray, bound: float, label: str) -> None:
        norm = float(np.linalg.norm(coeffs))
        if norm == 0.0:
            return
        rows.append(coeffs / norm)
        rhs.append(bound / norm)
        labels.append(label)

    # QoS rows: alpha_k s_k - c_k s_{k+1} >= (c_k-1) m_k, as G x <= h
    for k in range(K):
        coeffs = np.zeros(dim)
        bound = -(c[k] - 1.0) * m[k]
        if k == 0:
            if dim > 0:
                coeffs[0] = c[0]
            bound += alpha[0]  # s_1 = 1 contributes alpha_1
        else:
            coeffs[k - 1] = -alpha[k]
            if k < K - 1:
                coeffs[k] = c[k]
        if dim > 0:
            add(coeffs, bound, f"qos_{k + 1}")
    # monotone slab 1 >= s_2 >= ... >= s_K >= 0
    if dim > 0:
        top = np.zeros(dim)
        top[0] = 1.0
        add(top, 1.0, "mono_top")
        for j in range(dim - 1):
            row = np.zeros(dim)
            row[j] = -1.0
            row[j + 1] = 1.0
            add(row, 0.0, f"mono_{j + 2}")
        bottom = np.zeros(dim)
        bottom[-1] = -1.0
        add(bottom, 0.0, "mono_bottom")

    G = np.array(rows) if rows else np.zeros((0, dim))
    h = np.array(rhs)
    ok, chain, _stage = _chain_forward(m, c, alpha)
    witness = np.array(chain[1:]) if ok else None
    return FeasibleRegion(
        dim=dim,
        G=G,
        h=h,
        labels=tuple(labels),
        witness_x=witness,
        _G_rows=[list(map(float, row)) for row in G],
        _h_list=[float(v) for v in h],
    )


# ---------------------------------------------------------------------------
# projection (small dense active-set QP, deterministic tie-breaking)


def _solve_sym(A: list[list[float]], b: list[float]) -> list[float]:
    """Solve the (tiny) symmetric system A lam = b; least-squares fallback."""
    n = len(b)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    scale = max((abs(M[i][j]) for i in range(n) for j in range(n)), default=0.0) + 1.0
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        if abs(M[piv][col]) < 1e-12 * scale:
            lam, *_ = np.linalg.lstsq(np.array(A), np.array(b), rcond=None)
            return [float(v) for v in lam]
        M[col], M[piv] = M[piv], M[col]
        inv = 1.0 / M[col][col]
        for r in range(col + 1, n):
            f = M[r][col] * inv
            if f != 0.0:
                for cc in range(col, n + 1):
                    M[r][cc] -= f * M[col][cc]
    lam = [0.0] * n
    for r in range(n - 1, -1, -1):
        acc = M[r][n]
        for cc in range(r + 1, n):
            acc -= M[r][cc] * lam[cc]
        lam[r] = acc / M[r][r]
    return lam


def _dot(a: list[float], b: list[float]) -> float:
    return sum(x * y for x, y in zip(a, b))


def _project_lists(
    G: list[list[float]],
    h: list[float],
    p: list[float],
    x0: list[float],
    tol: float,
) -> list[float]:
    """Euclidean projection of p onto {x : G x <= h} from feasible x0."""
    nrows = len(h)
    dim = len(p)
    if nrows == 0 or dim == 0:
        return p[:]
    # explicit loops here: this fast path dominates the solver profile
    feasible = True
    for i in range(nrows):
        gi = G[i]
        acc = 0.0
        for d in range(dim):
            acc += gi[d] * p[d]
        if acc > h[i] + tol:
            feasible = False
            break
    if feasible:
        return p[:]
    x = x0[:]
    work = [i for i in range(nrows) if _dot(G[i], x) >= h[i] - 1e-10]
    for _ in range(60 + 12 * nrows):
        if work:
            A = [[_dot(G[i], G[j]) for j in work] for i in work]
            b = [_dot(G[i], p) - h[i] for i in work]
            lam = _solve_sym(A, b)
            xe = [
                p[d] - sum(lam[t] * G[work[t]][d] for t in range(len(work)))
                for d in range(dim)
            ]
        else:
            lam = []
            xe = p[:]
        d = [xe[i] - x[i] for i in range(dim)]
        if _dot(d, d) <= 1e-26:
            drop = None
            for t in range(len(lam)):
                if lam[t] < -1e-10 and (drop is None or lam[t] < lam[drop]):
                    drop = t
            if drop is None:
                return xe
            work.pop(drop)
            continue
        alpha = 1.0
        blocker = -1
        for i in range(nrows):
            if i in work:
                continue
            gd = _dot(G[i], d)
            if gd > 1e-13:
                ai = (h[i] - _dot(G[i], x)) / gd
                if ai < alpha - 1e-15:
                    alpha = max(ai, 0.0)
                    blocker = i
        x = [x[i] + alpha * d[i] for i in range(dim)]
        if blocker >= 0:
            work.append(blocker)
            work.sort()
    raise RuntimeError("projection active-set did not terminate")


def project(
    region: FeasibleRegion,
    point: np.ndarray,
    start: np.ndarray | None = None,
    tol: float = 1e-9,
) -> np.ndarray:
    """Nearest point of the region (Euclidean); feasible input returns unchanged."""
    p = np.asarray(point, dtype=float)
    if p.shape != (region.dim,):
        raise ValueError(f"point must have shape ({region.dim},), got {p.shape}")
    if region.dim == 0:
        return p.copy()
    if region.witness_x is None:
        raise InfeasibleError("cannot project onto an empty feasible region")
    x0 = region.witness_x if start is None else np.asarray(start, dtype=float)
    out = _project_lists(
        region._G_rows, region._h_list, [float(v) for v in p], [float(v) for v in x0], tol
    )
    return np.array(out)


# ---------------------------------------------------------------------------
# objectives and gradients (scalar loops: dimensions are tiny and these sit
# inside the Monte Carlo hot path, so avoid per-call array overhead)


def _rates_list(x: list[float], m: list[float], eps: float) -> list[float]:
    K = len(m)
    out = []
    for k in range(K):
        sk = 1.0 if k == 0 else x[k - 1]
        sk1 = x[k] if k < K - 1 else 0.0
        out.append(
            math.log2(((1.0 - eps) * sk + m[k]) / (sk1 - eps * sk + m[k]))
        )
    return out


def _sum_obj(x: list[float], m: list[float], eps: float) -> float:
    K = len(m)
    total = 0.0
    for k in range(K):
        sk = 1.0 if k == 0 else x[k - 1]
        sk1 = x[k] if k < K - 1 else 0.0
        total += math.log(((1.0 - eps) * sk + m[k]) / (sk1 - eps * sk + m[k]))
    return total / _LN2


def _sum_grad(x: list[float], m: list[float], eps: float) -> list[float]:
    K = len(m)
    N = []
    D = []
    for k in range(K):
        sk = 1.0 if k == 0 else x[k - 1]
        sk1 = x[k] if k < K - 1 else 0.0
        N.append((1.0 - eps) * sk + m[k])
        D.append(sk1 - eps * sk + m[k])
    g = []
    for j in range(1, K):  # variable s_{j+1} in 1-based terms
        g.append(((1.0 - eps) / N[j] + eps / D[j] - 1.0 / D[j - 1]) / _LN2)
    return g


def _softmin_obj(x: list[float], m: list[float], eps: float, beta: float) -> float:
    rates = _rates_list(x, m, eps)
    rmin = min(rates)
    acc = sum(math.exp(-beta * (r - rmin)) for r in rates)
    return rmin - math.log(acc) / beta


def _softmin_grad(x: list[float], m: list[float], eps: float, beta: float) -> list[float]:
    K = len(m)
    N = []
    D = []
    for k in range(K):
        sk = 1.0 if k == 0 else x[k - 1]
        sk1 = x[k] if k < K - 1 else 0.0
        N.append((1.0 - eps) * sk + m[k])
        D.append(sk1 - eps * sk + m[k])
    rates = [math.log(N[k] / D[k]) / _LN2 for k in range(K)]
    rmin = min(rates)
    ws = [math.exp(-beta * (r - rmin)) for r in rates]
    total = sum(ws)
    w = [v / total for v in ws]
    g = []
    for j in range(1, K):
        own = w[j] * ((1.0 - eps) / N[j] + eps / D[j])
        upstream = w[j - 1] * (-1.0 / D[j - 1])
        g.append((own + upstream) / _LN2)
    return g


def sum_rate_gradient(budget: LinkBudget, users: UserSet, s: np.ndarray) -> np.ndarray:
    """Analytic gradient of the total rate with respect to (s_2 ... s_K)."""
    s = np.asarray(s, dtype=float)
    if s.shape != (users.k_users,):
        raise ValueError(f"s must have shape ({users.k_users},), got {s.shape}")
    if abs(s[0] - 1.0) > 1e-9:
        raise ValueError(f"s_1 must equal 1, got {s[0]!r}")
    m, eps, _c, _alpha = _qos_data(budget, users)
    return np.array(_sum_grad([float(v) for v in s[1:]], m, eps))


def softmin_gradient(
    budget: LinkBudget, users: UserSet, s: np.ndarray, beta: float
) -> np.ndarray:
    """Analytic gradient of the softmin surrogate with respect to (s_2 ... s_K)."""
    s = np.asarray(s, dtype=float)
    if s.shape != (users.k_users,):
        raise ValueError(f"s must have shape ({users.k_users},), got {s.shape}")
    if abs(s[0] - 1.0) > 1e-9:
        raise ValueError(f"s_1 must equal 1, got {s[0]!r}")
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    m, eps, _c, _alpha = _qos_data(budget, users)
    return np.array(_softmin_grad([float(v) for v in s[1:]], m, eps, beta))


def softmin(values: np.ndarray, beta: float) -> float:
    """Smooth minimum -(1/beta) ln sum exp(-beta v), shifted for stability.

    Bounded by min(v) - ln(n)/beta <= softmin <= min(v).
    """
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("softmin of an empty vector is undefined")
    vmin = float(np.min(v))
    acc = float(np.sum(np.exp(-beta * (v - vmin))))
    return vmin - math.log(acc) / beta


# ---------------------------------------------------------------------------
# projected-gradient ascent


def _gp_ascend(x0, region, obj_fn, grad_fn, cfg, iter_budget, trace, trace_offset,
               m, eps, grad_tol=None, on_accept=None):
    G, h = region._G_rows, region._h_list
    ptol = cfg.projection_tolerance
    gtol = cfg.gradient_tolerance if grad_tol is None else grad_tol
    x = x0[:]
    f = obj_fn(x)
    step = cfg.initial_step
    iters = 0
    converged = False
    if trace is not None:
        trace.append((trace_offset, f, 0.0, min(_rates_list(x, m, eps))))
    while iters < iter_budget:
        g = grad_fn(x)
        probe = _project_lists(G, h, [x[i] + g[i] for i in range(len(x))], x, ptol)
        pg = math.sqrt(sum((probe[i] - x[i]) ** 2 for i in range(len(x))))
        if pg < gtol:
            converged = True
            break
        step = min(cfg.initial_step, step / cfg.backtracking_shrink)
        accepted = False
        while step > 1e-16:
            if step == cfg.initial_step:
                cand = probe
            else:
                cand = _project_lists(
                    G, h, [x[i] + step * g[i] for i in range(len(x))], x, ptol
                )
            d = [cand[i] - x[i] for i in range(len(x))]
            dg = _dot(g, d)
            fc = obj_fn(cand)
            if fc >= f + cfg.backtracking_accept * dg and _dot(d, d) > 0.0:
                x, f = cand, fc
                accepted = True
                if on_accept is not None:
                    on_accept(x)
                break
            step *= cfg.backtracking_shrink
        iters += 1
        if trace is not None:
            trace.append((trace_offset + iters, f, step if accepted else 0.0,
                          min(_rates_list(x, m, eps))))
        if not accepted:
            # no float-representable ascent step remains, so this is a
            # stationary point at working precision
            converged = True
            break
    return x, f, iters, converged


def _result_from_x(x, m, eps, objective, iterations, converged, trace):
    s = np.array([1.0] + list(x))
    cumulative = CumulativePower(np.minimum(1.0, np.maximum(s, 0.0)))
    allocation = from_cumulative(cumulative)
    rates = np.array(_rates_list(list(cumulative.s[1:]), m, eps))
    return SolveResult(
        allocation=allocation,
        cumulative=cumulative,
        rates=rates,
        objective=objective,
        iterations=iterations,
        converged=converged,
        trace=trace,
    )


def _single_user_result(budget: LinkBudget, users: UserSet) -> SolveResult:
    rate = math.log2(1.0 + budget.rho * float(users.gains[0]) ** 2)
    if rate < float(users.qos_targets[0]) - 1e-9:
        raise InfeasibleError(
            f"single-user capacity {rate:.6f} below target {users.qos_targets[0]!r}",
            stage=1,
        )
    return SolveResult(
        allocation=PowerAllocation(np.array([1.0])),
        cumulative=CumulativePower(np.array([1.0])),
        rates=np.array([rate]),
        objective=rate,
        iterations=0,
        converged=True,
    )


def maximize_sum_rate(
    budget: LinkBudget,
    users: UserSet,
    config: SolverConfig | None = None,
    trace: bool = False,
) -> SolveResult:
    """Total-rate-optimal power split subject to every QoS target.

    Projected-gradient ascent from both QoS-tight chain endpoints (the
    sum objective peaks at constraint vertices, and which endpoint wins
    depends on the target profile); the better run is returned.
    """
    cfg = config or SolverConfig()
    if users.k_users == 1:
        return _single_user_result(budget, users)
    m, eps, c, alpha = _qos_data(budget, users)
    ok, chain, stage = _chain_forward(m, c, alpha)
    if not ok:
        raise InfeasibleError(
            f"QoS targets close the admissible power chain at user {stage}", stage=stage
        )
    region = build_feasible_region(budget, users)
    starts = [chain[1:]]
    back = _chain_backward(m, c, alpha)[1:]
    if math.sqrt(sum((a - b) ** 2 for a, b in zip(starts[0], back))) > 1e-12:
        back = _project_lists(region._G_rows, region._h_list, back, starts[0],
                              cfg.projection_tolerance)
        starts.append(back)

    def obj(x):
        return _sum_obj(x, m, eps)

    def grad(x):
        return _sum_grad(x, m, eps)

    per_start = max(1, cfg.max_iterations // len(starts))
    best = None
    total_iters = 0
    for x0 in starts:
        run_trace: list | None = [] if trace else None
        x, f, iters, conv = _gp_ascend(
            x0, region, obj, grad, cfg, per_start, run_trace, 0, m, eps
        )
        total_iters += iters
        if best is None or f > best[1]:
            best = (x, f, conv, run_trace)
    x, f, conv, run_trace = best
    return _result_from_x(x, m, eps, f, total_iters, conv, run_trace)


def maximize_min_rate(
    budget: LinkBudget,
    users: UserSet,
    config: SolverConfig | None = None,
    trace: bool = False,
) -> SolveResult:
    """Max-min-fair power split subject to every QoS target.

    Ascends the softmin surrogate over a warm-started beta continuation
    (beta/125, beta/25, beta/5, beta) and reports the iterate with the
    best true minimum rate; ``objective`` is that true minimum.
    """
    cfg = config or SolverConfig()
    if users.k_users == 1:
        return _single_user_result(budget, users)
    m, eps, c, alpha = _qos_data(budget, users)
    ok, chain, stage = _chain_forward(m, c, alpha)
    if not ok:
        raise InfeasibleError(
            f"QoS targets close the admissible power chain at user {stage}", stage=stage
        )
    region = build_feasible_region(budget, users)
    x = chain[1:]
    best = [x, min(_rates_list(x, m, eps))]

    def note(xx):
        # the surrogate can dip while the true minimum peaks, so keep the
        # best accepted iterate regardless of which beta stage found it
        true_min = min(_rates_list(xx, m, eps))
        if true_min > best[1]:
            best[0], best[1] = xx, true_min

    betas = [cfg.softmin_beta / 125.0, cfg.softmin_beta / 25.0,
             cfg.softmin_beta / 5.0, cfg.softmin_beta]
    run_trace: list | None = [] if trace else None
    iters_left = cfg.max_iterations
    total_iters = 0
    converged = False
    # warm-up stages only shape the iterate for the next beta, so a loose
    # stopping tolerance there saves most of the iteration budget
    coarse_tol = max(cfg.gradient_tolerance, 1e-4)
    for beta in betas:

        def obj(xx, _b=beta):
            return _softmin_obj(xx, m, eps, _b)

        def grad(xx, _b=beta):
            return _softmin_grad(xx, m, eps, _b)

        stage_tol = None if beta == betas[-1] else coarse_tol
        x, _f, iters, converged = _gp_ascend(
            x, region, obj, grad, cfg, iters_left, run_trace, total_iters, m, eps,
            grad_tol=stage_tol, on_accept=note,
        )
        total_iters += iters
        iters_left -= iters
        if iters_left <= 0:
            break
    return _result_from_x(best[0], m, eps, best[1], total_iters, converged, run_trace)


# ---------------------------------------------------------------------------
# brute-force oracle


def _grid_rates(s_tail: np.ndarray, m: np.ndarray, eps: float) -> np.ndarray:
    """Rates for a batch of tail vectors (N, K-1); returns (N, K)."""
    n = s_tail.shape[0]
    K = m.size
    s = np.hstack([np.ones((n, 1)), s_tail])
    s_next = np.hstack([s[:, 1:], np.zeros((n, 1))])
    numer = (1.0 - eps) * s + m
    denom = s_next - eps * s + m
    return np.log2(numer / denom)


def brute_force_oracle(
    budget: LinkBudget,
    users: UserSet,
    objective: str = "sum",
    grid_step: float = 0.005,
) -> SolveResult:
    """Exhaustive monotone-grid search over (s_2 ... s_K); K <= 4 only.

    Filters grid points by the achieved rates against the QoS targets
    (independently of the linearized rows the iterative solvers use)
    and returns the best feasible point; ties break toward the first
    point in lexicographic grid order.
    """
    if objective not in ("sum", "min"):
        raise ValueError(f"objective must be 'sum' or 'min', got {objective!r}")
    K = users.k_users
    if K > 4:
        raise ValueError(f"grid oracle supports at most 4 users, got {K}")
    if K == 1:
        return _single_user_result(budget, users)
    n_steps = round(1.0 / grid_step)
    if n_steps < 1 or abs(n_steps * grid_step - 1.0) > 1e-9:
        raise ValueError(f"grid step must divide 1 evenly, got {grid_step!r}")
    axis = np.linspace(0.0, 1.0, n_steps + 1)
    m = np.array([m_coefficient(budget, float(h)) for h in users.gains])
    eps = budget.residual_interference
    targets = users.qos_targets

    def evaluate(s_tail: np.ndarray):
        rates = _grid_rates(s_tail, m, eps)
        feas = np.all(rates >= targets - 1e-9, axis=1)
        if not np.any(feas):
            return None, 0
        vals = rates.sum(axis=1) if objective == "sum" else rates.min(axis=1)
        vals = np.where(feas, vals, -np.inf)
        idx = int(np.argmax(vals))
        return (float(vals[idx]), s_tail[idx]), int(np.count_nonzero(feas))

    best = None
    n_feasible = 0
    if K == 2:
        cand, cnt = evaluate(axis[:, None])
        n_feasible += cnt
        best = cand
    elif K == 3:
        s2, s3 = np.meshgrid(axis, axis, indexing="ij")
        mask = s3 <= s2
        tail = np.column_stack([s2[mask], s3[mask]])
        cand, cnt = evaluate(tail)
        n_feasible += cnt
        best = cand
    else:
        s3g, s4g = np.meshgrid(axis, axis, indexing="ij")
        base_mask = s4g <= s3g
        for s2 in axis:
            mask = base_mask & (s3g <= s2)
            if not np.any(mask):
                continue
            tail = np.column_stack(
                [np.full(int(mask.sum()), s2), s3g[mask], s4g[mask]]
            )
            cand, cnt = evaluate(tail)
            n_feasible += cnt
            if cand is not None and (best is None or cand[0] > best[0]):
                best = cand
    if best is None:
        raise InfeasibleError(
            f"no feasible point on the {grid_step} grid", stage=0
        )
    val, x = best
    m_list = [float(v) for v in m]
    return _result_from_x(list(map(float, x)), m_list, eps, val, n_feasible, True, None)
