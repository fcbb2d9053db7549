"""Finite discrete inputs that maximize the rate under the average power constraint.

The probability subproblem (locations fixed) is concave and solved by
projected gradient ascent on the simplex cut by the power halfspace. Locations
move by coordinate line searches on the Lagrangian h(Y) - lam * power, where
lam is the multiplier of the last probability solve. Several random starts
are run and the best kept; the number of masses is escalated until the rate
stops improving.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from . import _backend
from .channel import ChannelParams, DiscreteInput, InfeasibleInputError, log_kernel_matrix, output_window
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    initial_panels,
    integrate_halfline,
    panel_rule,
    y_window,
)
from .rates import LN2, RateBreakdown, mutual_information

log = logging.getLogger(__name__)

# probability-step stop: rate gain over the last _WINDOW iterations, in nats
_P_TOL_NATS = 1e-11
_WINDOW = 25
# masses lighter than this are treated as unused and may be relocated
_TINY_MASS = 1e-7
_MERGE_FRACTION = 1e-4
# spacing of the amplitude grid the location search interpolates on
_AMPLITUDE_STEP = 0.02
# probability iterations spent ranking each candidate for a new mass
_SCREEN_ITERS = 40


class OptimizerError(RuntimeError):
    """The optimizer could not produce a result."""


class ConvergenceError(OptimizerError):
    """Iteration cap reached before the stop rule fired."""


@dataclass(frozen=True)
class OptimizerConfig:
    max_points: int = 10
    rate_tol_bits: float = 1e-3
    multistart_count: int = 3
    location_box: float = 10.0
    inner_iter_cap: int = 20000
    seed: int = 0
    max_sweeps: int = 40

    def __post_init__(self):
        if self.max_points < 1:
            raise ValueError("max_points must be positive")
        if self.rate_tol_bits < 1e-4:
            raise ValueError("rate_tol_bits below 1e-4 is under the quadrature noise floor")
        if self.location_box < 2:
            raise ValueError("location_box must be >= 2")
        if self.multistart_count < 1 or self.inner_iter_cap < 1:
            raise ValueError("multistart_count and inner_iter_cap must be positive")


DEFAULT_OPTIMIZER = OptimizerConfig()


# ---------------------------------------------------------------------------
# probability subproblem


def project_feasible(v, x, snr):
    """Euclidean projection onto {p >= 0, sum p = 1, x . p <= snr}."""
    x = np.asarray(x, dtype=float)
    if x.min() > snr:
        raise InfeasibleInputError(f"every location exceeds the power budget {snr}")
    return _backend.project_power_simplex(v, x, snr)


class _Grid:
    """Fixed composite Gauss-Legendre y-grid shared by every objective evaluation."""

    def __init__(self, nodes, weights):
        self.y = nodes
        self.w = weights

    def mixture(self, logK):
        return _Mixture(self, logK)

    def entropy(self, logK, p):
        """h(Y; F) in nats, its gradient in p, and log f on the grid."""
        return _Mixture(self, logK).entropy(p)


class _Mixture:
    """Entropy of sum_i p_i K(x_i, .) on a grid, with the kernel rows held fixed."""

    def __init__(self, grid, logK):
        self.shift = logK.max(axis=0)
        self.E = np.exp(logK - self.shift)
        self.wm = grid.w * np.exp(self.shift)

    def entropy(self, p):
        s = np.maximum(p @ self.E, 1e-300)
        logf = np.log(s) + self.shift
        h = -float(self.wm @ (s * logf))
        grad = -(self.E @ (self.wm * (logf + 1.0)))
        return h, grad, logf


def _converged_grid(params, x_max, qcfg, probe):
    """Double the panel count until the probe entropies settle to 1e-10 nats."""
    lo, hi = y_window(params.inr, 0.0, x_max, qcfg)
    n = initial_panels(lo, hi, params.inr)
    previous = None
    while True:
        y, w = panel_rule(lo, hi, n)
        logK = log_kernel_matrix(probe, y, params, qcfg)
        grid = _Grid(y, w)
        values = np.array(
            [grid.entropy(logK[i : i + 1], np.ones(1))[0] for i in range(probe.size)]
            + [grid.entropy(logK, np.full(probe.size, 1.0 / probe.size))[0]]
        )
        if previous is not None and np.max(np.abs(values - previous)) < 1e-10:
            return grid
        if 2 * n > qcfg.y_max_panels:
            return grid
        previous = values
        n *= 2


def _fit_multiplier(grad, x, p):
    """lam from grad_i ~ mu + lam x_i on the support; None if undetermined."""
    support = p > _TINY_MASS
    xs = x[support]
    if xs.size < 2 or np.ptp(xs) == 0:
        return None
    A = np.column_stack([np.ones(xs.size), xs])
    sw = np.sqrt(p[support])
    coef, *_ = np.linalg.lstsq(A * sw[:, None], grad[support] * sw, rcond=None)
    return max(float(coef[1]), 0.0)


def _solve_probabilities(grid, logK, x, snr, p0, iter_cap, tol_nats=_P_TOL_NATS, *, strict=True):
    """Projected gradient ascent with Barzilai-Borwein steps and Armijo backtracking.

    With ``strict=False`` hitting ``iter_cap`` returns the current iterate
    instead of raising.
    """
    mix = grid.mixture(logK)
    p = project_feasible(np.asarray(p0, dtype=float), x, snr)
    h, g, _ = mix.entropy(p)
    history = [h]
    step = 1.0 / max(1e-12, float(np.abs(g).max()))
    p_prev = g_prev = None
    for it in range(iter_cap):
        if p_prev is not None:
            s = p - p_prev
            dg = g - g_prev
            curv = -float(s @ dg)
            if curv > 1e-300:
                step = float(s @ s) / curv
        t = step
        while True:
            trial = project_feasible(p + t * g, x, snr)
            h_trial, g_trial, _ = mix.entropy(trial)
            if h_trial >= h + 1e-4 * float(g @ (trial - p)) or t < 1e-14:
                break
            t *= 0.5
        moved = float(np.abs(trial - p).max())
        p_prev, g_prev = p, g
        if h_trial >= h:
            p, h, g = trial, h_trial, g_trial
        history.append(h)
        if moved < 1e-15:
            break
        if len(history) > _WINDOW and history[-1] - history[-1 - _WINDOW] < tol_nats:
            break
    else:
        if strict:
            raise ConvergenceError(f"probability step hit the iteration cap ({iter_cap})")
    lam = _fit_multiplier(g, x, p)
    return p, h, g, lam


def optimize_probabilities(locations, params: ChannelParams, cfg: OptimizerConfig = DEFAULT_OPTIMIZER,
                           qcfg: QuadratureConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Rate-maximizing probabilities for fixed mass locations.

    Raises
    ------
    InfeasibleInputError
        If every location exceeds the power budget.
    ConvergenceError
        If ``cfg.inner_iter_cap`` iterations are not enough.
    """
    x = np.asarray(locations, dtype=float)
    if x.ndim != 1 or x.size == 0 or np.any(x < 0):
        raise ValueError("locations must be a non-empty vector of nonnegative reals")
    if np.any(np.diff(np.sort(x)) == 0):
        raise ValueError("locations must be distinct")
    if x.min() > params.snr:
        raise InfeasibleInputError(f"every location exceeds the power budget {params.snr}")
    if x.size == 1:
        return np.ones(1)
    grid = _converged_grid(params, float(x.max()), qcfg, x)
    logK = log_kernel_matrix(x, grid.y, params, qcfg)
    p, *_ = _solve_probabilities(grid, logK, x, params.snr, np.full(x.size, 1.0 / x.size), cfg.inner_iter_cap)
    return p


# ---------------------------------------------------------------------------
# location search


class _KernelTable:
    """log K(a^2, y) on an amplitude grid, spline-interpolated in a = sqrt(x)."""

    def __init__(self, params, x_max, grid, qcfg):
        a_max = math.sqrt(x_max)
        n = max(16, int(math.ceil(a_max / _AMPLITUDE_STEP)) + 1)
        self.a = np.linspace(0.0, a_max, n)
        self.x = self.a**2
        self.logK = log_kernel_matrix(self.x, grid.y, params, qcfg)
        # log K is even in a, so mirror it to give the spline the right slope at 0
        a_full = np.concatenate([-self.a[:0:-1], self.a])
        self._spline = CubicSpline(a_full, np.concatenate([self.logK[:0:-1], self.logK]), axis=0)
        self.x_max = x_max

    def rows(self, x):
        return self._spline(np.sqrt(np.asarray(x, dtype=float)))


@dataclass
class _State:
    x: np.ndarray
    p: np.ndarray
    h: float
    lam: float | None
    logK: np.ndarray = field(repr=False)


class _Problem:
    def __init__(self, params, cfg, qcfg):
        self.params = params
        self.cfg = cfg
        self.qcfg = qcfg
        self.snr = params.snr
        self.x_max = cfg.location_box * params.snr
        probe = np.array([0.0, params.snr, self.x_max])
        self.grid = _converged_grid(params, self.x_max, qcfg, probe)
        self.table = _KernelTable(params, self.x_max, self.grid, qcfg)

    def solve_p(self, x, p0, logK=None):
        if logK is None:
            logK = self.table.rows(x)
        p, h, g, lam = _solve_probabilities(self.grid, logK, x, self.snr, p0, self.cfg.inner_iter_cap)
        if lam is None:
            lam = self._single_support_multiplier(x, p, logK)
        return _State(x.copy(), p, h, lam, logK)

    def _single_support_multiplier(self, x, p, logK):
        # tangency of h(x; F) at the lone support point
        _, _, logf = self.grid.entropy(logK, p)
        marg = -(np.exp(self.table.logK) @ (self.grid.w * logf))
        i = int(np.argmax(p))
        k = int(np.clip(np.searchsorted(self.table.x, x[i]), 1, self.table.x.size - 1))
        return max(float((marg[k] - marg[k - 1]) / (self.table.x[k] - self.table.x[k - 1])), 0.0)

    def _lagrangian_line_search(self, state, i, lo, hi):
        lam = state.lam or 0.0
        logK = state.logK.copy()
        logp = np.log(np.maximum(state.p, 1e-300))[:, None]
        w = self.grid.w

        def negative(t):
            logK[i] = self.table.rows(t)
            logf = logsumexp(logK + logp, axis=0)
            return float(w @ (np.exp(logf) * logf)) + lam * state.p[i] * t

        res = minimize_scalar(negative, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-6 * max(self.snr, 1e-3)})
        return float(res.x), -float(res.fun)

    def insert_point(self, state):
        """Add the table location whose inclusion raises the rate most.

        Candidates are screened with a loose probability solve warm-started
        from the current weights with a tenth of the mass on the newcomer.
        When the budget is already spent, the existing masses are pulled
        toward zero just enough to give that tenth room; otherwise a lone
        mass at S could never be joined by anything above it.
        """
        spacing = 0.02 * max(self.snr, 1e-3)
        cand = self.table.x[::4]
        gap = np.min(np.abs(cand[:, None] - state.x[None, :]), axis=1)
        cand = cand[gap > spacing]
        power = float(state.p @ state.x)
        best = None
        for c in cand:
            room = self.snr - 0.1 * c
            if room <= 0:
                continue
            base, base_logK = state.x, state.logK
            if 0.9 * power > room:
                base = state.x * (room / (0.9 * power))
                base_logK = self.table.rows(base)
            x = np.append(base, c)
            p0 = np.append(0.9 * state.p, 0.1)
            logK = np.vstack([base_logK, self.table.rows(c)[None, :]])
            p, h, _, _ = _solve_probabilities(self.grid, logK, x, self.snr, p0, _SCREEN_ITERS,
                                              tol_nats=1e-8, strict=False)
            if best is None or h > best[1]:
                best = (x, h, p)
        if best is None:
            return state
        x, _, p = best
        x, p = _merge(x, p, self.snr)
        if x.size == state.x.size:
            return state
        return self.solve_p(x, p)

    def sweep(self, state):
        """Coordinate moves on the used masses, a probability solve, then refills."""
        used = state.p >= _TINY_MASS
        n_target = state.x.size
        x = state.x[used].copy()
        p = state.p[used].copy()
        n = x.size
        cur = _State(x, p, state.h, state.lam, state.logK[used])
        for i in range(n):
            lo = x[i - 1] if i > 0 else 0.0
            hi = x[i + 1] if i < n - 1 else self.x_max
            if n == 1:
                hi = self.snr
            cur.x = x
            cur.logK = self.table.rows(x)
            x[i], _ = self._lagrangian_line_search(cur, i, lo, hi)
        x, p = _merge(x, p, self.snr)
        if x.min() > self.snr:
            return state
        new = self.solve_p(x, p)
        while new.x.size < n_target:
            grown = self.insert_point(new)
            if grown.x.size == new.x.size:
                break
            new = grown
        return new

    def run(self, x0, p0):
        x0, p0 = _merge(np.asarray(x0, float), np.asarray(p0, float), self.snr)
        state = self.solve_p(x0, p0)
        tol = 1e-6 * LN2
        for _ in range(self.cfg.max_sweeps):
            new = self.sweep(state)
            gain = new.h - state.h
            if gain <= 0:
                break
            state = new
            if gain < tol:
                break
        return state


def _merge(x, p, snr):
    order = np.argsort(x)
    x, p = x[order], p[order]
    keep_x, keep_p = [x[0]], [p[0]]
    for xi, pi in zip(x[1:], p[1:]):
        if xi - keep_x[-1] < _MERGE_FRACTION * max(snr, 1e-3):
            tot = keep_p[-1] + pi
            keep_x[-1] = (keep_x[-1] * keep_p[-1] + xi * pi) / tot if tot > 0 else keep_x[-1]
            keep_p[-1] = tot
        else:
            keep_x.append(xi)
            keep_p.append(pi)
    return np.array(keep_x), np.array(keep_p)


def _initial_locations(n, snr, rng, first):
    """Exponential(mean S) quantiles at random levels.

    The first start also pins masses at 0 and S; later ones keep only the
    mass at 0 so that the power budget stays reachable.
    """
    if n == 1:
        return np.array([snr])
    pinned = [0.0, snr] if first else [0.0]
    levels = rng.uniform(0.02, 0.98, n - len(pinned))
    return np.sort(np.concatenate([pinned, -snr * np.log1p(-levels)]))


def _finalize(state, problem):
    """Exact-kernel probability polish, pruning, and an adaptive-quadrature rate."""
    params, qcfg = problem.params, problem.qcfg
    keep = state.p > 1e-12
    x, p = state.x[keep], state.p[keep]
    if x.size > 1:
        logK = log_kernel_matrix(x, problem.grid.y, params, qcfg)
        p, *_ = _solve_probabilities(problem.grid, logK, x, params.snr, p, problem.cfg.inner_iter_cap)
        keep = p > 1e-12
        x, p = x[keep], project_feasible(p[keep], x[keep], params.snr)
        keep = p > 0
        x, p = x[keep], p[keep]
    inp = DiscreteInput.from_arrays(x, p)
    if inp.power > params.snr + 1e-9:
        p = project_feasible(inp.p, inp.x, params.snr - 1e-12)
        inp = DiscreteInput.from_arrays(inp.x, p, drop_below=0.0)
    return inp, mutual_information(inp, params, qcfg)


def _single_mass(params, qcfg):
    inp = DiscreteInput.single(params.snr)
    return inp, mutual_information(inp, params, qcfg)


def optimize_input(n_points: int, params: ChannelParams, cfg: OptimizerConfig = DEFAULT_OPTIMIZER,
                   qcfg: QuadratureConfig = DEFAULT_CONFIG, *, warm_start: DiscreteInput | None = None,
                   _problem: _Problem | None = None):
    """Best ``n_points``-mass input found from ``cfg.multistart_count`` random starts.

    A ``warm_start`` input (fewer masses) is also tried, padded with unused
    masses, so the result never falls below it.
    """
    if not 1 <= n_points <= cfg.max_points:
        raise ValueError(f"n_points must lie in [1, {cfg.max_points}]")
    if params.snr == 0:
        return _single_mass(params, qcfg)
    if n_points == 1:
        return _single_mass(params, qcfg)
    problem = _problem or _Problem(params, cfg, qcfg)
    rng = np.random.default_rng([cfg.seed, n_points])
    starts = []
    for k in range(cfg.multistart_count):
        x0 = _initial_locations(n_points, params.snr, rng, k == 0)
        starts.append((x0, np.full(n_points, 1.0 / n_points)))
    if warm_start is not None:
        x0 = list(warm_start.locations)
        p0 = list(warm_start.probs)
        # extra masses start unused; the first sweep refills them by screened insertion
        extra = n_points - len(x0)
        for k in range(extra):
            x0.append(problem.x_max * (k + 1) / (extra + 1) + 1e-3 * k)
            p0.append(0.0)
        starts.append((np.array(x0), np.array(p0)))
    best = None
    for x0, p0 in starts:
        state = problem.run(x0, p0)
        log.debug("n=%d start -> %.6f bits", n_points, state.h / LN2)
        if best is None or state.h > best.h:
            best = state
    return _finalize(best, problem)


@dataclass(frozen=True)
class EscalationStep:
    n: int
    rate_bits: float
    input: DiscreteInput


def escalate_mass_points(params: ChannelParams, cfg: OptimizerConfig = DEFAULT_OPTIMIZER,
                         qcfg: QuadratureConfig = DEFAULT_CONFIG):
    """Add masses until the rate gain drops below ``cfg.rate_tol_bits``.

    Returns ``(input, rate, trace)``; the trace lists every n tried.
    """
    problem = None if params.snr == 0 else _Problem(params, cfg, qcfg)
    trace = []
    best_inp, best_rate = optimize_input(1, params, cfg, qcfg)
    trace.append(EscalationStep(1, best_rate.mi_bits, best_inp))
    for n in range(2, cfg.max_points + 1):
        if problem is None:
            break
        inp, rate = optimize_input(n, params, cfg, qcfg, warm_start=best_inp, _problem=problem)
        trace.append(EscalationStep(n, rate.mi_bits, inp))
        gain = rate.mi_bits - best_rate.mi_bits
        if gain > 0:
            best_inp, best_rate = inp, rate
        if gain < cfg.rate_tol_bits:
            break
    return best_inp, best_rate, trace


# ---------------------------------------------------------------------------
# multiplier and optimality conditions


def _frozen_rate_nats(x, snr, params, grid, cfg, qcfg):
    """Optimized h(Y) - h(W) at power budget ``snr`` for fixed locations, in nats."""
    logK = log_kernel_matrix(x, grid.y, params, qcfg)
    noise = log_kernel_matrix(np.zeros(1), grid.y, params, qcfg)
    p0 = np.full(x.size, 1.0 / x.size)
    if x.size == 1:
        h_y = grid.entropy(logK, np.ones(1))[0]
    else:
        _, h_y, _, _ = _solve_probabilities(grid, logK, x, snr, p0, cfg.inner_iter_cap)
    return h_y - grid.entropy(noise, np.ones(1))[0]


def estimate_lambda(inp: DiscreteInput, params: ChannelParams, cfg: OptimizerConfig = DEFAULT_OPTIMIZER,
                    qcfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Power multiplier as the slope of the optimized rate (nats) in S.

    Central difference with step max(1e-2, 1e-3 S); locations stay frozen and
    only the probabilities are re-optimized at S +/- step.
    """
    x = np.asarray(inp.locations, dtype=float)
    step = max(1e-2, 1e-3 * params.snr)
    if x.min() > params.snr - step:
        raise InfeasibleInputError("smallest location leaves no room for the backward step")
    grid = _converged_grid(params, float(x.max()), qcfg, x)
    up = _frozen_rate_nats(x, params.snr + step, params, grid, cfg, qcfg)
    down = _frozen_rate_nats(x, params.snr - step, params, grid, cfg, qcfg)
    return (up - down) / (2.0 * step)


def _marginal_entropies(xs, inp, params, qcfg, tol=1e-9):
    """h(x; F) for every x in ``xs`` together with h(Y; F), on one converged grid."""
    x_top = max(float(np.max(xs)), max(inp.locations))
    lo, hi = y_window(params.inr, 0.0, x_top, qcfg)
    n = initial_panels(lo, hi, params.inr)
    previous = None
    while True:
        y, w = panel_rule(lo, hi, n)
        logf = logsumexp(log_kernel_matrix(inp.x, y, params, qcfg) + np.log(inp.p)[:, None], axis=0)
        marg = -(np.exp(log_kernel_matrix(xs, y, params, qcfg)) @ (w * logf))
        h_y = -float(w @ (np.exp(logf) * logf))
        current = np.append(marg, h_y)
        if previous is not None and np.max(np.abs(current - previous)) < tol:
            return marg, h_y
        if 2 * n > qcfg.y_max_panels:
            raise OptimizerError("marginal entropies did not settle on the y-grid")
        previous = current
        n *= 2


@dataclass(frozen=True)
class KktReport:
    lam: float
    grid: tuple  # ((x, slack), ...)
    max_violation: float
    mass_point_gaps: tuple
    power_used: float
    best_scan_lambda: float
    best_scan_violation: float

    def is_optimal(self, tol: float = 5e-3) -> bool:
        return self.max_violation >= -tol and max(self.mass_point_gaps, default=0.0) <= tol

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "max_violation_nats": self.max_violation,
            "mass_gaps_nats": list(self.mass_point_gaps),
            "power_used": self.power_used,
            "scan": {"lambda": self.best_scan_lambda, "max_violation_nats": self.best_scan_violation},
            "grid": [{"x": x, "slack_nats": s} for x, s in self.grid],
        }


def kkt_report(inp: DiscreteInput, lam: float, params: ChannelParams, *, grid_max: float | None = None,
               grid_n: int = 200, qcfg: QuadratureConfig = DEFAULT_CONFIG) -> KktReport:
    """Slack h(Y) + lam (x - S) - h(x; F) over [0, grid_max] and at the masses.

    Negative slack marks an x where adding a little mass would raise the rate.
    ``max_violation`` is the most negative slack on the grid (or the smallest
    slack when none is negative). The multiplier scan repeats the grid check
    for lam = 0.01, ..., 0.99 and keeps the one with the mildest violation.
    """
    if not 0 < lam:
        raise ValueError("lam must be positive")
    if grid_max is None:
        grid_max = 2.0 * max(inp.locations)
    if grid_max < 2.0 * max(inp.locations) - 1e-12:
        raise ValueError("grid_max must cover twice the largest mass location")
    if grid_n < 100:
        raise ValueError("grid_n must be at least 100")
    xs = np.linspace(0.0, grid_max, grid_n)
    marg, h_y = _marginal_entropies(np.concatenate([xs, inp.x]), inp, params, qcfg)
    grid_marg, mass_marg = marg[: xs.size], marg[xs.size :]
    slack = h_y + lam * (xs - params.snr) - grid_marg
    gaps = np.abs(h_y + lam * (inp.x - params.snr) - mass_marg)
    scan = np.arange(1, 100) / 100.0
    scan_viol = np.array([np.min(h_y + s * (xs - params.snr) - grid_marg) for s in scan])
    k = int(np.argmax(scan_viol))
    return KktReport(
        lam=float(lam),
        grid=tuple((float(a), float(b)) for a, b in zip(xs, slack)),
        max_violation=float(np.min(slack)),
        mass_point_gaps=tuple(float(g) for g in gaps),
        power_used=inp.power,
        best_scan_lambda=float(scan[k]),
        best_scan_violation=float(scan_viol[k]),
    )


def g_function(x: float, lam: float, inp: DiscreteInput, params: ChannelParams,
               qcfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """int K(x,y) ln(lam e^{-lam y} / f(y)) dy + ln(1/lam) + lam (1 + I + S), in nats.

    Evaluated by direct quadrature; at an optimal input it equals h(Y) wherever
    a mass sits and stays at or below h(Y) elsewhere.
    """
    if not 0 < lam:
        raise ValueError("lam must be positive")
    lo, hi, n0 = output_window(params, min(x, min(inp.locations)), max(x, max(inp.locations)), qcfg)
    xs = np.array([float(x)])
    logp = np.log(inp.p)[:, None]

    def integrand(y):
        logf = logsumexp(log_kernel_matrix(inp.x, y, params, qcfg) + logp, axis=0)
        return np.exp(log_kernel_matrix(xs, y, params, qcfg)[0]) * (math.log(lam) - lam * y - logf)

    return integrate_halfline(integrand, hi, qcfg, y_lower=lo, min_panels=n0) - math.log(lam) + lam * (
        1.0 + params.inr + params.snr
    )


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class OptimizationResult:
    input: DiscreteInput
    rate: RateBreakdown
    lam: float
    trace: tuple
    kkt: KktReport | None = None

    def to_dict(self) -> dict:
        out = {
            "input": self.input.to_dict(),
            "rate_bits": self.rate.mi_bits,
            "lambda": self.lam,
            "trace": [{"n": s.n, "rate_bits": s.rate_bits} for s in self.trace],
        }
        if self.kkt is not None:
            out["kkt"] = {
                "max_violation_nats": self.kkt.max_violation,
                "mass_gaps_nats": list(self.kkt.mass_point_gaps),
            }
        return out


def optimize(params: ChannelParams, cfg: OptimizerConfig = DEFAULT_OPTIMIZER,
             qcfg: QuadratureConfig = DEFAULT_CONFIG, *, with_kkt: bool = True) -> OptimizationResult:
    """Escalate, then attach the multiplier and (optionally) the KKT report."""
    inp, rate, trace = escalate_mass_points(params, cfg, qcfg)
    if inp.size == 1 or params.snr == 0:
        lam = float("nan")
        report = None
    else:
        lam = estimate_lambda(inp, params, cfg, qcfg)
        report = kkt_report(inp, lam, params, qcfg=qcfg) if with_kkt else None
    return OptimizationResult(inp, rate, lam, tuple(trace), report)
