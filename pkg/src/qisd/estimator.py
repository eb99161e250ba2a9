"""Asymptotic and concrete time-exponent calculator for the hybrid trade-offs.

All exponents are expressed as ``t(delta) = log T / log T_C`` where ``T_C``
is the classical Prange running time.  Logs are base 2 throughout.

Two evaluation modes exist:

``asymptotic``
    binomials replaced by ``n * H(k/n)`` with the setting's rate ``R`` and
    error rate ``tau``; continuous ``alpha`` and ``rho``.
``concrete``
    exact log-binomials (log-gamma on real arguments) at the setting's
    ``(n, k, omega)``; integer ``p``.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import gammaln

from .classical_isd import success_prob, success_prob_lb

LOG2E = 1.0 / math.log(2.0)
_EPS = 1e-12

ALGORITHMS = ("hybrid_prange", "punctured", "combined")


# ---------------------------------------------------------------- entropy

def entropy(x: float) -> float:
    """Binary entropy ``-x log x - (1-x) log(1-x)`` with ``H(0) = H(1) = 0``."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"entropy argument {x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def entropy_inv(y: float, tol: float = 1e-15) -> float:
    """Inverse of ``entropy`` on the branch ``[0, 1/2]`` by bisection."""
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"entropy_inv argument {y} outside [0, 1]")
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if entropy(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _h(x):
    """Vectorised binary entropy; arguments are clipped into [0, 1]."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x)
    return np.where((x <= 0.0) | (x >= 1.0), 0.0, out)


def _f(m, x):
    """``m * H(x / m)``, the normalised log of ``C(m n, x n)``; zero when ``m = 0``."""
    m = np.asarray(m, dtype=float)
    x = np.asarray(x, dtype=float)
    safe = np.where(m > 0, m, 1.0)
    with np.errstate(invalid="ignore"):
        return np.where(m > 0, m * _h(x / safe), 0.0)


def _lbinom(n, k):
    """Exact ``log2 C(n, k)`` for real arguments; ``-inf`` outside ``0 <= k <= n``."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    ok = (k >= -_EPS) & (k <= n + _EPS)
    kk = np.clip(k, 0.0, None)
    nk = np.clip(n - k, 0.0, None)
    val = (gammaln(n + 1) - gammaln(kk + 1) - gammaln(nk + 1)) * LOG2E
    return np.where(ok, val, -np.inf)


# ---------------------------------------------------------------- settings

@dataclass(frozen=True)
class CodeSetting:
    """A code family: rate ``R``, error rate ``tau`` and optional concrete parameters.

    For sublinear families (``sublinear=True``) ``tau`` is an effective error
    rate used only by the entropy-based formulas; the hybrid-Prange exponent
    then uses the closed form for ``tau -> 0``.
    """

    name: str
    R: float
    tau: float
    sublinear: bool = False
    concrete: tuple[int, int, int] | None = None

    @property
    def classical_denominator(self) -> float:
        return float(_h(self.tau) - _f(1.0 - self.R, self.tau))


def _presets() -> dict[str, CodeSetting]:
    tau_full = entropy_inv(0.5)
    return {
        "fulldistance": CodeSetting("fulldistance", 0.5, tau_full),
        "halfdistance": CodeSetting("halfdistance", 0.5, tau_full / 2),
        # omega = n / (5 log n) with log2(6688) rounded up to 13
        "mceliece": CodeSetting("mceliece", 0.8, 1.0 / 65.0, True, (6688, 5024, 128)),
        "bike": CodeSetting("bike", 0.5, 264 / 81946, True, (81946, 40973, 264)),
        "hqc": CodeSetting("hqc", 0.5, 262 / 115274, True, (115274, 57637, 262)),
    }


PRESETS: dict[str, CodeSetting] = _presets()
CURVE_SETTINGS = ("fulldistance", "halfdistance", "mceliece", "bike")


def get_setting(name: str | CodeSetting) -> CodeSetting:
    if isinstance(name, CodeSetting):
        return name
    key = name.lower().replace("-", "").replace("_", "").replace(" ", "")
    if key not in PRESETS:
        raise KeyError(f"unknown setting {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[key]


@dataclass(frozen=True)
class TradeoffPoint:
    delta: float
    t: float
    alpha: float = 0.0
    rho: float = 0.0
    beta: float = 0.0


@dataclass
class TradeoffCurve:
    setting: str
    algorithm: str
    points: list[TradeoffPoint]

    @property
    def deltas(self) -> np.ndarray:
        return np.array([p.delta for p in self.points])

    @property
    def ts(self) -> np.ndarray:
        return np.array([p.t for p in self.points])

    def is_monotone(self, tol: float = 1e-9) -> bool:
        return bool(np.all(np.diff(self.ts) <= tol))

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(["delta", "t", "alpha", "rho", "algorithm", "setting"])
        for p in self.points:
            w.writerow([f"{p.delta:.6f}", f"{p.t:.6f}", f"{p.alpha:.6f}", f"{p.rho:.6f}",
                        self.algorithm, self.setting])
        return buf.getvalue()


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta {delta} outside [0, 1]")
    return delta


def _check_mode(setting: CodeSetting, mode: str) -> None:
    if mode not in ("asymptotic", "concrete"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "concrete" and setting.concrete is None:
        raise ValueError(f"setting {setting.name} has no concrete parameters")


# ---------------------------------------------------------------- objectives

def combined_beta(R: float, delta: float, alpha) -> np.ndarray:
    """``beta = (1-R)(1 - delta R / (R - alpha))``; ``-inf`` when ``alpha >= R``."""
    alpha = np.asarray(alpha, dtype=float)
    gap = R - alpha
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = (1.0 - R) * (1.0 - delta * R / np.where(gap > 0, gap, 1.0))
    return np.where(gap > 0, beta, -np.inf)


def _asym_numerator(R, tau, alpha, beta, rho):
    """Normalised ``log T_CH`` (punctured is ``alpha = 0``); ``inf`` when infeasible."""
    alpha, beta, rho = np.broadcast_arrays(
        np.asarray(alpha, float), np.asarray(beta, float), np.asarray(rho, float))
    a = 1.0 - alpha - beta
    b = 1.0 - beta - R
    w = tau - rho
    feasible = (
        (beta >= -_EPS) & (rho >= -_EPS) & (rho <= beta + _EPS) & (w >= -_EPS)
        & (w <= a + _EPS) & (w <= b + _EPS)
    )
    fa = _f(a, w)
    fb = _f(b, w)
    sigma = fa - b
    num = _h(tau) - 0.5 * (fa + fb) - _f(beta, rho) + np.maximum(0.0, 0.5 * sigma)
    return np.where(feasible, num, np.inf)


def _fs(m: float, x: float) -> float:
    if m <= 0.0:
        return 0.0
    y = min(max(x / m, 0.0), 1.0)
    if y == 0.0 or y == 1.0:
        return 0.0
    return -m * (y * math.log2(y) + (1.0 - y) * math.log2(1.0 - y))


def _asym_numerator_scalar(R: float, tau: float, alpha: float, beta: float, rho: float) -> float:
    """Scalar twin of ``_asym_numerator`` for the local optimiser."""
    a = 1.0 - alpha - beta
    b = 1.0 - beta - R
    w = tau - rho
    if not (beta >= -_EPS and rho >= -_EPS and rho <= beta + _EPS and w >= -_EPS
            and w <= a + _EPS and w <= b + _EPS):
        return math.inf
    fa = _fs(a, w)
    fb = _fs(b, w)
    return _fs(1.0, tau) - 0.5 * (fa + fb) - _fs(beta, rho) + max(0.0, 0.5 * (fa - b))


def _conc_numerator(n, k, w, alpha_n, beta_n, p):
    """``log2 T_CH`` with exact binomials; lengths may be real."""
    alpha_n, beta_n, p = np.broadcast_arrays(
        np.asarray(alpha_n, float), np.asarray(beta_n, float), np.asarray(p, float))
    a = n - alpha_n - beta_n
    b = n - beta_n - k
    wp = w - p
    feasible = (
        (beta_n >= -_EPS) & (p >= -_EPS) & (p <= beta_n + _EPS) & (wp >= -_EPS)
        & (wp <= a + _EPS) & (wp <= b + _EPS)
    )
    la = _lbinom(a, wp)
    lb = _lbinom(b, wp)
    lc = _lbinom(beta_n, p)
    with np.errstate(invalid="ignore"):
        num = _lbinom(n, w) - 0.5 * (la + lb) - lc + np.maximum(0.0, 0.5 * (la - b))
    return np.where(feasible & np.isfinite(num), num, np.inf)


def _conc_denominator(n: int, k: int, w: int) -> float:
    return float(_lbinom(n, w) - _lbinom(n - k, w))


# ---------------------------------------------------------------- t(delta)

def t_hybrid_prange(setting, delta: float, mode: str = "asymptotic") -> TradeoffPoint:
    """Hybrid-Prange exponent with ``alpha = (1 - delta) R``."""
    st = get_setting(setting)
    delta = _check_delta(delta)
    _check_mode(st, mode)
    if mode == "concrete":
        n, k, w = st.concrete
        alpha_n = (1.0 - delta) * k
        log_t = float(_lbinom(n, w) - 0.5 * (_lbinom(n - alpha_n, w) + _lbinom(n - k, w)))
        return TradeoffPoint(delta, log_t / _conc_denominator(n, k, w), alpha_n / n)
    R, tau = st.R, st.tau
    alpha = (1.0 - delta) * R
    if st.sublinear:
        t = 0.5 * (1.0 + math.log2(1.0 - alpha) / math.log2(1.0 - R))
    else:
        t = 1.0 - 0.5 * float(_f(1.0 - alpha, tau) - _f(1.0 - R, tau)) / st.classical_denominator
    return TradeoffPoint(delta, t, alpha)


def _minimize_1d(fun: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                 grid: int = 1001) -> tuple[float, float]:
    """Grid scan followed by bounded Brent refinement in the best cell."""
    if hi <= lo:
        return float(fun(np.array([lo]))[0]), lo
    xs = np.linspace(lo, hi, grid)
    vals = fun(xs)
    i = int(np.argmin(vals))
    best_v, best_x = float(vals[i]), float(xs[i])
    if not np.isfinite(best_v):
        return best_v, best_x
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, grid - 1)]
    res = minimize_scalar(lambda x: float(fun(np.array([x]))[0]), bounds=(a, b),
                          method="bounded", options={"xatol": 1e-13})
    if res.fun < best_v:
        best_v, best_x = float(res.fun), float(res.x)
    return best_v, best_x


def t_punctured(setting, delta: float, mode: str = "asymptotic") -> TradeoffPoint:
    """Punctured-Hybrid exponent with ``beta = (1 - delta)(1 - R)``, optimised over ``rho``."""
    st = get_setting(setting)
    delta = _check_delta(delta)
    _check_mode(st, mode)
    if mode == "concrete":
        n, k, w = st.concrete
        beta_n = (1.0 - delta) * (n - k)
        ps = np.arange(0, min(w, math.floor(beta_n + _EPS)) + 1)
        vals = _conc_numerator(n, k, w, 0.0, beta_n, ps)
        i = int(np.argmin(vals))
        return TradeoffPoint(delta, float(vals[i]) / _conc_denominator(n, k, w),
                             0.0, float(ps[i]) / n, beta_n / n)
    R, tau = st.R, st.tau
    beta = (1.0 - delta) * (1.0 - R)
    lo = max(0.0, tau - (1.0 - beta - R))
    hi = min(tau, beta)
    num, rho = _minimize_1d(lambda r: _asym_numerator(R, tau, 0.0, beta, r), lo, hi)
    return TradeoffPoint(delta, num / st.classical_denominator, 0.0, rho, beta)


def _rho_bounds(R, tau, alpha, beta):
    lo = max(0.0, tau - (1.0 - beta - R), tau - (1.0 - alpha - beta))
    hi = min(tau, beta)
    return lo, hi


def t_combined(setting, delta: float, mode: str = "asymptotic",
               grid: int = 161) -> TradeoffPoint:
    """Combined-Hybrid exponent optimised jointly over ``alpha`` and ``rho`` (or ``p``)."""
    st = get_setting(setting)
    delta = _check_delta(delta)
    _check_mode(st, mode)
    R = st.R
    alpha_max = R * (1.0 - delta)
    if mode == "concrete":
        return _t_combined_concrete(st, delta, grid)
    tau = st.tau
    den = st.classical_denominator
    if alpha_max <= 0.0:
        pt = t_punctured(st, delta)
        return TradeoffPoint(delta, pt.t, 0.0, pt.rho, pt.beta)

    def objective(alpha, rho):
        beta = combined_beta(R, delta, alpha)
        return _asym_numerator(R, tau, alpha, beta, rho)

    def scalar_objective(alpha, rho):
        if alpha >= R:
            return math.inf
        beta = (1.0 - R) * (1.0 - delta * R / (R - alpha))
        return _asym_numerator_scalar(R, tau, alpha, beta, rho)

    # coarse grid in (alpha, rho / tau); the rho range is normalised per alpha
    alphas = np.linspace(0.0, alpha_max, grid)
    betas = np.clip(combined_beta(R, delta, alphas), 0.0, None)
    lo = np.maximum.reduce([np.zeros_like(alphas), tau - (1 - betas - R), tau - (1 - alphas - betas)])
    hi = np.minimum(tau, betas)
    u = np.linspace(0.0, 1.0, grid)
    rhos = lo[:, None] + (hi - lo)[:, None] * u[None, :]
    vals = objective(alphas[:, None], rhos)
    vals = np.where(hi[:, None] >= lo[:, None], vals, np.inf)
    i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
    best = (float(vals[i, j]), float(alphas[i]), float(rhos[i, j]))

    # local refinement from the grid optimum and from the two boundary families
    starts = [(best[1], best[2])]
    ph = t_punctured(st, delta)
    starts.append((0.0, ph.rho))
    if ph.t * den < best[0]:
        best = (ph.t * den, 0.0, ph.rho)
    for a0, r0 in starts:
        res = minimize(lambda x: scalar_objective(x[0], x[1]), [a0, r0], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        if np.isfinite(res.fun) and res.fun < best[0] and 0.0 <= res.x[0] <= alpha_max:
            best = (float(res.fun), float(res.x[0]), float(res.x[1]))
    # alpha at its upper end is the hybrid-Prange family (beta = 0, rho = 0)
    hp_num = float(objective(alpha_max, 0.0))
    if hp_num < best[0]:
        best = (hp_num, alpha_max, 0.0)
    num, alpha, rho = best
    beta = float(combined_beta(R, delta, alpha))
    return TradeoffPoint(delta, num / den, alpha, rho, beta)


def _t_combined_concrete(st: CodeSetting, delta: float, grid: int) -> TradeoffPoint:
    n, k, w = st.concrete
    den = _conc_denominator(n, k, w)
    alpha_max = (k / n) * (1.0 - delta)
    ps = np.arange(0, w + 1)

    def best_p(alpha):
        beta_n = float(combined_beta(k / n, delta, alpha)) * n
        if beta_n < -_EPS:
            return np.inf, 0
        vals = _conc_numerator(n, k, w, alpha * n, max(beta_n, 0.0), ps)
        i = int(np.argmin(vals))
        return float(vals[i]), int(ps[i])

    alphas = np.linspace(0.0, alpha_max, grid)
    scan = [best_p(a) for a in alphas]
    i = int(np.argmin([s[0] for s in scan]))
    best = (scan[i][0], float(alphas[i]), scan[i][1])
    if alpha_max > 0:
        a, b = alphas[max(i - 1, 0)], alphas[min(i + 1, grid - 1)]
        res = minimize_scalar(lambda x: best_p(x)[0], bounds=(a, b), method="bounded",
                              options={"xatol": 1e-12})
        if res.fun < best[0]:
            best = (float(res.fun), float(res.x), best_p(res.x)[1])
    num, alpha, p = best
    beta = float(combined_beta(k / n, delta, alpha))
    return TradeoffPoint(delta, num / den, alpha, p / n, beta)


_T_FUNCS: dict[str, Callable[..., TradeoffPoint]] = {
    "hybrid_prange": t_hybrid_prange,
    "punctured": t_punctured,
    "combined": t_combined,
}


def normalize_algorithm(name: str) -> str:
    key = name.lower().replace("-", "_")
    aliases = {"hp": "hybrid_prange", "ph": "punctured", "punctured_hybrid": "punctured",
               "ch": "combined", "combined_hybrid": "combined"}
    key = aliases.get(key, key)
    if key not in _T_FUNCS:
        raise KeyError(f"unknown algorithm {name!r}; choose from {list(ALGORITHMS)}")
    return key


def speedup(setting, algorithm: str, delta: float, mode: str = "asymptotic") -> TradeoffPoint:
    return _T_FUNCS[normalize_algorithm(algorithm)](setting, delta, mode)


def _curve_point(args):
    setting, algorithm, delta, mode = args
    return speedup(setting, algorithm, delta, mode)


def curve(setting, algorithm: str, delta_grid: Iterable[float], mode: str = "asymptotic",
          jobs: int = 1, check_monotone: bool = True, tol: float = 1e-9) -> TradeoffCurve:
    """Evaluate ``t`` over a sorted delta grid.

    With ``check_monotone`` a ``ValueError`` is raised if ``t`` increases by
    more than ``tol`` anywhere.  Concrete curves are not checked: the integer
    ``p`` sweep makes them piecewise and they can step up slightly.
    """
    st = get_setting(setting)
    algo = normalize_algorithm(algorithm)
    grid = sorted(float(d) for d in delta_grid)
    for d in grid:
        _check_delta(d)
    tasks = [(st, algo, d, mode) for d in grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            points = list(ex.map(_curve_point, tasks))
    else:
        points = [_curve_point(t) for t in tasks]
    out = TradeoffCurve(st.name, algo, points)
    if check_monotone and mode == "asymptotic" and not out.is_monotone(tol):
        raise ValueError(f"non-monotone curve for {st.name}/{algo}")
    return out


def curves_to_csv(curves: Sequence[TradeoffCurve]) -> str:
    parts = [c.to_csv(header=(i == 0)) for i, c in enumerate(curves)]
    return "".join(parts) if parts else TradeoffCurve("", "", []).to_csv()


# ---------------------------------------------------------------- classical

def classical_exponent(setting, mode: str = "asymptotic") -> float:
    """``log2 T_C / n`` for the classical Prange algorithm.

    Linear settings use ``H(tau) - (1-R) H(tau/(1-R))``.  Sublinear settings
    use ``-tau log(1-R)`` at the setting's effective ``tau``; concrete mode
    evaluates exact binomials and divides by ``n``.
    """
    st = get_setting(setting)
    _check_mode(st, mode)
    if mode == "concrete":
        n, k, w = st.concrete
        return _conc_denominator(n, k, w) / n
    if st.tau == 0.0:
        return 0.0
    if st.sublinear:
        return -st.tau * math.log2(1.0 - st.R)
    return st.classical_denominator


# ---------------------------------------------------------------- resources

@dataclass
class ResourceFormulaReport:
    variant: str
    n: int
    k: int
    omega: int | None
    width: int
    depth_expression: str
    depth_estimate: float | None
    reduced_instances: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)


RESOURCE_VARIANTS = ("width_optimized", "depth_optimized", "depth_optimized_cyclic")


def normalize_variant(variant: str) -> str:
    key = variant.lower().replace("-", "_")
    if key not in RESOURCE_VARIANTS:
        raise KeyError(f"unknown variant {variant!r}; choose from {list(RESOURCE_VARIANTS)}")
    return key


def closed_form_width(n: int, k: int, variant: str) -> int:
    variant = normalize_variant(variant)
    if variant == "width_optimized":
        return (n - k + 2) * (k + 3) - 7
    if variant == "depth_optimized":
        return (n - k + 1) * (n + 2) - 3
    return (n - k) * (n + k + 2) - 1


def reduced_instances(n: int, k: int, omega: int, delta: float, alpha: float,
                      p: int) -> dict[str, tuple[float, float, int]]:
    """Inner-instance parameters ``(length, dimension, weight)`` of each trade-off.

    ``alpha`` here is the combined trade-off's free parameter; the
    hybrid-Prange and punctured rows use their own fixed choices.
    """
    R = k / n
    a_hp = (1.0 - delta) * R
    b_ph = (1.0 - delta) * (1.0 - R)
    b_ch = max(0.0, float(combined_beta(R, delta, alpha))) if alpha < R else 0.0
    return {
        "hybrid_prange": ((1 - a_hp) * n, (R - a_hp) * n, omega),
        "punctured": ((1 - b_ph) * n, R * n, omega - p),
        "combined": ((1 - alpha - b_ch) * n, (R - alpha) * n, omega - p),
    }


def resource_table(n: int, k: int, variant: str, omega: int | None = None,
                   delta: float | None = None, alpha: float = 0.0, p: int = 0
                   ) -> ResourceFormulaReport:
    """Closed-form qubit count and depth expression for a circuit variant.

    With ``omega`` given the symbolic depth is evaluated numerically using the
    exact Prange success probability ``q`` (see ``lee_brickell_depth_estimate``
    for the ``q_LB`` form).  With ``delta`` given, the reduced-instance map is
    attached.
    """
    variant = normalize_variant(variant)
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got n={n} k={k}")
    width = closed_form_width(n, k, variant)
    if variant == "width_optimized":
        expr = "(n^3 + (n-k)^2 log^2 k) / sqrt(q)"
    elif variant == "depth_optimized":
        expr = "n^3 log n / sqrt(q)"
    else:
        expr = "n^3 log n / sqrt(k q)"
    est = None
    if omega is not None:
        q = success_prob(n, k, omega)
        if q > 0:
            lg = math.log2(max(k, 2))
            if variant == "width_optimized":
                base = n ** 3 + (n - k) ** 2 * lg ** 2
                est = base / math.sqrt(q)
            elif variant == "depth_optimized":
                est = n ** 3 * math.log2(n) / math.sqrt(q)
            else:
                est = n ** 3 * math.log2(n) / math.sqrt(k * q)
    red = None
    if delta is not None and omega is not None:
        red = {key: list(val) for key, val in reduced_instances(n, k, omega, delta, alpha, p).items()}
    return ResourceFormulaReport(variant, n, k, omega, width, expr, est, red)


def lee_brickell_depth_estimate(n: int, k: int, omega: int, p: int) -> float:
    """``(n^3 log n + p C(k, p)) / sqrt(q_LB)``."""
    q = success_prob_lb(n, k, omega, p)
    if q <= 0:
        return math.inf
    return (n ** 3 * math.log2(n) + p * math.comb(k, p)) / math.sqrt(q)
