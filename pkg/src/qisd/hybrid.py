"""Classical-quantum trade-offs: hybrid Prange, punctured hybrid and their combination.

Each trade-off shrinks the instance classically and hands the smaller
instance to an inner solver.  The inner solver either simulates the
width-reduced quantum circuit (``simulate``) or enumerates the reduced
solution set directly and charges the Grover cost the circuit would have
spent (``oracle``).  Outer loops count iterations so the measured means can
be compared with the exact success probabilities of each guess.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .classical_isd import brute_force, success_prob
from .estimator import closed_form_width
from .gf2core import (
    Gf2Vector,
    Permutation,
    RankError,
    SdpInstance,
    solve_linear,
    systematic_form,
)

INNER_MODES = ("oracle", "simulate")


class HybridParameterError(ValueError):
    """Trade-off parameters that leave no feasible reduced instance."""


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _round(x: float) -> int:
    # round half up, so 2.5 -> 3 independent of banker's rounding
    return int(math.floor(x + 0.5 + 1e-12))


@dataclass
class InnerSolver:
    """Solver for the reduced instances.

    ``oracle`` returns a uniformly random element of the reduced solution
    set and charges ``sqrt(1/q)`` circuit applications, ``q`` being the
    fraction of good subsets.  ``simulate`` runs the width-reduced circuit
    on the statevector simulator.
    """

    mode: str = "oracle"
    brute_force_limit: int = 2_000_000
    max_width: int | None = 40
    backend: str = "sparse"
    cost: float = 0.0

    def __post_init__(self):
        if self.mode not in INNER_MODES:
            raise ValueError(f"unknown inner mode {self.mode!r}; choose from {list(INNER_MODES)}")
        self._cache: dict[str, list[Gf2Vector]] = {}

    def solutions(self, instance: SdpInstance) -> list[Gf2Vector]:
        key = instance.to_text()
        if key not in self._cache:
            if len(self._cache) > 4096:
                self._cache.clear()
            self._cache[key] = brute_force(instance, self.brute_force_limit)
        return self._cache[key]

    def charge(self, instance: SdpInstance, nsol: int) -> float:
        n, k, w = instance.n, instance.k, instance.omega
        q = min(1.0, max(1, nsol) * success_prob(n, k, w)) if w <= n - k else 0.0
        return math.sqrt(1.0 / q) if q > 0 else 1.0

    def solve(self, instance: SdpInstance, rng: np.random.Generator) -> Gf2Vector | None:
        if instance.k == 0 and self.mode == "simulate":
            # square system: no search left, one linear solve
            self.cost += 1.0
            e = solve_linear(instance.h, instance.s)
            return e if instance.is_solution(e) else None
        if self.mode == "oracle":
            sols = self.solutions(instance)
            self.cost += self.charge(instance, len(sols))
            if not sols:
                return None
            return sols[int(rng.integers(len(sols)))]
        from .circuits import run_qisd

        if instance.omega > instance.n - instance.k or instance.h.rank() < instance.h.nrows:
            self.cost += 1.0
            return None
        run = run_qisd(instance, "width_reduced", seed=rng, backend=self.backend,
                       max_width=self.max_width, max_attempts=1, return_details=True)
        self.cost += max(1, 2 * run.iterations + 1)
        return run.solution


@dataclass
class HybridStats:
    algorithm: str
    n: int
    k: int
    omega: int
    delta: float
    alpha: float
    beta: float
    p: int
    outer_iterations: int = 0
    inner_calls: int = 0
    solved: bool = False
    solution: Gf2Vector | None = None
    attempts: int = 1
    inner_cost: float = 0.0
    inner_dims: tuple[int, int, int] = (0, 0, 0)
    inner_width: int = 0
    calls_per_iteration: int = 1
    trace: list[int] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "n": self.n,
            "k": self.k,
            "omega": self.omega,
            "delta": self.delta,
            "alpha": self.alpha,
            "beta": self.beta,
            "p": self.p,
            "outer_iterations": self.outer_iterations,
            "inner_calls": self.inner_calls,
            "solved": self.solved,
            "solution": self.solution.to_hex() if self.solution is not None else None,
            "attempts": self.attempts,
            "inner_cost": self.inner_cost,
            "inner_dims": list(self.inner_dims),
            "inner_width": self.inner_width,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def inner_width(n: int, k: int) -> int:
    """Width of the width-reduced circuit on an ``(n, k)`` instance."""
    if k <= 0:
        return 0
    return closed_form_width(n, k, "width_optimized")


# parameter resolution -------------------------------------------------------

def _check_delta(delta: float) -> None:
    if not 0.0 <= delta <= 1.0:
        raise HybridParameterError(f"delta must lie in [0, 1], got {delta}")


def hybrid_prange_shortening(n: int, k: int, delta: float) -> int:
    """Number ``alpha*n`` of coordinates guessed to be zero."""
    _check_delta(delta)
    return min(k, max(0, _round((1.0 - delta) * k)))


def punctured_rows(n: int, k: int, delta: float, beta_override: float | None = None) -> int:
    """Number ``beta*n`` of parity checks dropped, clamped to keep one row."""
    _check_delta(delta)
    beta = (1.0 - delta) * (1.0 - k / n) if beta_override is None else beta_override
    if beta < 0:
        raise HybridParameterError(f"beta must be non-negative, got {beta}")
    return min(n - k - 1, max(0, _round(beta * n)))


def combined_parameters(n: int, k: int, delta: float, alpha: float) -> tuple[int, int, float]:
    """``(alpha*n, beta*n, beta)`` for the combined trade-off."""
    _check_delta(delta)
    R = k / n
    if not 0.0 <= alpha <= R:
        raise HybridParameterError(f"alpha must lie in [0, k/n], got {alpha}")
    if alpha >= R:
        if delta > 0:
            raise HybridParameterError("alpha = k/n leaves no dimension for delta > 0")
        beta = 1.0 - R
    else:
        beta = (1.0 - R) * (1.0 - delta * R / (R - alpha))
    if beta < -1e-12:
        raise HybridParameterError(f"beta = {beta:.4f} < 0 for alpha={alpha}, delta={delta}")
    a = min(k, max(0, _round(alpha * n)))
    b = min(n - k - 1, max(0, _round(max(0.0, beta) * n)))
    return a, b, max(0.0, beta)


def inner_dimensions(algorithm: str, n: int, k: int, omega: int, a: int = 0, b: int = 0,
                     p: int = 0) -> tuple[int, int, int]:
    """``(length, dimension, weight)`` of the reduced instance."""
    if algorithm == "hybrid_prange":
        return n - a, k - a, omega
    if algorithm == "punctured":
        return n - b, k, omega - p
    if algorithm == "combined":
        return n - a - b, k - a, omega - p
    raise ValueError(f"unknown algorithm {algorithm!r}")


def success_probability(algorithm: str, n: int, k: int, omega: int, a: int = 0, b: int = 0,
                        p: int = 0) -> float:
    """Exact probability that one random permutation makes the guess right."""
    total = math.comb(n, omega)
    if algorithm == "hybrid_prange":
        return math.comb(n - a, omega) / total
    if algorithm == "punctured":
        return math.comb(n - b, omega - p) * math.comb(b, p) / total
    if algorithm == "combined":
        return math.comb(n - a, omega) / total
    raise ValueError(f"unknown algorithm {algorithm!r}")


def expected_solutions(n: int, k: int, omega: int, b: int, p: int) -> float:
    """Expected number ``S`` of solutions of the punctured instance."""
    return math.comb(n - b, omega - p) * 2.0 ** -((n - b) - k)


def calls_per_permutation(S: float) -> int:
    """Coupon-collector repetition count ``ceil(2 ln(max(2, S)) S)``, at least one."""
    return max(1, math.ceil(2.0 * math.log(max(2.0, S)) * S))


def abort_bound(n: int, omega: int, a: int, b: int, p: int) -> int:
    """Outer iterations ``E`` of one combined attempt."""
    num = math.comb(n - a, omega)
    den = math.comb(n - a - b, omega - p) * math.comb(b, p)
    if den == 0:
        raise HybridParameterError("p is incompatible with the punctured dimensions")
    return max(1, -(-num // den))


# reductions -----------------------------------------------------------------

def shorten(instance: SdpInstance, perm: Permutation, a: int) -> tuple[SdpInstance, list[int]]:
    """Guess the last ``a`` permuted coordinates zero and drop their columns."""
    keep = list(perm.images[: instance.n - a])
    h = instance.h.project_columns(keep)
    return SdpInstance(h, instance.s, instance.omega), keep


def lift(e1: Gf2Vector, keep: list[int], n: int) -> Gf2Vector:
    return Gf2Vector(sum(1 << keep[j] for j in e1.support), n)


@dataclass
class PuncturedReduction:
    """One permutation's split of ``H P`` into the kept and dropped rows.

    ``reduced`` is ``(I | H1')`` over the first ``r-b`` rows with the
    dropped identity columns removed.  ``columns`` maps reduced positions
    to original coordinates, ``dropped`` lists the ``b`` coordinates whose
    values are recomputed from the bottom rows.
    """

    reduced: SdpInstance
    columns: list[int]
    dropped: list[int]
    bottom_rows: tuple[int, ...]
    bottom_s: int

    def reconstruct(self, e1: Gf2Vector, n: int) -> tuple[Gf2Vector, int]:
        """Full error vector and the weight of the recomputed part."""
        r_top = self.reduced.h.nrows
        # the bottom rows act on the H1' part of e1, i.e. reduced positions >= r_top
        tail = e1.value >> r_top
        e2 = 0
        for i, row in enumerate(self.bottom_rows):
            e2 |= (((row & tail).bit_count() + (self.bottom_s >> i)) & 1) << i
        value = 0
        for j in e1.support:
            value |= 1 << self.columns[j]
        for i in range(len(self.dropped)):
            if (e2 >> i) & 1:
                value |= 1 << self.dropped[i]
        return Gf2Vector(value, n), e2.bit_count()


def puncture(instance: SdpInstance, perm: Permutation, b: int, p: int) -> PuncturedReduction:
    """Systematic form of ``H P`` with the last ``b`` checks dropped."""
    n, r = instance.n, instance.h.nrows
    sys_h, sys_s, perm2 = systematic_form(instance.h.permute_columns(perm), instance.s)
    full = perm.compose(perm2)
    top = r - b
    keep_cols = list(range(top)) + list(range(r, n))
    h1 = sys_h.project_rows(range(top)).project_columns(keep_cols)
    s1 = Gf2Vector(sys_s.value & ((1 << top) - 1), top)
    reduced = SdpInstance(h1, s1, instance.omega - p)
    k = n - r
    bottom = tuple((sys_h.rows[i] >> r) & ((1 << k) - 1) for i in range(top, r))
    return PuncturedReduction(
        reduced,
        [full.images[c] for c in keep_cols],
        [full.images[c] for c in range(top, r)],
        bottom,
        sys_s.value >> top,
    )


# algorithms -----------------------------------------------------------------

def hybrid_prange(instance: SdpInstance, delta: float, inner: InnerSolver | None = None,
                  seed=None, max_outer: int = 100_000) -> HybridStats:
    """Guess ``alpha n`` zero coordinates, solve the shortened code quantumly."""
    inner = inner or InnerSolver()
    rng = _rng(seed)
    n, k, w = instance.n, instance.k, instance.omega
    a = hybrid_prange_shortening(n, k, delta)
    if w > n - a:
        raise HybridParameterError("shortened length below the error weight")
    dims = inner_dimensions("hybrid_prange", n, k, w, a=a)
    stats = HybridStats("hybrid_prange", n, k, w, delta, a / n, 0.0, 0, inner_dims=dims,
                        inner_width=inner_width(dims[0], dims[1]))
    cost0 = inner.cost
    for it in range(1, max_outer + 1):
        stats.outer_iterations = it
        perm = Permutation.identity(n) if a == 0 else Permutation.random(n, rng)
        short, keep = shorten(instance, perm, a)
        stats.inner_calls += 1
        e1 = inner.solve(short, rng)
        if e1 is not None:
            e = lift(e1, keep, n)
            if instance.is_solution(e):
                stats.solved, stats.solution = True, e
                break
        if a == 0 and inner.mode == "oracle":
            # nothing left to re-randomise
            break
    stats.inner_cost = inner.cost - cost0
    return stats


def _punctured_loop(instance: SdpInstance, b: int, p: int, inner: InnerSolver,
                    rng: np.random.Generator, max_outer: int, calls: int | None,
                    stats: HybridStats) -> Gf2Vector | None:
    n = instance.n
    S = expected_solutions(n, instance.k, instance.omega, b, p)
    per = calls if calls is not None else calls_per_permutation(S)
    stats.calls_per_iteration = per
    for _ in range(max_outer):
        stats.outer_iterations += 1
        perm = Permutation.random(n, rng)
        try:
            red = puncture(instance, perm, b, p)
        except RankError:
            continue
        for _ in range(per):
            stats.inner_calls += 1
            e1 = inner.solve(red.reduced, rng)
            if e1 is None:
                # an empty reduced solution set gives nothing on repeat calls
                if inner.mode == "oracle":
                    break
                continue
            e, wt2 = red.reconstruct(e1, n)
            if wt2 <= p and instance.is_solution(e):
                return e
    return None


def punctured_hybrid(instance: SdpInstance, delta: float, p: int, seed=None,
                     beta_override: float | None = None, inner: InnerSolver | None = None,
                     max_outer: int = 100_000, calls: int | None = None,
                     puncture_rows: int | None = None) -> HybridStats:
    """Drop ``beta n`` parity checks, solve the punctured code, recompute the rest.

    ``calls`` overrides the per-permutation inner call count and
    ``puncture_rows`` the rounded ``beta n``.
    """
    inner = inner or InnerSolver()
    rng = _rng(seed)
    n, k, w = instance.n, instance.k, instance.omega
    b = punctured_rows(n, k, delta, beta_override) if puncture_rows is None else puncture_rows
    if not 0 <= p <= min(w, b):
        raise HybridParameterError(f"need 0 <= p <= min(omega, beta n) = {min(w, b)}, got {p}")
    if w - p > n - k - b:
        raise HybridParameterError("punctured code cannot carry weight omega - p")
    dims = inner_dimensions("punctured", n, k, w, b=b, p=p)
    stats = HybridStats("punctured", n, k, w, delta, 0.0, b / n, p, inner_dims=dims,
                        inner_width=inner_width(dims[0], dims[1]))
    cost0 = inner.cost
    e = _punctured_loop(instance, b, p, inner, rng, max_outer, calls, stats)
    stats.solved, stats.solution = e is not None, e
    stats.inner_cost = inner.cost - cost0
    return stats


def combined_hybrid(instance: SdpInstance, delta: float, alpha: float, p: int, seed=None,
                    inner: InnerSolver | None = None, max_attempts: int = 10_000,
                    calls: int | None = None) -> HybridStats:
    """Guess ``alpha n`` zeros, run the punctured hybrid for at most ``E`` iterations, repeat.

    Aborted attempts contribute all ``E`` of their outer iterations.
    """
    inner = inner or InnerSolver()
    rng = _rng(seed)
    n, k, w = instance.n, instance.k, instance.omega
    a, b, beta = combined_parameters(n, k, delta, alpha)
    if p > min(w, b):
        raise HybridParameterError(f"p = {p} exceeds min(omega, beta n) = {min(w, b)}")
    if w - p > (n - a - b) - (k - a):
        raise HybridParameterError("combined reduced code cannot carry weight omega - p")
    E = abort_bound(n, w, a, b, p)
    dims = inner_dimensions("combined", n, k, w, a=a, b=b, p=p)
    stats = HybridStats("combined", n, k, w, delta, a / n, beta, p, inner_dims=dims,
                        inner_width=inner_width(dims[0], dims[1]), attempts=0)
    cost0 = inner.cost
    for _ in range(max_attempts):
        stats.attempts += 1
        if a == 0:
            short, keep = instance, list(range(n))
        else:
            perm = Permutation.random(n, rng)
            short, keep = shorten(instance, perm, a)
        if short.h.rank() < short.h.nrows:
            stats.outer_iterations += E
            continue
        before = stats.outer_iterations
        e1 = _punctured_loop(short, b, p, inner, rng, E, calls, stats)
        if e1 is not None:
            e = lift(e1, keep, n)
            if instance.is_solution(e):
                stats.solved, stats.solution = True, e
                break
        # aborted: charge the full budget
        stats.outer_iterations = before + E
    stats.inner_cost = inner.cost - cost0
    return stats


def combined_prediction(n: int, k: int, omega: int, a: int, b: int, p: int) -> float:
    """Predicted inner calls ``q_C^-1 E S`` of the combined trade-off."""
    qc = success_probability("combined", n, k, omega, a=a)
    E = abort_bound(n, omega, a, b, p)
    S = expected_solutions(n - a, k - a, omega, b, p)
    return E * max(1.0, S) / qc
