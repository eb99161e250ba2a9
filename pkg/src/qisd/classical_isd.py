"""Classical information-set decoding: Prange, Lee-Brickell and brute force."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .gf2core import (
    Gf2Vector,
    Permutation,
    SdpInstance,
    solve_linear,
    systematic_form,
)

BRUTE_FORCE_LIMIT = 10_000_000


@dataclass
class SolveStats:
    iterations: int
    solved: bool
    solution: Gf2Vector | None = None
    singular: int = 0

    @property
    def singular_fraction(self) -> float:
        return self.singular / self.iterations if self.iterations else 0.0

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "solved": self.solved,
            "solution": self.solution.to_str() if self.solution is not None else None,
            "singular": self.singular,
            "singular_fraction": self.singular_fraction,
        }


def _log_comb(n: int, k: int) -> float:
    if k < 0 or k > n:
        return -math.inf
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def success_prob(n: int, k: int, omega: int) -> float:
    """Probability that a random size-``(n-k)`` subset carries the whole error weight."""
    return success_prob_lb(n, k, omega, 0)


def success_prob_lb(n: int, k: int, omega: int, p: int) -> float:
    """``C(n-k, omega-p) C(k, p) / C(n, omega)``; zero when infeasible."""
    if not (0 <= k <= n and 0 <= omega <= n and 0 <= p <= omega):
        return 0.0
    if omega - p > n - k or p > k:
        return 0.0
    if n <= 2000:
        return math.comb(n - k, omega - p) * math.comb(k, p) / math.comb(n, omega)
    return math.exp(_log_comb(n - k, omega - p) + _log_comb(k, p) - _log_comb(n, omega))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def prange(instance: SdpInstance, seed=None, max_iters: int = 100_000) -> SolveStats:
    """Repeatedly pick a random column subset of size ``n-k`` and solve ``H_I e1 = s``."""
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    rng = _rng(seed)
    h, s, n, r = instance.h, instance.s, instance.n, instance.h.nrows
    singular = 0
    for it in range(1, max_iters + 1):
        perm = Permutation.random(n, rng)
        idx = perm.images[:r]
        e1 = solve_linear(h.project_columns(idx), s)
        if e1 is None:
            singular += 1
            continue
        if e1.weight == instance.omega:
            e = Gf2Vector(sum(1 << idx[j] for j in e1.support), n)
            if instance.is_solution(e):
                return SolveStats(it, True, e, singular)
    return SolveStats(max_iters, False, None, singular)


def lee_brickell(instance: SdpInstance, p: int, seed=None, max_iters: int = 100_000) -> SolveStats:
    """Prange with ``p`` error positions allowed outside the information set.

    Each iteration brings ``H P`` into systematic form ``(I | H2)`` and checks
    every weight-``p`` combination of ``H2`` columns in lexicographic order.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    if not 0 <= p <= min(instance.omega, instance.k):
        raise ValueError(f"need 0 <= p <= min(omega, k), got p={p}")
    rng = _rng(seed)
    h, s, n, r, k = instance.h, instance.s, instance.n, instance.h.nrows, instance.k
    target = instance.omega - p
    singular = 0
    for it in range(1, max_iters + 1):
        perm = Permutation.random(n, rng)
        hp = h.permute_columns(perm)
        if hp.project_columns(range(r)).rank() < r:
            singular += 1
            continue
        sys_h, qs, perm2 = systematic_form(hp, s)
        # perm2 is the identity when the first r columns are independent
        h2cols = sys_h.columns[r:]
        for combo in itertools.combinations(range(k), p):
            acc = qs.value
            for c in combo:
                acc ^= h2cols[c]
            if bin(acc).count("1") != target:
                continue
            value = acc | sum(1 << (r + c) for c in combo)
            e = perm.compose(perm2).apply(Gf2Vector(value, n))
            if instance.is_solution(e):
                return SolveStats(it, True, e, singular)
    return SolveStats(max_iters, False, None, singular)


def brute_force(instance: SdpInstance, limit: int = BRUTE_FORCE_LIMIT) -> list[Gf2Vector]:
    """All weight-``omega`` solutions, sorted by integer value."""
    n, w = instance.n, instance.omega
    if math.comb(n, w) > limit:
        raise ValueError(f"C({n},{w}) exceeds brute-force limit {limit}")
    cols = instance.h.columns
    target = instance.s.value
    out = []
    for combo in itertools.combinations(range(n), w):
        acc = 0
        for c in combo:
            acc ^= cols[c]
        if acc == target:
            out.append(Gf2Vector(sum(1 << c for c in combo), n))
    out.sort(key=lambda v: v.value)
    return out


def planted_unique_instance(n: int, k: int, omega: int, seed: int, max_tries: int = 1000
                            ) -> SdpInstance:
    """Random planted instance whose planted error is the only weight-``omega`` solution."""
    from .gf2core import random_instance

    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        inst = random_instance(n, k, omega, int(rng.integers(2 ** 63)))
        if len(brute_force(inst)) == 1:
            return inst
    raise RuntimeError("no unique-solution instance found")
