import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qisd.circuits import (
    amplified_success,
    build_amplification,
    build_combined,
    build_gauss,
    build_qisd,
    build_superposition,
    build_width_reduced,
    cyclic_instance,
    gauss_input_state,
    grover_iterations,
    marked_subsets,
    read_column,
    run_qisd,
    superposition_angle,
    unshift_solution,
)
from qisd.gf2core import Gf2Matrix, Gf2Vector, random_instance, solve_linear
from qisd.qsim import WidthLimitError, run


def width_full(n, k):
    return (n - k + 1) * (n + 2) - 4


def width_reduced(n, k):
    return (n - k + 2) * (k + 3) - 7


def width_lb(n, k):
    return (n - k + 1) * (n + 2) - 3


def width_cyclic(n, k):
    return (n - k) * (n + k + 2) - 1


@pytest.mark.parametrize("n, k", [(n, k) for n in range(1, 9) for k in range(0, n + 1)])
def test_superposition_uniform_over_weight_k(n, k):
    circ = build_superposition(n, k)
    state = run(circ)
    idx, amp = state.items()
    b = circ.register("b")
    want = 1 / math.sqrt(math.comb(n, k))
    assert len(idx) == math.comb(n, k)
    for i, a in zip(idx, amp):
        i = int(i)
        assert bin(i & ((1 << n) - 1)).count("1") == k
        assert i >> b.size == 0  # counter returned to zero
        assert abs(a - want) < 1e-9


def test_superposition_angle_endpoints():
    # ones == remaining forces a 1, no ones left forces a 0
    assert superposition_angle(4, 4) == pytest.approx(math.pi)
    assert superposition_angle(4, 0) == pytest.approx(0.0)
    assert math.cos(superposition_angle(5, 2) / 2) ** 2 == pytest.approx(math.comb(4, 2) / math.comb(5, 2))


@settings(max_examples=40)
@given(st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_gauss_matches_solve_linear(size, seed):
    rng = np.random.default_rng(seed)
    while True:
        a = Gf2Matrix.random(size, size, rng)
        if a.rank() == size:
            break
    t = Gf2Vector(int(rng.integers(0, 1 << size)), size)
    circ = build_gauss(size, size)
    out = run(circ, gauss_input_state(a, t))
    assert read_column(out, 0, size + 1, size, size) == solve_linear(a, t)


@pytest.mark.parametrize("n, k", [(4, 2), (5, 2), (6, 3), (7, 3)])
def test_widths_match_formulas(n, k):
    inst = random_instance(n, k, 1, n)
    assert build_combined(inst)[1].width == width_full(n, k)
    assert build_qisd(inst, "full").width == width_full(n, k) + 1
    assert build_width_reduced(inst)[1].width == width_reduced(n, k)
    assert build_qisd(inst, "lee_brickell", p=1).width == width_lb(n, k)


def _circuit_marks(bundle):
    lay = bundle.layout
    circ = bundle.prepare.copy()
    circ.extend(bundle.oracle.gates)
    idx, amp = run(circ).items()
    bmask = ((1 << lay.b.size) - 1) << lay.b.start
    smask = 1 << lay.sign.start
    marked, dirty = set(), False
    for i in idx:
        i = int(i)
        subset = tuple(j for j in range(lay.b.size) if (i >> (lay.b.start + j)) & 1)
        if i & smask:
            marked.add(subset)
        if i & ~(bmask | smask):
            dirty = True
    return marked, dirty


@pytest.mark.parametrize("variant, p", [("full", 0), ("width_reduced", 0), ("lee_brickell", 1)])
@pytest.mark.parametrize("n, k, seed", [(4, 2, 0), (5, 2, 1), (6, 3, 2)])
def test_oracle_marks_match_emulator(variant, p, n, k, seed):
    inst = random_instance(n, k, 2 if variant == "lee_brickell" else 1, seed)
    bundle = build_qisd(inst, variant, p=p)
    marked, dirty = _circuit_marks(bundle)
    want, total = marked_subsets(bundle.instance, variant, p)
    assert marked == set(want)
    assert total == math.comb(n, n - k)
    assert not dirty


def test_marked_subsets_are_prange_good_sets():
    # full variant: a subset is marked iff H_I is invertible and H_I^-1 s has weight omega
    inst = random_instance(6, 3, 1, 11)
    marked, _ = marked_subsets(inst, "full")
    for subset in itertools.combinations(range(6), 3):
        e1 = solve_linear(inst.h.project_columns(subset), inst.s)
        good = e1 is not None and e1.weight == 1
        if good:
            assert subset in marked


def test_cyclic_oracle_and_width():
    inst, synd = cyclic_instance(3, 1, seed=2)
    bundle = build_qisd(inst, "cyclic", syndromes=synd)
    marked, dirty = _circuit_marks(bundle)
    assert marked == set(marked_subsets(inst, "cyclic", syndromes=synd)[0])
    assert not dirty
    # unshifting recovers a solution of the original syndrome
    res = run_qisd(inst, "cyclic", seed=0, syndromes=synd, return_details=True)
    assert res.solved
    e = unshift_solution(res.solution, res.shift, 3)
    assert inst.is_solution(e)


def test_grover_helpers():
    assert grover_iterations(1.0) == 0
    q = 1 / 64
    m = grover_iterations(q)
    assert amplified_success(q, m) > 0.9
    assert amplified_success(q, 0) == pytest.approx(q)


@pytest.mark.parametrize("variant", ["full", "width_reduced", "lee_brickell"])
@pytest.mark.parametrize("seed", range(3))
def test_run_qisd_returns_verified_solution(variant, seed):
    inst = random_instance(5, 2, 1, seed + 20)
    p = 1 if variant == "lee_brickell" else 0
    if variant == "lee_brickell":
        inst = random_instance(5, 2, 2, seed + 20)
    res = run_qisd(inst, variant, seed=seed, p=p, return_details=True)
    if res.marked:
        assert res.solved and inst.is_solution(res.solution)
    else:
        assert res.solution is None


def test_amplification_boosts_marked_probability():
    inst = random_instance(6, 3, 1, 3)
    bundle = build_qisd(inst, "width_reduced")
    marked, total = marked_subsets(bundle.instance, "width_reduced")
    q = len(marked) / total
    m = grover_iterations(q)
    state = run(build_amplification(bundle, m))
    dist = state.register_distribution(bundle.layout.b)
    got = sum(pr for v, pr in dist.items()
              if tuple(j for j in range(6) if (v >> j) & 1) in set(marked))
    assert got == pytest.approx(amplified_success(q, m), abs=1e-9)


def test_width_limit_raised():
    inst = random_instance(8, 4, 1, 0)
    with pytest.raises(WidthLimitError):
        build_qisd(inst, "full", max_width=20)
