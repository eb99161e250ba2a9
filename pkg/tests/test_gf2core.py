import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qisd.gf2core import (
    DimensionError,
    Gf2Matrix,
    Gf2Vector,
    InstanceFormatError,
    Permutation,
    RankError,
    SdpInstance,
    binom_log2,
    matvec,
    random_instance,
    solve_linear,
    systematic_form,
)


@st.composite
def matrices(draw, max_rows=6, max_cols=9):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    rows = draw(st.lists(st.integers(0, (1 << c) - 1), min_size=r, max_size=r))
    return Gf2Matrix(tuple(rows), c)


def _dense_rank(a: np.ndarray) -> int:
    a = a.copy() % 2
    r = 0
    for c in range(a.shape[1]):
        piv = [i for i in range(r, a.shape[0]) if a[i, c]]
        if not piv:
            continue
        a[[r, piv[0]]] = a[[piv[0], r]]
        for i in range(a.shape[0]):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
    return r


def test_vector_string_and_hex():
    v = Gf2Vector.from_str("1011")
    assert v.bits == (1, 0, 1, 1)
    assert v.support == (0, 2, 3)
    assert v.weight == 3
    assert v.to_str() == "1011"
    assert v.to_hex() == "b"
    assert Gf2Vector.from_support([0, 2, 3], 4) == v


def test_vector_errors():
    with pytest.raises(DimensionError):
        Gf2Vector.zeros(3) ^ Gf2Vector.zeros(4)
    with pytest.raises(ValueError):
        Gf2Vector.from_str("102")
    with pytest.raises(ValueError):
        Gf2Vector(8, 3)


@given(st.integers(1, 40).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (1 << n) - 1),
                                                      st.integers(0, (1 << n) - 1))))
def test_xor_group_laws(args):
    n, a, b = args
    u, v = Gf2Vector(a, n), Gf2Vector(b, n)
    assert (u ^ v) ^ v == u
    assert (u ^ u).weight == 0
    assert (u ^ v).weight == u.weight + v.weight - 2 * Gf2Vector(a & b, n).weight
    assert Gf2Vector.from_str(u.to_str()) == u


@given(matrices())
def test_rank_matches_dense_elimination(m):
    assert m.rank() == _dense_rank(m.to_array())
    assert Gf2Matrix.from_array(m.to_array()) == m
    assert Gf2Matrix.from_strings(m.to_strings()) == m


@given(matrices(), st.data())
def test_matvec_matches_numpy(m, data):
    v = Gf2Vector(data.draw(st.integers(0, (1 << m.ncols) - 1)), m.ncols)
    expect = (m.to_array() @ np.array(v.bits)) % 2
    assert matvec(m, v).bits == tuple(int(x) for x in expect)


@given(st.integers(1, 12), st.integers(0, 2 ** 32 - 1))
def test_permutation_inverse_and_apply(n, seed):
    rng = np.random.default_rng(seed)
    p = Permutation.random(n, rng)
    q = Permutation.random(n, rng)
    v = Gf2Vector(int(rng.integers(0, 1 << n)), n)
    assert p.apply_inverse(p.apply(v)) == v
    assert p.compose(p.inverse()) == Permutation.identity(n)
    assert p.compose(q).apply(v) == p.apply(q.apply(v))


@given(matrices(max_rows=5, max_cols=8), st.data())
def test_permuted_product_identity(m, data):
    seed = data.draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    p = Permutation.random(m.ncols, rng)
    v = Gf2Vector(int(rng.integers(0, 1 << m.ncols)), m.ncols)
    assert matvec(m.permute_columns(p), v) == matvec(m, p.apply(v))


@given(st.integers(1, 6), st.integers(0, 4), st.integers(0, 2 ** 32 - 1))
def test_systematic_form_preserves_solutions(r, extra, seed):
    rng = np.random.default_rng(seed)
    n = r + extra
    m = Gf2Matrix.random(r, n, rng)
    s = Gf2Vector(int(rng.integers(0, 1 << r)), r)
    if m.rank() < r:
        with pytest.raises(RankError):
            systematic_form(m, s)
        return
    ms, ss, perm = systematic_form(m, s)
    assert ms.project_columns(range(r)) == Gf2Matrix.identity(r)
    # every e' solving the systematic system maps back to a solution
    for value in range(1 << n) if n <= 8 else []:
        e = Gf2Vector(value, n)
        assert (matvec(ms, e) == ss) == (matvec(m, perm.apply(e)) == s)


def test_systematic_form_keeps_identity_when_prefix_independent():
    m = Gf2Matrix.from_strings(["1101", "0110"])
    _, _, perm = systematic_form(m, Gf2Vector.from_str("10"))
    assert perm == Permutation.identity(4)


@given(st.integers(1, 7), st.integers(0, 2 ** 32 - 1))
def test_solve_linear(n, seed):
    rng = np.random.default_rng(seed)
    a = Gf2Matrix.random(n, n, rng)
    t = Gf2Vector(int(rng.integers(0, 1 << n)), n)
    x = solve_linear(a, t)
    if a.rank() < n:
        assert x is None
    else:
        assert matvec(a, x) == t


def test_solve_linear_rejects_nonsquare():
    with pytest.raises(DimensionError):
        solve_linear(Gf2Matrix.zeros(2, 3), Gf2Vector.zeros(2))


@given(st.integers(2, 14).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n - 1),
                                                       st.integers(1, n), st.integers(0, 1000))))
def test_instance_roundtrip(args):
    n, k, w, seed = args
    inst = random_instance(n, k, w, seed)
    assert inst.is_solution(inst.planted)
    assert SdpInstance.from_text(inst.to_text()) == inst
    assert inst.h.rank() == n - k


def test_instance_same_seed_same_text():
    assert random_instance(10, 5, 2, 9).to_text() == random_instance(10, 5, 2, 9).to_text()


@pytest.mark.parametrize("text, where", [
    ("", "empty"),
    ("4 2\n", "line 1"),
    ("4 2 1\n1111\n1010\n11\n", None),
    ("4 2 1\n111\n1010\n11\n", "line 2"),
    ("4 2 1\n1111\n1010\n1x\n", "line 4"),
    ("4 2 1\n1111\n1010\n11\n0001\n", None),
])
def test_parser_diagnostics(text, where):
    if where is None:
        try:
            SdpInstance.from_text(text)
        except InstanceFormatError as exc:
            # a planted vector that is not a solution is also a format error
            assert "planted" in str(exc)
        return
    with pytest.raises(InstanceFormatError, match=where):
        SdpInstance.from_text(text)


@pytest.mark.parametrize("n, k", [(10, 3), (100, 50), (6688, 128)])
def test_binom_log2(n, k):
    assert binom_log2(n, k) == pytest.approx(math.log2(math.comb(n, k)), rel=1e-12)
    assert binom_log2(30000, 100) == pytest.approx(
        (math.lgamma(30001) - math.lgamma(101) - math.lgamma(29901)) / math.log(2))
