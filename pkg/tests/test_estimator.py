import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qisd.estimator import (
    PRESETS,
    CodeSetting,
    classical_exponent,
    closed_form_width,
    curve,
    curves_to_csv,
    entropy,
    entropy_inv,
    get_setting,
    normalize_algorithm,
    reduced_instances,
    resource_table,
    t_combined,
    t_hybrid_prange,
    t_punctured,
)


def lg(n, k):
    return math.log2(math.comb(n, k))


@given(st.floats(0.0, 1.0))
def test_entropy_inverse_roundtrip(y):
    x = entropy_inv(y)
    assert 0.0 <= x <= 0.5
    assert entropy(x) == pytest.approx(y, abs=1e-12)


def test_entropy_values():
    assert entropy(0.5) == 1.0
    assert entropy(0.0) == entropy(1.0) == 0.0
    assert entropy(0.11) == pytest.approx(0.4999, abs=1e-3)
    with pytest.raises(ValueError):
        entropy(1.5)


def test_presets():
    assert get_setting("McEliece") is PRESETS["mceliece"]
    assert get_setting("full-distance").tau == pytest.approx(0.110028, abs=1e-6)
    with pytest.raises(KeyError):
        get_setting("nope")
    assert normalize_algorithm("ph") == "punctured"


def test_classical_exponent_independent():
    # Prange at full distance: H(tau) - (1-R) H(tau/(1-R))
    tau = entropy_inv(0.5)
    want = entropy(tau) - 0.5 * entropy(2 * tau)
    assert classical_exponent("fulldistance") == pytest.approx(want, rel=1e-12)
    n, k, w = PRESETS["mceliece"].concrete
    assert classical_exponent("mceliece", "concrete") == pytest.approx(
        (lg(n, w) - lg(n - k, w)) / n, rel=1e-9)


SMALL = CodeSetting("small", 0.5, 0.06, False, (200, 100, 12))


@pytest.mark.parametrize("delta", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_concrete_hybrid_prange_against_binomials(delta):
    n, k, w = SMALL.concrete
    a = (1 - delta) * k
    if not float(a).is_integer():
        pytest.skip("needs integral alpha n")
    a = int(a)
    # q_C^-1 * sqrt(inner Prange time)
    log_t = lg(n, w) - lg(n - a, w) + 0.5 * (lg(n - a, w) - lg(n - k, w))
    want = log_t / (lg(n, w) - lg(n - k, w))
    assert t_hybrid_prange(SMALL, delta, "concrete").t == pytest.approx(want, rel=1e-9)


@pytest.mark.parametrize("delta", [0.2, 0.5, 0.8])
def test_concrete_punctured_against_binomials(delta):
    n, k, w = SMALL.concrete
    b = (1 - delta) * (n - k)
    b = int(round(b))
    best = math.inf
    for p in range(0, min(w, b) + 1):
        a = n - b
        if w - p > a - k:
            continue
        qc = math.comb(a, w - p) * math.comb(b, p) / math.comb(n, w)
        S = math.comb(a, w - p) / 2 ** (a - k)
        inner = math.comb(a, w - p) / math.comb(a - k, w - p)
        T = math.sqrt(max(1.0, S) * inner) / qc
        best = min(best, math.log2(T))
    want = best / (lg(n, w) - lg(n - k, w))
    assert t_punctured(SMALL, delta, "concrete").t == pytest.approx(want, rel=1e-9)


@pytest.mark.parametrize("name", ["fulldistance", "halfdistance", "mceliece", "bike"])
def test_endpoints(name):
    for fn in (t_hybrid_prange, t_punctured, t_combined):
        assert fn(name, 0.0).t == pytest.approx(1.0, abs=1e-6)
        assert fn(name, 1.0).t == pytest.approx(0.5, abs=1e-6)


@settings(max_examples=15)
@given(st.floats(0.2, 0.9), st.floats(0.05, 0.95), st.floats(0.0, 1.0))
def test_dominance_random_settings(R, frac, delta):
    tau = frac * entropy_inv(1 - R)
    stg = CodeSetting("rnd", R, tau)
    hp = t_hybrid_prange(stg, delta).t
    ph = t_punctured(stg, delta).t
    ch = t_combined(stg, delta, grid=61).t
    assert 0.5 - 1e-9 <= ph <= hp + 1e-9
    assert ch <= min(hp, ph) + 1e-6
    assert hp <= 1.0 + 1e-9


def test_curve_csv_and_monotone():
    c = curve("halfdistance", "ph", np.linspace(0, 1, 21))
    assert c.is_monotone()
    text = curves_to_csv([c])
    lines = text.strip().splitlines()
    assert lines[0] == "delta,t,alpha,rho,algorithm,setting"
    assert len(lines) == 22
    assert lines[1].startswith("0.000000,1.000000")


def test_curve_parallel_matches_serial():
    grid = np.linspace(0, 1, 6)
    a = curve("mceliece", "combined", grid, jobs=1)
    b = curve("mceliece", "combined", grid, jobs=2)
    assert a.to_csv() == b.to_csv()


def test_sublinear_hp_closed_form():
    # sublinear hybrid-Prange: t = (1 + log(1-alpha)/log(1-R)) / 2
    R, d = 0.8, 0.3
    alpha = (1 - d) * R
    want = 0.5 * (1 + math.log(1 - alpha) / math.log(1 - R))
    assert t_hybrid_prange("mceliece", d).t == pytest.approx(want)


def test_mceliece_concrete_close_to_asymptotic():
    for d in (0.2, 0.5, 0.8):
        a = t_punctured("mceliece", d).t
        c = t_punctured("mceliece", d, "concrete").t
        assert abs(a - c) < 0.02


@pytest.mark.parametrize("n, k", [(4, 2), (5, 2), (6, 3), (10, 4)])
def test_closed_form_widths(n, k):
    assert closed_form_width(n, k, "width-optimized") == (n - k + 2) * (k + 3) - 7
    assert closed_form_width(n, k, "depth_optimized") == (n - k + 1) * (n + 2) - 3
    assert closed_form_width(n, k, "depth_optimized_cyclic") == (n - k) * (n + k + 2) - 1


def test_resource_table_and_reduced_instances():
    rep = resource_table(20, 10, "depth_optimized", omega=2, delta=0.5)
    assert rep.width == 11 * 22 - 3
    assert rep.depth_estimate > 0
    red = reduced_instances(20, 10, 2, 0.5, 0.0, 1)
    assert red["hybrid_prange"] == pytest.approx((15, 5, 2))
    assert red["punctured"] == pytest.approx((15, 10, 1))
    with pytest.raises(KeyError):
        resource_table(4, 2, "nope")


def test_width_budget_matches_reduction_factor():
    # hybrid-Prange inner circuit holds (n-k) x (R-alpha) n matrix bits = delta (1-R) R n^2
    n, k = 400, 200
    for d in (0.1, 0.5, 0.9):
        a = (1 - d) * k
        kin = k - a
        assert (n - k) * kin == pytest.approx(d * (1 - k / n) * (k / n) * n * n)
