import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qisd.qsim import (
    Circuit,
    Gate,
    WidthLimitError,
    gate_cost,
    mcx_cost,
    resources,
    run,
    sample,
    zero_state,
)


def _unitary(gate: Gate, width: int) -> np.ndarray:
    """Reference matrix of a gate built index by index (bit q of an index is qubit q)."""
    dim = 1 << width
    u = np.zeros((dim, dim))
    for col in range(dim):
        active = all(((col >> q) & 1) == int(p) for q, p in gate.controls)
        if not active:
            u[col, col] = 1.0
            continue
        if gate.kind in ("X", "MCX"):
            u[col ^ (1 << gate.targets[0]), col] = 1.0
        elif gate.kind == "SWAP":
            a, b = gate.targets
            ba, bb = (col >> a) & 1, (col >> b) & 1
            row = col & ~(1 << a) & ~(1 << b) | (bb << a) | (ba << b)
            u[row, col] = 1.0
        else:
            t = gate.targets[0]
            c, s = math.cos(gate.theta / 2), math.sin(gate.theta / 2)
            if (col >> t) & 1:
                u[col ^ (1 << t), col] += -s
                u[col, col] += c
            else:
                u[col, col] += c
                u[col | (1 << t), col] += s
    return u


@st.composite
def circuits(draw, max_width=5, max_gates=14):
    w = draw(st.integers(2, max_width))
    circ = Circuit()
    circ.add_register("q", w)
    for _ in range(draw(st.integers(1, max_gates))):
        kind = draw(st.sampled_from(["X", "SWAP", "RY", "MCX", "MCRY"]))
        qs = draw(st.permutations(range(w)))
        theta = draw(st.floats(-math.pi, math.pi, allow_nan=False))
        if kind == "X":
            circ.x(qs[0])
        elif kind == "RY":
            circ.ry(qs[0], theta)
        else:
            ntar = 2 if kind == "SWAP" else 1
            nc = draw(st.integers(0, w - ntar))
            ctl = qs[ntar:ntar + nc]
            pol = draw(st.lists(st.booleans(), min_size=nc, max_size=nc))
            pos = [q for q, p in zip(ctl, pol) if p]
            neg = [q for q, p in zip(ctl, pol) if not p]
            if kind == "SWAP":
                circ.swap(qs[0], qs[1], pos, neg)
            elif kind == "MCX":
                circ.mcx(qs[0], pos, neg)
            else:
                circ.mcry(qs[0], theta, pos, neg)
    return circ


def _prep(w: int, seed: int) -> Circuit:
    # a non-trivial real input state
    rng = np.random.default_rng(seed)
    c = Circuit()
    c.add_register("q", w)
    for q in range(w):
        c.ry(q, float(rng.uniform(-math.pi, math.pi)))
    return c


@given(circuits(), st.integers(0, 1000))
def test_simulators_match_reference_unitary(circ, seed):
    w = circ.width
    prep = _prep(w, seed)
    psi = np.zeros(1 << w)
    psi[0] = 1.0
    for g in prep.gates + circ.gates:
        psi = _unitary(g, w) @ psi
    full = prep.copy()
    full.extend(circ.gates)
    for backend in ("dense", "sparse"):
        out = run(full, backend=backend).to_dense()
        assert np.max(np.abs(out - psi)) < 1e-12


@given(circuits(max_width=6, max_gates=20), st.integers(0, 1000))
def test_inverse_restores_state(circ, seed):
    prep = _prep(circ.width, seed)
    s0 = run(prep)
    s1 = run(circ.inverse(), run(circ, s0))
    assert np.max(np.abs(s1.to_dense() - s0.to_dense())) < 1e-12
    assert s1.norm() == pytest.approx(1.0)


def test_width_limit():
    c = Circuit()
    c.add_register("q", 30)
    with pytest.raises(WidthLimitError) as exc:
        run(c, backend="dense")
    assert exc.value.required == 30
    with pytest.raises(WidthLimitError):
        run(c, max_width=20)


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("MCX", (0,), ((0, True),))
    with pytest.raises(ValueError):
        Gate("FOO", (0,))
    c = Circuit()
    c.add_register("q", 2)
    with pytest.raises(IndexError):
        c.x(5)


def test_sample_deterministic_and_consistent():
    c = Circuit()
    r = c.add_register("q", 2)
    c.ry(0, math.pi / 2)
    c.mcx(1, [0])
    state = run(c)
    h1 = sample(state, r, 2000, seed=4)
    assert h1 == sample(state, "q", 2000, seed=4, circuit=c)
    assert set(h1) == {"00", "11"}
    assert abs(h1["11"] / 2000 - 0.5) < 5 * math.sqrt(0.25 / 2000)


def test_dump_format():
    c = Circuit()
    c.add_register("q", 3)
    c.mcx(2, [0], [1])
    assert c.dump().splitlines()[0].startswith("MCX targets=[2] pos_controls=[0] neg_controls=[1]")


@pytest.mark.parametrize("c, anc, depth, tof", [
    (0, 0, 1, 0), (1, 0, 1, 0), (2, 0, 1, 1),
    (3, 1, 3, 3), (4, 2, 3, 5), (8, 6, 5, 13), (8, 0, 13, 13),
])
def test_mcx_cost_table(c, anc, depth, tof):
    d, cnt = mcx_cost(c, anc)
    assert d == depth
    assert cnt.get("toffoli", 0) == tof


def test_negative_controls_add_x_pairs():
    g = Gate("MCX", (0,), ((1, False), (2, True)))
    d, cnt = gate_cost(g, 0)
    assert d == 3 and cnt["x"] == 2 and cnt["toffoli"] == 1


def test_resources_layering():
    c = Circuit()
    c.add_register("q", 4)
    c.x(0)
    c.x(1)
    c.mcx(2, [0, 1])
    c.x(3)
    rep = resources(c)
    assert rep.width == 4
    assert rep.depth == 2
    assert rep.gate_counts["gates"] == 4


def test_pool_contention_serialises():
    c = Circuit()
    c.add_register("q", 8)
    c.add_register("anc", 1)
    c.ancillas = ("anc",)
    c.mcx(3, [0, 1, 2])
    c.mcx(7, [4, 5, 6])
    # one shared ancilla: the two 3-controlled gates cannot overlap
    assert resources(c).depth == 6


def test_zero_state_backends():
    for b in ("dense", "sparse"):
        s = zero_state(3, b)
        assert s.amplitude(0) == 1.0 and s.support_size() == 1
