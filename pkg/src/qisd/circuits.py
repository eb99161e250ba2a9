"""Builders for the quantum ISD circuits and the amplitude-amplification driver.

Matrix registers are row-major grids: cell ``(row, col)`` is qubit
``matrix.start + row * ncols + col``.  Column positions follow the in-place
layout of the circuit, so after the controlled column swaps the selected
columns sit at the front (full variant) or the selected ``H'`` columns sit
at the back (width-reduced variant).

Every builder keeps a classical twin in ``emulate_*`` that applies the same
row operations to a bit array, including the columns the circuit leaves
unreduced.  The twins give exact marked-subset counts without simulation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .gf2core import (
    Gf2Matrix,
    Gf2Vector,
    SdpInstance,
    matvec,
    random_weight_vector,
    solve_linear,
    systematic_form,
)
from .qsim import (
    Circuit,
    Gate,
    QuantumState,
    Register,
    ResourceReport,
    WidthLimitError,
    resources,
    run,
    zero_state,
)

VARIANTS = ("full", "width_reduced", "lee_brickell", "cyclic")


# ---------------------------------------------------------------- helpers

def _bits_needed(value: int) -> int:
    return max(0, int(value).bit_length())


def _pattern(value: int, qubits) -> tuple[list[int], list[int]]:
    pos = [q for i, q in enumerate(qubits) if (value >> i) & 1]
    neg = [q for i, q in enumerate(qubits) if not (value >> i) & 1]
    return pos, neg


def _decrement(circ: Circuit, ctrl: int | None, bits) -> None:
    """``c -= 1`` controlled on ``ctrl`` (high bit first)."""
    bits = list(bits)
    extra = [] if ctrl is None else [ctrl]
    for t in reversed(range(len(bits))):
        circ.mcx(bits[t], pos=extra, neg=bits[:t])


def _increment_gates(ctrl: int, bits) -> list[Gate]:
    """``c += 1`` controlled on ``ctrl`` (high bit first)."""
    bits = list(bits)
    out = []
    for t in reversed(range(len(bits))):
        out.append(Gate("MCX", (bits[t],), tuple((q, True) for q in [ctrl, *bits[:t]])))
    return out


def _check_fits(width: int, max_width: int | None) -> None:
    if max_width is not None and width > max_width:
        raise WidthLimitError(width, max_width)


# ---------------------------------------------------------------- superposition

def superposition_angle(remaining: int, ones: int) -> float:
    """RY angle giving ``P(1) = ones / remaining`` (from ``C(r-1, j-1) / C(r, j)``)."""
    a = math.comb(remaining - 1, ones) / math.comb(remaining, ones)
    return 2.0 * math.acos(math.sqrt(a))


def _superposition_gates(circ: Circuit, b, counter, n: int, k: int) -> None:
    for i, q in enumerate(_pattern(k, counter)[0]):
        circ.x(q)
    for i in range(n):
        remaining = n - i
        for j in range(k, 0, -1):
            if j > remaining:
                continue
            pos, neg = _pattern(j, counter)
            if j == remaining:
                circ.mcx(b[i], pos=pos, neg=neg)
            else:
                circ.mcry(b[i], superposition_angle(remaining, j), pos=pos, neg=neg)
        if counter:
            _decrement(circ, b[i], counter)


def build_superposition(n: int, k: int) -> Circuit:
    """Uniform superposition over weight-``k`` strings of length ``n``.

    Registers: ``b`` (n qubits) and ``c`` (``ceil(log2(k+1))`` qubits), the
    weight counter that starts at ``k`` and returns to zero.
    """
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n} k={k}")
    circ = Circuit()
    b = circ.add_register("b", n)
    c = circ.add_register("c", _bits_needed(k))
    _superposition_gates(circ, list(b.qubits), list(c.qubits), n, k)
    return circ


# ---------------------------------------------------------------- gauss

def _gauss_gates(circ: Circuit, cell, rows: int, forward_cols, backsub_cols) -> None:
    """Forward elimination with pivot search, then back-substitution.

    ``cell(r, c)`` maps grid coordinates to qubits.  Unknown ``i`` lives in
    column ``i``.  ``forward_cols(i)`` lists the columns updated when row
    operations of step ``i`` run; ``backsub_cols`` the columns updated during
    back-substitution.
    """
    for i in range(rows - 1):
        cols = forward_cols(i)
        for j in range(i + 1, rows):
            neg = [cell(l, i) for l in range(i, j)]
            for col in cols:
                circ.mcx(cell(i, col), pos=[cell(j, col)], neg=neg)
        for j in range(i + 1, rows):
            for col in cols:
                circ.mcx(cell(j, col), pos=[cell(j, i), cell(i, col)])
    for i in range(rows - 1, 0, -1):
        for j in range(i - 1, -1, -1):
            for col in backsub_cols:
                circ.mcx(cell(j, col), pos=[cell(j, i), cell(i, col)])


def _emulate_gauss(a: np.ndarray, rows: int, forward_cols, backsub_cols) -> None:
    """Classical twin of ``_gauss_gates`` acting in place on a 0/1 array."""
    for i in range(rows - 1):
        cols = list(forward_cols(i))
        for j in range(i + 1, rows):
            if not a[i:j, i].any():
                a[i, cols] ^= a[j, cols]
        for j in range(i + 1, rows):
            if a[j, i]:
                a[j, cols] ^= a[i, cols]
    for i in range(rows - 1, 0, -1):
        for j in range(i - 1, -1, -1):
            if a[j, i]:
                a[j, backsub_cols] ^= a[i, backsub_cols]


def build_gauss(rows: int, cols: int) -> Circuit:
    """Gaussian elimination on a ``rows x (cols+1)`` augmented grid register ``matrix``.

    Solves the square system formed by the first ``rows`` columns; the
    solution ends in the last column.  Additional columns (``cols > rows``)
    take part in all row operations.
    """
    if rows < 1 or cols < rows:
        raise ValueError("need 1 <= rows <= cols")
    circ = Circuit()
    m = circ.add_register("matrix", rows * (cols + 1))
    nc = cols + 1
    cell = lambda r, c: m.start + r * nc + c
    _gauss_gates(circ, cell, rows, lambda i: range(i + 1, nc), [nc - 1])
    return circ


def gauss_input_state(a: Gf2Matrix, t: Gf2Vector, backend: str = "sparse") -> QuantumState:
    """Basis state encoding ``(a | t)`` for ``build_gauss``."""
    rows, cols = a.shape
    nc = cols + 1
    index = 0
    for r in range(rows):
        for c in range(cols):
            if a[r, c]:
                index |= 1 << (r * nc + c)
        if t[r]:
            index |= 1 << (r * nc + cols)
    cls = type(zero_state(0, backend))
    return cls.basis(rows * nc, index)


def read_column(state: QuantumState, start: int, ncols: int, rows: int, col: int) -> Gf2Vector:
    """Read a grid column from a computational-basis state."""
    idx, amp = state.items()
    k = int(np.argmax(np.abs(amp)))
    value = int(idx[k])
    bits = [(value >> (start + r * ncols + col)) & 1 for r in range(rows)]
    return Gf2Vector.from_bits(bits)


# ---------------------------------------------------------------- layouts

@dataclass
class QisdLayout:
    """Qubit assignment of a quantum ISD circuit.

    ``sup_counter`` hosts the superposition weight counter (borrowed from
    the matrix grid, which is still zero while the superposition is built).
    ``c`` is the weight-accumulation counter, or ``None`` when the pool is
    too small and the weight check is done by pattern-matching MCX gates.
    """

    variant: str
    n: int
    k: int
    b: Register
    matrix: Register
    ncols: int
    pool: Register
    sign: Register | None
    sup_counter: list[int]
    c: list[int] | None
    solution_cols: list[int]
    x: Register | None = None
    stage_counter: list[int] | None = None
    extra: Register | None = None
    perm: object = None

    @property
    def m(self) -> int:
        return self.n - self.k

    def cell(self, row: int, col: int) -> int:
        return self.matrix.start + row * self.ncols + col

    def column_qubits(self, col: int) -> list[int]:
        return [self.cell(r, col) for r in range(self.m)]

    @property
    def width(self) -> int:
        w = self.b.size + self.matrix.size + self.pool.size
        w += self.sign.size if self.sign is not None else 0
        w += self.x.size if self.x is not None else 0
        w += self.extra.size if self.extra is not None else 0
        return w


def _alloc_full(n: int, k: int, ncols: int, with_sign: bool, variant: str) -> tuple[Circuit, QisdLayout]:
    m = n - k
    circ = Circuit()
    b = circ.add_register("b", n)
    mat = circ.add_register("matrix", m * ncols)
    pool = circ.add_register("pool", max(0, m - 2))
    sign = circ.add_register("sign", 1) if with_sign else None
    circ.ancillas = ("pool",)
    sup = list(mat.qubits)[: _bits_needed(m)]
    cbits = _bits_needed(m)
    c = list(pool.qubits)[:cbits] if cbits <= pool.size else None
    layout = QisdLayout(variant, n, k, b, mat, ncols, pool, sign, sup, c, [])
    return circ, layout


def _init_gates(circ: Circuit, layout: QisdLayout, grid: list[list[int]]) -> None:
    for r, row in enumerate(grid):
        for col, bit in enumerate(row):
            if bit:
                circ.x(layout.cell(r, col))


def _weight_flag_gates(circ: Circuit, layout: QisdLayout, sol: list[int], target: int) -> None:
    """Flip the sign qubit when ``wt(sol) == target`` (Acc, compare, Acc^-1)."""
    if target < 0 or target > len(sol):
        return
    sign = layout.sign[0]
    if layout.c is not None:
        acc: list[Gate] = []
        for q in sol:
            acc.extend(_increment_gates(q, layout.c))
        circ.extend(acc)
        pos, neg = _pattern(target, layout.c)
        circ.mcx(sign, pos=pos, neg=neg)
        circ.extend(reversed(acc))
    else:
        for combo in itertools.combinations(range(len(sol)), target):
            chosen = set(combo)
            circ.mcx(sign, pos=[sol[i] for i in combo],
                     neg=[sol[i] for i in range(len(sol)) if i not in chosen])


def _accumulate_gates(circ: Circuit, layout: QisdLayout, sol: list[int]) -> None:
    if layout.c is None:
        return
    for q in sol:
        circ.extend(_increment_gates(q, layout.c))


# ---------------------------------------------------------------- full variant

def _full_grid(instance: SdpInstance, syndromes=None) -> list[list[int]]:
    h = instance.h
    synd = [instance.s] if syndromes is None else list(syndromes)
    return [[h[r, c] for c in range(h.ncols)] + [s[r] for s in synd] for r in range(h.nrows)]


def _column_swaps(circ: Circuit, layout: QisdLayout, nswap: int) -> None:
    """Controlled adjacent transpositions moving selected columns to the front."""
    for i in range(nswap):
        for j in range(i - 1, -1, -1):
            for r in range(layout.m):
                circ.swap(layout.cell(r, j), layout.cell(r, j + 1), pos=[layout.b[i]])


def _solve_full(circ: Circuit, layout: QisdLayout, n: int, s_cols: list[int], lee_brickell: bool) -> None:
    m = layout.m
    if lee_brickell:
        fwd = lambda i: list(range(i + 1, n)) + s_cols
        back = list(range(m, n)) + s_cols
    else:
        fwd = lambda i: list(range(i + 1, m)) + s_cols
        back = s_cols
    _gauss_gates(circ, layout.cell, m, fwd, back)


def _full_body(instance: SdpInstance, layout: QisdLayout, s_cols: list[int], lee_brickell: bool,
               grid) -> Circuit:
    """Init, column swaps and Gaussian elimination (the ``Solve`` block)."""
    body = Circuit(dict(_registers_of(layout)))
    _init_gates(body, layout, grid)
    _column_swaps(body, layout, instance.n)
    _solve_full(body, layout, instance.n, s_cols, lee_brickell)
    return body


def _registers_of(layout: QisdLayout) -> dict[str, Register]:
    regs = {"b": layout.b, "matrix": layout.matrix, "pool": layout.pool}
    if layout.sign is not None:
        regs["sign"] = layout.sign
    if layout.x is not None:
        regs["x"] = layout.x
    if layout.extra is not None:
        regs["extra"] = layout.extra
    return dict(sorted(regs.items(), key=lambda kv: kv[1].start))


def _empty_like(layout: QisdLayout) -> Circuit:
    c = Circuit(_registers_of(layout))
    c.ancillas = ("pool",) if layout.x is None else ("pool", "x")
    return c


def build_combined(instance: SdpInstance, max_width: int | None = None) -> tuple[Circuit, QisdLayout]:
    """Superposition, Init, column swaps, Gaussian elimination and weight accumulation.

    Width is ``n + (n-k)(n+1) + (n-k-2)``.  After the circuit, branch ``b``
    holds ``e1`` with ``H_I e1 = s`` in the last column and (when the pool
    can host it) ``wt(e1)`` in counter ``c``.
    """
    n, k, m = instance.n, instance.k, instance.n - instance.k
    circ, layout = _alloc_full(n, k, n + 1, False, "full")
    _check_fits(circ.width, max_width)
    layout.solution_cols = [n]
    _superposition_gates(circ, list(layout.b.qubits), layout.sup_counter, n, m)
    circ.extend(_full_body(instance, layout, [n], False, _full_grid(instance)).gates)
    _accumulate_gates(circ, layout, layout.column_qubits(n))
    return circ, layout


# ---------------------------------------------------------------- width-reduced

def _is_systematic(instance: SdpInstance) -> bool:
    m = instance.h.nrows
    return all(instance.h.rows[r] & ((1 << m) - 1) == 1 << r for r in range(m))


def to_systematic(instance: SdpInstance) -> tuple[SdpInstance, object]:
    """Systematic-form copy of an instance and the column permutation used."""
    h2, s2, perm = systematic_form(instance.h, instance.s)
    planted = perm.apply_inverse(instance.planted) if instance.planted is not None else None
    return SdpInstance(h2, s2, instance.omega, planted), perm


def _alloc_width_reduced(n: int, k: int) -> tuple[Circuit, QisdLayout]:
    m = n - k
    ncols = k + 1
    circ = Circuit()
    b = circ.add_register("b", n)
    mat = circ.add_register("matrix", m * ncols)
    x = circ.add_register("x", k)
    pool = circ.add_register("pool", max(0, m - 2))
    cbits = _bits_needed(m)
    host = list(x.qubits) + list(pool.qubits)
    extra = None
    if cbits > len(host):
        extra = circ.add_register("extra", cbits - len(host))
        host += list(extra.qubits)
    sign = circ.add_register("sign", 1)
    circ.ancillas = ("pool",)
    sup = list(mat.qubits)[:cbits]
    c = list(pool.qubits)[:cbits] if cbits <= pool.size else None
    layout = QisdLayout("width_reduced", n, k, b, mat, ncols, pool, sign, sup, c, [k], x=x,
                        stage_counter=host[:cbits], extra=extra)
    return circ, layout


def _width_reduced_body(instance: SdpInstance, layout: QisdLayout) -> Circuit:
    """Init, identity-column row swaps, ``H'`` column swaps and backward Gauss-Jordan."""
    n, k, m = layout.n, layout.k, layout.m
    body = _empty_like(layout)
    h = instance.h
    grid = [[h[r, m + c] for c in range(k)] + [instance.s[r]] for r in range(m)]
    _init_gates(body, layout, grid)
    cnt = layout.stage_counter
    b = layout.b
    # stage 1: one row swap per selected identity column
    for q in _pattern(m, cnt)[0]:
        body.x(q)
    for i in range(m):
        for j in range(i):
            pos, neg = _pattern(m - j, cnt)
            for col in range(k + 1):
                body.swap(layout.cell(i, col), layout.cell(j, col), pos=[b[i], *pos], neg=neg)
        _decrement(body, b[i], cnt)
    # the counter now equals the number r of selected H' columns; clear it
    for i in range(m, n):
        _decrement(body, b[i], cnt)
    # stage 2: move selected H' columns to the back, marking x = 0^{k-r} 1^r
    x = layout.x
    for i in range(n - 1, m - 1, -1):
        p = i - m
        body.mcx(x[p], pos=[b[i]])
        for j in range(p, k - 1):
            for r in range(m):
                body.swap(layout.cell(r, j), layout.cell(r, j + 1), pos=[b[i]])
            body.swap(x[j], x[j + 1], pos=[b[i]])
    # stage 3: Gauss-Jordan from the last column backwards, gated by x
    for t in range(min(k, m)):
        p, rho = k - 1 - t, m - 1 - t
        cols = list(range(p)) + [k]
        for j in range(rho - 1, -1, -1):
            xi = k - m + j
            if xi < 0:
                break
            neg = [layout.cell(l, p) for l in range(j + 1, rho + 1)]
            for col in cols:
                body.mcx(layout.cell(rho, col), pos=[x[xi], layout.cell(j, col)], neg=neg)
        for j in range(m):
            if j == rho:
                continue
            for col in cols:
                body.mcx(layout.cell(j, col), pos=[x[p], layout.cell(j, p), layout.cell(rho, col)])
    return body


def build_width_reduced(instance: SdpInstance, max_width: int | None = None
                        ) -> tuple[Circuit, QisdLayout]:
    """Width-reduced combined circuit taking only ``(H' | s)`` as matrix input.

    A non-systematic instance is first brought to systematic form; the
    permutation is stored in ``layout.perm`` and subsets refer to the
    permuted columns.  Width is ``(n-k+2)(k+3) - 7`` including the sign qubit.
    """
    perm = None
    if not _is_systematic(instance):
        instance, perm = to_systematic(instance)
    n, k = instance.n, instance.k
    circ, layout = _alloc_width_reduced(n, k)
    _check_fits(circ.width, max_width)
    layout.perm = perm
    _superposition_gates(circ, list(layout.b.qubits), layout.sup_counter, n, n - k)
    circ.extend(_width_reduced_body(instance, layout).gates)
    _accumulate_gates(circ, layout, layout.column_qubits(k))
    return circ, layout


# ---------------------------------------------------------------- oracles

@dataclass
class OracleBundle:
    """Everything the amplitude-amplification driver needs for one variant."""

    instance: SdpInstance
    variant: str
    layout: QisdLayout
    prepare: Circuit
    oracle: Circuit
    syndromes: list[Gf2Vector] | None = None
    p: int = 0

    @property
    def width(self) -> int:
        return self.layout.width


def build_lee_brickell_extension(layout: QisdLayout, omega: int, p: int) -> Circuit:
    """For every ``p``-subset of ``H2`` columns: add into ``s``, check ``wt == omega - p``, undo.

    Several matching subsets flip the sign once each, so the phase records
    the parity of the number of matches.
    """
    n, k, m = layout.n, layout.k, layout.m
    if not 0 <= p <= k:
        raise ValueError(f"need 0 <= p <= k, got p={p}")
    frag = _empty_like(layout)
    s_col = layout.solution_cols[0]
    sol = layout.column_qubits(s_col)
    for combo in itertools.combinations(range(m, n), p):
        adds = [Gate("MCX", (layout.cell(r, s_col),), ((layout.cell(r, col), True),))
                for col in combo for r in range(m)]
        frag.extend(adds)
        _weight_flag_gates(frag, layout, sol, omega - p)
        frag.extend(reversed(adds))
    return frag


def build_cyclic_extension(layout: QisdLayout, omega: int) -> Circuit:
    """Weight check on each of the ``k`` syndrome columns; matches flip the sign (parity)."""
    frag = _empty_like(layout)
    for col in layout.solution_cols:
        _weight_flag_gates(frag, layout, layout.column_qubits(col), omega)
    return frag


def _build_bundle(instance: SdpInstance, variant: str, target: int, p: int = 0,
                  syndromes=None, max_width: int | None = None) -> OracleBundle:
    n, k, m = instance.n, instance.k, instance.n - instance.k
    if variant == "width_reduced":
        perm = None
        if not _is_systematic(instance):
            instance, perm = to_systematic(instance)
        circ, layout = _alloc_width_reduced(n, k)
        _check_fits(circ.width, max_width)
        layout.perm = perm
        body = _width_reduced_body(instance, layout)
        check = _empty_like(layout)
        _weight_flag_gates(check, layout, layout.column_qubits(k), target)
    elif variant in ("full", "lee_brickell"):
        circ, layout = _alloc_full(n, k, n + 1, True, variant)
        _check_fits(circ.width, max_width)
        layout.solution_cols = [n]
        body = _full_body(instance, layout, [n], variant == "lee_brickell", _full_grid(instance))
        if variant == "lee_brickell":
            check = build_lee_brickell_extension(layout, target + p, p)
        else:
            check = _empty_like(layout)
            _weight_flag_gates(check, layout, layout.column_qubits(n), target)
    elif variant == "cyclic":
        if syndromes is None:
            raise ValueError("cyclic variant needs the list of syndromes")
        if n != 2 * k:
            raise ValueError(f"cyclic variant needs n = 2k, got n={n} k={k}")
        if len(syndromes) != k:
            raise ValueError(f"cyclic variant needs k={k} syndromes, got {len(syndromes)}")
        circ, layout = _alloc_full(n, k, n + k, True, "cyclic")
        _check_fits(circ.width, max_width)
        s_cols = list(range(n, n + k))
        layout.solution_cols = s_cols
        body = _full_body(instance, layout, s_cols, False, _full_grid(instance, syndromes))
        check = build_cyclic_extension(layout, target)
    else:
        raise ValueError(f"unknown variant {variant!r}; choose from {list(VARIANTS)}")
    prepare = _empty_like(layout)
    _superposition_gates(prepare, list(layout.b.qubits), layout.sup_counter, n, m)
    oracle = _empty_like(layout)
    oracle.extend(body.gates)
    oracle.extend(check.gates)
    oracle.extend(body.inverse().gates)
    return OracleBundle(instance, variant, layout, prepare, oracle,
                        list(syndromes) if syndromes is not None else None, p)


def build_oracle(instance: SdpInstance, target_weight: int, variant: str = "full", p: int = 0,
                 syndromes=None, return_layout: bool = False, max_width: int | None = None):
    """Phase oracle ``S_t``: Solve, Acc, flip sign on ``c == target``, Acc^-1, Solve^-1.

    The sign qubit must be prepared in ``|->`` by the caller for a phase
    kick-back; on a computational-basis sign qubit the oracle writes the
    flag instead.  For ``lee_brickell`` the target is ``omega - p``.
    """
    if target_weight > instance.n - instance.k:
        raise ValueError(f"target weight {target_weight} exceeds n-k = {instance.n - instance.k}")
    bundle = _build_bundle(instance, variant, target_weight, p, syndromes, max_width)
    return (bundle.oracle, bundle.layout) if return_layout else bundle.oracle


def build_qisd(instance: SdpInstance, variant: str = "full", p: int = 0, syndromes=None,
               max_width: int | None = None) -> OracleBundle:
    """Preparation ``A`` and oracle ``S_t`` for a variant, targeting weight ``omega`` (or ``omega - p``)."""
    target = instance.omega - p if variant == "lee_brickell" else instance.omega
    if variant == "lee_brickell" and not 0 <= p <= min(instance.omega, instance.k):
        raise ValueError(f"need 0 <= p <= min(omega, k), got p={p}")
    return _build_bundle(instance, variant, target, p, syndromes, max_width)


def grover_iterations(q: float) -> int:
    """``max(0, round(pi / (4 asin(sqrt q)) - 1/2))``, the optimal iteration count."""
    if not q > 0:
        raise ValueError("success fraction must be positive")
    if q > 1:
        raise ValueError("success fraction exceeds 1")
    return max(0, round(math.pi / (4.0 * math.asin(math.sqrt(q))) - 0.5))


def amplified_success(q: float, m: int) -> float:
    """``sin^2((2m+1) asin(sqrt q))``."""
    return math.sin((2 * m + 1) * math.asin(math.sqrt(q))) ** 2


def build_amplification(bundle: OracleBundle, iterations: int) -> Circuit:
    """``|-> (x) A|0>`` followed by ``iterations`` rounds of ``Q = -A S0 A^-1 S_t``."""
    lay = bundle.layout
    circ = _empty_like(lay)
    circ.ry(lay.sign[0], -math.pi / 2)
    circ.extend(bundle.prepare.gates)
    a_inv = bundle.prepare.inverse()
    reflect = list(lay.b.qubits) + list(lay.sup_counter)
    for _ in range(iterations):
        circ.extend(bundle.oracle.gates)
        circ.extend(a_inv.gates)
        circ.mcx(lay.sign[0], neg=reflect)
        circ.extend(bundle.prepare.gates)
    return circ


# ---------------------------------------------------------------- classical twins

def _subsets(n: int, m: int):
    for combo in itertools.combinations(range(n), m):
        yield combo


def _grid_array(instance: SdpInstance, syndromes=None) -> np.ndarray:
    return np.array(_full_grid(instance, syndromes), dtype=np.uint8).reshape(instance.h.nrows, -1)


def emulate_full(instance: SdpInstance, subset, lee_brickell: bool = False, syndromes=None) -> np.ndarray:
    """Grid after Init, swaps and Gauss for one subset (classical twin of the full body)."""
    n, m = instance.n, instance.n - instance.k
    a = _grid_array(instance, syndromes)
    sel = sorted(subset)
    order = list(reversed(sel)) + [c for c in range(n) if c not in set(sel)]
    a = np.concatenate([a[:, order], a[:, n:]], axis=1)
    s_cols = list(range(n, a.shape[1]))
    if lee_brickell:
        fwd = lambda i: list(range(i + 1, n)) + s_cols
        back = list(range(m, n)) + s_cols
    else:
        fwd = lambda i: list(range(i + 1, m)) + s_cols
        back = s_cols
    _emulate_gauss(a, m, fwd, back)
    return a


def emulate_width_reduced(instance: SdpInstance, subset) -> np.ndarray:
    """Grid ``(H' | s)`` after the three width-reduced stages for one subset."""
    k, m = instance.k, instance.n - instance.k
    h = instance.h
    a = np.array([[h[r, m + c] for c in range(k)] + [instance.s[r]] for r in range(m)], dtype=np.uint8)
    sel = set(subset)
    ident = [i for i in range(m) if i in sel]
    for j, i in enumerate(ident):
        a[[i, j]] = a[[j, i]]
    hsel = sorted((i - m for i in sel if i >= m), reverse=True)
    rest = [c for c in range(k) if c not in set(hsel)]
    a = np.concatenate([a[:, rest + hsel], a[:, k:]], axis=1)
    r = len(hsel)
    x = np.zeros(k, dtype=np.uint8)
    x[k - r:] = 1
    for t in range(min(k, m)):
        p, rho = k - 1 - t, m - 1 - t
        cols = list(range(p)) + [k]
        for j in range(rho - 1, -1, -1):
            xi = k - m + j
            if xi < 0:
                break
            if x[xi] and not a[j + 1:rho + 1, p].any():
                a[rho, cols] ^= a[j, cols]
        if x[p]:
            for j in range(m):
                if j != rho and a[j, p]:
                    a[j, cols] ^= a[rho, cols]
    return a


def _marks(instance: SdpInstance, variant: str, subset, p: int = 0, syndromes=None) -> bool:
    m, w = instance.n - instance.k, instance.omega
    if variant == "width_reduced":
        a = emulate_width_reduced(instance, subset)
        return int(a[:, instance.k].sum()) == w
    if variant == "full":
        a = emulate_full(instance, subset)
        return int(a[:, instance.n].sum()) == w
    if variant == "lee_brickell":
        a = emulate_full(instance, subset, lee_brickell=True)
        flips = 0
        for combo in itertools.combinations(range(m, instance.n), p):
            col = a[:, instance.n].copy()
            for c in combo:
                col ^= a[:, c]
            flips += int(col.sum()) == w - p
        return flips % 2 == 1
    if variant == "cyclic":
        a = emulate_full(instance, subset, syndromes=syndromes)
        flips = sum(int(a[:, c].sum()) == w for c in range(instance.n, a.shape[1]))
        return flips % 2 == 1
    raise ValueError(f"unknown variant {variant!r}")


def marked_subsets(instance: SdpInstance, variant: str = "full", p: int = 0, syndromes=None
                   ) -> tuple[list[tuple[int, ...]], int]:
    """Subsets whose branch the oracle flips, by exhaustive classical emulation.

    Returns ``(marked, total)``.  For ``width_reduced`` the instance is
    first brought to systematic form and subsets index its columns.
    """
    if variant == "width_reduced" and not _is_systematic(instance):
        instance, _ = to_systematic(instance)
    n, m = instance.n, instance.n - instance.k
    marked = [s for s in _subsets(n, m) if _marks(instance, variant, s, p, syndromes)]
    return marked, math.comb(n, m)


def weight_of_branch(instance: SdpInstance, subset, variant: str = "full") -> int:
    """Weight the circuit accumulates for a subset (classical twin)."""
    if variant == "width_reduced":
        if not _is_systematic(instance):
            instance, _ = to_systematic(instance)
        return int(emulate_width_reduced(instance, subset)[:, instance.k].sum())
    return int(emulate_full(instance, subset)[:, instance.n].sum())


def branch_weights(state: QuantumState, layout: QisdLayout) -> dict[tuple[int, ...], int]:
    """``subset -> weight`` read off the basis states of a combined-circuit output.

    The weight comes from counter ``c`` when present and from the popcount
    of the solution column otherwise.
    """
    idx, amp = state.items()
    out: dict[tuple[int, ...], int] = {}
    sol = layout.column_qubits(layout.solution_cols[0])
    for value, a in zip(idx.tolist(), amp):
        if abs(a) < 1e-12:
            continue
        bval = (value >> layout.b.start) & ((1 << layout.b.size) - 1)
        subset = tuple(i for i in range(layout.b.size) if (bval >> i) & 1)
        if layout.c is not None:
            w = sum(((value >> q) & 1) << i for i, q in enumerate(layout.c))
        else:
            w = sum((value >> q) & 1 for q in sol)
        out[subset] = w
    return out


# ---------------------------------------------------------------- cyclic toy

def rotate(v: Gf2Vector, shift: int) -> Gf2Vector:
    n = v.length
    shift %= n
    mask = (1 << n) - 1
    return Gf2Vector(((v.value << shift) | (v.value >> (n - shift))) & mask, n)


def _shift_halves(e: Gf2Vector, shift: int, k: int) -> Gf2Vector:
    lo = Gf2Vector(e.value & ((1 << k) - 1), k)
    hi = Gf2Vector(e.value >> k, k)
    return rotate(lo, shift).concat(rotate(hi, shift))


def cyclic_instance(k: int, omega: int, seed=None) -> tuple[SdpInstance, list[Gf2Vector]]:
    """Double-circulant ``H = (I_k | C)`` with planted error and its ``k`` shifted syndromes.

    Shifting both halves of ``e`` by ``i`` gives a solution for syndrome ``rot^i(s)``.
    """
    rng = np.random.default_rng(seed)
    first = rng.integers(0, 2, size=k)
    rows = []
    for r in range(k):
        circ_row = [int(first[(c - r) % k]) for c in range(k)]
        rows.append([1 if c == r else 0 for c in range(k)] + circ_row)
    h = Gf2Matrix.from_rows(rows)
    e = random_weight_vector(2 * k, omega, rng)
    s = matvec(h, e)
    inst = SdpInstance(h, s, omega, e)
    return inst, [rotate(s, i) for i in range(k)]


def unshift_solution(e_i: Gf2Vector, shift: int, k: int) -> Gf2Vector:
    """Map a solution of syndrome ``rot^shift(s)`` back to a solution of ``s``."""
    return _shift_halves(e_i, -shift, k)


# ---------------------------------------------------------------- driver

@dataclass
class QisdRun:
    solution: Gf2Vector | None
    variant: str
    attempts: int
    iterations: int
    q: float
    marked: int
    total: int
    width: int
    measured: list[tuple[int, ...]] = field(default_factory=list)
    shift: int | None = None
    resources: ResourceReport | None = None

    @property
    def solved(self) -> bool:
        return self.solution is not None


def _classical_finish(instance: SdpInstance, subset, variant: str, p: int, syndromes
                      ) -> tuple[Gf2Vector | None, int | None]:
    """Recover a verified solution from a measured subset."""
    n, m = instance.n, instance.n - instance.k
    idx = list(subset)
    h_i = instance.h.project_columns(idx)

    def lift(e1: Gf2Vector, extra=()) -> Gf2Vector:
        return Gf2Vector(sum(1 << idx[j] for j in e1.support) | sum(1 << c for c in extra), n)

    if variant == "cyclic":
        for shift, s_i in enumerate(syndromes):
            e1 = solve_linear(h_i, s_i)
            if e1 is not None and e1.weight == instance.omega:
                e = lift(e1)
                if matvec(instance.h, e) == s_i:
                    return e, shift
        return None, None
    pp = p if variant == "lee_brickell" else 0
    others = [c for c in range(n) if c not in set(idx)]
    cols = instance.h.columns
    for combo in itertools.combinations(others, pp):
        t = instance.s.value
        for c in combo:
            t ^= cols[c]
        e1 = solve_linear(h_i, Gf2Vector(t, m))
        if e1 is not None and e1.weight == instance.omega - pp:
            e = lift(e1, combo)
            if instance.is_solution(e):
                return e, None
    return None, None


def measure_distribution(instance: SdpInstance, variant: str, iterations: int, p: int = 0,
                         syndromes=None, backend: str = "sparse"):
    """Born distribution of the subset register after ``iterations`` amplification rounds.

    Cached per (instance, variant, p, syndromes, iterations, backend).
    """
    synd = tuple(s.value for s in syndromes) if syndromes else None
    ck = (instance.to_text(), variant, p, synd, iterations, backend)
    if ck not in _DIST_CACHE:
        bundle = build_qisd(instance, variant, p, syndromes)
        state = run(build_amplification(bundle, iterations), backend=backend)
        dist = state.register_distribution(bundle.layout.b)
        keys = sorted(dist)
        if len(_DIST_CACHE) >= 128:
            _DIST_CACHE.pop(next(iter(_DIST_CACHE)))
        _DIST_CACHE[ck] = (keys, np.array([dist[k] for k in keys]))
    return _DIST_CACHE[ck]


_DIST_CACHE: dict = {}


def run_qisd(instance: SdpInstance, variant: str = "full", seed=None, p: int = 0,
             syndromes=None, backend: str = "sparse", max_width: int | None = None,
             max_attempts: int = 8, schedule: str = "exact", return_details: bool = False):
    """Amplitude-amplified quantum ISD, simulated, with classical verification.

    ``schedule="exact"`` takes the iteration count from the exact marked
    fraction (exhaustive classical emulation of the oracle).  With several
    solutions this fraction already includes the factor ``S``.
    ``schedule="exponential"`` draws the count uniformly below a doubling
    bound, for when the fraction is treated as unknown.

    Returns the verified solution (or ``None``), or a ``QisdRun`` when
    ``return_details`` is set.  For ``cyclic`` the solution solves the
    shifted syndrome recorded in ``QisdRun.shift``.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {list(VARIANTS)}")
    if schedule not in ("exact", "exponential"):
        raise ValueError(f"unknown schedule {schedule!r}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    bundle = build_qisd(instance, variant, p, syndromes, max_width)
    work = bundle.instance
    perm = bundle.layout.perm
    marked, total = marked_subsets(work, variant, p, syndromes)
    q = len(marked) / total
    details = QisdRun(None, variant, 0, 0, q, len(marked), total, bundle.width)
    if not marked:
        return details if return_details else None
    bound = 1.0
    for attempt in range(1, max_attempts + 1):
        if schedule == "exact":
            m_iter = grover_iterations(q)
        else:
            m_iter = int(rng.integers(0, max(1, int(bound))))
            bound = min(bound * 1.5, math.sqrt(total) + 1)
        keys, probs = measure_distribution(work, variant, m_iter, p, syndromes, backend)
        choice = keys[int(rng.choice(len(keys), p=probs / probs.sum()))]
        subset = tuple(i for i in range(work.n) if (choice >> i) & 1)
        details.attempts = attempt
        details.iterations = m_iter
        details.measured.append(subset)
        e, shift = _classical_finish(work, subset, variant, p, syndromes)
        if e is not None:
            if perm is not None:
                e = perm.apply(e)
            if variant != "cyclic" and not instance.is_solution(e):
                continue
            details.solution = e
            details.shift = shift
            break
    return details if return_details else details.solution


def circuit_resources(instance: SdpInstance, variant: str = "full", p: int = 0, syndromes=None,
                      iterations: int | None = None) -> ResourceReport:
    """Resources of the full amplified circuit for a variant."""
    bundle = build_qisd(instance, variant, p, syndromes)
    if iterations is None:
        marked, total = marked_subsets(bundle.instance, variant, p, syndromes)
        iterations = grover_iterations(len(marked) / total) if marked else 0
    return resources(build_amplification(bundle, iterations))
