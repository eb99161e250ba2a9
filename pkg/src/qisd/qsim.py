"""Gate-level circuits, dense and sparse statevector simulation, resource accounting.

Qubit ``q`` is bit ``q`` of the basis-state index (little-endian).  A
register of size ``m`` starting at ``start`` stores bit ``i`` in qubit
``start + i``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

KINDS = ("X", "SWAP", "RY", "MCX", "MCRY")
DENSE_MAX_WIDTH = 26
SPARSE_MAX_WIDTH = 62
# amplitudes this small are dropped from the sparse map (cancellation residue)
SPARSE_DROP = 1e-14


class WidthLimitError(RuntimeError):
    """A circuit needs more qubits than the configured simulator limit."""

    def __init__(self, required: int, limit: int):
        super().__init__(f"circuit needs {required} qubits, limit is {limit}")
        self.required = required
        self.limit = limit


Control = tuple[int, bool]


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    controls: tuple[Control, ...] = ()
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        need = 2 if self.kind == "SWAP" else 1
        if len(self.targets) != need or len(set(self.targets)) != need:
            raise ValueError(f"{self.kind} needs {need} distinct targets")
        cq = [q for q, _ in self.controls]
        if len(set(cq)) != len(cq):
            raise ValueError("repeated control qubit")
        if set(cq) & set(self.targets):
            raise ValueError("control and target overlap")
        if not math.isfinite(self.theta):
            raise ValueError("non-finite angle")
        if any(q < 0 for q in (*cq, *self.targets)):
            raise ValueError("negative qubit index")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(q for q, _ in self.controls)

    @property
    def max_qubit(self) -> int:
        return max(self.qubits)

    def inverse(self) -> "Gate":
        if self.kind in ("RY", "MCRY"):
            return Gate(self.kind, self.targets, self.controls, -self.theta)
        return self

    def dump(self) -> str:
        pos = [q for q, p in self.controls if p]
        neg = [q for q, p in self.controls if not p]
        fmt = lambda xs: "[" + ",".join(str(x) for x in xs) + "]"
        return (f"{self.kind} targets={fmt(self.targets)} pos_controls={fmt(pos)} "
                f"neg_controls={fmt(neg)} theta={self.theta!r}")


def _controls(pos: Iterable[int] = (), neg: Iterable[int] = ()) -> tuple[Control, ...]:
    return tuple((int(q), True) for q in pos) + tuple((int(q), False) for q in neg)


@dataclass(frozen=True)
class Register:
    name: str
    start: int
    size: int

    @property
    def qubits(self) -> range:
        return range(self.start, self.start + self.size)

    def __getitem__(self, i: int) -> int:
        if not -self.size <= i < self.size:
            raise IndexError(f"{self.name}[{i}]")
        return self.start + (i % self.size)

    def __len__(self) -> int:
        return self.size


@dataclass
class Circuit:
    """Ordered gate list over named, contiguous, disjoint registers.

    ``ancillas`` names the registers whose qubits may serve as the shared
    pool for multi-controlled gate decompositions in ``resources``.
    """

    registers: dict[str, Register] = field(default_factory=dict)
    gates: list[Gate] = field(default_factory=list)
    ancillas: tuple[str, ...] = ()

    @property
    def width(self) -> int:
        return sum(r.size for r in self.registers.values())

    def add_register(self, name: str, size: int) -> Register:
        if name in self.registers:
            raise ValueError(f"duplicate register {name!r}")
        if size < 0:
            raise ValueError("negative register size")
        reg = Register(name, self.width, size)
        self.registers[name] = reg
        return reg

    def register(self, name: str) -> Register:
        try:
            return self.registers[name]
        except KeyError:
            raise KeyError(f"unknown register {name!r}") from None

    @property
    def ancilla_count(self) -> int:
        return sum(self.registers[a].size for a in self.ancillas if a in self.registers)

    def append(self, gate: Gate) -> None:
        if gate.max_qubit >= self.width:
            raise IndexError(f"gate touches qubit {gate.max_qubit} >= width {self.width}")
        self.gates.append(gate)

    def extend(self, gates: Iterable[Gate]) -> None:
        for g in gates:
            self.append(g)

    def x(self, q: int) -> None:
        self.append(Gate("X", (q,)))

    def swap(self, a: int, b: int, pos=(), neg=()) -> None:
        self.append(Gate("SWAP", (a, b), _controls(pos, neg)))

    def ry(self, q: int, theta: float) -> None:
        self.append(Gate("RY", (q,), (), float(theta)))

    def mcx(self, target: int, pos=(), neg=()) -> None:
        self.append(Gate("MCX", (target,), _controls(pos, neg)))

    def mcry(self, target: int, theta: float, pos=(), neg=()) -> None:
        self.append(Gate("MCRY", (target,), _controls(pos, neg), float(theta)))

    def inverse(self) -> "Circuit":
        return Circuit(dict(self.registers), [g.inverse() for g in reversed(self.gates)],
                       self.ancillas)

    def copy(self) -> "Circuit":
        return Circuit(dict(self.registers), list(self.gates), self.ancillas)

    def dump(self) -> str:
        return "".join(g.dump() + "\n" for g in self.gates)

    def __len__(self) -> int:
        return len(self.gates)


# ---------------------------------------------------------------- states

class QuantumState:
    """Common interface of the dense and sparse statevectors."""

    backend = ""
    width: int

    def copy(self) -> "QuantumState":
        raise NotImplementedError

    def apply(self, gate: Gate) -> None:
        raise NotImplementedError

    def items(self) -> tuple[np.ndarray, np.ndarray]:
        """Nonzero ``(indices, amplitudes)`` sorted by index."""
        raise NotImplementedError

    def to_dense(self) -> np.ndarray:
        idx, amp = self.items()
        out = np.zeros(1 << self.width, dtype=complex)
        out[idx] = amp
        return out

    def amplitude(self, index: int) -> complex:
        idx, amp = self.items()
        pos = np.searchsorted(idx, index)
        if pos < len(idx) and idx[pos] == index:
            return complex(amp[pos])
        return 0j

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.items()[1]) ** 2)))

    def support_size(self) -> int:
        return int(len(self.items()[0]))

    def register_distribution(self, reg: Register) -> dict[int, float]:
        """Marginal Born probabilities of a register's integer value."""
        idx, amp = self.items()
        vals = (idx >> reg.start) & ((1 << reg.size) - 1)
        probs = np.abs(amp) ** 2
        uniq, inv = np.unique(vals, return_inverse=True)
        tot = np.bincount(inv, weights=probs)
        return {int(u): float(p) for u, p in zip(uniq, tot) if p > 0}


class DenseState(QuantumState):
    backend = "dense"

    def __init__(self, width: int, data: np.ndarray | None = None):
        if width > DENSE_MAX_WIDTH:
            raise WidthLimitError(width, DENSE_MAX_WIDTH)
        self.width = width
        if data is None:
            data = np.zeros(1 << width, dtype=complex)
            data[0] = 1.0
        self.data = np.asarray(data, dtype=complex)
        if self.data.shape != (1 << width,):
            raise ValueError("amplitude vector has the wrong length")

    @classmethod
    def basis(cls, width: int, index: int = 0) -> "DenseState":
        s = cls(width)
        s.data[0] = 0.0
        s.data[index] = 1.0
        return s

    def copy(self) -> "DenseState":
        return DenseState(self.width, self.data.copy())

    def _axis(self, q: int) -> int:
        return self.width - 1 - q

    def apply(self, gate: Gate) -> None:
        if gate.max_qubit >= self.width:
            raise IndexError(f"qubit {gate.max_qubit} out of range for width {self.width}")
        psi = self.data.reshape((2,) * self.width) if self.width else self.data
        base: list = [slice(None)] * self.width
        for q, pol in gate.controls:
            base[self._axis(q)] = 1 if pol else 0

        def at(*fixed: tuple[int, int]) -> tuple:
            sel = list(base)
            for q, v in fixed:
                sel[self._axis(q)] = v
            return tuple(sel)

        if gate.kind in ("X", "MCX"):
            t = gate.targets[0]
            i0, i1 = at((t, 0)), at((t, 1))
            tmp = psi[i0].copy()
            psi[i0] = psi[i1]
            psi[i1] = tmp
        elif gate.kind == "SWAP":
            a, b = gate.targets
            i01, i10 = at((a, 0), (b, 1)), at((a, 1), (b, 0))
            tmp = psi[i01].copy()
            psi[i01] = psi[i10]
            psi[i10] = tmp
        else:
            t = gate.targets[0]
            i0, i1 = at((t, 0)), at((t, 1))
            c, s = math.cos(gate.theta / 2), math.sin(gate.theta / 2)
            a0 = psi[i0].copy()
            a1 = psi[i1].copy()
            psi[i0] = c * a0 - s * a1
            psi[i1] = s * a0 + c * a1

    def items(self) -> tuple[np.ndarray, np.ndarray]:
        idx = np.flatnonzero(self.data)
        return idx.astype(np.int64), self.data[idx]

    def to_dense(self) -> np.ndarray:
        return self.data.copy()


class SparseState(QuantumState):
    """Basis-index to amplitude map held as two sorted numpy arrays."""

    backend = "sparse"

    def __init__(self, width: int, indices=None, amps=None):
        if width > SPARSE_MAX_WIDTH:
            raise WidthLimitError(width, SPARSE_MAX_WIDTH)
        self.width = width
        if indices is None:
            indices, amps = [0], [1.0]
        self.idx = np.asarray(indices, dtype=np.int64)
        self.amp = np.asarray(amps, dtype=complex)
        self.peak_support = len(self.idx)

    @classmethod
    def basis(cls, width: int, index: int = 0) -> "SparseState":
        return cls(width, [index], [1.0])

    @classmethod
    def from_dense(cls, width: int, data: np.ndarray) -> "SparseState":
        idx = np.flatnonzero(data)
        return cls(width, idx, np.asarray(data)[idx])

    def copy(self) -> "SparseState":
        s = SparseState(self.width, self.idx.copy(), self.amp.copy())
        s.peak_support = self.peak_support
        return s

    def _mask(self, gate: Gate) -> np.ndarray:
        pos = sum(1 << q for q, p in gate.controls if p)
        neg = sum(1 << q for q, p in gate.controls if not p)
        return ((self.idx & pos) == pos) & ((self.idx & neg) == 0)

    def apply(self, gate: Gate) -> None:
        if gate.max_qubit >= self.width:
            raise IndexError(f"qubit {gate.max_qubit} out of range for width {self.width}")
        m = self._mask(gate)
        if gate.kind in ("X", "MCX"):
            self.idx = np.where(m, self.idx ^ (1 << gate.targets[0]), self.idx)
            self._sort()
        elif gate.kind == "SWAP":
            a, b = gate.targets
            differ = (((self.idx >> a) ^ (self.idx >> b)) & 1).astype(bool)
            self.idx = np.where(m & differ, self.idx ^ ((1 << a) | (1 << b)), self.idx)
            self._sort()
        else:
            t = 1 << gate.targets[0]
            c, s = math.cos(gate.theta / 2), math.sin(gate.theta / 2)
            act_idx, act_amp = self.idx[m], self.amp[m]
            bit = (act_idx & t) != 0
            # |0> -> c|0> + s|1>,  |1> -> -s|0> + c|1>
            stay = c * act_amp
            move = np.where(bit, -s, s) * act_amp
            new_idx = np.concatenate([self.idx[~m], act_idx, act_idx ^ t])
            new_amp = np.concatenate([self.amp[~m], stay, move])
            uniq, inv = np.unique(new_idx, return_inverse=True)
            summed = np.zeros(len(uniq), dtype=complex)
            np.add.at(summed, inv, new_amp)
            keep = np.abs(summed) > SPARSE_DROP
            self.idx, self.amp = uniq[keep], summed[keep]
        self.peak_support = max(self.peak_support, len(self.idx))

    def _sort(self) -> None:
        order = np.argsort(self.idx, kind="stable")
        self.idx, self.amp = self.idx[order], self.amp[order]

    def items(self) -> tuple[np.ndarray, np.ndarray]:
        return self.idx, self.amp


BACKENDS = {"dense": DenseState, "sparse": SparseState}


def zero_state(width: int, backend: str = "sparse") -> QuantumState:
    try:
        cls = BACKENDS[backend]
    except KeyError:
        raise ValueError(f"unknown backend {backend!r}") from None
    return cls(width)


def apply_gate(state: QuantumState, gate: Gate) -> QuantumState:
    """Return a new state with ``gate`` applied."""
    out = state.copy()
    out.apply(gate)
    return out


def run(circuit: Circuit, initial: QuantumState | None = None, backend: str = "sparse",
        max_width: int | None = None) -> QuantumState:
    """Apply every gate of ``circuit`` in order to a copy of ``initial``."""
    if max_width is not None and circuit.width > max_width:
        raise WidthLimitError(circuit.width, max_width)
    state = zero_state(circuit.width, backend) if initial is None else initial.copy()
    if state.width != circuit.width:
        raise ValueError(f"state width {state.width} != circuit width {circuit.width}")
    for g in circuit.gates:
        state.apply(g)
    return state


def bitstring(value: int, size: int) -> str:
    """Register value as a bit string, register bit 0 first."""
    return "".join(str((value >> i) & 1) for i in range(size))


def sample(state: QuantumState, register: Register | str, shots: int, seed=None,
           circuit: Circuit | None = None) -> dict[str, int]:
    """Histogram of ``shots`` i.i.d. measurements of ``register``.

    ``register`` may be a name when ``circuit`` is given.  Keys are bit
    strings with register bit 0 first; only observed outcomes appear.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if isinstance(register, str):
        if circuit is None:
            raise KeyError(f"unknown register {register!r}")
        register = circuit.register(register)
    dist = state.register_distribution(register)
    keys = sorted(dist)
    probs = np.array([dist[k] for k in keys])
    probs = probs / probs.sum()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    return {bitstring(k, register.size): int(c) for k, c in zip(keys, counts) if c}


# ---------------------------------------------------------------- resources

@dataclass
class ResourceReport:
    width: int
    depth: int
    gate_counts: dict[str, int]

    def to_dict(self) -> dict:
        return {"width": self.width, "depth": self.depth, "gate_counts": dict(self.gate_counts)}


def _ceil_log2(c: int) -> int:
    return max(0, (c - 1).bit_length())


def ancillas_needed(g: Gate) -> int:
    """Pool ancillas used by the log-depth decomposition of a gate."""
    c = len(g.controls) + (1 if g.kind == "SWAP" and g.controls else 0)
    if g.kind == "MCRY":
        return c - 1 if c >= 2 else 0
    return c - 2 if c >= 3 else 0


def mcx_cost(c: int, ancillas: int) -> tuple[int, Counter]:
    """Depth and primitive tallies of a ``c``-controlled NOT (positive controls).

    With at least ``c-2`` ancillas the controls are AND-ed in a balanced
    Toffoli tree, the target is hit, and the tree is uncomputed:
    ``2c-3`` Toffolis in depth ``2(ceil(log2 c) - 1) + 1``.  Without enough
    ancillas the same Toffolis run as a serial ladder of depth ``2c-3``.
    """
    if c == 0:
        return 1, Counter(x=1)
    if c == 1:
        return 1, Counter(cnot=1)
    if c == 2:
        return 1, Counter(toffoli=1)
    tof = 2 * c - 3
    depth = 2 * (_ceil_log2(c) - 1) + 1 if ancillas >= c - 2 else tof
    return depth, Counter(toffoli=tof)


def mcry_cost(c: int, ancillas: int) -> tuple[int, Counter]:
    """Depth and tallies of a ``c``-controlled RY.

    The controls are AND-ed into one ancilla (``c-1`` Toffolis, tree depth
    ``ceil(log2 c)``), a singly controlled RY acts, and the tree is undone.
    Without ``c-1`` ancillas the tree degrades to a serial ladder.
    """
    if c == 0:
        return 1, Counter(ry=1)
    if c == 1:
        return 1, Counter(cry=1)
    tree = _ceil_log2(c) if ancillas >= c - 1 else c - 1
    return 2 * tree + 1, Counter(toffoli=2 * (c - 1), cry=1)


def gate_cost(g: Gate, ancillas: int) -> tuple[int, Counter]:
    """Decomposed depth and primitive tallies of one gate."""
    c = len(g.controls)
    neg = sum(1 for _, p in g.controls if not p)
    if g.kind in ("X", "MCX"):
        depth, cnt = mcx_cost(c, ancillas)
    elif g.kind == "SWAP":
        if c == 0:
            depth, cnt = 1, Counter(swap=1)
        else:
            # CNOT(b->a); MCX on a with controls + b; CNOT(b->a)
            d, cnt = mcx_cost(c + 1, ancillas)
            depth = d + 2
            cnt = cnt + Counter(cnot=2)
    else:
        depth, cnt = mcry_cost(c, ancillas)
    if neg:
        depth += 2
        cnt = cnt + Counter(x=2 * neg)
    return depth, cnt


def resources(circuit: Circuit) -> ResourceReport:
    """Width, greedy-layered depth and primitive gate tallies.

    Each gate occupies its own qubits for its decomposed depth, starting
    once all of them are free.  A gate whose decomposition needs pool
    ancillas also takes the pool qubits that free up earliest; when the
    declared pool is too small it falls back to the ancilla-free ladder.
    """
    busy = [0] * circuit.width
    pool = sorted(q for name in circuit.ancillas if name in circuit.registers
                  for q in circuit.registers[name].qubits)
    pool_busy = {q: 0 for q in pool}
    counts: Counter = Counter()
    depth = 0
    for g in circuit.gates:
        need = ancillas_needed(g)
        free = [q for q in pool if q not in g.qubits]
        use = need if need <= len(free) else 0
        d, cnt = gate_cost(g, use if need else len(free))
        counts.update(cnt)
        chosen = sorted(free, key=lambda q: (max(pool_busy[q], busy[q]), q))[:use]
        qs = list(g.qubits) + chosen
        start = max(busy[q] for q in qs)
        end = start + d
        for q in qs:
            busy[q] = end
        for q in chosen:
            pool_busy[q] = end
        depth = max(depth, end)
    counts["gates"] = len(circuit.gates)
    return ResourceReport(circuit.width, depth, dict(sorted(counts.items())))
