"""Binary linear algebra over GF(2) and syndrome-decoding instances.

Rows (and vectors) are packed into Python integers: bit ``j`` of a row is
column ``j``.  Row addition is a single XOR, which keeps Gaussian elimination
cheap for the matrix sizes this package works with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class DimensionError(ValueError):
    """Operand shapes do not fit together."""


class RankError(ValueError):
    """A matrix expected to have full row rank does not."""

    def __init__(self, rank: int, expected: int):
        super().__init__(f"matrix has rank {rank}, expected {expected}")
        self.rank = rank
        self.expected = expected


class InstanceFormatError(ValueError):
    """Malformed instance text."""


def _popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class Gf2Vector:
    value: int
    length: int

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("negative length")
        if self.value < 0 or self.value >> self.length:
            raise ValueError("value does not fit in length")

    @classmethod
    def zeros(cls, length: int) -> "Gf2Vector":
        return cls(0, length)

    @classmethod
    def ones(cls, length: int) -> "Gf2Vector":
        return cls((1 << length) - 1, length)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "Gf2Vector":
        value = 0
        length = 0
        for i, b in enumerate(bits):
            if b not in (0, 1, True, False):
                raise ValueError(f"non-binary entry {b!r}")
            value |= int(b) << i
            length = i + 1
        return cls(value, length)

    @classmethod
    def from_str(cls, text: str) -> "Gf2Vector":
        text = text.strip()
        if any(ch not in "01" for ch in text):
            raise ValueError(f"not a bit string: {text!r}")
        return cls.from_bits(int(ch) for ch in text)

    @classmethod
    def from_support(cls, support: Iterable[int], length: int) -> "Gf2Vector":
        value = 0
        for i in support:
            if not 0 <= i < length:
                raise IndexError(i)
            value |= 1 << i
        return cls(value, length)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> i) & 1 for i in range(self.length))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.length) if (self.value >> i) & 1)

    @property
    def weight(self) -> int:
        return _popcount(self.value)

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if not -self.length <= i < self.length:
            raise IndexError(i)
        return (self.value >> (i % self.length)) & 1

    def __xor__(self, other: "Gf2Vector") -> "Gf2Vector":
        if self.length != other.length:
            raise DimensionError(f"lengths {self.length} and {other.length} differ")
        return Gf2Vector(self.value ^ other.value, self.length)

    __add__ = __xor__

    def project(self, indices: Sequence[int]) -> "Gf2Vector":
        return Gf2Vector.from_bits(self[i] for i in indices) if indices else Gf2Vector(0, 0)

    def concat(self, other: "Gf2Vector") -> "Gf2Vector":
        return Gf2Vector(self.value | (other.value << self.length), self.length + other.length)

    def to_str(self) -> str:
        return "".join(str(b) for b in self.bits)

    def to_hex(self) -> str:
        """Hex of the bit string read as big-endian with bit 0 first."""
        if self.length == 0:
            return ""
        return f"{int(self.to_str(), 2):0{(self.length + 3) // 4}x}"

    def __str__(self) -> str:
        return self.to_str()


@dataclass(frozen=True)
class Gf2Matrix:
    rows: tuple[int, ...]
    ncols: int
    _cols: tuple[int, ...] | None = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        limit = 1 << self.ncols
        for r in self.rows:
            if r < 0 or r >= limit:
                raise ValueError("row does not fit in ncols")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "Gf2Matrix":
        packed = []
        ncols = None
        for row in rows:
            v = Gf2Vector.from_bits(row)
            if ncols is None:
                ncols = v.length
            elif v.length != ncols:
                raise DimensionError("ragged rows")
            packed.append(v.value)
        return cls(tuple(packed), ncols or 0)

    @classmethod
    def from_strings(cls, lines: Iterable[str]) -> "Gf2Matrix":
        return cls.from_rows([int(ch) for ch in line.strip()] for line in lines)

    @classmethod
    def from_array(cls, array) -> "Gf2Matrix":
        a = np.asarray(array, dtype=np.uint8) % 2
        if a.ndim != 2:
            raise DimensionError("expected a 2-d array")
        return cls.from_rows(a.tolist()) if a.shape[0] else cls((), a.shape[1])

    @classmethod
    def from_columns(cls, columns: Sequence[int], nrows: int) -> "Gf2Matrix":
        rows = [0] * nrows
        for j, col in enumerate(columns):
            for i in range(nrows):
                if (col >> i) & 1:
                    rows[i] |= 1 << j
        return cls(tuple(rows), len(columns))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "Gf2Matrix":
        return cls((0,) * nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        return cls(tuple(1 << i for i in range(n)), n)

    @classmethod
    def random(cls, nrows: int, ncols: int, rng: np.random.Generator) -> "Gf2Matrix":
        a = rng.integers(0, 2, size=(nrows, ncols), dtype=np.uint8)
        return cls.from_array(a) if nrows else cls((), ncols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def columns(self) -> tuple[int, ...]:
        """Columns packed as integers (bit ``i`` is row ``i``)."""
        if self._cols is None:
            cols = [0] * self.ncols
            for i, r in enumerate(self.rows):
                while r:
                    low = r & -r
                    cols[low.bit_length() - 1] |= 1 << i
                    r ^= low
            object.__setattr__(self, "_cols", tuple(cols))
        return self._cols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.nrows and 0 <= j < self.ncols):
            raise IndexError(ij)
        return (self.rows[i] >> j) & 1

    def row(self, i: int) -> Gf2Vector:
        return Gf2Vector(self.rows[i], self.ncols)

    def column(self, j: int) -> Gf2Vector:
        return Gf2Vector(self.columns[j], self.nrows)

    def project_columns(self, indices: Sequence[int]) -> "Gf2Matrix":
        cols = self.columns
        return Gf2Matrix.from_columns([cols[j] for j in indices], self.nrows)

    def project_rows(self, indices: Sequence[int]) -> "Gf2Matrix":
        return Gf2Matrix(tuple(self.rows[i] for i in indices), self.ncols)

    def hstack(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if other.nrows != self.nrows:
            raise DimensionError("row counts differ")
        return Gf2Matrix(
            tuple(a | (b << self.ncols) for a, b in zip(self.rows, other.rows)),
            self.ncols + other.ncols,
        )

    def permute_columns(self, perm: "Permutation") -> "Gf2Matrix":
        """Return ``self @ P``: column ``j`` of the result is column ``perm[j]``."""
        if len(perm) != self.ncols:
            raise DimensionError("permutation size differs from column count")
        return self.project_columns(perm.images)

    def rank(self) -> int:
        return _rank(list(self.rows))

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            for j in range(self.ncols):
                out[i, j] = (r >> j) & 1
        return out

    def to_strings(self) -> list[str]:
        return [self.row(i).to_str() for i in range(self.nrows)]

    def __matmul__(self, v: Gf2Vector) -> Gf2Vector:
        return matvec(self, v)


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``range(n)``.

    As a column permutation, ``H @ P`` has column ``j`` equal to column
    ``images[j]`` of ``H``; on vectors ``P e'`` places ``e'[j]`` at
    coordinate ``images[j]``, so ``(H @ P) e' == H (P e')``.
    """

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError("not a permutation")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Permutation":
        return cls(tuple(int(i) for i in rng.permutation(n)))

    def __len__(self) -> int:
        return len(self.images)

    def __getitem__(self, j: int) -> int:
        return self.images[j]

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for j, i in enumerate(self.images):
            inv[i] = j
        return Permutation(tuple(inv))

    def compose(self, other: "Permutation") -> "Permutation":
        """``self @ other`` as column permutations."""
        return Permutation(tuple(self.images[j] for j in other.images))

    def apply(self, v: Gf2Vector) -> Gf2Vector:
        """``P v``."""
        if v.length != len(self.images):
            raise DimensionError("vector length differs from permutation size")
        value = 0
        for j, i in enumerate(self.images):
            if (v.value >> j) & 1:
                value |= 1 << i
        return Gf2Vector(value, v.length)

    def apply_inverse(self, v: Gf2Vector) -> Gf2Vector:
        """``P^{-1} v``."""
        return self.inverse().apply(v)


@dataclass(frozen=True)
class SdpInstance:
    h: Gf2Matrix
    s: Gf2Vector
    omega: int
    planted: Gf2Vector | None = None

    def __post_init__(self):
        if self.s.length != self.h.nrows:
            raise DimensionError("syndrome length differs from row count")
        if not 0 <= self.omega <= self.h.ncols:
            raise ValueError("omega out of range")
        if self.planted is not None and not self.is_solution(self.planted):
            raise ValueError("planted vector is not a solution")

    @property
    def n(self) -> int:
        return self.h.ncols

    @property
    def k(self) -> int:
        return self.h.ncols - self.h.nrows

    def is_solution(self, e: Gf2Vector | None) -> bool:
        return (
            e is not None
            and e.length == self.n
            and e.weight == self.omega
            and matvec(self.h, e) == self.s
        )

    def to_text(self) -> str:
        lines = [f"{self.n} {self.k} {self.omega}"]
        lines += self.h.to_strings()
        lines.append(self.s.to_str())
        if self.planted is not None:
            lines.append(self.planted.to_str())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SdpInstance":
        lines = [ln.strip() for ln in text.replace("\r\n", "\n").split("\n")]
        while lines and not lines[-1]:
            lines.pop()
        if not lines:
            raise InstanceFormatError("empty instance")
        try:
            n, k, omega = (int(x) for x in lines[0].split())
        except ValueError as exc:
            raise InstanceFormatError(f"line 1: expected 'n k omega', got {lines[0]!r}") from exc
        if not 0 <= k < n:
            raise InstanceFormatError(f"line 1: need 0 <= k < n, got n={n} k={k}")
        r = n - k
        if len(lines) not in (r + 2, r + 3):
            raise InstanceFormatError(f"expected {r + 2} or {r + 3} lines, got {len(lines)}")
        for lineno in range(1, r + 1):
            if len(lines[lineno]) != n or set(lines[lineno]) - {"0", "1"}:
                raise InstanceFormatError(f"line {lineno + 1}: expected {n} binary digits")
        if len(lines[r + 1]) != r or set(lines[r + 1]) - {"0", "1"}:
            raise InstanceFormatError(f"line {r + 2}: expected syndrome of {r} binary digits")
        planted = None
        if len(lines) == r + 3:
            if len(lines[r + 2]) != n or set(lines[r + 2]) - {"0", "1"}:
                raise InstanceFormatError(f"line {r + 3}: expected error of {n} binary digits")
            planted = Gf2Vector.from_str(lines[r + 2])
        h = Gf2Matrix.from_strings(lines[1 : r + 1])
        s = Gf2Vector.from_str(lines[r + 1])
        try:
            return cls(h, s, omega, planted)
        except ValueError as exc:
            raise InstanceFormatError(str(exc)) from exc

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8", newline="\n")

    @classmethod
    def read(cls, path: str | Path) -> "SdpInstance":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def matvec(m: Gf2Matrix, v: Gf2Vector) -> Gf2Vector:
    """XOR of the columns of ``m`` selected by the 1-bits of ``v``."""
    if v.length != m.ncols:
        raise DimensionError(f"vector length {v.length} != column count {m.ncols}")
    value = 0
    for i, r in enumerate(m.rows):
        value |= (_popcount(r & v.value) & 1) << i
    return Gf2Vector(value, m.nrows)


def _rank(rows: list[int]) -> int:
    rank = 0
    rows = [r for r in rows if r]
    while rows:
        pivot = rows.pop()
        low = pivot & -pivot
        rows = [r ^ pivot if r & low else r for r in rows]
        rows = [r for r in rows if r]
        rank += 1
    return rank


def rank(m: Gf2Matrix) -> int:
    return m.rank()


def systematic_form(m: Gf2Matrix, s: Gf2Vector) -> tuple[Gf2Matrix, Gf2Vector, Permutation]:
    """Bring ``(m | s)`` to ``(I | H')`` by row operations and a column permutation.

    Pivots are taken from the leftmost available column, so when the first
    ``r`` columns of ``m`` are already independent the permutation is the
    identity.  Returns ``(m', s', p)`` with ``m' = Q m P`` and ``s' = Q s``.
    """
    r, n = m.shape
    if s.length != r:
        raise DimensionError("syndrome length differs from row count")
    if r > n:
        raise RankError(m.rank(), r)
    # augmented rows: syndrome bit stored at position n
    rows = [row | (((s.value >> i) & 1) << n) for i, row in enumerate(m.rows)]
    order = list(range(n))
    for i in range(r):
        col_pos = None
        piv_row = None
        for pos in range(i, n):
            bit = 1 << order[pos]
            for t in range(i, r):
                if rows[t] & bit:
                    col_pos, piv_row = pos, t
                    break
            if col_pos is not None:
                break
        if col_pos is None:
            raise RankError(i, r)
        order[i], order[col_pos] = order[col_pos], order[i]
        rows[i], rows[piv_row] = rows[piv_row], rows[i]
        bit = 1 << order[i]
        for t in range(r):
            if t != i and rows[t] & bit:
                rows[t] ^= rows[i]
    perm = Permutation(tuple(order))
    new_rows = []
    s_val = 0
    for i, row in enumerate(rows):
        packed = 0
        for j, src in enumerate(order):
            if (row >> src) & 1:
                packed |= 1 << j
        new_rows.append(packed)
        s_val |= ((row >> n) & 1) << i
    return Gf2Matrix(tuple(new_rows), n), Gf2Vector(s_val, r), perm


def solve_linear(a: Gf2Matrix, t: Gf2Vector) -> Gf2Vector | None:
    """Solve ``a x = t`` for square ``a``; ``None`` when ``a`` is singular."""
    n, c = a.shape
    if n != c:
        raise DimensionError(f"matrix is {n}x{c}, expected square")
    if t.length != n:
        raise DimensionError("target length differs from matrix size")
    rows = [row | (((t.value >> i) & 1) << n) for i, row in enumerate(a.rows)]
    for col in range(n):
        bit = 1 << col
        piv = next((i for i in range(col, n) if rows[i] & bit), None)
        if piv is None:
            return None
        rows[col], rows[piv] = rows[piv], rows[col]
        for i in range(n):
            if i != col and rows[i] & bit:
                rows[i] ^= rows[col]
    return Gf2Vector(sum(((rows[i] >> n) & 1) << i for i in range(n)), n)


def random_weight_vector(n: int, weight: int, rng: np.random.Generator) -> Gf2Vector:
    support = rng.choice(n, size=weight, replace=False) if weight else []
    return Gf2Vector.from_support((int(i) for i in support), n)


def random_full_rank(nrows: int, ncols: int, rng: np.random.Generator) -> Gf2Matrix:
    if nrows > ncols:
        raise ValueError("cannot have full row rank with more rows than columns")
    while True:
        h = Gf2Matrix.random(nrows, ncols, rng)
        if h.rank() == nrows:
            return h


def random_instance(n: int, k: int, omega: int, seed: int | None = None) -> SdpInstance:
    """Uniform full-row-rank ``H``, uniform weight-``omega`` error, ``s = H e``."""
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got n={n} k={k}")
    if not 0 < omega <= n:
        raise ValueError(f"need 0 < omega <= n, got omega={omega}")
    rng = np.random.default_rng(seed)
    h = random_full_rank(n - k, n, rng)
    e = random_weight_vector(n, omega, rng)
    return SdpInstance(h, matvec(h, e), omega, e)


def binom_log2(n: float, k: float) -> float:
    """``log2 C(n, k)``.

    Integer arguments up to a few thousand use exact big integers; beyond
    that (or for real arguments) the log-gamma form is used.
    """
    if k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got n={n} k={k}")
    if float(n).is_integer() and float(k).is_integer() and n <= 20000:
        return math.log2(math.comb(int(n), int(k)))
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)) / math.log(2)
