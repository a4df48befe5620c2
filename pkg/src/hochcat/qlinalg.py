"""Exact linear algebra over the rationals.

Everything in this package reduces to ranks, kernels and exactness of
sparse matrices with Fraction entries.  No floating point anywhere: the
assertions being verified are exact isomorphisms and exact sequences, so
a single rounded pivot would make every verdict worthless.

Rank goes through fraction-free (Bareiss-style) elimination on integer
rescalings of the rows; kernels, images and solving go through a reduced
row echelon form over Fraction with deterministic pivoting (first nonzero
column, rows in declaration order), so all derived bases are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class DimensionMismatch(Exception):
    """Shapes of composed or concatenated matrices disagree."""


class NotAComplex(Exception):
    """d^{i+1} d^i has a nonzero entry; carries (i, row, col, value)."""

    def __init__(self, degree, row, col, value):
        self.degree, self.row, self.col, self.value = degree, row, col, value
        super().__init__(f"d^{degree + 1} d^{degree} nonzero at ({row},{col}): {value}")


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class QMatrix:
    """Sparse rational matrix; entries is a dict (row, col) -> nonzero Fraction."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries=None):
        self.rows = rows
        self.cols = cols
        self.entries: dict[tuple[int, int], Fraction] = {}
        if entries:
            for (r, c), v in entries.items():
                v = _q(v)
                if v != 0:
                    if not (0 <= r < rows and 0 <= c < cols):
                        raise DimensionMismatch(f"entry ({r},{c}) outside {rows}x{cols}")
                    self.entries[(r, c)] = v

    # construction -----------------------------------------------------

    @staticmethod
    def zeros(rows: int, cols: int) -> "QMatrix":
        return QMatrix(rows, cols)

    @staticmethod
    def identity(n: int) -> "QMatrix":
        return QMatrix(n, n, {(i, i): ONE for i in range(n)})

    @staticmethod
    def from_rows(rows: Sequence[Sequence]) -> "QMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        ent = {}
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise DimensionMismatch("ragged rows")
            for j, v in enumerate(row):
                if _q(v) != 0:
                    ent[(i, j)] = _q(v)
        return QMatrix(nrows, ncols, ent)

    @staticmethod
    def from_columns(cols: Sequence[Sequence]) -> "QMatrix":
        ncols = len(cols)
        nrows = len(cols[0]) if cols else 0
        ent = {}
        for j, col in enumerate(cols):
            for i, v in enumerate(col):
                if _q(v) != 0:
                    ent[(i, j)] = _q(v)
        return QMatrix(nrows, ncols, ent)

    # basic ops --------------------------------------------------------

    def copy(self) -> "QMatrix":
        m = QMatrix(self.rows, self.cols)
        m.entries = dict(self.entries)
        return m

    def __eq__(self, other):
        return (
            isinstance(other, QMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self):
        raise TypeError("QMatrix is mutable during assembly; not hashable")

    def __repr__(self):
        return f"QMatrix({self.rows}x{self.cols}, {len(self.entries)} nonzero)"

    def is_zero(self) -> bool:
        return not self.entries

    def set(self, r: int, c: int, v) -> None:
        v = _q(v)
        if v == 0:
            self.entries.pop((r, c), None)
        else:
            self.entries[(r, c)] = v

    def add_at(self, r: int, c: int, v) -> None:
        cur = self.entries.get((r, c), ZERO) + _q(v)
        if cur == 0:
            self.entries.pop((r, c), None)
        else:
            self.entries[(r, c)] = cur

    def get(self, r: int, c: int) -> Fraction:
        return self.entries.get((r, c), ZERO)

    def __add__(self, other: "QMatrix") -> "QMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatch("add shape mismatch")
        out = self.copy()
        for rc, v in other.entries.items():
            out.add_at(*rc, v)
        return out

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        return self + other.scale(-1)

    def __neg__(self) -> "QMatrix":
        return self.scale(-1)

    def scale(self, a) -> "QMatrix":
        a = _q(a)
        if a == 0:
            return QMatrix(self.rows, self.cols)
        return QMatrix(self.rows, self.cols, {rc: a * v for rc, v in self.entries.items()})

    def __mul__(self, other: "QMatrix") -> "QMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"mul {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        rows_of_other: dict[int, list[tuple[int, Fraction]]] = {}
        for (k, j), v in other.entries.items():
            rows_of_other.setdefault(k, []).append((j, v))
        out = QMatrix(self.rows, other.cols)
        for (i, k), a in self.entries.items():
            for j, b in rows_of_other.get(k, ()):
                out.add_at(i, j, a * b)
        return out

    def transpose(self) -> "QMatrix":
        return QMatrix(self.cols, self.rows, {(c, r): v for (r, c), v in self.entries.items()})

    def hstack(self, other: "QMatrix") -> "QMatrix":
        if self.rows != other.rows:
            raise DimensionMismatch("hstack row mismatch")
        ent = dict(self.entries)
        for (r, c), v in other.entries.items():
            ent[(r, c + self.cols)] = v
        return QMatrix(self.rows, self.cols + other.cols, ent)

    def vstack(self, other: "QMatrix") -> "QMatrix":
        if self.cols != other.cols:
            raise DimensionMismatch("vstack col mismatch")
        ent = dict(self.entries)
        for (r, c), v in other.entries.items():
            ent[(r + self.rows, c)] = v
        return QMatrix(self.rows + other.rows, self.cols, ent)

    def column(self, j: int) -> tuple[Fraction, ...]:
        col = [ZERO] * self.rows
        for (r, c), v in self.entries.items():
            if c == j:
                col[r] = v
        return tuple(col)

    def apply(self, vec: Sequence) -> tuple[Fraction, ...]:
        if len(vec) != self.cols:
            raise DimensionMismatch("apply length mismatch")
        out = [ZERO] * self.rows
        for (r, c), v in self.entries.items():
            x = vec[c]
            if x:
                out[r] += v * _q(x)
        return tuple(out)

    def restrict(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "QMatrix":
        rmap = {r: i for i, r in enumerate(row_idx)}
        cmap = {c: j for j, c in enumerate(col_idx)}
        ent = {}
        for (r, c), v in self.entries.items():
            if r in rmap and c in cmap:
                ent[(rmap[r], cmap[c])] = v
        return QMatrix(len(row_idx), len(col_idx), ent)

    def dense(self) -> list[list[Fraction]]:
        out = [[ZERO] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def _sparse_rows(self) -> list[dict[int, Fraction]]:
        rows: list[dict[int, Fraction]] = [dict() for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            rows[r][c] = v
        return rows


# elimination ------------------------------------------------------------


def _integerize(row: dict[int, Fraction]) -> dict[int, int]:
    # clear denominators and strip content; preserves the row space
    if not row:
        return {}
    den = 1
    for v in row.values():
        den = den * v.denominator // gcd(den, v.denominator)
    ints = {c: int(v * den) for c, v in row.items()}
    g = 0
    for v in ints.values():
        g = gcd(g, abs(v))
    if g > 1:
        ints = {c: v // g for c, v in ints.items()}
    return ints


def rank(m: QMatrix) -> int:
    """Rank by fraction-free elimination on integer-rescaled sparse rows."""
    rows = [_integerize(r) for r in m._sparse_rows()]
    rows = [r for r in rows if r]
    rk = 0
    prev_pivot = 1
    while rows:
        piv_col = min(min(r) for r in rows)
        # deterministic pivot: first (declaration-order) row hitting the column
        pi = next(i for i, r in enumerate(rows) if piv_col in r)
        pivot_row = rows.pop(pi)
        pv = pivot_row[piv_col]
        nxt = []
        for r in rows:
            if piv_col in r:
                f = r[piv_col]
                new = {}
                for c in set(r) | set(pivot_row):
                    if c == piv_col:
                        continue
                    v = pv * r.get(c, 0) - f * pivot_row.get(c, 0)
                    if v:
                        # Bareiss division keeps entries small and stays exact
                        new[c] = v // prev_pivot
                if new:
                    nxt.append(new)
            elif r:
                nxt.append({c: (pv * v) // prev_pivot for c, v in r.items()})
        rows = nxt
        prev_pivot = pv
        rk += 1
    return rk


def rref(m: QMatrix) -> tuple[list[int], list[dict[int, Fraction]]]:
    """Reduced row echelon form.

    Returns (pivot column list, reduced nonzero rows); row i has its pivot 1
    in column pivots[i] and zeros above and below it.
    """
    rows = [r for r in m._sparse_rows()]
    reduced: list[dict[int, Fraction]] = []
    pivots: list[int] = []
    for row in rows:
        row = dict(row)
        for pcol, pr in zip(pivots, reduced):
            f = row.get(pcol)
            if f:
                for c, v in pr.items():
                    nv = row.get(c, ZERO) - f * v
                    if nv == 0:
                        row.pop(c, None)
                    else:
                        row[c] = nv
        if not row:
            continue
        pcol = min(row)
        pv = row[pcol]
        row = {c: v / pv for c, v in row.items()}
        for i, pr in enumerate(reduced):
            f = pr.get(pcol)
            if f:
                for c, v in row.items():
                    nv = pr.get(c, ZERO) - f * v
                    if nv == 0:
                        pr.pop(c, None)
                    else:
                        pr[c] = nv
        # keep pivot columns sorted so back-substitution is deterministic
        pos = 0
        while pos < len(pivots) and pivots[pos] < pcol:
            pos += 1
        pivots.insert(pos, pcol)
        reduced.insert(pos, row)
    return pivots, reduced


def kernel_basis(m: QMatrix) -> list[tuple[Fraction, ...]]:
    """Basis of the right kernel; one vector per free column, ascending."""
    pivots, reduced = rref(m)
    pivot_set = set(pivots)
    basis = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        vec = [ZERO] * m.cols
        vec[free] = ONE
        for pcol, row in zip(pivots, reduced):
            v = row.get(free)
            if v:
                vec[pcol] = -v
        basis.append(tuple(vec))
    return basis


def pivot_columns(m: QMatrix) -> list[int]:
    return rref(m)[0]


def image_basis(m: QMatrix) -> list[tuple[Fraction, ...]]:
    """Original columns of m at its pivot positions (a basis of the image)."""
    return [m.column(j) for j in pivot_columns(m)]


def solve(m: QMatrix, b: Sequence) -> tuple[Fraction, ...] | None:
    """One solution of m x = b with free coordinates pinned to zero, or None."""
    if len(b) != m.rows:
        raise DimensionMismatch("rhs length mismatch")
    rhs = QMatrix(m.rows, 1, {(i, 0): _q(v) for i, v in enumerate(b) if _q(v) != 0})
    aug = m.hstack(rhs)
    pivots, reduced = rref(aug)
    x = [ZERO] * m.cols
    for pcol, row in zip(pivots, reduced):
        if pcol == m.cols:
            return None
        x[pcol] = row.get(m.cols, ZERO)
    return tuple(x)


def nullity(m: QMatrix) -> int:
    return m.cols - rank(m)


# complexes ----------------------------------------------------------------


@dataclass
class ComplexSegment:
    """Consecutive differentials d^0..d^K; d^i maps degree i to degree i+1."""

    diffs: list[QMatrix]
    labels: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.labels:
            self.labels = list(range(len(self.diffs)))
        for i in range(len(self.diffs) - 1):
            if self.diffs[i + 1].cols != self.diffs[i].rows:
                raise DimensionMismatch(f"d^{i + 1} domain != d^{i} codomain")
        for i in range(len(self.diffs) - 1):
            prod = self.diffs[i + 1] * self.diffs[i]
            if not prod.is_zero():
                (r, c), v = next(iter(sorted(prod.entries.items())))
                raise NotAComplex(self.labels[i], r, c, v)

    def dims(self) -> list[int]:
        out = [d.cols for d in self.diffs]
        out.append(self.diffs[-1].rows)
        return out


def cohomology_dims(seg: ComplexSegment) -> list[int]:
    """dim ker/im in each degree; the top degree takes the full space as kernel."""
    ranks = [rank(d) for d in seg.diffs]
    nullities = [d.cols - r for d, r in zip(seg.diffs, ranks)]
    out = [nullities[0]]
    for i in range(1, len(seg.diffs)):
        out.append(nullities[i] - ranks[i - 1])
    out.append(seg.diffs[-1].rows - ranks[-1])
    return out


@dataclass
class ExactnessVerdict:
    ok: bool
    failing_position: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def is_exact_sequence(
    maps: Sequence[QMatrix],
    require_injective_start: bool = True,
    require_surjective_end: bool = True,
) -> ExactnessVerdict:
    """Exactness of V_0 -> V_1 -> ... -> V_k at the interior positions.

    Interior position i is exact iff the composite vanishes and
    rank(maps[i]) + rank(maps[i+1]) = dim V_{i+1}.  The flanks ask for
    injectivity of the first map / surjectivity of the last when flagged,
    which turns the chain into a verified short (or long) exact sequence.
    """
    maps = list(maps)
    for i in range(len(maps) - 1):
        if maps[i + 1].cols != maps[i].rows:
            raise DimensionMismatch(f"maps {i} and {i + 1} not composable")
    ranks = [rank(f) for f in maps]
    if require_injective_start and ranks[0] != maps[0].cols:
        return ExactnessVerdict(False, 0, "first map not injective")
    for i in range(len(maps) - 1):
        comp = maps[i + 1] * maps[i]
        if not comp.is_zero():
            return ExactnessVerdict(False, i + 1, "composite nonzero")
        if ranks[i] + ranks[i + 1] != maps[i].rows:
            return ExactnessVerdict(
                False, i + 1,
                f"im(rank {ranks[i]}) != ker(dim {maps[i].rows - ranks[i + 1]})",
            )
    if require_surjective_end and ranks[-1] != maps[-1].rows:
        return ExactnessVerdict(False, len(maps), "last map not surjective")
    return ExactnessVerdict(True)


# subspaces and quotients ---------------------------------------------------


class Subspace:
    """Column span with deterministic coordinates for membership queries."""

    def __init__(self, ambient_dim: int, vectors: Iterable[Sequence]):
        self.ambient_dim = ambient_dim
        self.basis = [tuple(_q(x) for x in v) for v in vectors]
        self._mat = QMatrix.from_columns(self.basis) if self.basis else QMatrix(ambient_dim, 0)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coords(self, vec: Sequence) -> tuple[Fraction, ...] | None:
        if self.ambient_dim == 0:
            return () if not any(_q(x) for x in vec) else None
        return solve(self._mat, vec)

    def contains(self, vec) -> bool:
        return self.coords(vec) is not None


def quotient_representatives(
    sub: list[tuple[Fraction, ...]], space: list[tuple[Fraction, ...]], ambient_dim: int
) -> list[tuple[Fraction, ...]]:
    """Vectors from `space` completing `sub` to a basis of span(sub+space).

    Used for cohomology: sub = coboundaries, space = cocycles, output =
    representative cocycles of a basis of the quotient.  Deterministic:
    greedy over `space` in order, keeping vectors that enlarge the span.
    """
    kept: list[tuple[Fraction, ...]] = []
    current = list(sub)
    base_rank = rank(QMatrix.from_columns(current)) if current else 0
    for v in space:
        trial = QMatrix.from_columns(current + [v])
        r = rank(trial)
        if r > base_rank:
            kept.append(v)
            current.append(v)
            base_rank = r
    return kept
