"""Exact rational graded linear algebra.

Matrices are plain ``list[list[Fraction]]`` (row major).  Every rank, kernel
and homology computation in the package goes through :func:`reduce`, so the
pivot rule below fixes the output bases of the whole library.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Rational = Fraction
Matrix = list[list[Fraction]]


class LinearAlgebraError(ValueError):
    pass


class NotAChainComplex(LinearAlgebraError):
    pass


class NotAChainMap(LinearAlgebraError):
    pass


def to_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass an int, Fraction or 'p/q' string")
    return Fraction(value)


def zeros(rows: int, cols: int) -> Matrix:
    return [[Fraction(0)] * cols for _ in range(rows)]


def identity(n: int) -> Matrix:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = Fraction(1)
    return m


def as_matrix(rows: Iterable[Iterable]) -> Matrix:
    return [[to_rational(x) for x in row] for row in rows]


def shape(m: Matrix, cols: int | None = None) -> tuple[int, int]:
    if not m:
        return 0, (cols or 0)
    return len(m), len(m[0])


def matmul(a: Matrix, b: Matrix, inner: int | None = None, cols: int | None = None) -> Matrix:
    """Product ``a @ b``.  ``cols`` is needed when ``b`` has no rows."""
    n = len(a)
    k = len(b) if inner is None else inner
    m = len(b[0]) if b else (cols or 0)
    out = zeros(n, m)
    for i in range(n):
        row = a[i]
        target = out[i]
        for t in range(k):
            x = row[t]
            if x:
                brow = b[t]
                for j in range(m):
                    y = brow[j]
                    if y:
                        target[j] += x * y
    return out


def matvec(a: Matrix, v: Sequence[Fraction]) -> list[Fraction]:
    return [sum((x * y for x, y in zip(row, v) if x and y), Fraction(0)) for row in a]


def transpose(m: Matrix, cols: int | None = None) -> Matrix:
    if not m:
        return [[] for _ in range(cols or 0)]
    return [list(col) for col in zip(*m)]


def is_zero(m: Matrix) -> bool:
    return all(not x for row in m for x in row)


def _pivot_key(x: Fraction) -> tuple[int, int]:
    return (x.denominator, abs(x.numerator))


@dataclass(frozen=True)
class Reduction:
    """Result of :func:`reduce`.

    ``rref`` holds the nonzero rows of the reduced row echelon form,
    ``pivots`` their pivot columns.  ``kernel`` and ``image`` are bases
    (as coordinate vectors) of the null space and the column space.
    """

    rows: int
    cols: int
    rank: int
    pivots: tuple[int, ...]
    rref: tuple[tuple[Fraction, ...], ...]
    kernel: tuple[tuple[Fraction, ...], ...]
    image: tuple[tuple[Fraction, ...], ...]


def _eliminate(rows: list[dict[int, Fraction]], ncols: int, stop_col: int | None = None):
    """Sparse Gauss-Jordan elimination in place.

    Columns are scanned left to right; among rows with a nonzero entry in the
    current column the pivot is the one with the smallest
    (denominator, |numerator|), ties going to the lowest row index.
    Returns (pivot rows, pivot columns) in pivot order.
    """
    remaining = [r for r in rows if r]
    pivot_rows: list[dict[int, Fraction]] = []
    pivot_cols: list[int] = []
    limit = ncols if stop_col is None else stop_col
    for col in range(limit):
        best = None
        best_idx = -1
        for idx, r in enumerate(remaining):
            x = r.get(col)
            if x:
                if best is None or _pivot_key(x) < _pivot_key(best[col]):
                    best = r
                    best_idx = idx
        if best is None:
            continue
        remaining.pop(best_idx)
        inv = 1 / best[col]
        if inv != 1:
            for c in best:
                best[c] *= inv
        for r in remaining:
            x = r.get(col)
            if x:
                for c, y in best.items():
                    v = r.get(c, 0) - x * y
                    if v:
                        r[c] = v
                    else:
                        r.pop(c, None)
        for r in pivot_rows:
            x = r.get(col)
            if x:
                for c, y in best.items():
                    v = r.get(c, 0) - x * y
                    if v:
                        r[c] = v
                    else:
                        r.pop(c, None)
        pivot_rows.append(best)
        pivot_cols.append(col)
        remaining = [r for r in remaining if r]
        if not remaining:
            break
    return pivot_rows, pivot_cols


def _sparse_rows(m: Matrix) -> list[dict[int, Fraction]]:
    return [{j: to_rational(x) for j, x in enumerate(row) if x} for row in m]


def reduce(matrix: Matrix, cols: int | None = None) -> Reduction:
    """Row reduce ``matrix`` exactly.

    ``cols`` gives the column count when the matrix has no rows.
    """
    nrows = len(matrix)
    ncols = len(matrix[0]) if matrix else (cols or 0)
    rows = _sparse_rows(matrix)
    prow, pcol = _eliminate(rows, ncols)
    rref = tuple(tuple(r.get(j, Fraction(0)) for j in range(ncols)) for r in prow)
    pivset = set(pcol)
    kernel = []
    for free in range(ncols):
        if free in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for r, p in zip(prow, pcol):
            x = r.get(free)
            if x:
                v[p] = -x
        kernel.append(tuple(v))
    image = tuple(tuple(to_rational(matrix[i][p]) for i in range(nrows)) for p in pcol)
    return Reduction(nrows, ncols, len(pcol), tuple(pcol), rref, tuple(kernel), image)


def rank(matrix: Matrix, cols: int | None = None) -> int:
    ncols = len(matrix[0]) if matrix else (cols or 0)
    _, pcol = _eliminate(_sparse_rows(matrix), ncols)
    return len(pcol)


def sparse_rank(rows: Iterable[Mapping[int, Fraction]], ncols: int) -> int:
    """Rank of a matrix given as sparse rows ``{column: value}``."""
    _, pcol = _eliminate([dict(r) for r in rows], ncols)
    return len(pcol)


def solve_many(a: Matrix, b: Matrix, a_cols: int | None = None) -> Matrix | None:
    """Return X with ``a @ X == b`` (free variables set to zero), or None.

    ``b`` is given column-blocked like ``a`` (same number of rows).
    """
    nrows = len(a)
    ncols = len(a[0]) if a else (a_cols or 0)
    nrhs = len(b[0]) if b else 0
    if nrows == 0:
        return zeros(ncols, nrhs)
    rows = []
    for i in range(nrows):
        r = {j: to_rational(x) for j, x in enumerate(a[i]) if x}
        for j, x in enumerate(b[i]):
            if x:
                r[ncols + j] = to_rational(x)
        rows.append(r)
    prow, pcol = _eliminate(rows, ncols + nrhs, stop_col=ncols)
    used = set(id(r) for r in prow)
    for r in rows:
        if id(r) not in used and r:
            # a leftover row has no entries in the A block, so a nonzero
            # entry here is an inconsistency
            return None
    x = zeros(ncols, nrhs)
    for r, p in zip(prow, pcol):
        for c, v in r.items():
            if c >= ncols:
                x[p][c - ncols] = v
    return x


def solve(a: Matrix, b: Sequence[Fraction], a_cols: int | None = None) -> list[Fraction] | None:
    sol = solve_many(a, [[to_rational(x)] for x in b], a_cols=a_cols)
    if sol is None:
        return None
    return [row[0] for row in sol]


# ---------------------------------------------------------------------------
# graded objects


@dataclass(frozen=True)
class GradedVectorSpace:
    """Finite-type graded vector space: degree -> ordered basis names."""

    components: Mapping[int, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, names in self.components.items():
            names = tuple(names)
            if len(set(names)) != len(names):
                raise LinearAlgebraError(f"duplicate basis names in degree {k}")
            if names:
                clean[int(k)] = names
        object.__setattr__(self, "components", dict(sorted(clean.items())))

    def dim(self, k: int) -> int:
        return len(self.components.get(k, ()))

    def basis(self, k: int) -> tuple[str, ...]:
        return self.components.get(k, ())

    def degrees(self) -> list[int]:
        return list(self.components)

    def dims(self) -> dict[int, int]:
        return {k: len(v) for k, v in self.components.items()}

    def total_dim(self) -> int:
        return sum(len(v) for v in self.components.values())

    def shifted(self, by: int) -> "GradedVectorSpace":
        return GradedVectorSpace({k + by: v for k, v in self.components.items()})

    @classmethod
    def from_dims(cls, dims: Mapping[int, int], prefix: str = "e") -> "GradedVectorSpace":
        return cls({k: tuple(f"{prefix}{k}_{i}" for i in range(n)) for k, n in dims.items()})


@dataclass(frozen=True)
class GradedLinearMap:
    """Degree-homogeneous linear map; ``matrices[k]`` maps degree k to k+degree."""

    source: GradedVectorSpace
    target: GradedVectorSpace
    degree: int = 0
    matrices: Mapping[int, Matrix] = field(default_factory=dict)

    def __post_init__(self):
        full = {}
        for k in self.source.degrees():
            m = self.matrices.get(k)
            rows, cols = self.target.dim(k + self.degree), self.source.dim(k)
            if m is None:
                m = zeros(rows, cols)
            if len(m) != rows or any(len(r) != cols for r in m):
                raise LinearAlgebraError(
                    f"matrix in degree {k} has wrong shape, expected {rows}x{cols}"
                )
            full[k] = m
        object.__setattr__(self, "matrices", full)

    def matrix(self, k: int) -> Matrix:
        if k in self.matrices:
            return self.matrices[k]
        return zeros(self.target.dim(k + self.degree), self.source.dim(k))

    def apply(self, k: int, vector: Sequence[Fraction]) -> list[Fraction]:
        return matvec(self.matrix(k), vector)

    def compose(self, first: "GradedLinearMap") -> "GradedLinearMap":
        """``self ∘ first``."""
        if first.target != self.source:
            raise LinearAlgebraError("cannot compose: target/source mismatch")
        mats = {}
        for k in first.source.degrees():
            mid = self.source.dim(k + first.degree)
            mats[k] = matmul(self.matrix(k + first.degree), first.matrix(k), inner=mid,
                             cols=first.source.dim(k))
        return GradedLinearMap(first.source, self.target, first.degree + self.degree, mats)

    def is_zero(self) -> bool:
        return all(is_zero(m) for m in self.matrices.values())

    @classmethod
    def identity(cls, space: GradedVectorSpace) -> "GradedLinearMap":
        return cls(space, space, 0, {k: identity(space.dim(k)) for k in space.degrees()})

    @classmethod
    def zero(cls, source: GradedVectorSpace, target: GradedVectorSpace, degree: int = 0):
        return cls(source, target, degree, {})


@dataclass(frozen=True)
class ChainComplex:
    """A graded space with a degree -1 differential.

    ``truncation`` is the top degree that was actually computed; homology is
    trusted only below it.  ``None`` means the complex is complete.
    """

    space: GradedVectorSpace
    differential: GradedLinearMap
    truncation: int | None = None

    def __post_init__(self):
        d = self.differential
        if d.degree != -1:
            raise NotAChainComplex("differential must have degree -1")
        if d.source != self.space or d.target != self.space:
            raise NotAChainComplex("differential must be an endomorphism of the space")
        for k in self.space.degrees():
            if self.space.dim(k - 1) == 0:
                continue
            sq = matmul(d.matrix(k - 1), d.matrix(k), inner=self.space.dim(k - 1),
                        cols=self.space.dim(k))
            if not is_zero(sq):
                raise NotAChainComplex(f"d∘d != 0 starting in degree {k}")

    def trusted(self, k: int) -> bool:
        return self.truncation is None or k < self.truncation

    def top_trusted(self) -> int:
        degs = self.space.degrees()
        top = max(degs) if degs else 0
        return top if self.truncation is None else min(top, self.truncation - 1)


@dataclass(frozen=True)
class HomologyDegree:
    """Homology in one degree: representative cycles plus a coordinate solver."""

    degree: int
    representatives: tuple[tuple[Fraction, ...], ...]
    boundaries: tuple[tuple[Fraction, ...], ...]
    chain_dim: int

    @property
    def dim(self) -> int:
        return len(self.representatives)

    def _system(self) -> Matrix:
        cols = list(self.representatives) + list(self.boundaries)
        return [[c[i] for c in cols] for i in range(self.chain_dim)]

    def coordinates_many(self, cycles: Sequence[Sequence[Fraction]]) -> Matrix:
        """Homology coordinates of the given cycles (one column each)."""
        if not cycles:
            return [[] for _ in range(self.dim)]
        b = [[to_rational(c[i]) for c in cycles] for i in range(self.chain_dim)]
        x = solve_many(self._system(), b, a_cols=self.dim + len(self.boundaries))
        if x is None:
            raise NotAChainMap(f"vector in degree {self.degree} is not a cycle")
        return x[: self.dim]

    def coordinates(self, cycle: Sequence[Fraction]) -> list[Fraction]:
        return [row[0] for row in self.coordinates_many([cycle])]

    def is_boundary(self, cycle: Sequence[Fraction]) -> bool:
        if not self.boundaries:
            return all(not x for x in cycle)
        b = [[col[i] for col in self.boundaries] for i in range(self.chain_dim)]
        return solve(b, cycle, a_cols=len(self.boundaries)) is not None


@dataclass(frozen=True)
class Homology:
    complex: ChainComplex
    degrees: Mapping[int, HomologyDegree]

    def dim(self, k: int) -> int:
        h = self.degrees.get(k)
        return h.dim if h else 0

    def dims(self, upto: int | None = None) -> dict[int, int]:
        return {k: h.dim for k, h in self.degrees.items()
                if h.dim and (upto is None or k <= upto)}

    def as_space(self, prefix: str = "h") -> GradedVectorSpace:
        return GradedVectorSpace.from_dims(self.dims(), prefix)


def homology(complex: ChainComplex, upto: int | None = None) -> Homology:
    """Homology with representative cycles in every trusted degree.

    Representatives are chosen by reducing [boundaries | cycles] column-wise
    and keeping the cycle columns that become pivots.
    """
    space = complex.space
    d = complex.differential
    top = complex.top_trusted()
    if upto is not None:
        top = min(top, upto)
    out = {}
    for k in space.degrees():
        if k > top:
            continue
        n = space.dim(k)
        dk = d.matrix(k)
        cycles = list(reduce(dk, cols=n).kernel) if space.dim(k - 1) else [
            tuple(Fraction(int(i == j)) for i in range(n)) for j in range(n)
        ]
        if space.dim(k + 1):
            bred = reduce(d.matrix(k + 1), cols=space.dim(k + 1))
            bounds = list(bred.image)
        else:
            bounds = []
        cols = bounds + cycles
        if cols:
            mat = [[c[i] for c in cols] for i in range(n)]
            red = reduce(mat, cols=len(cols))
            reps = [cols[p] for p in red.pivots if p >= len(bounds)]
        else:
            reps = []
        out[k] = HomologyDegree(k, tuple(tuple(r) for r in reps), tuple(tuple(b) for b in bounds), n)
    return Homology(complex, out)


def homology_dims(complex: ChainComplex, upto: int | None = None) -> dict[int, int]:
    """Per-degree Betti numbers via ranks only (no representatives)."""
    space = complex.space
    d = complex.differential
    top = complex.top_trusted()
    if upto is not None:
        top = min(top, upto)
    ranks: dict[int, int] = {}

    def rk(k: int) -> int:
        if k not in ranks:
            if space.dim(k) == 0 or space.dim(k - 1) == 0:
                ranks[k] = 0
            else:
                ranks[k] = rank(d.matrix(k), cols=space.dim(k))
        return ranks[k]

    out = {}
    for k in space.degrees():
        if k > top:
            continue
        h = space.dim(k) - rk(k) - rk(k + 1)
        if h:
            out[k] = h
    return out


def check_chain_map(f: GradedLinearMap, source: ChainComplex, target: ChainComplex) -> None:
    if f.degree != 0:
        raise NotAChainMap("chain maps have degree 0")
    for k in source.space.degrees():
        lhs = matmul(target.differential.matrix(k), f.matrix(k), inner=target.space.dim(k),
                     cols=source.space.dim(k))
        rhs = matmul(f.matrix(k - 1), source.differential.matrix(k), inner=source.space.dim(k - 1),
                     cols=source.space.dim(k))
        if lhs != rhs:
            raise NotAChainMap(f"f does not commute with d in degree {k}")


def induced_map(f: GradedLinearMap, hs: Homology, ht: Homology) -> dict[int, Matrix]:
    """Matrices of H(f) in the chosen homology bases, per degree."""
    out = {}
    for k, hk in hs.degrees.items():
        tk = ht.degrees.get(k)
        if tk is None:
            continue
        images = [f.apply(k, list(r)) for r in hk.representatives]
        out[k] = tk.coordinates_many(images) if images else [[] for _ in range(tk.dim)]
    return out


@dataclass(frozen=True)
class QuasiIsoResult:
    ok: bool
    failing_degree: int | None = None
    checked_through: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def is_quasi_iso(f: GradedLinearMap, source: ChainComplex, target: ChainComplex,
                 upto: int | None = None) -> QuasiIsoResult:
    """Whether H(f) is an isomorphism in every trusted degree (<= ``upto``)."""
    check_chain_map(f, source, target)
    bounds = [c.truncation - 1 for c in (source, target) if c.truncation is not None]
    top = min(bounds) if bounds else max(source.top_trusted(), target.top_trusted())
    if upto is not None:
        top = min(top, upto)
    hs = homology(source, upto=top)
    ht = homology(target, upto=top)
    degs = sorted(set(hs.degrees) | set(ht.degrees))
    for k in degs:
        if k > top:
            continue
        a, b = hs.dim(k), ht.dim(k)
        if a != b:
            return QuasiIsoResult(False, k, top)
        if a == 0:
            continue
        m = induced_map(f, hs, ht)[k]
        if rank(m, cols=a) != a:
            return QuasiIsoResult(False, k, top)
    return QuasiIsoResult(True, None, top)
