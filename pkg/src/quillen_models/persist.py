"""Persistence modules on finite grids, interleavings, barcodes and distances.

A module indexed by the reals is stored by its critical values t_1 < ... < t_m:
the object at t is the object at the largest t_i <= t (zero below t_1), and
structure maps are composites of the stored consecutive maps.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Iterable, Mapping, Protocol, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .qlinalg import Matrix, identity, matmul, rank, to_rational, zeros

INF = math.inf
Value = Fraction | float  # a rational or INF

EXHAUSTIVE_LIMIT = 8  # total bar count below which the exhaustive matcher is used


class PersistenceError(ValueError):
    pass


class StructuralError(PersistenceError):
    """Shapes of the maps in a certificate do not fit the modules."""


class FunctorError(PersistenceError):
    pass


def format_value(x: Value) -> str:
    if x == INF:
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_value(text: str | int | Fraction) -> Value:
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    text = str(text).strip()
    if text in ("inf", "+inf", "infinity"):
        return INF
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise PersistenceError(f"not a rational: {text!r}") from exc


@dataclass(frozen=True)
class Grid:
    values: tuple[Fraction, ...]

    def __post_init__(self):
        vals = tuple(to_rational(v) for v in self.values)
        if not vals:
            raise PersistenceError("a grid needs at least one value")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise PersistenceError("grid values must be strictly increasing")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def index(self, t) -> int | None:
        """Index of the largest grid value <= t, or None below the grid."""
        i = bisect.bisect_right(self.values, t) - 1
        return i if i >= 0 else None

    def shifted(self, delta) -> "Grid":
        delta = to_rational(delta)
        return Grid(tuple(v - delta for v in self.values))

    @staticmethod
    def merge(values: Iterable) -> "Grid":
        return Grid(tuple(sorted(set(to_rational(v) for v in values))))


@dataclass(frozen=True)
class PersistenceModule:
    """A grid-indexed diagram over an arbitrary category.

    ``compose(g, f)`` and ``identity(obj)``, when given, let ``pushforward``
    check that a functor respects the stored data.
    """

    grid: Grid
    objects: tuple
    maps: tuple  # maps[i]: objects[i] -> objects[i+1]
    compose: Callable[[Any, Any], Any] | None = None
    identity: Callable[[Any], Any] | None = None

    def __post_init__(self):
        if len(self.objects) != len(self.grid):
            raise PersistenceError("one object per grid value is required")
        if len(self.maps) != len(self.grid) - 1:
            raise PersistenceError("one structure map per consecutive pair is required")

    def at(self, t):
        i = self.grid.index(t)
        return None if i is None else self.objects[i]

    def shift(self, delta) -> "PersistenceModule":
        if to_rational(delta) < 0:
            raise PersistenceError("shift needs delta >= 0")
        return PersistenceModule(self.grid.shifted(delta), self.objects, self.maps,
                                 self.compose, self.identity)


# ---------------------------------------------------------------------------
# graded vector space valued modules


def _dims_of(obj: Mapping[int, int]) -> dict[int, int]:
    return {int(k): int(v) for k, v in obj.items() if v}


@dataclass(frozen=True, eq=False)
class GradedModule:
    """Module of finite-dimensional graded vector spaces.

    ``dims[i][k]`` is the dimension in degree k at grid index i and
    ``maps[i][k]`` the matrix of the structure map i -> i+1 (missing degrees
    are zero maps).
    """

    grid: Grid
    dims: tuple[dict[int, int], ...]
    maps: tuple[dict[int, Matrix], ...]

    def __post_init__(self):
        if len(self.dims) != len(self.grid) or len(self.maps) != len(self.grid) - 1:
            raise PersistenceError("dims and maps do not fit the grid")
        dims = tuple(_dims_of(d) for d in self.dims)
        maps = []
        for i, m in enumerate(self.maps):
            clean = {}
            for k, mat in m.items():
                k = int(k)
                r, c = dims[i + 1].get(k, 0), dims[i].get(k, 0)
                mat = [[to_rational(x) for x in row] for row in mat]
                if len(mat) != r or any(len(row) != c for row in mat):
                    raise StructuralError(f"structure map {i}->{i + 1} in degree {k} "
                                          f"should be {r}x{c}")
                if r and c:
                    clean[k] = mat
            maps.append(clean)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "maps", tuple(maps))
        object.__setattr__(self, "_cache", {})

    def __eq__(self, other) -> bool:
        return (isinstance(other, GradedModule) and self.grid == other.grid
                and self.dims == other.dims and self.maps == other.maps)

    def __hash__(self):
        return hash((self.grid, tuple(tuple(sorted(d.items())) for d in self.dims)))

    def __repr__(self) -> str:
        return f"GradedModule(grid={[str(v) for v in self.grid.values]}, dims={list(self.dims)})"

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(sorted({k for d in self.dims for k in d}))

    def dim(self, i: int | None, k: int) -> int:
        return 0 if i is None else self.dims[i].get(k, 0)

    def dim_at(self, t, k: int) -> int:
        return self.dim(self.grid.index(t), k)

    def step(self, i: int, k: int) -> Matrix:
        m = self.maps[i].get(k)
        return m if m is not None else zeros(self.dim(i + 1, k), self.dim(i, k))

    def map_index(self, i: int | None, j: int | None, k: int) -> Matrix:
        """Composite structure map from grid index i to j (i <= j)."""
        if i is None:
            return zeros(self.dim(j, k), 0)
        if j is None or j < i:
            raise PersistenceError("structure maps only go upward")
        key = (i, j, k)
        cache = self._cache  # type: ignore[attr-defined]
        if key not in cache:
            if i == j:
                cache[key] = identity(self.dim(i, k))
            else:
                prev = self.map_index(i, j - 1, k)
                cache[key] = matmul(self.step(j - 1, k), prev, inner=self.dim(j - 1, k),
                                    cols=self.dim(i, k))
        return cache[key]

    def map_at(self, s, t, k: int) -> Matrix:
        """Structure map X_s -> X_t for real s <= t."""
        if t < s:
            raise PersistenceError("structure maps only go upward")
        return self.map_index(self.grid.index(s), self.grid.index(t), k)

    def rank(self, i: int, j: int, k: int) -> int:
        return rank(self.map_index(i, j, k), cols=self.dim(i, k))

    def shift(self, delta) -> "GradedModule":
        """X(δ) with X(δ)_t = X_{t+δ}."""
        if to_rational(delta) < 0:
            raise PersistenceError("shift needs delta >= 0")
        return GradedModule(self.grid.shifted(delta), self.dims, self.maps)

    def suspend(self, by: int = 1) -> "GradedModule":
        return GradedModule(self.grid, tuple({k + by: v for k, v in d.items()} for d in self.dims),
                            tuple({k + by: v for k, v in m.items()} for m in self.maps))

    def direct_sum(self, other: "GradedModule") -> "GradedModule":
        grid = Grid.merge(self.grid.values + other.grid.values)
        dims, maps = [], []
        degs = sorted(set(self.degrees) | set(other.degrees))
        for n, t in enumerate(grid.values):
            dims.append({k: self.dim_at(t, k) + other.dim_at(t, k) for k in degs})
            if n + 1 < len(grid):
                u = grid.values[n + 1]
                maps.append({k: _block(self.map_at(t, u, k), other.map_at(t, u, k),
                                       (self.dim_at(u, k), self.dim_at(t, k)),
                                       (other.dim_at(u, k), other.dim_at(t, k)))
                             for k in degs})
        return GradedModule(grid, tuple(dims), tuple(maps))

    def restrict_degrees(self, upto: int) -> "GradedModule":
        return GradedModule(self.grid, tuple({k: v for k, v in d.items() if k <= upto}
                                             for d in self.dims),
                            tuple({k: v for k, v in m.items() if k <= upto} for m in self.maps))

    @classmethod
    def constant(cls, grid: Grid, dims: Mapping[int, int]) -> "GradedModule":
        dims = _dims_of(dims)
        return cls(grid, tuple(dict(dims) for _ in grid.values),
                   tuple({k: identity(n) for k, n in dims.items()} for _ in grid.values[1:]))

    @classmethod
    def interval(cls, birth, death: Value = INF, degree: int = 0) -> "GradedModule":
        """The interval module ℚ[birth, death) in one degree."""
        birth = to_rational(birth)
        if death == INF:
            return cls(Grid((birth,)), ({degree: 1},), ())
        death = to_rational(death)
        if death <= birth:
            raise PersistenceError("interval needs birth < death")
        return cls(Grid((birth, death)), ({degree: 1}, {}), ({degree: zeros(0, 1)},))


def _block(a: Matrix, b: Matrix, sa: tuple[int, int], sb: tuple[int, int]) -> Matrix:
    out = zeros(sa[0] + sb[0], sa[1] + sb[1])
    for i in range(sa[0]):
        for j in range(sa[1]):
            out[i][j] = a[i][j]
    for i in range(sb[0]):
        for j in range(sb[1]):
            out[sa[0] + i][sa[1] + j] = b[i][j]
    return out


# ---------------------------------------------------------------------------
# morphisms and interleavings


@dataclass(frozen=True, eq=False)
class ModuleMorphism:
    """A natural family source_t -> target_t, sampled at change points.

    The component at t is the sample at the largest key <= t.  Keys must
    contain every critical value of source and target.
    """

    source: GradedModule
    target: GradedModule
    samples: Mapping[Fraction, Mapping[int, Matrix]]

    def __post_init__(self):
        keys = tuple(sorted(to_rational(t) for t in self.samples))
        missing = (set(self.source.grid.values) | set(self.target.grid.values)) - set(keys)
        if missing:
            raise StructuralError(f"morphism not sampled at {sorted(missing)[0]}")
        samples = {to_rational(t): {int(k): m for k, m in v.items()}
                   for t, v in self.samples.items()}
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "_keys", keys)

    @property
    def keys(self) -> tuple[Fraction, ...]:
        return self._keys  # type: ignore[attr-defined]

    def at(self, t, k: int) -> Matrix:
        i = bisect.bisect_right(self.keys, t) - 1
        r, c = self.target.dim_at(t, k), self.source.dim_at(t, k)
        if i < 0:
            return zeros(r, c)
        m = self.samples[self.keys[i]].get(k)
        if m is None:
            return zeros(r, c)
        if len(m) != r or any(len(row) != c for row in m):
            raise StructuralError(f"component at {format_value(t)} in degree {k} should be "
                                  f"{r}x{c}")
        return m

    def shift(self, delta) -> "ModuleMorphism":
        delta = to_rational(delta)
        return ModuleMorphism(self.source.shift(delta), self.target.shift(delta),
                              {t - delta: v for t, v in self.samples.items()})

    def compose(self, first: "ModuleMorphism") -> "ModuleMorphism":
        """``self ∘ first`` (first.target must equal self.source)."""
        keys = sorted(set(self.keys) | set(first.keys))
        degs = set(first.source.degrees) | set(self.target.degrees)
        out = {}
        for t in keys:
            out[t] = {k: matmul(self.at(t, k), first.at(t, k), inner=self.source.dim_at(t, k),
                                cols=first.source.dim_at(t, k)) for k in degs}
        return ModuleMorphism(first.source, self.target, out)

    @classmethod
    def from_function(cls, source: GradedModule, target: GradedModule,
                      fn: Callable[[Fraction, int], Matrix],
                      keys: Iterable[Fraction] = ()) -> "ModuleMorphism":
        allkeys = sorted(set(source.grid.values) | set(target.grid.values) | set(keys))
        degs = sorted(set(source.degrees) | set(target.degrees))
        return cls(source, target, {t: {k: fn(t, k) for k in degs} for t in allkeys})

    @classmethod
    def identity(cls, module: GradedModule) -> "ModuleMorphism":
        return cls.from_function(module, module, lambda t, k: identity(module.dim_at(t, k)))

    @classmethod
    def zero(cls, source: GradedModule, target: GradedModule) -> "ModuleMorphism":
        return cls.from_function(source, target,
                                 lambda t, k: zeros(target.dim_at(t, k), source.dim_at(t, k)))

    @classmethod
    def canonical(cls, module: GradedModule, delta) -> "ModuleMorphism":
        """φ^{X,δ}: X -> X(δ), the structure maps X_t -> X_{t+δ}."""
        delta = to_rational(delta)
        return cls.from_function(module, module.shift(delta),
                                 lambda t, k: module.map_at(t, t + delta, k))


@dataclass(frozen=True)
class InterleavingCertificate:
    """f: X -> Y(δ) and g: Y -> X(δ)."""

    delta: Fraction
    source: GradedModule
    target: GradedModule
    f: ModuleMorphism
    g: ModuleMorphism


@dataclass(frozen=True)
class Verification:
    ok: bool
    witness: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def _check_shapes(m: ModuleMorphism, src: GradedModule, tgt: GradedModule, points, name: str):
    degs = set(src.degrees) | set(tgt.degrees) | {k for v in m.samples.values() for k in v}
    for t in points:
        for k in degs:
            a = m.at(t, k)
            r, c = tgt.dim_at(t, k), src.dim_at(t, k)
            if len(a) != r or any(len(row) != c for row in a):
                raise StructuralError(f"{name} at {format_value(t)} in degree {k} should be {r}x{c}")


def _natural(m: ModuleMorphism, src: GradedModule, tgt: GradedModule, points, name: str):
    degs = set(src.degrees) | set(tgt.degrees)
    for s, t in zip(points, points[1:]):
        for k in degs:
            lhs = matmul(tgt.map_at(s, t, k), m.at(s, k), inner=tgt.dim_at(s, k),
                         cols=src.dim_at(s, k))
            rhs = matmul(m.at(t, k), src.map_at(s, t, k), inner=src.dim_at(t, k),
                         cols=src.dim_at(s, k))
            if lhs != rhs:
                return (f"naturality square of {name} fails between {format_value(s)} and "
                        f"{format_value(t)} in degree {k}")
    return None


def verify_interleaving(cert: InterleavingCertificate) -> Verification:
    """Check naturality of f, g and g(δ)f = φ^{X,2δ}, f(δ)g = φ^{Y,2δ} exactly.

    Everything is piecewise constant with breaks at the merged change points,
    so checking there is exhaustive.  Shape mismatches raise StructuralError.
    """
    delta = to_rational(cert.delta)
    if delta < 0:
        raise StructuralError("delta must be nonnegative")
    X, Y = cert.source, cert.target
    Xd, Yd = X.shift(delta), Y.shift(delta)
    pts = set()
    for mod in (X, Y):
        for v in mod.grid.values:
            pts.update((v, v - delta, v - 2 * delta))
    for m in (cert.f, cert.g):
        for v in m.keys:
            pts.update((v, v - delta))
    points = sorted(pts)
    if cert.f.source.grid != X.grid or cert.f.target.grid != Yd.grid:
        raise StructuralError("f must go from X to Y(δ)")
    if cert.g.source.grid != Y.grid or cert.g.target.grid != Xd.grid:
        raise StructuralError("g must go from Y to X(δ)")
    _check_shapes(cert.f, X, Yd, points, "f")
    _check_shapes(cert.g, Y, Xd, points, "g")
    for m, src, tgt, name in ((cert.f, X, Yd, "f"), (cert.g, Y, Xd, "g")):
        w = _natural(m, src, tgt, points, name)
        if w:
            return Verification(False, w)
    for first, second, mod, name in ((cert.f, cert.g, X, "g(δ)f"), (cert.g, cert.f, Y, "f(δ)g")):
        degs = set(mod.degrees)
        for t in points:
            for k in degs:
                lhs = matmul(second.at(t + delta, k), first.at(t, k),
                             inner=(Y if mod is X else X).dim_at(t + delta, k),
                             cols=mod.dim_at(t, k))
                rhs = mod.map_at(t, t + 2 * delta, k)
                if lhs != rhs:
                    return Verification(False, f"{name} differs from the 2δ structure map at "
                                               f"{format_value(t)} in degree {k}")
    return Verification(True)


# ---------------------------------------------------------------------------
# barcodes


@dataclass(frozen=True, order=True)
class Bar:
    degree: int
    birth: Fraction
    death: Value

    def __post_init__(self):
        if not self.birth < self.death:
            raise PersistenceError(f"bar needs birth < death, got [{self.birth}, {self.death})")

    @property
    def length(self) -> Value:
        return INF if self.death == INF else self.death - self.birth

    def __str__(self) -> str:
        return f"{self.degree}: [{format_value(self.birth)}, {format_value(self.death)})"


@dataclass(frozen=True)
class Barcode:
    bars: tuple[Bar, ...]

    def __post_init__(self):
        object.__setattr__(self, "bars", tuple(sorted(self.bars, key=_bar_key)))

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(sorted({b.degree for b in self.bars}))

    def in_degree(self, k: int) -> list[tuple[Fraction, Value]]:
        return [(b.birth, b.death) for b in self.bars if b.degree == k]

    def __len__(self) -> int:
        return len(self.bars)

    def __iter__(self):
        return iter(self.bars)

    def rows(self) -> list[tuple[int, Fraction, Value]]:
        return [(b.degree, b.birth, b.death) for b in self.bars]

    def shifted(self, delta) -> "Barcode":
        delta = to_rational(delta)
        return Barcode(tuple(Bar(b.degree, b.birth - delta,
                                 INF if b.death == INF else b.death - delta) for b in self.bars))

    def to_json(self) -> list[dict]:
        return [{"degree": b.degree, "birth": format_value(b.birth), "death": format_value(b.death)}
                for b in self.bars]

    @classmethod
    def from_json(cls, rows: Iterable[Mapping]) -> "Barcode":
        try:
            return cls(tuple(Bar(int(r["degree"]), parse_value(r["birth"]), parse_value(r["death"]))
                             for r in rows))
        except (KeyError, TypeError) as exc:
            raise PersistenceError(f"malformed barcode row: {exc}") from exc

    def to_csv(self) -> str:
        lines = ["degree,birth,death"]
        lines += [f"{b.degree},{format_value(b.birth)},{format_value(b.death)}" for b in self.bars]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "Barcode":
        import csv
        import io

        reader = csv.DictReader(io.StringIO(text))
        return cls.from_json(list(reader))

    def module(self) -> GradedModule:
        """The direct sum of interval modules."""
        out = None
        for b in self.bars:
            m = GradedModule.interval(b.birth, b.death, b.degree)
            out = m if out is None else out.direct_sum(m)
        if out is None:
            return GradedModule(Grid((Fraction(0),)), ({},), ())
        return out


def _bar_key(b: Bar):
    return (b.degree, b.birth, b.death == INF, b.death if b.death != INF else 0)


def barcode(module: GradedModule) -> Barcode:
    """Interval decomposition via inclusion-exclusion on composite ranks.

    The multiplicity of the interval alive exactly on grid indices i..j is
    r(i,j) - r(i-1,j) - r(i,j+1) + r(i-1,j+1), with r = 0 off the grid.
    """
    m = len(module.grid)
    vals = module.grid.values
    bars = []
    for k in module.degrees:
        cache: dict[tuple[int, int], int] = {}

        def r(i: int, j: int) -> int:
            if i < 0 or j >= m:
                return 0
            if (i, j) not in cache:
                cache[(i, j)] = module.rank(i, j, k)
            return cache[(i, j)]

        for i in range(m):
            for j in range(i, m):
                mult = r(i, j) - r(i - 1, j) - r(i, j + 1) + r(i - 1, j + 1)
                if mult < 0:  # pragma: no cover - impossible over a field
                    raise PersistenceError("negative interval multiplicity")
                death = vals[j + 1] if j + 1 < m else INF
                bars += [Bar(k, vals[i], death)] * mult
    return Barcode(tuple(bars))


# ---------------------------------------------------------------------------
# bottleneck matching


def _sub(a: Value, b: Value) -> Value:
    if a == INF and b == INF:
        return Fraction(0)
    if a == INF or b == INF:
        return INF
    return abs(a - b)


def match_cost(a: tuple[Fraction, Value], b: tuple[Fraction, Value]) -> Value:
    return max(abs(a[0] - b[0]), _sub(a[1], b[1]))


def delete_cost(a: tuple[Fraction, Value]) -> Value:
    return INF if a[1] == INF else (a[1] - a[0]) / 2


def _exhaustive(A: Sequence, B: Sequence) -> Value:
    best = [INF]
    n = len(A)
    used = [False] * len(B)

    def go(i: int, cur: Value):
        if cur >= best[0] and best[0] != INF:
            return
        if i == n:
            rest = [delete_cost(B[j]) for j in range(len(B)) if not used[j]]
            val = max([cur] + rest)
            if val < best[0]:
                best[0] = val
            return
        go(i + 1, max(cur, delete_cost(A[i])))
        for j in range(len(B)):
            if not used[j]:
                used[j] = True
                go(i + 1, max(cur, match_cost(A[i], B[j])))
                used[j] = False

    go(0, Fraction(0))
    return best[0]


def _feasible(A: Sequence, B: Sequence, eps: Fraction) -> bool:
    n, m = len(A), len(B)
    size = n + m
    rows, cols = [], []
    for i in range(n):
        for j in range(m):
            if match_cost(A[i], B[j]) <= eps:
                rows.append(i)
                cols.append(j)
        if delete_cost(A[i]) <= eps:
            rows.append(i)
            cols.append(m + i)
    for j in range(m):
        if delete_cost(B[j]) <= eps:
            rows.append(n + j)
            cols.append(j)
        for i in range(n):
            rows.append(n + j)
            cols.append(m + i)
    graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size))
    perm = maximum_bipartite_matching(graph, perm_type="column")
    return int((perm >= 0).sum()) == size


def _matching(A: Sequence, B: Sequence) -> Value:
    candidates = {Fraction(0)}
    for a in A:
        candidates.add(delete_cost(a))
        for b in B:
            candidates.add(match_cost(a, b))
    for b in B:
        candidates.add(delete_cost(b))
    finite = sorted(c for c in candidates if c != INF)
    if not _feasible(A, B, finite[-1]):
        return INF
    lo, hi = 0, len(finite) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(A, B, finite[mid]):
            hi = mid
        else:
            lo = mid + 1
    return finite[lo]


def bottleneck_distance(A: Sequence[tuple[Fraction, Value]], B: Sequence[tuple[Fraction, Value]],
                        method: str = "auto") -> Value:
    """Bottleneck distance between two multisets of intervals [b, d).

    Matching [b1,d1) with [b2,d2) costs max(|b1-b2|, |d1-d2|) and deleting
    [b,d) costs (d-b)/2.
    """
    A, B = list(A), list(B)
    if not A and not B:
        return Fraction(0)
    if method == "auto":
        method = "exhaustive" if len(A) + len(B) <= EXHAUSTIVE_LIMIT else "matching"
    if method == "exhaustive":
        return _exhaustive(A, B)
    if method == "matching":
        return _matching(A, B)
    raise ValueError(f"unknown method {method!r}")


def interleaving_distance(A: GradedModule | Barcode, B: GradedModule | Barcode,
                          method: str = "auto") -> Value:
    """Interleaving distance of two graded modules: the maximum over degrees of
    the bottleneck distance between barcodes."""
    a = A if isinstance(A, Barcode) else barcode(A)
    b = B if isinstance(B, Barcode) else barcode(B)
    out: Value = Fraction(0)
    for k in sorted(set(a.degrees) | set(b.degrees)):
        out = max(out, bottleneck_distance(a.in_degree(k), b.in_degree(k), method))
    return out


# ---------------------------------------------------------------------------
# functors


class Functor(Protocol):
    def on_object(self, obj: Any) -> Mapping[int, int]: ...

    def on_morphism(self, mor: Any, source: Any, target: Any) -> Mapping[int, Matrix]: ...


def _is_identity(m: Mapping[int, Matrix], dims: Mapping[int, int]) -> bool:
    return all(m.get(k, zeros(n, n)) == identity(n) for k, n in dims.items())


def pushforward(module: PersistenceModule, functor: Functor, check: bool = True) -> GradedModule:
    """Apply a functor to a grid-indexed diagram, giving a graded module.

    With ``check`` and a module that knows its identities and composition,
    identities and composites of consecutive maps are verified.
    """
    dims = tuple(dict(functor.on_object(o)) for o in module.objects)
    maps = []
    for i, m in enumerate(module.maps):
        mats = dict(functor.on_morphism(m, module.objects[i], module.objects[i + 1]))
        for k, mat in mats.items():
            r, c = dims[i + 1].get(k, 0), dims[i].get(k, 0)
            if len(mat) != r or any(len(row) != c for row in mat):
                raise FunctorError(f"image of structure map {i} has the wrong shape in degree {k}")
        maps.append(mats)
    out = GradedModule(module.grid, dims, tuple(maps))
    if check and module.identity is not None:
        for i, o in enumerate(module.objects):
            img = functor.on_morphism(module.identity(o), o, o)
            if not _is_identity(img, out.dims[i]):
                raise FunctorError(f"identity at index {i} is not sent to an identity")
    if check and module.compose is not None:
        for i in range(len(module.maps) - 1):
            comp = module.compose(module.maps[i + 1], module.maps[i])
            img = functor.on_morphism(comp, module.objects[i], module.objects[i + 2])
            for k in out.degrees:
                want = out.map_index(i, i + 2, k)
                got = img.get(k, zeros(out.dim(i + 2, k), out.dim(i, k)))
                if got != want:
                    raise FunctorError(f"composite {i}->{i + 2} not preserved in degree {k}")
    return out


@dataclass(frozen=True)
class DiagramCertificate:
    """A δ-interleaving of diagrams in any category, sampled at change points.

    ``f[t]: X_t -> Y_{t+δ}`` and ``g[t]: Y_t -> X_{t+δ}``; a key t whose
    source object is zero (below the grid) may be omitted.
    """

    delta: Fraction
    source: PersistenceModule
    target: PersistenceModule
    f: Mapping[Fraction, Any]
    g: Mapping[Fraction, Any]


def pushforward_certificate(cert: DiagramCertificate, functor: Functor,
                            source: GradedModule | None = None,
                            target: GradedModule | None = None) -> InterleavingCertificate:
    delta = to_rational(cert.delta)
    HX = source if source is not None else pushforward(cert.source, functor, check=False)
    HY = target if target is not None else pushforward(cert.target, functor, check=False)

    def family(samples, X, Y, HX, HY):
        out = {}
        keys = set(samples) | set(HX.grid.values) | {v - delta for v in HY.grid.values}
        for t in sorted(keys):
            s_obj, t_obj = X.at(t), Y.at(t + delta)
            if s_obj is None:
                out[t] = {}
                continue
            if t not in samples:
                raise StructuralError(f"certificate missing a component at {format_value(t)}")
            mor = samples[t]
            out[t] = dict(functor.on_morphism(mor, s_obj, t_obj))
        return ModuleMorphism(HX, HY.shift(delta), out)

    f = family(cert.f, cert.source, cert.target, HX, HY)
    g = family(cert.g, cert.target, cert.source, HY, HX)
    return InterleavingCertificate(delta, HX, HY, f, g)


__all__ = [
    "INF", "Bar", "Barcode", "DiagramCertificate", "Functor", "FunctorError", "GradedModule", "Grid",
    "InterleavingCertificate", "ModuleMorphism", "PersistenceError", "PersistenceModule",
    "StructuralError", "Verification", "barcode", "bottleneck_distance", "delete_cost",
    "format_value", "interleaving_distance", "match_cost", "parse_value", "pushforward",
    "pushforward_certificate", "verify_interleaving",
]
