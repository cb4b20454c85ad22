"""Independent reference computations used to freeze expected values."""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from itertools import product

import sympy

from quillen_models.persist import (INF, GradedModule, Grid, InterleavingCertificate,
                                    ModuleMorphism, verify_interleaving)
from quillen_models.qlinalg import zeros


# ---------------------------------------------------------------------------
# free Lie algebra dimensions by spanning brackets inside the tensor algebra


def _tensor_bracket(x: dict, y: dict, deg) -> dict:
    out: dict = {}
    for u, a in x.items():
        for v, b in y.items():
            du, dv = sum(deg[i] for i in u), sum(deg[i] for i in v)
            out[u + v] = out.get(u + v, 0) + a * b
            sign = -1 if (du * dv) % 2 else 1
            out[v + u] = out.get(v + u, 0) - sign * a * b
    return {w: c for w, c in out.items() if c}


def lie_dims_by_span(degrees: list[int], top: int) -> dict[int, int]:
    """dim of the Lie subalgebra of T(V) generated by V, degree by degree."""
    span: dict[int, list[dict]] = {}
    for i, d in enumerate(degrees):
        span.setdefault(d, []).append({(i,): 1})
    for k in range(2, top + 1):
        cands = list(span.get(k, []))
        for a in range(1, k):
            for x in span.get(a, []):
                for y in span.get(k - a, []):
                    t = _tensor_bracket(x, y, degrees)
                    if t:
                        cands.append(t)
        words = sorted({w for t in cands for w in t})
        if not words:
            continue
        idx = {w: n for n, w in enumerate(words)}
        basis, rows = [], []
        for t in cands:
            row = [0] * len(words)
            for w, c in t.items():
                row[idx[w]] = c
            trial = sympy.Matrix(rows + [row])
            if trial.rank() > len(rows):
                rows.append(row)
                basis.append(t)
        span[k] = basis
    return {k: len(v) for k, v in sorted(span.items()) if v and k <= top}


# ---------------------------------------------------------------------------
# homology by sympy ranks


def homology_dims_sympy(complex, upto: int) -> dict[int, int]:
    space, d = complex.space, complex.differential

    def rk(k):
        if not space.dim(k) or not space.dim(k - 1):
            return 0
        return sympy.Matrix(d.matrix(k)).rank()

    out = {}
    for k in space.degrees():
        if k > upto:
            continue
        h = space.dim(k) - rk(k) - rk(k + 1)
        if h:
            out[k] = h
    return out


# ---------------------------------------------------------------------------
# modules with a known interval decomposition


def alive(iv, t) -> bool:
    return iv[0] <= t < iv[1]


def interval_sum(intervals: list[tuple], grid_values, degree: int = 0) -> GradedModule:
    """Direct sum of interval modules on the given grid, basis in list order."""
    grid = Grid(tuple(sorted(set(grid_values))))
    dims, maps = [], []
    vals = grid.values
    for i, t in enumerate(vals):
        here = [n for n, iv in enumerate(intervals) if alive(iv, t)]
        dims.append({degree: len(here)})
        if i + 1 < len(vals):
            there = [n for n, iv in enumerate(intervals) if alive(iv, vals[i + 1])]
            m = zeros(len(there), len(here))
            for c, n in enumerate(here):
                if n in there:
                    m[there.index(n)][c] = Fraction(1)
            maps.append({degree: m})
    return GradedModule(grid, tuple(dims), tuple(maps))


def random_invertible(n: int, rng: random.Random) -> sympy.Matrix:
    while True:
        m = sympy.Matrix(n, n, lambda i, j: sympy.Rational(rng.randint(-2, 2)))
        if m.det() != 0:
            return m


def conjugate(module: GradedModule, rng: random.Random):
    """Relabel bases by random invertible matrices; returns the module and
    the change-of-basis matrices per grid index and degree."""
    P = [{k: random_invertible(n, rng) for k, n in d.items()} for d in module.dims]
    maps = []
    for i, m in enumerate(module.maps):
        out = {}
        for k in module.degrees:
            a, b = module.dim(i, k), module.dim(i + 1, k)
            if a and b:
                M = sympy.Matrix(b, a, lambda r, c: module.step(i, k)[r][c])
                N = P[i + 1][k] * M * P[i][k].inv()
                out[k] = [[Fraction(int(x.p), int(x.q)) for x in N.row(r)] for r in range(b)]
        maps.append(out)
    return GradedModule(module.grid, module.dims, tuple(maps)), P


def _canonical_pair_map(I, J, delta):
    """The map I_t -> J_{t+δ} that is 1 wherever both are nonzero."""
    def fn(t, k):
        a = 1 if alive(I, t) else 0
        b = 1 if alive(J, t + delta) else 0
        return [[Fraction(1)] * a for _ in range(b)]
    return fn


def _zero_map(I, J, delta):
    def fn(t, k):
        a = 1 if alive(I, t) else 0
        b = 1 if alive(J, t + delta) else 0
        return [[Fraction(0)] * a for _ in range(b)]
    return fn


def _single(iv) -> GradedModule:
    if iv[1] == INF:
        return GradedModule(Grid((iv[0],)), ({0: 1},), ())
    return GradedModule(Grid((iv[0], iv[1])), ({0: 1}, {}), ({0: zeros(0, 1)},))


def _empty_like(iv) -> GradedModule:
    return GradedModule(Grid((iv[0],)), ({},), ())


@lru_cache(maxsize=None)
def pair_interleaved(I, J, delta) -> tuple[bool, bool] | None:
    """A choice (f nonzero?, g nonzero?) giving a verified δ-interleaving of
    the interval modules I and J, or None."""
    X, Y = _single(I), _single(J)
    keys = set(X.grid.values) | set(Y.grid.values)
    keys |= {v - delta for v in keys} | {v - 2 * delta for v in keys}
    for fz, gz in product((True, False), repeat=2):
        fmake = _canonical_pair_map if fz else _zero_map
        gmake = _canonical_pair_map if gz else _zero_map
        f = ModuleMorphism.from_function(X, Y.shift(delta), fmake(I, J, delta), keys)
        g = ModuleMorphism.from_function(Y, X.shift(delta), gmake(J, I, delta), keys)
        if verify_interleaving(InterleavingCertificate(delta, X, Y, f, g)):
            return fz, gz
    return None


@lru_cache(maxsize=None)
def killable(I, delta) -> bool:
    """I is δ-interleaved with the zero module."""
    X, Z = _single(I), _empty_like(I)
    keys = set(X.grid.values) | {X.grid.values[0] - delta, X.grid.values[0] - 2 * delta}
    keys |= {v - delta for v in X.grid.values} | {v - 2 * delta for v in X.grid.values}
    f = ModuleMorphism.from_function(X, Z.shift(delta), _zero_map(I, (0, 0), delta), keys)
    g = ModuleMorphism.from_function(Z, X.shift(delta), _zero_map((0, 0), I, delta), keys)
    return bool(verify_interleaving(InterleavingCertificate(delta, X, Z, f, g)))


def _search_matching(A, B, delta):
    """A matching (dict a -> (b, choice)) certified at δ, or None."""
    used = [False] * len(B)
    chosen: dict[int, tuple[int, tuple[bool, bool]]] = {}

    def go(i):
        if i == len(A):
            return all(used[j] or killable(B[j], delta) for j in range(len(B)))
        if killable(A[i], delta) and go(i + 1):
            return True
        for j in range(len(B)):
            if used[j]:
                continue
            choice = pair_interleaved(A[i], B[j], delta)
            if choice is None:
                continue
            used[j] = True
            chosen[i] = (j, choice)
            if go(i + 1):
                return True
            used[j] = False
            del chosen[i]
        return False

    return dict(chosen) if go(0) else None


def candidate_deltas(A, B) -> list[Fraction]:
    ends = {x for iv in A + B for x in iv if x != INF}
    out = {Fraction(0)}
    for a in ends:
        for b in ends:
            out.add(abs(a - b))
            out.add(abs(a - b) / 2)
    return sorted(out)


def assemble_certificate(A, B, matching, delta, degree=0):
    """The certificate on the interval sums built from a per-pair matching."""
    values = {x for iv in A + B for x in iv if x != INF}
    X, Y = interval_sum(A, values, degree), interval_sum(B, values, degree)

    def fam(src, tgt, pairs):
        def fn(t, k):
            rows = [n for n, iv in enumerate(tgt) if alive(iv, t + delta)]
            cols = [n for n, iv in enumerate(src) if alive(iv, t)]
            m = zeros(len(rows), len(cols))
            for a, (b, on) in pairs.items():
                if on and a in cols and b in rows:
                    m[rows.index(b)][cols.index(a)] = Fraction(1)
            return m
        return fn

    fpairs = {a: (b, c[0]) for a, (b, c) in matching.items()}
    gpairs = {b: (a, c[1]) for a, (b, c) in matching.items()}
    keys = set(X.grid.values) | set(Y.grid.values)
    keys |= {v - delta for v in keys} | {v - 2 * delta for v in keys}
    f = ModuleMorphism.from_function(X, Y.shift(delta), fam(A, B, fpairs), keys)
    g = ModuleMorphism.from_function(Y, X.shift(delta), fam(B, A, gpairs), keys)
    return InterleavingCertificate(delta, X, Y, f, g)


def certificate_search_distance(A: list[tuple], B: list[tuple]):
    """Smallest candidate δ at which a verified certificate exists (INF if none).

    The candidate set holds every endpoint difference and half difference,
    which contains every possible bottleneck value.
    """
    A = [tuple(iv) for iv in A]
    B = [tuple(iv) for iv in B]
    if not A and not B:
        return Fraction(0)
    for delta in candidate_deltas(A, B):
        m = _search_matching(A, B, delta)
        if m is None:
            continue
        cert = assemble_certificate(A, B, m, delta)
        if not verify_interleaving(cert):  # pragma: no cover - would be an oracle bug
            raise AssertionError("assembled certificate failed")
        return delta
    return INF


def random_intervals(rng: random.Random, grid: list[Fraction], count: int) -> list[tuple]:
    out = []
    for _ in range(count):
        i = rng.randrange(len(grid))
        j = rng.randrange(i + 1, len(grid) + 1)
        out.append((grid[i], grid[j] if j < len(grid) else INF))
    return out


def random_grid(rng: random.Random, size: int) -> list[Fraction]:
    pool = [Fraction(n, 2) for n in range(0, 13)]
    return sorted(rng.sample(pool, size))
