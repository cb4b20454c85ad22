"""Chevalley-Eilenberg chains C_*(L) = (ΛsL, d0 + d1), the Quillen functor
𝓛(C) = (𝕃(s⁻¹C̄), d0 + d1), the linear dual, and the round-trip check.

Suspension convention: (sL)_i = L_{i-1} and (s⁻¹C)_i = C_{i+1}; the suspension
symbol is never moved past anything, so all signs come from the displayed
formulas plus Koszul signs for permuting wedge factors.

Wedge monomials are stored as sorted tuples of indices into the list of sL
basis elements, which are ordered by (degree, position).  Odd elements occur
at most once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Mapping, Sequence

from .freelie import FreeDGL, FreeLieAlgebra, Generator, LieElement, TruncationError
from .qlinalg import (ChainComplex, GradedLinearMap, GradedVectorSpace, Matrix, homology_dims,
                      to_rational, zeros)

Key = tuple[int, int]  # (degree, index within degree)
Vec = dict[int, Fraction]


class CoalgebraError(ValueError):
    pass


class SignConventionError(ArithmeticError):
    """d² ≠ 0 after a construction that should produce a differential."""


# ---------------------------------------------------------------------------
# finite dgl's (input of the CE construction)


class FiniteDGL:
    """A dgl known in degrees 1..top, given by basis, bracket and differential.

    ``bracket(p, i, q, j)`` returns the sparse coordinates of [e_{p,i}, e_{q,j}]
    in degree p+q, ``d(p, i)`` those of d e_{p,i} in degree p-1.
    """

    def __init__(self, space: GradedVectorSpace, top: int,
                 bracket: Callable[[int, int, int, int], Vec],
                 d: Callable[[int, int], Vec]):
        if any(k < 1 for k in space.degrees()):
            raise CoalgebraError("a connected dgl lives in positive degrees")
        self.space = space
        self.top = top
        self._bracket = bracket
        self._d = d
        self._bcache: dict[tuple, Vec] = {}
        self._dcache: dict[Key, Vec] = {}

    def bracket(self, p: int, i: int, q: int, j: int) -> Vec:
        if p + q > self.top:
            raise TruncationError(f"bracket lands in degree {p + q} > {self.top}")
        key = (p, i, q, j)
        if key not in self._bcache:
            self._bcache[key] = self._bracket(p, i, q, j)
        return self._bcache[key]

    def d(self, p: int, i: int) -> Vec:
        if (p, i) not in self._dcache:
            self._dcache[(p, i)] = self._d(p, i)
        return self._dcache[(p, i)]

    @classmethod
    def abelian(cls, dims: Mapping[int, int], top: int | None = None) -> "FiniteDGL":
        space = GradedVectorSpace.from_dims(dims, "x")
        top = max(dims) * 2 if top is None else top
        return cls(space, top, lambda p, i, q, j: {}, lambda p, i: {})

    @classmethod
    def from_free(cls, dgl: FreeDGL, top: int | None = None) -> "FiniteDGL":
        """The degrees 1..top of a free dgl, in its Hall basis."""
        alg = dgl.algebra
        top = alg.truncation if top is None else top
        if top > alg.truncation:
            raise TruncationError("requested degrees above the Lie truncation")
        space = alg.graded_space(top)

        def br(p, i, q, j):
            x = alg.element(alg.basis(p)[i])
            y = alg.element(alg.basis(q)[j])
            return _sparse(alg.vector(alg.bracket(x, y), p + q))

        def dd(p, i):
            if p == 1:
                return {}
            x = alg.element(alg.basis(p)[i])
            return _sparse(alg.vector(dgl.d(x), p - 1))

        return cls(space, top, br, dd)


def _sparse(v: Sequence[Fraction]) -> Vec:
    return {i: x for i, x in enumerate(v) if x}


# ---------------------------------------------------------------------------
# coalgebras


@dataclass
class CDGCoalgebra:
    """A co-augmented differential graded coalgebra, truncated at degree N.

    ``coproduct[key]`` maps (left key, right key) -> coefficient.  The unit is
    ``(0, 0)`` and must be the only basis element in degree 0.
    """

    carrier: GradedVectorSpace
    coproduct: dict[Key, dict[tuple[Key, Key], Fraction]]
    differential: GradedLinearMap
    truncation: int
    labels: dict[Key, str] = field(default_factory=dict)

    UNIT: Key = (0, 0)

    def __post_init__(self):
        if self.carrier.dim(0) != 1:
            raise CoalgebraError("the carrier needs exactly the unit in degree 0")

    def keys(self) -> list[Key]:
        return [(k, i) for k in self.carrier.degrees() for i in range(self.carrier.dim(k))]

    def reduced_keys(self) -> list[Key]:
        return [key for key in self.keys() if key != self.UNIT]

    def counit(self, key: Key) -> Fraction:
        return Fraction(int(key == self.UNIT))

    def d(self, key: Key) -> dict[Key, Fraction]:
        k, i = key
        if self.carrier.dim(k - 1) == 0:
            return {}
        m = self.differential.matrix(k)
        return {(k - 1, r): m[r][i] for r in range(len(m)) if m[r][i]}

    def reduced_coproduct(self, key: Key) -> dict[tuple[Key, Key], Fraction]:
        return {(a, b): c for (a, b), c in self.coproduct.get(key, {}).items()
                if a != self.UNIT and b != self.UNIT}

    # -- law checks (each returns a failing key or None) ------------------

    def counit_witness(self) -> Key | None:
        for key in self.keys():
            left: dict[Key, Fraction] = {}
            right: dict[Key, Fraction] = {}
            for (a, b), c in self.coproduct.get(key, {}).items():
                if b == self.UNIT:
                    left[a] = left.get(a, 0) + c
                if a == self.UNIT:
                    right[b] = right.get(b, 0) + c
            want = {key: Fraction(1)}
            if {k: v for k, v in left.items() if v} != want:
                return key
            if {k: v for k, v in right.items() if v} != want:
                return key
        return None

    def coassociativity_witness(self) -> Key | None:
        for key in self.keys():
            lhs: dict[tuple, Fraction] = {}
            rhs: dict[tuple, Fraction] = {}
            for (a, b), c in self.coproduct.get(key, {}).items():
                for (a1, a2), c1 in self.coproduct.get(a, {}).items():
                    t = (a1, a2, b)
                    lhs[t] = lhs.get(t, 0) + c * c1
                for (b1, b2), c2 in self.coproduct.get(b, {}).items():
                    t = (a, b1, b2)
                    rhs[t] = rhs.get(t, 0) + c * c2
            if {k: v for k, v in lhs.items() if v} != {k: v for k, v in rhs.items() if v}:
                return key
        return None

    def cocommutativity_witness(self) -> Key | None:
        for key in self.keys():
            delta = self.coproduct.get(key, {})
            swapped: dict[tuple[Key, Key], Fraction] = {}
            for (a, b), c in delta.items():
                sign = -1 if (a[0] * b[0]) % 2 else 1
                swapped[(b, a)] = swapped.get((b, a), 0) + sign * c
            if {k: v for k, v in swapped.items() if v} != {k: v for k, v in delta.items() if v}:
                return key
        return None

    def coderivation_witness(self) -> Key | None:
        """Key where Δd ≠ (d⊗1 + 1⊗d)Δ, or None."""
        for key in self.keys():
            lhs: dict[tuple[Key, Key], Fraction] = {}
            for k2, c in self.d(key).items():
                for t, c2 in self.coproduct.get(k2, {}).items():
                    lhs[t] = lhs.get(t, 0) + c * c2
            rhs: dict[tuple[Key, Key], Fraction] = {}
            for (a, b), c in self.coproduct.get(key, {}).items():
                for a2, ca in self.d(a).items():
                    rhs[(a2, b)] = rhs.get((a2, b), 0) + c * ca
                sign = -1 if a[0] % 2 else 1
                for b2, cb in self.d(b).items():
                    rhs[(a, b2)] = rhs.get((a, b2), 0) + sign * c * cb
            if {k: v for k, v in lhs.items() if v} != {k: v for k, v in rhs.items() if v}:
                return key
        return None

    def validate(self) -> None:
        for name, fn in [("counit", self.counit_witness),
                         ("coassociativity", self.coassociativity_witness),
                         ("cocommutativity", self.cocommutativity_witness),
                         ("compatibility of d and Δ", self.coderivation_witness)]:
            bad = fn()
            if bad is not None:
                raise CoalgebraError(f"{name} fails on {self.labels.get(bad, bad)}")

    def chain_complex(self) -> ChainComplex:
        try:
            return ChainComplex(self.carrier, self.differential, truncation=self.truncation)
        except ValueError as exc:
            raise SignConventionError(str(exc)) from exc


# ---------------------------------------------------------------------------
# the Chevalley-Eilenberg construction


class _Wedge:
    """Bookkeeping for ΛsL: the sL basis and monomial normal forms."""

    def __init__(self, L: FiniteDGL, top: int):
        self.L = L
        self.elems: list[tuple[int, int]] = []  # (L-degree, index)
        for p in L.space.degrees():
            if p + 1 > top:
                continue
            for i in range(L.space.dim(p)):
                self.elems.append((p, i))
        self.pos = {e: n for n, e in enumerate(self.elems)}
        self.sdeg = [p + 1 for p, _ in self.elems]

    def normalize(self, factors: list[int]) -> tuple[int, tuple[int, ...]]:
        """Sort factors with Koszul signs; sign 0 means the monomial vanishes."""
        f = list(factors)
        sign = 1
        sd = self.sdeg
        for i in range(1, len(f)):
            j = i
            while j > 0 and f[j - 1] > f[j]:
                if sd[f[j - 1]] % 2 and sd[f[j]] % 2:
                    sign = -sign
                f[j - 1], f[j] = f[j], f[j - 1]
                j -= 1
        for a, b in zip(f, f[1:]):
            if a == b and sd[a] % 2:
                return 0, ()
        return sign, tuple(f)

    def monomials(self, top: int) -> dict[int, list[tuple[int, ...]]]:
        out: dict[int, list[tuple[int, ...]]] = {0: [()]}

        def grow(start: int, mono: tuple[int, ...], deg: int):
            for n in range(start, len(self.elems)):
                d = deg + self.sdeg[n]
                if d > top:
                    continue
                if self.sdeg[n] % 2 and mono and mono[-1] == n:
                    continue
                new = mono + (n,)
                out.setdefault(d, []).append(new)
                nxt = n + 1 if self.sdeg[n] % 2 else n
                grow(nxt, new, d)

        grow(0, (), 0)
        for d in out:
            out[d].sort()
        return dict(sorted(out.items()))

    def label(self, mono: tuple[int, ...]) -> str:
        if not mono:
            return "1"
        return "∧".join(f"s{self.L.space.basis(p)[i]}" for p, i in (self.elems[n] for n in mono))

    def d0(self, mono: tuple[int, ...]) -> dict[tuple[int, ...], Fraction]:
        out: dict[tuple[int, ...], Fraction] = {}
        n_i = 0
        for idx, n in enumerate(mono):
            p, i = self.elems[n]
            sign = -1 if n_i % 2 else 1
            for j, c in self.L.d(p, i).items():
                m = self.pos[(p - 1, j)]
                s, nf = self.normalize(list(mono[:idx]) + [m] + list(mono[idx + 1:]))
                if s:
                    out[nf] = out.get(nf, 0) - sign * s * c
            n_i += self.sdeg[n]
        return {k: v for k, v in out.items() if v}

    @staticmethod
    def d1_sign(p: int, nij: int) -> int:
        return -1 if (p + 1 + nij) % 2 else 1

    def d1(self, mono: tuple[int, ...]) -> dict[tuple[int, ...], Fraction]:
        out: dict[tuple[int, ...], Fraction] = {}
        sd = self.sdeg
        k = len(mono)
        for i in range(k):
            for j in range(i + 1, k):
                # sign of x1∧…∧xk = (-1)^{n_ij} xi∧xj∧(rest)
                before_i = sum(sd[mono[t]] for t in range(i))
                before_j = sum(sd[mono[t]] for t in range(j) if t != i)
                nij = sd[mono[i]] * before_i + sd[mono[j]] * before_j
                p, a = self.elems[mono[i]]
                q, b = self.elems[mono[j]]
                sign = self.d1_sign(p, nij)
                rest = [mono[t] for t in range(k) if t != i and t != j]
                for r, c in self.L.bracket(p, a, q, b).items():
                    m = self.pos.get((p + q, r))
                    if m is None:
                        raise TruncationError("bracket lands outside the truncated sL")
                    s, nf = self.normalize([m] + rest)
                    if s:
                        out[nf] = out.get(nf, 0) + sign * s * c
        return {kk: v for kk, v in out.items() if v}

    def coproduct(self, mono: tuple[int, ...]) -> dict[tuple[tuple[int, ...], tuple[int, ...]], Fraction]:
        out: dict = {}
        k = len(mono)
        sd = self.sdeg
        for r in range(k + 1):
            for left in combinations(range(k), r):
                lset = set(left)
                sign = 1
                for i in left:
                    for j in range(i):
                        if j not in lset and sd[mono[i]] % 2 and sd[mono[j]] % 2:
                            sign = -sign
                a = tuple(mono[i] for i in left)
                b = tuple(mono[i] for i in range(k) if i not in lset)
                out[(a, b)] = out.get((a, b), 0) + sign
        return {t: Fraction(c) for t, c in out.items() if c}


def ce_construction(L: FreeDGL | FiniteDGL, truncation: int, check: bool = True) -> CDGCoalgebra:
    """C_*(L) = (ΛsL, d0 + d1) through degree ``truncation``."""
    if isinstance(L, FreeDGL):
        L = FiniteDGL.from_free(L, min(L.truncation, truncation - 1))
    if L.top < truncation - 1:
        raise TruncationError(
            f"C_* through degree {truncation} needs L through degree {truncation - 1}")
    w = _Wedge(L, truncation)
    monos = w.monomials(truncation)
    index = {m: (d, i) for d, ms in monos.items() for i, m in enumerate(ms)}
    carrier = GradedVectorSpace({d: tuple(w.label(m) for m in ms) for d, ms in monos.items()})
    mats: dict[int, Matrix] = {}
    for d, ms in monos.items():
        rows = len(monos.get(d - 1, ()))
        mat = zeros(rows, len(ms))
        for j, m in enumerate(ms):
            img = w.d0(m)
            for nf, c in w.d1(m).items():
                img[nf] = img.get(nf, 0) + c
            for nf, c in img.items():
                if c:
                    mat[index[nf][1]][j] = c
        mats[d] = mat
    diff = GradedLinearMap(carrier, carrier, -1, mats)
    coproduct = {}
    for m, key in index.items():
        coproduct[key] = {(index[a], index[b]): c for (a, b), c in w.coproduct(m).items()}
    labels = {key: w.label(m) for m, key in index.items()}
    C = CDGCoalgebra(carrier, coproduct, diff, truncation, labels)
    C.chain_complex()  # raises SignConventionError if d² ≠ 0
    if check:
        C.validate()
    return C


# ---------------------------------------------------------------------------
# the Quillen construction


@dataclass
class QuillenConstruction:
    dgl: FreeDGL
    generator_of: dict[Key, str]  # C̄ basis key -> generator name


def quillen_construction(C: CDGCoalgebra, check: bool = True) -> QuillenConstruction:
    """𝓛(C) = (𝕃(s⁻¹C̄), d0 + d1), truncated at Lie degree N-1.

    d0(s⁻¹c) = -s⁻¹(dc) and d1(s⁻¹c) = ½ Σ (-1)^{|a_i|} [s⁻¹a_i, s⁻¹b_i] where
    Δ̄c = Σ a_i ⊗ b_i is read off term by term from the stored coproduct (a
    symmetric term a⊗a is one summand).
    """
    if C.carrier.dim(1):
        raise CoalgebraError("C must be 1-connected: C̄ has elements in degree 1")
    if any(k < 0 for k in C.carrier.degrees()):
        raise CoalgebraError("negative degrees are not allowed")
    if check:
        bad = C.cocommutativity_witness()
        if bad is not None:
            raise CoalgebraError(f"Δ is not cocommutative on {C.labels.get(bad, bad)}")
    top = C.truncation - 1
    keys = [k for k in C.reduced_keys() if k[0] - 1 <= top]
    gens = [Generator(f"u{n}", k[0] - 1) for n, k in enumerate(keys)]
    name_of = {k: g.name for k, g in zip(keys, gens)}
    alg = FreeLieAlgebra(gens, max(top, 1))
    half = Fraction(1, 2)
    diff: dict[str, LieElement] = {}
    for key in keys:
        val = alg.zero()
        for k2, c in C.d(key).items():
            if k2 != C.UNIT:
                val = val - alg.gen(name_of[k2]) * c
        for (a, b), c in C.reduced_coproduct(key).items():
            sign = -1 if a[0] % 2 else 1
            val = val + alg.bracket(alg.gen(name_of[a]), alg.gen(name_of[b])) * (half * sign * c)
        if val:
            diff[name_of[key]] = val
    dgl = FreeDGL((), diff, algebra=alg)
    return QuillenConstruction(dgl, name_of)


# ---------------------------------------------------------------------------
# duals


@dataclass
class CDGAData:
    """Degreewise dual of a coalgebra: C^k = Hom(C_k, Q) in the dual basis.

    ``product[(α, β)]`` is {γ: coefficient}, with (α·β)(c) = Σ c_i α(a_i) β(b_i)
    for Δc = Σ c_i a_i⊗b_i.  ``differential[k]`` maps C^{k} to C^{k+1} and is
    the transpose of d.
    """

    carrier: GradedVectorSpace
    product: dict[tuple[Key, Key], dict[Key, Fraction]]
    differential: dict[int, Matrix]
    unit: Key
    truncation: int

    def multiply(self, a: Key, b: Key) -> dict[Key, Fraction]:
        return self.product.get((a, b), {})

    def dualize(self) -> CDGCoalgebra:
        cop: dict[Key, dict[tuple[Key, Key], Fraction]] = {}
        for (a, b), img in self.product.items():
            for g, c in img.items():
                cop.setdefault(g, {})[(a, b)] = c
        mats = {}
        for k in self.carrier.degrees():
            rows = self.carrier.dim(k - 1)
            up = self.differential.get(k - 1)
            mats[k] = [list(r) for r in zip(*up)] if up and rows else zeros(rows, self.carrier.dim(k))
        diff = GradedLinearMap(self.carrier, self.carrier, -1, mats)
        return CDGCoalgebra(self.carrier, cop, diff, self.truncation)


def dualize(C: CDGCoalgebra) -> CDGAData:
    product: dict[tuple[Key, Key], dict[Key, Fraction]] = {}
    for g, delta in C.coproduct.items():
        for (a, b), c in delta.items():
            if c:
                product.setdefault((a, b), {})[g] = c
    diff = {}
    for k in C.carrier.degrees():
        if C.carrier.dim(k + 1):
            m = C.differential.matrix(k + 1)
            diff[k] = [list(r) for r in zip(*m)] if m else zeros(C.carrier.dim(k + 1), C.carrier.dim(k))
    return CDGAData(C.carrier, product, diff, C.UNIT, C.truncation)


# ---------------------------------------------------------------------------
# round trip


@dataclass(frozen=True)
class AdjunctionReport:
    cutoff: int
    lie_homology: dict[int, int]
    round_trip_homology: dict[int, int]

    @property
    def passed(self) -> bool:
        return self.lie_homology == self.round_trip_homology


def adjunction_homology_check(L: FreeDGL, truncation: int | None = None) -> AdjunctionReport:
    """Compare H(𝓛C_*(L)) with H(L) through degree N-2."""
    N = L.truncation + 1 if truncation is None else truncation
    cutoff = N - 2
    if cutoff < 1:
        raise TruncationError("truncation too small to compare any degree")
    if L.truncation < N - 1:
        raise TruncationError(f"L must be known through degree {N - 1}")
    C = ce_construction(L, N, check=False)
    LC = quillen_construction(C, check=False).dgl
    h_lie = homology_dims(L.with_truncation(N - 1).chain_complex(), upto=cutoff)
    h_rt = homology_dims(LC.chain_complex(), upto=cutoff)
    return AdjunctionReport(cutoff, h_lie, h_rt)
