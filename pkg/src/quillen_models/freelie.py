"""Free graded Lie algebras over Q.

An element of the free Lie algebra on V is stored through its image in the
tensor algebra TV, where ``[a, b] = ab - (-1)^{|a||b|} ba``.  That image is
canonical, so equality is a dictionary comparison.  Coordinates with respect
to the graded Lyndon basis are recovered by peeling off leading words: the
standard bracketing of a Lyndon word ``w`` expands to ``w`` plus
lexicographically larger words, and for an odd Lyndon word ``w`` the square
``[w, w]`` expands to ``2ww`` plus larger words.

Generators keep the order in which they were declared; that order is the
alphabet order for Lyndon words, so extending an algebra by new generators
leaves the basis of the old one untouched.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .qlinalg import ChainComplex, GradedLinearMap, GradedVectorSpace, Matrix, to_rational, zeros

Word = tuple[int, ...]
Tensor = dict[Word, Fraction]


class TruncationError(ArithmeticError):
    """A computation needed degrees above the truncation bound."""


class LieAlgebraError(ValueError):
    pass


class NotADifferential(LieAlgebraError):
    def __init__(self, message: str, witness: str | None = None):
        super().__init__(message if witness is None else f"{message} (witness: {witness})")
        self.witness = witness


class LieParseError(LieAlgebraError):
    def __init__(self, message: str, token: str | None = None, position: int | None = None):
        if token is not None:
            message = f"{message}: unexpected token {token!r} at position {position}"
        super().__init__(message)
        self.token = token
        self.position = position


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int

    def __post_init__(self):
        if self.degree < 1:
            raise LieAlgebraError(f"generator {self.name!r} must have positive degree")
        if not _NAME_RE.fullmatch(self.name):
            raise LieAlgebraError(f"invalid generator name {self.name!r}")


@dataclass(frozen=True)
class HallWord:
    """A basis element: a Lyndon word with its standard bracketing, or the
    square ``[w, w]`` of an odd Lyndon word."""

    word: Word
    left: "HallWord | None"
    right: "HallWord | None"
    degree: int

    @property
    def length(self) -> int:
        return len(self.word)

    @property
    def is_letter(self) -> bool:
        return self.left is None

    @property
    def is_square(self) -> bool:
        return self.left is not None and self.left.word == self.right.word

    @property
    def lead(self) -> Fraction:
        return Fraction(2) if self.is_square else Fraction(1)

    def sort_key(self):
        return (self.degree, self.word)


# ---------------------------------------------------------------------------
# tensor-level helpers


def _add_into(acc: Tensor, other: Mapping[Word, Fraction], scale: Fraction = Fraction(1)) -> None:
    for w, c in other.items():
        v = acc.get(w, 0) + scale * c
        if v:
            acc[w] = v
        else:
            acc.pop(w, None)


class FreeLieAlgebra:
    """The free graded Lie algebra on ``generators``, truncated at degree N."""

    def __init__(self, generators: Sequence[Generator], truncation: int):
        if truncation < 1:
            raise LieAlgebraError("truncation must be >= 1")
        names = [g.name for g in generators]
        if len(set(names)) != len(names):
            raise LieAlgebraError("duplicate generator names")
        self.generators: tuple[Generator, ...] = tuple(generators)
        self.truncation = truncation
        self.index = {g.name: i for i, g in enumerate(self.generators)}
        self.letter_degrees = tuple(g.degree for g in self.generators)
        self._lyndon: dict[int, list[HallWord]] = {}
        self._basis: dict[int, list[HallWord]] = {}
        self._by_word: dict[Word, HallWord] = {}
        self._expansion: dict[Word, Tensor] = {}

    def __repr__(self) -> str:
        gens = ", ".join(f"{g.name}:{g.degree}" for g in self.generators)
        return f"FreeLieAlgebra([{gens}], N={self.truncation})"

    def same_shape(self, other: "FreeLieAlgebra") -> bool:
        return self.generators == other.generators and self.truncation == other.truncation

    # -- words ------------------------------------------------------------

    def word_degree(self, word: Word) -> int:
        deg = self.letter_degrees
        return sum(deg[i] for i in word)

    def word_text(self, word: Word) -> str:
        return "".join(self.generators[i].name for i in word)

    # -- elements ---------------------------------------------------------

    def zero(self) -> "LieElement":
        return LieElement(self, {})

    def gen(self, name: str) -> "LieElement":
        try:
            i = self.index[name]
        except KeyError:
            raise LieAlgebraError(f"unknown generator {name!r}") from None
        if self.generators[i].degree > self.truncation:
            raise TruncationError(f"generator {name!r} lies above the truncation")
        return LieElement(self, {(i,): Fraction(1)})

    def gens(self) -> list["LieElement"]:
        return [self.gen(g.name) for g in self.generators if g.degree <= self.truncation]

    def bracket(self, x: "LieElement", y: "LieElement") -> "LieElement":
        if x.algebra is not self or y.algebra is not self:
            raise LieAlgebraError("elements belong to different algebras")
        return LieElement(self, self._tensor_bracket(x.terms, y.terms))

    def _tensor_bracket(self, a: Mapping[Word, Fraction], b: Mapping[Word, Fraction]) -> Tensor:
        out: Tensor = {}
        if not a or not b:
            return out
        deg = self.letter_degrees
        da = {w: sum(deg[i] for i in w) for w in a}
        db = {w: sum(deg[i] for i in w) for w in b}
        top = max(da.values()) + max(db.values())
        if top > self.truncation:
            raise TruncationError(f"bracket of degree {top} exceeds truncation {self.truncation}")
        for u, cu in a.items():
            for v, cv in b.items():
                c = cu * cv
                w1 = u + v
                x = out.get(w1, 0) + c
                if x:
                    out[w1] = x
                else:
                    out.pop(w1)
                w2 = v + u
                c2 = c if (da[u] * db[v]) % 2 else -c
                x = out.get(w2, 0) + c2
                if x:
                    out[w2] = x
                else:
                    out.pop(w2)
        return out

    # -- Hall basis -------------------------------------------------------

    def _lyndon_words(self, k: int) -> list[HallWord]:
        if k in self._lyndon:
            return self._lyndon[k]
        found: list[HallWord] = []
        for i, g in enumerate(self.generators):
            if g.degree == k:
                found.append(HallWord((i,), None, None, k))
        for a in range(1, k):
            for u in self._lyndon_words(a):
                for v in self._lyndon_words(k - a):
                    if not u.word < v.word:
                        continue
                    if u.right is not None and u.right.word < v.word:
                        continue
                    found.append(HallWord(u.word + v.word, u, v, k))
        found.sort(key=lambda h: h.word)
        self._lyndon[k] = found
        return found

    def basis(self, k: int) -> list[HallWord]:
        """Hall basis of the degree-k component (empty above the truncation)."""
        if k < 1 or k > self.truncation:
            return []
        if k not in self._basis:
            out = list(self._lyndon_words(k))
            if k % 2 == 0 and (k // 2) % 2 == 1:
                for w in self._lyndon_words(k // 2):
                    out.append(HallWord(w.word + w.word, w, w, k))
            out.sort(key=lambda h: h.word)
            for h in out:
                self._by_word[h.word] = h
            self._basis[k] = out
        return self._basis[k]

    def hall_basis(self, max_degree: int | None = None) -> dict[int, list[HallWord]]:
        top = self.truncation if max_degree is None else min(max_degree, self.truncation)
        return {k: self.basis(k) for k in range(1, top + 1) if self.basis(k)}

    def basis_index(self, k: int) -> dict[Word, int]:
        return {h.word: i for i, h in enumerate(self.basis(k))}

    def expand(self, h: HallWord) -> Tensor:
        """Tensor-algebra image of a basis element."""
        e = self._expansion.get(h.word)
        if e is None:
            if h.is_letter:
                e = {h.word: Fraction(1)}
            else:
                e = self._tensor_bracket(self.expand(h.left), self.expand(h.right))
            self._expansion[h.word] = e
        return e

    def element(self, h: HallWord, coeff=1) -> "LieElement":
        c = to_rational(coeff)
        return LieElement(self, {w: c * x for w, x in self.expand(h).items()} if c else {})

    def hall_word(self, word: Word) -> HallWord:
        k = self.word_degree(word)
        self.basis(k)
        try:
            return self._by_word[word]
        except KeyError:
            raise LieAlgebraError(f"{self.word_text(word)} is not a Hall word") from None

    def coordinates(self, x: "LieElement") -> dict[HallWord, Fraction]:
        """Hall-basis coordinates of ``x`` (raises if x is not a Lie element)."""
        return self._coordinates(x.terms)

    def _coordinates(self, terms: Mapping[Word, Fraction]) -> dict[HallWord, Fraction]:
        rest: Tensor = dict(terms)
        heap = list(rest)
        heapq.heapify(heap)
        out: dict[HallWord, Fraction] = {}
        deg = self.letter_degrees
        while heap:
            w = heapq.heappop(heap)
            c = rest.get(w)
            if not c:
                continue
            k = sum(deg[i] for i in w)
            self.basis(k)
            h = self._by_word.get(w)
            if h is None:
                raise LieAlgebraError(
                    f"tensor with leading word {self.word_text(w)} is not in the free Lie algebra"
                )
            coef = c / h.lead
            out[h] = out.get(h, 0) + coef
            for u, cu in self.expand(h).items():
                v = rest.get(u, 0) - coef * cu
                if v:
                    if u not in rest:
                        heapq.heappush(heap, u)
                    rest[u] = v
                else:
                    rest.pop(u, None)
        return {h: c for h, c in sorted(out.items(), key=lambda t: t[0].sort_key()) if c}

    def vector(self, x: "LieElement", k: int) -> list[Fraction]:
        """Coordinates of the degree-k component of ``x`` in ``basis(k)``."""
        idx = self.basis_index(k)
        v = [Fraction(0)] * len(idx)
        part = {w: c for w, c in x.terms.items() if self.word_degree(w) == k}
        for h, c in self._coordinates(part).items():
            v[idx[h.word]] = c
        return v

    def from_vector(self, k: int, vec: Sequence[Fraction]) -> "LieElement":
        acc: Tensor = {}
        for h, c in zip(self.basis(k), vec):
            if c:
                _add_into(acc, self.expand(h), to_rational(c))
        return LieElement(self, acc)

    def dims(self, max_degree: int | None = None) -> dict[int, int]:
        return {k: len(v) for k, v in self.hall_basis(max_degree).items()}

    def graded_space(self, max_degree: int | None = None) -> GradedVectorSpace:
        return GradedVectorSpace({
            k: tuple(self.format_hall(h) for h in hs) for k, hs in self.hall_basis(max_degree).items()
        })

    # -- text -------------------------------------------------------------

    def format_hall(self, h: HallWord) -> str:
        if h.is_letter:
            return self.generators[h.word[0]].name
        return f"[{self.format_hall(h.left)},{self.format_hall(h.right)}]"

    def format(self, x: "LieElement") -> str:
        coords = self.coordinates(x)
        if not coords:
            return "0"
        parts = []
        for h, c in coords.items():
            body = self.format_hall(h)
            if c == 1:
                term = body
            elif c == -1:
                term = "-" + body
            else:
                term = f"{c}*{body}"
            parts.append(term)
        text = parts[0]
        for p in parts[1:]:
            text += " - " + p[1:] if p.startswith("-") else " + " + p
        return text

    def parse(self, text: str) -> "LieElement":
        return _Parser(self, text).parse()

    # -- maps -------------------------------------------------------------

    def extend(self, new: Sequence[Generator], truncation: int | None = None) -> "FreeLieAlgebra":
        return FreeLieAlgebra(self.generators + tuple(new),
                              self.truncation if truncation is None else truncation)


class LieElement:
    """An element of a free graded Lie algebra (immutable)."""

    __slots__ = ("algebra", "terms", "_hash")

    def __init__(self, algebra: FreeLieAlgebra, terms: Mapping[Word, Fraction]):
        self.algebra = algebra
        self.terms: Tensor = {w: c for w, c in terms.items() if c}
        self._hash = None

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.terms
        if not isinstance(other, LieElement):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    def _check(self, other: "LieElement") -> None:
        if other.algebra is not self.algebra and not other.algebra.same_shape(self.algebra):
            raise LieAlgebraError("elements belong to different algebras")

    def __add__(self, other: "LieElement") -> "LieElement":
        self._check(other)
        acc = dict(self.terms)
        _add_into(acc, other.terms)
        return LieElement(self.algebra, acc)

    def __sub__(self, other: "LieElement") -> "LieElement":
        self._check(other)
        acc = dict(self.terms)
        _add_into(acc, other.terms, Fraction(-1))
        return LieElement(self.algebra, acc)

    def __neg__(self) -> "LieElement":
        return LieElement(self.algebra, {w: -c for w, c in self.terms.items()})

    def __mul__(self, scalar) -> "LieElement":
        c = to_rational(scalar)
        return LieElement(self.algebra, {w: c * x for w, x in self.terms.items()} if c else {})

    __rmul__ = __mul__

    def bracket(self, other: "LieElement") -> "LieElement":
        return self.algebra.bracket(self, other)

    @property
    def degrees(self) -> set[int]:
        return {self.algebra.word_degree(w) for w in self.terms}

    @property
    def degree(self) -> int | None:
        """Degree of a homogeneous element; None for zero."""
        ds = self.degrees
        if not ds:
            return None
        if len(ds) > 1:
            raise LieAlgebraError("element is not homogeneous")
        return ds.pop()

    def component(self, k: int) -> "LieElement":
        return LieElement(self.algebra, {w: c for w, c in self.terms.items()
                                         if self.algebra.word_degree(w) == k})

    def length_component(self, k: int) -> "LieElement":
        """Bracket-length-k part."""
        return LieElement(self.algebra, {w: c for w, c in self.terms.items() if len(w) == k})

    @property
    def bracket_lengths(self) -> set[int]:
        return {len(w) for w in self.terms}

    def coordinates(self) -> dict[HallWord, Fraction]:
        return self.algebra.coordinates(self)

    def __repr__(self) -> str:
        return f"LieElement({self.algebra.format(self)})"

    def __str__(self) -> str:
        return self.algebra.format(self)


def embed(x: LieElement, algebra: FreeLieAlgebra) -> LieElement:
    """Move ``x`` into ``algebra``, matching generators by name."""
    src = x.algebra
    if src is algebra:
        return x
    remap = []
    for g in src.generators:
        j = algebra.index.get(g.name)
        if j is None or algebra.generators[j].degree != g.degree:
            remap.append(None)
        else:
            remap.append(j)
    out: Tensor = {}
    for w, c in x.terms.items():
        try:
            nw = tuple(remap[i] for i in w)
        except TypeError:
            nw = None
        if nw is None or None in nw:
            raise LieAlgebraError("element uses generators missing from the target algebra")
        if algebra.word_degree(nw) > algebra.truncation:
            raise TruncationError("element lies above the target truncation")
        out[nw] = c
    return LieElement(algebra, out)


# ---------------------------------------------------------------------------
# derivations


class Derivation:
    """A derivation of degree ``degree`` determined by its generator values.

    It is extended to TV by the graded Leibniz rule, which restricts to the
    free Lie algebra:  θ[x,y] = [θx,y] + (-1)^{k|x|}[x,θy].
    """

    def __init__(self, algebra: FreeLieAlgebra, degree: int, values: Mapping[str, LieElement]):
        self.algebra = algebra
        self.degree = degree
        self._values: dict[int, Tensor] = {}
        for name, val in values.items():
            if name not in algebra.index:
                raise LieAlgebraError(f"unknown generator {name!r}")
            i = algebra.index[name]
            if val.algebra is not algebra:
                val = embed(val, algebra)
            want = algebra.generators[i].degree + degree
            if val and val.degrees != {want}:
                raise LieAlgebraError(
                    f"value on {name!r} has degree {sorted(val.degrees)}, expected {want}"
                )
            if val:
                self._values[i] = dict(val.terms)
        self._memo: dict[Word, Tensor] = {}

    def value(self, name: str) -> LieElement:
        return LieElement(self.algebra, self._values.get(self.algebra.index[name], {}))

    def _word(self, w: Word) -> Tensor:
        hit = self._memo.get(w)
        if hit is not None:
            return hit
        first = w[0]
        out: Tensor = {}
        head = self._values.get(first)
        rest = w[1:]
        if head:
            for u, c in head.items():
                _add_into(out, {u + rest: c})
        if rest:
            sign = -1 if (self.degree * self.algebra.letter_degrees[first]) % 2 else 1
            for u, c in self._word(rest).items():
                key = (first,) + u
                v = out.get(key, 0) + sign * c
                if v:
                    out[key] = v
                else:
                    out.pop(key)
        self._memo[w] = out
        return out

    def apply_tensor(self, terms: Mapping[Word, Fraction]) -> Tensor:
        out: Tensor = {}
        for w, c in terms.items():
            _add_into(out, self._word(w), c)
        return out

    def __call__(self, x: LieElement) -> LieElement:
        if x.algebra is not self.algebra:
            x = embed(x, self.algebra)
        return LieElement(self.algebra, self.apply_tensor(x.terms))

    def compose_square_vanishes(self) -> str | None:
        """Return the name of a generator on which θ∘θ ≠ 0, or None."""
        for i, g in enumerate(self.algebra.generators):
            if g.degree > self.algebra.truncation:
                continue
            if self.apply_tensor(self._values.get(i, {})):
                return g.name
        return None


def extend_derivation(algebra: FreeLieAlgebra, values: Mapping[str, LieElement], degree: int = -1,
                      differential: bool = True) -> Derivation:
    """Extend generator values to a derivation; reject d² ≠ 0 with a witness."""
    der = Derivation(algebra, degree, values)
    if differential:
        bad = der.compose_square_vanishes()
        if bad is not None:
            raise NotADifferential("d∘d does not vanish", witness=bad)
    return der


# ---------------------------------------------------------------------------
# free dgl's


class FreeDGL:
    """(𝕃_V, d): a free graded Lie algebra with a degree -1 differential.

    The differential is given on generators.  Since d² is itself a
    derivation, d² = 0 on generators gives d² = 0 everywhere; the chain
    complex constructor re-checks it on the full Hall basis anyway.
    """

    def __init__(self, generators: Sequence[Generator], differential: Mapping[str, LieElement | str]
                 | None = None, truncation: int = 8, *, algebra: FreeLieAlgebra | None = None):
        self.algebra = algebra if algebra is not None else FreeLieAlgebra(generators, truncation)
        self.truncation = self.algebra.truncation
        vals = {}
        for name, v in (differential or {}).items():
            if isinstance(v, str):
                v = self.algebra.parse(v)
            if self.algebra.generators[self.algebra.index[name]].degree > self.truncation:
                continue
            vals[name] = v
        self.d = extend_derivation(self.algebra, vals, -1, differential=True)

    @property
    def generators(self) -> tuple[Generator, ...]:
        return self.algebra.generators

    def __repr__(self) -> str:
        parts = [f"d{g.name} = {self.d.value(g.name)}" for g in self.generators
                 if g.degree <= self.truncation]
        return f"FreeDGL({self.algebra!r}; {'; '.join(parts)})"

    def gen(self, name: str) -> LieElement:
        return self.algebra.gen(name)

    def parse(self, text: str) -> LieElement:
        return self.algebra.parse(text)

    def differential_of(self, name: str) -> LieElement:
        return self.d.value(name)

    def extend(self, new: Sequence[Generator], values: Mapping[str, LieElement | str]) -> "FreeDGL":
        """Adjoin generators with the given differentials (d on old ones kept)."""
        alg = self.algebra.extend(new)
        diff: dict[str, LieElement] = {}
        for g in self.generators:
            if g.degree <= self.truncation:
                v = self.d.value(g.name)
                if v:
                    diff[g.name] = embed(v, alg)
        for name, v in values.items():
            diff[name] = alg.parse(v) if isinstance(v, str) else embed(v, alg)
        return FreeDGL((), diff, algebra=alg)

    def with_truncation(self, truncation: int) -> "FreeDGL":
        alg = FreeLieAlgebra(self.generators, truncation)
        diff = {}
        for g in self.generators:
            if g.degree <= min(truncation, self.truncation):
                v = self.d.value(g.name)
                if v:
                    diff[g.name] = embed(v, alg)
        if truncation > self.truncation and any(
                self.truncation < g.degree <= truncation for g in self.generators):
            raise TruncationError("differential unknown above the original truncation")
        return FreeDGL((), diff, algebra=alg)

    def differential_matrix(self, k: int) -> Matrix:
        """Matrix of d: L_k → L_{k-1} in Hall bases."""
        alg = self.algebra
        src = alg.basis(k)
        tgt_idx = alg.basis_index(k - 1)
        m = zeros(len(tgt_idx), len(src))
        for j, h in enumerate(src):
            img = self.d.apply_tensor(alg.expand(h))
            if not img:
                continue
            for hh, c in alg._coordinates(img).items():
                m[tgt_idx[hh.word]][j] = c
        return m

    @cached_property
    def _complex(self) -> ChainComplex:
        space = self.algebra.graded_space()
        mats = {k: self.differential_matrix(k) for k in space.degrees()}
        d = GradedLinearMap(space, space, -1, mats)
        try:
            return ChainComplex(space, d, truncation=self.truncation)
        except ValueError as exc:
            raise NotADifferential(str(exc)) from exc

    def chain_complex(self) -> ChainComplex:
        return self._complex

    def decomposition(self, name: str) -> dict[int, LieElement]:
        """d = d0 + d1 + ... on a generator: {k: d_k(name)} (d_k raises length by k)."""
        v = self.d.value(name)
        return {k - 1: v.length_component(k) for k in sorted(v.bracket_lengths)}

    def linear_part(self) -> ChainComplex:
        """(V, d_V): the bracket-length-one part of d restricted to generators."""
        gens = [g for g in self.generators if g.degree <= self.truncation]
        space = GradedVectorSpace(_group_names(gens))
        pos = {g.name: (g.degree, space.basis(g.degree).index(g.name)) for g in gens}
        mats = {k: zeros(space.dim(k - 1), space.dim(k)) for k in space.degrees()}
        for g in gens:
            k, j = pos[g.name]
            lin = self.d.value(g.name).length_component(1)
            for w, c in lin.terms.items():
                name = self.algebra.generators[w[0]].name
                mats[k][pos[name][1]][j] = c
        d = GradedLinearMap(space, space, -1, mats)
        return ChainComplex(space, d, truncation=None)

    def is_minimal(self) -> bool:
        return all(not self.d.value(g.name).length_component(1)
                   for g in self.generators if g.degree <= self.truncation)

    def generator_space(self) -> GradedVectorSpace:
        return GradedVectorSpace(_group_names([g for g in self.generators
                                               if g.degree <= self.truncation]))


def _group_names(gens: Iterable[Generator]) -> dict[int, tuple[str, ...]]:
    out: dict[int, list[str]] = {}
    for g in gens:
        out.setdefault(g.degree, []).append(g.name)
    return {k: tuple(v) for k, v in out.items()}


class LieMorphism:
    """A morphism of free graded Lie algebras, given on generators.

    It acts on tensor words multiplicatively, which restricts to the Lie
    morphism extending the generator values.
    """

    def __init__(self, source: FreeDGL, target: FreeDGL, images: Mapping[str, LieElement | str],
                 check: bool = True):
        self.source = source
        self.target = target
        talg = target.algebra
        self._images: dict[int, Tensor] = {}
        for g in source.generators:
            if g.degree > source.truncation:
                continue
            v = images.get(g.name, talg.zero())
            if isinstance(v, str):
                v = talg.parse(v)
            elif v.algebra is not talg:
                v = embed(v, talg)
            if v and v.degrees != {g.degree}:
                raise LieAlgebraError(f"image of {g.name!r} has the wrong degree")
            self._images[source.algebra.index[g.name]] = dict(v.terms)
        self._memo: dict[Word, Tensor] = {}
        if check:
            bad = self.chain_map_witness()
            if bad is not None:
                raise LieAlgebraError(f"not a chain map: fails on generator {bad!r}")

    def image(self, name: str) -> LieElement:
        return LieElement(self.target.algebra,
                          self._images.get(self.source.algebra.index[name], {}))

    def _word(self, w: Word) -> Tensor:
        hit = self._memo.get(w)
        if hit is not None:
            return hit
        head = self._images.get(w[0], {})
        if len(w) == 1:
            out = dict(head)
        else:
            rest = self._word(w[1:])
            out = {}
            for u, cu in head.items():
                for v, cv in rest.items():
                    key = u + v
                    x = out.get(key, 0) + cu * cv
                    if x:
                        out[key] = x
                    else:
                        out.pop(key)
        self._memo[w] = out
        return out

    def apply_tensor(self, terms: Mapping[Word, Fraction]) -> Tensor:
        out: Tensor = {}
        for w, c in terms.items():
            _add_into(out, self._word(w), c)
        return out

    def __call__(self, x: LieElement) -> LieElement:
        if x.algebra is not self.source.algebra:
            x = embed(x, self.source.algebra)
        return LieElement(self.target.algebra, self.apply_tensor(x.terms))

    def chain_map_witness(self) -> str | None:
        for g in self.source.generators:
            if g.degree > self.source.truncation:
                continue
            lhs = self(self.source.d.value(g.name))
            rhs = self.target.d(self.image(g.name))
            if lhs != rhs:
                return g.name
        return None

    def compose(self, first: "LieMorphism") -> "LieMorphism":
        """``self ∘ first``."""
        imgs = {g.name: self(first.image(g.name)) for g in first.source.generators
                if g.degree <= first.source.truncation}
        return LieMorphism(first.source, self.target, imgs, check=False)

    def matrix(self, k: int) -> Matrix:
        """Matrix of the degree-k component in Hall bases."""
        salg, talg = self.source.algebra, self.target.algebra
        src = salg.basis(k)
        idx = talg.basis_index(k)
        m = zeros(len(idx), len(src))
        for j, h in enumerate(src):
            img = self.apply_tensor(salg.expand(h))
            for hh, c in talg._coordinates(img).items():
                m[idx[hh.word]][j] = c
        return m

    def chain_map(self) -> GradedLinearMap:
        s = self.source.chain_complex().space
        t = self.target.chain_complex().space
        return GradedLinearMap(s, t, 0, {k: self.matrix(k) for k in s.degrees()})

    def linear_part(self) -> GradedLinearMap:
        """Q(φ): V → W, the bracket-length-one component on generators."""
        s = self.source.generator_space()
        t = self.target.generator_space()
        mats = {}
        for k in s.degrees():
            m = zeros(t.dim(k), s.dim(k))
            tnames = t.basis(k)
            for j, name in enumerate(s.basis(k)):
                lin = self.image(name).length_component(1)
                for w, c in lin.terms.items():
                    m[tnames.index(self.target.algebra.generators[w[0]].name)][j] = c
            mats[k] = m
        return GradedLinearMap(s, t, 0, mats)

    @classmethod
    def identity(cls, dgl: FreeDGL) -> "LieMorphism":
        return cls(dgl, dgl, {g.name: dgl.gen(g.name) for g in dgl.generators
                              if g.degree <= dgl.truncation}, check=False)

    @classmethod
    def inclusion(cls, source: FreeDGL, target: FreeDGL) -> "LieMorphism":
        imgs = {g.name: target.gen(g.name) for g in source.generators
                if g.degree <= source.truncation}
        return cls(source, target, imgs)


def hall_basis(generators: Sequence[Generator], max_degree: int) -> dict[int, list[HallWord]]:
    if max_degree < 1:
        raise LieAlgebraError("max_degree must be >= 1")
    return FreeLieAlgebra(generators, max_degree).hall_basis()


# ---------------------------------------------------------------------------
# text syntax:  2*[v,[v,w]] - 1/2*[w,w] + u


_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.']*")
_TOKEN_RE = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_.']*)|(?P<op>[\[\],+\-*()]))")


class _Parser:
    def __init__(self, algebra: FreeLieAlgebra, text: str):
        self.algebra = algebra
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOKEN_RE.match(stripped, pos)
            if not m or m.end() == pos:
                bad = stripped[pos:].lstrip()[:1]
                raise LieParseError("cannot parse Lie element", bad, pos)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self, value: str | None = None):
        tok = self.peek()
        if tok is None:
            raise LieParseError(f"unexpected end of input in {self.text!r}")
        if value is not None and tok[1] != value:
            raise LieParseError(f"expected {value!r}", tok[1], tok[2])
        self.i += 1
        return tok

    def parse(self) -> LieElement:
        if not self.tokens:
            raise LieParseError("empty Lie element")
        x = self.expr()
        tok = self.peek()
        if tok is not None:
            raise LieParseError("trailing input", tok[1], tok[2])
        return x

    def expr(self) -> LieElement:
        sign = 1
        tok = self.peek()
        if tok and tok[1] in "+-" and tok[0] == "op":
            self.take()
            sign = -1 if tok[1] == "-" else 1
        acc = self.term() * sign
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "+-":
                self.take()
                t = self.term()
                acc = acc + t if tok[1] == "+" else acc - t
            else:
                return acc

    def term(self) -> LieElement:
        tok = self.peek()
        if tok and tok[0] == "num":
            self.take()
            coef = Fraction(tok[1])
            nxt = self.peek()
            if nxt and nxt[1] == "*":
                self.take()
                return self.atom() * coef
            if coef == 0:
                return self.algebra.zero()
            raise LieParseError("a bare nonzero scalar is not a Lie element", tok[1], tok[2])
        return self.atom()

    def atom(self) -> LieElement:
        tok = self.take()
        kind, val, pos = tok
        if kind == "name":
            if val not in self.algebra.index:
                raise LieParseError("unknown generator", val, pos)
            return self.algebra.gen(val)
        if val == "[":
            a = self.expr()
            self.take(",")
            b = self.expr()
            self.take("]")
            return self.algebra.bracket(a, b)
        if val == "(":
            a = self.expr()
            self.take(")")
            return a
        raise LieParseError("cannot parse Lie element", val, pos)
