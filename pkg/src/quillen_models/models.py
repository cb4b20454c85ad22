"""Free and minimal Quillen models of spaces given by cell attachments."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .cecobar import FiniteDGL, ce_construction
from .freelie import (FreeDGL, FreeLieAlgebra, Generator, LieAlgebraError, LieElement, LieMorphism,
                      TruncationError, embed)
from .qlinalg import (ChainComplex, GradedLinearMap, GradedVectorSpace, Homology, homology,
                      is_quasi_iso, matmul, reduce, solve, zeros)

LieRepresentative = LieMorphism


class ModelError(ValueError):
    pass


class AttachingError(ModelError):
    def __init__(self, message: str, witness: str | None = None, stage: int | None = None):
        text = message
        if witness is not None:
            text += f" (witness: {witness})"
        if stage is not None:
            text = f"stage {stage}: {text}"
        super().__init__(text)
        self.witness = witness
        self.stage = stage


@dataclass(frozen=True)
class Cell:
    name: str
    dimension: int
    attach: str = "0"

    @property
    def generator_degree(self) -> int:
        return self.dimension - 1


@dataclass(frozen=True)
class Stage:
    value: Fraction
    cells: tuple[Cell, ...] = ()


@dataclass(frozen=True)
class CellComplexDescription:
    """A filtered cell complex: stages at increasing filtration values.

    Each cell of dimension r+1 contributes a generator of degree r whose
    differential is the attaching cycle (degree r-1) in the current model.
    """

    stages: tuple[Stage, ...]
    name: str = ""

    def __post_init__(self):
        if not self.stages:
            raise ModelError("no stages")
        values = [s.value for s in self.stages]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ModelError("stage values must be strictly increasing")
        seen = set()
        for n, st in enumerate(self.stages):
            for c in st.cells:
                if c.dimension <= 1:
                    raise AttachingError(f"cell {c.name!r} has dimension {c.dimension}; "
                                         "simply connected complexes have no 0- or 1-cells",
                                         stage=n)
                if c.name in seen:
                    raise AttachingError(f"duplicate cell name {c.name!r}", stage=n)
                seen.add(c.name)

    def shifted(self, delta) -> "CellComplexDescription":
        delta = Fraction(delta)
        return CellComplexDescription(tuple(Stage(s.value + delta, s.cells) for s in self.stages),
                                      self.name)

    def max_cell_dimension(self) -> int:
        return max((c.dimension for s in self.stages for c in s.cells), default=0)


@dataclass
class LieModelOfSpace:
    dgl: FreeDGL
    provenance: str = ""


def sphere_model(n: int, truncation: int = 8, name: str = "v") -> LieModelOfSpace:
    """𝕃(v) with deg v = n-1 and d = 0, a model of the n-sphere."""
    if n <= 1:
        raise ModelError("sphere_model needs n >= 2")
    if n - 1 > truncation:
        raise TruncationError(f"S^{n} needs truncation >= {n - 1}")
    return LieModelOfSpace(FreeDGL([Generator(name, n - 1)], {}, truncation), f"S^{n}")


def point_model(truncation: int = 8) -> LieModelOfSpace:
    return LieModelOfSpace(FreeDGL([], {}, truncation), "point")


def attach_cells(model: LieModelOfSpace, cells: Sequence[Cell | tuple], stage: int | None = None,
                 provenance: str | None = None) -> LieModelOfSpace:
    """Adjoin w_α with dw_α = z_α for each cell α of dimension r+1 (deg w_α = r)."""
    dgl = model.dgl
    N = dgl.truncation
    cells = [c if isinstance(c, Cell) else Cell(*c) for c in cells]
    for c in cells:
        if c.dimension <= 1:
            raise AttachingError(f"cell {c.name!r} has dimension {c.dimension}", stage=stage)
        if c.dimension - 1 > N:
            raise TruncationError(
                f"cell {c.name!r} of dimension {c.dimension} needs truncation >= {c.dimension - 1}")
    # cells may attach to lower-dimensional cells of the same batch, so
    # attaching classes are read one dimension at a time
    work, values, seen = dgl, {}, set()
    for dim in sorted({c.dimension for c in cells}):
        r = dim - 1
        layer = [c for c in cells if c.dimension == dim]
        for c in layer:
            if c.name in work.algebra.index or c.name in seen:
                raise AttachingError(f"generator {c.name!r} already exists", stage=stage)
            seen.add(c.name)
            z = c.attach
            if isinstance(z, str):
                try:
                    z = work.parse(z)
                except LieAlgebraError as exc:
                    raise AttachingError(f"attaching class of {c.name!r}: {exc}",
                                         stage=stage) from exc
            if z and z.degrees != {r - 1}:
                raise AttachingError(
                    f"attaching class of {c.name!r} has degree {sorted(z.degrees)}, "
                    f"expected {r - 1}", witness=str(z), stage=stage)
            if work.d(z):
                raise AttachingError(f"attaching class of {c.name!r} is not a cycle",
                                     witness=f"d({z}) = {work.d(z)}", stage=stage)
            values[c.name] = z
        work = work.extend([Generator(c.name, r) for c in layer],
                           {c.name: values[c.name] for c in layer})
    out = dgl.extend([Generator(c.name, c.dimension - 1) for c in cells], values)
    return LieModelOfSpace(out, provenance if provenance is not None else model.provenance)


@dataclass
class SkeletalModel:
    """Stage-indexed free models with inclusion structure maps."""

    values: tuple[Fraction, ...]
    stages: tuple[LieModelOfSpace, ...]
    maps: tuple[LieMorphism, ...]  # stage i -> stage i+1
    birth: dict[str, Fraction] = field(default_factory=dict)


def skeletal_persistence_model(complex: CellComplexDescription, truncation: int) -> SkeletalModel:
    model = point_model(truncation)
    stages, maps, birth = [], [], {}
    for n, st in enumerate(complex.stages):
        try:
            nxt = attach_cells(model, st.cells, stage=n, provenance=f"{complex.name}@{st.value}")
        except AttachingError:
            raise
        except TruncationError as exc:
            raise TruncationError(f"stage {n}: {exc}") from exc
        for c in st.cells:
            birth[c.name] = st.value
        if stages:
            maps.append(LieMorphism.inclusion(stages[-1].dgl, nxt.dgl))
        stages.append(nxt)
        model = nxt
    return SkeletalModel(tuple(s.value for s in complex.stages), tuple(stages), tuple(maps), birth)


# ---------------------------------------------------------------------------
# minimalization


@dataclass
class MinimalModel:
    """A minimal model with a surjective quasi-isomorphism and a dgl section."""

    dgl: FreeDGL
    projection: LieMorphism  # free -> minimal
    section: LieMorphism     # minimal -> free, projection ∘ section = id
    cancelled: tuple[tuple[str, str], ...] = ()


def _kernel_basis(m, cols: int):
    return [list(v) for v in reduce(m, cols=cols).kernel]


def _cancel_once(dgl: FreeDGL) -> tuple[FreeDGL, LieMorphism, tuple[str, str]] | None:
    gens = [g for g in dgl.generators]
    by_degree = sorted({g.degree for g in gens})
    for k in by_degree:
        for b in gens:
            if b.degree != k + 1:
                continue
            lin = dgl.d.value(b.name).length_component(1)
            if not lin:
                continue
            alg = dgl.algebra
            coeffs = {alg.generators[w[0]].name: c for w, c in lin.terms.items()}
            pivot = next(g.name for g in gens if g.name in coeffs)
            cp = coeffs[pivot]
            rest = dgl.d.value(b.name) - dgl.gen(pivot) * cp
            keep = [g for g in gens if g.name not in (pivot, b.name)]
            new_alg = FreeLieAlgebra(keep, dgl.truncation)
            images = {g.name: new_alg.gen(g.name) for g in keep}
            images[b.name] = new_alg.zero()
            images[pivot] = embed(rest, new_alg) * (-1 / cp)
            proj = LieMorphism(dgl, FreeDGL((), {}, algebra=new_alg), images, check=False)
            diff = {g.name: proj(dgl.d.value(g.name)) for g in keep}
            target = FreeDGL((), diff, algebra=new_alg)
            proj = LieMorphism(dgl, target, images, check=True)
            return target, proj, (pivot, b.name)
    return None


def _section(free: FreeDGL, minimal: FreeDGL, proj: LieMorphism) -> LieMorphism:
    """A dgl map σ: minimal → free with proj ∘ σ = id, built degree by degree.

    For each generator w, σ(w) = w + c where c ∈ ker(proj) solves
    d c = σ(d̄w) - dw; ker(proj) is acyclic because proj is a surjective
    quasi-isomorphism.
    """
    falg = free.algebra
    images: dict[str, LieElement] = {}
    partial = None
    kernels: dict[int, list[list[Fraction]]] = {}
    for g in sorted(minimal.generators, key=lambda g: g.degree):
        m = g.degree
        images_so_far = dict(images)
        partial = LieMorphism(minimal, free, images_so_far, check=False)
        target = partial(minimal.d.value(g.name))
        err = target - free.d(free.gen(g.name))
        if not err:
            images[g.name] = free.gen(g.name)
            continue
        if m not in kernels:
            pm = proj.matrix(m)
            kernels[m] = _kernel_basis(pm, len(falg.basis(m)))
        K = kernels[m]
        D = free.differential_matrix(m)
        DK = matmul(D, [list(r) for r in zip(*K)], inner=len(falg.basis(m)), cols=len(K)) if K else \
            zeros(len(falg.basis(m - 1)), 0)
        y = solve(DK, falg.vector(err, m - 1), a_cols=len(K))
        if y is None:
            raise ModelError(f"cannot lift generator {g.name!r}: kernel is not acyclic")
        c = [sum((K[t][i] * y[t] for t in range(len(K))), Fraction(0)) for i in range(len(falg.basis(m)))]
        images[g.name] = free.gen(g.name) + falg.from_vector(m, c)
    return LieMorphism(minimal, free, images, check=True)


def minimalize(dgl: FreeDGL) -> MinimalModel:
    """Minimal model by cancelling contractible pairs (b, a = d₀b) in
    ascending degree.

    Each step replaces a by db (a change of generators) and divides out the
    dg ideal generated by {db, b}; the quotient map induces a quasi-iso on
    linear parts, hence is a quasi-isomorphism.
    """
    if any(g.degree > dgl.truncation for g in dgl.generators):
        raise TruncationError("generators above the truncation have unknown differential")
    current = dgl
    proj = LieMorphism.identity(dgl)
    cancelled = []
    while not current.is_minimal():
        step = _cancel_once(current)
        if step is None:  # pragma: no cover - is_minimal guarantees a pair
            break
        current, p, pair = step
        proj = p.compose(proj)
        cancelled.append(pair)
    if current is dgl:
        ident = LieMorphism.identity(dgl)
        return MinimalModel(dgl, ident, ident, ())
    proj = LieMorphism(dgl, current, {g.name: proj.image(g.name) for g in dgl.generators},
                       check=True)
    sec = _section(dgl, current, proj)
    return MinimalModel(current, proj, sec, tuple(cancelled))


# ---------------------------------------------------------------------------
# homotopy and homology


@dataclass
class HomotopyLieAlgebra:
    """H(L) with its induced bracket; π_{k+1}(X)⊗Q = H_k(L)."""

    dgl: FreeDGL
    homology: Homology
    cutoff: int

    def dims(self) -> dict[int, int]:
        return self.homology.dims(self.cutoff)

    def pi_dims(self) -> dict[int, int]:
        return {k + 1: v for k, v in self.dims().items()}

    def representative(self, k: int, i: int) -> LieElement:
        rep = self.homology.degrees[k].representatives[i]
        return self.dgl.algebra.from_vector(k, rep)

    def bracket(self, p: int, i: int, q: int, j: int) -> list[Fraction]:
        """Homology coordinates of [x_{p,i}, x_{q,j}] in degree p+q."""
        if p + q > self.cutoff:
            raise TruncationError("bracket lands above the cutoff")
        z = self.dgl.algebra.bracket(self.representative(p, i), self.representative(q, j))
        hd = self.homology.degrees.get(p + q)
        if hd is None or hd.dim == 0:
            return []
        return hd.coordinates(self.dgl.algebra.vector(z, p + q))

    def labels(self) -> dict[int, list[str]]:
        return {k: [str(self.representative(k, i)) for i in range(n)] for k, n in self.dims().items()}


def pi_star(model: LieModelOfSpace | FreeDGL, cutoff: int | None = None) -> HomotopyLieAlgebra:
    dgl = model.dgl if isinstance(model, LieModelOfSpace) else model
    cutoff = dgl.truncation - 2 if cutoff is None else cutoff
    return HomotopyLieAlgebra(dgl, homology(dgl.chain_complex(), upto=cutoff), cutoff)


def h_star(model: LieModelOfSpace | FreeDGL) -> GradedVectorSpace:
    """H_*(X) = sV ⊕ Q for a minimal model 𝕃_V."""
    dgl = model.dgl if isinstance(model, LieModelOfSpace) else model
    if not dgl.is_minimal():
        raise ModelError("h_star needs a minimal model; minimalize first")
    comps = {0: ("1",)}
    for k, names in dgl.generator_space().components.items():
        comps[k + 1] = tuple(f"s{n}" for n in names)
    return GradedVectorSpace(comps)


def suspended_linear_homology(dgl: FreeDGL) -> dict[int, int]:
    """Dimensions of sH(V, d_V) ⊕ Q computed from any free model."""
    from .qlinalg import homology_dims

    dims = {0: 1}
    for k, n in homology_dims(dgl.linear_part()).items():
        dims[k + 1] = dims.get(k + 1, 0) + n
    return dims


@dataclass
class CEProjection:
    source: ChainComplex
    target: ChainComplex
    map: GradedLinearMap

    def is_quasi_iso(self):
        return is_quasi_iso(self.map, self.source, self.target)


def ce_projection(model: LieModelOfSpace | FreeDGL, truncation: int | None = None) -> CEProjection:
    """C_*(𝕃_V) → (sV ⊕ Q, d̄), killing Λ^{≥2} and brackets of length ≥ 2.

    d̄(sv) = -s(d_V v), matching the sign of d0 on single wedge factors.
    """
    dgl = model.dgl if isinstance(model, LieModelOfSpace) else model
    N = dgl.truncation + 1 if truncation is None else truncation
    L = FiniteDGL.from_free(dgl, N - 1)
    C = ce_construction(L, N, check=False)
    alg = dgl.algebra
    gens = [g for g in dgl.generators if g.degree + 1 <= N]
    tcomps: dict[int, tuple[str, ...]] = {0: ("1",)}
    for g in gens:
        tcomps[g.degree + 1] = tcomps.get(g.degree + 1, ()) + (f"s{g.name}",)
    tspace = GradedVectorSpace(tcomps)
    lin = dgl.linear_part()
    tmats = {}
    for k in tspace.degrees():
        m = zeros(tspace.dim(k - 1), tspace.dim(k))
        if k >= 2 and tspace.dim(k - 1):
            src = lin.differential.matrix(k - 1)
            for r, row in enumerate(src):
                for c, x in enumerate(row):
                    m[r][c] = -x
        tmats[k] = m
    target = ChainComplex(tspace, GradedLinearMap(tspace, tspace, -1, tmats))
    # positions of generators inside the Hall basis of each degree
    letter_pos = {}
    for g in gens:
        for i, h in enumerate(alg.basis(g.degree)):
            if h.is_letter and alg.generators[h.word[0]].name == g.name:
                letter_pos[(g.degree, i)] = tspace.basis(g.degree + 1).index(f"s{g.name}")
    source = C.chain_complex()
    # the wedge monomial labels are "s<hall>" joined by ∧; single factors
    # are found by matching labels
    mats = {}
    for k in C.carrier.degrees():
        m = zeros(tspace.dim(k), C.carrier.dim(k))
        if k == 0:
            m[0][0] = Fraction(1)
        else:
            for (p, i), t in letter_pos.items():
                if p + 1 != k:
                    continue
                label = "s" + L.space.basis(p)[i]
                j = C.carrier.basis(k).index(label)
                m[t][j] = Fraction(1)
        mats[k] = m
    fmap = GradedLinearMap(C.carrier, tspace, 0, mats)
    return CEProjection(source, target, fmap)


def lie_representative_linear_part(rep: LieMorphism) -> GradedLinearMap:
    return rep.linear_part()


def induced_representative(free_s: MinimalModel, free_t: MinimalModel, incl: LieMorphism) -> LieMorphism:
    """proj_t ∘ incl ∘ section_s: a Lie representative between minimal models."""
    return free_t.projection.compose(incl.compose(free_s.section))
