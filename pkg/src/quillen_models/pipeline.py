"""From filtered cell complexes to barcodes and stability reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .freelie import FreeDGL, LieMorphism
from .models import (CellComplexDescription, MinimalModel, ModelError, SkeletalModel,
                     induced_representative, minimalize, skeletal_persistence_model)
from .persist import (INF, Barcode, DiagramCertificate, GradedModule, Grid, PersistenceModule,
                      Value, barcode, format_value, interleaving_distance, pushforward,
                      pushforward_certificate, verify_interleaving)
from .qlinalg import Homology, Matrix, homology, identity, induced_map, zeros


@dataclass
class PersistenceQuillenModel:
    """Free stages with inclusions and, optionally, minimal stages.

    Minimal stages are connected by Lie representatives
    proj_{i+1} ∘ incl_i ∘ section_i; these compose only up to homotopy.
    """

    complex: CellComplexDescription
    truncation: int
    free: SkeletalModel
    minimal: tuple[MinimalModel, ...] | None = None
    representatives: tuple[LieMorphism, ...] = ()

    @property
    def grid(self) -> Grid:
        return Grid(self.free.values)

    @property
    def cutoff(self) -> int:
        return self.truncation - 2

    @property
    def stages(self) -> tuple[FreeDGL, ...]:
        return tuple(s.dgl for s in self.free.stages)

    def minimal_flags(self) -> tuple[bool, ...]:
        return tuple(d.is_minimal() for d in self.stages)

    def is_minimal(self) -> bool:
        """Whether minimal stages are available (built or already minimal)."""
        return self.minimal is not None or all(self.minimal_flags())

    def free_diagram(self) -> PersistenceModule:
        return PersistenceModule(self.grid, self.stages, self.free.maps,
                                 _compose, LieMorphism.identity)

    def minimal_diagram(self) -> PersistenceModule:
        if self.minimal is not None:
            return PersistenceModule(self.grid, tuple(m.dgl for m in self.minimal),
                                     self.representatives, _compose, LieMorphism.identity)
        if all(self.minimal_flags()):
            return self.free_diagram()
        raise ModelError("model has non-minimal stages; build it with minimal=True")


def _compose(g: LieMorphism, f: LieMorphism) -> LieMorphism:
    return g.compose(f)


def build_persistence_model(complex: CellComplexDescription, truncation: int = 8,
                            minimal: bool = True) -> PersistenceQuillenModel:
    free = skeletal_persistence_model(complex, truncation)
    model = PersistenceQuillenModel(complex, truncation, free)
    if minimal and not all(model.minimal_flags()):
        mins = tuple(minimalize(d) for d in model.stages)
        reps = tuple(induced_representative(mins[i], mins[i + 1], free.maps[i])
                     for i in range(len(free.maps)))
        model.minimal = mins
        model.representatives = reps
    return model


# ---------------------------------------------------------------------------
# functors to graded vector spaces


class HomologyFunctor:
    """H_*(L) through a cutoff degree; morphisms act on chosen homology bases."""

    def __init__(self, cutoff: int):
        self.cutoff = cutoff
        self._cache: dict[int, tuple[FreeDGL, Homology]] = {}

    def homology(self, dgl: FreeDGL) -> Homology:
        hit = self._cache.get(id(dgl))
        if hit is None or hit[0] is not dgl:
            hit = (dgl, homology(dgl.chain_complex(), upto=self.cutoff))
            self._cache[id(dgl)] = hit
        return hit[1]

    def on_object(self, dgl: FreeDGL) -> dict[int, int]:
        return self.homology(dgl).dims(self.cutoff)

    def on_morphism(self, phi: LieMorphism, source: FreeDGL, target: FreeDGL) -> dict[int, Matrix]:
        hs, ht = self.homology(source), self.homology(target)
        out = induced_map(phi.chain_map(), hs, ht)
        return {k: m for k, m in out.items() if k <= self.cutoff and hs.dim(k) and ht.dim(k)}


class IndecomposablesFunctor:
    """Q(L) = V on minimal free dgl's, with Q(φ) the linear part of φ."""

    def __init__(self, cutoff: int | None = None):
        self.cutoff = cutoff

    def _keep(self, k: int) -> bool:
        return self.cutoff is None or k <= self.cutoff

    def on_object(self, dgl: FreeDGL) -> dict[int, int]:
        return {k: v for k, v in dgl.generator_space().dims().items() if self._keep(k)}

    def on_morphism(self, phi: LieMorphism, source: FreeDGL, target: FreeDGL) -> dict[int, Matrix]:
        lin = phi.linear_part()
        return {k: lin.matrix(k) for k in lin.source.degrees() if self._keep(k)}


class LinearHomologyFunctor:
    """sH(V, d_V) ⊕ ℚ: the homology of the space, read off any free model.

    The cutoff applies to the degree in V, as for the other functors.
    """

    def __init__(self, cutoff: int | None = None):
        self.cutoff = cutoff
        self._cache: dict[int, tuple[FreeDGL, Homology]] = {}

    def _homology(self, dgl: FreeDGL) -> Homology:
        hit = self._cache.get(id(dgl))
        if hit is None or hit[0] is not dgl:
            hit = (dgl, homology(dgl.linear_part()))
            self._cache[id(dgl)] = hit
        return hit[1]

    def _keep(self, k: int) -> bool:
        return self.cutoff is None or k <= self.cutoff

    def on_object(self, dgl: FreeDGL) -> dict[int, int]:
        dims = {0: 1}
        for k, n in self._homology(dgl).dims().items():
            if self._keep(k):
                dims[k + 1] = n
        return dims

    def on_morphism(self, phi: LieMorphism, source: FreeDGL, target: FreeDGL) -> dict[int, Matrix]:
        hs, ht = self._homology(source), self._homology(target)
        out = {0: identity(1)}
        for k, m in induced_map(phi.linear_part(), hs, ht).items():
            if self._keep(k) and hs.dim(k) and ht.dim(k):
                out[k + 1] = m
        return out


# ---------------------------------------------------------------------------
# barcodes


def pi_module(model: PersistenceQuillenModel, minimal: bool = False) -> GradedModule:
    """π_*(X)⊗ℚ as a persistence module, indexed by homotopy degree."""
    diagram = model.minimal_diagram() if minimal else model.free_diagram()
    return pushforward(diagram, HomologyFunctor(model.cutoff)).suspend(1)


def pi_barcode(model: PersistenceQuillenModel, minimal: bool = False) -> Barcode:
    return barcode(pi_module(model, minimal))


def generator_module(model: PersistenceQuillenModel) -> GradedModule:
    """𝕍 with 𝕍_t = Q of the minimal model at t (not suspended)."""
    if not model.is_minimal():
        raise ModelError("generator modules need minimal stages")
    return pushforward(model.minimal_diagram(), IndecomposablesFunctor(model.cutoff))


def _with_unit(module: GradedModule) -> GradedModule:
    dims = tuple({**d, 0: 1} for d in module.dims)
    maps = tuple({**m, 0: identity(1)} for m in module.maps)
    return GradedModule(module.grid, dims, maps)


def h_module(model: PersistenceQuillenModel) -> GradedModule:
    """H_*(X) = s𝕍 ⊕ ℚ as a persistence module."""
    return _with_unit(generator_module(model).suspend(1))


def h_barcode(model: PersistenceQuillenModel) -> Barcode:
    if not model.is_minimal():
        raise ModelError("h_barcode needs minimal stages")
    return barcode(h_module(model))


def h_barcode_from_linear_part(model: PersistenceQuillenModel) -> Barcode:
    """H_* barcode through sH(V, d_V) ⊕ ℚ on the free stages."""
    return barcode(pushforward(model.free_diagram(), LinearHomologyFunctor(model.cutoff)))


# ---------------------------------------------------------------------------
# certificates between complexes with the same cells


def cell_matching_delta(a: CellComplexDescription, b: CellComplexDescription) -> Fraction | None:
    """δ for the inclusion certificate, or None when the cells differ.

    Both complexes must have the same cells with the same attaching text.
    δ bounds every birth difference and the difference of the first stage
    values (the space itself appears there).
    """
    def cells(c):
        return {cell.name: (cell.dimension, cell.attach.replace(" ", ""), st.value)
                for st in c.stages for cell in st.cells}

    ca, cb = cells(a), cells(b)
    if ca.keys() != cb.keys():
        return None
    delta = abs(a.stages[0].value - b.stages[0].value)
    for name, (dim, att, t) in ca.items():
        dim2, att2, u = cb[name]
        if (dim, att) != (dim2, att2):
            return None
        delta = max(delta, abs(t - u))
    return delta


def _inclusion_family(X: PersistenceQuillenModel, Y: PersistenceQuillenModel,
                      delta: Fraction) -> dict[Fraction, LieMorphism]:
    keys = set(X.grid.values) | {v - delta for v in Y.grid.values}
    keys |= {v - delta for v in X.grid.values} | {v - 2 * delta for v in Y.grid.values}
    Xd, Yd = X.free_diagram(), Y.free_diagram()
    out = {}
    for t in sorted(keys):
        s, u = Xd.at(t), Yd.at(t + delta)
        if s is None:
            continue
        if u is None:
            raise ModelError(f"no stage of the target at {format_value(t + delta)}")
        out[t] = LieMorphism.inclusion(s, u)
    return out


@dataclass
class DGLCertificate:
    delta: Fraction
    certificate: DiagramCertificate
    verified: bool
    witness: str | None = None


def inclusion_certificate(X: PersistenceQuillenModel, Y: PersistenceQuillenModel,
                          delta: Fraction) -> DGLCertificate:
    """Interleave two models whose stages are nested by generator names.

    f_t and g_t are inclusions X_t ⊂ Y_{t+δ} ⊂ X_{t+2δ}, so the compatibility
    conditions hold on the nose; they are re-checked on generators.
    """
    f = _inclusion_family(X, Y, delta)
    g = _inclusion_family(Y, X, delta)
    cert = DiagramCertificate(delta, X.free_diagram(), Y.free_diagram(), f, g)
    for fam, src, tgt, name in ((f, X, Y, "g(δ)f"), (g, Y, X, "f(δ)g")):
        other = g if fam is f else f
        for t, phi in fam.items():
            psi = other.get(t + delta)
            if psi is None:
                continue
            comp = psi.compose(phi)
            want = src.free_diagram().at(t + 2 * delta)
            for gen in phi.source.generators:
                if gen.degree > phi.source.truncation:
                    continue
                if comp.image(gen.name) != want.gen(gen.name):
                    return DGLCertificate(delta, cert, False,
                                          f"{name} moves {gen.name} at {format_value(t)}")
            if comp.chain_map_witness() is not None:
                return DGLCertificate(delta, cert, False, f"{name} is not a chain map")
    return DGLCertificate(delta, cert, True)


# ---------------------------------------------------------------------------
# stability reports


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class StabilityReport:
    names: tuple[str, str]
    truncation: int
    cutoff: int
    pi_barcodes: tuple[Barcode, Barcode]
    h_barcodes: tuple[Barcode, Barcode]
    pi_distance: Value
    pi_distance_minimal: Value
    h_distance: Value
    generator_distance: Value
    certificate_bound: Value | None
    certificate_detail: str
    input_bound: Value | None
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict[str, Any]:
        def val(x):
            return None if x is None else format_value(x)

        return {
            "format_version": 1,
            "inputs": list(self.names),
            "truncation": self.truncation,
            "degree_cutoff": self.cutoff,
            "distances": {
                "pi": val(self.pi_distance),
                "h_of_minimal_model": val(self.pi_distance_minimal),
                "h": val(self.h_distance),
                "generator_modules": val(self.generator_distance),
                "certificate_upper_bound": val(self.certificate_bound)
                if self.certificate_bound is not None else "not available",
                "input_upper_bound": val(self.input_bound)
                if self.input_bound is not None else "not available",
                "homotopy_interleaving": "not computed",
            },
            "certificate": self.certificate_detail,
            "barcodes": {
                "pi": [b.to_json() for b in self.pi_barcodes],
                "h": [b.to_json() for b in self.h_barcodes],
            },
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                       for c in self.checks],
            "passed": self.passed,
        }


def _le(a: Value, b: Value) -> bool:
    return a <= b


def stability_report(X: CellComplexDescription | PersistenceQuillenModel,
                     Y: CellComplexDescription | PersistenceQuillenModel,
                     truncation: int = 8, shift: Fraction | None = None,
                     certificate: DGLCertificate | None = None) -> StabilityReport:
    """Compute every distance that is computable and check how they compare.

    ``shift``: Y is known to be X shifted by this amount, an upper bound on
    the interleaving distance of the inputs.  Without an explicit
    certificate one is constructed when both complexes have the same cells.
    """
    mx = X if isinstance(X, PersistenceQuillenModel) else build_persistence_model(X, truncation)
    my = Y if isinstance(Y, PersistenceQuillenModel) else build_persistence_model(Y, truncation)
    if mx.truncation != my.truncation:
        raise ModelError("both models need the same truncation")
    cutoff = mx.cutoff
    pis = (pi_barcode(mx), pi_barcode(my))
    pis_min = (pi_barcode(mx, minimal=True), pi_barcode(my, minimal=True))
    hs = (h_barcode(mx), h_barcode(my))
    gens = (barcode(generator_module(mx)), barcode(generator_module(my)))
    d_pi = interleaving_distance(*pis)
    d_pi_min = interleaving_distance(*pis_min)
    d_h = interleaving_distance(*hs)
    d_gen = interleaving_distance(*gens)
    checks = [
        Check("pi_equals_homology_of_minimal_model", pis == pis_min and d_pi == d_pi_min,
              f"{format_value(d_pi)} vs {format_value(d_pi_min)}"),
    ]
    if certificate is None:
        delta = cell_matching_delta(mx.complex, my.complex)
        if delta is not None:
            certificate = inclusion_certificate(mx, my, delta)
    cert_bound: Value | None = None
    detail = "not available"
    if certificate is not None:
        if not certificate.verified:
            detail = f"rejected: {certificate.witness}"
            checks.append(Check("certificate_verified", False, detail))
        else:
            problems = []
            pi_cert = pushforward_certificate(certificate.certificate, HomologyFunctor(cutoff))
            pi_cert = _suspend_certificate(pi_cert)
            r = verify_interleaving(pi_cert)
            if not r:
                problems.append(f"homology: {r.witness}")
            h_cert = pushforward_certificate(certificate.certificate, LinearHomologyFunctor(cutoff))
            r = verify_interleaving(h_cert)
            if not r:
                problems.append(f"linear homology: {r.witness}")
            if problems:
                detail = "pushforward failed: " + "; ".join(problems)
                checks.append(Check("certificate_verified", False, detail))
            else:
                cert_bound = Fraction(certificate.delta)
                detail = (f"inclusion interleaving at δ={format_value(cert_bound)}, verified on "
                          "generators and after pushforward to H_* and π_*")
                checks.append(Check("certificate_verified", True, detail))
                checks.append(Check("pi_le_certificate", _le(d_pi, cert_bound),
                                    f"{format_value(d_pi)} <= {format_value(cert_bound)}"))
                checks.append(Check("h_le_certificate", _le(d_h, cert_bound),
                                    f"{format_value(d_h)} <= {format_value(cert_bound)}"))
                checks.append(Check("generators_le_certificate", _le(d_gen, cert_bound),
                                    f"{format_value(d_gen)} <= {format_value(cert_bound)}"))
    input_bound = None if shift is None else Fraction(shift)
    if input_bound is not None:
        for name, d in (("pi", d_pi), ("h", d_h), ("generators", d_gen)):
            checks.append(Check(f"{name}_le_input_bound", _le(d, input_bound),
                                f"{format_value(d)} <= {format_value(input_bound)}"))
        if cert_bound is not None:
            checks.append(Check("certificate_le_input_bound", _le(cert_bound, input_bound),
                                f"{format_value(cert_bound)} <= {format_value(input_bound)}"))
    names = (mx.complex.name or "X", my.complex.name or "Y")
    return StabilityReport(names, mx.truncation, cutoff, pis, hs, d_pi, d_pi_min, d_h, d_gen,
                           cert_bound, detail, input_bound, checks)


def _suspend_certificate(cert):
    from .persist import InterleavingCertificate, ModuleMorphism

    def susp(m: ModuleMorphism) -> ModuleMorphism:
        return ModuleMorphism(m.source.suspend(1), m.target.suspend(1),
                              {t: {k + 1: v for k, v in s.items()} for t, s in m.samples.items()})

    return InterleavingCertificate(cert.delta, cert.source.suspend(1), cert.target.suspend(1),
                                   susp(cert.f), susp(cert.g))


def shift_pair(complex: CellComplexDescription, delta) -> tuple[CellComplexDescription,
                                                                 CellComplexDescription]:
    delta = Fraction(delta)
    moved = complex.shifted(delta)
    return complex, CellComplexDescription(moved.stages, f"{complex.name}+{format_value(delta)}")


def delay_cell(complex: CellComplexDescription, cell: str, value) -> CellComplexDescription:
    """Move one cell to the stage at ``value`` (created if missing)."""
    from .models import Stage

    value = Fraction(value)
    found = None
    stages: dict[Fraction, list] = {}
    for st in complex.stages:
        stages.setdefault(st.value, [])
        for c in st.cells:
            if c.name == cell:
                found = c
            else:
                stages[st.value].append(c)
    if found is None:
        raise ModelError(f"no cell named {cell!r}")
    stages.setdefault(value, []).append(found)
    new = tuple(Stage(v, tuple(cs)) for v, cs in sorted(stages.items()))
    return CellComplexDescription(new, f"{complex.name}:{cell}@{format_value(value)}")


__all__ = [
    "Check", "DGLCertificate", "HomologyFunctor", "IndecomposablesFunctor", "LinearHomologyFunctor",
    "PersistenceQuillenModel", "StabilityReport", "build_persistence_model", "cell_matching_delta",
    "delay_cell", "generator_module", "h_barcode", "h_barcode_from_linear_part", "h_module",
    "inclusion_certificate", "pi_barcode", "pi_module", "shift_pair", "stability_report",
]
