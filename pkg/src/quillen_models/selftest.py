"""Golden-corpus self test.  Produces deterministic artifacts and a check list."""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from unittest import mock

from . import cecobar
from .cecobar import SignConventionError, adjunction_homology_check, ce_construction
from .freelie import FreeDGL, FreeLieAlgebra, Generator, TruncationError
from .models import ce_projection, h_star, pi_star, sphere_model, suspended_linear_homology
from .persist import Bar, Barcode, INF, format_value
from .pipeline import (build_persistence_model, delay_cell, h_barcode, h_barcode_from_linear_part,
                       pi_barcode, shift_pair, stability_report)
from .serialize import barcode_to_json, dumps, load_complex, model_to_json

CORPUS_ENV = "QUILLEN_MODELS_CORPUS"

# frozen from stagewise homology and induced-map ranks
CP2_PI = Barcode((Bar(2, Fraction(2), INF), Bar(3, Fraction(2), Fraction(4)),
                  Bar(5, Fraction(4), INF)))
CP2_H = Barcode((Bar(0, Fraction(2), INF), Bar(2, Fraction(2), INF), Bar(4, Fraction(4), INF)))


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def corpus_dir() -> Path:
    override = os.environ.get(CORPUS_ENV)
    if override:
        return Path(override)
    return Path(str(resources.files("quillen_models") / "corpus"))


def _run(results: list[CheckResult], name: str, fn) -> None:
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed check, not a failed run
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    results.append(CheckResult(name, bool(ok), detail))


def _sphere_check(n: int):
    m = sphere_model(n, truncation=12)
    got = pi_star(m).pi_dims()
    want = {n: 1, 2 * n - 1: 1} if n % 2 == 0 else {n: 1}
    return got == want, f"pi dims {got}"


def _law_check():
    alg = FreeLieAlgebra([Generator("x", 1), Generator("y", 2)], 6)
    elems = [alg.element(h) for k in range(1, 7) for h in alg.basis(k)]
    count = 0
    for a in elems:
        for b in elems:
            if a.degree + b.degree > 6:
                continue
            sign = -1 if (a.degree * b.degree) % 2 else 1
            if alg.bracket(a, b) != alg.bracket(b, a) * (-sign):
                return False, f"antisymmetry fails on {a}, {b}"
            for c in elems:
                p, q, r = a.degree, b.degree, c.degree
                if p + q + r > 6:
                    continue
                s = lambda e: -1 if e % 2 else 1  # noqa: E731
                total = (alg.bracket(a, alg.bracket(b, c)) * s(p * r)
                         + alg.bracket(b, alg.bracket(c, a)) * s(q * p)
                         + alg.bracket(c, alg.bracket(a, b)) * s(r * q))
                if total:
                    return False, f"Jacobi fails on {a}, {b}, {c}"
                count += 1
    return True, f"{count} triples"


def _mutation_check(dgl):
    # flipping the parity term of the d1 sign must break d∘d = 0
    with mock.patch.object(cecobar._Wedge, "d1_sign", staticmethod(lambda p, n: -1 if n % 2 else 1)):
        try:
            ce_construction(dgl, dgl.truncation, check=False)
        except SignConventionError as exc:
            return True, f"detected: {exc}"
    return False, "corrupted sign went unnoticed"


def run_selftest(truncation: int = 8, corpus: Path | None = None
                 ) -> tuple[list[CheckResult], dict[str, str]]:
    """Run every check; return results and artifacts (relative path -> text)."""
    corpus = corpus if corpus is not None else corpus_dir()
    results: list[CheckResult] = []
    artifacts: dict[str, str] = {}
    complexes = {}
    for path in sorted(corpus.glob("*.json")):
        c = load_complex(path)
        complexes[path.stem] = c

    for stem, c in complexes.items():
        models = {}

        def build(c=c, models=models):
            models["m"] = build_persistence_model(c, truncation)
            for dgl in models["m"].stages:
                dgl.chain_complex()
            return True, f"{len(c.stages)} stages"

        _run(results, f"{stem}: model and d∘d = 0", build)
        m = models.get("m")
        if m is None:
            continue
        artifacts[f"models/{stem}.json"] = dumps(model_to_json(m))
        pis, hs = pi_barcode(m), h_barcode(m)
        artifacts[f"barcodes/{stem}_pi.csv"] = pis.to_csv()
        artifacts[f"barcodes/{stem}_h.csv"] = hs.to_csv()
        artifacts[f"barcodes/{stem}_pi.json"] = dumps(barcode_to_json(pis, "pi"))
        _run(results, f"{stem}: pi of free model = H of minimal model",
             lambda m=m, pis=pis: (pi_barcode(m, minimal=True) == pis, ""))
        _run(results, f"{stem}: sV+Q barcode = linear homology barcode",
             lambda m=m, hs=hs: (h_barcode_from_linear_part(m) == hs, ""))
        minimal = [x.dgl for x in m.minimal] if m.minimal else list(m.stages)
        for i, dgl in enumerate(minimal):
            _run(results, f"{stem}: stage {i} CE projection is a quasi-isomorphism",
                 lambda dgl=dgl: (bool(ce_projection(dgl).is_quasi_iso()), ""))
            _run(results, f"{stem}: stage {i} h_star = sH(V,d_V)+Q",
                 lambda dgl=dgl, free=m.stages[i]: (
                     h_star(dgl).dims() == suspended_linear_homology(free), ""))
            _run(results, f"{stem}: stage {i} CE/cobar round trip",
                 lambda dgl=dgl: (adjunction_homology_check(dgl.with_truncation(6)).passed, ""))

    if "cp2_filtration" in complexes:
        cp2 = complexes["cp2_filtration"]

        def golden():
            m = build_persistence_model(cp2, max(truncation, 7))
            ok = pi_barcode(m) == CP2_PI and h_barcode(m) == CP2_H
            rows = " ".join(str(b) for b in pi_barcode(m))
            return ok, f"pi {rows}"

        _run(results, "cp2: golden barcodes", golden)

        def too_small():
            try:
                build_persistence_model(cp2, 2)
            except TruncationError as exc:
                return True, str(exc)
            return False, "no truncation error"

        _run(results, "cp2: truncation 2 is rejected", too_small)
        pairs = [(f"shift_{format_value(d).replace('/', '_')}", *shift_pair(cp2, d), d)
                 for d in (Fraction(1, 2), Fraction(1), Fraction(2))]
        pairs.append(("delay_w", cp2, delay_cell(cp2, "w", 5), None))
        for tag, a, b, d in pairs:
            holder = {}

            def report(a=a, b=b, d=d, holder=holder):
                r = stability_report(a, b, truncation, shift=d)
                holder["r"] = r
                return r.passed, f"pi distance {format_value(r.pi_distance)}"

            _run(results, f"cp2: stability {tag}", report)
            if "r" in holder:
                artifacts[f"reports/cp2_{tag}.json"] = dumps(holder["r"].to_json())

    # a linear differential next to odd brackets makes the parity term visible
    mutant = FreeDGL([Generator("a", 1), Generator("b", 2), Generator("c", 2)], {"b": "a"}, 6)
    _run(results, "cecobar: corrupted d1 sign is detected", lambda: _mutation_check(mutant))

    for n in range(2, 8):
        _run(results, f"sphere S^{n}: closed form", lambda n=n: _sphere_check(n))
    _run(results, "laws: antisymmetry and Jacobi through degree 6", _law_check)

    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}" + (f"  ({r.detail})" if r.detail else "")
             for r in results]
    artifacts["selftest.txt"] = "\n".join(lines) + "\n"
    return results, artifacts


def write_artifacts(artifacts: dict[str, str], out: Path) -> None:
    for rel, text in sorted(artifacts.items()):
        path = out / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
