import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import lie_dims_by_span
from quillen_models.models import Cell, CellComplexDescription, ModelError, Stage
from quillen_models.persist import INF, Bar, Barcode, barcode
from quillen_models.pipeline import (DGLCertificate, build_persistence_model, cell_matching_delta,
                                     delay_cell, generator_module, h_barcode,
                                     h_barcode_from_linear_part, inclusion_certificate,
                                     pi_barcode, shift_pair, stability_report)
from quillen_models.selftest import CP2_H, CP2_PI, corpus_dir
from quillen_models.serialize import load_complex


def corpus(name):
    return load_complex(corpus_dir() / f"{name}.json")


def rows(bc):
    return sorted(bc.rows())


def test_cp2_golden_barcodes():
    m = build_persistence_model(corpus("cp2_filtration"), 7)
    assert pi_barcode(m) == CP2_PI
    assert h_barcode(m) == CP2_H
    assert h_barcode_from_linear_part(m) == CP2_H
    assert rows(CP2_PI) == [(2, F(2), INF), (3, F(2), F(4)), (5, F(4), INF)]


def test_cancelling_pair_barcodes():
    m = build_persistence_model(corpus("cancel_pair"), 8)
    assert not all(m.minimal_flags())
    assert [[g.name for g in x.dgl.generators] for x in m.minimal] == [["a"], ["c"], ["c", "e"]]
    assert rows(pi_barcode(m)) == [(3, F(0), F(1)), (3, F(1), INF), (6, F(2), INF)]
    assert pi_barcode(m, minimal=True) == pi_barcode(m)
    assert h_barcode(m) == h_barcode_from_linear_part(m)
    assert rows(h_barcode(m)) == [(0, F(0), INF), (3, F(0), F(1)), (3, F(1), INF), (6, F(2), INF)]


def test_constant_sphere_is_one_bar():
    m = build_persistence_model(corpus("s3_constant"), 8)
    assert pi_barcode(m).rows() == [(3, F(1), INF)]
    assert rows(h_barcode(m)) == [(0, F(1), INF), (3, F(1), INF)]


def test_point():
    m = build_persistence_model(corpus("point"), 8)
    assert len(pi_barcode(m)) == 0
    assert h_barcode(m).rows() == [(0, F(0), INF)]


def test_wedge_growth_matches_free_lie_dimensions():
    N = 8
    m = build_persistence_model(corpus("wedge_s2_s3"), N)
    before = lie_dims_by_span([1], N - 2)
    after = lie_dims_by_span([1, 2], N - 2)
    want = []
    for k, n in after.items():
        old = before.get(k, 0)
        want += [(k + 1, F(0), INF)] * old + [(k + 1, F(1), INF)] * (n - old)
    assert rows(pi_barcode(m)) == sorted(want)
    assert rows(h_barcode(m)) == [(0, F(0), INF), (2, F(0), INF), (3, F(1), INF)]


def test_h_barcode_needs_minimal_stages():
    m = build_persistence_model(corpus("cancel_pair"), 8, minimal=False)
    with pytest.raises(ModelError):
        h_barcode(m)
    with pytest.raises(ModelError):
        generator_module(m)
    # the free route still works
    assert h_barcode_from_linear_part(m).rows()[0] == (0, F(0), INF)


def _random_wedge(rng):
    stages = []
    names = iter("abcdefgh")
    for i in range(rng.randint(1, 3)):
        cells = tuple(Cell(next(names), rng.randint(2, 5)) for _ in range(rng.randint(0, 2)))
        stages.append(Stage(F(i, 2) * rng.randint(1, 2) + F(i), cells))
    return CellComplexDescription(tuple(stages), "wedge")


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_wedge_h_barcode_counts_cells(seed):
    c = _random_wedge(random.Random(seed))
    m = build_persistence_model(c, 6)
    want = [(0, c.stages[0].value, INF)]
    want += [(cell.dimension, st.value, INF) for st in c.stages for cell in st.cells]
    assert rows(h_barcode(m)) == sorted(want)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([F(1, 2), F(1), F(2)]))
def test_shifted_wedges_are_stable(seed, delta):
    a, b = shift_pair(_random_wedge(random.Random(seed)), delta)
    r = stability_report(a, b, 6, shift=delta)
    assert r.passed, [c for c in r.checks if not c.passed]
    assert r.pi_distance <= delta and r.h_distance <= delta


@pytest.mark.parametrize("delta", [F(1, 2), F(1), F(2)])
def test_cp2_shift_report(delta):
    a, b = shift_pair(corpus("cp2_filtration"), delta)
    r = stability_report(a, b, 8, shift=delta)
    assert r.passed
    assert r.pi_distance == r.h_distance == r.generator_distance == delta
    assert r.certificate_bound == delta
    js = r.to_json()
    assert js["distances"]["homotopy_interleaving"] == "not computed"
    assert js["passed"] is True


def test_cp2_delay_report():
    cp2 = corpus("cp2_filtration")
    late = delay_cell(cp2, "w", 5)
    assert cell_matching_delta(cp2, late) == 1
    r = stability_report(cp2, late, 8)
    assert r.passed
    assert r.pi_distance == 1 and r.certificate_bound == 1
    assert r.input_bound is None


def test_unrelated_complexes_have_no_certificate():
    r = stability_report(corpus("cp2_filtration"), corpus("wedge_s2_s3"), 8)
    assert r.certificate_bound is None
    assert r.to_json()["distances"]["certificate_upper_bound"] == "not available"
    assert r.pi_distance == INF  # the infinite π_3 bar of the wedge has no partner


def test_bad_certificates_are_rejected():
    a, b = shift_pair(corpus("cp2_filtration"), 1)
    ma, mb = build_persistence_model(a, 8), build_persistence_model(b, 8)
    with pytest.raises(ModelError):
        inclusion_certificate(ma, mb, F(1, 2))
    good = inclusion_certificate(ma, mb, F(1))
    assert good.verified
    forged = DGLCertificate(F(1), good.certificate, False, "forged")
    r = stability_report(ma, mb, certificate=forged)
    assert not r.passed and "forged" in r.certificate_detail


def test_truncation_is_enforced():
    from quillen_models.freelie import TruncationError
    with pytest.raises(TruncationError):
        build_persistence_model(corpus("cp2_filtration"), 2)


def test_barcode_of_generator_module_is_unsuspended():
    m = build_persistence_model(corpus("cp2_filtration"), 8)
    assert rows(barcode(generator_module(m))) == [(1, F(2), INF), (3, F(4), INF)]
    assert Barcode((Bar(1, F(2), INF),)).rows() == [(1, F(2), INF)]
