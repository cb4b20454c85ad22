from fractions import Fraction

import pytest

from oracles import homology_dims_sympy, lie_dims_by_span
from quillen_models.freelie import FreeDGL, Generator, LieMorphism, TruncationError
from quillen_models.models import (AttachingError, Cell, CellComplexDescription, ModelError, Stage,
                                   attach_cells, ce_projection, h_star, induced_representative,
                                   minimalize, pi_star, point_model, skeletal_persistence_model,
                                   sphere_model, suspended_linear_homology)
from quillen_models.qlinalg import homology_dims, is_quasi_iso


@pytest.mark.parametrize("n", range(2, 8))
def test_sphere_homotopy_closed_form(n):
    got = pi_star(sphere_model(n, truncation=12)).pi_dims()
    assert got == ({n: 1, 2 * n - 1: 1} if n % 2 == 0 else {n: 1})


def test_sphere_arguments():
    with pytest.raises(ModelError):
        sphere_model(1)
    with pytest.raises(TruncationError):
        sphere_model(6, truncation=4)


def test_hopf_class_is_a_nonzero_bracket():
    P = pi_star(sphere_model(2))
    assert P.bracket(1, 0, 1, 0) != [Fraction(0)]
    # on CP^2 the square [v,v] bounds w
    cp2 = attach_cells(sphere_model(2), [Cell("w", 4, "[v,v]")])
    assert pi_star(cp2).dims() == {1: 1, 4: 1}
    with pytest.raises(TruncationError):
        pi_star(cp2).bracket(4, 0, 4, 0)


def test_wedge_of_spheres_matches_free_lie_dimensions():
    wedge = FreeDGL([Generator("a", 1), Generator("b", 2)], {}, 8)
    assert pi_star(wedge).dims() == {k: v for k, v in lie_dims_by_span([1, 2], 6).items()}


@pytest.mark.parametrize("dgl", [
    FreeDGL([Generator("v", 1), Generator("w", 3)], {"w": "[v,v]"}, 8),
    FreeDGL([Generator("a", 1), Generator("b", 1), Generator("e", 3)], {"e": "[a,b]"}, 7),
    FreeDGL([Generator("a", 2), Generator("b", 3), Generator("c", 2), Generator("e", 5)],
            {"b": "a", "e": "[a,c]"}, 7),
])
def test_lie_homology_agrees_with_sympy(dgl):
    cc = dgl.chain_complex()
    assert homology_dims(cc, upto=dgl.truncation - 1) == homology_dims_sympy(cc, dgl.truncation - 1)


def test_attach_cells_rejections():
    S2 = sphere_model(2)
    with pytest.raises(AttachingError):
        attach_cells(S2, [Cell("w", 5, "[v,v]")])  # wrong degree
    with pytest.raises(AttachingError):
        attach_cells(S2, [Cell("v", 3)])  # duplicate
    with pytest.raises(AttachingError):
        attach_cells(S2, [Cell("w", 1)])
    with pytest.raises(AttachingError) as info:
        attach_cells(S2, [Cell("w", 4, "[v,u]")])
    assert "u" in str(info.value)
    with pytest.raises(TruncationError):
        attach_cells(sphere_model(2, truncation=4), [Cell("big", 7)])
    # b is not a cycle once db = a
    L = attach_cells(attach_cells(point_model(), [Cell("a", 3)]), [Cell("b", 4, "a")])
    with pytest.raises(AttachingError) as info:
        attach_cells(L, [Cell("c", 5, "b")])
    assert "not a cycle" in str(info.value)


def test_cells_attach_to_lower_cells_of_the_same_batch():
    one = attach_cells(point_model(), [Cell("w", 4, "[v,v]"), Cell("v", 2)])
    assert [g.name for g in one.dgl.generators] == ["w", "v"]
    two = attach_cells(attach_cells(point_model(), [Cell("v", 2)]), [Cell("w", 4, "[v,v]")])
    assert pi_star(one).dims() == pi_star(two).dims() == {1: 1, 4: 1}
    with pytest.raises(AttachingError):
        attach_cells(point_model(), [Cell("v", 2), Cell("w", 2, "v")])


def test_description_validation():
    with pytest.raises(ModelError, match="no stages"):
        CellComplexDescription(())
    with pytest.raises(ModelError):
        CellComplexDescription((Stage(Fraction(1), ()), Stage(Fraction(1), ())))
    with pytest.raises(AttachingError):
        CellComplexDescription((Stage(Fraction(0), (Cell("a", 2), Cell("a", 3))),))


def test_skeletal_model_structure_maps_are_inclusions():
    desc = CellComplexDescription((
        Stage(Fraction(0), (Cell("v", 2),)),
        Stage(Fraction(1), (Cell("w", 4, "[v,v]"),)),
    ), "cp2")
    sk = skeletal_persistence_model(desc, 8)
    assert sk.birth == {"v": Fraction(0), "w": Fraction(1)}
    assert len(sk.maps) == 1
    assert sk.maps[0].image("v") == sk.stages[1].dgl.gen("v")


def _cancel_free():
    return FreeDGL([Generator("a", 2), Generator("b", 3), Generator("c", 2), Generator("e", 5)],
                   {"b": "a", "e": "[a,c]"}, 7)


def test_minimalize_cancels_the_linear_pair():
    free = _cancel_free()
    M = minimalize(free)
    assert [g.name for g in M.dgl.generators] == ["c", "e"]
    assert M.dgl.is_minimal()
    assert not M.dgl.differential_of("e")
    assert M.cancelled == (("a", "b"),)
    for g in M.dgl.generators:
        assert M.projection(M.section.image(g.name)) == M.dgl.gen(g.name)
    assert M.projection.chain_map_witness() is None
    assert M.section.chain_map_witness() is None
    res = is_quasi_iso(M.projection.chain_map(), free.chain_complex(), M.dgl.chain_complex())
    assert res.ok


def test_minimalize_leaves_minimal_models_alone():
    cp2 = attach_cells(sphere_model(2), [Cell("w", 4, "[v,v]")]).dgl
    M = minimalize(cp2)
    assert M.dgl is cp2 and M.cancelled == ()


def test_h_star_is_suspended_generators_plus_unit():
    cp2 = attach_cells(sphere_model(2), [Cell("w", 4, "[v,v]")])
    assert h_star(cp2).dims() == {0: 1, 2: 1, 4: 1}
    with pytest.raises(ModelError):
        h_star(_cancel_free())
    free = _cancel_free()
    assert h_star(minimalize(free).dgl).dims() == suspended_linear_homology(free)


@pytest.mark.parametrize("dgl", [
    sphere_model(3).dgl,
    attach_cells(sphere_model(2), [Cell("w", 4, "[v,v]")]).dgl,
    FreeDGL([Generator("a", 1), Generator("b", 1), Generator("e", 3)], {"e": "[a,b]"}, 6),
    minimalize(_cancel_free()).dgl,
])
def test_ce_projection_is_a_quasi_isomorphism(dgl):
    proj = ce_projection(dgl.with_truncation(min(dgl.truncation, 6)))
    assert proj.is_quasi_iso().ok


def test_ce_projection_on_a_non_minimal_free_model():
    # with db = a the target (sV, d̄) loses sa and sb together
    proj = ce_projection(_cancel_free().with_truncation(6))
    assert proj.is_quasi_iso().ok


def test_induced_representative_between_stages():
    free0 = FreeDGL([Generator("a", 2)], {}, 7)
    M0, M1 = minimalize(free0), minimalize(_cancel_free())
    rep = induced_representative(M0, M1, LieMorphism.inclusion(free0, _cancel_free()))
    # a dies when it becomes a boundary
    assert not rep.image("a")
    assert rep.chain_map_witness() is None
