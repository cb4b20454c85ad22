import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (certificate_search_distance, conjugate, interval_sum, random_grid,
                     random_intervals)
from quillen_models.persist import (INF, Bar, Barcode, DiagramCertificate, FunctorError,
                                    GradedModule, Grid, InterleavingCertificate, ModuleMorphism,
                                    PersistenceError, PersistenceModule, StructuralError, barcode,
                                    bottleneck_distance, interleaving_distance, parse_value,
                                    pushforward, pushforward_certificate, verify_interleaving)
from quillen_models.qlinalg import identity, matmul, rank, zeros


def bars(module, k=0):
    return sorted(barcode(module).in_degree(k))


def test_grid_lookup_and_zero_below():
    g = Grid((F(0), F(1), F(3)))
    assert g.index(F(-1)) is None
    assert g.index(F(0)) == 0 and g.index(F(2)) == 1 and g.index(F(100)) == 2
    with pytest.raises(PersistenceError):
        Grid((F(1), F(1)))
    M = GradedModule.interval(F(1), F(3))
    assert M.dim_at(F(0), 0) == 0 and M.dim_at(F(2), 0) == 1 and M.dim_at(F(3), 0) == 0


def test_shift_moves_bars_left():
    M = GradedModule.interval(F(1), F(3))
    assert bars(M.shift(F(1, 2))) == [(F(1, 2), F(5, 2))]
    with pytest.raises(PersistenceError):
        M.shift(-1)
    assert Barcode((Bar(0, F(1), INF),)).shifted(2).rows() == [(0, F(-1), INF)]


def test_barcode_of_constant_and_one_point_modules():
    c = GradedModule.constant(Grid((F(0), F(2))), {0: 2, 3: 1})
    assert barcode(c).rows() == [(0, F(0), INF), (0, F(0), INF), (3, F(0), INF)]
    one = interval_sum([(F(1), F(2))], [F(1), F(2)])
    assert barcode(one).rows() == [(0, F(1), F(2))]


def test_barcode_reads_ranks_not_bases():
    # two bars [0,2) and [1,∞) glued by a non-diagonal map at 1 -> 2
    rng = random.Random(3)
    M = interval_sum([(F(0), F(2)), (F(1), INF)], [F(0), F(1), F(2)])
    N, _ = conjugate(M, rng)
    assert bars(N) == [(F(0), F(2)), (F(1), INF)]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_barcode_recovers_random_interval_sums(seed):
    rng = random.Random(seed)
    grid = random_grid(rng, rng.randint(1, 4))
    ivs = random_intervals(rng, grid, rng.randint(0, 5))
    M, _ = conjugate(interval_sum(ivs, grid), rng)
    assert bars(M) == sorted(ivs)
    # rank function is reproduced by the module of the barcode
    B = barcode(M).module()
    for s in grid:
        for t in grid:
            if s <= t:
                assert len(M.map_at(s, t, 0)) == B.dim_at(t, 0)
                assert rank(M.map_at(s, t, 0), cols=M.dim_at(s, 0)) == \
                    rank(B.map_at(s, t, 0), cols=B.dim_at(s, 0))


def test_interleaving_of_overlapping_bars():
    X = GradedModule.interval(F(0), F(2))
    Y = GradedModule.interval(F(1), F(3))
    keys = {F(-1), F(0), F(1), F(2), F(3)}

    def f(t, k):
        a, b = X.dim_at(t, k), Y.dim_at(t + 1, k)
        return [[F(1)] * a for _ in range(b)]

    def g(t, k):
        a, b = Y.dim_at(t, k), X.dim_at(t + 1, k)
        return [[F(0)] * a for _ in range(b)]

    cert = InterleavingCertificate(F(1), X, Y,
                                   ModuleMorphism.from_function(X, Y.shift(1), f, keys),
                                   ModuleMorphism.from_function(Y, X.shift(1), g, keys))
    assert verify_interleaving(cert)
    assert interleaving_distance(X, Y) == 1
    # at δ = 1/2 zero maps fail
    half = InterleavingCertificate(F(1, 2), X, Y,
                                   ModuleMorphism.zero(X, Y.shift(F(1, 2))),
                                   ModuleMorphism.zero(Y, X.shift(F(1, 2))))
    res = verify_interleaving(half)
    assert not res and "structure map" in res.witness


def test_identity_is_a_zero_interleaving():
    M = interval_sum([(F(0), F(2)), (F(1), INF)], [F(0), F(1), F(2)])
    ident = ModuleMorphism.identity(M)
    assert verify_interleaving(InterleavingCertificate(F(0), M, M, ident, ident))
    zero = ModuleMorphism.zero(M, M)
    assert not verify_interleaving(InterleavingCertificate(F(0), M, M, zero, zero))


def test_canonical_maps_compose():
    M = interval_sum([(F(0), F(3))], [F(0), F(3)])
    phi = ModuleMorphism.canonical(M, 1)
    two = phi.shift(1).compose(phi)
    assert two.at(F(0), 0) == M.map_at(F(0), F(2), 0)
    assert two.at(F(2), 0) == zeros(0, 1)


def test_malformed_certificate_is_structural():
    X = GradedModule.interval(F(0), F(2))
    with pytest.raises(StructuralError):
        ModuleMorphism(X, X, {F(5): {}})
    bad = ModuleMorphism(X, X.shift(1), {F(-1): {}, F(0): {0: [[F(1), F(1)]]}, F(1): {},
                                         F(2): {}})
    with pytest.raises(StructuralError):
        verify_interleaving(InterleavingCertificate(F(1), X, X, bad, bad))
    with pytest.raises(StructuralError):
        ok = ModuleMorphism.zero(X, X.shift(1))
        verify_interleaving(InterleavingCertificate(F(1), X, X.shift(3), ok, ok))


@pytest.mark.parametrize("A,B,d", [
    ([(F(0), F(2))], [(F(0), F(4))], F(2)),  # wider bar is deleted or matched at cost 2
    ([(F(0), F(2))], [(F(1), F(3))], F(1)),
    ([(F(0), INF)], [(F(1), INF)], F(1)),
    ([(F(0), INF)], [], INF),
    ([(F(0), F(1))], [], F(1, 2)),
    ([], [], F(0)),
])
def test_distance_examples(A, B, d):
    for method in ("exhaustive", "matching", "auto"):
        assert bottleneck_distance(A, B, method) == d
    assert certificate_search_distance(A, B) == d


def test_large_barcodes_use_matching():
    A = [(F(i), F(i + 2)) for i in range(6)]
    B = [(F(i) + F(1, 2), F(i + 2)) for i in range(6)]
    assert bottleneck_distance(A, B) == F(1, 2)
    assert bottleneck_distance(A, B, "exhaustive") == F(1, 2)
    with pytest.raises(ValueError):
        bottleneck_distance(A, B, "greedy")


def _random_barcode(rng, n):
    pool = [F(k, 2) for k in range(9)]
    out = []
    for _ in range(n):
        b = rng.choice(pool)
        d = rng.choice([x for x in pool if x > b] + [INF])
        out.append((b, d))
    return out


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_distance_is_a_pseudometric(seed):
    rng = random.Random(seed)
    A, B, C = (_random_barcode(rng, rng.randint(0, 4)) for _ in range(3))
    dab, dbc, dac = (bottleneck_distance(*p) for p in ((A, B), (B, C), (A, C)))
    assert bottleneck_distance(A, A) == 0
    assert dab == bottleneck_distance(B, A)
    assert dac <= dab + dbc
    assert bottleneck_distance(A, B, "matching") == dab


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_distance_invariant_under_isomorphism(seed):
    rng = random.Random(seed)
    grid = random_grid(rng, 3)
    A, B = random_intervals(rng, grid, 2), random_intervals(rng, grid, 3)
    MA, _ = conjugate(interval_sum(A, grid), rng)
    MB, _ = conjugate(interval_sum(B, grid), rng)
    assert interleaving_distance(MA, MB) == bottleneck_distance(A, B)


def test_distance_is_max_over_degrees():
    a = Barcode((Bar(0, F(0), INF), Bar(2, F(0), F(1))))
    b = Barcode((Bar(0, F(0), INF),))
    assert interleaving_distance(a, b) == F(1, 2)


def test_csv_and_json_round_trip():
    bc = Barcode((Bar(0, F(0), INF), Bar(3, F(1, 2), F(4))))
    assert Barcode.from_csv(bc.to_csv()) == bc
    assert Barcode.from_json(bc.to_json()) == bc
    assert parse_value("inf") == INF and parse_value("3/2") == F(3, 2)
    with pytest.raises(PersistenceError):
        Bar(0, F(2), F(1))


class MatrixFunctor:
    """Identity functor on matrices over finite-dimensional spaces."""

    def on_object(self, n):
        return {0: n}

    def on_morphism(self, m, s, t):
        return {0: m}


class ForgetfulZero(MatrixFunctor):
    def on_morphism(self, m, s, t):
        return {0: zeros(t, s)}


def _matrix_diagram():
    return PersistenceModule(Grid((F(0), F(1), F(2))), (1, 2, 1),
                             ([[F(1)], [F(0)]], [[F(0), F(1)]]),
                             compose=lambda g, f: matmul(g, f), identity=identity)


def test_pushforward_checks_functoriality():
    M = pushforward(_matrix_diagram(), MatrixFunctor())
    assert barcode(M).rows() == [(0, F(0), F(2)), (0, F(1), INF)]
    with pytest.raises(FunctorError):
        pushforward(_matrix_diagram(), ForgetfulZero())
    assert pushforward(_matrix_diagram(), ForgetfulZero(), check=False).dims[1] == {0: 2}


def test_pushforward_certificate():
    X = PersistenceModule(Grid((F(0),)), (1,), ())
    Y = PersistenceModule(Grid((F(1),)), (1,), ())
    cert = DiagramCertificate(F(1), X, Y,
                              f={F(0): [[F(1)]]},
                              g={F(1): [[F(1)]], F(0): [[F(1)]]})
    H = pushforward_certificate(cert, MatrixFunctor())
    assert verify_interleaving(H)
    missing = DiagramCertificate(F(1), X, Y, f={}, g={F(1): [[F(1)]]})
    with pytest.raises(StructuralError):
        pushforward_certificate(missing, MatrixFunctor())
