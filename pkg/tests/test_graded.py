from fractions import Fraction

import pytest

from hochcat import fincat as fc
from hochcat import fixtures as fx
from hochcat import graded as gr
from hochcat.qlinalg import QMatrix

F1 = Fraction(1)


def test_free_graded_validates():
    v = fx.vposet_cat()
    kv = fx.free_graded(v, "kv")
    assert kv.dim(("s<t0", "kv.s", "kv.t0")) == 1


def test_dual_numbers_and_variants():
    lam = fx.dual_numbers()
    assert lam.dim(("id*", "lambda.o", "lambda.o")) == 2
    fx.split_quadratic()  # x * x = 1 also satisfies the axioms
    # breaking the unit is caught
    with pytest.raises(gr.BadGradedIdentity):
        fx.algebra_graded(
            "bad", ["one", "x"], {0: F1},
            lambda i, j: {0: F1} if (i, j) == (0, 0) else ({1: Fraction(2)} if i + j == 1 else {}),
        )


def test_nonassociative_detected():
    # basis (1, a, b) with a*a = b, a*b = 1, b*a = 0: (a*a)*a != a*(a*a)
    def mult(i, j):
        if i == 0:
            return {j: F1}
        if j == 0:
            return {i: F1}
        if (i, j) == (1, 1):
            return {2: F1}
        if (i, j) == (1, 2):
            return {0: F1}
        return {}

    with pytest.raises(gr.NonAssociativeGraded):
        fx.algebra_graded("na", ["one", "a", "b"], {0: F1}, mult)


def test_sharp_of_trivial_is_standard_grading():
    pc = fx.two_object_linear_cat()
    sharped, counit = gr.sharp(pc)
    assert len(sharped.base.objects) == 2
    assert all(len(sharped.fiber[o]) == 1 for o in sharped.base.objects)
    gr.validate_graded_functor(counit)
    # sharp is idempotent on the nose with this labelling
    sharped2, _ = gr.sharp(sharped)
    assert gr.graded_cats_equal(
        sharped2, sharped,
        base_mor_bij=lambda m: m.rsplit("@", 1)[0],
    )
    # object count is the total fiber size
    assert len(sharped.base.objects) == sum(len(pc.fiber[u]) for u in pc.base.objects)


def test_restrict_identity_and_free():
    v = fx.vposet_cat()
    kv = fx.free_graded(v, "kv")
    res, comparison = gr.restrict(kv, fc.identity_functor(v))
    assert gr.graded_cats_equal(res, kv)
    gr.validate_graded_functor(comparison)
    assert gr.is_cartesian(comparison)
    d0, i0 = fc.full_subcategory(v, ["s", "t0"])
    res0, comp0 = gr.restrict(kv, i0)
    kd0 = fx.free_graded(d0, "kv")
    assert gr.graded_cats_equal(res0, kd0)


def test_restrict_composition_strict():
    v = fx.vposet_cat()
    kv = fx.free_graded(v, "kv")
    d0, i0 = fc.full_subcategory(v, ["s", "t0"])
    s_only, j = fc.full_subcategory(d0, ["s"])
    once, _ = gr.restrict(kv, i0)
    twice, _ = gr.restrict(once, j)
    direct, _ = gr.restrict(kv, fc.compose_functors(i0, j))
    assert gr.graded_cats_equal(twice, direct)
    assert twice.hom == direct.hom and twice.comp == direct.comp


def test_cartesian_subcartesian():
    pc = fx.two_object_linear_cat()
    e_cat = fx.q_algebra("sub")
    # fully faithful inclusion of the one-object subcategory on A
    base = fc.identity_functor(pc.base)
    inc = gr.GradedFunctor(
        e_cat, pc, base, {"sub.o": "paircat.A"},
        {("id*", "sub.o", "sub.o"): QMatrix.identity(1)},
    )
    gr.validate_graded_functor(inc)
    assert gr.is_subcartesian(inc)
    assert not gr.is_cartesian(inc)
    # zero map on a nonzero hom space is neither
    zero = gr.GradedFunctor(
        e_cat, pc, base, {"sub.o": "paircat.A"},
        {("id*", "sub.o", "sub.o"): QMatrix.zeros(1, 1)},
    )
    assert not gr.is_subcartesian(zero)
    # subcartesian iff the sharp functor is cartesian
    assert gr.is_cartesian(gr.sharp_graded_functor(inc))


def test_pullback_of_identity():
    kv = fx.free_graded(fx.vposet_cat(), "kv")
    idf = gr.identity_graded_functor(kv)
    pb, g1, g2 = gr.pullback_graded(idf, idf)
    gr.validate_graded_functor(g1)
    for key in kv.hom_keys():
        diag = (
            fc.pair_name(key[0], key[0]),
            fc.pair_name(key[1], key[1]),
            fc.pair_name(key[2], key[2]),
        )
        assert pb.dim(diag) == kv.dim(key)


def test_pullback_of_restrictions_is_intersection():
    v = fx.vposet_cat()
    kv = fx.free_graded(v, "kv")
    d0, i0 = fc.full_subcategory(v, ["s", "t0"])
    d1, i1 = fc.full_subcategory(v, ["s", "t1"])
    r0, c0 = gr.restrict(kv, i0)
    r1, c1 = gr.restrict(kv, i1)
    pb, _, _ = gr.pullback_graded(c0, c1)
    assert len(pb.base.objects) == 1
    key = next(iter(pb.hom))
    assert pb.dim(key) == 1
    # hom dimension of a pullback is at most the min of the sides
    for k in pb.hom:
        assert pb.dim(k) <= 1


def chain_cover_datum(kv, v):
    cover = fc.chain_cover(v)
    legs = []
    for sub, incl in cover.chains:
        piece, _ = gr.restrict(kv, incl)
        legs.append((piece, gr.GradedSetMap(incl, {x: x for x in piece.fiber_of})))
    isos = {}
    for i, (pi, mi) in enumerate(legs):
        for j, (pj, mj) in enumerate(legs):
            table = {}
            img_j = {}
            for key in pj.hom_keys():
                img_j.setdefault(gr._sharp_image(mj, key), []).append(key)
            for key in pi.hom_keys():
                target = gr._sharp_image(mi, key)
                for other in img_j.get(target, []):
                    table[(key, other)] = QMatrix.identity(pi.dim(key))
            isos[(i, j)] = table
    return gr.DescentDatum(kv.graded_set(), legs, isos)


def test_glue_roundtrip_vposet():
    v = fx.vposet_cat()
    kv = fx.free_graded(v, "kv")
    datum = chain_cover_datum(kv, v)
    result = gr.glue_descent(datum)
    assert gr.graded_cats_equal(result.glued, kv)
    for f in result.comparisons:
        assert gr.is_subcartesian(f)


def test_glue_rejects_corrupted_cocycle():
    v = fx.vposet_cat()
    kv = fx.free_graded(v, "kv")
    datum = chain_cover_datum(kv, v)
    (i, j) = (0, 1)
    table = datum.overlap_isos[(i, j)]
    key = next(iter(table))
    table[key] = table[key].scale(2)
    with pytest.raises(gr.CocycleViolated) as exc:
        gr.glue_descent(datum)
    assert len(exc.value.triple) == 3


def test_glue_identity_cover():
    lam = fx.dual_numbers()
    idf = fc.identity_functor(lam.base)
    legs = [(lam, gr.GradedSetMap(idf, {x: x for x in lam.fiber_of}))]
    isos = {(0, 0): {}}
    for key in lam.hom_keys():
        isos[(0, 0)][(key, key)] = QMatrix.identity(lam.dim(key))
    datum = gr.DescentDatum(lam.graded_set(), legs, isos)
    result = gr.glue_descent(datum)
    assert gr.graded_cats_equal(result.glued, lam)


def test_coproduct_graded():
    a = fx.q_algebra("a")
    b = fx.dual_numbers("b")
    total, incls = gr.coproduct_graded([a, b], ["L.", "R."])
    assert len(total.base.objects) == 2
    for f in incls:
        gr.validate_graded_functor(f)
        assert gr.is_subcartesian(f)


def test_glue_over_three_cover_that_is_not_a_four_cover():
    # full subcategories on all four-element subsets of the five-chain: every
    # simplex with at most four distinct vertices lies in one of them, the
    # five-vertex path in none, so the family is a 3-cover and not a 4-cover,
    # exactly the stack theorem's threshold
    import itertools

    chain = fc.chain_category(4)
    kc = fx.free_graded(chain, "kc")
    incls = []
    for drop in chain.objects:
        objs = [o for o in chain.objects if o != drop]
        _, incl = fc.full_subcategory(chain, objs)
        incls.append(incl)
    assert fc.is_n_cover(incls, 3)
    assert not fc.is_n_cover(incls, 4)
    legs = []
    for incl in incls:
        piece, _ = gr.restrict(kc, incl)
        legs.append((piece, gr.GradedSetMap(incl, {x: x for x in piece.fiber_of})))
    isos = {}
    for i, (pi, mi) in enumerate(legs):
        for j, (pj, mj) in enumerate(legs):
            table = {}
            img_j = {}
            for key in pj.hom_keys():
                img_j.setdefault(gr._sharp_image(mj, key), []).append(key)
            for key in pi.hom_keys():
                for other in img_j.get(gr._sharp_image(mi, key), []):
                    table[(key, other)] = QMatrix.identity(pi.dim(key))
            isos[(i, j)] = table
    datum = gr.DescentDatum(kc.graded_set(), legs, isos)
    result = gr.glue_descent(datum, cover_degree=3)
    assert gr.graded_cats_equal(result.glued, kc)
