import pytest

from hochcat import fincat as fc


def a2():
    return fc.chain_category(1)


def vposet():
    leq = {("s", "s"), ("t0", "t0"), ("t1", "t1"), ("s", "t0"), ("s", "t1")}
    return fc.poset_category(["s", "t0", "t1"], lambda a, b: (a, b) in leq)


def test_terminal_and_a2_validate():
    e = fc.terminal_category()
    assert len(e.objects) == 1 and len(e.morphisms) == 1
    c = a2()
    assert len(c.morphisms) == 3


def test_missing_composite_detected():
    c = a2()
    comp = dict(c.comp)
    del comp[("0<1", "id:0")]
    with pytest.raises(fc.MissingComposite):
        fc.validate_fincat(c.objects, c.morphisms, c.identity, comp)


def test_bad_identity_detected():
    c = a2()
    ident = dict(c.identity)
    ident["0"] = "0<1"
    errs = fc.violations(fc.FinCat(c.objects, c.morphisms, ident, dict(c.comp)))
    assert any(isinstance(e, fc.BadIdentity) for e in errs)


def test_nerve_counts():
    e = fc.terminal_category()
    for n in range(5):
        assert len(fc.nerve(e, n)) == 1
    c = a2()
    assert len(fc.nerve(c, 0)) == 2
    assert len(fc.nerve(c, 1)) == 3
    assert len(fc.nerve(c, 2)) == 4
    # brute-force cross-check |N_n(A2)| = n + 2
    for n in range(1, 7):
        assert len(fc.nerve(c, n)) == n + 2


def test_nerve_lexicographic_and_degenerate():
    c = a2()
    two = fc.nerve(c, 2)
    assert two[0] == ("id:0", "id:0")
    assert ("id:0", "0<1") in two and ("0<1", "id:1") in two


def test_pullback_identity_is_diagonal():
    c = a2()
    idf = fc.identity_functor(c)
    pb, p1, p2 = fc.pullback_cat(idf, idf)
    assert len(pb.objects) == len(c.objects)
    assert len(pb.morphisms) == len(c.morphisms)
    fc.validate_functor(p1)
    fc.validate_functor(p2)


def test_pullback_of_subcategories_is_intersection():
    v = vposet()
    d0, i0 = fc.full_subcategory(v, ["s", "t0"])
    d1, i1 = fc.full_subcategory(v, ["s", "t1"])
    pb, _, _ = fc.pullback_cat(i0, i1)
    assert len(pb.objects) == 1
    assert len(pb.morphisms) == 1


def test_cover_verdicts():
    c = a2()
    idf = fc.identity_functor(c)
    for n in [0, 1, 2, 5]:
        assert fc.is_n_cover([idf], n)
    assert fc.is_n_cover([idf], fc.INF)
    sub0, j0 = fc.full_subcategory(c, ["0"])
    sub1, j1 = fc.full_subcategory(c, ["1"])
    assert fc.is_n_cover([j0, j1], 0)
    verdict = fc.is_n_cover([j0, j1], 1)
    assert not verdict and verdict.witness == ("0<1",)


def test_vposet_chain_cover_is_infinite_cover():
    v = vposet()
    cover = fc.chain_cover(v)
    legs = [incl for _, incl in cover.chains]
    assert len(legs) == 2
    for depth in [3, 8, 12]:
        assert fc.is_n_cover(legs, fc.INF, depth=depth)
    (_, inter) = cover.intersections[(0, 1)]
    assert inter.obj_map.keys() == {"s"}


def test_cover_monotone_in_n():
    c = a2()
    sub0, j0 = fc.full_subcategory(c, ["0"])
    sub1, j1 = fc.full_subcategory(c, ["1"])
    results = [bool(fc.is_n_cover([j0, j1], n)) for n in range(4)]
    assert results == sorted(results, reverse=True)


def test_ideals():
    c = a2()
    assert fc.is_ideal(c, {"0<1"})
    assert fc.is_thin_ideal(c, {"0<1"})
    assert not fc.is_ideal(c, {"id:0"})
    v = vposet()
    z = fc.Ideal(v, frozenset({"s<t0", "s<t1"}))
    disc = fc.discrete_category(["s", "t0", "t1"])
    sub, _ = fc.subcategory(v, ["s", "t0", "t1"], ["id:s", "id:t0", "id:t1"])
    assert fc.decomposition_check(v, z, sub)
    assert not fc.decomposition_check(v, fc.Ideal(v, frozenset({"s<t0"})), sub)


def test_arrow_cat_base_minimal():
    e = fc.terminal_category()
    s = fc.point_bifunctor(e)
    w, inc_low, inc_high = fc.arrow_cat_base(s)
    assert len(w.objects) == 2
    assert len(w.morphisms) == 3
    fc.validate_functor(inc_low)
    fc.validate_functor(inc_high)
    # composition with the upper identity is the left action
    assert w.comp[("up:id*", "x:!*")] == "x:!*"


def test_cstar_shape():
    # adjoining a terminal object to A2 gives the chain of length 2
    c = a2()
    s = fc.point_bifunctor(c)
    w, _, _ = fc.arrow_cat_base(s)
    assert len(w.objects) == 3
    assert len(w.morphisms) == 6
    assert fc.is_delta(w)


def test_recognize_arrow_a2():
    c = a2()
    rec = fc.recognize_arrow(c, fc.Ideal(c, frozenset({"0<1"})))
    assert rec.lower.objects == ("0",)
    assert rec.upper.objects == ("1",)
    fc.validate_functor(rec.iso)


def test_recognize_arrow_terminal_delta():
    v = vposet()
    members = frozenset({"s<t0"})
    # t1 is on neither side of the {s<t0} ideal
    with pytest.raises(fc.ObjectsNotCovered):
        fc.recognize_arrow(v, fc.Ideal(v, members))


def test_recognize_arrow_middle_object_uncovered():
    c2 = fc.chain_category(2)
    ideal = fc.Ideal(c2, frozenset({"0<2"}))
    with pytest.raises(fc.ObjectsNotCovered) as exc:
        fc.recognize_arrow(c2, ideal)
    assert exc.value.objects == {"1"}


def test_recognize_roundtrip_from_arrow_base():
    v = vposet()
    d0, _ = fc.full_subcategory(v, ["s", "t0"])
    s = fc.point_bifunctor(d0)
    w, _, _ = fc.arrow_cat_base(s)
    mem = frozenset(m for m in w.src if m.startswith(fc.CROSS))
    rec = fc.recognize_arrow(w, fc.Ideal(w, mem))
    assert set(rec.lower.objects) == {"lo:s", "lo:t0"}
    assert set(rec.upper.objects) == {"up:*"}


def test_chain_cover_errors_and_grid():
    c = a2()
    cover = fc.chain_cover(c)
    assert len(cover.chains) == 1
    parallel = fc.validate_fincat(
        ["0", "1"],
        [("id0", "0", "0"), ("id1", "1", "1"), ("f", "0", "1"), ("g", "0", "1")],
        {"0": "id0", "1": "id1"},
        {
            ("id0", "id0"): "id0", ("id1", "id1"): "id1",
            ("f", "id0"): "f", ("id1", "f"): "f",
            ("g", "id0"): "g", ("id1", "g"): "g",
        },
    )
    with pytest.raises(fc.NotPoset):
        fc.chain_cover(parallel)
    # 2x2 grid: bottom < a, b < top
    leq_pairs = {("bot", "a"), ("bot", "b"), ("a", "top"), ("b", "top"), ("bot", "top")}
    leq = lambda x, y: x == y or (x, y) in leq_pairs
    grid = fc.poset_category(["bot", "a", "b", "top"], leq)
    gcover = fc.chain_cover(grid)
    assert len(gcover.chains) == 2
    for chain, _ in gcover.chains:
        assert len(chain.objects) == 3
    inter, _ = gcover.intersections[(0, 1)]
    assert set(inter.objects) == {"bot", "top"}
    assert len(inter.morphisms) == 3  # two identities plus the composite


def test_coproduct():
    e = fc.terminal_category()
    both, incls = fc.coproduct([e, e], ["a.", "b."])
    assert len(both.objects) == 2
    for i in incls:
        fc.validate_functor(i)


def test_slice_functors_cover_when_anchors_reach_everything():
    from hochcat import groth as gt

    v = vposet()
    legs = []
    for anchor in ["t0", "t1"]:
        sl, forget = gt.slice_cat(v, anchor)
        legs.append(forget)
    # every object admits a map to one of the anchors, so the slice family
    # is a cover at every depth
    for depth in (2, 5, 8):
        assert fc.is_n_cover(legs, fc.INF, depth=depth)
    # dropping one anchor leaves t1 unreachable
    assert not fc.is_n_cover(legs[:1], 0)


def test_full_surjective_functor_is_cover():
    v = vposet()
    cover = fc.chain_cover(v)
    subcats = [sub for sub, _ in cover.chains]
    both, incls = fc.coproduct(subcats, ["x.", "y."])
    obj_map, mor_map = {}, {}
    for (sub, leg), incl in zip(cover.chains, incls):
        for o in sub.objects:
            obj_map[incl.obj_map[o]] = leg.obj_map[o]
        for m in sub.src:
            mor_map[incl.mor_map[m]] = leg.mor_map[m]
    onto = fc.validate_functor(fc.Functor(both, v, obj_map, mor_map))
    # full (every poset relation is hit) and surjective on objects
    assert fc.is_n_cover([onto], fc.INF, depth=8)
