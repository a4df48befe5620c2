"""Cross-cutting invariants: dual-route checks against independent oracles."""

import itertools
import random
from fractions import Fraction

from hochcat import bimod as bm
from hochcat import fincat as fc
from hochcat import fixtures as fx
from hochcat import graded as gr
from hochcat import hochschild as hh
from hochcat import qlinalg as ql
from hochcat import randgen as rg
from hochcat.qlinalg import QMatrix


def test_nerve_of_pullback_is_pullback_of_nerves():
    v = fx.vposet_cat()
    d0, i0 = fc.full_subcategory(v, ["s", "t0"])
    d1, i1 = fc.full_subcategory(v, ["s", "t1"])
    cases = [(i0, i1), (fc.identity_functor(v), i0)]
    for f1, f2 in cases:
        pb, p1, p2 = fc.pullback_cat(f1, f2)
        for n in range(5):
            lhs = {
                (fc.apply_to_simplex(p1, s, n), fc.apply_to_simplex(p2, s, n))
                for s in fc.nerve(pb, n)
            }
            rhs = {
                (s1, s2)
                for s1 in fc.nerve(f1.source, n)
                for s2 in fc.nerve(f2.source, n)
                if fc.apply_to_simplex(f1, s1, n) == fc.apply_to_simplex(f2, s2, n)
            }
            assert lhs == rhs
            assert len(fc.nerve(pb, n)) == len(rhs)


def test_nerve_of_graded_pullback():
    kv = fx.free_graded(fx.vposet_cat(), "kv")
    d0, i0 = fc.full_subcategory(fx.vposet_cat(), ["s", "t0"])
    d1, i1 = fc.full_subcategory(fx.vposet_cat(), ["s", "t1"])
    r0, c0 = gr.restrict(kv, i0)
    r1, c1 = gr.restrict(kv, i1)
    pb, g1, g2 = gr.pullback_graded(c0, c1)
    s1 = gr.sharp_functor(g1)
    s2 = gr.sharp_functor(g2)
    for n in range(5):
        lhs = {
            (fc.apply_to_simplex(s1, s, n), fc.apply_to_simplex(s2, s, n))
            for s in fc.nerve(s1.source, n)
        }
        sf0 = gr.sharp_functor(c0)
        sf1 = gr.sharp_functor(c1)
        rhs = {
            (a, b)
            for a in fc.nerve(sf0.source, n)
            for b in fc.nerve(sf1.source, n)
            if fc.apply_to_simplex(sf0, a, n) == fc.apply_to_simplex(sf1, b, n)
        }
        assert len(lhs) == len(rhs)


def brute_force_cover(functors, k):
    hit = {fc.apply_to_simplex(f, s, k) for f in functors for s in fc.nerve(f.source, k)}
    return all(s in hit for s in fc.nerve(functors[0].target, k))


def test_cover_shortcut_against_per_degree_checks():
    rng = random.Random(99)
    for trial in range(6):
        poset = rg.random_poset(rng)
        cover = fc.chain_cover(poset)
        legs = [incl for _, incl in cover.chains]
        # drop random legs to get families that may or may not cover
        keep = [leg for leg in legs if rng.random() < 0.8] or legs[:1]
        for n in range(4):
            verdict = fc.is_n_cover(keep, n)
            independent = all(brute_force_cover(keep, k) for k in range(n + 1))
            assert bool(verdict) == independent


def test_recognize_arrow_roundtrip_randomized():
    rng = random.Random(2718)
    for trial in range(6):
        lower = fc.chain_category(rng.randint(0, 1), prefix=f"l{trial}.")
        upper = fc.chain_category(rng.randint(0, 1), prefix=f"u{trial}.")
        # a bifunctor with one element per (lower object, upper object) cell
        elements = {}
        left_action = {}
        right_action = {}
        for v in lower.objects:
            for u in upper.objects:
                elements[(v, u)] = (f"s{trial}.{v}.{u}",)
        for (v, u), (e,) in elements.items():
            for m in upper.mors():
                if upper.src[m] == u:
                    left_action[(m, e)] = elements[(v, upper.tgt[m])][0]
            for m in lower.mors():
                if lower.tgt[m] == v:
                    right_action[(e, m)] = elements[(lower.src[m], u)][0]
        bif = fc.validate_bifunctor(
            fc.SetBifunctor(upper, lower, elements, left_action, right_action))
        w, inc_low, inc_high = fc.arrow_cat_base(bif)
        members = frozenset(m for m in w.src if m.startswith(fc.CROSS))
        rec = fc.recognize_arrow(w, fc.Ideal(w, members))
        assert set(rec.lower.objects) == {fc.LOW + o for o in lower.objects}
        assert set(rec.upper.objects) == {fc.HIGH + o for o in upper.objects}
        fc.validate_functor(rec.iso)
        assert set(rec.iso.mor_map.values()) == set(w.src)


def dense_rank(rows):
    rows = [[Fraction(x) for x in r] for r in rows]
    rk, col, r = 0, 0, 0
    ncols = len(rows[0]) if rows else 0
    while r < len(rows) and col < ncols:
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][col]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col] / pv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
        col += 1
        rk += 1
    return rk


def test_cohomology_against_dense_oracle():
    # small Hochschild complexes, re-derived with dense textbook elimination
    for cat in [fx.q_algebra(), fx.dual_numbers(), fx.t2_graded().category]:
        cx = hh.build_complex(cat, None, 2)
        dims = hh.hh_dims(cx)
        dense = []
        ranks = [dense_rank(d.dense()) if d.rows * d.cols else 0 for d in cx.diffs]
        nullities = [d.cols - r for d, r in zip(cx.diffs, ranks)]
        dense.append(nullities[0])
        for i in range(1, 3):
            dense.append(nullities[i] - ranks[i - 1])
        assert dims == dense


def test_exactness_stable_under_permutation_of_bases():
    kv = fx.free_graded(fx.vposet_cat(), "kv")
    legs = [gr.restrict(kv, incl)[1] for _, incl in fc.chain_cover(fx.vposet_cat()).chains]
    total = hh.build_complex(kv, None, 2)
    cx1 = hh.build_complex(legs[0].source, None, 2)
    cx2 = hh.build_complex(legs[1].source, None, 2)
    r1 = hh.identity_restriction(legs[0], total, cx1)
    r2 = hh.identity_restriction(legs[1], total, cx2)
    pb, g1, g2 = gr.pullback_graded(legs[0], legs[1])
    pcx = hh.build_complex(pb, None, 2)
    q1 = hh.identity_restriction(g1, cx1, pcx)
    q2 = hh.identity_restriction(g2, cx2, pcx)
    rng = random.Random(5)
    for n in range(3):
        first = r1[n].vstack(r2[n])
        second = QMatrix(pcx.dim(n), cx1.dim(n) + cx2.dim(n))
        for (r, c), v in q1[n].entries.items():
            second.add_at(r, c, -v)
        for (r, c), v in q2[n].entries.items():
            second.add_at(r, cx1.dim(n) + c, v)
        assert ql.is_exact_sequence([first, second])
        # conjugate by random permutations of each term's basis
        def perm(k):
            order = list(range(k))
            rng.shuffle(order)
            return QMatrix(k, k, {(i, order[i]): Fraction(1) for i in range(k)})
        pa = perm(first.cols)
        pm = perm(first.rows)
        pc = perm(second.rows)
        assert ql.is_exact_sequence([pm * first * pa, pc * second * pm.transpose()])


def test_tensor_associativity_canonical_map():
    lam = fx.dual_numbers()
    one = bm.identity_bimodule(lam)
    inner_l = bm.tensor(one, one)
    outer_l = bm.tensor(inner_l.bimodule, one)
    inner_r = bm.tensor(one, one)
    outer_r = bm.tensor(one, inner_r.bimodule)
    key = ("id*", "lambda.o", "lambda.o")
    # single composite space on both sides
    lkey = next(iter(outer_l.bimodule.basis))
    rkey = next(iter(outer_r.bimodule.basis))
    dim_l = outer_l.bimodule.dim(lkey)
    dim_r = outer_r.bimodule.dim(rkey)
    assert dim_l == dim_r == 2
    ikey = next(iter(inner_l.bimodule.basis))
    cols_l = []
    cols_r = []
    for i in range(2):
        for j in range(2):
            for k in range(2):
                left = {}
                for t, c in inner_l.pairing[(key, i, key, j)].items():
                    for t2, c2 in outer_l.pairing[((ikey), t, key, k)].items():
                        left[t2] = left.get(t2, Fraction(0)) + c * c2
                right = {}
                for t, c in inner_r.pairing[(key, j, key, k)].items():
                    for t2, c2 in outer_r.pairing[(key, i, (ikey), t)].items():
                        right[t2] = right.get(t2, Fraction(0)) + c * c2
                cols_l.append([left.get(t, Fraction(0)) for t in range(dim_l)])
                cols_r.append([right.get(t, Fraction(0)) for t in range(dim_r)])
    ml = QMatrix.from_columns(cols_l)
    mr = QMatrix.from_columns(cols_r)
    # the canonical identification is well defined and bijective:
    # both span everything and have the same kernel
    assert ql.rank(ml) == dim_l
    assert ql.rank(mr) == dim_r
    assert ql.kernel_basis(ml) == ql.kernel_basis(mr)


def test_base_change_injectivity_propagates():
    from hochcat import groth as gt

    v = fx.vposet_cat()
    qs, q0, q1 = fx.q_algebra("qs"), fx.q_algebra("q0"), fx.q_algebra("q1")
    p = gt.PseudoFunctor(v, {"s": qs, "t0": q0, "t1": q1},
                         {"s<t0": fx.scalar_bimodule(q0, qs, "e0"),
                          "s<t1": fx.scalar_bimodule(q1, qs, "e1")}, {})
    d0, incl = fc.full_subcategory(v, ["s", "t0"])
    bc = gt.base_change(p, incl)
    sf = bc.comparison.base_functor
    assert len(set(sf.mor_map.values())) == len(sf.mor_map)  # N1 stays injective


def test_cartesian_implies_subcartesian_on_corpus():
    rng = random.Random(8)
    for i in range(6):
        f = rg.random_subcartesian_functor(rng, f"ci{i}")
        if gr.is_cartesian(f):
            assert gr.is_subcartesian(f)


def test_restrict_arrow_recovers_piece():
    # restricting the arrow category along the lower inclusion gives the piece
    arrow = fx.t2_graded()
    lower = arrow.from_lower.source
    w = arrow.base
    sub, incl = fc.full_subcategory(w, [o for o in w.objects if o.startswith(fc.LOW)])
    restricted, _ = gr.restrict(arrow.category, incl)
    assert gr.graded_cats_equal(
        restricted, lower,
        obj_bij=lambda x: x[len(fc.LOW):],
        base_obj_bij=lambda o: o[len(fc.LOW):],
        base_mor_bij=lambda m: m[len(fc.LOW):],
    )


def test_restriction_onto_vertex_of_path_category():
    # the inclusion of a single endpoint into the path category restricts
    # surjectively in every degree (projection onto the simplices it hits)
    a2 = fc.chain_category(1)
    ka = fx.free_graded(a2, "ka")
    sub, incl = fc.full_subcategory(a2, ["0"])
    piece, comparison = gr.restrict(ka, incl)
    src = hh.build_complex(ka, None, 3)
    dst = hh.build_complex(piece, None, 3)
    maps = hh.identity_restriction(comparison, src, dst)
    for n in range(4):
        assert ql.rank(maps[n]) == dst.dim(n) == 1
        # and the matrix is a coordinate projection: one unit entry per row
        rows = {}
        for (r, c), v in maps[n].entries.items():
            rows.setdefault(r, []).append(v)
        assert all(vals == [Fraction(1)] for vals in rows.values())


def test_support_dims_equal_nullity_of_coproduct_restriction():
    # cross-simplex count = kernel dimension of the restriction onto the
    # two-sided coproduct, degree by degree
    arrow = fx.t2_graded()
    c = arrow.category
    w = arrow.base
    noncross = [m for m in w.src if not m.startswith(fc.CROSS)]
    sub, incl = fc.subcategory(w, list(w.objects), noncross)
    piece, comparison = gr.restrict(c, incl)
    ambient = hh.build_complex(c, None, 3)
    supp = hh.support_complex(comparison, ambient)
    pulled = bm.restrict_bimodule(comparison, bm.identity_bimodule(c))
    dst = hh.build_complex(piece, pulled, 3)
    maps = hh.restriction_chain_map(comparison, ambient, dst)
    for n in range(4):
        assert supp.dim(n) == len(ql.kernel_basis(maps[n]))


def test_not_subcartesian_means_sharp_not_cartesian():
    pc = fx.two_object_linear_cat()
    piece = fx.q_algebra("zz")
    zero = gr.GradedFunctor(
        piece, pc, fc.identity_functor(pc.base), {"zz.o": "paircat.A"},
        {("id*", "zz.o", "zz.o"): QMatrix.zeros(1, 1)},
    )
    assert not gr.is_subcartesian(zero)
    assert not gr.is_cartesian(gr.sharp_graded_functor(zero))


def test_truncated_polynomial_cubic_regression():
    from fractions import Fraction as F

    def mult(i, j):
        return {i + j: F(1)} if i + j <= 2 else {}

    cubic = fx.algebra_graded("qx3", ["one", "x", "x2"], {0: F(1)}, mult)
    cx = hh.build_complex(cubic, None, 3)
    assert [cx.dim(n) for n in range(5)] == [3, 9, 27, 81, 243]
    assert hh.hh_dims(cx) == [3, 2, 2, 2]
