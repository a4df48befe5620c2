"""Seeded random instances for the property suites.

Random graded categories are assembled from constructions that guarantee
validity (free graded categories on random posets, trivially graded
algebras from a catalog, arrow categories, restrictions, singleton-fiber
versions), so every draw passes the validators by construction and the
suites exercise genuinely different shapes instead of one template.
"""

from __future__ import annotations

import random

from . import bimod as bm
from . import fincat as fc
from . import fixtures as fx
from . import graded as gr
from .fincat import FinCat
from .graded import GradedCat, GradedFunctor


def random_poset(rng: random.Random, max_elems: int = 4) -> FinCat:
    n = rng.randint(2, max_elems)
    elems = [f"p{i}" for i in range(n)]
    leq = {(a, a) for a in elems}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.5:
                leq.add((elems[i], elems[j]))
    # transitive closure
    changed = True
    while changed:
        changed = False
        for a, b in list(leq):
            for c, d in list(leq):
                if b == c and (a, d) not in leq:
                    leq.add((a, d))
                    changed = True
    return fc.poset_category(elems, lambda a, b: (a, b) in leq)


_ALGEBRAS = [
    fx.q_algebra,
    fx.dual_numbers,
    fx.split_quadratic,
    fx.product_algebra,
    fx.two_object_linear_cat,
]


def random_algebra(rng: random.Random, tag: str) -> GradedCat:
    maker = rng.choice(_ALGEBRAS)
    return maker(f"{tag}")


def random_graded_cat(rng: random.Random, tag: str = "r") -> GradedCat:
    kind = rng.randrange(5)
    if kind == 0:
        return fx.free_graded(random_poset(rng), f"{tag}free")
    if kind == 1:
        return random_algebra(rng, f"{tag}alg")
    if kind == 2:
        return gr.sharp(random_algebra(rng, f"{tag}sh"))[0]
    if kind == 3:
        left = fx.q_algebra(f"{tag}L")
        right = rng.choice([fx.q_algebra, fx.dual_numbers])(f"{tag}R")
        if left.name == right.name:
            right = fx.dual_numbers(f"{tag}R2")
        m = fx.scalar_bimodule(left, right, f"{tag}m")
        return bm.arrow_category(m, name=f"{tag}arrow").category
    poset = random_poset(rng)
    kv = fx.free_graded(poset, f"{tag}res")
    objs = [o for o in poset.objects if rng.random() < 0.7] or [poset.objects[0]]
    sub, incl = fc.full_subcategory(poset, objs)
    return gr.restrict(kv, incl)[0]


def random_subcartesian_functor(rng: random.Random, tag: str = "f") -> GradedFunctor:
    """A subcartesian functor of one of the natural shapes."""
    kind = rng.randrange(3)
    if kind == 0:
        # cartesian restriction of a free graded category along a subposet
        poset = random_poset(rng)
        kv = fx.free_graded(poset, f"{tag}kv")
        objs = [o for o in poset.objects if rng.random() < 0.7] or [poset.objects[0]]
        sub, incl = fc.full_subcategory(poset, objs)
        return gr.restrict(kv, incl)[1]
    if kind == 1:
        # counit of the singleton-fiber construction: bijective on nerves
        cat = rng.choice([fx.two_object_linear_cat, fx.product_algebra])(f"{tag}a")
        return gr.sharp(cat)[1]
    # fully faithful trivially graded inclusion (subcartesian, not cartesian)
    amb = fx.two_object_linear_cat(f"{tag}amb")
    pick = rng.choice(["A", "B"])
    piece = fx.q_algebra(f"{tag}p")
    from .qlinalg import QMatrix

    return gr.GradedFunctor(
        piece, amb, fc.identity_functor(amb.base),
        {f"{tag}p.o": f"{tag}amb.{pick}"},
        {("id*", f"{tag}p.o", f"{tag}p.o"): QMatrix.identity(1)},
    )


def random_chain_cover_legs(rng: random.Random, tag: str = "c") -> list[GradedFunctor]:
    """Cartesian legs over the composition-chain cover of a random poset."""
    poset = random_poset(rng)
    kv = fx.free_graded(poset, f"{tag}kv")
    cover = fc.chain_cover(poset)
    return [gr.restrict(kv, incl)[1] for _, incl in cover.chains]


def random_three_cover_legs(rng: random.Random, tag: str = "t") -> list[GradedFunctor]:
    """Subcategory legs that form (at least) a 3-cover of a free graded poset."""
    for _ in range(40):
        poset = random_poset(rng)
        kv = fx.free_graded(poset, f"{tag}kv")
        cover = fc.chain_cover(poset)
        legs = list(cover.chains)
        # randomly drop chains while keeping a 3-cover
        rng.shuffle(legs)
        kept = list(legs)
        for cand in legs:
            trial = [x for x in kept if x is not cand]
            if trial and fc.is_n_cover([incl for _, incl in trial], 3):
                kept = trial
        incls = [incl for _, incl in kept]
        if fc.is_n_cover(incls, 3):
            return [gr.restrict(kv, incl)[1] for _, incl in kept]
    raise RuntimeError("could not build a random 3-cover")


def random_decomposition(rng: random.Random, tag: str = "d"):
    """A free graded poset category with an ideal-subcategory decomposition."""
    for _ in range(40):
        poset = random_poset(rng)
        kv = fx.free_graded(poset, f"{tag}kv")
        # pick an upward-closed object set; arrows leaving it form an ideal
        upper = {o for o in poset.objects if rng.random() < 0.5}
        changed = True
        while changed:
            changed = False
            for m in poset.mors():
                if poset.src[m] in upper and poset.tgt[m] not in upper:
                    upper.add(poset.tgt[m])
                    changed = True
        members = frozenset(
            m for m in poset.mors()
            if poset.tgt[m] in upper and poset.src[m] not in upper
        )
        if not members:
            continue
        ideal = fc.Ideal(poset, members)
        subm = [m for m in poset.mors() if m not in members]
        try:
            sub, _ = fc.subcategory(
                poset, list(poset.objects), subm)
        except fc.SubcategoryError:
            continue
        if fc.decomposition_check(poset, ideal, sub):
            return kv, ideal, sub
    raise RuntimeError("could not build a random decomposition")
