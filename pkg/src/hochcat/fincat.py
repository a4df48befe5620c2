"""Finite categories given by explicit composition tables.

A category here is a plain lookup structure: object ids, morphism ids with
endpoints, an identity table and a total composition table on composable
pairs.  Everything downstream (nerves, covers, pullbacks, ideals, the arrow
category and its recognition, chain covers of posets) is computed by
exhaustive enumeration over these tables, which is exactly what makes the
verdicts certificates rather than claims.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

INF = "inf"


class FinCatError(Exception):
    pass


class MissingComposite(FinCatError):
    def __init__(self, g, f):
        self.pair = (g, f)
        super().__init__(f"composite of ({g}, {f}) missing or spurious")


class NonAssociative(FinCatError):
    def __init__(self, h, g, f):
        self.triple = (h, g, f)
        super().__init__(f"associativity fails on ({h}, {g}, {f})")


class BadIdentity(FinCatError):
    def __init__(self, obj, detail=""):
        self.obj = obj
        super().__init__(f"bad identity at {obj}: {detail}")


class TargetMismatch(FinCatError):
    pass


class NotPoset(FinCatError):
    pass


class SubcategoryError(FinCatError):
    pass


@dataclass(frozen=True)
class FinCat:
    objects: tuple[str, ...]
    morphisms: tuple[tuple[str, str, str], ...]  # (id, source, target)
    identity: dict[str, str]
    comp: dict[tuple[str, str], str]  # (g, f) -> g after f
    src: dict[str, str] = field(default_factory=dict, compare=False)
    tgt: dict[str, str] = field(default_factory=dict, compare=False)
    mor_index: dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "src", {m: s for m, s, _ in self.morphisms})
        object.__setattr__(self, "tgt", {m: t for m, _, t in self.morphisms})
        object.__setattr__(self, "mor_index", {m: i for i, (m, _, _) in enumerate(self.morphisms)})

    def mors(self) -> list[str]:
        return [m for m, _, _ in self.morphisms]

    def hom(self, a: str, b: str) -> list[str]:
        return [m for m, s, t in self.morphisms if s == a and t == b]

    def compose(self, g: str, f: str) -> str:
        return self.comp[(g, f)]

    def compose_path(self, path: Sequence[str]) -> str:
        """Composite of a path (u_0, ..., u_{n-1}), u_0 applied first."""
        out = path[0]
        for m in path[1:]:
            out = self.comp[(m, out)]
        return out

    def out_of(self, obj: str) -> list[str]:
        return [m for m, s, _ in self.morphisms if s == obj]


def violations(cat: FinCat) -> list[FinCatError]:
    """All axiom violations: identities, totality of comp, associativity."""
    errs: list[FinCatError] = []
    objset = set(cat.objects)
    for m, s, t in cat.morphisms:
        if s not in objset or t not in objset:
            errs.append(FinCatError(f"morphism {m} has unknown endpoint"))
    for obj in cat.objects:
        i = cat.identity.get(obj)
        if i is None or i not in cat.src or cat.src[i] != obj or cat.tgt[i] != obj:
            errs.append(BadIdentity(obj, "identity missing or wrong endpoints"))
    composable = [
        (g, f)
        for f in cat.src
        for g in cat.src
        if cat.tgt[f] == cat.src[g]
    ]
    for g, f in composable:
        h = cat.comp.get((g, f))
        if h is None or h not in cat.src:
            errs.append(MissingComposite(g, f))
            continue
        if cat.src[h] != cat.src[f] or cat.tgt[h] != cat.tgt[g]:
            errs.append(MissingComposite(g, f))
    for pair in cat.comp:
        g, f = pair
        if g not in cat.src or f not in cat.src or cat.tgt[f] != cat.src[g]:
            errs.append(MissingComposite(g, f))
    if errs:
        return errs
    for obj in cat.objects:
        i = cat.identity[obj]
        for m in cat.src:
            if cat.src[m] == obj and cat.comp[(m, i)] != m:
                errs.append(BadIdentity(obj, f"{m} o id != {m}"))
            if cat.tgt[m] == obj and cat.comp[(i, m)] != m:
                errs.append(BadIdentity(obj, f"id o {m} != {m}"))
    for f in cat.src:
        for g in cat.src:
            if cat.src[g] != cat.tgt[f]:
                continue
            gf = cat.comp[(g, f)]
            for h in cat.src:
                if cat.src[h] != cat.tgt[g]:
                    continue
                if cat.comp[(h, gf)] != cat.comp[(cat.comp[(h, g)], f)]:
                    errs.append(NonAssociative(h, g, f))
    return errs


def validate_fincat(
    objects: Iterable[str],
    morphisms: Iterable[tuple[str, str, str]],
    identity: dict[str, str],
    comp: dict[tuple[str, str], str],
) -> FinCat:
    cat = FinCat(tuple(objects), tuple(morphisms), dict(identity), dict(comp))
    errs = violations(cat)
    if errs:
        raise errs[0]
    return cat


# stock categories ---------------------------------------------------------


def terminal_category() -> FinCat:
    return validate_fincat(["*"], [("id*", "*", "*")], {"*": "id*"}, {("id*", "id*"): "id*"})


def discrete_category(objects: Sequence[str]) -> FinCat:
    mors = [(f"id:{o}", o, o) for o in objects]
    return validate_fincat(
        objects,
        mors,
        {o: f"id:{o}" for o in objects},
        {(m, m): m for m, _, _ in mors},
    )


def poset_category(elements: Sequence[str], leq) -> FinCat:
    """Category of a poset; `leq(a, b)` decides a <= b.  NotPoset on cycles."""
    for a in elements:
        if not leq(a, a):
            raise NotPoset(f"{a} not <= itself")
    for a, b in itertools.combinations(elements, 2):
        if leq(a, b) and leq(b, a):
            raise NotPoset(f"{a} and {b} are equivalent")
    mors = []
    for a in elements:
        for b in elements:
            if leq(a, b):
                name = f"id:{a}" if a == b else f"{a}<{b}"
                mors.append((name, a, b))
    identity = {a: f"id:{a}" for a in elements}
    comp = {}
    for g, bs, cs in mors:
        for f, as_, bs2 in mors:
            if bs2 == bs:
                name = f"id:{as_}" if as_ == cs else f"{as_}<{cs}"
                comp[(g, f)] = name
    return validate_fincat(elements, mors, identity, comp)


def chain_category(n: int, prefix: str = "") -> FinCat:
    """Path category of 0 -> 1 -> ... -> n (so A2 is chain_category(1))."""
    elems = [f"{prefix}{i}" for i in range(n + 1)]
    order = {e: i for i, e in enumerate(elems)}
    return poset_category(elems, lambda a, b: order[a] <= order[b])


def coproduct(cats: Sequence[FinCat], tags: Sequence[str]) -> tuple[FinCat, list["Functor"]]:
    """Disjoint union, with objects/morphisms tag-prefixed; returns inclusions."""
    objs, mors, identity, comp = [], [], {}, {}
    inclusions = []
    for cat, tag in zip(cats, tags):
        omap = {o: f"{tag}{o}" for o in cat.objects}
        mmap = {m: f"{tag}{m}" for m in cat.src}
        objs.extend(omap[o] for o in cat.objects)
        mors.extend((mmap[m], omap[s], omap[t]) for m, s, t in cat.morphisms)
        identity.update({omap[o]: mmap[cat.identity[o]] for o in cat.objects})
        comp.update({(mmap[g], mmap[f]): mmap[h] for (g, f), h in cat.comp.items()})
        inclusions.append((cat, omap, mmap))
    total = validate_fincat(objs, mors, identity, comp)
    return total, [Functor(c, total, om, mm) for c, om, mm in inclusions]


# functors -----------------------------------------------------------------


@dataclass(frozen=True)
class Functor:
    source: FinCat
    target: FinCat
    obj_map: dict[str, str]
    mor_map: dict[str, str]

    def apply_path(self, path: tuple[str, ...]) -> tuple[str, ...]:
        return tuple(self.mor_map[m] for m in path)


def validate_functor(f: Functor) -> Functor:
    for o in f.source.objects:
        if f.obj_map.get(o) not in set(f.target.objects):
            raise FinCatError(f"functor misses object {o}")
    for m, s, t in f.source.morphisms:
        fm = f.mor_map.get(m)
        if fm is None or fm not in f.target.src:
            raise FinCatError(f"functor misses morphism {m}")
        if f.target.src[fm] != f.obj_map[s] or f.target.tgt[fm] != f.obj_map[t]:
            raise FinCatError(f"functor breaks endpoints of {m}")
    for o in f.source.objects:
        if f.mor_map[f.source.identity[o]] != f.target.identity[f.obj_map[o]]:
            raise FinCatError(f"functor breaks identity at {o}")
    for (g, h), gh in f.source.comp.items():
        if f.target.comp[(f.mor_map[g], f.mor_map[h])] != f.mor_map[gh]:
            raise FinCatError(f"functor breaks composition ({g}, {h})")
    return f


def identity_functor(cat: FinCat) -> Functor:
    return Functor(cat, cat, {o: o for o in cat.objects}, {m: m for m in cat.src})


def compose_functors(g: Functor, f: Functor) -> Functor:
    if f.target is not g.source and f.target != g.source:
        raise TargetMismatch("functor composition mismatch")
    return Functor(
        f.source,
        g.target,
        {o: g.obj_map[v] for o, v in f.obj_map.items()},
        {m: g.mor_map[v] for m, v in f.mor_map.items()},
    )


def subcategory(cat: FinCat, objects: Sequence[str], morphisms: Sequence[str]) -> tuple[FinCat, Functor]:
    """Validated subcategory plus its inclusion functor."""
    objset, morset = set(objects), set(morphisms)
    for o in objects:
        if o not in set(cat.objects):
            raise SubcategoryError(f"unknown object {o}")
        if cat.identity[o] not in morset:
            raise SubcategoryError(f"identity of {o} missing")
    for m in morphisms:
        if m not in cat.src:
            raise SubcategoryError(f"unknown morphism {m}")
        if cat.src[m] not in objset or cat.tgt[m] not in objset:
            raise SubcategoryError(f"morphism {m} leaves the object set")
    comp = {}
    for g in morphisms:
        for f in morphisms:
            if cat.tgt[f] == cat.src[g]:
                h = cat.comp[(g, f)]
                if h not in morset:
                    raise SubcategoryError(f"not closed under composition: ({g}, {f})")
                comp[(g, f)] = h
    mors = [(m, s, t) for m, s, t in cat.morphisms if m in morset]
    objs = [o for o in cat.objects if o in objset]
    sub = validate_fincat(objs, mors, {o: cat.identity[o] for o in objs}, comp)
    incl = Functor(sub, cat, {o: o for o in objs}, {m: m for m, _, _ in mors})
    return sub, incl


def full_subcategory(cat: FinCat, objects: Sequence[str]) -> tuple[FinCat, Functor]:
    objset = set(objects)
    mors = [m for m, s, t in cat.morphisms if s in objset and t in objset]
    return subcategory(cat, objects, mors)


def is_delta(cat: FinCat) -> bool:
    """Arrows between two distinct objects go only one way."""
    for a, b in itertools.combinations(cat.objects, 2):
        if cat.hom(a, b) and cat.hom(b, a):
            return False
    return True


def is_poset(cat: FinCat) -> bool:
    if not is_delta(cat):
        return False
    for a in cat.objects:
        for b in cat.objects:
            if len(cat.hom(a, b)) > 1:
                return False
        if cat.hom(a, a) != [cat.identity[a]]:
            return False
    return True


# nerves and covers ---------------------------------------------------------


def nerve(cat: FinCat, n: int) -> list:
    """All n-simplices: composable paths (u_0, .., u_{n-1}); degenerate included.

    0-simplices are the objects.  The output is lexicographic in the declared
    morphism order, which downstream code relies on for matrix layouts.
    """
    if n < 0:
        raise FinCatError(f"nerve degree must be nonnegative, got {n}")
    if n == 0:
        return list(cat.objects)
    order = sorted(cat.mors(), key=lambda m: cat.mor_index[m])
    by_source: dict[str, list[str]] = {}
    for m in order:
        by_source.setdefault(cat.src[m], []).append(m)
    simplices: list[tuple[str, ...]] = []

    def extend(path: tuple[str, ...]):
        if len(path) == n:
            simplices.append(path)
            return
        for m in by_source.get(cat.tgt[path[-1]], ()):
            extend(path + (m,))

    for m in order:
        extend((m,))
    return simplices


def apply_to_simplex(f: Functor, simplex, n: int):
    if n == 0:
        return f.obj_map[simplex]
    return tuple(f.mor_map[m] for m in simplex)


@dataclass
class CoverVerdict:
    ok: bool
    checked_degree: int
    witness: object = None  # first unhit simplex, when not a cover
    depth_bound: int | None = None  # bound used for the infinite case

    def __bool__(self):
        return self.ok


def is_n_cover(functors: Sequence[Functor], n, depth: int | None = None) -> CoverVerdict:
    """Joint surjectivity on nerves up to degree n (or a depth bound for inf).

    Hitting every n-simplex forces all lower degrees (pad with identities),
    so only the top degree is enumerated.  For n = "inf" the check runs at
    `depth` (default 2 * |Mor|) and reports the bound it used.
    """
    base = functors[0].target
    for f in functors[1:]:
        if f.target != base:
            raise TargetMismatch("cover legs land in different categories")
    if n == INF or n is None:
        k = depth if depth is not None else 2 * len(base.morphisms)
        bound = k
    else:
        k = int(n)
        bound = None
    hit = set()
    for f in functors:
        for s in nerve(f.source, k):
            hit.add(apply_to_simplex(f, s, k))
    for s in nerve(base, k):
        if s not in hit:
            return CoverVerdict(False, k, witness=s, depth_bound=bound)
    return CoverVerdict(True, k, depth_bound=bound)


# pullbacks -----------------------------------------------------------------


def pair_name(a: str, b: str) -> str:
    return f"({a},{b})"


def pullback_cat(f1: Functor, f2: Functor) -> tuple[FinCat, Functor, Functor]:
    """Pullback of categories over a shared target, as explicit pairs."""
    if f1.target != f2.target:
        raise TargetMismatch("pullback legs have different targets")
    objs = [
        pair_name(a, b)
        for a in f1.source.objects
        for b in f2.source.objects
        if f1.obj_map[a] == f2.obj_map[b]
    ]
    mors = []
    opairs = {}
    for a in f1.source.objects:
        for b in f2.source.objects:
            if f1.obj_map[a] == f2.obj_map[b]:
                opairs[pair_name(a, b)] = (a, b)
    mpairs = {}
    for m1, s1, t1 in f1.source.morphisms:
        for m2, s2, t2 in f2.source.morphisms:
            if f1.mor_map[m1] == f2.mor_map[m2]:
                name = pair_name(m1, m2)
                mors.append((name, pair_name(s1, s2), pair_name(t1, t2)))
                mpairs[name] = (m1, m2)
    identity = {o: pair_name(f1.source.identity[a], f2.source.identity[b]) for o, (a, b) in opairs.items()}
    comp = {}
    for g, (g1, g2) in mpairs.items():
        for f, (h1, h2) in mpairs.items():
            if f1.source.tgt[h1] == f1.source.src[g1] and f2.source.tgt[h2] == f2.source.src[g2]:
                comp[(g, f)] = pair_name(f1.source.comp[(g1, h1)], f2.source.comp[(g2, h2)])
    pb = validate_fincat(objs, mors, identity, comp)
    p1 = Functor(pb, f1.source, {o: ab[0] for o, ab in opairs.items()}, {m: ab[0] for m, ab in mpairs.items()})
    p2 = Functor(pb, f2.source, {o: ab[1] for o, ab in opairs.items()}, {m: ab[1] for m, ab in mpairs.items()})
    return pb, p1, p2


# bifunctors ----------------------------------------------------------------


@dataclass(frozen=True)
class SetBifunctor:
    """Sets S(V, U) with a left action of `left` and a right action of `right`.

    `elements` maps (right object V, left object U) to element ids (globally
    unique); actions compose a left morphism after / right morphism before.
    """

    left: FinCat  # acts on the target side
    right: FinCat  # acts on the source side
    elements: dict[tuple[str, str], tuple[str, ...]]
    left_action: dict[tuple[str, str], str]  # (left mor u, elt) -> elt
    right_action: dict[tuple[str, str], str]  # (elt, right mor v) -> elt

    def cell_of(self) -> dict[str, tuple[str, str]]:
        return {e: vu for vu, elts in self.elements.items() for e in elts}

    def all_elements(self) -> list[str]:
        out = []
        for vu in sorted(self.elements):
            out.extend(self.elements[vu])
        return out


def validate_bifunctor(s: SetBifunctor) -> SetBifunctor:
    cell = s.cell_of()
    seen = set()
    for e in cell:
        if e in seen:
            raise FinCatError(f"duplicate bifunctor element id {e}")
        seen.add(e)
    for (v, u), elts in s.elements.items():
        if v not in set(s.right.objects) or u not in set(s.left.objects):
            raise FinCatError(f"bifunctor cell ({v},{u}) has unknown objects")
    for e, (v, u) in cell.items():
        for m in s.left.mors():
            defined = (m, e) in s.left_action
            if (s.left.src[m] == u) != defined:
                raise FinCatError(f"left action wrong domain at ({m}, {e})")
            if defined:
                r = s.left_action[(m, e)]
                if cell.get(r) != (v, s.left.tgt[m]):
                    raise FinCatError(f"left action leaves cell at ({m}, {e})")
        for m in s.right.mors():
            defined = (e, m) in s.right_action
            if (s.right.tgt[m] == v) != defined:
                raise FinCatError(f"right action wrong domain at ({e}, {m})")
            if defined:
                r = s.right_action[(e, m)]
                if cell.get(r) != (s.right.src[m], u):
                    raise FinCatError(f"right action leaves cell at ({e}, {m})")
    for e, (v, u) in cell.items():
        if s.left_action[(s.left.identity[u], e)] != e:
            raise FinCatError(f"left identity moves {e}")
        if s.right_action[(e, s.right.identity[v])] != e:
            raise FinCatError(f"right identity moves {e}")
        for m2 in s.left.mors():
            if s.left.src[m2] != u:
                continue
            for m3 in s.left.mors():
                if s.left.src[m3] != s.left.tgt[m2]:
                    continue
                if s.left_action[(s.left.comp[(m3, m2)], e)] != s.left_action[(m3, s.left_action[(m2, e)])]:
                    raise FinCatError(f"left action not associative at ({m3}, {m2}, {e})")
        for m2 in s.right.mors():
            if s.right.tgt[m2] != v:
                continue
            for m3 in s.right.mors():
                if s.right.tgt[m3] != s.right.src[m2]:
                    continue
                if s.right_action[(e, s.right.comp[(m2, m3)])] != s.right_action[(s.right_action[(e, m2)], m3)]:
                    raise FinCatError(f"right action not associative at ({e}, {m2}, {m3})")
        for m2 in s.left.mors():
            if s.left.src[m2] != u:
                continue
            for m3 in s.right.mors():
                if s.right.tgt[m3] != v:
                    continue
                if s.left_action[(m2, s.right_action[(e, m3)])] != s.right_action[(s.left_action[(m2, e)], m3)]:
                    raise FinCatError(f"actions do not commute at ({m2}, {e}, {m3})")
    return s


def identity_bifunctor(cat: FinCat) -> SetBifunctor:
    elements = {}
    for v in cat.objects:
        for u in cat.objects:
            hom = tuple(cat.hom(v, u))
            if hom:
                elements[(v, u)] = hom
    left_action = {}
    right_action = {}
    for m in cat.mors():
        for e in cat.mors():
            if cat.src[m] == cat.tgt[e]:
                left_action[(m, e)] = cat.comp[(m, e)]
            if cat.tgt[m] == cat.src[e]:
                right_action[(e, m)] = cat.comp[(e, m)]
    return validate_bifunctor(SetBifunctor(cat, cat, elements, left_action, right_action))


def point_bifunctor(cat: FinCat) -> SetBifunctor:
    """The unique bifunctor from `cat` to the terminal category, one element per object."""
    term = terminal_category()
    elements = {(v, "*"): (f"!{v}",) for v in cat.objects}
    left_action = {("id*", f"!{v}"): f"!{v}" for v in cat.objects}
    right_action = {}
    for m in cat.mors():
        right_action[(f"!{cat.tgt[m]}", m)] = f"!{cat.src[m]}"
    return validate_bifunctor(SetBifunctor(term, cat, elements, left_action, right_action))


# ideals ---------------------------------------------------------------------


@dataclass(frozen=True)
class Ideal:
    ambient: FinCat
    members: frozenset[str]


def is_ideal(cat: FinCat, members: Iterable[str]) -> bool:
    mem = set(members)
    if not mem <= set(cat.src):
        return False
    for z in mem:
        for m in cat.mors():
            if cat.src[m] == cat.tgt[z] and cat.comp[(m, z)] not in mem:
                return False
            if cat.tgt[m] == cat.src[z] and cat.comp[(z, m)] not in mem:
                return False
    return True


def is_thin_ideal(cat: FinCat, members: Iterable[str]) -> bool:
    """Ideal with no consecutive members: nothing composable with a member is one."""
    mem = set(members)
    if not is_ideal(cat, mem):
        return False
    for z in mem:
        for m in cat.mors():
            if cat.src[m] == cat.tgt[z] and m in mem:
                return False
            if cat.tgt[m] == cat.src[z] and m in mem:
                return False
    return True


def decomposition_check(cat: FinCat, ideal: Ideal, sub: FinCat) -> bool:
    """Mor(cat) is the disjoint union of Mor(sub) and the ideal's members."""
    if not is_ideal(cat, ideal.members):
        return False
    submors = set(sub.src)
    if submors & ideal.members:
        return False
    return submors | ideal.members == set(cat.src)


# arrow categories ------------------------------------------------------------


LOW = "lo:"
HIGH = "up:"
CROSS = "x:"


def arrow_cat_base(s: SetBifunctor) -> tuple[FinCat, Functor, Functor]:
    """Category glueing `right` below `left` along S, plus the two inclusions.

    Objects and morphisms of the lower (right) category are prefixed "lo:",
    the upper (left) ones "up:", and each bifunctor element e becomes a cross
    morphism "x:e".  Hom(upper, lower) is empty.
    """
    low, high = s.right, s.left
    cell = s.cell_of()
    objs = [LOW + o for o in low.objects] + [HIGH + o for o in high.objects]
    mors = [(LOW + m, LOW + a, LOW + b) for m, a, b in low.morphisms]
    mors += [(HIGH + m, HIGH + a, HIGH + b) for m, a, b in high.morphisms]
    mors += [(CROSS + e, LOW + v, HIGH + u) for e, (v, u) in sorted(cell.items(), key=lambda kv: kv[0])]
    identity = {LOW + o: LOW + low.identity[o] for o in low.objects}
    identity.update({HIGH + o: HIGH + high.identity[o] for o in high.objects})
    comp = {(LOW + g, LOW + f): LOW + h for (g, f), h in low.comp.items()}
    comp.update({(HIGH + g, HIGH + f): HIGH + h for (g, f), h in high.comp.items()})
    for e, (v, u) in cell.items():
        for m in high.mors():
            if high.src[m] == u:
                comp[(HIGH + m, CROSS + e)] = CROSS + s.left_action[(m, e)]
        for m in low.mors():
            if low.tgt[m] == v:
                comp[(CROSS + e, LOW + m)] = CROSS + s.right_action[(e, m)]
    cat = validate_fincat(objs, mors, identity, comp)
    inc_low = Functor(low, cat, {o: LOW + o for o in low.objects}, {m: LOW + m for m in low.src})
    inc_high = Functor(high, cat, {o: HIGH + o for o in high.objects}, {m: HIGH + m for m in high.src})
    return cat, inc_low, inc_high


class NotThin(FinCatError):
    pass


class ObjectsNotCovered(FinCatError):
    def __init__(self, objs):
        self.objects = objs
        super().__init__(f"objects on neither side: {sorted(objs)}")


class ExtraCrossMorphisms(FinCatError):
    def __init__(self, mors):
        self.morphisms = mors
        super().__init__(f"cross morphisms outside the ideal: {sorted(mors)}")


@dataclass
class ArrowRecognition:
    lower: FinCat
    lower_inclusion: Functor
    upper: FinCat
    upper_inclusion: Functor
    bifunctor: SetBifunctor
    iso: Functor  # from the rebuilt arrow category onto the input


def _reachable(cat: FinCat, start: str) -> set[str]:
    out = {start}
    frontier = [start]
    while frontier:
        o = frontier.pop()
        for m in cat.out_of(o):
            t = cat.tgt[m]
            if t not in out:
                out.add(t)
                frontier.append(t)
    return out


def recognize_arrow(cat: FinCat, ideal: Ideal, require_thin: bool = True) -> ArrowRecognition:
    """Split `cat` as an arrow category along a thin ideal, or explain why not.

    Objects below: some path out of them ends with an ideal member; objects
    above: some path into them starts with one.  Succeeds iff the two classes
    cover all objects and the cross homs are exactly the ideal.
    """
    mem = set(ideal.members)
    if require_thin and not is_thin_ideal(cat, mem):
        raise NotThin("ideal is not thin (or not an ideal)")
    reach = {o: _reachable(cat, o) for o in cat.objects}
    below = {o for o in cat.objects if any(cat.src[z] in reach[o] for z in mem)}
    above = {o for o in cat.objects if any(o in reach[cat.tgt[z]] for z in mem)}
    if below & above:
        raise NotThin(f"objects on both sides: {sorted(below & above)}")
    uncovered = set(cat.objects) - below - above
    if uncovered:
        raise ObjectsNotCovered(uncovered)
    extra = {
        m
        for m in cat.mors()
        if cat.src[m] in below and cat.tgt[m] in above and m not in mem
    }
    if extra:
        raise ExtraCrossMorphisms(extra)
    backwards = [m for m in cat.mors() if cat.src[m] in above and cat.tgt[m] in below]
    if backwards:
        raise NotThin(f"morphisms from above to below: {backwards}")
    low_objs = [o for o in cat.objects if o in below]
    high_objs = [o for o in cat.objects if o in above]
    low, low_inc = full_subcategory(cat, low_objs)
    high, high_inc = full_subcategory(cat, high_objs)
    elements = {}
    for v in low_objs:
        for u in high_objs:
            hom = tuple(m for m in cat.hom(v, u))
            if hom:
                elements[(v, u)] = hom
    left_action = {}
    right_action = {}
    for e in mem:
        for m in high.mors():
            if high.src[m] == cat.tgt[e]:
                left_action[(m, e)] = cat.comp[(m, e)]
        for m in low.mors():
            if low.tgt[m] == cat.src[e]:
                right_action[(e, m)] = cat.comp[(e, m)]
    bif = validate_bifunctor(SetBifunctor(high, low, elements, left_action, right_action))
    rebuilt, _, _ = arrow_cat_base(bif)
    obj_map = {LOW + o: o for o in low_objs}
    obj_map.update({HIGH + o: o for o in high_objs})
    mor_map = {LOW + m: m for m in low.src}
    mor_map.update({HIGH + m: m for m in high.src})
    mor_map.update({CROSS + e: e for e in sorted(mem)})
    iso = validate_functor(Functor(rebuilt, cat, obj_map, mor_map))
    return ArrowRecognition(low, low_inc, high, high_inc, bif, iso)


# chain covers of posets -------------------------------------------------------


@dataclass
class ChainCover:
    chains: list[tuple[FinCat, Functor]]
    intersections: dict[tuple[int, int], tuple[FinCat, Functor]]


def chain_cover(cat: FinCat) -> ChainCover:
    """Maximal composition chains of a poset category, with pairwise meets."""
    if not is_poset(cat):
        raise NotPoset("chain covers need a poset category")
    leq = {(a, b) for a in cat.objects for b in cat.objects if cat.hom(a, b)}
    covers = {
        (a, b)
        for (a, b) in leq
        if a != b
        and not any(c != a and c != b and (a, c) in leq and (c, b) in leq for c in cat.objects)
    }
    minimal = [o for o in cat.objects if not any((x, o) in covers for x in cat.objects)]
    chains: list[tuple[str, ...]] = []

    def grow(path):
        ups = [b for (a, b) in covers if a == path[-1]]
        if not ups:
            chains.append(tuple(path))
            return
        for b in sorted(ups, key=cat.objects.index):
            grow(path + [b])

    for o in sorted(minimal, key=cat.objects.index):
        grow([o])
    legs = [full_subcategory(cat, list(ch)) for ch in chains]
    intersections = {}
    for i in range(len(chains)):
        for j in range(i + 1, len(chains)):
            common = [o for o in cat.objects if o in chains[i] and o in chains[j]]
            intersections[(i, j)] = full_subcategory(cat, common)
    return ChainCover(legs, intersections)
