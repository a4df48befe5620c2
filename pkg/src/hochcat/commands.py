"""Command dispatch shared by the CLI and the HTTP service.

Every command maps one-to-one onto a library operation, consumes named
declarations from a workspace, and produces a report: a header (recording
the sign convention, truncation degree and cover depth used), one
machine-readable record per checked degree, human-readable text lines, and
an exit status (0 verified, 1 property failed, 2 input error).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import bimod as bm
from . import fincat as fc
from . import graded as gr
from . import groth as gt
from . import hochschild as hh
from . import qlinalg as ql
from .workspace import UnknownReference, Workspace, WorkspaceError


@dataclass
class Report:
    command: str
    header: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    text: list = field(default_factory=list)
    exit_code: int = 0

    def record(self, **kw):
        self.records.append(kw)

    def line(self, s: str):
        self.text.append(s)

    def fail(self, code=1):
        self.exit_code = max(self.exit_code, code)


COMMANDS = {}

# exceptions that mean "the asserted property is false", not "bad input"
PROPERTY_ERRORS = (
    gr.CocycleViolated, gr.CompositionIllDefined, gr.AssociativityFailed,
    gr.NotACover, gt.CoherenceFailed, hh.NotACover, hh.CoverCheckFailed,
    hh.Not1Injective, hh.NotSubcartesian, fc.NotThin, fc.ObjectsNotCovered,
    fc.ExtraCrossMorphisms, bm.NotADecomposition, ql.NotAComplex,
)

INPUT_ERRORS = (WorkspaceError, fc.FinCatError, gr.GradedError, bm.BimodError,
                hh.HochschildError, gt.GrothError, ql.DimensionMismatch,
                KeyError, ValueError)


def command(name):
    def deco(fn):
        COMMANDS[name] = fn
        return fn
    return deco


def run(cmd: str, args: dict, ws: Workspace) -> Report:
    """Dispatch a command; domain failures become exit 1, bad input exit 2."""
    if cmd not in COMMANDS:
        rep = Report(cmd)
        rep.line(f"unknown command: {cmd}")
        rep.fail(2)
        return rep
    rep = Report(cmd)
    rep.header = {
        "command": cmd,
        "convention": args.get("convention", hh.STANDARD),
        "max_degree": int(args.get("max_degree", 3)),
        "cover_depth": args.get("cover_depth"),
        "seed": args.get("seed"),
    }
    try:
        COMMANDS[cmd](rep, args, ws)
    except PROPERTY_ERRORS as exc:
        rep.record(check="property", ok=False, error=type(exc).__name__, detail=str(exc))
        rep.line(f"property failed: {exc}")
        rep.fail(1)
    except INPUT_ERRORS as exc:
        rep.record(check="input", ok=False, error=type(exc).__name__, detail=str(exc))
        rep.line(f"input error: {exc}")
        rep.fail(2)
    if any(r.get("ok") is False for r in rep.records):
        rep.fail(1)
    return rep


def _need(ws_table, kind, name):
    if not name or name not in ws_table:
        raise UnknownReference(kind, name)
    return ws_table[name]


def _graded(ws, args, key="cat"):
    return _need(ws.graded_categories, "graded_category", args.get(key))


def _coeff(ws, args, cat):
    name = args.get("coeff")
    if name:
        return _need(ws.bimodules, "bimodule", name)
    return bm.identity_bimodule(cat)


def _report_exactness(rep: Report, er: hh.ExactnessReport):
    rep.header["cover_depth"] = er.cover_depth or rep.header.get("cover_depth")
    for v in er.verdicts:
        rep.record(degree=v.degree, check=v.check, ok=v.ok, detail=v.detail)
    for k, t in er.tables.items():
        rep.record(table=k, value=t)
    rep.line(f"{er.label}: {'exact: yes' if er.ok else 'FAILED'} "
             f"(degrees 0..{er.max_degree})")
    if not er.ok:
        for v in er.verdicts:
            if not v.ok:
                rep.line(f"  degree {v.degree}: {v.check} failed {v.detail}")
        rep.fail(1)


@command("validate")
def cmd_validate(rep, args, ws: Workspace):
    for section, table in [
        ("categories", ws.categories), ("functors", ws.functors),
        ("graded_categories", ws.graded_categories),
        ("graded_functors", ws.graded_functors), ("bifunctors", ws.bifunctors),
        ("bimodules", ws.bimodules), ("pseudofunctors", ws.pseudofunctors),
        ("diagrams", ws.diagrams), ("covers", ws.covers),
        ("descent_data", ws.descent_data), ("decompositions", ws.decompositions),
        ("ideals", ws.ideals), ("subcategories", ws.subcategories),
    ]:
        for name in sorted(table):
            rep.record(section=section, name=name, ok=True)
    rep.line(f"validated {len(rep.records)} declarations")


@command("nerve")
def cmd_nerve(rep, args, ws: Workspace):
    degree = int(args.get("degree", 1))
    if args.get("cat") in ws.graded_categories:
        cat = ws.graded_categories[args["cat"]]
        sharp_cat, _ = cat.sharp_base()
        simplices = fc.nerve(sharp_cat, degree)
    else:
        cat = _need(ws.categories, "category", args.get("cat"))
        simplices = fc.nerve(cat, degree)
    rep.record(degree=degree, count=len(simplices), ok=True)
    for s in simplices:
        rep.record(simplex=list(s) if isinstance(s, tuple) else s)
    rep.line(f"nerve degree {degree}: {len(simplices)} simplices")


@command("cover")
def cmd_cover(rep, args, ws: Workspace):
    legs = _need(ws.covers, "cover", args.get("cover"))
    n = args.get("n", "inf")
    depth = args.get("cover_depth")
    n_parsed = fc.INF if n in ("inf", None) else int(n)
    verdict = gr.is_graded_n_cover(legs, n_parsed, depth=depth)
    rep.header["cover_depth"] = verdict.depth_bound
    rep.record(check="cover", n=str(n), ok=bool(verdict),
               witness=list(verdict.witness) if verdict.witness else None,
               checked_degree=verdict.checked_degree)
    rep.line(f"cover at n={n}: {'yes' if verdict else f'no, witness {verdict.witness}'}")


@command("restrict")
def cmd_restrict(rep, args, ws: Workspace):
    cat = _graded(ws, args)
    functor = _need(ws.functors, "functor", args.get("functor"))
    restricted, comparison = gr.restrict(cat, functor)
    cartesian = gr.is_cartesian(comparison)
    rep.record(check="cartesian-comparison", ok=cartesian)
    rep.record(objects=len(restricted.base.objects),
               spaces=len(restricted.hom),
               total_dim=sum(restricted.dim(k) for k in restricted.hom))
    rep.line(f"restricted to {len(restricted.base.objects)} objects; "
             f"comparison cartesian: {cartesian}")


@command("glue")
def cmd_glue(rep, args, ws: Workspace):
    datum = _need(ws.descent_data, "descent_datum", args.get("descent"))
    result = gr.glue_descent(datum, cover_degree=int(args.get("n", 3)))
    total = sum(result.glued.dim(k) for k in result.glued.hom)
    rep.record(check="glued", ok=True, objects=len(result.glued.base.objects),
               total_dim=total)
    for i, f in enumerate(result.comparisons):
        rep.record(check=f"comparison[{i}]-subcartesian", ok=gr.is_subcartesian(f))
    rep.line(f"glued category with {len(result.glued.base.objects)} objects, "
             f"total hom dimension {total}")


@command("tensor")
def cmd_tensor(rep, args, ws: Workspace):
    left = _need(ws.bimodules, "bimodule", args.get("left"))
    right = _need(ws.bimodules, "bimodule", args.get("right"))
    res = bm.tensor(left, right)
    bm.validate_bimodule(res.bimodule)
    for key in sorted(res.bimodule.basis):
        rep.record(space=list(key), dim=res.bimodule.dim(key))
    total = sum(res.bimodule.dim(k) for k in res.bimodule.basis)
    rep.record(check="tensor-valid", ok=True, total_dim=total)
    rep.line(f"tensor product: total dimension {total}")


@command("hom")
def cmd_hom(rep, args, ws: Workspace):
    left = _need(ws.bimodules, "bimodule", args.get("left"))
    right = _need(ws.bimodules, "bimodule", args.get("right"))
    res = bm.hom_op(left, right) if args.get("op") else bm.hom_bimodules(left, right)
    bm.validate_bimodule(res.bimodule)
    for key in sorted(res.bimodule.basis):
        rep.record(space=list(key), dim=res.bimodule.dim(key))
    total = sum(res.bimodule.dim(k) for k in res.bimodule.basis)
    rep.record(check="hom-valid", ok=True, total_dim=total)
    rep.line(f"hom bimodule: total dimension {total}")


@command("arrow")
def cmd_arrow(rep, args, ws: Workspace):
    m = _need(ws.bimodules, "bimodule", args.get("bimodule"))
    arrow = bm.arrow_category(m)
    total = sum(arrow.category.dim(k) for k in arrow.category.hom)
    rep.record(check="arrow-valid", ok=True,
               objects=len(arrow.category.base.objects), total_dim=total)
    rep.record(check="cross-ideal-thin",
               ok=fc.is_thin_ideal(arrow.base, arrow.cross_ideal.members))
    rep.line(f"arrow category: {len(arrow.category.base.objects)} objects, "
             f"total hom dimension {total}")


@command("recognize-arrow")
def cmd_recognize(rep, args, ws: Workspace):
    cat = _need(ws.categories, "category", args.get("cat"))
    ideal = _need(ws.ideals, "ideal", args.get("ideal"))
    rec = fc.recognize_arrow(cat, ideal)
    rep.record(check="recognized", ok=True,
               lower=sorted(rec.lower.objects), upper=sorted(rec.upper.objects))
    rep.line(f"arrow split: below {sorted(rec.lower.objects)}, "
             f"above {sorted(rec.upper.objects)}")


@command("hh")
def cmd_hh(rep, args, ws: Workspace):
    cat = _graded(ws, args)
    coeff = _coeff(ws, args, cat)
    n = int(args.get("max_degree", 3))
    cx = hh.build_complex(cat, coeff, n, args.get("convention", hh.STANDARD))
    dims = hh.hh_dims(cx)
    rep.record(check="d-squared-zero", ok=True)
    for i, d in enumerate(dims):
        rep.record(degree=i, hh=d, truncated=(i == n))
    shown = " ".join(str(d) for d in dims[:-1]) + f" {dims[-1]}*"
    rep.line(f"HH: {shown}")


@command("sheaf-check")
def cmd_sheaf(rep, args, ws: Workspace):
    legs = _need(ws.covers, "cover", args.get("cover"))
    er = hh.sheaf_check(legs, int(args.get("max_degree", 3)),
                        args.get("convention", hh.STANDARD))
    _report_exactness(rep, er)


@command("mv")
def cmd_mv(rep, args, ws: Workspace):
    n = int(args.get("max_degree", 3))
    conv = args.get("convention", hh.STANDARD)
    if args.get("diagram"):
        p = _need(ws.pseudofunctors, "pseudofunctor", args.get("diagram"))
        er = gt.chain_cover_mv(p, n, conv, two_set=True, depth=args.get("cover_depth"))
    else:
        legs = _need(ws.covers, "cover", args.get("cover"))
        if len(legs) != 2:
            raise ValueError("mayer-vietoris needs exactly two legs")
        er = hh.mayer_vietoris(legs[0], legs[1], n, depth=args.get("cover_depth"),
                               convention=conv)
    _report_exactness(rep, er)


@command("support")
def cmd_support(rep, args, ws: Workspace):
    cat = _graded(ws, args)
    functor = _need(ws.graded_functors, "graded_functor", args.get("functor"))
    coeff = _coeff(ws, args, cat)
    n = int(args.get("max_degree", 3))
    conv = args.get("convention", hh.STANDARD)
    ambient = hh.build_complex(cat, coeff, n, conv)
    supp = hh.support_complex(functor, ambient)
    pulled = bm.restrict_bimodule(functor, coeff)
    piece_cx = hh.build_complex(functor.source, pulled, n, conv)
    rmaps = hh.restriction_chain_map(functor, ambient, piece_cx)
    for i in range(n + 1):
        seq = ql.is_exact_sequence([supp.inclusion[i], rmaps[i]])
        rep.record(degree=i, check="support-sequence-exact", ok=bool(seq),
                   support_dim=supp.dim(i))
    rep.line("support dims: " + " ".join(str(supp.dim(i)) for i in range(n + 1)))
    if any(r.get("ok") is False for r in rep.records):
        rep.fail(1)


@command("localize")
def cmd_localize(rep, args, ws: Workspace):
    cat = _graded(ws, args)
    base_cat, ideal, sub = _need(ws.decompositions, "decomposition",
                                 args.get("decomposition"))
    coeff = _coeff(ws, args, cat)
    er = hh.localization_check(cat, ideal, sub, coeff, int(args.get("max_degree", 3)),
                               args.get("convention", hh.STANDARD))
    _report_exactness(rep, er)


@command("triangle")
def cmd_triangle(rep, args, ws: Workspace):
    m = _need(ws.bimodules, "bimodule", args.get("bimodule"))
    res = hh.connecting_maps(m, int(args.get("max_degree", 3)),
                             args.get("convention", hh.STANDARD))
    _report_exactness(rep, res.report)


@command("censor")
def cmd_censor(rep, args, ws: Workspace):
    cat = _graded(ws, args)
    sub, _ = _need(ws.subcategories, "subcategory", args.get("subcategory"))
    coeff = _coeff(ws, args, cat)
    er = hh.censoring_check(cat, sub, coeff, int(args.get("max_degree", 3)),
                            args.get("convention", hh.STANDARD))
    _report_exactness(rep, er)


@command("groth")
def cmd_groth(rep, args, ws: Workspace):
    p = _need(ws.pseudofunctors, "pseudofunctor", args.get("diagram"))
    res = gt.grothendieck(p)
    n = int(args.get("max_degree", 3))
    cx = hh.build_complex(res.category, None, n, args.get("convention", hh.STANDARD))
    dims = hh.hh_dims(cx)
    rep.record(check="total-category-valid", ok=True,
               objects=len(res.category.base.objects),
               morphisms=len(res.category.base.morphisms))
    for i, d in enumerate(dims):
        rep.record(degree=i, hh=d, truncated=(i == n))
    rep.line(f"total category: {len(res.category.base.objects)} objects; "
             "HH: " + " ".join(str(d) for d in dims[:-1]) + f" {dims[-1]}*")


@command("base-change")
def cmd_base_change(rep, args, ws: Workspace):
    p = _need(ws.pseudofunctors, "pseudofunctor", args.get("diagram"))
    functor = _need(ws.functors, "functor", args.get("functor"))
    bc = gt.base_change(p, functor)
    rep.record(check="comparison-cartesian", ok=gr.is_cartesian(bc.comparison))
    base_injective = len(set(functor.mor_map.values())) == len(functor.mor_map)
    if base_injective:
        sf = bc.comparison.base_functor
        inj = len(set(sf.mor_map.values())) == len(sf.mor_map)
        rep.record(check="injectivity-propagates", ok=inj)
    rep.line(f"base change: {len(bc.total.category.base.objects)} objects; "
             f"comparison cartesian: {rep.records[0]['ok']}")


@command("cstar")
def cmd_cstar(rep, args, ws: Workspace):
    p = _need(ws.pseudofunctors, "pseudofunctor", args.get("diagram"))
    anchors = args.get("anchors") or []
    if isinstance(anchors, str):
        anchors = [a for a in anchors.split(",") if a]
    er = gt.cstar_diagram(p, anchors, int(args.get("max_degree", 3)),
                          args.get("convention", hh.STANDARD))
    _report_exactness(rep, er)


@command("chain-mv")
def cmd_chain_mv(rep, args, ws: Workspace):
    p = _need(ws.pseudofunctors, "pseudofunctor", args.get("diagram"))
    er = gt.chain_cover_mv(p, int(args.get("max_degree", 3)),
                           args.get("convention", hh.STANDARD),
                           two_set=bool(args.get("two_set")),
                           depth=args.get("cover_depth"))
    _report_exactness(rep, er)


@command("compare")
def cmd_compare(rep, args, ws: Workspace):
    fd = _need(ws.diagrams, "diagram", args.get("diagram"))
    er = gt.comparison_check(fd, int(args.get("max_degree", 3)),
                             args.get("convention", hh.STANDARD))
    _report_exactness(rep, er)
