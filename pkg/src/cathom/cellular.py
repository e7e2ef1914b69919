"""Homology consequences of cellular functors.

A cellular inclusion T : C -> D stratifies D, and the square

    (D-C) int F_T --p--> C
        |eps                |T
    (D-C) ----------------> D

commutes up to the canonical natural transformation whose component at
[T(c) -> d] is that very arrow.  Correcting by the prism homotopy makes
the square's double mapping cylinder map to chains of N(D); the square is
homology-cocartesian exactly when that map is a quasi-isomorphism.  The
same correction gives an explicit comparison between the cone of
C_*(C) -> C_*(D) and the shifted reduced complex over D - C, which is the
long exact sequence delivered below.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import zalg
from .fincat import (CatFunctor, CatValuedDiagram, NatTransformation,
                     complement_subcategory, grothendieck, is_cellular,
                     slice_fiber, slice_diagram)
from .simp import (diagonal, diagonal_collapse_map, nerve, nerve_coeff_cat,
                   nerve_map, prism_homotopy, thomason_map)


def homotopy_pushout_map(f, g, u, v, homotopy):
    """Map from the double mapping cylinder of B <-f- A -g-> B' into X.

    f : A -> B, g : A -> B', u : B -> X, v : B' -> X chain maps, with
    homotopy h satisfying dh + hd = v g - u f.  Returns (cylinder, Phi)
    where Phi is a chain map; the square is homology-cocartesian iff Phi
    is a quasi-isomorphism.
    """
    A, B = f.source, f.target
    Bp, X = g.target, u.target
    lo = min(A.lo + 1, B.lo, Bp.lo)
    caps = []
    if not A.exact_top:
        caps.append(A.hi + 1)
    if not B.exact_top:
        caps.append(B.hi)
    if not Bp.exact_top:
        caps.append(Bp.hi)
    hi = min(caps) if caps else max(A.hi + 1, B.hi, Bp.hi)
    exact_top = A.exact_top and B.exact_top and Bp.exact_top
    ranks = {}
    for n in range(lo, hi + 1):
        ranks[n] = B.rank(n) + Bp.rank(n) + A.rank(n - 1)
    bounds = {}
    for n in range(lo + 1, hi + 1):
        rB, rBp = B.rank(n), Bp.rank(n)
        rB1, rBp1 = B.rank(n - 1), Bp.rank(n - 1)
        ent = {}
        for (i, j), val in B.boundary(n).entries.items():
            ent[(i, j)] = val
        for (i, j), val in Bp.boundary(n).entries.items():
            ent[(rB1 + i, rBp + j)] = val
        for (i, j), val in A.boundary(n - 1).entries.items():
            ent[(rB1 + rBp1 + i, rB + rBp + j)] = -val
        for (i, j), val in f.mat(n - 1).entries.items():
            key = (i, rB + rBp + j)
            ent[key] = ent.get(key, 0) + val
        for (i, j), val in g.mat(n - 1).entries.items():
            key = (rB1 + i, rB + rBp + j)
            ent[key] = ent.get(key, 0) - val
        bounds[n] = zalg.SparseIntMatrix(ranks.get(n - 1, 0), ranks[n], ent)
    cyl = zalg.ChainComplex(ranks, bounds, exact_top=exact_top)
    phi_mats = {}
    for n in range(lo, hi + 1):
        rB, rBp = B.rank(n), Bp.rank(n)
        ent = {}
        for (i, j), val in u.mat(n).entries.items():
            ent[(i, j)] = val
        for (i, j), val in v.mat(n).entries.items():
            key = (i, rB + j)
            ent[key] = ent.get(key, 0) + val
        h = homotopy.get(n - 1)
        if h is not None:
            for (i, j), val in h.entries.items():
                key = (i, rB + rBp + j)
                ent[key] = ent.get(key, 0) - val
        phi_mats[n] = zalg.SparseIntMatrix(X.rank(n), ranks[n], ent)
    phi = zalg.ChainMap(cyl, X, phi_mats)
    return cyl, phi


@dataclass
class SquareReport:
    """Outcome of a homology-cocartesian check."""

    ok: bool
    cone_homology: dict
    details: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def mayer_vietoris_report(f, g, u, v, homotopy, degrees=None):
    """Is the (naturally commutative) square homology-cocartesian?

    Equivalent to exactness of the Mayer-Vietoris sequence: the corrected
    cylinder map must be a quasi-isomorphism, i.e. its cone acyclic.
    """
    cyl, phi = homotopy_pushout_map(f, g, u, v, homotopy)
    errs = phi.validate()
    if errs:
        return SquareReport(False, {}, ["cylinder map is not a chain map"] + errs)
    cone = zalg.mapping_cone(phi)
    if degrees is None:
        degrees = list(cone.certified_degrees())
    else:
        degrees = [n for n in degrees if n in cone.certified_degrees()]
    hom = cone.homology(degrees=degrees)
    ok = all(g_.free_rank == 0 and not g_.torsion for g_ in hom.values())
    details = [] if ok else [
        f"cone has H_{n} = {g_.group()}" for n, g_ in hom.items()
        if g_.free_rank or g_.torsion
    ]
    return SquareReport(ok, hom, details)


# ---------------------------------------------------------------------------
# the stratification square of a cellular inclusion


@dataclass
class StratificationData:
    """Everything attached to the complement stratum of a cellular T."""

    functor: object
    complement: object            # the full subcategory D - C
    complement_incl: object
    diagram: CatValuedDiagram     # d |-> T | d, restricted to D - C
    total: object                 # (D-C) int F_T
    p_functor: object             # total -> C
    eps_functor: object           # total -> D - C (augmentation)
    transformation: NatTransformation  # T o p => iota o eps


def stratification(T):
    """Restrict the slice diagram of T to the complement of its image."""
    cell = is_cellular(T)
    if not cell:
        raise ValueError(f"functor is not cellular: {cell.witness}")
    C, D = T.src, T.dst
    comp, incl = complement_subcategory(T)
    sd = slice_diagram(T)
    fibers = [sd.diagram.fibers[incl.obj_map[o]] for o in comp.objects]
    transports = []
    for m in comp.morphisms:
        t = sd.diagram.transports[incl.mor_map[m]]
        transports.append(CatFunctor(fibers[comp.mor_src[m]],
                                     fibers[comp.mor_dst[m]],
                                     t.obj_map, t.mor_map))
    diagram = CatValuedDiagram(comp, fibers, transports)
    groth = grothendieck(diagram)
    total = groth.category
    # p : (d, (c, phi)) |-> c ;  morphism (f, x, g) |-> the C-arrow inside g
    p_obj = []
    for (o, x) in total.obj_labels:
        c, phi = fibers[o].obj_labels[x]
        p_obj.append(c)
    p_mor = []
    for (f, x, g) in total.mor_labels:
        b = comp.mor_dst[f]
        _, _, u = fibers[b].mor_labels[g]
        p_mor.append(u)
    p = CatFunctor(total, C, p_obj, p_mor)
    eps = groth.augmentation
    # natural transformation T o p => iota o eps with component phi
    comps = []
    for (o, x) in total.obj_labels:
        c, phi = fibers[o].obj_labels[x]
        comps.append(phi)
    eta = NatTransformation(p.then(T), eps.then(incl), comps)
    return StratificationData(T, comp, incl, diagram, total, p, eps, eta)


def stratification_square_report(T, trunc, degrees=None):
    """Mayer-Vietoris exactness of the stratification square of T."""
    data = stratification(T)
    C, D = T.src, T.dst
    NA = nerve(data.total, trunc)
    NB = nerve(C, trunc)
    NBp = nerve(data.complement, trunc)
    NX = nerve(D, trunc + 1)
    f = nerve_map(data.p_functor, NA, NB).chain_map()
    g = nerve_map(data.eps_functor, NA, NBp).chain_map()
    u = nerve_map(T, NB, NX).chain_map()
    v = nerve_map(data.complement_incl, NBp, NX).chain_map()
    h_mats, _, _, _, _ = prism_homotopy(data.transformation, trunc, X=NA, Y=NX)
    return mayer_vietoris_report(f, g, u, v, h_mats, degrees=degrees)


# ---------------------------------------------------------------------------
# the long exact sequence of a cellular functor


@dataclass
class CellularLES:
    """Long exact homology sequence of a cellular inclusion.

    groups are keyed ("stratum", i), ("sub", i) and ("ambient", i); the
    sequence runs ... -> stratum_i -> sub_i -> ambient_i -> stratum_{i-1}
    -> ... and exactness is checked at every interior node.  comparison_ok
    records that the explicit map from the shifted reduced stratum complex
    to the cone of the inclusion is a quasi-isomorphism.
    """

    window: list
    groups: dict
    homs: list
    exactness: zalg.ExactnessReport
    comparison_ok: bool
    details: list = field(default_factory=list)

    @property
    def ok(self):
        return bool(self.exactness) and self.comparison_ok

    def __bool__(self):
        return self.ok


def cellular_les(T, trunc):
    """Build and verify the long exact sequence attached to a cellular T.

    The reduced-coefficient groups over the complement are computed from
    the diagonal of the bisimplicial nerve; the comparison with
    cone(C_*(C) -> C_*(D)) goes through the Thomason map, the projection
    to C, and the prism homotopy of the canonical transformation.
    """
    data = stratification(T)
    C, D = T.src, T.dst
    comp = data.complement

    # A = chains of diag N(D-C, F_T) with its collapse e to chains of N(D-C)
    X = nerve_coeff_cat(data.diagram, trunc, trunc)
    diag = diagonal(X)
    comp_nerve = nerve(comp, trunc)
    e = diagonal_collapse_map(data.diagram, diag, comp_nerve).chain_map()

    # Phi = p o theta : A -> chains of N(C)
    theta, _, groth, total_nerve = thomason_map(
        data.diagram, trunc, target=None)
    C_nerve = nerve(C, trunc)
    p_map = nerve_map(data.p_functor, total_nerve, C_nerve).chain_map()
    theta_c = theta.chain_map()
    phi_mats = {n: p_map.mat(n) * theta_c.mat(n) for n in range(trunc + 1)}

    # homotopy between T o Phi and iota o e, through the prism of eta
    D_nerve = nerve(D, trunc + 1)
    h0, _, _, _, _ = prism_homotopy(data.transformation, trunc,
                                    X=total_nerve, Y=D_nerve)
    h_mats = {n: h0[n] * theta_c.mat(n) for n in range(trunc + 1)}

    A = diag.chains()
    CC = C_nerve.chains()
    CD = nerve(D, trunc).chains()
    Acomp = comp_nerve.chains()
    T_map = nerve_map(T, C_nerve, nerve(D, trunc)).chain_map()
    iota = nerve_map(data.complement_incl, comp_nerve, nerve(D, trunc)).chain_map()

    cone_e = zalg.mapping_cone(zalg.ChainMap(A, Acomp, {
        n: e.mat(n) for n in range(trunc + 1)}))
    cone_T, incl_T, proj_T = zalg.mapping_cone(T_map, with_maps=True)

    # chi : cone(e) -> cone(T)  given by (a, a') |-> (Phi a, iota a' - h a)
    chi_mats = {}
    for n in range(cone_e.lo, min(cone_e.hi, cone_T.hi) + 1):
        rA = A.rank(n - 1)
        ent = {}
        for (i, j), val in phi_mats.get(n - 1, zalg.SparseIntMatrix(0, 0)).entries.items():
            ent[(i, j)] = val
        off_r = CC.rank(n - 1)
        for (i, j), val in iota.mat(n).entries.items():
            ent[(off_r + i, rA + j)] = val
        h = h_mats.get(n - 1)
        if h is not None:
            for (i, j), val in h.entries.items():
                key = (off_r + i, j)
                ent[key] = ent.get(key, 0) - val
        chi_mats[n] = zalg.SparseIntMatrix(cone_T.rank(n), cone_e.rank(n), ent)
    chi = zalg.ChainMap(cone_e, cone_T, chi_mats)
    details = []
    errs = chi.validate()
    if errs:
        details.extend(f"comparison map: {m}" for m in errs)
    chi_cone = zalg.mapping_cone(chi)
    window = [n for n in chi_cone.certified_degrees() if n >= 0]
    acyclic = all(
        g.free_rank == 0 and not g.torsion
        for g in chi_cone.homology(degrees=window).values()
    )
    comparison_ok = not errs and acyclic
    if not acyclic:
        details.append("comparison map is not a quasi-isomorphism")

    # assemble the long exact sequence with explicit maps
    les_degrees = [n for n in range(trunc - 1)
                   if n in CC.certified_degrees()
                   and n in CD.certified_degrees()
                   and (n + 1) in cone_e.certified_degrees()
                   and (n + 1) in cone_T.certified_degrees()]
    hb_cone_e = cone_e.homology_with_basis(
        degrees=[n + 1 for n in les_degrees] + [n for n in les_degrees
                                                if n in cone_e.certified_degrees()])
    hb_C = CC.homology_with_basis(degrees=les_degrees)
    hb_D = CD.homology_with_basis(degrees=les_degrees)
    hb_cone_T = cone_T.homology_with_basis(
        degrees=sorted({n + 1 for n in les_degrees} | set(les_degrees)))

    groups = {}
    for n in les_degrees:
        groups[("stratum", n)] = hb_cone_e[n + 1].group
        groups[("sub", n)] = hb_C[n].group
        groups[("ambient", n)] = hb_D[n].group

    chi_iso = {}
    for n in sorted({m + 1 for m in les_degrees}):
        chi_iso[n] = zalg.induced_map(chi, hb_cone_e[n], hb_cone_T[n])
        if not chi_iso[n].is_isomorphism():
            comparison_ok = False
            details.append(f"comparison not iso on H_{n}")

    homs = []
    ordered = sorted(les_degrees, reverse=True)
    for n in ordered:
        # stratum_n -> sub_n : project the cone of T after transporting
        proj_hom = _cone_projection_hom(cone_T, hb_cone_T[n + 1], hb_C[n],
                                        proj_T)
        homs.append(proj_hom.compose(chi_iso[n + 1]))
        # sub_n -> ambient_n
        homs.append(zalg.induced_map(T_map, hb_C[n], hb_D[n]))
        # ambient_n -> stratum_{n-1}
        if n - 1 in les_degrees:
            incl_hom = zalg.induced_map(incl_T, hb_D[n], hb_cone_T[n])
            homs.append(chi_iso[n].inverse().compose(incl_hom))
    exact = zalg.check_exact(homs)
    return CellularLES([min(les_degrees, default=0), max(les_degrees, default=0)],
                       groups, homs, exact, comparison_ok, details)


def _cone_projection_hom(cone, cone_basis, target_basis, proj):
    """Induced map H_{n+1}(cone f) -> H_n(source f) from the projection."""
    n1 = cone_basis.degree
    cols = []
    for gen in cone_basis.generators():
        vec = proj.mat(n1).apply(gen)
        cols.append(list(target_basis.classify(vec)))
    mat = [[cols[j][i] for j in range(len(cols))]
           for i in range(target_basis.group.ngens)]
    return zalg.GroupHom(cone_basis.group, target_basis.group, mat)
