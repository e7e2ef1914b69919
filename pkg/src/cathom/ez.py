"""Shuffle and Alexander-Whitney maps between Tot and diagonal chains.

Both maps are built on normalized bases: the shuffle of a bi-nondegenerate
cell is a signed sum of no-common-collapse diagonal cells, and the AW
components are the horizontal front face paired with the vertical back
face.  On normalized complexes AW o shuffle is the identity on the nose;
the other composite is only chain homotopic to it, which shows up in
homology.
"""

from __future__ import annotations

from itertools import combinations

from . import zalg
from .simp import diagonal, identity_surj, is_identity_surj


def shuffle_sign(steps, n):
    """Parity of the (p, q)-shuffle with horizontal steps at the given set."""
    inv = 0
    for u in steps:
        for w in range(1, u):
            if w not in steps:
                inv += 1
    return -1 if inv % 2 else 1


def shuffle_map(X, diag=None, tot=None):
    """Chain map Tot [ZX] -> [Z diag X] by signed shuffles of degeneracies."""
    if diag is None:
        diag = diagonal(X)
    if tot is None:
        tot = zalg.total_complex(X.bichains())
    n_max = min(tot.hi, diag.trunc)
    mats = {}
    for n in range(n_max + 1):
        ent = {}
        labels = tot.labels[n]
        for col, (p, q, idx) in enumerate(labels):
            for steps in combinations(range(1, n + 1), p):
                sset = set(steps)
                sig_h = [0]
                sig_v = [0]
                for t in range(1, n + 1):
                    sig_h.append(sig_h[-1] + (1 if t in sset else 0))
                    sig_v.append(sig_v[-1] + (0 if t in sset else 1))
                lab = (tuple(sig_h), tuple(sig_v), p, q, idx)
                row = diag.index[n][lab]
                key = (row, col)
                ent[key] = ent.get(key, 0) + shuffle_sign(sset, n)
        mats[n] = zalg.SparseIntMatrix(diag.n_cells(n), tot.rank(n), ent)
    return zalg.ChainMap(tot, diag.chains(), mats)


def aw_map(X, diag=None, tot=None):
    """Chain map [Z diag X] -> Tot [ZX]: front face x back face components."""
    if diag is None:
        diag = diagonal(X)
    if tot is None:
        tot = zalg.total_complex(X.bichains())
    n_max = min(tot.hi, diag.trunc)
    offsets = {}
    for n in range(n_max + 1):
        off = {}
        for col, (p, q, idx) in enumerate(tot.labels[n]):
            off.setdefault((p, q), {})[idx] = col
        offsets[n] = off
    mats = {}
    for n in range(n_max + 1):
        ent = {}
        for col in range(diag.n_cells(n)):
            triple = diag.cell_triple(n, col)
            for p in range(n + 1):
                q = n - p
                t = triple
                # drop the last n - p vertices horizontally
                for i in range(n, p, -1):
                    t = X.triple_hface(t, i)
                # drop the first p vertices vertically
                for _ in range(p):
                    t = X.triple_vface(t, 0)
                sh, sv, (p2, q2, idx2) = t
                if p2 == p and q2 == q and is_identity_surj(sh) and is_identity_surj(sv):
                    row = offsets[n][(p, q)].get(idx2)
                    if row is not None:
                        ent[(row, col)] = ent.get((row, col), 0) + 1
        mats[n] = zalg.SparseIntMatrix(tot.rank(n), diag.n_cells(n), ent)
    return zalg.ChainMap(diag.chains(), tot, mats)


def ez_report(X, max_homology_degree=None):
    """Check the shuffle/AW package on one bisimplicial set.

    Verifies both maps are chain maps, AW o shuffle = id on the normalized
    total complex, and shuffle o AW induces the identity on homology up to
    the requested degree.  Returns a dict of booleans plus details.
    """
    diag = diagonal(X)
    tot = zalg.total_complex(X.bichains())
    sh = shuffle_map(X, diag, tot)
    aw = aw_map(X, diag, tot)
    report = {}
    report["shuffle_chain_map"] = sh.validate() == []
    report["aw_chain_map"] = aw.validate() == []
    n_max = min(tot.hi, diag.trunc)
    ok = True
    for n in range(n_max + 1):
        comp = aw.mat(n) * sh.mat(n)
        if comp != zalg.SparseIntMatrix.identity(tot.rank(n)):
            ok = False
            break
    report["aw_shuffle_identity"] = ok
    if max_homology_degree is None:
        max_homology_degree = max(0, min(tot.certified_degrees().stop - 1,
                                         diag.chains().certified_degrees().stop - 1))
    degrees = list(range(max_homology_degree + 1))
    dchains = diag.chains()
    hb = dchains.homology_with_basis(degrees=degrees)
    ok = True
    for n in degrees:
        basis = hb[n]
        for gen in basis.generators():
            image = sh.mat(n).apply(aw.mat(n).apply(gen))
            if basis.classify(image) != basis.classify(gen):
                ok = False
                break
        if not ok:
            break
    report["shuffle_aw_identity_on_homology"] = ok
    report["homology_degrees"] = degrees
    report["tot_equals_diag_homology"] = all(
        _same_group(a, b)
        for a, b in zip(
            (tot.homology(degrees=degrees)[n] for n in degrees),
            (dchains.homology(degrees=degrees)[n] for n in degrees),
        )
    )
    report["ok"] = all(
        report[k] for k in (
            "shuffle_chain_map", "aw_chain_map", "aw_shuffle_identity",
            "shuffle_aw_identity_on_homology", "tot_equals_diag_homology",
        )
    )
    return report


def _same_group(a, b):
    return a.free_rank == b.free_rank and tuple(a.torsion) == tuple(b.torsion)


def external_product(X, Y, trunc_p, trunc_q):
    """Bisimplicial set with (p, q) cells X_p x Y_q (levelwise product)."""
    from .simp import BiSimplicialSet

    cells = {}
    for p in range(trunc_p + 1):
        for q in range(trunc_q + 1):
            cells[(p, q)] = sorted(
                (a, b)
                for a in X.cells.get(p, ())
                for b in Y.cells.get(q, ())
            )
    B = BiSimplicialSet(trunc_p, trunc_q, cells, {}, {},
                        exact_p=X.exact_top, exact_q=Y.exact_top)
    hfaces = {}
    vfaces = {}
    for (p, q), cs in B.cells.items():
        htab = []
        vtab = []
        for (a, b) in cs:
            hrow = []
            for i in range(p + 1):
                if p == 0:
                    break
                sig, m, idx = X.face(p, X.index[p][a], i)
                a2 = X.cells[m][idx]
                hrow.append((sig, identity_surj(q),
                             (m, q, B.index[(m, q)][(a2, b)])))
            htab.append(tuple(hrow))
            vrow = []
            for j in range(q + 1):
                if q == 0:
                    break
                sig, m, idx = Y.face(q, Y.index[q][b], j)
                b2 = Y.cells[m][idx]
                vrow.append((identity_surj(p), sig,
                             (p, m, B.index[(p, m)][(a, b2)])))
            vtab.append(tuple(vrow))
        hfaces[(p, q)] = htab
        vfaces[(p, q)] = vtab
    B.hfaces = hfaces
    B.vfaces = vfaces
    return B
