r'''The velocity fan: ray generators, cones, and the Gamma isomorphism.

Points of R^m are written in the block convention

    v = (v^1_1, ..., v^1_{t_1}, ..., v^n_1, ..., v^n_{t_n}),

one block per tree level, with v^k_i attached to the gap between the i-th and
(i+1)-st depth-k vertices.  A collision C determines an integer ray generator
rho(C) whose (k, i) entry compares the positions of the two gap endpoints in
the contracted tree; a bracketing B spans the cone tau(B) generated by the
rays of the collisions below it together with the lineality line R*1.

Gamma maps a metric n-bracketing to sum(lambda_i * rho(C_i)); its inverse is
computed by locating the simplicial cone of the triangulated fan containing
the input (every maximal nested collection of collisions gives a unimodular
basis, so integer vectors decompose with integer coefficients).

All certified geometry is exact.  numpy is used only for batched integer
matrix arithmetic; float determinants merely propose kernel vectors, which
are verified (and if needed recomputed) exactly.
'''

import random
from fractions import Fraction
from functools import cached_property
from itertools import combinations

import numpy as np

from . import linalg
from .bracketing import (DEFAULT_MAX_M, Bracketing, BracketingPoset,
                         bracket_contains, bracket_level,
                         enumerate_bracketings,
                         is_nontrivial, is_singleton, truncate_bracket,
                         truncate_bracketing)
from .collision import (adjacent, contained, containment_minimal_in,
                        enumerate_collisions, truncate_collision)
from .metric import MetricBracketing, combine, decompose_nested


def ones(m):
    return (1,) * m


def level_offset(tree, k):
    '''Flat index of coordinate (k, 1) in the block layout.'''
    return sum(tree.profile[:k - 1])


def delta(tree, v, k, j, kk):
    '''The partial sum Delta^k_{j,kk}(v) = v^k_j + ... + v^k_{kk-1}.'''
    assert 1 <= j < kk <= tree.profile[k - 1] + 1
    o = level_offset(tree, k)
    return sum(v[o + j - 1:o + kk - 1])


def ray_generator(c):
    '''The integer ray generator rho(C) of a collision.

    Entry (k, i) is d(psi(u^k_i)) - d(psi(u^k_{i+1})) + 1 where d is the
    1-based position of a vertex within its level of the contracted tree.
    '''
    tree = c.tree
    qtree, psi = c.tree_map
    pos = qtree.index
    out = []
    for k in range(1, tree.depth + 1):
        lvl = tree.levels[k]
        for i in range(len(lvl) - 1):
            out.append(pos[psi[lvl[i]]] - pos[psi[lvl[i + 1]]] + 1)
    return tuple(out)


def gamma(mb, collisions=None):
    '''Gamma(l_B) = lambda_0 * 1 + sum(lambda_i * rho(C_i)) over the nested
    decomposition of the metric bracketing.'''
    tree = mb.tree
    lam0, terms = decompose_nested(mb, collisions)
    vec = [Fraction(lam0)] * tree.m
    for t, c in terms:
        for i, x in enumerate(ray_generator(c)):
            vec[i] += t * x
    return tuple(vec)


# -- the triangulating facets -------------------------------------------------

def _maximal_cliques(adj):
    '''Bron-Kerbosch with pivoting; adj is a list of neighbor index sets.'''
    out = []

    def expand(r, p, x):
        if not p and not x:
            out.append(frozenset(r))
            return
        pivot = max(p | x, key=lambda u: len(adj[u] & p))
        for u in sorted(p - adj[pivot]):
            expand(r | {u}, p & adj[u], x & adj[u])
            p = p - {u}
            x = x | {u}

    expand(set(), set(range(len(adj))), set())
    return out


def nested_facets(tree, collisions=None):
    '''All maximal nested collections of collisions, as sorted index tuples.

    Each collection has exactly m - 1 members and its rays together with 1
    form a unimodular basis of Z^m; these are the maximal cones of the
    triangulated velocity fan.
    '''
    if collisions is None:
        collisions = enumerate_collisions(tree)
    adj = [set() for _ in collisions]
    for i, j in combinations(range(len(collisions)), 2):
        if adjacent(collisions[i], collisions[j]):
            adj[i].add(j)
            adj[j].add(i)
    facets = sorted(tuple(sorted(clq)) for clq in _maximal_cliques(adj))
    assert all(len(f) == tree.m - 1 for f in facets), \
        'maximal nested collections must have m - 1 members'
    return facets


_INVERSE_CACHE = {}


def _inverse_data(tree):
    '''Per-tree data for gamma_inverse: collisions, facets, and the exact
    integer inverses of the facet basis matrices.'''
    if tree in _INVERSE_CACHE:
        return _INVERSE_CACHE[tree]
    m = tree.m
    collisions = enumerate_collisions(tree)
    rays = [ray_generator(c) for c in collisions]
    facets = nested_facets(tree, collisions)
    mats, invs = [], []
    for facet in facets:
        cols = [rays[ci] for ci in facet] + [ones(m)]
        mat = [[cols[j][i] for j in range(m)] for i in range(m)]
        assert abs(linalg.det(mat)) == 1, 'facet bases must be unimodular'
        inv = linalg.inverse(mat)
        invs.append([[int(x) for x in row] for row in inv])
        mats.append(mat)
    data = {
        'collisions': collisions,
        'rays': rays,
        'facets': facets,
        'mats': mats,
        'invs': invs,
        'np_invs': np.array(invs, dtype=np.int64).reshape(len(facets), m, m),
        'np_mats': np.array(mats, dtype=np.int64).reshape(len(facets), m, m),
    }
    _INVERSE_CACHE[tree] = data
    return data


def gamma_inverse(tree, v):
    '''The metric n-bracketing l with Gamma(l) = v, for any rational v.

    Scans the simplicial facets in canonical order and returns the conical
    combination from the first facet whose coefficients are nonnegative (the
    minimal-term coefficient is unconstrained); completeness of the fan
    guarantees a hit.
    '''
    data = _inverse_data(tree)
    m = tree.m
    vf = [Fraction(x) for x in v]
    assert len(vf) == m
    for inv, facet in zip(data['invs'], data['facets']):
        lam = linalg.mat_vec(inv, vf)
        if all(x >= 0 for x in lam[:-1]):
            terms = [(lam[i], data['collisions'][ci])
                     for i, ci in enumerate(facet)]
            return combine(tree, terms, minimal_coeff=lam[-1])
    raise AssertionError('the velocity fan is complete; no facet matched')


def gamma_inverse_batch(tree, vecs):
    '''Vectorized gamma_inverse over an (N, m) integer array.

    Returns (facet_ids, lam) where lam[i] holds the integer coefficients of
    vecs[i] in facet facet_ids[i] (last column: the minimal term).  Exact:
    the inverses are integer matrices and everything stays in int64.
    '''
    data = _inverse_data(tree)
    m = tree.m
    V = np.asarray(vecs, dtype=np.int64)
    assert V.ndim == 2 and V.shape[1] == m
    lam_all = np.einsum('fij,nj->fni', data['np_invs'], V)
    feasible = (lam_all[:, :, :m - 1] >= 0).all(axis=2)
    assert feasible.any(axis=0).all(), 'every vector must land in some facet'
    fid = feasible.argmax(axis=0)
    lam = lam_all[fid, np.arange(V.shape[0]), :]
    rebuilt = np.einsum('nij,nj->ni', data['np_mats'][fid], lam)
    assert (rebuilt == V).all()
    return fid, lam


def metric_from_facet(tree, fid, lam):
    '''Materialize the metric bracketing for one row of gamma_inverse_batch.'''
    data = _inverse_data(tree)
    facet = data['facets'][fid]
    terms = [(Fraction(int(lam[i])), data['collisions'][ci])
             for i, ci in enumerate(facet)]
    return combine(tree, terms, minimal_coeff=Fraction(int(lam[-1])))


# -- the selector set Xi ------------------------------------------------------

def xi(tree, v):
    '''The set of collisions selected by a vector.

    A type 1 collision is selected when its window coordinates form a
    constant plateau strictly above the accumulated depth-(n-1) weight of its
    projected bracket, and the plateau cannot be extended within the same
    parent fiber without dipping.  Any other collision is selected when no
    selected type 1 collision maps into it, its truncation is
    containment-minimal for the truncated vector, and its ray reproduces the
    sign pattern of the depth-n gap sums against the accumulated weights.
    These are exactly the containment-minimal collisions of the bracketing
    carrying gamma_inverse(v).
    '''
    n = tree.depth
    m = tree.m
    vf = [Fraction(x) for x in v]
    collisions = enumerate_collisions(tree)
    ptree = tree.truncate()
    tn = tree.profile[-1]
    o = m - tn
    if ptree.m:
        ell = gamma_inverse(ptree, vf[:o])
        top_brackets = ell.bracketing.by_level.get(n - 1, [])

        def gamma_ell(X):
            return sum((ell.weight(A) for A in top_brackets
                        if bracket_contains(X, A)), Fraction(0))
    else:
        # All depth-n vertices share one parent, so every collision is a
        # plain window and some gap stays outside all of them: the
        # accumulated weight over the root is the minimal coordinate.
        ell = MetricBracketing(Bracketing.minimal(ptree), {})
        base = min(vf)

        def gamma_ell(X):
            return base

    def vc(h):
        return vf[o + h - 1]

    xi1 = []
    for c in collisions:
        if c.type_tag != 1:
            continue
        (A,) = c.nontrivial_brackets
        tops = sorted(A[-1])
        a, b = tree.index[tops[0]], tree.index[tops[-1]]
        w = vc(a)
        if any(vc(h) != w for h in range(a + 1, b)):
            continue
        if not w > gamma_ell(truncate_bracket(A)):
            continue
        ptop = A[-2]
        if a > 1 and tree.vertex(n, a - 1)[:-1] in ptop and not vc(a - 1) < w:
            continue
        if b <= tn and tree.vertex(n, b + 1)[:-1] in ptop and not vc(b) < w:
            continue
        xi1.append(c)

    out = list(xi1)
    for c in collisions:
        if c.type_tag == 1:
            continue
        if any(contained(c1, c) for c1 in xi1):
            continue
        bb = c.bracketing
        deep = [B for B in bb.by_level.get(n, ()) if is_nontrivial(tree, B)]
        pc = truncate_collision(c)
        if pc is None:
            # The truncation of c is the minimal bracketing, so the lower
            # levels of its deep brackets are maxima.  A nontrivial bracket
            # of ell whose top covers the ancestry of one of these windows
            # lifts to a strictly smaller bracket inside it, breaking
            # containment-minimality without disturbing the window tests.
            if any(bracket_level(Ap) <= n - 1
                   and any({u[:bracket_level(Ap)] for u in B[-1]} <= Ap[-1]
                           for B in deep)
                   for Ap in ell.bracketing.nontrivial_brackets()):
                continue
        elif not (pc.bracketing.leq(ell.bracketing)
                  and containment_minimal_in(pc, ell.bracketing)):
            continue
        # The windows of c are interrogated bracket by bracket: the gap sums
        # of v over each window must reproduce the fission pattern and height
        # order of the deepest-level brackets exactly.
        tests = {truncate_bracket(B) for B in deep}
        ok = True
        for A in sorted(tests):
            g = gamma_ell(A)
            over = [B for B in bb.brackets_over(A)
                    if is_nontrivial(tree, B)]
            idxs = [tree.index[u] for u in tree.levels[n] if u[:-1] in A[-1]]
            for j, k in combinations(idxs, 2):
                d = sum(vc(h) for h in range(j, k)) - g * (k - j)
                uj, uk = tree.vertex(n, j), tree.vertex(n, k)
                if d == 0:
                    good = any(uj in B[-1] and uk in B[-1] for B in over)
                else:
                    hi, lo = (uj, uk) if d > 0 else (uk, uj)
                    good = any(hi in B1[-1] and lo in B2[-1]
                               and bb.comparable(B1, B2)
                               and bb.below(B2, B1)
                               for B1 in over for B2 in over if B1 != B2)
                if not good:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(c)
    return sorted(out, key=lambda c: c.key)


# -- cones and fans -----------------------------------------------------------

def _idot(u, v):
    return sum(a * b for a, b in zip(u, v))


class Cone:
    '''A rational cone spanned by integer rays plus the lineality line R*1.

    The H-description is brute-forced on demand: equalities are a basis of
    the orthogonal complement of the span, and every (dim-2)-subset of rays
    is tested as the spine of a supporting facet hyperplane.
    '''

    def __init__(self, ambient_dim, rays, bracketing=None, ray_indices=None):
        self.ambient_dim = ambient_dim
        self.rays = tuple(tuple(int(x) for x in r) for r in rays)
        self.bracketing = bracketing
        self.ray_indices = ray_indices

    @cached_property
    def dim(self):
        return linalg.rank([list(r) for r in self.rays]
                           + [[1] * self.ambient_dim])

    @cached_property
    def equalities(self):
        span = [list(r) for r in self.rays] + [[1] * self.ambient_dim]
        basis = linalg.nullspace(span, ncols=self.ambient_dim)
        return tuple(sorted(tuple(linalg.primitive(e)) for e in basis))

    @cached_property
    def facets(self):
        m = self.ambient_dim
        s = self.dim - 2
        if s < 0:
            return ()
        normals = set()
        fixed = [[1] * m] + [list(e) for e in self.equalities]
        for T in combinations(sorted(set(self.rays)), s):
            ns = linalg.nullspace([list(r) for r in T] + fixed, ncols=m)
            if len(ns) != 1:
                continue
            a = tuple(linalg.primitive(ns[0]))
            vals = [_idot(a, r) for r in self.rays]
            if all(x >= 0 for x in vals) and any(x > 0 for x in vals):
                normals.add(a)
            elif all(x <= 0 for x in vals) and any(x < 0 for x in vals):
                normals.add(tuple(-x for x in a))
        return tuple(sorted(normals))

    def contains(self, v):
        return (all(_idot(e, v) == 0 for e in self.equalities)
                and all(_idot(a, v) >= 0 for a in self.facets))

    def relint_contains(self, v):
        return (all(_idot(e, v) == 0 for e in self.equalities)
                and all(_idot(a, v) > 0 for a in self.facets))

    def __repr__(self):
        return f'Cone(dim={self.dim}, rays={len(self.rays)})'


class Fan:
    '''The velocity fan of a tree: one cone per n-bracketing.'''

    def __init__(self, tree, max_m=DEFAULT_MAX_M):
        assert not tree.is_path(), 'velocity fans live over non-path trees'
        if tree.m > max_m:
            raise ValueError(f'tree has m={tree.m} > {max_m}; '
                             'refusing to enumerate')
        self.tree = tree
        self.m = tree.m
        self.collisions = enumerate_collisions(tree)
        self.rays = tuple(ray_generator(c) for c in self.collisions)
        self.poset = enumerate_bracketings(tree)
        self.cones = []
        for b in self.poset.elements:
            idxs = tuple(i for i, c in enumerate(self.collisions)
                         if c.bracketing.leq(b))
            self.cones.append(Cone(self.m,
                                   tuple(self.rays[i] for i in idxs),
                                   bracketing=b, ray_indices=idxs))
        for b, cone in zip(self.poset.elements, self.cones):
            assert cone.dim == self.poset.rank(b) + 1

    @property
    def chambers(self):
        return [c for c in self.cones if c.dim == self.m]

    def cone_of(self, b):
        return self.cones[self.poset.index[b]]

    def __repr__(self):
        return (f'Fan(m={self.m}, rays={len(self.rays)}, '
                f'cones={len(self.cones)})')


def build_fan(tree, max_m=DEFAULT_MAX_M):
    return Fan(tree, max_m=max_m)


# -- fan verification ---------------------------------------------------------

def _np_kernel_vectors(mats):
    '''Primitive integer kernel vectors of a stack of (m-1) x m integer
    matrices; rows of dependent matrices come back zero.  Float determinants
    propose, exact integer residuals dispose (with a rational fallback).'''
    B, r, m = mats.shape
    assert r == m - 1
    out = np.zeros((B, m), dtype=np.int64)
    fl = mats.astype(np.float64)
    for i in range(m):
        cols = [j for j in range(m) if j != i]
        dets = np.linalg.det(fl[:, :, cols]) if m > 1 else np.ones(B)
        assert np.abs(dets).max(initial=0.0) < 2.0 ** 52
        out[:, i] = ((-1) ** i) * np.rint(dets).astype(np.int64)
    bad = (np.einsum('brm,bm->br', mats, out) != 0).any(axis=1)
    for idx in np.nonzero(bad)[0]:
        ns = linalg.nullspace([list(map(int, row)) for row in mats[idx]],
                              ncols=m)
        out[idx] = (np.array(linalg.primitive(ns[0]), dtype=np.int64)
                    if len(ns) == 1 else 0)
    g = np.gcd.reduce(np.abs(out), axis=1)
    g[g == 0] = 1
    return out // g[:, None]


def _intersection_extremes(c1, c2):
    '''Extreme rays (modulo the lineality line) of the intersection of two
    cones, as primitive integer vectors orthogonal to 1.'''
    m = c1.ambient_dim
    pool = sorted(set(c1.equalities) | set(c2.equalities))
    pool.append(ones(m))
    ineqs = sorted(set(c1.facets) | set(c2.facets))
    eqs, base = [], []
    for e in pool:
        if linalg.rank(base + [list(e)]) > len(base):
            eqs.append(e)
            base.append(list(e))
    base_rank = len(base)
    s = m - 1 - base_rank
    if s < 0 or len(ineqs) < s:
        return []
    eq_arr = np.array(base, dtype=np.int64).reshape(len(eqs), m)
    in_arr = np.array(ineqs, dtype=np.int64).reshape(len(ineqs), m)
    combos = list(combinations(range(len(ineqs)), s))
    stacked = np.concatenate(
        [in_arr[np.array(combos, dtype=np.intp).reshape(len(combos), s)],
         np.broadcast_to(eq_arr, (len(combos),) + eq_arr.shape)], axis=1)
    # keep only independent row systems of corank 1
    keep = [i for i, rows in enumerate(stacked)
            if np.linalg.matrix_rank(rows.astype(np.float64)) == m - 1]
    if not keep:
        return []
    cands = _np_kernel_vectors(stacked[keep])
    out = set()
    for r in cands:
        if not r.any():
            continue
        vals = in_arr @ r
        if (vals >= 0).all():
            out.add(tuple(int(x) for x in r))
        elif (vals <= 0).all():
            out.add(tuple(-int(x) for x in r))
    return sorted(out)


def verify_fan(fan, samples=1000, seed=0):
    '''Certify the fan axioms; returns a certificate dictionary.

    Checks, in order: (a) the intersection of every pair of cones equals the
    cone of the meet bracketing, by exact H/V cross-check; (b) every
    codimension-1 cone bounds exactly two chambers; (c) seeded integer
    sample points all lie in at least one chamber and in the relative
    interior of exactly one cone.  Stops at the first failure and records
    the offending pair, wall, or point.
    '''
    cert = {'ok': True, 'rays': len(fan.rays), 'cones': len(fan.cones),
            'pairs_checked': 0, 'walls_checked': 0, 'samples_checked': 0}
    poset = fan.poset
    cones = fan.cones
    N = len(cones)
    down = []
    for i in range(N):
        mask = 0
        for j in range(N):
            if poset.leq(poset.elements[j], poset.elements[i]):
                mask |= 1 << j
        down.append(mask)
    for i, j in combinations(range(N), 2):
        ci, cj = cones[i], cones[j]
        if down[i] & (1 << j) or down[j] & (1 << i):
            lo, hi = (ci, cj) if down[j] & (1 << i) else (cj, ci)
            good = all(hi.contains(r) for r in lo.rays)
        else:
            inter = down[i] & down[j]
            mk = next(k for k in range(N) if down[k] == inter)
            cm = cones[mk]
            good = (all(ci.contains(r) and cj.contains(r) for r in cm.rays)
                    and all(cm.contains(r)
                            for r in _intersection_extremes(ci, cj)))
        if not good:
            cert['ok'] = False
            cert['failed_pair'] = [i, j]
            return cert
        cert['pairs_checked'] += 1
    chambers = [c for c in cones if c.dim == fan.m]
    for i, cone in enumerate(cones):
        if cone.dim != fan.m - 1:
            continue
        bounds = sum(1 for ch in chambers
                     if set(cone.ray_indices) <= set(ch.ray_indices))
        if bounds != 2:
            cert['ok'] = False
            cert['failed_wall'] = i
            cert['wall_chambers'] = bounds
            return cert
        cert['walls_checked'] += 1
    rng = random.Random(seed)
    for _ in range(samples):
        v = tuple(rng.randint(-40, 40) for _ in range(fan.m))
        in_chamber = any(ch.contains(v) for ch in chambers)
        relint = sum(1 for c in cones if c.relint_contains(v))
        if not in_chamber or relint != 1:
            cert['ok'] = False
            cert['failed_point'] = list(v)
            return cert
        cert['samples_checked'] += 1
    return cert


# -- projection ---------------------------------------------------------------

def project_fan(fan):
    '''Coordinate projection onto the truncated tree's space.

    Certifies that the deepest block deletion maps the fan onto the velocity
    fan of the truncated tree (type 1 rays die, type 3 rays fall into the
    lineality line, type 2 rays map onto the projected collisions' rays) and
    returns the latter.  When the truncated tree is a path the image is the
    point fan, reported as None.
    '''
    tree = fan.tree
    assert tree.depth >= 1
    ptree = tree.truncate()
    tn = tree.profile[-1]
    o = fan.m - tn
    if ptree.m == 0:
        assert all(r[:o] == () for r in fan.rays)
        return None
    pfan = build_fan(ptree)
    pindex = {c: i for i, c in enumerate(pfan.collisions)}
    proj = {}
    for c, r in zip(fan.collisions, fan.rays):
        pr = r[:o]
        if c.type_tag == 1:
            assert pr == (0,) * o
        elif c.type_tag == 3:
            assert pr == (1,) * o
        else:
            pc = truncate_collision(c)
            assert pr == pfan.rays[pindex[pc]]
            proj[c] = pc
    for b, cone in zip(fan.poset.elements, fan.cones):
        pb = truncate_bracketing(b)
        target = pfan.cone_of(pb)
        got = {proj[c] for c in
               (fan.collisions[i] for i in cone.ray_indices)
               if c.type_tag == 2}
        want = {pfan.collisions[i] for i in target.ray_indices}
        assert got == want
    return pfan


# -- serialization ------------------------------------------------------------

def fan_to_json(fan):
    '''Deterministic JSON form of a fan.'''
    N = len(fan.cones)
    leq = [[fan.poset.leq(fan.poset.elements[i], fan.poset.elements[j])
            for j in range(N)] for i in range(N)]
    covers = []
    for i in range(N):
        for j in range(N):
            if i == j or not leq[i][j]:
                continue
            if not any(k != i and k != j and leq[i][k] and leq[k][j]
                       for k in range(N)):
                covers.append([i, j])
    return {
        'ambient_dim': fan.m,
        'lineality': [[1] * fan.m],
        'rays': [list(r) for r in fan.rays],
        'cones': [{'rays': list(c.ray_indices), 'bracketing': i}
                  for i, c in enumerate(fan.cones)],
        'face_relations': covers,
    }


def export_off(fan):
    '''OFF model of the unit-sphere cross-section of the reduced fan.

    Vertices are the normalized sum-zero projections of the rays; faces are
    the chambers, with vertices in cyclic order.  Only sensible for reduced
    dimension at most 3 (floats appear here and nowhere else).
    '''
    m = fan.m
    assert m - 1 <= 3
    pts = []
    for r in fan.rays:
        sh = sum(r) / m
        p = np.array([x - sh for x in r], dtype=float)
        pts.append(p / np.linalg.norm(p))
    faces = []
    for ch in fan.chambers:
        idxs = list(ch.ray_indices)
        center = np.mean([pts[i] for i in idxs], axis=0)
        axis = center / np.linalg.norm(center)
        e1 = np.array(pts[idxs[0]], dtype=float) - center
        e1 -= axis * (e1 @ axis)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(axis, e1) if m == 4 else None

        def angle(i):
            d = pts[i] - center
            x = d @ e1
            y = d @ e2 if e2 is not None else 0.0
            return np.arctan2(y, x)

        faces.append(sorted(idxs, key=angle))
    lines = ['OFF', f'{len(pts)} {len(faces)} 0']
    for p in pts:
        lines.append(' '.join(f'{x:.12f}' for x in p))
    for f in faces:
        lines.append(' '.join([str(len(f))] + [str(i) for i in f]))
    return '\n'.join(lines) + '\n'
