r'''The zeta map and the shuffle/nestohedral charts into the braid arrangement.

zeta assigns a 0/1 vector to every collision: entry (k, i) is 1 exactly when
the vertex u^k_i shares an essential k-bracket with a later vertex of its
level.  Resumming a conical decomposition with zeta in place of rho yields a
piecewise-linear map from the velocity fan which is unimodular on every
chamber and sends each chamber to a union of braid cones; this is the sense
in which the velocity fan is locally braid.  The minimal bracketing goes to
the all-ones vector, matching its role as the lineality generator.

A shuffle is admissible for a bracketing when each level permutation
linearly extends the extended height order and keeps the top of every
bracket consecutive.  Maximal bracketings admit exactly one shuffle.  On the
chart of cones admitting a fixed shuffle sigma, the variant omega_sigma
reads the shared-essential-bracket indicator along the shuffled order; its
values on collisions, together with singleton separators between vertices
with distinct parents, form a building set B_sigma whose nested-set fan
(minus the separator stars) is the image of the chart.
'''

from fractions import Fraction
from functools import cached_property
from itertools import combinations

from . import linalg
from .bracketing import Bracketing, bracket_level
from .collision import Collision, enumerate_collisions
from .shuffle import Shuffle, enumerate_shuffles
from .velocity_fan import (DEFAULT_MAX_M, _inverse_data, level_offset, ones,
                           ray_generator)


# -- the zeta map --------------------------------------------------------------

def zeta(c):
    '''The 0/1 vector with entry (k, i) = 1 when u^k_i lies in an essential
    k-bracket together with some u^k_j, j > i.  For a concentrated tree this
    coincides with the ray generator rho(c).'''
    tree = c.tree
    vec = [0] * tree.m
    for A in c.essential_brackets:
        k = bracket_level(A)
        top = {tree.index[u] for u in A[-1]}
        hi = max(top)
        for i in top:
            if i < hi:
                vec[level_offset(tree, k) + i - 1] = 1
    return tuple(vec)


def _conical_decompositions(tree, v):
    '''All facet decompositions of v: yields (minimal-term coefficient,
    list of (weight, collision) pairs), one per simplicial facet whose
    coefficients are nonnegative.'''
    data = _inverse_data(tree)
    vf = [Fraction(x) for x in v]
    assert len(vf) == tree.m
    hit = False
    for inv, facet in zip(data['invs'], data['facets']):
        lam = linalg.mat_vec(inv, vf)
        if all(x >= 0 for x in lam[:-1]):
            hit = True
            yield lam[-1], [(lam[i], data['collisions'][ci])
                            for i, ci in enumerate(facet)]
    assert hit, 'the velocity fan is complete; no facet matched'


def _conical_terms(tree, v):
    return next(_conical_decompositions(tree, v))


def gamma_zeta(tree, v):
    '''The composite map v -> sum of zeta over the conical decomposition of
    v, with the minimal term contributing a multiple of the all-ones
    vector.'''
    lam0, terms = _conical_terms(tree, v)
    out = [lam0] * tree.m
    for lam, c in terms:
        zc = zeta(c)
        for i in range(tree.m):
            out[i] += lam * zc[i]
    return tuple(out)


# -- admissible shuffles and the omega maps ------------------------------------

def is_admissible(b, s):
    '''Whether the shuffle belongs to S(B): each level permutation linearly
    extends the singleton height order and keeps the top vertex set of every
    bracket consecutive.  Accepts a Bracketing, a Collision, or None (the
    minimal bracketing admits every shuffle).'''
    if b is None:
        return True
    if isinstance(b, Collision):
        b = b.bracketing
    tree = b.tree
    for k, p in enumerate(s.perms, start=1):
        lvl = tree.levels[k]
        pos = {lvl[p[i] - 1]: i for i in range(len(p))}
        for u, v in b.sing_order:
            if len(u) == k and pos[u] > pos[v]:
                return False
        for A in b.brackets:
            if bracket_level(A) != k or len(A[-1]) <= 1:
                continue
            ps = sorted(pos[u] for u in A[-1])
            if ps[-1] - ps[0] != len(ps) - 1:
                return False
    return True


def admissible_shuffles(b):
    '''S(B), computed by filtering all T-shuffles.'''
    tree = b.tree if isinstance(b, Bracketing) else b.bracketing.tree
    return [s for s in enumerate_shuffles(tree) if is_admissible(b, s)]


def realized_shuffles(tree, max_m=DEFAULT_MAX_M):
    '''The shuffles admissible for at least one bracketing beyond the
    minimum; these are the charts that carry actual cones.'''
    collisions = enumerate_collisions(tree, max_m=max_m)
    return [s for s in enumerate_shuffles(tree)
            if any(is_admissible(c, s) for c in collisions)]


def omega_vector(c, s):
    '''The 0/1 vector with entry (k, i) = 1 when the vertices at shuffled
    positions i and i+1 of level k share an essential k-bracket.'''
    if c is None:
        return ones(s.tree.m)
    assert is_admissible(c, s), 'omega is defined on admissible shuffles only'
    tree = c.tree
    tops = {}
    for A in c.essential_brackets:
        tops.setdefault(bracket_level(A), []).append(A[-1])
    vec = [0] * tree.m
    for k, p in enumerate(s.perms, start=1):
        lvl = tree.levels[k]
        off = level_offset(tree, k)
        for i in range(len(p) - 1):
            u, w = lvl[p[i] - 1], lvl[p[i + 1] - 1]
            if any(u in top and w in top for top in tops.get(k, ())):
                vec[off + i] = 1
    return tuple(vec)


def omega_chart(tree, s, max_m=DEFAULT_MAX_M):
    '''The shuffle chart of s: the collisions admitting s, plus the chart
    map v -> sum of omega_sigma over the conical decomposition of v.  The
    map raises ValueError outside the chart.'''
    chart = [c for c in enumerate_collisions(tree, max_m=max_m)
             if is_admissible(c, s)]

    def gamma_omega(v):
        for lam0, terms in _conical_decompositions(tree, v):
            if any(lam > 0 and not is_admissible(c, s) for lam, c in terms):
                continue
            out = [Fraction(lam0)] * tree.m
            for lam, c in terms:
                if lam == 0:
                    continue
                oc = omega_vector(c, s)
                for i in range(tree.m):
                    out[i] += lam * oc[i]
            return tuple(out)
        raise ValueError('vector lies outside the shuffle chart')

    return chart, gamma_omega


# -- building sets and nested set complexes ------------------------------------

class BuildingSet:
    '''A family of subsets of the ground set [m] (0-based coordinates)
    containing all singletons and closed under unions of intersecting
    members.'''

    def __init__(self, m, blocks):
        self.m = m
        self.blocks = frozenset(frozenset(b) for b in blocks)
        assert all({i} <= set(range(m)) for b in self.blocks for i in b)
        assert all(frozenset({i}) in self.blocks for i in range(m)), \
            'building sets contain every singleton'
        for b1, b2 in combinations(self.blocks, 2):
            if b1 & b2:
                assert b1 | b2 in self.blocks, \
                    'building sets are union-closed on intersecting members'

    def __eq__(self, other):
        return self.m == other.m and self.blocks == other.blocks

    def __repr__(self):
        return f'BuildingSet(m={self.m}, {len(self.blocks)} blocks)'

    def is_nested(self, N):
        '''The two nested-set conditions: pairwise nested-or-disjoint, and
        no disjoint subfamily of size >= 2 unioning to a block.'''
        N = list(N)
        for b1, b2 in combinations(N, 2):
            if b1 & b2 and not (b1 <= b2 or b2 <= b1):
                return False
        maxima = [b for b in N
                  if not any(b < b2 for b2 in N)]
        for r in range(2, len(maxima) + 1):
            for sub in combinations(maxima, r):
                if all(not (a & b) for a, b in combinations(sub, 2)):
                    if frozenset().union(*sub) in self.blocks:
                        return False
        return True

    @cached_property
    def nested_sets(self):
        '''All nested sets, grown one block at a time.'''
        order = sorted(self.blocks, key=lambda b: (len(b), sorted(b)))
        out = [frozenset()]
        frontier = [(frozenset(), 0)]
        while frontier:
            N, start = frontier.pop()
            for i in range(start, len(order)):
                cand = N | {order[i]}
                if self.is_nested(cand):
                    out.append(cand)
                    frontier.append((cand, i + 1))
        return out

    def to_json(self):
        return {'ground': self.m,
                'blocks': [sorted(b) for b in
                           sorted(self.blocks, key=lambda b: (len(b), sorted(b)))]}


def indicator(m, block):
    return tuple(1 if i in block else 0 for i in range(m))


def support(vec):
    return frozenset(i for i, x in enumerate(vec) if x)


def separator_set(tree, s):
    '''V_sigma: the coordinates whose sigma-consecutive vertices have
    distinct parents (0-based flat indices).'''
    out = set()
    for k, p in enumerate(s.perms, start=1):
        lvl = tree.levels[k]
        off = level_offset(tree, k)
        for i in range(len(p) - 1):
            if lvl[p[i] - 1][:-1] != lvl[p[i + 1] - 1][:-1]:
                out.add(off + i)
    return frozenset(out)


def local_building_set(tree, s, max_m=DEFAULT_MAX_M):
    '''B_sigma: the omega-supports of the collisions admitting s, together
    with a singleton for every separator coordinate.'''
    chart, _ = omega_chart(tree, s, max_m=max_m)
    wblocks = {support(omega_vector(c, s)) for c in chart}
    wblocks.add(frozenset(range(tree.m)))  # omega of the minimal bracketing
    vsing = {frozenset({i}) for i in separator_set(tree, s)}
    assert not wblocks & vsing, 'omega blocks and separators are disjoint'
    return BuildingSet(tree.m, wblocks | vsing)


def nested_fan_cones(bs, exclude=frozenset()):
    '''The cones of the nested-set fan of a building set, as frozensets of
    indicator rays (plus the implicit all-ones lineality); nested sets
    meeting ``exclude`` (stars of separator singletons) are dropped.  The
    ground-set block indicates the lineality generator and is stripped, so
    nested sets differing only by it give the same cone.'''
    ground = frozenset(range(bs.m))
    out = set()
    for N in bs.nested_sets:
        if any(b in exclude for b in N):
            continue
        out.add(frozenset(indicator(bs.m, b) for b in N if b != ground))
    return out


# -- verification --------------------------------------------------------------

def braid_flag(vectors, m):
    '''Whether the 0/1 vectors are the indicators of a (possibly partial)
    flag of proper nonempty subsets of [m].'''
    sups = sorted({support(v) for v in vectors}, key=len)
    if len(sups) != len(set(vectors)):
        return False
    for s1, s2 in zip(sups, sups[1:]):
        if not s1 < s2:
            return False
    return all(0 < len(s) < m for s in sups)


def verify_locally_braid(fan):
    '''Certify that gamma_zeta witnesses the locally-braid property of a
    velocity fan: linear and unimodular on every chamber, with each chamber
    image a union of braid cones (one per permutahedral chamber inside).

    Returns the number of braid chambers covered, counted with multiplicity
    over the velocity chambers.
    '''
    from .triangulation import (build_permutahedral_fan, generalized_ray,
                                _maximal_chains, generalized_collisions,
                                perm_leq)
    tree = fan.tree
    m = tree.m
    covered = 0
    gens = generalized_collisions(tree)
    chains = _maximal_chains(gens, perm_leq)
    for cone in fan.chambers:
        cols = [c for c in enumerate_collisions(tree)
                if c.bracketing.leq(cone.bracketing)]
        basis = [ray_generator(c) for c in cols] + [ones(m)]
        images = [zeta(c) for c in cols] + [ones(m)]
        # the chamber map is linear: solve it from a spanning subset and
        # check it reproduces every ray image.
        idx = _independent_rows(basis, m)
        assert len(idx) == m, 'chambers span the ambient space'
        mat = _linear_map([basis[i] for i in idx], [images[i] for i in idx])
        for b, im in zip(basis, images):
            assert tuple(linalg.mat_vec(mat, b)) == tuple(im), \
                'gamma_zeta must be linear on each chamber'
        assert abs(linalg.det(mat)) == 1, \
            'gamma_zeta must be unimodular on each chamber'
        # each permutahedral chamber inside maps onto a braid chamber.
        for chain in chains:
            rays = [generalized_ray(d) for d in chain]
            if not all(cone.contains(r) for r in rays):
                continue
            imgs = [tuple(linalg.mat_vec(mat, r)) for r in rays]
            assert all(x in (0, 1) for v in imgs for x in v)
            assert braid_flag(imgs, m) and len(imgs) == m - 1, \
                'permutahedral chambers must map onto braid chambers'
            covered += 1
    return covered


def verify_chart(tree, s, max_m=DEFAULT_MAX_M):
    '''Certify the nestohedral chart of a shuffle: the faces of the
    triangulated complex supported on the chart map bijectively onto the
    nested-set fan of B_sigma minus the separator stars, unimodularly on
    top-dimensional faces.  Returns a report dict.'''
    from .triangulation import enumerate_nested
    bs = local_building_set(tree, s, max_m=max_m)
    vsing = {frozenset({i}) for i in separator_set(tree, s)}
    target = nested_fan_cones(bs, exclude=vsing)
    complex_ = enumerate_nested(tree)
    chart_faces = [tuple(complex_.collisions[i] for i in Y)
                   for Y in complex_.faces()]
    chart_faces = [Y for Y in chart_faces
                   if all(is_admissible(c, s) for c in Y)]
    images = []
    for Y in chart_faces:
        vecs = frozenset(omega_vector(c, s) for c in Y)
        assert ones(tree.m) not in vecs, \
            'no collision image may degenerate onto the lineality'
        assert len(vecs) == len(Y), 'omega is injective on each face'
        images.append(vecs)
    assert len(set(images)) == len(images), 'the chart map is injective'
    assert set(images) == target, \
        'chart images must be the nested-set fan minus separator stars'
    top = 0
    for Y, vecs in zip(chart_faces, images):
        if len(Y) == tree.m - 1:
            mat = [list(v) for v in vecs] + [[1] * tree.m]
            assert abs(linalg.det(mat)) == 1
            top += 1
    return {'shuffle': s.serialize(), 'blocks': len(bs.blocks),
            'faces': len(chart_faces), 'top_faces': top}


def _independent_rows(rows, m):
    idx, acc = [], []
    for i, r in enumerate(rows):
        if linalg.rank(acc + [list(r)]) > len(idx):
            idx.append(i)
            acc.append(list(r))
            if len(idx) == m:
                break
    return idx


def _linear_map(basis, images):
    '''The matrix M with M b_i = im_i for a basis of column vectors.'''
    m = len(basis)
    binv = linalg.inverse([[basis[j][i] for j in range(m)] for i in range(m)])
    img = [[images[j][i] for j in range(m)] for i in range(m)]
    return [[sum(img[i][k] * binv[k][j] for k in range(m)) for j in range(m)]
            for i in range(m)]
