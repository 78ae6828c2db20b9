r'''Nested collections, the triangulated and permutahedral fans, and walls.

A collection of collisions is nested when some ordering makes every earlier
member disjoint from or contained in every later one; equivalently (the
complex is flag) when the members are pairwise adjacent in the undirected
collision graph.  Cones over nested collections triangulate the velocity
fan on the same rays, and every maximal cone is smooth: its rays plus the
all-ones vector form a unimodular basis.

Adjoining the minimal bracketing to a nested collection turns the cover
relations of the containment order into a rooted tree, binary with m
vertices when the collection is maximal.  Linear extensions of that tree
biject with the flags of generalized collisions (antichains of pairwise
disjoint collisions, summed ray generators), whose order complex gives the
finer permutahedral fan.

Wall normals are computed two ways: a recursion that contracts a minimal
collision of the wall, transports the quotient normal back through P_sigma
and solves the one free entry against orthogonality to 1, with reduced
walls read off from the unique 1-dimensional sub-bracket; and an exact
nullspace oracle.  The two must agree up to sign.
'''

from fractions import Fraction
from functools import reduce
from itertools import combinations, permutations

from . import linalg
from .bracketing import bracket_contains, bracket_level
from .collision import (adjacent, contained, disjoint, enumerate_collisions,
                        quotient_bracketing, quotient_collision,
                        split_disjoint)
from .shuffle import compatible_shuffle, perm_matrix
from .velocity_fan import Cone, nested_facets, ones, ray_generator


def is_nested(cols):
    '''Pairwise adjacency in the collision graph (the complex is flag).'''
    return all(adjacent(c1, c2) for c1, c2 in combinations(cols, 2))


class NestedComplex:
    '''The triangulated n-associahedron: the flag complex of the collision
    graph, stored by its facets.'''

    def __init__(self, tree, collisions, facets):
        self.tree = tree
        self.collisions = tuple(collisions)
        self.facets = tuple(facets)

    def faces(self):
        '''Downward closure of the facets, as sorted index tuples (the
        empty face included).'''
        out = set()
        for f in self.facets:
            for r in range(len(f) + 1):
                out.update(combinations(f, r))
        return sorted(out, key=lambda y: (len(y), y))

    def __repr__(self):
        return (f'NestedComplex(vertices={len(self.collisions)}, '
                f'facets={len(self.facets)})')


def enumerate_nested(tree, collisions=None):
    if collisions is None:
        collisions = enumerate_collisions(tree)
    return NestedComplex(tree, collisions, nested_facets(tree, collisions))


def facet_binary_tree(Y):
    '''Cover relations of -> within Y with the minimal bracketing adjoined:
    a map collision -> parent, where None stands for the root B_min.

    For maximal Y the result has m vertices (counting the root) and every
    vertex has at most two children.
    '''
    Y = list(Y)
    assert is_nested(Y), 'collection must be nested'
    parent = {}
    for c in Y:
        above = [c2 for c2 in Y if c2 != c and contained(c, c2)]
        covers = [c2 for c2 in above
                  if not any(c3 != c2 and contained(c3, c2) for c3 in above)]
        assert len(covers) <= 1, 'containment covers must be unique'
        parent[c] = covers[0] if covers else None
    if Y and len(Y) == Y[0].tree.m - 1:
        kids = {}
        for c, p in parent.items():
            kids.setdefault(p, []).append(c)
        assert all(len(v) <= 2 for v in kids.values()), \
            'maximal nested collections give binary trees'
    return parent


class SimplicialFan:
    '''A simplicial refinement of the velocity fan: common ray list plus
    one cone per maximal simplex, each carrying its generator indices.'''

    def __init__(self, tree, rays, chambers, labels=None):
        self.tree = tree
        self.m = tree.m
        self.rays = tuple(rays)
        self.chambers = list(chambers)
        self.labels = labels

    def __repr__(self):
        return (f'SimplicialFan(m={self.m}, rays={len(self.rays)}, '
                f'chambers={len(self.chambers)})')


def build_triangulated_fan(tree, collisions=None):
    '''Cones over the maximal nested collections of collisions.'''
    if collisions is None:
        collisions = enumerate_collisions(tree)
    rays = tuple(ray_generator(c) for c in collisions)
    facets = nested_facets(tree, collisions)
    chambers = [Cone(tree.m, tuple(rays[i] for i in f), ray_indices=f)
                for f in facets]
    return SimplicialFan(tree, rays, chambers, labels=facets)


# -- generalized collisions and the permutahedral fan --------------------------

def generalized_collisions(tree, collisions=None):
    '''All nonempty sets of pairwise disjoint collisions, sorted.'''
    if collisions is None:
        collisions = enumerate_collisions(tree)
    out = []

    def grow(chosen, rest):
        for i, c in enumerate(rest):
            nxt = chosen + [c]
            out.append(frozenset(nxt))
            grow(nxt, [c2 for c2 in rest[i + 1:] if disjoint(c, c2)])

    grow([], list(collisions))
    return sorted(out, key=lambda d: sorted(c.key for c in d))


def perm_leq(d1, d2):
    '''d1 <= d2 in the generalized-collision order: every member of d1 is
    contained in (or equals) some member of d2.'''
    return all(any(c1 == c2 or contained(c1, c2) for c2 in d2) for c1 in d1)


def generalized_ray(d):
    '''rho(D) = sum of the ray generators of the members.'''
    tree = next(iter(d)).tree
    vec = [0] * tree.m
    for c in d:
        for i, x in enumerate(ray_generator(c)):
            vec[i] += x
    return tuple(vec)


def _maximal_chains(elements, leq):
    strictly_below = {e: [f for f in elements if f != e and leq(f, e)]
                      for e in elements}
    chains = []

    def grow(chain, candidates):
        ext = [e for e in candidates if all(leq(c, e) for c in chain)]
        minimal = [e for e in ext
                   if not any(f in ext for f in strictly_below[e])]
        if not minimal:
            chains.append(tuple(chain))
            return
        for e in minimal:
            grow(chain + [e], [f for f in ext if f != e])

    grow([], list(elements))
    return chains


def build_permutahedral_fan(tree, collisions=None):
    '''Cones over maximal flags of generalized collisions.'''
    if collisions is None:
        collisions = enumerate_collisions(tree)
    gens = generalized_collisions(tree, collisions)
    rays = tuple(dict.fromkeys(generalized_ray(d) for d in gens))
    chains = _maximal_chains(gens, perm_leq)
    chambers = [Cone(tree.m, tuple(generalized_ray(d) for d in z))
                for z in chains]
    return SimplicialFan(tree, rays, chambers, labels=chains)


def linear_extensions(Y):
    '''All orderings of the nested collection Y compatible with ->.'''
    Y = list(Y)
    return [p for p in permutations(Y)
            if all(not contained(p[j], p[i])
                   for i in range(len(p)) for j in range(i + 1, len(p)))]


def lambda_map(order):
    '''The flag of generalized collisions associated to a linear extension
    of a nested collection: the i-th member collects the containment-maximal
    collisions among the first i.'''
    flag = []
    for i, c in enumerate(order):
        down = order[:i + 1]
        mx = [c1 for c1 in down
              if not any(c2 != c1 and contained(c1, c2) for c2 in down)]
        flag.append(frozenset(mx))
    return tuple(flag)


def refines(finer, coarser_chambers):
    '''Every chamber of the finer fan sits inside a chamber of the coarser
    one (for complete fans this is exactly support-wise refinement).'''
    for ch in finer.chambers:
        if not any(all(big.contains(r) for r in ch.rays)
                   for big in coarser_chambers):
            return False
    return True


# -- wall normals ---------------------------------------------------------------

def _normalize(vec):
    v = tuple(linalg.primitive(vec))
    lead = next((x for x in v if x), 0)
    return tuple(-x for x in v) if lead < 0 else v


def wall_normal_nullspace(tree, W):
    '''Oracle: the primitive normal of span(rays of W, 1), first nonzero
    entry positive.'''
    rows = [list(ray_generator(c)) for c in W] + [[1] * tree.m]
    ns = linalg.nullspace(rows, ncols=tree.m)
    assert len(ns) == 1, 'the collection does not span a wall'
    return _normalize(ns[0])


def _one_dim_bracket(c, W):
    '''The unique minimum-level bracket A of the collision whose induced
    subtree has exactly two extra vertices (a 1-dimensional
    sub-associahedron) and which sits inside an essential bracket of every
    wall member.'''
    found = []
    for A in c.bracketing.brackets:
        if sum(len(lev) - 1 for lev in A) != 2:
            continue
        k = bracket_level(A)
        if all(any(bracket_level(E) == k and bracket_contains(A, E)
                   for E in cj.essential_brackets) for cj in W):
            found.append(A)
    assert found, 'reduced wall must expose a 1-dimensional bracket'
    k = min(len(A) for A in found)
    short = [A for A in found if len(A) == k]
    assert len(short) == 1, 'the minimum-level 1-dimensional bracket is unique'
    return short[0]


def _reduced_wall_normal(tree, W):
    '''Base case: W is a containment chain; the normal is read off from the
    shape of the 1-dimensional bracket of its minimum.'''
    chain = sorted(W, key=lambda c: sum(contained(c, c2) for c2 in W),
                   reverse=True)
    assert all(contained(chain[i], chain[j]) for i in range(len(chain))
               for j in range(i + 1, len(chain)))
    c1 = chain[0] if chain else None
    A = _one_dim_bracket(c1, W)
    k0 = bracket_level(A)
    n0 = k0 - len(A) + 1  # depth of the shallowest level of A

    def gap(u):
        return (len(u), tree.index[u])

    # branch points: vertices with two or more children inside A (the root
    # of the subtree included, via the level-n0 layer).
    levels = {n0 + i: sorted(lev) for i, lev in enumerate(A)}
    wide = [k for k, lev in levels.items() if len(lev) > 1]
    nleaves = 0
    for k, lev in levels.items():
        for u in lev:
            if k == k0 or not any(v[:-1] == u for v in levels[k + 1]):
                nleaves += 1
    if nleaves == 3:
        gaps = []
        for k in wide:
            lev = levels[k]
            for a, b in zip(lev, lev[1:]):
                by_parent = a[:-1] == b[:-1]
                assert tree.index[b] == tree.index[a] + 1 or not by_parent
                gaps.append(gap(a))
        assert len(gaps) == 2
        (ka, ia), (kb, ib) = gaps
        vec = [0] * tree.m
        vec[_coord(tree, ka, ia)] += 1
        vec[_coord(tree, kb, ib)] -= 1
        return _normalize(vec)
    assert nleaves == 2
    assert wide == [k0 - 1, k0], 'two-leaf case widens the two deep levels'
    r = tree.index[levels[k0 - 1][0]]
    s1, s2 = (tree.index[u] for u in levels[k0])
    vec = [0] * tree.m
    vec[_coord(tree, k0 - 1, r)] = s2 - s1
    for i in range(s1, s2):
        vec[_coord(tree, k0, i)] -= 1
    return _normalize(vec)


def _coord(tree, k, i):
    '''Flat index of gap i at level k in the block coordinate order.'''
    off = 0
    for j in range(1, k):
        off += len(tree.levels[j]) - 1
    return off + i - 1


def wall_normal(tree, W):
    '''Primitive integer normal of the wall spanned by the nested
    collection W (|W| = m - 2), via the contraction recursion.'''
    m = tree.m
    W = list(W)
    assert len(W) == m - 2 and is_nested(W), 'not a wall of the triangulation'
    if m == 2:
        return _normalize((1, -1))
    join = reduce(lambda b1, b2: b1.join(b2), (c.bracketing for c in W))
    assert join is not None
    mins = [c for c in W if c.is_minimal()
            and not any(c2 != c and contained(c2, c) for c2 in W)]
    pivots = [c for c in mins if _containment_minimal(c, join)]
    if not pivots:
        return _reduced_wall_normal(tree, W)
    c1 = sorted(pivots, key=lambda c: c.key)[0]
    s = compatible_shuffle(c1)
    qtree, psi = c1.tree_map
    assert qtree.m == m - 1, 'minimal collisions drop one gap'

    # position of the fused pair in sigma order
    pos = None
    idx = 0
    for k in range(1, tree.depth + 1):
        lvl = tree.levels[k]
        p = s.perms[k - 1]
        for i in range(len(lvl) - 1):
            if qtree.index[psi[lvl[p[i] - 1]]] == \
                    qtree.index[psi[lvl[p[i + 1] - 1]]]:
                assert pos is None
                pos = idx
            idx += 1
    assert pos is not None

    # images of the other wall members in the contracted tree
    parts = set()
    for c in W:
        if c == c1:
            continue
        if contained(c1, c):
            parts.update(quotient_collision(c, c1))
        else:
            parts.update(split_disjoint(quotient_bracketing(c.bracketing,
                                                            c1)))
    parts = sorted(parts, key=lambda c: c.key)
    target = m - 3
    sub = None
    for cand in combinations(parts, target):
        if not is_nested(cand):
            continue
        rows = [list(ray_generator(c)) for c in cand] + [[1] * qtree.m]
        if linalg.rank(rows) == qtree.m - 1:
            sub = list(cand)
            break
    assert sub is not None or target == 0, 'quotient wall reorganization'
    vq = wall_normal(qtree, sub if sub is not None else [])

    v0 = list(vq[:pos]) + [0] + list(vq[pos:])
    P = perm_matrix(s)
    base = linalg.mat_vec(P, v0)
    unit = linalg.mat_vec(P, [1 if i == pos else 0 for i in range(m)])
    assert sum(unit) != 0
    x = Fraction(-sum(base), sum(unit))
    vec = [b + x * u for b, u in zip(base, unit)]
    out = _normalize(vec)
    rows = [ray_generator(c) for c in W] + [ones(m)]
    assert all(linalg.dot(out, r) == 0 for r in rows), \
        'recursion output must be orthogonal to the wall'
    return out


def _containment_minimal(c, b):
    from .bracketing import bracket_contains
    nts = b.nontrivial_brackets()
    for A in c.nontrivial_brackets:
        k = bracket_level(A)
        for A2 in nts:
            if bracket_level(A2) == k and A2 != A and bracket_contains(A2, A):
                return False
    return True


def velocity_walls(fan):
    '''(bracketing, nested collection, normal) for every wall of the
    velocity fan, with the normal computed by the recursion.'''
    tree = fan.tree
    m = tree.m
    out = []
    for cone in fan.cones:
        if cone.dim != m - 1:
            continue
        below = [fan.collisions[i] for i in cone.ray_indices]
        W = None
        for cand in combinations(below, m - 2):
            if is_nested(cand):
                rows = [list(ray_generator(c)) for c in cand] + [[1] * m]
                if linalg.rank(rows) == m - 1:
                    W = list(cand)
                    break
        assert W is not None
        out.append((cone.bracketing, W, wall_normal(tree, W)))
    return out
