r'''Polytopal realizations of concentrated n-associahedra.

A tree is concentrated when at most one vertex per depth has children, so
every level is a single sibling block.  Collision units -- lists with one
pair of same-depth vertices per participating level, adjacent pairs when
more than one level participates -- are the counting atoms of the
realization: the support function weighs each bracket by the number of
units it contains, the facet right-hand sides count the units of a
collision, the vertex coordinates count the units contributing to each gap,
and the Minkowski decomposition has one standard simplex per unit.

Constrainahedra of a profile are recovered as the Minkowski sum of the
realizations of all concentrated trees with that profile; normal
equivalence with the reference Minkowski description is certified by
comparing strict supermodularity patterns on 0/1 vectors.
'''

from fractions import Fraction
from functools import cached_property
from itertools import combinations, product

from . import linalg
from .bracketing import (bracket_contains, bracket_level, is_singleton,
                         is_valid_bracket)
from .collision import contained, enumerate_collisions
from .plane_tree import RootedPlaneTree
from .velocity_fan import (DEFAULT_MAX_M, build_fan, gamma_inverse,
                           level_offset, ones, ray_generator)


# -- collision units -----------------------------------------------------------

def unit_level(u):
    '''The deepest nonempty entry of a unit (1-based).'''
    return max(k for k, e in enumerate(u, start=1) if e is not None)


def unit_coords(tree, u):
    '''The flat gap coordinates of the unit: [a, b) at each level.'''
    out = set()
    for k, e in enumerate(u, start=1):
        if e is None:
            continue
        a, b = e
        off = level_offset(tree, k)
        out.update(range(off + a - 1, off + b - 1))
    return frozenset(out)


def collision_units(tree):
    '''U(T): all units of a concentrated tree.  A unit with one nonempty
    entry holds an arbitrary pair; with several, each entry is an adjacent
    pair.'''
    assert tree.is_concentrated(), 'collision units need a concentrated tree'
    n = tree.depth
    sizes = [len(tree.levels[k]) for k in range(n + 1)]
    units = []
    for k in range(1, n + 1):
        for a, b in combinations(range(1, sizes[k] + 1), 2):
            ent = [None] * n
            ent[k - 1] = (a, b)
            units.append(tuple(ent))
    adjacent = {k: [(a, a + 1) for a in range(1, sizes[k])]
                for k in range(1, n + 1)}
    for r in range(2, n + 1):
        for ks in combinations(range(1, n + 1), r):
            for pick in product(*[adjacent[k] for k in ks]):
                ent = [None] * n
                for k, pair in zip(ks, pick):
                    ent[k - 1] = pair
                units.append(tuple(ent))
    return units


def unit_in_bracket(tree, u, A):
    '''Containment of a unit in a bracket: equal level, both pair members
    inside each entry's layer.'''
    if unit_level(u) != bracket_level(A):
        return False
    for k, e in enumerate(u, start=1):
        if e is None:
            continue
        if any(tree.vertex(k, i) not in A[k] for i in e):
            return False
    return True


def units_in_bracket(tree, units, A):
    return [u for u in units if unit_in_bracket(tree, u, A)]


def total_unit_count(sizes):
    '''The number of units over levels of the given sizes in closed form:
    per-level pair counts plus the product correction for multi-level
    units built from adjacent pairs.'''
    total = sum(s * (s - 1) // 2 for s in sizes)
    prod = 1
    for s in sizes:
        prod *= s
    return total + prod - sum(sizes) + len(sizes) - 1


# -- support function ----------------------------------------------------------

def support_value(tree, mb):
    '''h(l_B) = sum of weight(A) * |U(A)| over the brackets of the metric
    bracketing, where U(A) holds the units of the same level as A.'''
    assert tree.is_concentrated()
    units = collision_units(tree)
    total = Fraction(0)
    for A, w in mb.weights.items():
        if bracket_level(A) >= 1:
            total += w * len(units_in_bracket(tree, units, A))
    return total


def h_value(tree, v):
    '''The support function on the velocity fan: h composed with the
    conical decomposition.'''
    return support_value(tree, gamma_inverse(tree, v))


# -- simplices of the Minkowski decomposition -----------------------------------

def smallest_bracket(tree, u):
    '''The smallest bracket containing the unit: at each level the interval
    spanned by the unit's entry and the parent of the level below.'''
    l = unit_level(u)
    levels = {}
    need = set()
    for k in range(l, 0, -1):
        cur = set(need)
        if u[k - 1] is not None:
            cur.update(tree.vertex(k, i) for i in u[k - 1])
        lo = min(tree.index[v] for v in cur)
        hi = max(tree.index[v] for v in cur)
        levels[k] = frozenset(tree.levels[k][lo - 1:hi])
        need = {v[:-1] for v in levels[k]}
    A = (frozenset({()}),) + tuple(levels[k] for k in range(1, l + 1))
    assert is_valid_bracket(tree, A)
    return A


def unit_collision(tree, u, collisions=None):
    '''The smallest collision with an essential bracket containing the
    unit's smallest bracket at its own level, or None for the minimal
    bracketing when no collision qualifies.'''
    if collisions is None:
        collisions = enumerate_collisions(tree)
    A = smallest_bracket(tree, u)
    k = bracket_level(A)
    cands = [c for c in collisions
             if any(bracket_level(B) == k and bracket_contains(A, B)
                    for B in c.essential_brackets)]
    if not cands:
        return None
    mins = [c for c in cands
            if not any(c2 != c and contained(c2, c) for c2 in cands)]
    assert len(mins) == 1, 'the smallest containing collision is unique'
    return mins[0]


def unit_simplex(tree, u, collisions=None):
    '''S(c): the support of the ray of the smallest collision containing
    the unit (the whole ground set for the minimal bracketing).'''
    c = unit_collision(tree, u, collisions)
    if c is None:
        return frozenset(range(tree.m))
    return frozenset(i for i, x in enumerate(ray_generator(c)) if x)


# -- vertices -------------------------------------------------------------------

def _same_level_children(b, A):
    '''Immediate proper subbrackets of A within its own level.'''
    k = bracket_level(A)
    below = [B for B in b.by_level[k]
             if B != A and bracket_contains(B, A)]
    return [B for B in below
            if not any(C != B and bracket_contains(B, C) for C in below)]


def validate_maximal_structure(b):
    '''Every nonsingleton bracket of a maximal bracketing of a concentrated
    tree has either one child (thin at exactly one shallower level) or two
    children partitioning its top level.'''
    tree = b.tree
    for A in b.brackets:
        if is_singleton(A):
            continue
        kids = _same_level_children(b, A)
        if len(kids) == 1:
            thin = kids[0]
            assert thin[-1] == A[-1], 'single child keeps the top level'
            diff = [m for m in range(1, len(A) - 1) if thin[m] != A[m]]
            assert len(diff) == 1, 'thin child differs at exactly one level'
        else:
            assert len(kids) == 2, 'brackets have one or two children'
            a1, a2 = kids
            assert all(a1[i] == A[i] == a2[i] for i in range(len(A) - 1))
            assert a1[-1] | a2[-1] == A[-1] and not a1[-1] & a2[-1]


def bracket_center(tree, b, A):
    '''The distinguished gap coordinate of a nonsingleton bracket: the
    junction of its two children, or the boundary gap of its thin child.'''
    kids = _same_level_children(b, A)
    k = bracket_level(A)
    if len(kids) == 2:
        a1, a2 = kids
        if min(tree.index[v] for v in a1[-1]) > \
                min(tree.index[v] for v in a2[-1]):
            a1, a2 = a2, a1
        i = max(tree.index[v] for v in a1[-1])
        assert tree.vertex(k, i + 1) in a2[-1]
        return (k, i)
    thin, = kids
    r, = [m for m in range(1, k) if thin[m] != A[m]]
    hits = []
    idx = sorted(tree.index[v] for v in A[r])
    for i in idx:
        if i + 1 in idx:
            ins = (tree.vertex(r, i) in thin[r]) + \
                  (tree.vertex(r, i + 1) in thin[r])
            if ins == 1:
                hits.append((r, i))
    assert len(hits) == 1, 'thin children sit flush at one end'
    return hits[0]


def vertex_point(tree, b, units):
    '''v(B): each unit contributes 1 to the center of the containment-
    minimal bracket of B containing it.'''
    v = [0] * tree.m
    for u in units:
        l = unit_level(u)
        holds = [A for A in b.by_level[l] if unit_in_bracket(tree, u, A)]
        mins = [A for A in holds
                if not any(B != A and bracket_contains(B, A) for B in holds)]
        assert len(mins) == 1, 'units live in a unique minimal bracket'
        k, i = bracket_center(tree, b, mins[0])
        v[level_offset(tree, k) + i - 1] += 1
    return tuple(v)


# -- the realization ------------------------------------------------------------

class PolytopeRealization:
    '''Vertices, facet inequalities, and Minkowski data of a concentrated
    n-associahedron, living on the hyperplane sum(x) = |U(T)|.'''

    def __init__(self, tree, vertices, facets, total, minkowski):
        self.tree = tree
        self.vertices = vertices        # list of (point, maximal bracketing)
        self.facets = facets            # list of (normal, rhs, collision)
        self.total = total
        self.minkowski = minkowski      # list of supports S(c), one per unit

    def __repr__(self):
        return (f'PolytopeRealization({len(self.vertices)} vertices, '
                f'{len(self.facets)} facets, sum={self.total})')

    @cached_property
    def vertex_list(self):
        return sorted(p for p, _ in self.vertices)

    def to_json(self):
        return {
            'tree': self.tree.to_json(),
            'total': self.total,
            'vertices': [list(p) for p in self.vertex_list],
            'facets': [{'normal': list(nrm), 'rhs': rhs, 'collision': i}
                       for i, (nrm, rhs, _) in enumerate(self.facets)],
            'minkowski': [{'S': sorted(S), 'y': 1}
                          for S in sorted(self.minkowski,
                                          key=lambda S: (len(S), sorted(S)))],
        }


def realize(tree, max_m=DEFAULT_MAX_M):
    '''The polytope of a concentrated tree: contribution-counted vertices,
    one facet per collision, and one simplex per collision unit.'''
    if not tree.is_concentrated():
        raise ValueError('only concentrated trees are realized')
    if tree.m > max_m:
        raise ValueError(f'scale guard: m = {tree.m} exceeds {max_m}')
    from .bracketing import enumerate_bracketings
    units = collision_units(tree)
    collisions = enumerate_collisions(tree, max_m=max_m)
    poset = enumerate_bracketings(tree, max_m=max_m)
    vertices = []
    for b in poset.maximal:
        validate_maximal_structure(b)
        vertices.append((vertex_point(tree, b, units), b))
    facets = []
    for c in collisions:
        nrm = ray_generator(c)
        assert set(nrm) <= {0, 1}, 'concentrated rays are 0/1 vectors'
        rhs = sum(len(units_in_bracket(tree, units, A))
                  for A in c.essential_brackets)
        assert rhs == h_value(tree, nrm)
        facets.append((nrm, rhs, c))
    minkowski = [unit_simplex(tree, u, collisions) for u in units]
    assert len(set(minkowski)) == len(minkowski), \
        'distinct units give distinct simplices'
    return PolytopeRealization(tree, vertices, facets, len(units), minkowski)


def support(vec):
    return frozenset(i for i, x in enumerate(vec) if x)


def verify_realization(real, fan=None):
    '''Cross-check the three descriptions of the polytope and its normal
    fan; raises AssertionError with a witness on any failure.'''
    tree = real.tree
    m = tree.m
    # hyperplane and vertex-facet incidence
    for p, b in real.vertices:
        assert sum(p) == real.total, (p, real.total)
        for nrm, rhs, c in real.facets:
            lhs = sum(x * y for x, y in zip(nrm, p))
            assert lhs >= rhs, ('facet violated', p, nrm, rhs)
            assert (lhs == rhs) == c.bracketing.leq(b), \
                ('equality pattern', p, nrm)
    pts = {p for p, _ in real.vertices}
    assert len(pts) == len(real.vertices), 'vertices are distinct'
    # exact H-to-V check: basic solutions of the inequality system are
    # exactly the computed vertices.
    rows = [list(nrm) for nrm, _, _ in real.facets]
    rhs = [r for _, r, _ in real.facets]
    basic = set()
    for sub in combinations(range(len(rows)), m - 1):
        mat = [rows[i] for i in sub] + [[1] * m]
        if linalg.rank(mat) < m:
            continue
        vec = [Fraction(rhs[i]) for i in sub] + [Fraction(real.total)]
        x = linalg.solve(mat, vec)
        if x is None:
            continue
        if all(sum(a * b for a, b in zip(row, x)) >= r
               for row, r in zip(rows, rhs)):
            basic.add(tuple(x))
    assert basic == pts, 'H- and V-descriptions must agree'
    # normal fan equals the velocity fan: the active facets at v(B) are the
    # rays of the chamber of B, and a relative-interior chamber point is
    # minimized uniquely at v(B).
    if fan is None:
        fan = build_fan(tree)
    for p, b in real.vertices:
        cone = fan.cone_of(b)
        probe = [sum(r[i] for r in cone.rays) for i in range(m)]
        vals = sorted((sum(a * b2 for a, b2 in zip(probe, q)), q)
                      for q in pts)
        assert vals[0][1] == p, 'chamber probes minimize at the vertex'
        assert len(vals) == 1 or vals[0][0] < vals[1][0], \
            'the chamber probe has a unique minimizer'
    # Minkowski description: each unit's simplex is a summand with
    # coefficient one, which pins down h on every 0/1 vector.
    for bits in product((0, 1), repeat=m):
        hv = h_value(tree, bits)
        mk = sum(1 for S in real.minkowski if S <= support(bits))
        assert hv == mk, ('minkowski support mismatch', bits, hv, mk)
    assert h_value(tree, ones(m)) == real.total
    # strict supermodularity across chambers
    for u in product((0, 1), repeat=m):
        for w in product((0, 1), repeat=m):
            join = tuple(max(a, b) for a, b in zip(u, w))
            meet = tuple(min(a, b) for a, b in zip(u, w))
            lhs = h_value(tree, u) + h_value(tree, w)
            rhs2 = h_value(tree, join) + h_value(tree, meet)
            shared = any(ch.contains(u) and ch.contains(w)
                         for ch in fan.chambers)
            assert (lhs == rhs2) if shared else (lhs < rhs2), (u, w)
    return True


# -- constrainahedra -------------------------------------------------------------

def concentrated_trees(ts):
    '''All concentrated trees of a profile, one per choice of fertile
    vertex at each intermediate depth.'''
    n = len(ts)
    out = []
    for fert in product(*[range(t + 1) for t in ts[:-1]]):
        spec = tuple(() for _ in range(ts[-1] + 1))
        for k in range(n - 1, 0, -1):
            row = [() for _ in range(ts[k - 1] + 1)]
            row[fert[k - 1]] = spec
            spec = tuple(row)
        out.append(RootedPlaneTree(spec))
    return out


def grid_units(ts):
    '''Constrainahedral collision units: the unit patterns of the profile
    read on hyperplane labels 1..t_k+1 per level.'''
    n = len(ts)
    units = []
    for k in range(1, n + 1):
        for a, b in combinations(range(1, ts[k - 1] + 2), 2):
            ent = [None] * n
            ent[k - 1] = (a, b)
            units.append(tuple(ent))
    adjacent = {k: [(a, a + 1) for a in range(1, ts[k - 1] + 1)]
                for k in range(1, n + 1)}
    for r in range(2, n + 1):
        for ks in combinations(range(1, n + 1), r):
            for pick in product(*[adjacent[k] for k in ks]):
                ent = [None] * n
                for k, pair in zip(ks, pick):
                    ent[k - 1] = pair
                units.append(tuple(ent))
    return units


def _grid_coords(ts, u):
    out = set()
    off = [sum(ts[:k]) for k in range(len(ts))]
    for k, e in enumerate(u, start=1):
        if e is None:
            continue
        a, b = e
        out.update(range(off[k - 1] + a - 1, off[k - 1] + b - 1))
    return frozenset(out)


def constrainahedron_support(ts, v):
    '''The support function of C(t) on a 0/1 vector: the number of grid
    units whose coordinates all lie in the support.'''
    sup = support(v)
    return sum(1 for u in grid_units(ts) if _grid_coords(ts, u) <= sup)


def _strict(f, v, w):
    join = tuple(max(a, b) for a, b in zip(v, w))
    meet = tuple(min(a, b) for a, b in zip(v, w))
    return f(v) + f(w) < f(join) + f(meet)


def constrainahedron(ts, max_m=DEFAULT_MAX_M):
    '''C'(t): the Minkowski sum of the realizations of all concentrated
    trees of the profile, certified normally equivalent to the reference
    constrainahedron by matching strict-supermodularity patterns on all
    0/1 vectors.'''
    m = sum(ts)
    if m > max_m:
        raise ValueError(f'scale guard: profile size {m} exceeds {max_m}')
    trees = concentrated_trees(ts)
    reals = [realize(t, max_m=max_m) for t in trees]

    def f_sum(v):
        return sum(h_value(t, v) for t in trees)

    def f_ref(v):
        return constrainahedron_support(ts, v)

    grid = list(product((0, 1), repeat=m))
    for v in grid:
        for w in grid:
            assert _strict(f_sum, v, w) == _strict(f_ref, v, w), \
                ('normal equivalence pattern', v, w)
    summands = [S for r in reals for S in r.minkowski]
    return {'profile': tuple(ts), 'trees': len(trees),
            'summands': sorted((sorted(S) for S in summands),
                               key=lambda S: (len(S), S)),
            'vertices': [r.to_json()['vertices'] for r in reals]}
