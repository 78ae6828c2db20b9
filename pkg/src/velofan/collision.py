r'''Collisions: atoms of the n-bracketing lattice, realized as tree maps.

A collision is an n-bracketing with a unique fusion bracket and no pair of
nested nontrivial brackets.  Equivalently, it is encoded by a quotient map of
rooted plane trees psi: T -> T~ which fuses a consecutive window W (|W| >= 2)
of children of some vertex u into a single child and may merge deeper
vertices, weakly order-preserving on each child list and jointly surjective.
The brackets of the collision are the preimages of the singleton brackets of
the quotient tree.

Both views are kept on a ``Collision``: the bracketing is canonical (it is
the hash key), and the quotient tree plus vertex map are derived lazily when
not supplied by the enumerator.
'''

from functools import cached_property, cmp_to_key
from itertools import combinations_with_replacement, product

from .bracketing import (Bracketing, bracket_contains, bracket_key,
                         bracket_level, derive_sing_order, is_nontrivial,
                         sibling_pairs, singleton_bracket, trivial_brackets,
                         truncate_bracketing)
from .plane_tree import RootedPlaneTree


class Collision:
    '''An atom of the n-bracketing lattice.

    The constructor accepts an optional precomputed tree map (quotient tree
    and vertex map) from the enumerator; otherwise the map is reconstructed
    from the bracketing on first use.
    '''

    def __init__(self, tree, bracketing, tree_map=None):
        assert bracketing.tree == tree
        assert bracketing.nontrivial_brackets(), \
            'a collision must contain a nontrivial bracket'
        self.tree = tree
        self.bracketing = bracketing
        self._map = tree_map

    @property
    def key(self):
        return self.bracketing.key

    def __eq__(self, other):
        return (isinstance(other, Collision)
                and self.tree == other.tree
                and self.bracketing == other.bracketing)

    def __hash__(self):
        return hash((self.tree, self.bracketing))

    def __repr__(self):
        nt = sorted(bracket_key(A) for A in self.nontrivial_brackets)
        return f'Collision({nt})'

    # -- bracket data ---------------------------------------------------------

    @cached_property
    def nontrivial_brackets(self):
        return tuple(sorted(self.bracketing.nontrivial_brackets(),
                            key=bracket_key))

    @cached_property
    def fusion_level(self):
        levels = set()
        for B in self.nontrivial_brackets:
            levels.add(next(l for l, lev in enumerate(B) if len(lev) >= 2))
        assert len(levels) == 1, 'fusion bracket must be unique'
        return levels.pop()

    @cached_property
    def fusion_bracket(self):
        f = self.fusion_level
        tops = {B[:f + 1] for B in self.nontrivial_brackets}
        assert len(tops) == 1, 'fusion bracket must be unique'
        return tops.pop()

    @cached_property
    def attach_vertex(self):
        '''The vertex whose children contain the fused window.'''
        (u,) = self.fusion_bracket[self.fusion_level - 1]
        return u

    @cached_property
    def root_bracket(self):
        return singleton_bracket(self.attach_vertex)

    @cached_property
    def window(self):
        '''The fused consecutive run of children, in plane order.'''
        return tuple(sorted(self.fusion_bracket[-1]))

    @cached_property
    def essential_brackets(self):
        '''Weak projections, through the fusion bracket, of the nontrivial
        brackets; the fusion bracket itself is always included.'''
        f, fus = self.fusion_level, self.fusion_bracket
        nts = self.nontrivial_brackets
        out = []
        for A in self.bracketing.brackets:
            if len(A) < f + 1 or A[:f + 1] != fus:
                continue
            if is_nontrivial(self.tree, A) or any(B[:len(A)] == A for B in nts):
                out.append(A)
        return tuple(sorted(out, key=lambda A: (len(A), bracket_key(A))))

    @cached_property
    def type_tag(self):
        n = self.tree.depth
        if self.fusion_level == n:
            return 1
        if any(bracket_level(A) < n for A in self.nontrivial_brackets):
            return 2
        return 3

    def is_minimal(self):
        '''Fusion of exactly two vertices with all deeper fibers singletons.'''
        if len(self.window) != 2:
            return False
        return all(len(A[-1]) == 1 for A in self.essential_brackets
                   if bracket_level(A) > self.fusion_level)

    # -- tree-map view --------------------------------------------------------

    @cached_property
    def tree_map(self):
        '''(quotient tree, psi) with psi mapping V(T) onto the quotient.'''
        if self._map is None:
            self._map = self._derive_map()
        return self._map

    @property
    def quotient_tree(self):
        return self.tree_map[0]

    @property
    def psi(self):
        return self.tree_map[1]

    @cached_property
    def fusion_vertex(self):
        '''Image in the quotient tree of the fused window.'''
        return self.psi[self.window[0]]

    def _derive_map(self):
        tree = self.tree
        f = self.fusion_level
        u = self.attach_vertex
        order = self.bracketing.sing_order
        by_parent = {}
        for A in self.essential_brackets:
            if bracket_level(A) > f:
                by_parent.setdefault(A[:-1], []).append(A)

        def kids_sorted(A):
            def cmp(B1, B2):
                v1, v2 = min(B1[-1]), min(B2[-1])
                if (v1, v2) in order:
                    return -1
                assert (v2, v1) in order, 'sibling fibers must be ordered'
                return 1
            return sorted(by_parent.get(A, []), key=cmp_to_key(cmp))

        relpath = {self.fusion_bracket: ()}

        def spec(A):
            out = []
            for j, B in enumerate(kids_sorted(A), start=1):
                relpath[B] = relpath[A] + (j,)
                out.append(spec(B))
            return tuple(out)

        fused_spec = spec(self.fusion_bracket)
        kids_u = tree.children(u)
        width = len(self.window)
        wstart = kids_u.index(self.window[0])
        assert kids_u[wstart:wstart + width] == self.window, \
            'fused window must be consecutive'
        qtree = RootedPlaneTree(
            _substitute(tree.nested, u, wstart, width, fused_spec))
        fused_path = u + (wstart + 1,)
        at_level = {}
        for A in relpath:
            at_level.setdefault(bracket_level(A), []).append(A)
        psi = {}
        for v in tree.vertices:
            if len(v) <= len(u) or v[:len(u)] != u:
                psi[v] = v
                continue
            j = v[len(u)]
            if j <= wstart:
                psi[v] = v
            elif j > wstart + width:
                psi[v] = u + (j - width + 1,) + v[len(u) + 1:]
            else:
                A = next(A for A in at_level[len(v)] if v in A[-1])
                psi[v] = fused_path + relpath[A]
        return qtree, psi

    def to_json(self):
        return {
            'bracketing': self.bracketing.to_json(),
            'quotient': self.quotient_tree.to_json(),
            'map': [[list(v), list(self.psi[v])] for v in self.tree.vertices],
        }


def collision_from_map(tree, qtree, psi):
    '''Build the collision alpha(psi) from a quotient map, or None when the
    map only produces trivial brackets (no actual collision happens).'''
    brackets = set(trivial_brackets(tree))
    for w in qtree.vertices:
        A = tuple(frozenset(v for v in tree.levels[l] if psi[v] == w[:l])
                  for l in range(len(w) + 1))
        brackets.add(A)
    if not any(is_nontrivial(tree, A) for A in brackets):
        return None
    seed = set(sibling_pairs(tree))
    for k in range(1, tree.depth + 1):
        lev = tree.levels[k]
        for v1 in lev:
            for v2 in lev:
                w1, w2 = psi[v1], psi[v2]
                if w1[:-1] == w2[:-1] and w1[-1] < w2[-1]:
                    seed.add((v1, v2))
    pairs = derive_sing_order(tree, brackets, seed)
    assert pairs is not None, 'collision map must induce a height order'
    return Collision(tree, Bracketing(tree, brackets, pairs),
                     tree_map=(qtree, psi))


# -- enumeration --------------------------------------------------------------

DEFAULT_MAX_M = 10


def enumerate_collisions(tree, max_m=DEFAULT_MAX_M):
    '''All collisions of the tree, enumerated through their tree maps:
    choose the attach vertex, the fused window, and a joint fiber structure
    for the descendants.'''
    if tree.m > max_m:
        raise ValueError(f'scale guard: m = {tree.m} exceeds {max_m}')
    seen = {}
    for u in tree.vertices:
        kids = tree.children(u)
        for width in range(2, len(kids) + 1):
            for start in range(len(kids) - width + 1):
                window = kids[start:start + width]
                for fused_spec, relmap in _fused_structures(tree, window):
                    qtree = RootedPlaneTree(
                        _substitute(tree.nested, u, start, width, fused_spec))
                    fused_path = u + (start + 1,)
                    psi = {}
                    for v in tree.vertices:
                        if len(v) <= len(u) or v[:len(u)] != u:
                            psi[v] = v
                            continue
                        j = v[len(u)]
                        if j <= start:
                            psi[v] = v
                        elif j > start + width:
                            psi[v] = u + (j - width + 1,) + v[len(u) + 1:]
                        else:
                            psi[v] = fused_path + relmap.get(v, ())
                    c = collision_from_map(tree, qtree, psi)
                    if c is None:
                        continue
                    assert c.bracketing not in seen, \
                        'collision maps are in bijection with collisions'
                    seen[c.bracketing] = c
    return sorted(seen.values(), key=lambda c: c.key)


def _fused_structures(tree, parents):
    '''Joint fiber structures below a set of fused parent vertices.

    Yields (spec, relmap): the children spec of the fused vertex and the map
    from each strict descendant of the parents to its relative path below the
    fused vertex (1-based indices).
    '''
    kid_lists = [tree.children(p) for p in parents]
    total = sum(len(k) for k in kid_lists)
    if total == 0:
        yield (), {}
        return
    for q in range(1, total + 1):
        for assign in _joint_assignments(kid_lists, q):
            groups = [[] for _ in range(q)]
            for kids, amap in zip(kid_lists, assign):
                for v, j in zip(kids, amap):
                    groups[j - 1].append(v)
            subgens = [list(_fused_structures(tree, tuple(sorted(g))))
                       for g in groups]
            for combo in product(*subgens):
                spec = tuple(s for s, _ in combo)
                relmap = {}
                for j, (g, (_, rm)) in enumerate(zip(groups, combo), start=1):
                    for v in g:
                        relmap[v] = (j,)
                    for v, rp in rm.items():
                        relmap[v] = (j,) + rp
                yield spec, relmap


def _joint_assignments(kid_lists, q):
    '''Per-parent weakly increasing maps into 1..q, jointly surjective.'''
    per = [list(combinations_with_replacement(range(1, q + 1), len(kids)))
           for kids in kid_lists]
    full = set(range(1, q + 1))
    for choice in product(*per):
        if set().union(*map(set, choice)) == full:
            yield choice


def _substitute(spec, path, start, width, fused):
    '''Replace the children window [start, start+width) of the vertex at
    ``path`` in a nested spec by the single subtree ``fused``.'''
    if not path:
        return spec[:start] + (fused,) + spec[start + width:]
    j = path[0]
    return (spec[:j - 1]
            + (_substitute(spec[j - 1], path[1:], start, width, fused),)
            + spec[j:])


# -- quotients and relations ---------------------------------------------------

def quotient(tree, c):
    '''The contracted tree T/C with its collision map.'''
    if not isinstance(c, Collision) or c.tree != tree:
        raise ValueError('quotient requires a collision on the given tree')
    return c.quotient_tree, dict(c.psi)


def compatible(c1, c2):
    return c1.bracketing.join(c2.bracketing) is not None


def contained(c1, c2):
    '''c1 -> c2: compatibility plus levelwise essential-bracket containment.'''
    if c1.tree != c2.tree:
        raise ValueError('collisions live on different trees')
    if not compatible(c1, c2):
        return False
    for A1 in c1.essential_brackets:
        k = bracket_level(A1)
        if not any(bracket_contains(A1, A2) for A2 in c2.essential_brackets
                   if bracket_level(A2) == k):
            return False
    return True


def disjoint(c1, c2):
    '''c1 ~ c2: the fused windows have disjoint weak-descendant sets.'''
    if c1.tree != c2.tree:
        raise ValueError('collisions live on different trees')
    tree = c1.tree
    d1 = set().union(*(tree.weak_descendants(w) for w in c1.window))
    d2 = set().union(*(tree.weak_descendants(w) for w in c2.window))
    return not (d1 & d2)


def relate(c1, c2):
    '''One of 'equal', 'contained' (c1 -> c2), 'contains' (c2 -> c1),
    'disjoint', 'compatible', 'incompatible'.'''
    if c1 == c2:
        return 'equal'
    if disjoint(c1, c2):
        return 'disjoint'
    if contained(c1, c2):
        return 'contained'
    if contained(c2, c1):
        return 'contains'
    return 'compatible' if compatible(c1, c2) else 'incompatible'


def adjacent(c1, c2):
    '''Edge of the undirected collision graph: -> in either direction or ~.'''
    return relate(c1, c2) in ('contained', 'contains', 'disjoint')


def containment_minimal_in(c, b):
    '''No nontrivial bracket of b sits properly inside a bracket of c.'''
    if not c.bracketing.leq(b):
        raise ValueError('collision is not below the bracketing')
    nts = b.nontrivial_brackets()
    for A in c.nontrivial_brackets:
        k = bracket_level(A)
        for A2 in nts:
            if bracket_level(A2) == k and A2 != A and bracket_contains(A2, A):
                return False
    return True


def quotient_bracketing(b, c):
    '''The image of a bracketing b >= c in the lattice of the quotient tree.'''
    joined = b.join(c.bracketing)
    assert joined is not None, 'bracketing must be compatible with collision'
    qtree, psi = c.tree_map
    brackets = set(trivial_brackets(qtree))
    for A in joined.brackets:
        brackets.add(tuple(frozenset(psi[v] for v in lev) for lev in A))
    seed = set(sibling_pairs(qtree))
    for v1, v2 in joined.sing_order:
        if psi[v1] != psi[v2]:
            seed.add((psi[v1], psi[v2]))
    pairs = derive_sing_order(qtree, brackets, seed)
    assert pairs is not None, 'quotient order must be consistent'
    return Bracketing(qtree, brackets, pairs)


def quotient_collision(c_big, c_small):
    '''Decompose the image of c_big in the quotient by c_small into pairwise
    disjoint collisions (a single one when the fusion brackets differ).'''
    if c_big == c_small:
        return []
    if not contained(c_small, c_big):
        raise ValueError('quotient_collision requires c_small -> c_big')
    bbar = quotient_bracketing(c_big.bracketing, c_small)
    parts = split_disjoint(bbar)
    if c_big.fusion_bracket != c_small.fusion_bracket:
        assert len(parts) == 1
    for p1, p2 in product(parts, parts):
        assert p1 == p2 or disjoint(p1, p2)
    return parts


def split_disjoint(b):
    '''Split a union of pairwise disjoint collisions into its components.'''
    groups = {}
    for B in b.nontrivial_brackets():
        f = next(l for l, lev in enumerate(B) if len(lev) >= 2)
        groups.setdefault(B[:f + 1], []).append(B)
    parts = []
    for group in groups.values():
        brackets = set(trivial_brackets(b.tree)) | set(group)
        parts.append(Collision(b.tree, b.restrict_order(brackets)))
    return sorted(parts, key=lambda c: c.key)


def truncate_collision(c):
    '''The image of a collision under deletion of the deepest tree level.

    Returns a collision on the truncated tree when one survives (type 2),
    and None when the image is the minimal bracketing (types 1 and 3).
    '''
    tb = truncate_bracketing(c.bracketing)
    if not tb.nontrivial_brackets():
        assert c.type_tag in (1, 3)
        return None
    assert c.type_tag == 2
    return Collision(tb.tree, tb)


def lift_collision(c, cbar):
    '''The unique preimage collision of cbar (living on T/C) under c.'''
    tree = c.tree
    qtree, psi = c.tree_map
    if cbar.tree != qtree:
        raise ValueError('cbar must live on the quotient tree of c')
    wf = c.fusion_vertex
    brackets = set(trivial_brackets(tree))

    def preim(Abar):
        return tuple(frozenset(v for v in tree.levels[l] if psi[v] in Abar[l])
                     for l in range(len(Abar)))

    for B in cbar.nontrivial_brackets:
        brackets.add(preim(B))
    uprime = cbar.attach_vertex
    if len(uprime) >= len(wf) and uprime[:len(wf)] == wf:
        # the lifted collision contains c's own fibers wherever cbar does not
        # merge them further
        nts_at = {}
        for B in cbar.nontrivial_brackets:
            nts_at.setdefault(bracket_level(B), []).append(B)
        for w in qtree.weak_descendants(wf):
            if not any(w in B[-1] for B in nts_at.get(len(w), [])):
                brackets.add(preim(singleton_bracket(w)))
    seed = set(sibling_pairs(tree))
    for k in range(1, tree.depth + 1):
        for v1 in tree.levels[k]:
            for v2 in tree.levels[k]:
                if v1 != v2 and (psi[v1], psi[v2]) in cbar.bracketing.sing_order:
                    seed.add((v1, v2))
    pairs = derive_sing_order(tree, brackets, seed)
    assert pairs is not None, 'lifted order must be consistent'
    lifted = Collision(tree, Bracketing(tree, brackets, pairs))
    assert contained(c, lifted) or disjoint(c, lifted)
    return lifted
