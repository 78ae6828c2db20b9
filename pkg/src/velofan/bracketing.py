r'''k-brackets, n-bracketings, and the lattice of bracketings.

A k-bracket is a tuple ``A = (A^0, ..., A^k)`` of vertex subsets, one per
depth, closed under taking parents and meeting each child list in a
consecutive run.  We represent a bracket as a tuple of frozensets of
vertices.

An n-bracketing is a collection of brackets (containing all singleton
brackets and all maximum brackets, closed under truncation, nested, and
satisfying the partition condition) together with a height partial order on
same-level brackets with disjoint tops and equal truncations.  The height
order is recoverable from its restriction to singleton brackets, so a
``Bracketing`` stores exactly that restriction: a set of ordered same-depth
vertex pairs.  This doubles as the canonical form used for hashing and
deduplication.
'''

from functools import cached_property
from itertools import combinations


# -- brackets ---------------------------------------------------------------

def singleton_bracket(u):
    '''The singleton bracket of a vertex: its root path.'''
    return tuple(frozenset({u[:i]}) for i in range(len(u) + 1))


def maximum_bracket(tree, k):
    return tuple(frozenset(tree.levels[i]) for i in range(k + 1))


def bracket_level(A):
    return len(A) - 1


def truncate_bracket(A, times=1):
    if times >= len(A):
        raise ValueError('cannot truncate below the 0-bracket')
    return A[:len(A) - times]


def is_singleton(A):
    return all(len(level) == 1 for level in A)


def is_maximum(tree, A):
    return all(set(level) == set(tree.levels[i]) for i, level in enumerate(A))


def is_nontrivial(tree, A):
    return not is_singleton(A) and not is_maximum(tree, A)


def bracket_contains(A1, A2):
    '''A1 <= A2 levelwise (A1 contained in A2); requires equal levels.'''
    return len(A1) == len(A2) and all(a <= b for a, b in zip(A1, A2))


def is_valid_bracket(tree, A):
    if not A or A[0] != frozenset({()}):
        return False
    for i, level in enumerate(A):
        if any(len(v) != i or v not in tree.vertex_set for v in level):
            return False
        if i == 0:
            continue
        for v in level:
            if v[:-1] not in A[i - 1]:
                return False
        for u in A[i - 1]:
            kids = tree.children(u)
            hits = [j for j, w in enumerate(kids) if w in level]
            if hits and hits != list(range(hits[0], hits[-1] + 1)):
                return False
    return True


def bracket_key(A):
    return tuple(tuple(sorted(level)) for level in A)


# -- bracketings ------------------------------------------------------------

class Bracketing:
    '''An n-bracketing: bracket set plus singleton height order.

    ``sing_order`` is the extended height partial order restricted to
    singleton brackets, stored as a frozenset of ordered pairs of same-depth
    vertices (u, v) meaning A(u) below A(v).
    '''

    def __init__(self, tree, brackets, sing_order):
        self.tree = tree
        self.brackets = frozenset(brackets)
        self.sing_order = frozenset(sing_order)

    @classmethod
    def minimal(cls, tree):
        return cls(tree, trivial_brackets(tree), sibling_pairs(tree))

    @cached_property
    def key(self):
        return (tuple(sorted(bracket_key(A) for A in self.brackets)),
                tuple(sorted(self.sing_order)))

    def __eq__(self, other):
        return isinstance(other, Bracketing) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        nt = sorted(bracket_key(A) for A in self.nontrivial_brackets())
        return f'Bracketing({nt})'

    # -- structure ----------------------------------------------------------

    @cached_property
    def by_level(self):
        out = {}
        for A in self.brackets:
            out.setdefault(bracket_level(A), set()).add(A)
        return out

    def nontrivial_brackets(self):
        return [A for A in self.brackets if is_nontrivial(self.tree, A)]

    def brackets_over(self, A):
        '''The set of brackets truncating to A.'''
        k = bracket_level(A)
        return [B for B in self.by_level.get(k + 1, ())
                if truncate_bracket(B) == A]

    def comparable(self, A1, A2):
        '''Whether two brackets must be height-comparable.'''
        return (A1 != A2 and bracket_level(A1) == bracket_level(A2)
                and truncate_bracket(A1) == truncate_bracket(A2)
                and not (A1[-1] & A2[-1]))

    def below(self, A1, A2):
        '''A1 strictly below A2 in the height order (assumes comparability).'''
        u = next(iter(A1[-1]))
        v = next(iter(A2[-1]))
        return (u, v) in self.sing_order

    def rank(self):
        '''Number of nontrivial brackets counted with height multiplicity is
        not the right notion; the poset rank is computed by the enumerator.
        Here we expose the count of nontrivial brackets, an upper bound.'''
        return len(self.nontrivial_brackets())

    def leq(self, other):
        return (self.brackets <= other.brackets
                and self.sing_order <= other.sing_order)

    # -- join ---------------------------------------------------------------

    def join(self, other):
        '''Least upper bound, or None for the formal top element.'''
        assert self.tree == other.tree
        brackets = self.brackets | other.brackets
        by_level = {}
        for A in brackets:
            by_level.setdefault(bracket_level(A), []).append(A)
        # (nested)
        for k, bs in by_level.items():
            for A1, A2 in combinations(bs, 2):
                if A1[-1] & A2[-1]:
                    if not (bracket_contains(A1, A2) or bracket_contains(A2, A1)):
                        return None
        pairs = derive_sing_order(self.tree, brackets,
                                  self.sing_order | other.sing_order)
        if pairs is None:
            return None
        return Bracketing(self.tree, brackets, pairs)

    def restrict_order(self, brackets):
        '''Bracketing on a subset of brackets with the induced height order.'''
        pairs = derive_sing_order(self.tree, brackets, sibling_pairs(self.tree),
                                  ambient=self.sing_order)
        assert pairs is not None
        return Bracketing(self.tree, brackets, pairs)

    def to_json(self):
        return {
            'brackets': [[[list(v) for v in sorted(lev)] for lev in A]
                         for A in sorted(self.brackets, key=bracket_key)],
            'order': [[list(u), list(v)] for u, v in sorted(self.sing_order)],
        }


def trivial_brackets(tree):
    out = {maximum_bracket(tree, k) for k in range(tree.depth + 1)}
    out.update(singleton_bracket(u) for u in tree.vertices)
    return out


def sibling_pairs(tree):
    '''Base height order: singleton brackets of siblings follow the plane
    order.'''
    pairs = set()
    for u in tree.vertices:
        kids = tree.children(u)
        for a, b in combinations(kids, 2):
            pairs.add((a, b))
    return frozenset(pairs)


def derive_sing_order(tree, brackets, seed, ambient=None):
    '''Close a seed relation into the full singleton height order.

    Directions of comparable bracket pairs propagate to all their vertex
    pairs, and the relation is kept transitively closed per depth.  When
    ``ambient`` is given, undirected comparable pairs draw their direction
    from it (used for restricting a larger bracketing's order).  Returns the
    closed pair set, or None on an antisymmetry conflict.
    '''
    by_level = {}
    for A in brackets:
        by_level.setdefault(bracket_level(A), []).append(A)
    comp_pairs = []
    for k, bs in by_level.items():
        for A1, A2 in combinations(bs, 2):
            if (truncate_bracket(A1) == truncate_bracket(A2)
                    and not (A1[-1] & A2[-1])):
                comp_pairs.append((A1, A2))
    pairs = set(seed)
    while True:
        before = len(pairs)
        for A1, A2 in comp_pairs:
            lo, hi = None, None
            if any((u, v) in pairs for u in A1[-1] for v in A2[-1]):
                lo, hi = A1, A2
            elif any((v, u) in pairs for u in A1[-1] for v in A2[-1]):
                lo, hi = A2, A1
            elif ambient is not None:
                u = next(iter(A1[-1]))
                v = next(iter(A2[-1]))
                if (u, v) in ambient:
                    lo, hi = A1, A2
                elif (v, u) in ambient:
                    lo, hi = A2, A1
            if lo is not None:
                pairs.update((u, v) for u in lo[-1] for v in hi[-1])
        _transitive_close(pairs)
        if len(pairs) == before:
            break
    if any((v, u) in pairs for (u, v) in pairs):
        return None
    if any(u == v for (u, v) in pairs):
        return None
    return frozenset(pairs)


def _transitive_close(pairs):
    changed = True
    while changed:
        changed = False
        succ = {}
        for a, b in pairs:
            succ.setdefault(a, set()).add(b)
        for a, bs in list(succ.items()):
            for b in list(bs):
                for c in succ.get(b, ()):
                    if (a, c) not in pairs:
                        pairs.add((a, c))
                        changed = True


def truncate_bracketing(b):
    '''Push an n-bracketing down to the tree with its deepest level deleted.

    Depth-n brackets lose their top level; everything else is carried over
    verbatim.  The singleton height order is the propagation closure of the
    restriction to the surviving vertices.
    '''
    tree = b.tree
    n = tree.depth
    assert n >= 1
    ptree = tree.truncate()
    brackets = frozenset(
        truncate_bracket(A) if bracket_level(A) == n else A
        for A in b.brackets)
    seed = {(u, v) for u, v in b.sing_order
            if len(u) < n and len(v) < n}
    seed.update(sibling_pairs(ptree))
    order = derive_sing_order(ptree, brackets, seed)
    assert order is not None
    out = Bracketing(ptree, brackets, order)
    assert not validate_bracketing(ptree, out)
    return out


# -- validation -------------------------------------------------------------

def validate_bracketing(tree, b):
    '''Return a list of axiom violations (empty list means valid).'''
    errors = []
    for A in b.brackets:
        if not is_valid_bracket(tree, A):
            errors.append(f'invalid bracket {bracket_key(A)}')
    if errors:
        return errors
    if not trivial_brackets(tree) <= b.brackets:
        errors.append('(trivial k-brackets): missing singleton or maximum '
                      'bracket')
    for A in b.brackets:
        if bracket_level(A) >= 1 and truncate_bracket(A) not in b.brackets:
            errors.append(f'(k-bracketing projection): {bracket_key(A)}')
    for k, bs in b.by_level.items():
        for A1, A2 in combinations(bs, 2):
            if A1[-1] & A2[-1]:
                if not (bracket_contains(A1, A2) or bracket_contains(A2, A1)):
                    errors.append(f'(nested): {bracket_key(A1)} vs '
                                  f'{bracket_key(A2)}')
    # (partition)
    for A in b.brackets:
        k = bracket_level(A)
        if k == tree.depth:
            continue
        over = b.brackets_over(A)
        covered = set().union(*[B[-1] for B in over]) if over else set()
        expected = {w for u in A[-1] for w in tree.children(u)}
        if covered != expected:
            errors.append(f'(partition/cover): bracket {bracket_key(A)}')
        for A1 in over:
            if not any(bracket_contains(A2, A1) and A2 != A1 for A2 in over):
                continue
            for u2 in A1[-1]:
                if not any(bracket_contains(A3, A1) and A3 != A1
                           and u2 in A3[-1] for A3 in over):
                    errors.append('(partition/refine): bracket '
                                  f'{bracket_key(A1)} at vertex {u2}')
    # (height partial orders)
    if any(u == v or (v, u) in b.sing_order for (u, v) in b.sing_order):
        errors.append('(height): order is not antisymmetric/irreflexive')
    if not sibling_pairs(tree) <= b.sing_order:
        errors.append('(height): sibling base order missing')
    closed = derive_sing_order(tree, b.brackets, b.sing_order)
    if closed is None or closed != b.sing_order:
        errors.append('(height): order not closed under propagation')
    for k, bs in b.by_level.items():
        for A1, A2 in combinations(bs, 2):
            if b.comparable(A1, A2):
                fwd = all((u, v) in b.sing_order
                          for u in A1[-1] for v in A2[-1])
                bwd = all((v, u) in b.sing_order
                          for u in A1[-1] for v in A2[-1])
                if not (fwd or bwd):
                    errors.append('(height): undirected comparable pair '
                                  f'{bracket_key(A1)} / {bracket_key(A2)}')
    return errors


# -- enumeration ------------------------------------------------------------

class BracketingPoset:
    '''The poset of all n-bracketings of a tree, ordered by inclusion.'''

    def __init__(self, tree, elements):
        self.tree = tree
        self.elements = sorted(elements, key=lambda b: b.key)
        self.index = {b: i for i, b in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def leq(self, b1, b2):
        return b1.leq(b2)

    @cached_property
    def minimum(self):
        return Bracketing.minimal(self.tree)

    @cached_property
    def atoms(self):
        covers_min = []
        for b in self.elements:
            if b == self.minimum:
                continue
            if not any(c != b and c != self.minimum and c.leq(b)
                       for c in self.elements):
                covers_min.append(b)
        return covers_min

    @cached_property
    def maximal(self):
        return [b for b in self.elements
                if not any(b != c and b.leq(c) for c in self.elements)]

    @cached_property
    def _rank_map(self):
        order = sorted(self.elements,
                       key=lambda b: (len(b.brackets), len(b.sing_order)))
        rank = {}
        for b in order:
            below = [rank[c] for c in order
                     if c in rank and c != b and c.leq(b)]
            rank[b] = 1 + max(below) if below else 0
        return rank

    def rank(self, b):
        return self._rank_map[b]

    def covers(self, b):
        '''Elements covering b.'''
        above = [c for c in self.elements if c != b and b.leq(c)]
        return [c for c in above
                if not any(d != c and d != b and b.leq(d) and d.leq(c)
                           for d in above)]

    def meet(self, b1, b2):
        lower = [c for c in self.elements if c.leq(b1) and c.leq(b2)]
        tops = [c for c in lower if not any(c != d and c.leq(d) for d in lower)]
        assert len(tops) == 1, 'meet must be unique in a lattice'
        return tops[0]


DEFAULT_MAX_M = 6


def enumerate_bracketings(tree, max_m=DEFAULT_MAX_M):
    '''Enumerate the full poset of n-bracketings by closing the set of
    collisions under pairwise joins (the lattice is atomic).'''
    if tree.m > max_m:
        raise ValueError(f'scale guard: m = {tree.m} exceeds {max_m}')
    from .collision import enumerate_collisions
    collisions = [c.bracketing for c in enumerate_collisions(tree)]
    bmin = Bracketing.minimal(tree)
    elements = {bmin}
    elements.update(collisions)
    frontier = list(elements)
    while frontier:
        new = []
        for b in frontier:
            for c in collisions:
                j = b.join(c)
                if j is not None and j not in elements:
                    elements.add(j)
                    new.append(j)
        frontier = new
    return BracketingPoset(tree, elements)
