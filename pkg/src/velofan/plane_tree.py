r'''Rooted plane trees.

A rooted plane tree is a rooted tree together with a total order on the
children of each vertex.  Vertices are encoded by their root paths: the root
is the empty tuple ``()``, and the j-th child (1-based) of a vertex ``v`` is
``v + (j,)``.  Lexicographic order on these tuples restricted to the vertices
of a fixed depth k gives the canonical left-to-right order, so the i-th
depth-k vertex (1-based) is ``tree.levels[k][i-1]``.

The constructions downstream (bracketings, collisions, fans) require the tree
not to be a path; a path of depth n has no n-bracketings.
'''

from functools import cached_property


class RootedPlaneTree:
    '''Immutable rooted plane tree with the canonical vertex order.

    nested -- nested tuples/lists describing the children structure,
              e.g. ((), (), ()) is the root with three leaves.
    '''

    def __init__(self, nested):
        verts = [()]

        def walk(prefix, spec):
            for j, child in enumerate(spec, start=1):
                v = prefix + (j,)
                verts.append(v)
                walk(v, child)

        walk((), nested)
        self.nested = _freeze(nested)
        self.vertices = tuple(sorted(verts))
        self.vertex_set = frozenset(verts)
        self.depth = max((len(v) for v in verts), default=0)

    # -- basic structure ---------------------------------------------------

    @cached_property
    def levels(self):
        '''levels[k] = tuple of depth-k vertices in left-to-right order.'''
        out = [[] for _ in range(self.depth + 1)]
        for v in self.vertices:
            out[len(v)].append(v)
        return tuple(tuple(sorted(l)) for l in out)

    @cached_property
    def index(self):
        '''Map vertex -> its 1-based position among same-depth vertices.'''
        return {v: i for lev in self.levels for i, v in enumerate(lev, start=1)}

    def vertex(self, k, i):
        '''The i-th (1-based) depth-k vertex.'''
        return self.levels[k][i - 1]

    def parent(self, v):
        return v[:-1]

    def children(self, v):
        k = len(v)
        if k + 1 > self.depth:
            return ()
        return tuple(w for w in self.levels[k + 1] if w[:-1] == v)

    def descendants(self, v):
        return tuple(w for w in self.vertices if len(w) > len(v) and w[:len(v)] == v)

    def weak_descendants(self, v):
        return (v,) + self.descendants(v)

    @cached_property
    def profile(self):
        '''t_k = |V^k| - 1 for k = 1..n.'''
        return tuple(len(self.levels[k]) - 1 for k in range(1, self.depth + 1))

    @property
    def m(self):
        '''Ambient dimension of the velocity fan.'''
        return sum(self.profile)

    @cached_property
    def coords(self):
        '''Coordinate labels (k, i) in block order, i ranging over 1..t_k.'''
        return tuple((k, i) for k in range(1, self.depth + 1)
                     for i in range(1, len(self.levels[k])))

    def is_path(self):
        return all(len(self.children(v)) <= 1 for v in self.vertices)

    def is_concentrated(self):
        '''At most one vertex per depth below n has children.'''
        for k in range(self.depth):
            fertile = [v for v in self.levels[k] if self.children(v)]
            if len(fertile) > 1:
                return False
        return True

    def edge_count(self):
        return len(self.vertices) - 1

    # -- derived trees -----------------------------------------------------

    def truncate(self, levels=1):
        '''Delete the ``levels`` deepest depth classes.'''
        if not 0 <= levels <= self.depth:
            raise ValueError('truncation out of range')
        cutoff = self.depth - levels
        keep = {v for v in self.vertices if len(v) <= cutoff}
        return RootedPlaneTree(_nested_from_vertices(keep))

    def subtree(self, root, kids=None):
        '''The subtree rooted at ``root``; optionally restricted to the
        consecutive child tuple ``kids``.

        Returns (tree, old_to_new) where old_to_new maps original vertices of
        the subtree to vertices of the returned tree.
        '''
        if kids is None:
            kids = self.children(root)
        verts = {root}
        for w in kids:
            verts.update(self.weak_descendants(w))
        return _renumber(verts, root)

    def restrict_to_vertices(self, verts, root=()):
        '''Rooted plane subtree induced by ``verts`` (must be closed under
        parents down to ``root``).  Returns (tree, old_to_new).'''
        return _renumber(set(verts), root)

    # -- serialization -----------------------------------------------------

    def serialize(self):
        def ser(v):
            return '(' + ''.join(ser(w) for w in self.children(v)) + ')'
        return ser(())

    def to_json(self):
        def enc(v):
            return [enc(w) for w in self.children(v)]
        return {'depth': self.depth, 'children': enc(())}

    def __eq__(self, other):
        return isinstance(other, RootedPlaneTree) and self.nested == other.nested

    def __hash__(self):
        return hash(self.nested)

    def __repr__(self):
        return f'RootedPlaneTree({self.serialize()!r})'


def _freeze(spec):
    return tuple(_freeze(c) for c in spec)


def _nested_from_vertices(verts):
    def build(prefix):
        kids = sorted(v for v in verts if len(v) == len(prefix) + 1
                      and v[:len(prefix)] == prefix)
        return tuple(build(v) for v in kids)
    return build(())


def _renumber(verts, root):
    '''Build a fresh tree from a vertex subset rooted at ``root``.'''
    if root not in verts:
        raise ValueError('root not among vertices')
    old_to_new = {root: ()}

    def build(old):
        kids = sorted(v for v in verts if len(v) == len(old) + 1
                      and v[:len(old)] == old)
        out = []
        for j, w in enumerate(kids, start=1):
            old_to_new[w] = old_to_new[old] + (j,)
            out.append(build(w))
        return tuple(out)

    nested = build(root)
    return RootedPlaneTree(nested), old_to_new


def parse_tree(text):
    '''Parse balanced-parenthesis notation or profile shorthand.

    Grammar: ``tree := "(" tree* ")"`` with the outermost pair standing for
    the root.  Profile shorthand ``"<n>A:t1,...,tk"``:

    * n == 1: ``1A:t`` is the root with t+1 leaves;
    * n == 2: ``2A:t1,...,tk`` is the root with k depth-1 children, the i-th
      carrying t_i leaves;
    * n >= 3: requires k == n and gives the concentrated tree with t_j + 1
      vertices at depth j, all depth-(j+1) vertices under the first
      depth-j vertex.

    Depth-n paths are rejected: they admit no n-bracketings.
    '''
    text = text.strip()
    if 'A:' in text:
        tree = _parse_profile(text)
    else:
        tree = _parse_parens(text)
    if tree.is_path() and tree.depth >= 1:
        raise ValueError('tree is a path; n-bracketings require at least '
                         'n+1 edges')
    return tree


def _parse_parens(text):
    pos = 0

    def node():
        nonlocal pos
        if pos >= len(text) or text[pos] != '(':
            raise ValueError(f'expected "(" at position {pos}')
        pos += 1
        kids = []
        while pos < len(text) and text[pos] == '(':
            kids.append(node())
        if pos >= len(text) or text[pos] != ')':
            raise ValueError(f'expected ")" at position {pos}')
        pos += 1
        return tuple(kids)

    spec = node()
    if pos != len(text):
        raise ValueError('trailing characters after tree expression')
    return RootedPlaneTree(spec)


def _parse_profile(text):
    head, _, rest = text.partition('A:')
    n = int(head)
    entries = [int(x) for x in rest.split(',')]
    if n == 1:
        if len(entries) != 1:
            raise ValueError('1A: profile takes a single entry')
        return RootedPlaneTree(tuple(() for _ in range(entries[0] + 1)))
    if n == 2:
        return RootedPlaneTree(tuple(tuple(() for _ in range(t))
                                     for t in entries))
    if len(entries) != n:
        raise ValueError(f'{n}A: profile requires exactly {n} entries')
    return concentrated_tree(entries)


def concentrated_tree(ts):
    '''Concentrated tree of profile (t_1, ..., t_n), t_j + 1 vertices at
    depth j, all hanging under the first fertile vertex of depth j-1.'''
    spec = ()
    for t in reversed(ts):
        spec = (spec,) + tuple(() for _ in range(t))
    return RootedPlaneTree(spec)


def enumerate_trees(max_vertices, include_paths=False):
    '''All rooted plane trees with at most ``max_vertices`` vertices.

    Paths are skipped by default since they admit no bracketings.
    '''
    def forests(budget):
        # ordered forests with exactly `budget` vertices
        if budget == 0:
            yield ()
            return
        for first in range(1, budget + 1):
            for head in trees(first):
                for tail in forests(budget - first):
                    yield (head,) + tail

    def trees(size):
        # single trees with exactly `size` vertices (including the root)
        for spec in forests(size - 1):
            yield spec

    out = []
    for size in range(1, max_vertices + 1):
        for spec in trees(size):
            t = RootedPlaneTree(spec)
            if not include_paths and t.depth >= 1 and t.is_path():
                continue
            out.append(t)
    return out
