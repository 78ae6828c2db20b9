r'''T-shuffles and the adjoint permutation transformations.

A shuffle is a tuple (sigma^1, ..., sigma^n) of one-line permutations, one
per tree level, subject to the riffle condition: vertices that appear out of
their original order must have distinct parents (equivalently, every sibling
block stays in its own relative order).  Geometrically a shuffle records how
coordinate subspaces may pass each other during a collision, and its effect
on velocity vectors is captured by the adjoint permutation transformation
P^T_sigma, a block-diagonal integer matrix with one (t_k x t_k) block per
level acting on consecutive differences:

    (P^T_sigma vbar)_i = v_{sigma(i)} - v_{sigma(i+1)}.

P_sigma is the permutation matrix written in the basis of positive simple
roots of the A_{t_k} root lattice; it is totally unimodular and satisfies
P_{s1} P_{s2} = P_{s1 o s2}, so all these matrices lie in GL_m(Z).

A shuffle is compatible with a collision C when consecutive vertices under
sigma map to equal or consecutive vertices of the contracted tree; then
P^T_sigma(rho(C) - 1) + 1 is a 0/1 vector flagging which sigma-consecutive
pairs share an essential bracket.  Every shuffle counts as compatible with
the minimal bracketing, which is represented here by ``None`` and has
rho = 1.
'''

from functools import cached_property
from itertools import permutations, product

from . import linalg
from .collision import Collision, contained, disjoint
from .velocity_fan import ones, ray_generator


def _is_riffle(tree, k, perm):
    '''Whether the one-line permutation of level k keeps sibling order.'''
    lvl = tree.levels[k]
    seen = []
    for a in perm:
        u = lvl[a - 1]
        if any(tree.parent(u) == tree.parent(w) and w > u for w in seen):
            return False
        seen.append(u)
    return True


class Shuffle:
    '''A tuple of per-level one-line permutations satisfying the riffle
    condition of the tree.'''

    def __init__(self, tree, perms):
        perms = tuple(tuple(p) for p in perms)
        assert len(perms) == tree.depth
        for k, p in enumerate(perms, start=1):
            assert sorted(p) == list(range(1, len(tree.levels[k]) + 1)), \
                'each level needs a permutation of its vertex indices'
            assert _is_riffle(tree, k, p), 'sibling order must be preserved'
        self.tree = tree
        self.perms = perms

    @classmethod
    def identity(cls, tree):
        return cls(tree, [tuple(range(1, len(tree.levels[k]) + 1))
                          for k in range(1, tree.depth + 1)])

    @property
    def is_identity(self):
        return all(p == tuple(range(1, len(p) + 1)) for p in self.perms)

    def __eq__(self, other):
        return self.tree == other.tree and self.perms == other.perms

    def __hash__(self):
        return hash((self.tree, self.perms))

    def __repr__(self):
        return 'Shuffle%s' % (self.serialize(),)

    def serialize(self):
        '''One-line notation per level, e.g. "(12)(312)".'''
        out = []
        for p in self.perms:
            if max(p) > 9:
                out.append('(%s)' % ','.join(map(str, p)))
            else:
                out.append('(%s)' % ''.join(map(str, p)))
        return ''.join(out)

    @cached_property
    def adjoint(self):
        return adjoint_matrix(self)


def adjoint_block(perm):
    '''P^T_sigma for an abstract one-line permutation of [t+1], as a t x t
    integer matrix over the positive simple roots.'''
    return _block(perm, True)


def perm_block(perm):
    '''P_sigma for an abstract one-line permutation of [t+1].'''
    return _block(perm, False)


def _block(perm, transpose):
    t = len(perm) - 1
    rows = []
    for i in range(1, t + 1):
        row = [0] * t
        for j in range(1, t + 1):
            if perm[i - 1] <= j < perm[i]:
                row[j - 1] = 1
            elif perm[i - 1] > j >= perm[i]:
                row[j - 1] = -1
        rows.append(tuple(row))
    mat = tuple(rows)
    return mat if transpose else _transpose(mat)


def _transpose(mat):
    return tuple(zip(*mat))


def _direct_sum(blocks):
    n = sum(len(b) for b in blocks)
    rows = []
    off = 0
    for b in blocks:
        for row in b:
            rows.append((0,) * off + tuple(row) + (0,) * (n - off - len(b)))
        off += len(b)
    return tuple(rows)


def adjoint_matrix(s):
    '''P^T_sigma: block diagonal sum of the per-level adjoint blocks.'''
    return _direct_sum([_block(p, True) for p in s.perms])


def perm_matrix(s):
    '''P_sigma itself (the transpose of the adjoint).'''
    return _direct_sum([_block(p, False) for p in s.perms])


def compose(s1, s2):
    '''The shuffle s1 o s2 (apply s2 first), when it is itself a shuffle.'''
    assert s1.tree == s2.tree
    return Shuffle(s1.tree, [tuple(p1[i - 1] for i in p2)
                             for p1, p2 in zip(s1.perms, s2.perms)])


def enumerate_shuffles(tree):
    '''All T-shuffles, as the product of per-level riffle permutations.'''
    per_level = []
    for k in range(1, tree.depth + 1):
        idx = range(1, len(tree.levels[k]) + 1)
        per_level.append([p for p in permutations(idx)
                          if _is_riffle(tree, k, p)])
    return [Shuffle(tree, ps) for ps in product(*per_level)]


# -- compatibility with collisions --------------------------------------------

def _rho(tree, c):
    '''rho of an extended collision; None stands for the minimal
    bracketing, whose ray is the all-ones lineality generator.'''
    if c is None:
        return ones(tree.m)
    return ray_generator(c)


def _qpos(c):
    '''Map u -> position of psi(u) within its level of the contracted
    tree (1-based).'''
    qtree, psi = c.tree_map
    return {u: qtree.index[psi[u]] for lvl in c.tree.levels for u in lvl}


def is_compatible(c, s):
    '''Whether consecutive-under-sigma vertices land on equal or
    consecutive vertices of the contracted tree.  Every shuffle is
    compatible with the minimal bracketing (c is None).'''
    if c is None:
        return True
    pos = _qpos(c)
    for k, p in enumerate(s.perms, start=1):
        lvl = c.tree.levels[k]
        for i in range(len(p) - 1):
            step = pos[lvl[p[i + 1] - 1]] - pos[lvl[p[i] - 1]]
            if step not in (0, 1):
                return False
    return True


def compatible_shuffle(c):
    '''The canonical compatible shuffle for a collision: vertices sorted by
    image position in the contracted tree, ties broken by original index.

    For the minimal bracketing (c is None) this is undefined without a tree,
    so callers use Shuffle.identity directly; any shuffle qualifies.
    '''
    if isinstance(c, Collision):
        pos = _qpos(c)
        tree = c.tree
        perms = []
        for k in range(1, tree.depth + 1):
            lvl = tree.levels[k]
            order = sorted(range(1, len(lvl) + 1),
                           key=lambda i: (pos[lvl[i - 1]], i))
            perms.append(tuple(order))
        s = Shuffle(tree, perms)
        assert is_compatible(c, s)
        return s
    raise TypeError('expected a collision')


def sigma_rho(c, s):
    '''The 0/1 vector P^T_sigma(rho(C) - 1) + 1; entry (k, i) is 1 exactly
    when u^k_{sigma(i)} and u^k_{sigma(i+1)} share an essential bracket.'''
    tree = s.tree
    if not is_compatible(c, s):
        raise ValueError('shuffle is not compatible with the collision')
    rho = _rho(tree, c)
    one = ones(tree.m)
    diff = [a - b for a, b in zip(rho, one)]
    out = tuple(int(x) + 1 for x in linalg.mat_vec(adjoint_matrix(s), diff))
    assert all(x in (0, 1) for x in out)
    return out


def contraction_transform(c, c2, s):
    '''P^T_sigma(rho(C2) - rho(C)) when C -> C2, or P^T_sigma(rho(C2)) when
    C ~ C2; c2 may be None for the minimal bracketing.  The result is
    supported on the entries that are maximal within their psi-fiber, where
    it reproduces the ray of the quotient collision.'''
    tree = s.tree
    if not is_compatible(c, s):
        raise ValueError('shuffle is not compatible with the collision')
    r2 = _rho(tree, c2)
    if c2 is None or c2 == c or contained(c, c2):
        vec = [a - b for a, b in zip(r2, _rho(tree, c))]
    elif disjoint(c, c2):
        vec = list(r2)
    else:
        raise ValueError('collisions are neither nested nor disjoint')
    return tuple(int(x) for x in linalg.mat_vec(adjoint_matrix(s), vec))
