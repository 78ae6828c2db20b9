r'''Metric n-bracketings: bracketings with edge lengths, forming the cone
complex realized by the velocity fan.

A metric n-bracketing assigns a rational weight to every bracket so that

1. brackets outside the bracketing get 0,
2. singleton brackets get 0,
3. nontrivial brackets of the bracketing get a positive weight,
4. (coherence) for every nonsingleton k-bracket A~ and every pair A' <= A of
   a containment-minimal and a containment-maximal bracket over A~, the
   weights along the chain interval [A', A] sum to the weight of A~.

Maximum brackets are unconstrained in sign; the all-maxima metric bracketing
spans the lineality direction.  Every metric bracketing is a conical
combination of the indicator metrics of the collisions below it, with a free
coefficient on the minimal bracketing; ``decompose_nested`` produces the
unique such expression supported on a nested collection.
'''

from fractions import Fraction
from functools import cached_property

from .bracketing import (Bracketing, bracket_contains, bracket_key,
                         bracket_level, is_nontrivial, is_singleton,
                         maximum_bracket, trivial_brackets)
from .collision import Collision, containment_minimal_in, enumerate_collisions


class MetricBracketing:
    '''A bracketing with rational bracket weights (zero weights omitted).'''

    def __init__(self, bracketing, weights):
        self.tree = bracketing.tree
        self.bracketing = bracketing
        self.weights = {A: Fraction(w) for A, w in weights.items()
                        if Fraction(w) != 0}

    def weight(self, A):
        return self.weights.get(A, Fraction(0))

    @cached_property
    def key(self):
        return (self.bracketing.key,
                tuple(sorted((bracket_key(A), w)
                             for A, w in self.weights.items())))

    def __eq__(self, other):
        return isinstance(other, MetricBracketing) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        ws = sorted((bracket_key(A), str(w)) for A, w in self.weights.items())
        return f'MetricBracketing({ws})'

    def scale(self, t):
        return MetricBracketing(self.bracketing,
                                {A: t * w for A, w in self.weights.items()})


def metric_of_collision(c):
    '''The indicator metric of a collision: 1 on each nonsingleton essential
    bracket, 0 elsewhere.'''
    return MetricBracketing(
        c.bracketing,
        {A: Fraction(1) for A in c.essential_brackets if not is_singleton(A)})


def metric_minimal(tree):
    '''The all-maxima metric bracketing, generating the lineality line.'''
    b = Bracketing.minimal(tree)
    w = {maximum_bracket(tree, k): Fraction(1)
         for k in range(1, tree.depth + 1)
         if not is_singleton(maximum_bracket(tree, k))}
    return MetricBracketing(b, w)


def combine(tree, terms, minimal_coeff=0):
    '''Conical combination sum(coeff * l(c)) + minimal_coeff * l(B_min).

    terms -- iterable of (coeff, Collision) with coeff >= 0; the collisions
    must be pairwise compatible (their join exists).
    '''
    b = Bracketing.minimal(tree)
    weights = {}
    for coeff, c in terms:
        coeff = Fraction(coeff)
        if coeff < 0:
            raise ValueError('collision coefficients must be nonnegative')
        nxt = b.join(c.bracketing)
        if nxt is None:
            raise ValueError('collisions are not pairwise compatible')
        if coeff == 0:
            continue
        b = nxt
        for A in c.essential_brackets:
            if not is_singleton(A):
                weights[A] = weights.get(A, Fraction(0)) + coeff
    mc = Fraction(minimal_coeff)
    if mc != 0:
        for k in range(1, tree.depth + 1):
            A = maximum_bracket(tree, k)
            if not is_singleton(A):
                weights[A] = weights.get(A, Fraction(0)) + mc
    return MetricBracketing(b, weights)


def validate_metric(mb, negative_ok=frozenset()):
    '''Return a list of violated metric conditions (empty means valid).

    negative_ok -- brackets allowed to carry nonpositive weight even though
    nontrivial (used for localized metrics around a collision).
    '''
    tree = mb.tree
    b = mb.bracketing
    errors = []
    for A, w in mb.weights.items():
        if A not in b.brackets:
            errors.append(f'weight off the bracketing: {bracket_key(A)}')
        if is_singleton(A) and w != 0:
            errors.append(f'singleton bracket weighted: {bracket_key(A)}')
    for A in b.brackets:
        if is_nontrivial(tree, A) and A not in negative_ok \
                and mb.weight(A) <= 0:
            errors.append(f'nontrivial bracket not positive: '
                          f'{bracket_key(A)}')
    for At in b.brackets:
        if is_singleton(At) or bracket_level(At) == tree.depth:
            continue
        over = b.brackets_over(At)
        minimals = [A for A in over
                    if not any(B != A and bracket_contains(B, A)
                               for B in over)]
        maximals = [A for A in over
                    if not any(B != A and bracket_contains(A, B)
                               for B in over)]
        for lo in minimals:
            for hi in maximals:
                if not bracket_contains(lo, hi):
                    continue
                total = sum((mb.weight(A) for A in over
                             if bracket_contains(lo, A)
                             and bracket_contains(A, hi)), Fraction(0))
                if total != mb.weight(At):
                    errors.append(f'coherence fails at {bracket_key(At)}: '
                                  f'{total} != {mb.weight(At)}')
    return errors


def add_metrics(m1, m2):
    '''Sum of metric bracketings (join of the underlying bracketings).'''
    b = m1.bracketing.join(m2.bracketing)
    if b is None:
        raise ValueError('metric bracketings are not compatible')
    weights = dict(m1.weights)
    for A, w in m2.weights.items():
        weights[A] = weights.get(A, Fraction(0)) + w
    return MetricBracketing(b, weights)


def decompose_nested(mb, collisions=None):
    '''The unique expression of a metric bracketing as a conical combination
    over a nested collection of collisions, plus a free minimal term.

    Returns (minimal_coeff, [(coeff, Collision), ...]).  Greedy: repeatedly
    subtract the largest multiple of a containment-minimal collision of the
    remaining support (lexicographically least canonical form on ties).
    '''
    tree = mb.tree
    if collisions is None:
        collisions = enumerate_collisions(tree)
    remainder = {A: w for A, w in mb.weights.items()}
    b = mb.bracketing
    terms = []
    while any(is_nontrivial(tree, A) for A in b.brackets):
        cands = [c for c in collisions
                 if c.bracketing.leq(b) and containment_minimal_in(c, b)]
        assert cands, 'every bracketing has a containment-minimal collision'
        c = min(cands, key=lambda c: c.key)
        support = [A for A in c.essential_brackets
                   if is_nontrivial(tree, A)]
        t = min(remainder[A] for A in support)
        assert t > 0
        for A in c.essential_brackets:
            if not is_singleton(A):
                remainder[A] = remainder.get(A, Fraction(0)) - t
        terms.append((t, c))
        kept = set(trivial_brackets(tree))
        kept.update(A for A, w in remainder.items()
                    if w != 0 and is_nontrivial(tree, A))
        b = b.restrict_order(kept)
    maxima = [maximum_bracket(tree, k) for k in range(1, tree.depth + 1)]
    maxima = [A for A in maxima if not is_singleton(A)]
    lam0 = remainder.get(maxima[0], Fraction(0)) if maxima else Fraction(0)
    for A in maxima:
        assert remainder.get(A, Fraction(0)) == lam0, \
            'maxima weights must agree after subtraction'
    for A, w in remainder.items():
        assert w == 0 or A in maxima, 'nontrivial residue left'
    return lam0, terms
