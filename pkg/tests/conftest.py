import random
from fractions import Fraction

import pytest

from skyhn import grmat
from skyhn.field import PrimeField

F2 = PrimeField(2)
F3 = PrimeField(3)


def gm(F, gens, rels):
    """Build a GradedMatrix from (degree, [(row, coeff), ...]) pairs."""
    return grmat.GradedMatrix(F, [tuple(Fraction(c) for c in g) for g in gens],
                              [tuple(Fraction(c) for c in d) for d, _ in rels],
                              [[(i, c) for i, c in col] for _, col in rels])


def cross_module():
    """Vertical staircase [0,1)x[0,3) + horizontal staircase [0,3)x[1,2)."""
    return gm(F2, [(0, 0), (0, 1)],
              [((1, 0), [(0, 1)]), ((0, 3), [(0, 1)]),
               ((3, 1), [(1, 1)]), ((0, 2), [(1, 1)])])


def stable_module():
    """Thickness-2 semistable module over F_2 generated at the origin."""
    return gm(F2, [(0, 0), (0, 0)],
              [((2, 0), [(1, 1)]), ((0, 2), [(0, 1)]),
               ((1, 1), [(0, 1), (1, 1)]),
               ((3, 0), [(0, 1)]), ((0, 3), [(1, 1)])])


def random_bounded_module(rng, F, thickness, dmax=4):
    """Random uniquely-bounded presentation: generators and relations with
    integer degrees in [0,dmax)^2 plus cap relations at dmax per generator."""
    gens = [(Fraction(rng.randrange(0, dmax - 1)),
             Fraction(rng.randrange(0, dmax - 1)))
            for _ in range(thickness)]
    rels = []
    for _ in range(rng.randrange(1, 2 * thickness + 2)):
        i = rng.randrange(thickness)
        gx, gy = gens[i]
        d = (gx + rng.randrange(0, 3), gy + rng.randrange(0, 3))
        ents = []
        for j in range(thickness):
            if grmat.deg_leq(gens[j], d):
                c = rng.randrange(F.q)
                if c:
                    ents.append((j, c))
        if ents:
            rels.append((d, ents))
    for i, (gx, gy) in enumerate(gens):
        rels.append(((Fraction(dmax), gy), [(i, 1)]))
        rels.append(((gx, Fraction(dmax)), [(i, 1)]))
    return gm(F, gens, rels)


def random_unigen_module(rng, F, thickness, dmax=4):
    """Random bounded module with all generators at one common degree."""
    gx = Fraction(rng.randrange(0, dmax - 1))
    gy = Fraction(rng.randrange(0, dmax - 1))
    gens = [(gx, gy)] * thickness
    rels = []
    for _ in range(rng.randrange(1, 2 * thickness + 2)):
        dx, dy = rng.randrange(0, 3), rng.randrange(0, 3)
        if (dx, dy) == (0, 0):
            dy = 1    # relations at the generator degree would make the
            # presentation non-minimal
        d = (gx + dx, gy + dy)
        ents = [(j, c) for j in range(thickness)
                for c in [rng.randrange(F.q)] if c]
        if ents:
            rels.append((d, ents))
    for i in range(thickness):
        rels.append(((Fraction(dmax), gy), [(i, 1)]))
        rels.append(((gx, Fraction(dmax)), [(i, 1)]))
    return gm(F, gens, rels)


@pytest.fixture
def cross():
    return cross_module()


@pytest.fixture
def stable():
    return stable_module()


@pytest.fixture
def rng():
    return random.Random(20260823)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    results = getattr(test_acceptance, "RESULTS", [])
    if results:
        terminalreporter.section("acceptance criteria")
        for n, status, desc, secs in sorted(results):
            terminalreporter.write_line(
                "acceptance %2d: %s  %s (%.1fs)" % (n, status, desc, secs))
