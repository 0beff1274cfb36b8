"""Shared builders and independent oracles for the test suite."""

import itertools
import random

from enfcheck.ctl import AF, AG, AU, AW, AX, EF, EG, EU, EX, Act, And, Deadlock, FalseF, Implies, Not, Or, TrueF
from enfcheck.mcheck import KripkeStructure
from enfcheck.model import DEADLOCK, EditAutomaton, EditTransition


def random_edit(rng: random.Random, n_states=3, alphabet=("a", "b", "c"), max_emit=3, density=0.6, name="R"):
    states = tuple(str(i) for i in range(n_states))
    trans = []
    for q in states:
        for a in alphabet:
            if rng.random() < density:
                emit = tuple(rng.choice(alphabet) for _ in range(rng.randint(0, max_emit)))
                trans.append(EditTransition(q, a, rng.choice(states), emit))
    return EditAutomaton(name, frozenset(alphabet), states, "0", tuple(trans))


def random_kripke(rng: random.Random, n: int, props=("p", "q", "r")) -> KripkeStructure:
    succ = []
    for v in range(n):
        k = rng.randint(1, min(3, n))
        succ.append(tuple(sorted(rng.sample(range(n), k))))
    labels = []
    for v in range(n):
        s = {p for p in props if rng.random() < 0.4}
        if rng.random() < 0.1:
            s.add(DEADLOCK)
        labels.append(frozenset(s))
    return KripkeStructure(tuple(succ), tuple(labels), 0, alphabet=frozenset(props))


def random_formula(rng: random.Random, depth: int, props=("p", "q", "r")):
    if depth == 0 or rng.random() < 0.2:
        return rng.choice([TrueF(), FalseF(), Deadlock()] + [Act(p) for p in props] * 3)
    unary = [Not, AX, EX, AF, EF, AG, EG]
    binary = [And, Or, Implies, AU, EU, AW]
    if rng.random() < 0.5:
        return rng.choice(unary)(random_formula(rng, depth - 1, props))
    return rng.choice(binary)(random_formula(rng, depth - 1, props), random_formula(rng, depth - 1, props))


def brute_force(k: KripkeStructure, f) -> frozenset[int]:
    """Direct fixpoint semantics of every operator, without the adequate-set rewriting."""
    nodes = frozenset(range(k.n))

    def pre_e(s):
        return frozenset(v for v in nodes if any(w in s for w in k.succ[v]))

    def pre_a(s):
        return frozenset(v for v in nodes if all(w in s for w in k.succ[v]))

    def lfp(fn):
        z = frozenset()
        while True:
            nz = fn(z)
            if nz == z:
                return z
            z = nz

    def gfp(fn):
        z = nodes
        while True:
            nz = fn(z)
            if nz == z:
                return z
            z = nz

    def ev(f):
        if isinstance(f, TrueF):
            return nodes
        if isinstance(f, FalseF):
            return frozenset()
        if isinstance(f, Act):
            return frozenset(v for v in nodes if f.action in k.labels[v])
        if isinstance(f, Deadlock):
            return frozenset(v for v in nodes if DEADLOCK in k.labels[v])
        if isinstance(f, Not):
            return nodes - ev(f.operand)
        if isinstance(f, And):
            return ev(f.left) & ev(f.right)
        if isinstance(f, Or):
            return ev(f.left) | ev(f.right)
        if isinstance(f, Implies):
            return (nodes - ev(f.left)) | ev(f.right)
        if isinstance(f, EX):
            return pre_e(ev(f.operand))
        if isinstance(f, AX):
            return pre_a(ev(f.operand))
        if isinstance(f, EF):
            s = ev(f.operand)
            return lfp(lambda z: s | pre_e(z))
        if isinstance(f, AF):
            s = ev(f.operand)
            return lfp(lambda z: s | pre_a(z))
        if isinstance(f, EG):
            s = ev(f.operand)
            return gfp(lambda z: s & pre_e(z))
        if isinstance(f, AG):
            s = ev(f.operand)
            return gfp(lambda z: s & pre_a(z))
        if isinstance(f, EU):
            p, q = ev(f.left), ev(f.right)
            return lfp(lambda z: q | (p & pre_e(z)))
        if isinstance(f, AU):
            p, q = ev(f.left), ev(f.right)
            return lfp(lambda z: q | (p & pre_a(z)))
        if isinstance(f, AW):
            p, q = ev(f.left), ev(f.right)
            return gfp(lambda z: q | (p & pre_a(z)))
        raise TypeError(f)

    return ev(f)


def all_traces(alphabet, max_len):
    for n in range(max_len + 1):
        yield from itertools.product(sorted(alphabet), repeat=n)
