import random

import pytest

from enfcheck.compose import explore
from enfcheck.ctl import AF, AG, AU, AW, AX, EF, EG, EU, EX, Act, And, Deadlock, FalseF, Implies, Not, Or, TrueF
from enfcheck.dsl import parse_policy
from enfcheck.mcheck import (
    BindingError, KripkeStructure, Labeler, check_ctl, find_deadlocks, kripke_from_graph, path_trace, to_adequate,
    verify,
)
from enfcheck.model import DEADLOCK, Policy
from helpers import brute_force, random_formula, random_kripke

# 0 -> 1 -> 2 -> 2, 0 -> 3 -> 3; p at 1, q at 2, r at 3
CHAIN = KripkeStructure(((1, 3), (2,), (2,), (3,)),
                        (frozenset(), frozenset({"p"}), frozenset({"q"}), frozenset({"r"})))


def sat(k, f, backend=None):
    return {int(v) for v in Labeler(k, backend).sat(f).nonzero()[0]}


@pytest.mark.parametrize("formula, expected", [
    (EX(Act("p")), {0}),
    (AX(Act("p")), set()),
    (EF(Act("q")), {0, 1, 2}),
    (AF(Act("q")), {1, 2}),
    (AG(Not(Act("p"))), {2, 3}),
    (EG(Not(Act("q"))), {0, 3}),
    (EU(Not(Act("r")), Act("q")), {0, 1, 2}),
    (AU(TrueF(), Act("q")), {1, 2}),
    (AW(Not(Act("r")), Act("q")), {1, 2}),
    (Or(Act("p"), Act("r")), {1, 3}),
    (And(TrueF(), FalseF()), set()),
    (Implies(Act("p"), AX(Act("q"))), {0, 1, 2, 3}),
])
def test_chain_examples(formula, expected, backend):
    assert sat(CHAIN, formula, backend) == expected


def test_totality_is_enforced():
    with pytest.raises(ValueError, match="total"):
        KripkeStructure(((),), (frozenset(),))


def test_adequate_set_only():
    f = to_adequate(AW(Act("p"), AF(Act("q"))))
    allowed = (TrueF, FalseF, Act, Deadlock, Not, And, Or, EX, EU, EG)

    def walk(g):
        assert isinstance(g, allowed), g
        for name in ("operand", "left", "right"):
            if hasattr(g, name):
                walk(getattr(g, name))
    walk(f)


def test_random_structures_match_oracle(backend):
    rng = random.Random(21)
    for _ in range(60):
        k = random_kripke(rng, rng.randint(1, 10))
        lab = Labeler(k, backend)
        for _ in range(6):
            f = random_formula(rng, 3)
            assert {int(v) for v in lab.sat(f).nonzero()[0]} == brute_force(k, f), f


def test_counterexamples_are_paths_that_refute():
    rng = random.Random(5)
    for _ in range(150):
        k = random_kripke(rng, rng.randint(1, 10))
        f = random_formula(rng, 3)
        r = check_ctl(k, f)
        if r.holds:
            continue
        assert r.path[0] == k.initial
        for a, b in zip(r.path, r.path[1:]):
            assert b in k.succ[a]


def test_ag_counterexample_reaches_violation():
    f = AG(Not(Act("q")))
    r = check_ctl(CHAIN, f)
    assert not r.holds and r.path[-1] == 2


def test_unknown_atom():
    with pytest.raises(BindingError):
        check_ctl(CHAIN, Act("zzz"))


def test_action_as_state_encoding(mp_doc):
    g = explore(mp_doc.build("pair"))
    k = kripke_from_graph(g)
    assert k.labels[0] == frozenset()
    # one node per (graph node, incoming label) pair plus the start node
    assert k.n == 1 + len({(e.dst, e.label) for e in g.edges})
    dead = [v for v in range(k.n) if DEADLOCK in k.labels[v]]
    assert dead and all(k.succ[v] == (v,) for v in dead)
    assert "release-MediaPlayer" in k.alphabet


def test_deadlock_findings(mp_doc):
    (d,) = find_deadlocks(explore(mp_doc.build("pair")))
    assert d.trace[-2:] == ("onStop-env", "release-MediaPlayer")
    assert d.blocked == ("stop-MediaPlayer",)
    assert d.state == ("env", "(2/onStop#2,2/onStop#1)", "1", "idle")


def test_fixture_verdicts(mp_doc):
    pair = verify(mp_doc.build("pair"), mp_doc.policies_of("pair"))
    assert pair.interference and len(pair.deadlocks) == 1
    assert all(p.holds for p in pair.policies)
    for name in ("p1_only", "p2_only"):
        r = verify(mp_doc.build(name), mp_doc.policies_of(name))
        assert not r.interference
    fwd = verify(mp_doc.build("forwarder_only"), mp_doc.policies_of("forwarder_only"))
    assert [p.verdict for p in fwd.policies] == ["violated", "violated"] and not fwd.deadlocks


def test_policy_counterexample_replays(mp_doc):
    net = mp_doc.build("forwarder_only")
    g = explore(net)
    r = verify(net, mp_doc.policies_of("forwarder_only"), graph=g)
    p1 = r.verdict_of("P1")
    node = g.replay(p1.counterexample)
    assert "create-MediaPlayer" in p1.counterexample and p1.counterexample[-1] == "onStop-Activity"
    assert node in range(g.n_nodes)


def test_unbound_policy_atom(mp_doc):
    bad = Policy("X", parse_policy("AG act(ghost)"))
    with pytest.raises(BindingError):
        verify(mp_doc.build("pair"), [bad])


def test_ag_true_everywhere(mp_doc):
    r = verify(mp_doc.build("pair"), [Policy("T", AG(TrueF()))])
    assert r.policies[0].holds


def test_monotonicity():
    """Strengthening the operand of AG cannot make more states satisfy it."""
    rng = random.Random(8)
    for _ in range(80):
        k = random_kripke(rng, rng.randint(2, 10))
        f, g = random_formula(rng, 2), random_formula(rng, 2)
        assert sat(k, AG(And(f, g))) <= sat(k, AG(f))
        assert sat(k, EF(f)) <= sat(k, EF(Or(f, g)))


def test_path_trace_skips_deadlock_loops(mp_doc):
    g = explore(mp_doc.build("pair"))
    k = kripke_from_graph(g)
    r = check_ctl(k, AG(Not(Deadlock())))
    assert not r.holds
    assert path_trace(k, r.path) == find_deadlocks(g)[0].trace
