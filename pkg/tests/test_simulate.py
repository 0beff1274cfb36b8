from enfcheck.compose import explore
from enfcheck.simulate import run_edit, run_network_random


def test_run_edit_examples(ea_p1):
    r = run_edit(ea_p1, ["onCreate", "create", "onStop"])
    assert r.output == ("onCreate", "create", "release", "onStop") and r.state == "0" and not r.rejected
    # identity completion passes undefined inputs through unchanged
    assert run_edit(ea_p1, ["release"]).output == ("release",)


def test_walk_is_reproducible(mp_doc):
    net = mp_doc.build("pair")
    a = run_network_random(net, 11, 30)
    b = run_network_random(net, 11, 30)
    assert a == b
    assert len(a.states) == len(a.trace) + 1


def test_walk_reaches_the_deadlock(mp_doc):
    net = mp_doc.build("pair")
    g = explore(net)
    dead = {g.nodes[d] for d in g.deadlocks}
    outcomes = [run_network_random(net, s, 60) for s in range(300)]
    stuck = [w for w in outcomes if w.outcome == "deadlocked"]
    assert stuck and all(w.states[-1] in dead for w in stuck)
    assert all(w.trace[-1] == "release-MediaPlayer" for w in stuck)


def test_walk_replays_on_graph(mp_doc):
    net = mp_doc.build("pair")
    g = explore(net)
    for seed in range(50):
        w = run_network_random(net, seed, 25)
        assert g.nodes[g.replay(w.trace)] == w.states[-1]
        assert all(not a.endswith("-env") for a in w.delivered)


def test_zero_steps(mp_doc):
    w = run_network_random(mp_doc.build("p1_only"), 0, 0)
    assert w.trace == () and w.outcome == "running"
