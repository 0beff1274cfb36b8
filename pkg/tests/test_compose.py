import random

import pytest

from enfcheck import kernels
from enfcheck.compose import (
    ENV, CompositionError, ExplorationBoundExceeded, RoutingError, WiringError, build_network, canonical_form,
    compile_network, compose_enforcers, explore, forwarder, infer_targets, synthesize_environment,
)
from enfcheck.edit2io import transform
from enfcheck.model import IOAutomaton, IOTransition, ModelError, inp, lts, out


def mp_frameworks(doc):
    return [("Activity", doc.frameworks["Activity"]), ("MediaPlayer", doc.frameworks["MediaPlayer"])]


def test_product_of_fixture_enforcers(ea_p1, ea_p2):
    comp = compose_enforcers([transform(ea_p1), transform(ea_p2)])
    assert len(comp.states) == 40 and len(comp.transitions) == 66
    assert comp.validate() == []
    # shared inputs fire jointly: onCreate? takes both components at once
    (t,) = [t for t in comp.outgoing()[comp.start[0]] if t.action == inp("onCreate")]
    assert all(x.committed for x in t.target)


def test_committed_priority(ea_p1, ea_p2):
    comp = compose_enforcers([transform(ea_p1), transform(ea_p2)])
    table = comp.outgoing()
    for s in comp.states:
        if comp.is_committed(s):
            assert table[s], "a committed product state must be able to leave"
            assert all(t.action.polarity == "!" for t in table[s])


def test_composition_is_symmetric(ea_p1, ea_p2):
    a = compose_enforcers([transform(ea_p1), transform(ea_p2)])
    b = compose_enforcers([transform(ea_p2), transform(ea_p1)])
    assert len(a.states) == len(b.states)
    assert canonical_form(a) == canonical_form(b)


def test_composition_is_deterministic(ea_p1, ea_p2):
    a = compose_enforcers([transform(ea_p1), transform(ea_p2)])
    b = compose_enforcers([transform(ea_p1), transform(ea_p2)])
    assert a.states == b.states and a.transitions == b.transitions


def test_product_bound():
    rng = random.Random(3)
    from helpers import random_edit
    for _ in range(30):
        eas = [random_edit(rng, 3, name=f"E{i}") for i in range(2)]
        ioas = [transform(e) for e in eas]
        comp = compose_enforcers(ioas)
        assert len(comp.states) <= len(ioas[0].states) * len(ioas[1].states)


def test_polarity_clash():
    a = IOAutomaton("A", ("s",), ("s",), inputs={"x"}, transitions=(IOTransition("s", inp("x"), "s"),))
    b = IOAutomaton("B", ("s",), ("s",), outputs={"x"}, transitions=(IOTransition("s", out("x"), "s"),))
    with pytest.raises(CompositionError, match="polarity clash"):
        compose_enforcers([a, b])
    with pytest.raises(CompositionError):
        compose_enforcers([])


def test_environment_and_forwarder():
    env = synthesize_environment({"b", "a"})
    assert env.states == (ENV,) and env.outputs == {"a-env", "b-env"} and len(env.transitions) == 2
    with pytest.raises(WiringError):
        synthesize_environment(())
    fwd = forwarder({"x"})
    assert len(fwd.states) == 2 and len(fwd.committed) == 1


def test_network_channels(mp_doc):
    net = mp_doc.build("pair")
    names = {c.name for c in net.channels}
    assert {"onStop-env", "onStop-Activity", "release-MediaPlayer", "stop-MediaPlayer"} <= names
    assert net.targets["create"] == "MediaPlayer" and net.targets["onCreate"] == "Activity"
    assert net.framework_ids == ("Activity", "MediaPlayer")


def test_routing_inference_errors(mp_doc):
    fws = mp_frameworks(mp_doc)
    dup = lts("Other", "s", [("s", "create", "s")])
    with pytest.raises(RoutingError, match="several"):
        infer_targets(fws + [("Other", dup)], "Activity")
    with pytest.raises(WiringError, match="not received"):
        infer_targets(fws, "Activity", extra={"ghost"})
    assert infer_targets(fws + [("Other", dup)], "Activity", explicit={"create": "Other"})["create"] == "Other"


def test_build_network_rejects_bad_frameworks(ea_p1, mp_doc):
    fws = mp_frameworks(mp_doc)
    targets = infer_targets(fws, "Activity")
    nondet = lts("MediaPlayer", "idle", [("idle", "create", "a"), ("idle", "create", "b")],
                 alphabet=mp_doc.frameworks["MediaPlayer"].alphabet)
    with pytest.raises(ModelError, match="nondeterministic"):
        build_network([ea_p1], [fws[0], ("MediaPlayer", nondet)], targets, app="Activity")
    with pytest.raises(WiringError, match="duplicate"):
        build_network([ea_p1], [fws[0], fws[0]], targets)
    with pytest.raises(WiringError, match="reserved"):
        build_network([ea_p1], [(ENV, fws[0][1])], targets)
    with pytest.raises(RoutingError):
        build_network([ea_p1], fws, {})
    with pytest.raises(WiringError, match="unknown component"):
        build_network([ea_p1], fws, {**targets, "create": "Nowhere"})
    with pytest.raises(WiringError, match="no receiver"):
        build_network([ea_p1], fws, {**targets, "onCreate": "MediaPlayer"})


def test_mediaplayer_pair_graph(mp_doc, backend):
    g = explore(mp_doc.build("pair"), backend=backend)
    assert (g.n_nodes, g.n_edges) == (22, 28)
    assert len(g.deadlocks) == 1
    assert g.committed[g.deadlocks[0]]


def test_single_enforcer_networks_are_deadlock_free(mp_doc):
    for name in ("p1_only", "p2_only", "forwarder_only"):
        assert explore(mp_doc.build(name)).deadlocks == ()


def test_context_guard_blocks_env(mp_doc):
    g = explore(mp_doc.build("pair"))
    first = {e.label for e in g.successors(g.initial)}
    # the player may only be touched while the activity runs
    assert first == {"onCreate-env"}


def test_reaction_guard_blocks_infeasible_env(mp_doc):
    g = explore(mp_doc.build("forwarder_only"))
    after = g.replay(["onCreate-env", "onCreate-Activity"])
    labels = {e.label for e in g.successors(after)}
    assert "create-env" in labels
    assert "release-env" not in labels and "stop-env" not in labels


def test_state_bound(mp_doc):
    with pytest.raises(ExplorationBoundExceeded) as info:
        explore(mp_doc.build("pair"), max_states=5)
    assert info.value.limit == 5 and info.value.states >= 5


def test_backends_agree_on_catalog():
    from enfcheck.catalog import CASES, case_network
    names = kernels.available()
    for c in CASES:
        net, _ = case_network(c)
        compiled = compile_network(net)
        results = [kernels.explore(compiled.tables, compiled.initial, 10**6, backend=b) for b in names]
        ref = [list(map(int, x)) if not isinstance(x, (bool, int)) else x for x in results[0]]
        for r in results[1:]:
            assert [list(map(int, x)) if not isinstance(x, (bool, int)) else x for x in r] == ref


def test_replay_and_trace(mp_doc):
    g = explore(mp_doc.build("pair"))
    for node in range(g.n_nodes):
        assert g.replay(g.trace_to(node)) == node
    with pytest.raises(ValueError):
        g.replay(["stop-MediaPlayer"])


def test_compile_is_cached(mp_doc):
    net = mp_doc.build("pair")
    assert compile_network(net) is compile_network(net)


def test_strict_network_has_no_forwarder(mp_doc):
    net = mp_doc.build("pair", "strict")
    assert all(c.name != "forwarder" for c in net.components)
    with pytest.raises(WiringError):
        mp_doc.build("forwarder_only", "strict")
