import random

import pytest
from hypothesis import given, settings, strategies as st

from enfcheck.edit2io import CompletionPolicy, check_transform_equivalence, drive, transform
from enfcheck.model import IOState, ModelError, inp, out
from enfcheck.simulate import run_edit
from helpers import all_traces, random_edit


def test_identity_completion_counts(ea_p1):
    ioa = transform(ea_p1, "identity")
    # 11 strict transitions plus one pass-through pair for each of the 7 undefined (state, input) pairs
    assert len(ioa.transitions) == 11 + 2 * 7
    assert len(ioa.committed) == 6 + 7
    assert not ioa.warnings


def test_strict_completion_warns(ea_p1):
    ioa = transform(ea_p1, CompletionPolicy.STRICT)
    assert len(ioa.warnings) == 1 and "7" in ioa.warnings[0]


def test_committed_states_have_one_output(ea_p2):
    for mode in CompletionPolicy:
        ioa = transform(ea_p2, mode)
        table = ioa.outgoing()
        for s in ioa.states:
            if ioa.is_committed(s):
                assert len(table[s]) == 1 and table[s][0].action.polarity == "!"
            else:
                assert all(t.action.polarity == "?" for t in table[s])
        assert ioa.validate() == []


def test_emission_chain_shape(ea_p1):
    ioa = transform(ea_p1, "strict")
    table = ioa.outgoing()
    (t,) = [t for t in table[IOState("2")] if t.action == inp("onStop")]
    first = t.target
    assert first.committed and first.emission.pending == ("release", "onStop")
    (t1,) = table[first]
    (t2,) = table[t1.target]
    assert (t1.action, t2.action) == (out("release"), out("onStop"))
    assert t2.target == IOState("0")


def test_suppression_is_a_single_input_step():
    from enfcheck.model import EditAutomaton, EditTransition
    ea = EditAutomaton("S", {"a"}, ("0",), "0", (EditTransition("0", "a", "0"),))
    ioa = transform(ea)
    assert len(ioa.states) == 1 and len(ioa.transitions) == 1 and not ioa.committed


def test_invalid_automaton_rejected():
    from enfcheck.model import EditAutomaton, EditTransition
    ea = EditAutomaton("N", {"a"}, ("0",), "0", (EditTransition("0", "a", "0"), EditTransition("0", "a", "0", ("a",))))
    with pytest.raises(ModelError):
        transform(ea)


def test_bad_completion_name(ea_p1):
    with pytest.raises(ValueError, match="unknown completion"):
        transform(ea_p1, "lenient")


def test_exhaustive_short_traces(ea_p1, ea_p2):
    for ea in (ea_p1, ea_p2):
        for mode in CompletionPolicy:
            verdicts = check_transform_equivalence(ea, transform(ea, mode), all_traces(ea.alphabet, 5), mode)
            assert all(v.ok for v in verdicts)


def test_strict_rejection_position(ea_p1):
    ioa = transform(ea_p1, "strict")
    outputs, state, rejected = drive(ioa, ["onCreate", "create", "create"], "strict")
    assert rejected == 3 and outputs == ("onCreate", "create") and state == IOState("2")
    assert run_edit(ea_p1, ["onCreate", "create", "create"], "strict").rejected_at == 3


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 4), density=st.floats(0.1, 1.0),
       mode=st.sampled_from(list(CompletionPolicy)))
def test_random_automata_equivalence(seed, n, density, mode):
    rng = random.Random(seed)
    ea = random_edit(rng, n, density=density)
    traces = [tuple(rng.choice("abc") for _ in range(rng.randint(0, 12))) for _ in range(40)]
    verdicts = check_transform_equivalence(ea, transform(ea, mode), traces, mode)
    assert all(v.ok for v in verdicts), [v for v in verdicts if not v.ok][:1]


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_state_count_formula(seed):
    """Strict: one state per declared state plus len(emit) committed states per emitting transition."""
    ea = random_edit(random.Random(seed), 3)
    ioa = transform(ea, "strict")
    emitting = [t for t in ea.transitions if t.emit]
    assert len(ioa.committed) == sum(len(t.emit) for t in emitting)
    assert len(ioa.states) == len(ea.states) + len(ioa.committed)
    assert len(ioa.transitions) == sum(len(t.emit) + 1 for t in ea.transitions)
