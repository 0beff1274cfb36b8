"""Edit automaton to I/O automaton transformation.

Every edit transition becomes a linear run: the accepted input moves to a
committed state, the committed states emit the replacement sequence one
action at a time, and the last emission lands in the target state. A
suppressing transition is a single input step between plain states.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .model import (
    Action,
    EditAutomaton,
    Emission,
    IOAutomaton,
    IOState,
    IOTransition,
    Trace,
    inp,
    out,
    require_valid,
)


class CompletionPolicy(enum.Enum):
    """How inputs left undefined by the edit automaton are handled."""

    IDENTITY = "identity"  # undefined inputs pass through unchanged
    STRICT = "strict"  # undefined inputs are refused

    @classmethod
    def parse(cls, value: "str | CompletionPolicy") -> CompletionPolicy:
        if isinstance(value, CompletionPolicy):
            return value
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown completion mode {value!r} (expected identity or strict)") from None


def _run(source: str, action: Action, emit: Trace, target: str) -> list[IOTransition]:
    start = IOState(source)
    if not emit:
        return [IOTransition(start, inp(action), IOState(target))]
    steps = [IOState(source, Emission(action, emit, i, target)) for i in range(1, len(emit) + 1)]
    trans = [IOTransition(start, inp(action), steps[0])]
    for i, state in enumerate(steps):
        nxt = steps[i + 1] if i + 1 < len(steps) else IOState(target)
        trans.append(IOTransition(state, out(emit[i]), nxt))
    return trans


def transform(ea: EditAutomaton, completion: "CompletionPolicy | str" = CompletionPolicy.IDENTITY) -> IOAutomaton:
    completion = CompletionPolicy.parse(completion)
    require_valid(ea)
    delta = ea.delta
    transitions: list[IOTransition] = []
    for q in sorted(ea.states):
        for a in sorted(ea.alphabet):
            if (q, a) in delta:
                target, emit = delta[q, a]
                transitions.extend(_run(q, a, emit, target))
            elif completion is CompletionPolicy.IDENTITY:
                transitions.extend(_run(q, a, (a,), q))

    warnings: tuple[str, ...] = ()
    if completion is CompletionPolicy.STRICT:
        missing = [(q, a) for q in sorted(ea.states) for a in sorted(ea.alphabet) if (q, a) not in delta]
        if missing:
            warnings = (
                f"{ea.name}: strict completion leaves {len(missing)} (state, input) pairs undefined; "
                "the result is not input-enabled",
            )

    states = [IOState(q) for q in ea.states]
    seen = set(states)
    for t in transitions:
        for s in (t.source, t.target):
            if s not in seen:
                seen.add(s)
                states.append(s)
    return IOAutomaton(
        name=ea.name,
        states=tuple(states),
        start=(IOState(ea.initial),),
        inputs=ea.alphabet,
        outputs=ea.alphabet,
        transitions=tuple(transitions),
        committed=frozenset(s for s in states if s.committed),
        warnings=warnings,
    )


def drive(ioa: IOAutomaton, inputs: Iterable[Action],
          completion: "CompletionPolicy | str" = CompletionPolicy.IDENTITY) -> tuple[Trace, IOState, int | None]:
    """Feed inputs one at a time, collecting the maximal output run after each.

    Returns ``(outputs, final_state, rejected_at)`` where ``rejected_at`` is the
    1-based position of the first refused input (strict mode), else ``None``.
    """
    completion = CompletionPolicy.parse(completion)
    table = ioa.outgoing()
    (state,) = ioa.start
    emitted: list[Action] = []
    for pos, a in enumerate(inputs, start=1):
        step = next((t for t in table[state] if t.action == inp(a)), None)
        if step is None:
            if completion is CompletionPolicy.IDENTITY and a not in ioa.inputs:
                emitted.append(a)
                continue
            return tuple(emitted), state, pos
        state = step.target
        while ioa.is_committed(state):
            (t,) = table[state]
            emitted.append(t.action.name)
            state = t.target
    return tuple(emitted), state, None


@dataclass(frozen=True)
class EquivalenceVerdict:
    input: Trace
    expected: Trace
    actual: Trace
    expected_state: str
    actual_state: str
    ok: bool


def check_transform_equivalence(ea: EditAutomaton, ioa: IOAutomaton, inputs: Sequence[Sequence[Action]],
                                completion: "CompletionPolicy | str" = CompletionPolicy.IDENTITY
                                ) -> list[EquivalenceVerdict]:
    """Compare the edit interpreter with the driven I/O automaton on each input trace."""
    from .simulate import run_edit

    completion = CompletionPolicy.parse(completion)
    verdicts = []
    for trace in inputs:
        trace = tuple(trace)
        ref = run_edit(ea, trace, completion)
        outputs, final, rejected = drive(ioa, trace, completion)
        ok = outputs == ref.output and final.origin == ref.state and rejected == ref.rejected_at
        verdicts.append(EquivalenceVerdict(trace, ref.output, outputs, ref.state, final.origin, ok))
    return verdicts
