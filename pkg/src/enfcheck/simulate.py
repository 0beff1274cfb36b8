"""Reference interpreters: the edit-automaton fold and a seeded network walker.

The walker draws from :class:`random.Random` (Mersenne Twister) seeded with
the caller's integer, so a walk is reproducible for a given build.
"""

from __future__ import annotations

import random
from collections.abc import Iterable
from dataclasses import dataclass

from .edit2io import CompletionPolicy
from .model import Action, EditAutomaton, Trace, require_valid


@dataclass(frozen=True)
class EditRun:
    output: Trace
    state: str
    rejected_at: int | None = None  # 1-based input position refused in strict mode

    @property
    def rejected(self) -> bool:
        return self.rejected_at is not None


def run_edit(ea: EditAutomaton, inputs: Iterable[Action],
             completion: "CompletionPolicy | str" = CompletionPolicy.IDENTITY) -> EditRun:
    completion = CompletionPolicy.parse(completion)
    require_valid(ea)
    delta = ea.delta
    state = ea.initial
    output: list[Action] = []
    for pos, a in enumerate(inputs, start=1):
        step = delta.get((state, a))
        if step is None:
            if completion is CompletionPolicy.STRICT:
                return EditRun(tuple(output), state, pos)
            output.append(a)
            continue
        state, emit = step
        output.extend(emit)
    return EditRun(tuple(output), state)


@dataclass(frozen=True)
class Walk:
    trace: Trace  # edge labels in order: env emissions and deliveries
    outcome: str  # "running" | "deadlocked"
    states: tuple[tuple[int, ...], ...]  # visited global states, initial first

    @property
    def delivered(self) -> Trace:
        return tuple(a for a in self.trace if not a.endswith("-env"))


def run_network_random(net, seed: int, max_steps: int) -> Walk:
    """Uniform random walk over enabled global transitions."""
    from .compose import compile_network

    compiled = compile_network(net)
    rng = random.Random(seed)
    state = compiled.initial
    states = [state]
    trace: list[str] = []
    for _ in range(max_steps):
        succ = compiled.successors(state)
        if not succ:
            return Walk(tuple(trace), "deadlocked", tuple(states))
        label, state = succ[rng.randrange(len(succ))]
        trace.append(compiled.label_name(label))
        states.append(state)
    outcome = "deadlocked" if max_steps > 0 and not compiled.successors(state) else "running"
    return Walk(tuple(trace), outcome, tuple(states))
