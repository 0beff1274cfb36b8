"""Domain types shared across the pipeline.

Actions are plain strings and traces are tuples of actions. State ids of edit
automata and framework models are opaque strings; deterministic iteration
always goes through ``sorted``.
"""

from __future__ import annotations

from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Union

if TYPE_CHECKING:
    from .ctl import Formula

Action = str
Trace = tuple[Action, ...]

INPUT = "?"
OUTPUT = "!"
INTERNAL = ""

#: Proposition name reserved for deadlock nodes in the Kripke structure.
DEADLOCK = "deadlock"


def prefix(trace: Sequence[Action], i: int) -> Trace:
    """Actions ``trace[1..i]`` using 1-based positions (``i = 0`` is empty)."""
    if not 0 <= i <= len(trace):
        raise IndexError(f"prefix length {i} out of range for trace of length {len(trace)}")
    return tuple(trace[:i])


def suffix(trace: Sequence[Action], i: int) -> Trace:
    """Actions ``trace[i+1..]`` using 1-based positions."""
    if not 0 <= i <= len(trace):
        raise IndexError(f"suffix offset {i} out of range for trace of length {len(trace)}")
    return tuple(trace[i:])


def at(trace: Sequence[Action], i: int) -> Action:
    """The i-th action of ``trace``, counting from 1."""
    if not 1 <= i <= len(trace):
        raise IndexError(f"position {i} out of range for trace of length {len(trace)}")
    return trace[i - 1]


class ModelError(Exception):
    """Raised when a model violates a structural invariant."""


@dataclass(frozen=True)
class ValidationError:
    kind: str  # "nondeterminism" | "alphabet" | "reference"
    message: str

    def __str__(self) -> str:
        return f"{self.kind} error: {self.message}"


# --------------------------------------------------------------------------
# Edit automata


@dataclass(frozen=True)
class EditTransition:
    source: str
    action: Action
    target: str
    emit: Trace = ()

    @property
    def is_suppression(self) -> bool:
        return not self.emit


@dataclass(frozen=True)
class EditAutomaton:
    """Enforcer as a deterministic state machine that rewrites executions.

    ``transitions`` is kept as a sequence rather than a map so that a
    nondeterministic description can be represented and then rejected by
    :func:`validate_edit`.
    """

    name: str
    alphabet: frozenset[Action]
    states: tuple[str, ...]
    initial: str
    transitions: tuple[EditTransition, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "transitions", tuple(self.transitions))

    @property
    def delta(self) -> dict[tuple[str, Action], tuple[str, Trace]]:
        """The transition function as a partial map; last entry wins on duplicates."""
        return {(t.source, t.action): (t.target, t.emit) for t in self.transitions}

    def step(self, state: str, action: Action) -> tuple[str, Trace] | None:
        for t in self.transitions:
            if t.source == state and t.action == action:
                return t.target, t.emit
        return None


def validate_edit(ea: EditAutomaton) -> list[ValidationError]:
    """Structural check of an edit automaton; an empty list means valid."""
    errors: list[ValidationError] = []
    states = set(ea.states)
    if len(states) != len(ea.states):
        seen: set[str] = set()
        for s in ea.states:
            if s in seen:
                errors.append(ValidationError("reference", f"state {s!r} declared twice"))
            seen.add(s)
    if ea.initial not in states:
        errors.append(ValidationError("reference", f"initial state {ea.initial!r} is not declared"))
    if DEADLOCK in ea.alphabet:
        errors.append(ValidationError("alphabet", f"action name {DEADLOCK!r} is reserved"))
    keys: dict[tuple[str, Action], EditTransition] = {}
    for t in ea.transitions:
        for end, role in ((t.source, "source"), (t.target, "target")):
            if end not in states:
                errors.append(
                    ValidationError(
                        "reference",
                        f"transition {t.source} -> {t.target} on {t.action}: {role} state {end!r} is not declared",
                    )
                )
        if t.action not in ea.alphabet:
            errors.append(
                ValidationError("alphabet", f"input {t.action!r} on transition from {t.source!r} is not in the alphabet")
            )
        for a in t.emit:
            if a not in ea.alphabet:
                errors.append(
                    ValidationError(
                        "alphabet",
                        f"emitted action {a!r} on transition ({t.source!r}, {t.action!r}) is not in the alphabet",
                    )
                )
        key = (t.source, t.action)
        if key in keys:
            errors.append(
                ValidationError(
                    "nondeterminism", f"state {t.source!r} has more than one transition on {t.action!r}"
                )
            )
        else:
            keys[key] = t
    return errors


def require_valid(ea: EditAutomaton) -> EditAutomaton:
    errors = validate_edit(ea)
    if errors:
        raise ModelError(f"edit automaton {ea.name!r} is invalid: " + "; ".join(map(str, errors)))
    return ea


# --------------------------------------------------------------------------
# I/O automata


@dataclass(frozen=True, order=True)
class Emission:
    """Position inside an emission run: the next action to emit is ``pending[index-1]``."""

    input: Action
    pending: Trace
    index: int
    target: str

    def __post_init__(self) -> None:
        if not 1 <= self.index <= len(self.pending):
            raise ModelError(f"emission index {self.index} outside 1..{len(self.pending)}")

    @property
    def next_action(self) -> Action:
        return self.pending[self.index - 1]


@dataclass(frozen=True, order=True)
class IOState:
    origin: str
    emission: Emission | None = None

    @property
    def committed(self) -> bool:
        return self.emission is not None

    def __str__(self) -> str:
        if self.emission is None:
            return self.origin
        e = self.emission
        return f"{self.origin}/{e.input}#{e.index}"


@dataclass(frozen=True, order=True)
class IOAction:
    name: Action
    polarity: str  # INPUT, OUTPUT or INTERNAL

    def __post_init__(self) -> None:
        if self.polarity not in (INPUT, OUTPUT, INTERNAL):
            raise ModelError(f"bad polarity {self.polarity!r} on {self.name!r}")

    def __str__(self) -> str:
        return f"{self.name}{self.polarity}"


def inp(name: Action) -> IOAction:
    return IOAction(name, INPUT)


def out(name: Action) -> IOAction:
    return IOAction(name, OUTPUT)


@dataclass(frozen=True)
class IOTransition:
    source: Hashable
    action: IOAction
    target: Hashable


def state_label(state: Hashable) -> str:
    """Readable name for an I/O state or a tuple of them."""
    if isinstance(state, tuple):
        return "(" + ",".join(state_label(s) for s in state) + ")"
    return str(state)


@dataclass(frozen=True)
class IOAutomaton:
    name: str
    states: tuple[Hashable, ...]
    start: tuple[Hashable, ...]
    inputs: frozenset[Action] = frozenset()
    outputs: frozenset[Action] = frozenset()
    internals: frozenset[Action] = frozenset()
    transitions: tuple[IOTransition, ...] = ()
    committed: frozenset[Hashable] = frozenset()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        for name in ("inputs", "outputs", "internals", "committed"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        for name in ("states", "start", "transitions", "warnings"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @property
    def alphabet(self) -> frozenset[Action]:
        return self.inputs | self.outputs | self.internals

    def outgoing(self) -> dict[Hashable, list[IOTransition]]:
        table: dict[Hashable, list[IOTransition]] = {s: [] for s in self.states}
        for t in self.transitions:
            table[t.source].append(t)
        return table

    def is_committed(self, state: Hashable) -> bool:
        return state in self.committed

    def validate(self) -> list[str]:
        problems: list[str] = []
        states = set(self.states)
        for s in self.start:
            if s not in states:
                problems.append(f"start state {state_label(s)} is not declared")
        for s in self.committed:
            if s not in states:
                problems.append(f"committed state {state_label(s)} is not declared")
        overlap = (self.inputs & self.internals) | (self.outputs & self.internals)
        if overlap:
            problems.append(f"actions {sorted(overlap)} are both internal and external")
        for t in self.transitions:
            if t.source not in states or t.target not in states:
                problems.append(f"transition {t} references an undeclared state")
            pool = {INPUT: self.inputs, OUTPUT: self.outputs, INTERNAL: self.internals}[t.action.polarity]
            if t.action.name not in pool:
                problems.append(f"transition action {t.action} is not in the signature")
        return problems


def alphabet_of(m: Union[EditAutomaton, IOAutomaton]) -> frozenset[Action]:
    """Declared alphabet, with I/O polarity stripped."""
    return frozenset(m.alphabet)


def shared_alphabet(ms: Iterable[Union[EditAutomaton, IOAutomaton]]) -> frozenset[Action]:
    """Actions declared by at least two of the given automata."""
    seen: set[Action] = set()
    shared: set[Action] = set()
    for m in ms:
        alpha = alphabet_of(m)
        shared |= seen & alpha
        seen |= alpha
    return frozenset(shared)


def lts(name: str, initial: str, transitions: Iterable[tuple[str, Action, str]],
        states: Iterable[str] = (), alphabet: Iterable[Action] = ()) -> IOAutomaton:
    """Framework model: an input-only transition system with no committed states."""
    transitions = list(transitions)
    all_states = list(dict.fromkeys([initial, *states, *(s for s, _, _ in transitions), *(t for _, _, t in transitions)]))
    acts = frozenset(alphabet) | {a for _, a, _ in transitions}
    return IOAutomaton(
        name=name,
        states=tuple(all_states),
        start=(initial,),
        inputs=acts,
        transitions=tuple(IOTransition(s, inp(a), t) for s, a, t in transitions),
    )


# --------------------------------------------------------------------------
# Policies


@dataclass(frozen=True)
class Policy:
    """A named CTL formula whose ``act`` atoms are bound to (action, component) pairs."""

    name: str
    formula: "Formula"
    bindings: Mapping[Action, tuple[Action, str]] = field(default_factory=dict, compare=False)

    def bound_to(self, targets: Mapping[Action, str]) -> Policy:
        from .ctl import atoms

        missing = sorted(a for a in atoms(self.formula) if a not in targets and a not in self.bindings)
        if missing:
            raise ModelError(f"policy {self.name!r}: atoms {missing} have no binding")
        bindings = {a: self.bindings.get(a) or (a, targets[a]) for a in sorted(atoms(self.formula))}
        return Policy(self.name, self.formula, bindings)

    def resolved_formula(self) -> Formula:
        """Formula with atoms replaced by the delivered, suffixed action names."""
        from .ctl import atoms, rename_atoms

        missing = sorted(a for a in atoms(self.formula) if a not in self.bindings)
        if missing:
            raise ModelError(f"policy {self.name!r}: atoms {missing} have no binding")
        return rename_atoms(self.formula, {a: f"{b}-{tgt}" for a, (b, tgt) in self.bindings.items()})
