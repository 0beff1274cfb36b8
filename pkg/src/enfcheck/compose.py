"""Composite enforcer, network assembly and global state exploration.

Network semantics
-----------------
The network has three kinds of components: a single-state environment that
can emit every action, the composite enforcer, and the framework models (the
app lifecycle and one protocol per resource). Actions are renamed so that the
environment talks only to the composite (``a-env``) and the composite talks
only to the framework model the action is routed to (``a-<target>``). Global
transitions are binary synchronizations between a sender and a receiver; a
committed composite state suspends the environment.

Two environment guards restrict what the environment may emit:

* context guard: a framework model that declares an action routed to another
  component must currently enable it (for instance the lifecycle model only
  lets the app touch a resource while the activity is running);
* reaction guard: every enforcer that reacts to the action, taken alone, must
  be able to deliver its whole response to the framework models in their
  current state.

The second guard encodes the premise that each enforcer works in isolation;
what remains observable is the interference between enforcers.
"""

from __future__ import annotations

import itertools
import weakref
from collections import deque
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .edit2io import CompletionPolicy, transform
from .kernels import _pykernels
from .model import (
    INPUT,
    OUTPUT,
    Action,
    EditAutomaton,
    Emission,
    IOAction,
    IOAutomaton,
    IOState,
    IOTransition,
    ModelError,
    inp,
    out,
    shared_alphabet,
    state_label,
)

ENV = "env"
DEFAULT_MAX_STATES = 1_000_000


class CompositionError(ModelError):
    pass


class RoutingError(ModelError):
    pass


class WiringError(ModelError):
    pass


class ExplorationBoundExceeded(Exception):
    def __init__(self, states: int, frontier: int, limit: int) -> None:
        super().__init__(
            f"state space exceeds the bound of {limit} states ({states} discovered, frontier of {frontier})"
        )
        self.states = states
        self.frontier = frontier
        self.limit = limit


# --------------------------------------------------------------------------
# Enforcer composition


def compose_enforcers(ioas: Sequence[IOAutomaton], name: str = "composite") -> IOAutomaton:
    """Synchronous product: shared actions fire jointly, the rest interleave.

    Inside the product a committed component takes priority: while any
    component is committed only transitions with a committed participant fire.
    """
    comps = list(ioas)
    if not comps:
        raise CompositionError("no automata to compose")
    for a in sorted(shared_alphabet(comps)):
        only_in = [m.name for m in comps if a in m.inputs and a not in m.outputs]
        only_out = [m.name for m in comps if a in m.outputs and a not in m.inputs]
        if only_in and only_out:
            raise CompositionError(
                f"polarity clash on shared action {a!r}: input-only in {only_in}, output-only in {only_out}"
            )
    declarers: dict[Action, list[int]] = {}
    for i, m in enumerate(comps):
        for a in m.alphabet:
            declarers.setdefault(a, []).append(i)

    moves: list[dict[Hashable, dict[IOAction, list[Hashable]]]] = []
    for m in comps:
        table: dict[Hashable, dict[IOAction, list[Hashable]]] = {s: {} for s in m.states}
        for t in m.transitions:
            table[t.source].setdefault(t.action, []).append(t.target)
        moves.append(table)

    start = tuple(m.start[0] for m in comps)
    states = [start]
    seen = {start}
    transitions: list[IOTransition] = []
    queue = deque([start])
    while queue:
        s = queue.popleft()
        committed = [m.is_committed(x) for m, x in zip(comps, s)]
        labels = sorted({lab for i, x in enumerate(s) for lab in moves[i][x]})
        for lab in labels:
            parts = declarers[lab.name]
            options = [moves[i][s[i]].get(lab, ()) for i in parts]
            if not all(options):
                continue
            if any(committed) and not any(committed[i] for i in parts):
                continue
            for combo in itertools.product(*options):
                nxt = list(s)
                for i, t in zip(parts, combo):
                    nxt[i] = t
                nxt = tuple(nxt)
                transitions.append(IOTransition(s, lab, nxt))
                if nxt not in seen:
                    seen.add(nxt)
                    states.append(nxt)
                    queue.append(nxt)
    return IOAutomaton(
        name=name,
        states=tuple(states),
        start=(start,),
        inputs=frozenset().union(*(m.inputs for m in comps)),
        outputs=frozenset().union(*(m.outputs for m in comps)),
        internals=frozenset().union(*(m.internals for m in comps)),
        transitions=tuple(transitions),
        committed=frozenset(s for s in states if any(m.is_committed(x) for m, x in zip(comps, s))),
        warnings=tuple(w for m in comps for w in m.warnings),
    )


def canonical_form(ioa: IOAutomaton) -> tuple:
    """Relabel states by BFS over sorted transitions; equal forms mean isomorphic automata."""
    table = ioa.outgoing()
    (start,) = ioa.start
    index = {start: 0}
    order = [start]
    edges = []
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for t in sorted(table[s], key=lambda t: t.action):
            if t.target not in index:
                index[t.target] = len(order)
                order.append(t.target)
                queue.append(t.target)
            edges.append((index[s], str(t.action), index[t.target]))
    committed = tuple(ioa.is_committed(s) for s in order)
    return committed, tuple(sorted(edges))


# --------------------------------------------------------------------------
# Renaming and environment


def rename_for_network(composite: IOAutomaton, targets: Mapping[Action, str]) -> IOAutomaton:
    """Inputs become ``a-env``; outputs become ``a-<target of a>``."""
    missing = sorted(a for a in composite.alphabet if a not in targets)
    if missing:
        raise RoutingError(f"actions {missing} of {composite.name!r} have no target component")

    def rename(action: IOAction) -> IOAction:
        if action.polarity == INPUT:
            return IOAction(f"{action.name}-{ENV}", INPUT)
        if action.polarity == OUTPUT:
            return IOAction(f"{action.name}-{targets[action.name]}", OUTPUT)
        return action

    return IOAutomaton(
        name=composite.name,
        states=composite.states,
        start=composite.start,
        inputs=frozenset(f"{a}-{ENV}" for a in composite.inputs),
        outputs=frozenset(f"{a}-{targets[a]}" for a in composite.outputs),
        internals=composite.internals,
        transitions=tuple(IOTransition(t.source, rename(t.action), t.target) for t in composite.transitions),
        committed=composite.committed,
        warnings=composite.warnings,
    )


def synthesize_environment(alphabet: Iterable[Action]) -> IOAutomaton:
    acts = sorted(set(alphabet))
    if not acts:
        raise WiringError("the environment alphabet is empty: nothing to verify")
    return IOAutomaton(
        name=ENV,
        states=(ENV,),
        start=(ENV,),
        outputs=frozenset(f"{a}-{ENV}" for a in acts),
        transitions=tuple(IOTransition(ENV, out(f"{a}-{ENV}"), ENV) for a in acts),
    )


def forwarder(actions: Iterable[Action], name: str = "forwarder") -> IOAutomaton:
    """Pass-through component relaying each action unchanged."""
    acts = sorted(set(actions))
    home = IOState("fwd")
    states = [home]
    transitions = []
    for a in acts:
        mid = IOState("fwd", Emission(a, (a,), 1, "fwd"))
        states.append(mid)
        transitions += [IOTransition(home, inp(a), mid), IOTransition(mid, out(a), home)]
    return IOAutomaton(
        name=name,
        states=tuple(states),
        start=(home,),
        inputs=frozenset(acts),
        outputs=frozenset(acts),
        transitions=tuple(transitions),
        committed=frozenset(states[1:]),
    )


def rename_framework(fid: str, model: IOAutomaton) -> IOAutomaton:
    return IOAutomaton(
        name=fid,
        states=model.states,
        start=model.start,
        inputs=frozenset(f"{a}-{fid}" for a in model.inputs),
        transitions=tuple(
            IOTransition(t.source, IOAction(f"{t.action.name}-{fid}", t.action.polarity), t.target)
            for t in model.transitions
        ),
    )


# --------------------------------------------------------------------------
# Network


@dataclass(frozen=True)
class Channel:
    name: str
    sender: str
    receiver: str


@dataclass(frozen=True, eq=False)
class Network:
    name: str
    environment: IOAutomaton
    composite: IOAutomaton  # renamed for the network
    frameworks: tuple[tuple[str, IOAutomaton], ...]  # renamed inputs a-<id>
    channels: tuple[Channel, ...]
    components: tuple[IOAutomaton, ...]  # enforcer I/O automata (plus forwarder), before renaming
    base_composite: IOAutomaton
    base_frameworks: tuple[tuple[str, IOAutomaton], ...]
    targets: Mapping[Action, str]
    completion: CompletionPolicy
    app: str | None = None
    enforcers: tuple[str, ...] = field(default=())

    @property
    def framework_ids(self) -> tuple[str, ...]:
        return tuple(fid for fid, _ in self.frameworks)


def infer_targets(frameworks: Sequence[tuple[str, IOAutomaton]], app: str | None,
                  explicit: Mapping[Action, str] | None = None,
                  extra: Iterable[Action] = ()) -> dict[Action, str]:
    """Route each action: explicit entry, else the unique non-app model declaring it, else the app."""
    explicit = dict(explicit or {})
    actions = set(extra) | set(explicit)
    for _, m in frameworks:
        actions |= m.alphabet
    result: dict[Action, str] = {}
    for a in sorted(actions):
        if a in explicit:
            result[a] = explicit[a]
            continue
        owners = [fid for fid, m in frameworks if a in m.alphabet and fid != app]
        if len(owners) == 1:
            result[a] = owners[0]
        elif not owners and app is not None and a in dict(frameworks)[app].alphabet:
            result[a] = app
        elif owners:
            raise RoutingError(f"action {a!r} is declared by several resources {owners}; add a target entry")
        else:
            raise WiringError(f"action {a!r} is not received by any framework model")
    return result


def build_network(enforcers: Sequence[EditAutomaton], frameworks: Sequence[tuple[str, IOAutomaton]],
                  targets: Mapping[Action, str],
                  completion: "CompletionPolicy | str" = CompletionPolicy.IDENTITY,
                  *, app: str | None = None, name: str = "network") -> Network:
    completion = CompletionPolicy.parse(completion)
    frameworks = tuple((fid, m) for fid, m in frameworks)
    ids = [fid for fid, _ in frameworks]
    if len(set(ids)) != len(ids):
        raise WiringError(f"duplicate framework ids in {ids}")
    if ENV in ids:
        raise WiringError(f"framework id {ENV!r} is reserved for the environment")
    for fid, m in frameworks:
        if m.committed:
            raise ModelError(f"framework model {fid!r} must not contain committed states")
        if m.outputs or m.internals:
            raise ModelError(f"framework model {fid!r} must have an input-only signature")
        problems = m.validate()
        if problems:
            raise ModelError(f"framework model {fid!r}: " + "; ".join(problems))
        seen: set[tuple[Hashable, str]] = set()
        for t in m.transitions:
            key = (t.source, t.action.name)
            if key in seen:
                raise ModelError(f"framework model {fid!r} is nondeterministic on {t.action.name!r}")
            seen.add(key)

    monitored = frozenset().union(*(ea.alphabet for ea in enforcers)) if enforcers else frozenset()
    fw_actions = frozenset().union(*(m.alphabet for _, m in frameworks)) if frameworks else frozenset()
    needed = monitored | fw_actions
    unmapped = sorted(a for a in needed if a not in targets)
    if unmapped:
        raise RoutingError(f"actions {unmapped} are not routed to any framework model")
    fw_by_id = dict(frameworks)
    for a in sorted(needed):
        tgt = targets[a]
        if tgt not in fw_by_id:
            raise WiringError(f"action {a!r} is routed to unknown component {tgt!r}")
        if a not in fw_by_id[tgt].alphabet:
            raise WiringError(f"output {a}-{tgt} has no receiver: {tgt!r} does not declare {a!r}")

    components = [transform(ea, completion) for ea in enforcers]
    unmonitored = fw_actions - monitored
    if unmonitored and completion is CompletionPolicy.IDENTITY:
        components.append(forwarder(unmonitored))
    if not components:
        raise WiringError("network has neither enforcers nor forwarded actions: nothing to verify")

    base = compose_enforcers(components)
    routed = {a: targets[a] for a in base.alphabet}
    composite = rename_for_network(base, routed)
    env = synthesize_environment(base.inputs)
    renamed_fw = tuple((fid, rename_framework(fid, m)) for fid, m in frameworks)

    channels = []
    for a in sorted(env.outputs):
        if a not in composite.inputs:
            raise WiringError(f"environment output {a} has no receiver")
        channels.append(Channel(a, ENV, composite.name))
    receivers = {a: fid for fid, m in renamed_fw for a in m.inputs}
    for a in sorted(composite.outputs):
        if a not in receivers:
            raise WiringError(f"composite output {a} has no receiver")
        channels.append(Channel(a, composite.name, receivers[a]))

    return Network(
        name=name,
        environment=env,
        composite=composite,
        frameworks=renamed_fw,
        channels=tuple(channels),
        components=tuple(components),
        base_composite=base,
        base_frameworks=frameworks,
        targets=dict(targets),
        completion=completion,
        app=app,
        enforcers=tuple(ea.name for ea in enforcers),
    )


# --------------------------------------------------------------------------
# Integer tables for exploration


@dataclass
class Tables:
    n_actions: int
    radix: np.ndarray  # int64 [1 + k]: composite size, then each framework size
    comp_committed: np.ndarray  # uint8
    in_ptr: np.ndarray  # int32 CSR over composite states
    in_act: np.ndarray
    in_dst: np.ndarray
    out_ptr: np.ndarray
    out_act: np.ndarray
    out_dst: np.ndarray
    env_mask: np.ndarray  # uint8 per action
    target: np.ndarray  # int32 per action, framework index or -1
    guard_ptr: np.ndarray  # int32 CSR per action of context-guard frameworks
    guard_fw: np.ndarray
    fw_offset: np.ndarray  # int64 per framework into fw_delta
    fw_delta: np.ndarray  # int32 flattened [state * n_actions + action] -> next or -1
    react_ptr: np.ndarray  # int32 per composite input edge into seq_ptr
    seq_ptr: np.ndarray
    seq_act: np.ndarray


def _reaction(table: dict[Hashable, list[IOTransition]], ioa: IOAutomaton, state: Hashable,
              action: Action) -> tuple[Action, ...] | None:
    step = next((t for t in table[state] if t.action == inp(action)), None)
    if step is None:
        return None
    emitted = []
    s = step.target
    while ioa.is_committed(s):
        (t,) = table[s]
        emitted.append(t.action.name)
        s = t.target
    return tuple(emitted)


class CompiledNetwork:
    """A network flattened to integer tables, shared by every kernel."""

    def __init__(self, net: Network) -> None:
        self.network = net
        base = net.base_composite
        fws = net.base_frameworks
        self.actions: list[Action] = sorted(base.alphabet | frozenset().union(*(m.alphabet for _, m in fws)))
        aid = {a: i for i, a in enumerate(self.actions)}
        n_act = len(self.actions)
        self.fw_ids = [fid for fid, _ in fws]
        fw_index = {fid: j for j, fid in enumerate(self.fw_ids)}

        self.comp_states = list(base.states)
        cid = {s: i for i, s in enumerate(self.comp_states)}
        self.fw_states = [list(m.states) for _, m in fws]
        fsid = [{s: i for i, s in enumerate(states)} for states in self.fw_states]

        comp_tables = [c.outgoing() for c in net.components]
        declarers = {a: [i for i, c in enumerate(net.components) if a in c.alphabet] for a in base.alphabet}

        in_lists: list[list[tuple[int, int]]] = [[] for _ in self.comp_states]
        out_lists: list[list[tuple[int, int]]] = [[] for _ in self.comp_states]
        for t in base.transitions:
            pair = (aid[t.action.name], cid[t.target])
            if t.action.polarity == INPUT:
                in_lists[cid[t.source]].append(pair)
            elif t.action.polarity == OUTPUT:
                out_lists[cid[t.source]].append(pair)
        in_ptr, in_act, in_dst = _csr(in_lists)
        out_ptr, out_act, out_dst = _csr(out_lists)

        react_ptr = [0]
        seq_ptr = [0]
        seq_act: list[int] = []
        for c, edges in enumerate(in_lists):
            state = self.comp_states[c]
            for a, _ in sorted(edges):
                name = self.actions[a]
                for i in declarers[name]:
                    comp = net.components[i]
                    seq = _reaction(comp_tables[i], comp, state[i], name)
                    if seq is None:
                        continue
                    seq_act.extend(aid[x] for x in seq)
                    seq_ptr.append(len(seq_act))
                react_ptr.append(len(seq_ptr) - 1)

        target = np.full(n_act, -1, dtype=np.int32)
        for a, tgt in net.targets.items():
            if a in aid and tgt in fw_index:
                target[aid[a]] = fw_index[tgt]
        guard_lists = [[j for j, (_, m) in enumerate(fws) if a in m.alphabet and j != target[i]]
                       for i, a in enumerate(self.actions)]
        guard_ptr = np.zeros(n_act + 1, dtype=np.int32)
        guard_ptr[1:] = np.cumsum([len(g) for g in guard_lists])
        guard_fw = np.array([j for g in guard_lists for j in g], dtype=np.int32)

        offsets = []
        deltas = []
        off = 0
        for j, (_, m) in enumerate(fws):
            d = np.full(len(self.fw_states[j]) * n_act, -1, dtype=np.int32)
            for t in m.transitions:
                d[fsid[j][t.source] * n_act + aid[t.action.name]] = fsid[j][t.target]
            offsets.append(off)
            off += len(d)
            deltas.append(d)

        self.tables = Tables(
            n_actions=n_act,
            radix=np.array([len(self.comp_states)] + [len(s) for s in self.fw_states], dtype=np.int64),
            comp_committed=np.array([base.is_committed(s) for s in self.comp_states], dtype=np.uint8),
            in_ptr=in_ptr, in_act=in_act, in_dst=in_dst,
            out_ptr=out_ptr, out_act=out_act, out_dst=out_dst,
            env_mask=np.array([a in base.inputs for a in self.actions], dtype=np.uint8),
            target=target,
            guard_ptr=guard_ptr,
            guard_fw=guard_fw,
            fw_offset=np.array(offsets, dtype=np.int64),
            fw_delta=np.concatenate(deltas) if deltas else np.zeros(0, dtype=np.int32),
            react_ptr=np.array(react_ptr, dtype=np.int32),
            seq_ptr=np.array(seq_ptr, dtype=np.int32),
            seq_act=np.array(seq_act, dtype=np.int32),
        )
        if int(np.prod([float(r) for r in self.tables.radix])) >= 2 ** 62:
            raise ModelError("global state space too large to index")
        self.initial = (cid[base.start[0]], *(fsid[j][m.start[0]] for j, (_, m) in enumerate(fws)))
        self._view = _pykernels.ExplorationTables(self.tables)

    def successors(self, state: tuple[int, ...]) -> list[tuple[int, tuple[int, ...]]]:
        return _pykernels.successors(self._view, state)

    def label_name(self, label: int) -> str:
        a, kind = divmod(label, 2)
        action = self.actions[a]
        if kind == _pykernels.ENV:
            return f"{action}-{ENV}"
        return f"{action}-{self.fw_ids[int(self.tables.target[a])]}"

    def is_committed(self, state: tuple[int, ...]) -> bool:
        return bool(self.tables.comp_committed[state[0]])

    def pending_outputs(self, state: tuple[int, ...]) -> tuple[str, ...]:
        """Deliveries the composite offers in ``state``, enabled or not.

        When the composite itself is jammed (committed members disagree on a
        shared output) each committed member's next emission is listed instead.
        """
        t = self.tables
        c = state[0]
        offered = [int(a) for a in t.out_act[t.out_ptr[c]:t.out_ptr[c + 1]]]
        if not offered:
            aid = {a: i for i, a in enumerate(self.actions)}
            offered = sorted({aid[s.emission.next_action] for s in self.comp_states[c]
                              if isinstance(s, IOState) and s.committed})
        return tuple(self.label_name(2 * a + _pykernels.DELIVER) for a in offered)

    def describe(self, state: tuple[int, ...]) -> tuple[str, ...]:
        """(env, composite, framework...) local state names."""
        parts = [ENV, state_label(self.comp_states[state[0]])]
        parts += [str(self.fw_states[j][s]) for j, s in enumerate(state[1:])]
        return tuple(parts)


def _csr(lists: list[list[tuple[int, int]]]):
    ptr = np.zeros(len(lists) + 1, dtype=np.int32)
    acts: list[int] = []
    dsts: list[int] = []
    for i, items in enumerate(lists):
        for a, d in sorted(items):
            acts.append(a)
            dsts.append(d)
        ptr[i + 1] = len(acts)
    return ptr, np.array(acts, dtype=np.int32), np.array(dsts, dtype=np.int32)


_compiled: "weakref.WeakKeyDictionary[Network, CompiledNetwork]" = weakref.WeakKeyDictionary()


def compile_network(net: Network) -> CompiledNetwork:
    compiled = _compiled.get(net)
    if compiled is None:
        compiled = _compiled[net] = CompiledNetwork(net)
    return compiled


# --------------------------------------------------------------------------
# Global state graph


@dataclass(frozen=True)
class Edge:
    src: int
    label: str
    dst: int


@dataclass(eq=False)
class GlobalStateGraph:
    compiled: CompiledNetwork
    nodes: list[tuple[int, ...]]
    edges: list[Edge]
    out: list[list[int]]  # edge indices per node, in exploration order
    committed: list[bool]
    deadlocks: tuple[int, ...]
    initial: int = 0

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def describe(self, node: int) -> tuple[str, ...]:
        return self.compiled.describe(self.nodes[node])

    def successors(self, node: int) -> list[Edge]:
        return [self.edges[e] for e in self.out[node]]

    def shortest_paths(self) -> list[int | None]:
        """Parent edge index per node along the BFS tree from the initial node."""
        parent: list[int | None] = [None] * self.n_nodes
        seen = [False] * self.n_nodes
        seen[self.initial] = True
        queue = deque([self.initial])
        while queue:
            v = queue.popleft()
            for e in self.out[v]:
                w = self.edges[e].dst
                if not seen[w]:
                    seen[w] = True
                    parent[w] = e
                    queue.append(w)
        return parent

    def trace_to(self, node: int, parent: list[int | None] | None = None) -> tuple[str, ...]:
        parent = parent if parent is not None else self.shortest_paths()
        labels = []
        while node != self.initial:
            e = parent[node]
            if e is None:
                raise ValueError(f"node {node} is unreachable")
            labels.append(self.edges[e].label)
            node = self.edges[e].src
        return tuple(reversed(labels))

    def replay(self, trace: Iterable[str]) -> int:
        """Follow edge labels from the initial node; raises if a label is not enabled."""
        node = self.initial
        for label in trace:
            step = next((e for e in self.successors(node) if e.label == label), None)
            if step is None:
                raise ValueError(f"label {label!r} is not enabled at node {node} {self.describe(node)}")
            node = step.dst
        return node


def explore(net: Network, max_states: int = DEFAULT_MAX_STATES, backend: str | None = None) -> GlobalStateGraph:
    compiled = compile_network(net)
    codes, src, lab, dst, truncated, frontier = kernels.explore(compiled.tables, compiled.initial, max_states,
                                                                backend=backend)
    if truncated:
        raise ExplorationBoundExceeded(len(codes), frontier, max_states)
    radix = [int(r) for r in compiled.tables.radix]
    nodes = [_pykernels.decode(radix, int(c)) for c in codes]
    names = {}
    edges = []
    out: list[list[int]] = [[] for _ in nodes]
    for k, (s, l, d) in enumerate(zip(src, lab, dst)):
        name = names.get(l)
        if name is None:
            name = names[l] = compiled.label_name(int(l))
        edges.append(Edge(int(s), name, int(d)))
        out[int(s)].append(k)
    return GlobalStateGraph(
        compiled=compiled,
        nodes=nodes,
        edges=edges,
        out=out,
        committed=[compiled.is_committed(n) for n in nodes],
        deadlocks=tuple(i for i, o in enumerate(out) if not o),
    )
