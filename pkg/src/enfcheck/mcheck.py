"""Explicit-state CTL checking and deadlock detection on the global state graph.

Policies speak about action occurrences while CTL is evaluated on states, so
the global graph is first turned into a Kripke structure whose nodes are
(global state, incoming action) pairs. Formulas are rewritten into the
adequate set {EX, EU, EG} and labeled bottom-up with fixpoint kernels.
"""

from __future__ import annotations

import time
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .compose import DEFAULT_MAX_STATES, GlobalStateGraph, Network, explore
from .ctl import (
    AF, AG, AU, AW, AX, EF, EG, EU, EX, Act, And, Deadlock, FalseF, Formula, Implies, Not, Or, TrueF,
    atoms, to_text,
)
from .model import DEADLOCK, ModelError, Policy, Trace


class BindingError(ModelError):
    pass


# --------------------------------------------------------------------------
# Kripke structure


@dataclass(frozen=True)
class KripkeStructure:
    succ: tuple[tuple[int, ...], ...]
    labels: tuple[frozenset[str], ...]
    initial: int = 0
    origin: tuple[tuple[int, str | None], ...] = ()  # (graph node, incoming label) per Kripke node
    alphabet: frozenset[str] = frozenset()  # every action an atom may name

    def __post_init__(self) -> None:
        if len(self.succ) != len(self.labels):
            raise ValueError("succ and labels differ in length")
        for v, ws in enumerate(self.succ):
            if not ws:
                raise ValueError(f"node {v} has no successor; the relation must be total")
        if not self.alphabet:
            object.__setattr__(self, "alphabet", frozenset().union(*self.labels) - {DEADLOCK})

    @property
    def n(self) -> int:
        return len(self.succ)

    def csr(self):
        succ_ptr = [0]
        succ_idx: list[int] = []
        preds: list[list[int]] = [[] for _ in range(self.n)]
        for v, ws in enumerate(self.succ):
            succ_idx.extend(ws)
            succ_ptr.append(len(succ_idx))
            for w in ws:
                preds[w].append(v)
        pred_ptr = [0]
        pred_idx: list[int] = []
        for ps in preds:
            pred_idx.extend(ps)
            pred_ptr.append(len(pred_idx))
        return succ_ptr, succ_idx, pred_ptr, pred_idx

    def incoming(self, v: int) -> str | None:
        return self.origin[v][1] if self.origin else None


def kripke_from_graph(g: GlobalStateGraph) -> KripkeStructure:
    """Action-as-state encoding: one node for the start, one per (target, incoming label)."""
    index: dict[tuple[int, str | None], int] = {(g.initial, None): 0}
    origin: list[tuple[int, str | None]] = [(g.initial, None)]
    queue = deque([0])
    succ: list[list[int]] = []
    while queue:
        v = queue.popleft()
        node, _ = origin[v]
        row = []
        for e in g.out[node]:
            edge = g.edges[e]
            key = (edge.dst, edge.label)
            w = index.get(key)
            if w is None:
                w = index[key] = len(origin)
                origin.append(key)
                queue.append(w)
            row.append(w)
        succ.append(row or [v])  # nodes are dequeued in index order
    dead = set(g.deadlocks)
    labels = []
    for node, label in origin:
        props = set()
        if label is not None:
            props.add(label)
        if node in dead:
            props.add(DEADLOCK)
        labels.append(frozenset(props))
    return KripkeStructure(
        succ=tuple(tuple(s) for s in succ),
        labels=tuple(labels),
        initial=0,
        origin=tuple(origin),
        alphabet=frozenset(c.name for c in g.compiled.network.channels),
    )


# --------------------------------------------------------------------------
# Labeling


def to_adequate(f: Formula) -> Formula:
    """Rewrite into true/false/atoms, negation, conjunction, disjunction, EX, EU and EG."""
    if isinstance(f, (TrueF, FalseF, Act, Deadlock)):
        return f
    if isinstance(f, Not):
        return Not(to_adequate(f.operand))
    if isinstance(f, And):
        return And(to_adequate(f.left), to_adequate(f.right))
    if isinstance(f, Or):
        return Or(to_adequate(f.left), to_adequate(f.right))
    if isinstance(f, Implies):
        return Or(Not(to_adequate(f.left)), to_adequate(f.right))
    if isinstance(f, EX):
        return EX(to_adequate(f.operand))
    if isinstance(f, EG):
        return EG(to_adequate(f.operand))
    if isinstance(f, EU):
        return EU(to_adequate(f.left), to_adequate(f.right))
    if isinstance(f, AX):
        return Not(EX(Not(to_adequate(f.operand))))
    if isinstance(f, EF):
        return EU(TrueF(), to_adequate(f.operand))
    if isinstance(f, AG):
        return Not(EU(TrueF(), Not(to_adequate(f.operand))))
    if isinstance(f, AF):
        return Not(EG(Not(to_adequate(f.operand))))
    if isinstance(f, AU):
        p, q = to_adequate(f.left), to_adequate(f.right)
        return Not(Or(EU(Not(q), And(Not(p), Not(q))), EG(Not(q))))
    if isinstance(f, AW):
        p, q = to_adequate(f.left), to_adequate(f.right)
        return Not(EU(Not(q), And(Not(p), Not(q))))
    raise TypeError(f"not a formula: {f!r}")


class Labeler:
    """Memoized satisfaction sets over one Kripke structure."""

    def __init__(self, k: KripkeStructure, backend: str | None = None) -> None:
        self.k = k
        self.backend = backend
        succ_ptr, succ_idx, pred_ptr, pred_idx = k.csr()
        self.succ_ptr = np.asarray(succ_ptr, dtype=np.int32)
        self.succ_idx = np.asarray(succ_idx, dtype=np.int32)
        self.pred_ptr = np.asarray(pred_ptr, dtype=np.int32)
        self.pred_idx = np.asarray(pred_idx, dtype=np.int32)
        self._by_prop: dict[str, list[int]] = {}
        for v, props in enumerate(k.labels):
            for a in props:
                self._by_prop.setdefault(a, []).append(v)
        self._memo: dict[Formula, np.ndarray] = {}

    def sat(self, f: Formula) -> np.ndarray:
        """Boolean vector over nodes; accepts the full grammar."""
        return self._sat(to_adequate(f))

    def _prop(self, name: str) -> np.ndarray:
        r = np.zeros(self.k.n, dtype=bool)
        r[self._by_prop.get(name, [])] = True
        return r

    def _sat(self, f: Formula) -> np.ndarray:
        hit = self._memo.get(f)
        if hit is not None:
            return hit
        n = self.k.n
        if isinstance(f, TrueF):
            r = np.ones(n, dtype=bool)
        elif isinstance(f, FalseF):
            r = np.zeros(n, dtype=bool)
        elif isinstance(f, Act):
            r = self._prop(f.action)
        elif isinstance(f, Deadlock):
            r = self._prop(DEADLOCK)
        elif isinstance(f, Not):
            r = ~self._sat(f.operand)
        elif isinstance(f, And):
            r = self._sat(f.left) & self._sat(f.right)
        elif isinstance(f, Or):
            r = self._sat(f.left) | self._sat(f.right)
        elif isinstance(f, EX):
            # every node has a successor, so no reduceat segment is empty
            r = np.logical_or.reduceat(self._sat(f.operand)[self.succ_idx], self.succ_ptr[:-1])
        elif isinstance(f, EU):
            r = np.asarray(kernels.eu(self.pred_ptr, self.pred_idx, self._sat(f.left), self._sat(f.right),
                                      backend=self.backend), dtype=bool)
        elif isinstance(f, EG):
            r = np.asarray(kernels.eg(self.succ_ptr, self.succ_idx, self.pred_ptr, self.pred_idx,
                                      self._sat(f.operand), backend=self.backend), dtype=bool)
        else:
            raise TypeError(f"formula outside the adequate set: {f!r}")
        r.setflags(write=False)
        self._memo[f] = r
        return r

    # -- explanation paths ------------------------------------------------

    def bfs(self, start: int, target, through=None) -> list[int] | None:
        """Shortest path from ``start`` to a node in ``target``; inner nodes must lie in ``through``."""
        if target[start]:
            return [start]
        if through is not None and not through[start]:
            return None
        parent = {start: -1}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in self.k.succ[v]:
                if w in parent:
                    continue
                parent[w] = v
                if target[w]:
                    path = [w]
                    while parent[path[-1]] != -1:
                        path.append(parent[path[-1]])
                    return path[::-1]
                if through is None or through[w]:
                    queue.append(w)
        return None

    def lasso(self, start: int, inside) -> list[int]:
        """Path from ``start`` staying in ``inside`` until a node repeats."""
        path = [start]
        seen = {start}
        v = start
        while True:
            w = next(w for w in self.k.succ[v] if inside[w])
            path.append(w)
            if w in seen:
                return path
            seen.add(w)
            v = w

    def counterexample(self, f: Formula, v: int) -> list[int]:
        """Path from ``v`` explaining why ``f`` fails at ``v``."""
        if isinstance(f, Not):
            return self.witness(f.operand, v)
        if isinstance(f, And):
            part = f.left if not self.sat(f.left)[v] else f.right
            return self.counterexample(part, v)
        if isinstance(f, Or):
            return self.counterexample(f.left, v)
        if isinstance(f, Implies):
            return self.counterexample(f.right, v)
        if isinstance(f, AX):
            bad = self.sat(f.operand)
            w = next(w for w in self.k.succ[v] if not bad[w])
            return [v] + self.counterexample(f.operand, w)
        if isinstance(f, AG):
            good = self.sat(f.operand)
            path = self.bfs(v, ~good)
            return path[:-1] + self.counterexample(f.operand, path[-1])
        if isinstance(f, AF):
            return self.lasso(v, self.sat(EG(Not(f.operand))))
        if isinstance(f, (AW, AU)):
            p, q = self.sat(f.left), self.sat(f.right)
            path = self.bfs(v, ~p & ~q, through=~q)
            if path is not None:
                return path[:-1] + self.counterexample(f.left, path[-1])
            return self.lasso(v, self.sat(EG(Not(f.right))))
        return [v]

    def witness(self, f: Formula, v: int) -> list[int]:
        """Path from ``v`` showing that ``f`` holds at ``v`` (used under negation)."""
        if isinstance(f, Not):
            return self.counterexample(f.operand, v)
        if isinstance(f, And):
            return self.witness(f.left, v)
        if isinstance(f, Or):
            part = f.left if self.sat(f.left)[v] else f.right
            return self.witness(part, v)
        if isinstance(f, Implies):
            if not self.sat(f.left)[v]:
                return [v]
            return self.witness(f.right, v)
        if isinstance(f, EX):
            good = self.sat(f.operand)
            w = next(w for w in self.k.succ[v] if good[w])
            return [v] + self.witness(f.operand, w)
        if isinstance(f, EF):
            path = self.bfs(v, self.sat(f.operand))
            return path[:-1] + self.witness(f.operand, path[-1])
        if isinstance(f, EU):
            path = self.bfs(v, self.sat(f.right), through=self.sat(f.left))
            return path[:-1] + self.witness(f.right, path[-1])
        if isinstance(f, EG):
            return self.lasso(v, self.sat(f))
        return [v]


@dataclass(frozen=True)
class CtlResult:
    holds: bool
    path: tuple[int, ...] = ()  # Kripke nodes from the initial node when violated
    trace: Trace = ()


def check_ctl(k: KripkeStructure, f: Formula, backend: str | None = None) -> CtlResult:
    unknown = sorted(a for a in atoms(f) if a not in k.alphabet)
    if unknown:
        raise BindingError(f"atoms {unknown} name no action of the structure")
    lab = Labeler(k, backend)
    if lab.sat(f)[k.initial]:
        return CtlResult(True)
    path = lab.counterexample(f, k.initial)
    return CtlResult(False, tuple(path), path_trace(k, path))


def path_trace(k: KripkeStructure, path: Sequence[int]) -> Trace:
    """Delivered labels along a Kripke path; deadlock self-loops contribute nothing."""
    trace = []
    for prev, v in zip(path, path[1:]):
        if prev == v and DEADLOCK in k.labels[v]:
            continue
        trace.append(k.incoming(v))
    return tuple(trace)


# --------------------------------------------------------------------------
# Deadlocks and the report


@dataclass(frozen=True)
class DeadlockFinding:
    node: int
    state: tuple[str, ...]
    trace: Trace
    blocked: tuple[str, ...] = ()  # deliveries the composite is stuck on


def find_deadlocks(g: GlobalStateGraph) -> list[DeadlockFinding]:
    parent = g.shortest_paths()
    return [
        DeadlockFinding(d, g.describe(d), g.trace_to(d, parent), g.compiled.pending_outputs(g.nodes[d]))
        for d in g.deadlocks
    ]


@dataclass(frozen=True)
class PolicyVerdict:
    name: str
    formula: str  # resolved formula text
    holds: bool
    counterexample: Trace | None = None

    @property
    def verdict(self) -> str:
        return "holds" if self.holds else "violated"


@dataclass(frozen=True)
class Stats:
    states: int = 0
    edges: int = 0
    kripke_nodes: int = 0
    runtime_ms: float = 0.0


@dataclass(frozen=True)
class VerificationReport:
    network: str = ""
    policies: tuple[PolicyVerdict, ...] = ()
    deadlocks: tuple[DeadlockFinding, ...] = ()
    stats: Stats = field(default_factory=Stats)

    @property
    def interference(self) -> bool:
        return bool(self.deadlocks) or any(not p.holds for p in self.policies)

    def verdict_of(self, name: str) -> PolicyVerdict:
        return next(p for p in self.policies if p.name == name)


def resolve_policy(policy: Policy, net: Network) -> Formula:
    """Bind atoms through the network routing and check they name delivered actions."""
    try:
        bound = policy.bound_to(net.targets)
    except ModelError as exc:
        raise BindingError(str(exc)) from exc
    channels = {c.name for c in net.channels}
    for atom, (base, target) in bound.bindings.items():
        if f"{base}-{target}" not in channels:
            raise BindingError(f"policy {policy.name!r}: atom {atom!r} is bound to {base}-{target}, "
                               "which the network never delivers")
    return bound.resolved_formula()


def verify(net: Network, policies: Iterable[Policy] = (), max_states: int = DEFAULT_MAX_STATES,
           backend: str | None = None, graph: GlobalStateGraph | None = None) -> VerificationReport:
    t0 = time.perf_counter()
    policies = list(policies)
    formulas = [resolve_policy(p, net) for p in policies]
    g = graph if graph is not None else explore(net, max_states, backend=backend)
    k = kripke_from_graph(g)
    lab = Labeler(k, backend)
    verdicts = []
    for p, f in zip(policies, formulas):
        holds = bool(lab.sat(f)[k.initial])
        trace = None
        if not holds:
            trace = path_trace(k, lab.counterexample(f, k.initial))
        verdicts.append(PolicyVerdict(p.name, to_text(f), holds, trace))
    deadlocks = find_deadlocks(g)
    runtime = (time.perf_counter() - t0) * 1000.0
    return VerificationReport(
        network=net.name,
        policies=tuple(verdicts),
        deadlocks=tuple(deadlocks),
        stats=Stats(g.n_nodes, g.n_edges, k.n, runtime),
    )

