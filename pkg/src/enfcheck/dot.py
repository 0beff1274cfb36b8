"""Graphviz DOT rendering of automata and global state graphs."""

from __future__ import annotations

from functools import singledispatch

from .compose import GlobalStateGraph
from .model import EditAutomaton, IOAutomaton, state_label


def _q(text: str) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _digraph(name: str, nodes: list[str], edges: list[str]) -> str:
    body = ["  rankdir=LR;", "  node [shape=circle];", *nodes, *edges]
    return f"digraph {_q(name)} {{\n" + "\n".join(body) + "\n}\n"


@singledispatch
def export_dot(m) -> str:
    """DOT digraph; committed states are drawn as boxes, start states in bold."""
    raise TypeError(f"cannot export {type(m).__name__} to DOT")


@export_dot.register
def _(m: EditAutomaton) -> str:
    index = {s: i for i, s in enumerate(m.states)}
    nodes = [
        f"  n{i} [label={_q(s)}{', style=bold' if s == m.initial else ''}];" for s, i in index.items()
    ]
    edges = []
    for t in m.transitions:
        label = f"{t.action} / [{', '.join(t.emit)}]"
        edges.append(f"  n{index[t.source]} -> n{index[t.target]} [label={_q(label)}];")
    return _digraph(m.name, nodes, edges)


@export_dot.register
def _(m: IOAutomaton) -> str:
    index = {s: i for i, s in enumerate(m.states)}
    nodes = []
    for s, i in index.items():
        attrs = [f"label={_q(state_label(s))}"]
        if m.is_committed(s):
            attrs.append("shape=box")
        if s in m.start:
            attrs.append("style=bold")
        nodes.append(f"  n{i} [{', '.join(attrs)}];")
    edges = [f"  n{index[t.source]} -> n{index[t.target]} [label={_q(str(t.action))}];" for t in m.transitions]
    return _digraph(m.name, nodes, edges)


@export_dot.register
def _(g: GlobalStateGraph) -> str:
    dead = set(g.deadlocks)
    nodes = []
    for i in range(g.n_nodes):
        attrs = [f"label={_q(' | '.join(g.describe(i)[1:]))}"]
        if i in dead:
            attrs.append("shape=doubleoctagon, color=red")
        elif g.committed[i]:
            attrs.append("shape=box")
        if i == g.initial:
            attrs.append("style=bold")
        nodes.append(f"  n{i} [{', '.join(attrs)}];")
    edges = [f"  n{e.src} -> n{e.dst} [label={_q(e.label)}];" for e in g.edges]
    return _digraph(g.compiled.network.name, nodes, edges)
