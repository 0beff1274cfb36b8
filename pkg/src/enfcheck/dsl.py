"""The ``.enf`` model language: tokenizer, parser and canonical printer.

A document is a sequence of blocks::

    edit_automaton EA { alphabet a, b; initial 0; states 0, 1;
                        trans 0 -> 1 on a emit [a, b]; }
    lts Res { alphabet a; initial s; states s, t; trans s -> t on a; }
    policy P = AG (act(a) => AX A[ !act(c) W act(b) ]);
    network N { enforcers EA; app App; resource Res; target a -> Res;
                completion identity; policies P; }

Comments run from ``//`` to the end of the line. Policy atoms name a bare
action, routed by the network, or a qualified ``Component.action``.
"""

from __future__ import annotations

import re
from collections.abc import Iterator
from dataclasses import dataclass, field

from . import ctl
from .compose import Network, build_network, infer_targets
from .ctl import Formula
from .edit2io import CompletionPolicy
from .model import (
    EditAutomaton,
    EditTransition,
    IOAutomaton,
    ModelError,
    Policy,
    lts,
    require_valid,
)

# Report and DOT serialization live beside the parser; re-exported here.
from .dot import export_dot  # noqa: F401
from .report import emit_report_json, emit_report_text  # noqa: F401


class ParseError(ModelError):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


# --------------------------------------------------------------------------
# Tokens


@dataclass(frozen=True)
class Token:
    kind: str  # "id", "sym", "eof"
    text: str
    line: int
    col: int


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>//[^\n]*)|(?P<id>[A-Za-z0-9_]+)"
    r"|(?P<sym>->|=>|[{}\[\](),;=!&|.]|¬|∧|∨|⇒)"
)
_UNICODE = {"¬": "!", "∧": "&", "∨": "|", "⇒": "=>"}


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        if kind in ("id", "sym"):
            tokens.append(Token(kind, _UNICODE.get(value, value), line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# --------------------------------------------------------------------------
# Document


@dataclass(frozen=True)
class NetworkSpec:
    name: str
    enforcers: tuple[str, ...]
    app: str | None
    resources: tuple[str, ...]
    targets: tuple[tuple[str, str], ...] = ()  # explicit routing entries
    completion: CompletionPolicy = CompletionPolicy.IDENTITY
    policies: tuple[str, ...] = ()


@dataclass
class ModelDocument:
    edit_automata: dict[str, EditAutomaton] = field(default_factory=dict)
    frameworks: dict[str, IOAutomaton] = field(default_factory=dict)
    policies: dict[str, Policy] = field(default_factory=dict)
    networks: dict[str, NetworkSpec] = field(default_factory=dict)
    order: list[tuple[str, str]] = field(default_factory=list)  # (kind, name) in source order
    positions: dict[tuple[str, str], tuple[int, int]] = field(default_factory=dict, compare=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModelDocument):
            return NotImplemented
        return (self.edit_automata, self.frameworks, self.policies, self.networks, self.order) == (
            other.edit_automata, other.frameworks, other.policies, other.networks, other.order)

    def automaton(self, name: str) -> EditAutomaton:
        try:
            return self.edit_automata[name]
        except KeyError:
            raise ModelError(f"no edit automaton named {name!r}") from None

    def network_spec(self, name: str) -> NetworkSpec:
        try:
            return self.networks[name]
        except KeyError:
            raise ModelError(f"no network named {name!r}") from None

    def targets_of(self, name: str) -> dict[str, str]:
        spec = self.network_spec(name)
        fws = self._frameworks_of(spec)
        extra = {a for e in spec.enforcers for a in self.edit_automata[e].alphabet}
        return infer_targets(fws, spec.app, dict(spec.targets), extra)

    def _frameworks_of(self, spec: NetworkSpec) -> list[tuple[str, IOAutomaton]]:
        ids = ([spec.app] if spec.app else []) + list(spec.resources)
        return [(fid, self.frameworks[fid]) for fid in ids]

    def build(self, name: str, completion: CompletionPolicy | str | None = None) -> Network:
        spec = self.network_spec(name)
        return build_network(
            [self.edit_automata[e] for e in spec.enforcers],
            self._frameworks_of(spec),
            self.targets_of(name),
            spec.completion if completion is None else completion,
            app=spec.app,
            name=name,
        )

    def policies_of(self, name: str) -> list[Policy]:
        return [self.policies[p] for p in self.network_spec(name).policies]


# --------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def fail(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind != "eof" and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.fail(f"expected {text!r}, found {found!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "id":
            found = self.tok.text or "end of input"
            raise self.fail(f"expected {what}, found {found!r}")
        return self.advance()

    def id_list(self, sep: str | None = ",") -> list[Token]:
        items = [self.ident()]
        while True:
            if sep and self.accept(sep):
                items.append(self.ident())
            elif sep is None and self.tok.kind == "id":
                items.append(self.advance())
            elif sep is None and self.at(",") and self.tokens[self.i + 1].kind == "id":
                self.advance()
                items.append(self.advance())
            else:
                return items

    # -- policies ---------------------------------------------------------

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.accept("=>"):
            return ctl.Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.accept("|"):
            f = ctl.Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.accept("&"):
            f = ctl.And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.tok
        if self.accept("!"):
            return ctl.Not(self.unary())
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        if tok.kind != "id":
            raise self.fail(f"expected a formula, found {tok.text or 'end of input'!r}")
        word = tok.text
        if word in ctl.UNARY_TEMPORAL:
            self.advance()
            return ctl.UNARY_TEMPORAL[word](self.unary())
        if word in ("A", "E") and self.tokens[self.i + 1].text == "[":
            self.advance()
            self.expect("[")
            left = self.formula()
            op = self.ident("'U' or 'W'")
            cls = ctl.BINARY_TEMPORAL.get((word, op.text))
            if cls is None:
                raise self.fail(f"unknown operator {word}[ .. {op.text} .. ]", op)
            right = self.formula()
            self.expect("]")
            return cls(left, right)
        self.advance()
        if word == "true":
            return ctl.TrueF()
        if word == "false":
            return ctl.FalseF()
        if word == "deadlock":
            return ctl.Deadlock()
        if word == "act":
            self.expect("(")
            name = self.ident("action name").text
            if self.accept("."):
                name = f"{name}.{self.ident('action name').text}"
            self.expect(")")
            return ctl.Act(name)
        raise self.fail(f"unknown operator or keyword {word!r}", tok)

    # -- blocks -----------------------------------------------------------

    def document(self) -> ModelDocument:
        doc = ModelDocument()
        while self.tok.kind != "eof":
            tok = self.ident("a block keyword")
            kinds = {"edit_automaton": self.edit_block, "lts": self.lts_block,
                     "policy": self.policy_block, "network": self.network_block}
            if tok.text not in kinds:
                raise self.fail(f"unknown block {tok.text!r}", tok)
            name_tok = self.ident("block name")
            key = (tok.text, name_tok.text)
            if key in doc.positions:
                raise self.fail(f"duplicate {tok.text} {name_tok.text!r}", name_tok)
            doc.positions[key] = (name_tok.line, name_tok.col)
            doc.order.append(key)
            kinds[tok.text](doc, name_tok.text)
        return doc

    def clauses(self, allowed: set[str]) -> Iterator[Token]:
        self.expect("{")
        while not self.accept("}"):
            tok = self.ident("a clause keyword")
            if tok.text not in allowed:
                raise self.fail(f"unexpected clause {tok.text!r}", tok)
            yield tok
            self.expect(";")

    def edit_block(self, doc: ModelDocument, name: str) -> None:
        alphabet: list[str] = []
        initial = None
        states: list[str] = []
        trans: list[tuple[EditTransition, Token]] = []
        for kw in self.clauses({"alphabet", "initial", "states", "trans"}):
            if kw.text == "alphabet":
                alphabet += [t.text for t in self.id_list()]
            elif kw.text == "initial":
                initial = self.ident("state").text
            elif kw.text == "states":
                states += [t.text for t in self.id_list()]
            else:
                src = self.ident("state")
                self.expect("->")
                dst = self.ident("state")
                self.expect("on")
                act = self.ident("action")
                self.expect("emit")
                self.expect("[")
                emit = [] if self.at("]") else [t.text for t in self.id_list()]
                self.expect("]")
                trans.append((EditTransition(src.text, act.text, dst.text, tuple(emit)), src))
        if initial is None:
            raise self.fail(f"edit automaton {name!r} lacks an 'initial' clause")
        ea = EditAutomaton(name, frozenset(alphabet), tuple(states), initial, tuple(t for t, _ in trans))
        try:
            require_valid(ea)
        except ModelError as exc:
            line, col = doc.positions[("edit_automaton", name)]
            raise ParseError(str(exc), line, col) from None
        doc.edit_automata[name] = ea

    def lts_block(self, doc: ModelDocument, name: str) -> None:
        alphabet: list[str] = []
        initial = None
        states: list[str] = []
        trans: list[tuple[str, str, str]] = []
        for kw in self.clauses({"alphabet", "initial", "states", "trans"}):
            if kw.text == "alphabet":
                alphabet += [t.text for t in self.id_list()]
            elif kw.text == "initial":
                initial = self.ident("state").text
            elif kw.text == "states":
                states += [t.text for t in self.id_list()]
            else:
                src = self.ident("state")
                self.expect("->")
                dst = self.ident("state")
                self.expect("on")
                act = self.ident("action")
                if states and (src.text not in states or dst.text not in states):
                    bad = src if src.text not in states else dst
                    raise self.fail(f"undeclared state {bad.text!r} in lts {name!r}", bad)
                trans.append((src.text, act.text, dst.text))
        if initial is None:
            raise self.fail(f"lts {name!r} lacks an 'initial' clause")
        if states and initial not in states:
            raise self.fail(f"initial state {initial!r} of lts {name!r} is not declared")
        doc.frameworks[name] = lts(name, initial, trans, states, alphabet)

    def policy_block(self, doc: ModelDocument, name: str) -> None:
        self.expect("=")
        formula = self.formula()
        self.expect(";")
        bindings = {}
        for atom in sorted(ctl.atoms(formula)):
            if "." in atom:
                comp, action = atom.split(".", 1)
                bindings[atom] = (action, comp)
        doc.policies[name] = Policy(name, formula, bindings)

    def network_block(self, doc: ModelDocument, name: str) -> None:
        enforcers: list[Token] = []
        app = None
        resources: list[Token] = []
        targets: list[tuple[Token, Token]] = []
        completion = CompletionPolicy.IDENTITY
        policies: list[Token] = []
        for kw in self.clauses({"enforcers", "app", "resource", "target", "completion", "policies"}):
            if kw.text == "enforcers":
                enforcers += self.id_list(sep=None)
            elif kw.text == "app":
                app = self.ident("component")
            elif kw.text == "resource":
                resources += self.id_list(sep=None)
            elif kw.text == "target":
                act = self.ident("action")
                self.expect("->")
                targets.append((act, self.ident("component")))
            elif kw.text == "completion":
                mode = self.ident("'identity' or 'strict'")
                try:
                    completion = CompletionPolicy.parse(mode.text)
                except ValueError:
                    raise self.fail(f"unknown completion mode {mode.text!r}", mode) from None
            else:
                policies += self.id_list(sep=None)

        def resolve(tok: Token, table: dict, kind: str) -> str:
            if tok.text not in table:
                raise self.fail(f"unresolved {kind} {tok.text!r} in network {name!r}", tok)
            return tok.text

        spec = NetworkSpec(
            name=name,
            enforcers=tuple(resolve(t, doc.edit_automata, "edit automaton") for t in enforcers),
            app=resolve(app, doc.frameworks, "lts") if app else None,
            resources=tuple(resolve(t, doc.frameworks, "lts") for t in resources),
            targets=tuple((a.text, resolve(c, doc.frameworks, "lts")) for a, c in targets),
            completion=completion,
            policies=tuple(resolve(t, doc.policies, "policy") for t in policies),
        )
        doc.networks[name] = spec
        try:
            routes = doc.targets_of(name)
        except ModelError as exc:
            line, col = doc.positions[("network", name)]
            raise ParseError(str(exc), line, col) from None
        components = set(([spec.app] if spec.app else []) + list(spec.resources))
        for p, tok in zip(spec.policies, policies):
            for atom in sorted(ctl.atoms(doc.policies[p].formula)):
                if "." in atom:
                    comp, action = atom.split(".", 1)
                    ok = comp in components and action in doc.frameworks[comp].alphabet
                else:
                    ok = atom in routes
                if not ok:
                    raise self.fail(f"policy {p!r}: atom {atom!r} has no binding in network {name!r}", tok)


def parse_document(text: str) -> ModelDocument:
    return _Parser(text).document()


def parse_policy(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    p.accept(";")
    if p.tok.kind != "eof":
        raise p.fail(f"unexpected {p.tok.text!r} after formula")
    return f


# --------------------------------------------------------------------------
# Printer


def _edit_text(ea: EditAutomaton) -> list[str]:
    lines = [f"edit_automaton {ea.name} {{"]
    if ea.alphabet:
        lines.append(f"  alphabet {', '.join(sorted(ea.alphabet))};")
    lines.append(f"  initial {ea.initial};")
    lines.append(f"  states {', '.join(ea.states)};")
    for t in ea.transitions:
        lines.append(f"  trans {t.source} -> {t.target} on {t.action} emit [{', '.join(t.emit)}];")
    lines.append("}")
    return lines


def _lts_text(m: IOAutomaton) -> list[str]:
    lines = [f"lts {m.name} {{"]
    used = {t.action.name for t in m.transitions}
    if m.inputs != used:
        lines.append(f"  alphabet {', '.join(sorted(m.inputs))};")
    lines.append(f"  initial {m.start[0]};")
    lines.append(f"  states {', '.join(map(str, m.states))};")
    for t in m.transitions:
        lines.append(f"  trans {t.source} -> {t.target} on {t.action.name};")
    lines.append("}")
    return lines


def _network_text(n: NetworkSpec) -> list[str]:
    lines = [f"network {n.name} {{"]
    if n.enforcers:
        lines.append(f"  enforcers {' '.join(n.enforcers)};")
    if n.app:
        lines.append(f"  app {n.app};")
    if n.resources:
        lines.append(f"  resource {' '.join(n.resources)};")
    for a, c in n.targets:
        lines.append(f"  target {a} -> {c};")
    lines.append(f"  completion {n.completion.value};")
    if n.policies:
        lines.append(f"  policies {' '.join(n.policies)};")
    lines.append("}")
    return lines


def print_document(doc: ModelDocument) -> str:
    """Canonical text; ``parse_document(print_document(d)) == d``."""
    blocks = []
    for kind, name in doc.order:
        if kind == "edit_automaton":
            blocks.append(_edit_text(doc.edit_automata[name]))
        elif kind == "lts":
            blocks.append(_lts_text(doc.frameworks[name]))
        elif kind == "policy":
            blocks.append([f"policy {name} = {ctl.to_text(doc.policies[name].formula)};"])
        else:
            blocks.append(_network_text(doc.networks[name]))
    return "\n\n".join("\n".join(b) for b in blocks) + "\n"


def load(path) -> ModelDocument:
    with open(path, encoding="utf-8") as fh:
        return parse_document(fh.read())
