"""CTL formula AST over action-occurrence atoms."""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass


@dataclass(frozen=True)
class Formula:
    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class Act(Formula):
    """Holds at a node whose incoming delivered action is ``action``."""

    action: str


@dataclass(frozen=True)
class Deadlock(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class AX(Formula):
    operand: Formula


@dataclass(frozen=True)
class EX(Formula):
    operand: Formula


@dataclass(frozen=True)
class AF(Formula):
    operand: Formula


@dataclass(frozen=True)
class EF(Formula):
    operand: Formula


@dataclass(frozen=True)
class AG(Formula):
    operand: Formula


@dataclass(frozen=True)
class EG(Formula):
    operand: Formula


@dataclass(frozen=True)
class AU(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class EU(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class AW(Formula):
    """Weak until: on all paths ``left`` holds until ``right``, which may never come."""

    left: Formula
    right: Formula


UNARY_TEMPORAL = {"AX": AX, "EX": EX, "AF": AF, "EF": EF, "AG": AG, "EG": EG}
BINARY_TEMPORAL = {("A", "U"): AU, ("E", "U"): EU, ("A", "W"): AW}


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Not, AX, EX, AF, EF, AG, EG)):
        return (f.operand,)
    if isinstance(f, (And, Or, Implies, AU, EU, AW)):
        return (f.left, f.right)
    return ()


def map_atoms(f: Formula, fn: Callable[[Act], Formula]) -> Formula:
    if isinstance(f, Act):
        return fn(f)
    if isinstance(f, (Not, AX, EX, AF, EF, AG, EG)):
        return type(f)(map_atoms(f.operand, fn))
    if isinstance(f, (And, Or, Implies, AU, EU, AW)):
        return type(f)(map_atoms(f.left, fn), map_atoms(f.right, fn))
    return f


def atoms(f: Formula) -> frozenset[str]:
    if isinstance(f, Act):
        return frozenset({f.action})
    result: frozenset[str] = frozenset()
    for c in children(f):
        result |= atoms(c)
    return result


def rename_atoms(f: Formula, names: Mapping[str, str]) -> Formula:
    return map_atoms(f, lambda a: Act(names.get(a.action, a.action)))


def size(f: Formula) -> int:
    return 1 + sum(size(c) for c in children(f))


# Precedence for printing: larger binds tighter.
_PREC = {Implies: 1, Or: 2, And: 3}
_SYMBOL = {Implies: "=>", Or: "|", And: "&"}


def to_text(f: Formula) -> str:
    """Canonical concrete syntax, accepted back by :func:`enfcheck.dsl.parse_policy`."""
    return _text(f, 0)


def _text(f: Formula, ctx: int) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Deadlock):
        return "deadlock"
    if isinstance(f, Act):
        return f"act({f.action})"
    if isinstance(f, Not):
        return "!" + _text(f.operand, 4)
    for name, cls in UNARY_TEMPORAL.items():
        if isinstance(f, cls):
            return f"{name} " + _text(f.operand, 4)
    for (q, op), cls in BINARY_TEMPORAL.items():
        if isinstance(f, cls):
            return f"{q}[ {_text(f.left, 0)} {op} {_text(f.right, 0)} ]"
    prec = _PREC[type(f)]
    sym = _SYMBOL[type(f)]
    if isinstance(f, Implies):
        # right-associative
        body = f"{_text(f.left, prec + 1)} {sym} {_text(f.right, prec)}"
    else:
        body = f"{_text(f.left, prec)} {sym} {_text(f.right, prec + 1)}"
    return f"({body})" if prec < ctx else body
