"""Decide whether runtime enforcers interfere when activated together."""

from .compose import build_network, compose_enforcers, explore
from .edit2io import CompletionPolicy, transform
from .model import EditAutomaton, EditTransition, IOAutomaton, Policy

__version__ = "0.1.0"

__all__ = [
    "CompletionPolicy",
    "EditAutomaton",
    "EditTransition",
    "IOAutomaton",
    "Policy",
    "build_network",
    "compose_enforcers",
    "explore",
    "transform",
]
