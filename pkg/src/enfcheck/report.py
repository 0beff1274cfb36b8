"""Machine and human renderings of a verification report."""

from __future__ import annotations

import json

from .mcheck import VerificationReport


def report_dict(r: VerificationReport, include_runtime: bool = True) -> dict:
    policies = []
    for p in r.policies:
        entry = {"name": p.name, "verdict": p.verdict}
        if p.counterexample is not None:
            entry["counterexample"] = list(p.counterexample)
        policies.append(entry)
    stats = {"states": r.stats.states, "edges": r.stats.edges}
    if include_runtime:
        stats["runtimeMs"] = round(r.stats.runtime_ms, 3)
    return {
        "interference": "yes" if r.interference else "no",
        "policies": policies,
        "deadlocks": [{"trace": list(d.trace)} for d in r.deadlocks],
        "stats": stats,
    }


def emit_report_json(r: VerificationReport, include_runtime: bool = True) -> str:
    """Compact JSON with a fixed key order; only ``runtimeMs`` varies between runs."""
    return json.dumps(report_dict(r, include_runtime), separators=(",", ":"))


def emit_report_text(r: VerificationReport) -> str:
    lines = [f"network {r.network}: interference {'YES' if r.interference else 'no'}"]
    for p in r.policies:
        lines.append(f"  policy {p.name}: {p.verdict}")
        if p.counterexample is not None:
            lines.append(f"    counterexample: {' ; '.join(p.counterexample) or '(empty)'}")
    if r.deadlocks:
        lines.append(f"  deadlocks: {len(r.deadlocks)}")
        for d in r.deadlocks:
            lines.append(f"    at {d.state}: {' ; '.join(d.trace) or '(initial state)'}")
            if d.blocked:
                lines.append(f"      refused: {', '.join(d.blocked)}")
    else:
        lines.append("  deadlocks: none")
    lines.append(f"  explored {r.stats.states} states, {r.stats.edges} edges in {r.stats.runtime_ms:.1f} ms")
    return "\n".join(lines)
