"""Compare the compiled and pure-Python kernels on growing networks.

Usage: python benchmarks/bench_kernels.py [--max-k 7] [--repeat 3]

Each synthetic network pairs a resource with k independent on/off
sub-protocols with one generated enforcer per sub-protocol, so the global
state space grows roughly like 3^k. Both backends must return identical
graphs and satisfaction sets; the script aborts otherwise.
"""

from __future__ import annotations

import argparse
import itertools
import time

from enfcheck import kernels
from enfcheck.catalog import APP, PolicyTemplate, generate_enforcer, generate_policy, lifecycle_model
from enfcheck.compose import build_network, compile_network, explore, infer_targets
from enfcheck.ctl import AF, Act
from enfcheck.mcheck import Labeler, kripke_from_graph, to_adequate
from enfcheck.model import lts


def synthetic(k: int):
    pairs = [(f"acq{i}", f"rel{i}") for i in range(k)]
    trans = []
    for bits in itertools.product((0, 1), repeat=k):
        src = "s" + "".join(map(str, bits))
        for i, (a, r) in enumerate(pairs):
            nb = list(bits)
            nb[i] ^= 1
            trans.append((src, r if bits[i] else a, "s" + "".join(map(str, nb))))
    res = lts("Res", "s" + "0" * k, trans)
    fws = [(APP, lifecycle_model(res.alphabet, "onDestroy")), ("Res", res)]
    templates = [PolicyTemplate(a, r, "onDestroy") for a, r in pairs]
    enforcers = [generate_enforcer(t, f"EA{i}") for i, t in enumerate(templates)]
    policies = [generate_policy(t, "Res", APP, f"P{i}") for i, t in enumerate(templates)]
    net = build_network(enforcers, fws, infer_targets(fws, APP), app=APP, name=f"toggles{k}")
    return net, policies


def best_of(fn, repeat: int) -> tuple[float, object]:
    best, result = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-k", type=int, default=2)
    ap.add_argument("--max-k", type=int, default=7)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available()
    if "compiled" not in backends:
        print("compiled kernels are not built; only the Python backend is timed")
    print(f"{'k':>3} {'states':>9} {'edges':>10} " + " ".join(f"{b + ' explore':>17} {b + ' ctl':>13}" for b in backends)
          + "   speedup")
    for k in range(args.min_k, args.max_k + 1):
        net, policies = synthetic(k)
        compiled = compile_network(net)
        formulas = [to_adequate(p.bound_to(net.targets).resolved_formula()) for p in policies]
        # a liveness formula per toggle so the EG kernel is timed and cross-checked as well
        formulas += [to_adequate(AF(Act(f"rel{i}-Res"))) for i in range(k)]
        timings = {}
        outputs = {}
        for b in backends:
            t_exp, graph = best_of(lambda: kernels.explore(compiled.tables, compiled.initial, 10_000_000, backend=b),
                                   args.repeat)
            g = explore(net, backend=b)
            kripke = kripke_from_graph(g)

            def label_all():
                lab = Labeler(kripke, backend=b)
                return [lab.sat(f) for f in formulas]

            t_ctl, sats = best_of(label_all, args.repeat)
            timings[b] = (t_exp, t_ctl)
            outputs[b] = ([list(x) for x in graph[:4]], [s.tolist() for s in sats])
        ref = outputs[backends[0]]
        for b in backends[1:]:
            if outputs[b] != ref:
                raise SystemExit(f"backend {b} disagrees with {backends[0]} at k={k}")
        n_states = len(ref[0][0])
        n_edges = len(ref[0][1])
        cells = " ".join(f"{timings[b][0] * 1e3:>14.2f} ms {timings[b][1] * 1e3:>10.2f} ms" for b in backends)
        speed = ""
        if "compiled" in timings:
            speed = f"{timings['python'][0] / max(timings['compiled'][0], 1e-9):8.1f}x"
        print(f"{k:>3} {n_states:>9} {n_edges:>10} {cells} {speed}")


if __name__ == "__main__":
    main()
