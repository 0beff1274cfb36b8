"""Pure-Python kernels; reference semantics for the compiled versions.

Global states are tuples ``(composite, fw_0, ..., fw_{k-1})`` of local state
indices, packed into a mixed-radix integer for hashing. Edge labels encode
``2 * action + kind`` with kind 0 for an environment emission and 1 for a
delivery from the composite enforcer to a framework model.
"""

from __future__ import annotations

from collections import deque

ENV = 0
DELIVER = 1


class ExplorationTables:
    """List-backed view of :class:`enfcheck.compose.Tables` for fast scalar access."""

    def __init__(self, t) -> None:
        self.n_actions = int(t.n_actions)
        self.radix = [int(x) for x in t.radix]
        self.committed = [bool(x) for x in t.comp_committed]
        self.inp = _csr_pairs(t.in_ptr, t.in_act, t.in_dst)
        self.in_start = [int(x) for x in t.in_ptr]
        self.out = _csr_pairs(t.out_ptr, t.out_act, t.out_dst)
        self.env = [bool(x) for x in t.env_mask]
        self.target = [int(x) for x in t.target]
        self.guards = [list(map(int, t.guard_fw[t.guard_ptr[a]:t.guard_ptr[a + 1]])) for a in range(self.n_actions)]
        n_acts = self.n_actions
        self.delta = []
        for j, off in enumerate(t.fw_offset):
            n = int(t.radix[j + 1])
            flat = [int(x) for x in t.fw_delta[int(off):int(off) + n * n_acts]]
            self.delta.append([flat[s * n_acts:(s + 1) * n_acts] for s in range(n)])
        seqs = [tuple(map(int, t.seq_act[t.seq_ptr[i]:t.seq_ptr[i + 1]])) for i in range(len(t.seq_ptr) - 1)]
        self.reactions = [seqs[t.react_ptr[e]:t.react_ptr[e + 1]] for e in range(len(t.react_ptr) - 1)]


def _csr_pairs(ptr, act, dst):
    ptr = [int(x) for x in ptr]
    act = [int(x) for x in act]
    dst = [int(x) for x in dst]
    return [list(zip(act[ptr[i]:ptr[i + 1]], dst[ptr[i]:ptr[i + 1]])) for i in range(len(ptr) - 1)]


def encode(radix, state) -> int:
    code = 0
    for r, s in zip(reversed(radix), reversed(state)):
        code = code * r + s
    return code


def decode(radix, code: int) -> tuple[int, ...]:
    out = []
    for r in radix:
        code, s = divmod(code, r)
        out.append(s)
    return tuple(out)


def _feasible(x: ExplorationTables, fws, seq) -> bool:
    local = list(fws)
    for a in seq:
        j = x.target[a]
        if j < 0:
            return False
        nxt = x.delta[j][local[j]][a]
        if nxt < 0:
            return False
        local[j] = nxt
    return True


def successors(x: ExplorationTables, state: tuple[int, ...]) -> list[tuple[int, tuple[int, ...]]]:
    """Enabled global transitions from ``state`` as ``(label, next_state)`` pairs, in canonical order."""
    c = state[0]
    fws = state[1:]
    result = []
    # Only the composite can be committed and it takes part in every global
    # transition, so the committed-priority rule never prunes here.
    base = x.in_start[c]
    for k, (a, dst) in enumerate(x.inp[c]):
        if not x.env[a]:
            continue
        if any(x.delta[j][fws[j]][a] < 0 for j in x.guards[a]):
            continue
        if not all(_feasible(x, fws, seq) for seq in x.reactions[base + k]):
            continue
        result.append((2 * a + ENV, (dst, *fws)))
    for a, dst in x.out[c]:
        j = x.target[a]
        if j < 0:
            continue
        nxt = x.delta[j][fws[j]][a]
        if nxt < 0:
            continue
        new_fws = list(fws)
        new_fws[j] = nxt
        result.append((2 * a + DELIVER, (dst, *new_fws)))
    return result


def explore(t, initial: tuple[int, ...], max_states: int):
    """Breadth-first reachability.

    Returns ``(codes, src, lab, dst, truncated, frontier)`` where ``codes`` lists
    packed states in discovery order and edges are given as parallel lists.
    """
    x = ExplorationTables(t)
    radix = x.radix
    start = encode(radix, initial)
    index = {start: 0}
    codes = [start]
    src: list[int] = []
    lab: list[int] = []
    dst: list[int] = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        state = decode(radix, codes[i])
        for label, nxt in successors(x, state):
            code = encode(radix, nxt)
            j = index.get(code)
            if j is None:
                if len(codes) >= max_states:
                    return codes, src, lab, dst, True, len(queue) + 1
                j = len(codes)
                index[code] = j
                codes.append(code)
                queue.append(j)
            src.append(i)
            lab.append(label)
            dst.append(j)
    return codes, src, lab, dst, False, 0


# --------------------------------------------------------------------------
# CTL fixpoints over a successor/predecessor CSR graph


def eu(pred_ptr, pred_idx, sat_left, sat_right) -> list[bool]:
    """Least fixpoint of ``right | (left & EX Z)`` by backward search."""
    n = len(sat_right)
    result = [bool(v) for v in sat_right]
    stack = [i for i in range(n) if result[i]]
    while stack:
        v = stack.pop()
        for k in range(pred_ptr[v], pred_ptr[v + 1]):
            u = pred_idx[k]
            if not result[u] and sat_left[u]:
                result[u] = True
                stack.append(u)
    return result


def eg(succ_ptr, succ_idx, pred_ptr, pred_idx, sat) -> list[bool]:
    """Greatest fixpoint of ``f & EX Z`` by pruning nodes without a successor in the set."""
    n = len(sat)
    inside = [bool(v) for v in sat]
    count = [0] * n
    for v in range(n):
        if inside[v]:
            count[v] = sum(1 for k in range(succ_ptr[v], succ_ptr[v + 1]) if inside[succ_idx[k]])
    stack = [v for v in range(n) if inside[v] and count[v] == 0]
    while stack:
        v = stack.pop()
        if not inside[v]:
            continue
        inside[v] = False
        for k in range(pred_ptr[v], pred_ptr[v + 1]):
            u = pred_idx[k]
            if inside[u]:
                count[u] -= 1
                if count[u] == 0:
                    stack.append(u)
    return inside
