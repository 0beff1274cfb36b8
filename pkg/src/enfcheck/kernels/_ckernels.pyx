# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled counterparts of the hot loops in ``_pykernels``.

Same inputs, same outputs, same ordering; see ``_pykernels`` for semantics.
"""

from cython.operator cimport dereference as deref
from libc.stdint cimport int32_t, int64_t, uint8_t
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector


cdef struct Graph:
    vector[int64_t] codes
    vector[int32_t] src
    vector[int32_t] lab
    vector[int32_t] dst
    unordered_map[int64_t, int32_t] index


cdef inline bint _add_edge(Graph* g, int32_t head, int32_t label, int64_t code,
                           Py_ssize_t max_states) noexcept nogil:
    cdef int32_t found
    cdef unordered_map[int64_t, int32_t].iterator it = g.index.find(code)
    if it != g.index.end():
        found = deref(it).second
    else:
        if <Py_ssize_t> g.codes.size() >= max_states:
            return False
        found = <int32_t> g.codes.size()
        g.index[code] = found
        g.codes.push_back(code)
    g.src.push_back(head)
    g.lab.push_back(label)
    g.dst.push_back(found)
    return True


cdef inline bint _feasible(const int32_t[:] seq_act, Py_ssize_t lo, Py_ssize_t hi,
                           int64_t* fws, int64_t* scratch, int k,
                           const int32_t[:] target, const int32_t[:] fw_delta,
                           const int64_t[:] fw_offset, int n_actions) noexcept nogil:
    cdef int j, a, nxt
    cdef Py_ssize_t p
    for j in range(k):
        scratch[j] = fws[j]
    for p in range(lo, hi):
        a = seq_act[p]
        j = target[a]
        if j < 0:
            return False
        nxt = fw_delta[fw_offset[j] + scratch[j] * n_actions + a]
        if nxt < 0:
            return False
        scratch[j] = nxt
    return True


def explore(t, tuple initial, Py_ssize_t max_states):
    cdef int n_actions = t.n_actions
    cdef const int64_t[:] radix = t.radix
    cdef const int32_t[:] in_ptr = t.in_ptr
    cdef const int32_t[:] in_act = t.in_act
    cdef const int32_t[:] in_dst = t.in_dst
    cdef const int32_t[:] out_ptr = t.out_ptr
    cdef const int32_t[:] out_act = t.out_act
    cdef const int32_t[:] out_dst = t.out_dst
    cdef const uint8_t[:] env_mask = t.env_mask
    cdef const int32_t[:] target = t.target
    cdef const int32_t[:] guard_ptr = t.guard_ptr
    cdef const int32_t[:] guard_fw = t.guard_fw
    cdef const int64_t[:] fw_offset = t.fw_offset
    cdef const int32_t[:] fw_delta = t.fw_delta
    cdef const int32_t[:] react_ptr = t.react_ptr
    cdef const int32_t[:] seq_ptr = t.seq_ptr
    cdef const int32_t[:] seq_act = t.seq_act

    cdef int n_comp = radix.shape[0]
    cdef int k = n_comp - 1
    cdef vector[int64_t] local = vector[int64_t](n_comp)
    cdef vector[int64_t] scratch = vector[int64_t](n_comp)
    cdef vector[int64_t] place = vector[int64_t](n_comp)
    cdef Graph g
    cdef Py_ssize_t head = 0
    cdef int64_t code, rest, cur
    cdef int c, e, a, j, q, nxt_f
    cdef bint ok
    cdef bint truncated = False
    cdef int64_t* fws

    place[0] = 1
    for j in range(1, n_comp):
        place[j] = place[j - 1] * radix[j - 1]
    code = 0
    for j in range(n_comp):
        code += place[j] * <int64_t> initial[j]
    g.codes.push_back(code)
    g.index[code] = 0

    with nogil:
        while head < <Py_ssize_t> g.codes.size() and not truncated:
            cur = g.codes[head]
            rest = cur
            for j in range(n_comp):
                local[j] = rest % radix[j]
                rest = rest // radix[j]
            c = <int> local[0]
            fws = &local[1]

            for e in range(in_ptr[c], in_ptr[c + 1]):
                a = in_act[e]
                if not env_mask[a]:
                    continue
                ok = True
                for q in range(guard_ptr[a], guard_ptr[a + 1]):
                    j = guard_fw[q]
                    if fw_delta[fw_offset[j] + fws[j] * n_actions + a] < 0:
                        ok = False
                        break
                if not ok:
                    continue
                for q in range(react_ptr[e], react_ptr[e + 1]):
                    if not _feasible(seq_act, seq_ptr[q], seq_ptr[q + 1], fws, &scratch[0], k,
                                     target, fw_delta, fw_offset, n_actions):
                        ok = False
                        break
                if not ok:
                    continue
                if not _add_edge(&g, <int32_t> head, 2 * a, cur - c + in_dst[e], max_states):
                    truncated = True
                    break
            if truncated:
                break

            for e in range(out_ptr[c], out_ptr[c + 1]):
                a = out_act[e]
                j = target[a]
                if j < 0:
                    continue
                nxt_f = fw_delta[fw_offset[j] + fws[j] * n_actions + a]
                if nxt_f < 0:
                    continue
                code = cur - c + out_dst[e] + (nxt_f - fws[j]) * place[j + 1]
                if not _add_edge(&g, <int32_t> head, 2 * a + 1, code, max_states):
                    truncated = True
                    break
            if truncated:
                break
            head += 1

    frontier = <Py_ssize_t> g.codes.size() - head if truncated else 0
    return list(g.codes), list(g.src), list(g.lab), list(g.dst), bool(truncated), frontier


def eu(const int32_t[:] pred_ptr, const int32_t[:] pred_idx,
       const uint8_t[:] sat_left, const uint8_t[:] sat_right):
    cdef Py_ssize_t n = sat_right.shape[0]
    cdef vector[uint8_t] result = vector[uint8_t](n)
    cdef vector[int32_t] stack
    cdef Py_ssize_t i
    cdef int32_t v, u, p
    with nogil:
        for i in range(n):
            if sat_right[i]:
                result[i] = 1
                stack.push_back(<int32_t> i)
        while not stack.empty():
            v = stack.back()
            stack.pop_back()
            for p in range(pred_ptr[v], pred_ptr[v + 1]):
                u = pred_idx[p]
                if not result[u] and sat_left[u]:
                    result[u] = 1
                    stack.push_back(u)
    return [bool(result[i]) for i in range(n)]


def eg(const int32_t[:] succ_ptr, const int32_t[:] succ_idx,
       const int32_t[:] pred_ptr, const int32_t[:] pred_idx, const uint8_t[:] sat):
    cdef Py_ssize_t n = sat.shape[0]
    cdef vector[uint8_t] inside = vector[uint8_t](n)
    cdef vector[int32_t] count = vector[int32_t](n)
    cdef vector[int32_t] stack
    cdef Py_ssize_t i
    cdef int32_t v, u, p
    with nogil:
        for i in range(n):
            inside[i] = sat[i] != 0
        for i in range(n):
            if inside[i]:
                for p in range(succ_ptr[i], succ_ptr[i + 1]):
                    if inside[succ_idx[p]]:
                        count[i] += 1
                if count[i] == 0:
                    stack.push_back(<int32_t> i)
        while not stack.empty():
            v = stack.back()
            stack.pop_back()
            if not inside[v]:
                continue
            inside[v] = 0
            for p in range(pred_ptr[v], pred_ptr[v + 1]):
                u = pred_idx[p]
                if inside[u]:
                    count[u] -= 1
                    if count[u] == 0:
                        stack.push_back(u)
    return [bool(inside[i]) for i in range(n)]
