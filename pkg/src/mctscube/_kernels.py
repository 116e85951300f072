"""Compiled propagation kernels.

State is a tuple of arrays shared by every kernel::

    (cstart, clits, ostart, olist, val, nfalse, reason, trail, meta)

``cstart``/``clits`` hold the clauses in CSR form, ``ostart``/``olist`` the
clauses containing each literal (indexed by ``lit + num_vars``).  ``val`` is
indexed the same way (1 true, -1 false, 0 unassigned).  ``nfalse`` counts the
processed false literals of each clause.  ``meta`` is
``[trail_len, qhead, propagations, calls]``.
"""

import numpy as np
from numba import njit

DECISION = -1
FORCED = -2

ERR_DUPLICATE = -3
ERR_COMPLEMENT = -4
CLASH = -5


@njit(cache=True)
def _assign(S, lit, why):
    cstart, clits, ostart, olist, val, nfalse, reason, trail, meta = S
    nv = reason.shape[0] - 1
    val[lit + nv] = 1
    val[nv - lit] = -1
    reason[abs(lit)] = why
    trail[meta[0]] = lit
    meta[0] += 1


@njit(cache=True)
def bcp(S):
    cstart, clits, ostart, olist, val, nfalse, reason, trail, meta = S
    nv = reason.shape[0] - 1
    while meta[1] < meta[0]:
        idx = nv - trail[meta[1]]
        meta[1] += 1
        lo = ostart[idx]
        hi = ostart[idx + 1]
        for k in range(lo, hi):
            nfalse[olist[k]] += 1
        for k in range(lo, hi):
            c = olist[k]
            size = cstart[c + 1] - cstart[c]
            if nfalse[c] < size - 1:
                continue
            free = 0
            nfree = 0
            sat = False
            for j in range(cstart[c], cstart[c + 1]):
                l = clits[j]
                v = val[l + nv]
                if v == 1:
                    sat = True
                    break
                if v == 0:
                    free = l
                    nfree += 1
            if sat:
                continue
            if nfree == 0:
                return c
            if nfree == 1:
                _assign(S, free, c)
                meta[2] += 1
    return -1


@njit(cache=True)
def backtrack(S, size):
    cstart, clits, ostart, olist, val, nfalse, reason, trail, meta = S
    nv = reason.shape[0] - 1
    while meta[0] > size:
        meta[0] -= 1
        pos = meta[0]
        lit = trail[pos]
        if pos < meta[1]:
            idx = nv - lit
            for k in range(ostart[idx], ostart[idx + 1]):
                nfalse[olist[k]] -= 1
        val[lit + nv] = 0
        val[nv - lit] = 0
    if meta[1] > size:
        meta[1] = size


@njit(cache=True)
def load(S, assumptions, unit_clauses, unit_lits, empty):
    cstart, clits, ostart, olist, val, nfalse, reason, trail, meta = S
    nv = reason.shape[0] - 1
    meta[3] += 1
    backtrack(S, 0)
    if empty >= 0:
        return empty
    for lit in assumptions:
        v = val[lit + nv]
        if v == 1:
            return ERR_DUPLICATE
        if v == -1:
            return ERR_COMPLEMENT
        _assign(S, lit, DECISION)
    for i in range(unit_lits.shape[0]):
        lit = unit_lits[i]
        v = val[lit + nv]
        if v == -1:
            return unit_clauses[i]
        if v == 0:
            _assign(S, lit, unit_clauses[i])
            meta[2] += 1
    return bcp(S)


@njit(cache=True)
def extend(S, lits, why):
    cstart, clits, ostart, olist, val, nfalse, reason, trail, meta = S
    nv = reason.shape[0] - 1
    meta[3] += 1
    for lit in lits:
        v = val[lit + nv]
        if v == 1:
            continue
        if v == -1:
            r = reason[abs(lit)]
            if r >= 0:
                return r
            return CLASH
        _assign(S, lit, why)
    return bcp(S)


@njit(cache=True)
def probe(S, lit):
    """Marginal implied count of ``lit``; -1 on conflict."""
    cstart, clits, ostart, olist, val, nfalse, reason, trail, meta = S
    meta[3] += 1
    mark = meta[0]
    _assign(S, lit, DECISION)
    conflict = bcp(S)
    count = meta[0] - mark - 1
    backtrack(S, mark)
    if conflict >= 0:
        return -1
    return count


@njit(cache=True)
def active_vars(S, mask):
    """Mark unassigned variables occurring in a not-yet-satisfied clause."""
    cstart, clits, ostart, olist, val, nfalse, reason, trail, meta = S
    nv = reason.shape[0] - 1
    mask[:] = 0
    m = cstart.shape[0] - 1
    for c in range(m):
        sat = False
        for j in range(cstart[c], cstart[c + 1]):
            if val[clits[j] + nv] == 1:
                sat = True
                break
        if not sat:
            for j in range(cstart[c], cstart[c + 1]):
                l = clits[j]
                if val[l + nv] == 0:
                    mask[abs(l)] = 1


@njit(cache=True)
def fixpoint(S, mask, forced, pos_out, neg_out):
    """Failed-literal closure of the current state.

    Returns ``(refuted, num_forced)``.  ``pos_out``/``neg_out`` receive the
    final round's probe counts, -2 for variables that are not candidates.
    """
    cstart, clits, ostart, olist, val, nfalse, reason, trail, meta = S
    nv = reason.shape[0] - 1
    nforced = 0
    while True:
        active_vars(S, mask)
        pos_out[:] = -2
        neg_out[:] = -2
        changed = False
        for v in range(1, nv + 1):
            if mask[v] == 0 or val[v + nv] != 0:
                continue
            p = probe(S, v)
            q = probe(S, -v)
            if p < 0 and q < 0:
                pos_out[:] = -2
                neg_out[:] = -2
                return True, nforced
            if p < 0 or q < 0:
                lit = v if q < 0 else -v
                forced[nforced] = lit
                nforced += 1
                changed = True
                meta[3] += 1
                _assign(S, lit, FORCED)
                if bcp(S) >= 0:
                    pos_out[:] = -2
                    neg_out[:] = -2
                    return True, nforced
            else:
                pos_out[v] = p
                neg_out[v] = q
        if not changed:
            return False, nforced


@njit(cache=True)
def branch_var(S):
    """Lowest unassigned variable occurring in a clause not yet satisfied, 0 if none."""
    cstart, clits, ostart, olist, val, nfalse, reason, trail, meta = S
    nv = reason.shape[0] - 1
    for v in range(1, nv + 1):
        if val[v + nv] != 0:
            continue
        for idx in (v + nv, nv - v):
            for k in range(ostart[idx], ostart[idx + 1]):
                c = olist[k]
                sat = False
                for j in range(cstart[c], cstart[c + 1]):
                    if val[clits[j] + nv] == 1:
                        sat = True
                        break
                if not sat:
                    return v
    return 0


@njit(cache=True)
def dpll(S, max_decisions):
    """Chronological DPLL from the current conflict-free state.

    Returns ``(status, decisions)`` with status 1 SAT, 0 UNSAT, 2 limit hit.
    On SAT the satisfying partial assignment is left in place.
    """
    cstart, clits, ostart, olist, val, nfalse, reason, trail, meta = S
    nv = reason.shape[0] - 1
    stack_size = np.zeros(nv + 1, dtype=np.int64)
    stack_var = np.zeros(nv + 1, dtype=np.int64)
    stack_flip = np.zeros(nv + 1, dtype=np.bool_)
    top = 0
    decisions = 0
    while True:
        v = branch_var(S)
        if v == 0:
            return 1, decisions
        if max_decisions >= 0 and decisions >= max_decisions:
            return 2, decisions
        decisions += 1
        stack_size[top] = meta[0]
        stack_var[top] = v
        stack_flip[top] = False
        top += 1
        _assign(S, v, DECISION)
        conflict = bcp(S)
        while conflict >= 0:
            while top > 0 and stack_flip[top - 1]:
                top -= 1
            if top == 0:
                return 0, decisions
            u = stack_var[top - 1]
            backtrack(S, stack_size[top - 1])
            stack_flip[top - 1] = True
            _assign(S, -u, DECISION)
            conflict = bcp(S)
