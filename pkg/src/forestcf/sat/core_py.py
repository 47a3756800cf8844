"""Pure-Python CDCL solver core.

Conflict-driven clause learning with two-watched-literal propagation,
first-UIP learning, additive variable activity with multiplicative decay
(rescaled near 1e100), phase saving and geometric restarts (first at 100
conflicts, interval times 1.5). Branching picks the unassigned variable with
the highest activity, ties broken by lowest id, so every run on the same
clause list is bit-for-bit reproducible.

The compiled extension in _core.pyx implements this exact algorithm with the
same data-structure disciplines (watch-list compaction order, trail order,
bump order, float operation order), so both backends return identical
assignments and statistics. Any behavioral change here must be mirrored
there; the cross-backend test suite enforces the equivalence.

Status codes returned by solve_core: 1 satisfiable, 0 unsatisfiable,
2 conflict budget exhausted.
"""

from __future__ import annotations

# assigns[] codes
UNASSIGNED = 0
TRUE = 1
FALSE = -1

VAR_RESCALE = 1e100
ACTIVITY_DECAY = 0.95
RESTART_FIRST = 100
RESTART_GROWTH = 1.5


def solve_core(n_vars: int, clauses: list, max_conflicts: int):
    """Run CDCL on signed-literal clauses. max_conflicts < 0 means no budget.

    Ingest validates each literal (ValueError when 0 or out of range), drops
    duplicate literals and tautological clauses, and short-circuits to UNSAT
    on an empty input clause. Returns (status, assignment or None,
    (decisions, propagations, conflicts, learned, restarts)).
    """
    # literal encoding: lit = 2*v for +v, 2*v+1 for -v
    clause_db = []
    for clause in clauses:
        if len(clause) == 0:
            return 0, None, (0, 0, 0, 0, 0)
        kept: list[int] = []
        seen = set()
        taut = False
        for signed_lit in clause:
            if signed_lit == 0 or signed_lit > n_vars or signed_lit < -n_vars:
                raise ValueError(
                    f"literal {signed_lit} out of range for {n_vars} variables")
            enc = _lit(signed_lit)
            if enc ^ 1 in seen:
                taut = True
                break
            if enc not in seen:
                seen.add(enc)
                kept.append(enc)
        if not taut:
            clause_db.append(kept)
    watches: list[list[int]] = [[] for _ in range(2 * n_vars + 2)]
    assigns = [UNASSIGNED] * (n_vars + 1)
    level = [0] * (n_vars + 1)
    reason = [-1] * (n_vars + 1)
    saved_phase = [False] * (n_vars + 1)
    activity = [0.0] * (n_vars + 1)
    seen = [False] * (n_vars + 1)
    trail: list[int] = []
    trail_lim: list[int] = []
    qhead = 0

    decisions = propagations = conflicts = learned = restarts = 0
    var_inc = 1.0
    restart_limit = RESTART_FIRST
    conflicts_since_restart = 0

    def lit_value(lit: int) -> int:
        v = assigns[lit >> 1]
        return -v if lit & 1 else v

    def enqueue(lit: int, why: int) -> None:
        nonlocal propagations
        v = lit >> 1
        assigns[v] = FALSE if lit & 1 else TRUE
        level[v] = len(trail_lim)
        reason[v] = why
        trail.append(lit)
        propagations += 1

    def propagate() -> int:
        """Returns a conflicting clause index, or -1 at fixpoint."""
        nonlocal qhead
        while qhead < len(trail):
            p = trail[qhead]
            qhead += 1
            fl = p ^ 1
            ws = watches[fl]
            i = j = 0
            n_ws = len(ws)
            while i < n_ws:
                ci = ws[i]
                i += 1
                cl = clause_db[ci]
                if cl[0] == fl:
                    cl[0] = cl[1]
                    cl[1] = fl
                first = cl[0]
                if lit_value(first) == TRUE:
                    ws[j] = ci
                    j += 1
                    continue
                moved = False
                for k in range(2, len(cl)):
                    if lit_value(cl[k]) != FALSE:
                        cl[1] = cl[k]
                        cl[k] = fl
                        watches[cl[1]].append(ci)
                        moved = True
                        break
                if moved:
                    continue
                ws[j] = ci
                j += 1
                if lit_value(first) == FALSE:
                    while i < n_ws:       # keep the untouched tail
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    del ws[j:]
                    qhead = len(trail)
                    return ci
                enqueue(first, ci)
            del ws[j:]
        return -1

    def bump(v: int) -> None:
        nonlocal var_inc
        activity[v] += var_inc
        if activity[v] > VAR_RESCALE:
            for u in range(1, n_vars + 1):
                activity[u] *= 1e-100
            var_inc *= 1e-100

    def analyze(confl: int):
        """First-UIP learning; returns (learnt clause, backtrack level)."""
        nonlocal qhead
        learnt = [0]
        counter = 0
        p = -1
        index = len(trail) - 1
        current = len(trail_lim)
        c = confl
        while True:
            cl = clause_db[c]
            start = 0 if p == -1 else 1
            for k in range(start, len(cl)):
                q = cl[k]
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    bump(v)
                    if level[v] >= current:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[trail[index] >> 1]:
                index -= 1
            p = trail[index]
            index -= 1
            v = p >> 1
            seen[v] = False
            counter -= 1
            if counter == 0:
                break
            c = reason[v]
        learnt[0] = p ^ 1
        for q in learnt[1:]:
            seen[q >> 1] = False

        if len(learnt) == 1:
            return learnt, 0
        # pull the literal from the highest remaining level into slot 1
        best = 1
        for k in range(2, len(learnt)):
            if level[learnt[k] >> 1] > level[learnt[best] >> 1]:
                best = k
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def backtrack(target: int) -> None:
        nonlocal qhead
        while len(trail) > trail_lim[target]:
            lit = trail.pop()
            v = lit >> 1
            saved_phase[v] = not (lit & 1)
            assigns[v] = UNASSIGNED
            reason[v] = -1
        del trail_lim[target:]
        qhead = len(trail)

    def stats():
        return (decisions, propagations, conflicts, learned, restarts)

    # attach watches; queue unit clauses at level 0 in clause order
    for ci, cl in enumerate(clause_db):
        if len(cl) >= 2:
            watches[cl[0]].append(ci)
            watches[cl[1]].append(ci)
    for ci, cl in enumerate(clause_db):
        if len(cl) == 1:
            val = lit_value(cl[0])
            if val == FALSE:
                return 0, None, stats()
            if val == UNASSIGNED:
                enqueue(cl[0], ci)

    while True:
        confl = propagate()
        if confl >= 0:
            conflicts += 1
            conflicts_since_restart += 1
            if len(trail_lim) == 0:
                return 0, None, stats()
            if 0 <= max_conflicts < conflicts:
                return 2, None, stats()
            learnt, bt = analyze(confl)
            backtrack(bt)
            clause_db.append(learnt)
            learned += 1
            ci = len(clause_db) - 1
            if len(learnt) >= 2:
                watches[learnt[0]].append(ci)
                watches[learnt[1]].append(ci)
            enqueue(learnt[0], ci)
            var_inc *= 1.0 / ACTIVITY_DECAY
        else:
            if conflicts_since_restart >= restart_limit and len(trail_lim) > 0:
                conflicts_since_restart = 0
                restart_limit *= RESTART_GROWTH
                restarts += 1
                backtrack(0)
                continue
            if len(trail) == n_vars:
                model = [assigns[v] == TRUE for v in range(1, n_vars + 1)]
                return 1, model, stats()
            decisions += 1
            best = 0
            best_act = -1.0
            for v in range(1, n_vars + 1):
                if assigns[v] == UNASSIGNED and activity[v] > best_act:
                    best = v
                    best_act = activity[v]
            trail_lim.append(len(trail))
            enqueue(2 * best + (0 if saved_phase[best] else 1), -1)


def _lit(signed: int) -> int:
    return 2 * signed if signed > 0 else 2 * -signed + 1
