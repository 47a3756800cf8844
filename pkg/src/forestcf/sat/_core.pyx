# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled CDCL core: op-for-op twin of core_py.solve_core.

Same algorithm, same iteration orders, same float arithmetic order, so
assignments and statistics match the pure backend exactly. Keep the two files
in lockstep; tests/test_sat.py checks backend equivalence on random suites.
"""

from libcpp.vector cimport vector

DEF UNASSIGNED = 0
DEF TRUE = 1
DEF FALSE = -1

cdef double VAR_RESCALE = 1e100
cdef double ACTIVITY_DECAY = 0.95
cdef long RESTART_FIRST = 100
cdef double RESTART_GROWTH = 1.5


cdef class _Solver:
    cdef int n_vars
    cdef bint trivially_unsat
    cdef vector[vector[int]] clause_db
    cdef vector[vector[int]] watches
    cdef vector[signed char] assigns
    cdef vector[int] level
    cdef vector[int] reason
    cdef vector[signed char] saved_phase
    cdef vector[double] activity
    cdef vector[signed char] seen
    cdef vector[int] trail
    cdef vector[int] trail_lim
    cdef long qhead
    cdef long decisions, propagations, conflicts, learned, restarts
    cdef double var_inc

    def __cinit__(self, int n_vars, list clauses):
        # ingest mirrors core_py: validate literals, drop duplicate literals
        # and tautologies, flag an empty input clause as trivial UNSAT
        cdef vector[int] cl
        cdef int lit, enc
        cdef size_t j
        cdef bint taut, dup
        self.n_vars = n_vars
        self.trivially_unsat = False
        self.watches.resize(2 * n_vars + 2)
        self.assigns.assign(n_vars + 1, UNASSIGNED)
        self.level.assign(n_vars + 1, 0)
        self.reason.assign(n_vars + 1, -1)
        self.saved_phase.assign(n_vars + 1, 0)
        self.activity.assign(n_vars + 1, 0.0)
        self.seen.assign(n_vars + 1, 0)
        self.qhead = 0
        self.decisions = self.propagations = self.conflicts = 0
        self.learned = self.restarts = 0
        self.var_inc = 1.0
        for clause in clauses:
            if len(clause) == 0:
                self.trivially_unsat = True
                return
            cl.clear()
            taut = False
            for item in clause:
                lit = item
                if lit == 0 or lit > n_vars or lit < -n_vars:
                    raise ValueError(
                        f"literal {lit} out of range for {n_vars} variables")
                enc = 2 * lit if lit > 0 else 2 * (-lit) + 1
                dup = False
                for j in range(cl.size()):
                    if cl[j] == enc:
                        dup = True
                        break
                    if cl[j] == (enc ^ 1):
                        taut = True
                        break
                if taut:
                    break
                if not dup:
                    cl.push_back(enc)
            if not taut:
                self.clause_db.push_back(cl)

    cdef inline int lit_value(self, int lit):
        cdef signed char v = self.assigns[lit >> 1]
        return -v if lit & 1 else v

    cdef inline void enqueue(self, int lit, int why):
        # element assignments go through typed temps: Cython writes ternary
        # and cast expressions into a *copy* of an attribute vector otherwise
        cdef int v = lit >> 1
        cdef signed char val = FALSE if lit & 1 else TRUE
        cdef int lvl = <int> self.trail_lim.size()
        self.assigns[v] = val
        self.level[v] = lvl
        self.reason[v] = why
        self.trail.push_back(lit)
        self.propagations += 1

    cdef int propagate(self):
        cdef int p, fl, ci, first, k
        cdef size_t i, j, n_ws
        cdef vector[int]* ws
        cdef vector[int]* cl
        cdef bint moved
        while self.qhead < <long> self.trail.size():
            p = self.trail[self.qhead]
            self.qhead += 1
            fl = p ^ 1
            ws = &self.watches[fl]
            i = j = 0
            n_ws = ws[0].size()
            while i < n_ws:
                ci = ws[0][i]
                i += 1
                cl = &self.clause_db[ci]
                if cl[0][0] == fl:
                    cl[0][0] = cl[0][1]
                    cl[0][1] = fl
                first = cl[0][0]
                if self.lit_value(first) == TRUE:
                    ws[0][j] = ci
                    j += 1
                    continue
                moved = False
                for k in range(2, <int> cl[0].size()):
                    if self.lit_value(cl[0][k]) != FALSE:
                        cl[0][1] = cl[0][k]
                        cl[0][k] = fl
                        self.watches[cl[0][1]].push_back(ci)
                        moved = True
                        break
                if moved:
                    continue
                ws[0][j] = ci
                j += 1
                if self.lit_value(first) == FALSE:
                    while i < n_ws:
                        ws[0][j] = ws[0][i]
                        j += 1
                        i += 1
                    ws[0].resize(j)
                    self.qhead = <long> self.trail.size()
                    return ci
                self.enqueue(first, ci)
            ws[0].resize(j)
        return -1

    cdef inline void bump(self, int v):
        cdef int u
        self.activity[v] += self.var_inc
        if self.activity[v] > VAR_RESCALE:
            for u in range(1, self.n_vars + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100

    cdef int analyze(self, int confl, vector[int]& learnt):
        cdef int counter = 0, p = -1, q, v, k, start, best, c
        cdef long index = <long> self.trail.size() - 1
        cdef int current = <int> self.trail_lim.size()
        cdef vector[int]* cl
        cdef int tmp, tmp2
        learnt.clear()
        learnt.push_back(0)
        c = confl
        while True:
            cl = &self.clause_db[c]
            start = 0 if p == -1 else 1
            for k in range(start, <int> cl[0].size()):
                q = cl[0][k]
                v = q >> 1
                if not self.seen[v] and self.level[v] > 0:
                    self.seen[v] = 1
                    self.bump(v)
                    if self.level[v] >= current:
                        counter += 1
                    else:
                        learnt.push_back(q)
            while not self.seen[self.trail[index] >> 1]:
                index -= 1
            p = self.trail[index]
            index -= 1
            v = p >> 1
            self.seen[v] = 0
            counter -= 1
            if counter == 0:
                break
            c = self.reason[v]
        tmp = p ^ 1
        learnt[0] = tmp
        for k in range(1, <int> learnt.size()):
            self.seen[learnt[k] >> 1] = 0

        if learnt.size() == 1:
            return 0
        best = 1
        for k in range(2, <int> learnt.size()):
            if self.level[learnt[k] >> 1] > self.level[learnt[best] >> 1]:
                best = k
        tmp = learnt[1]
        tmp2 = learnt[best]
        learnt[1] = tmp2
        learnt[best] = tmp
        return self.level[learnt[1] >> 1]

    cdef void backtrack(self, int target):
        cdef int lit, v
        cdef signed char phase
        while <long> self.trail.size() > self.trail_lim[target]:
            lit = self.trail.back()
            self.trail.pop_back()
            v = lit >> 1
            phase = 0 if (lit & 1) else 1
            self.saved_phase[v] = phase
            self.assigns[v] = UNASSIGNED
            self.reason[v] = -1
        self.trail_lim.resize(target)
        self.qhead = <long> self.trail.size()

    def run(self, long max_conflicts):
        cdef int ci, confl, bt, v, best
        cdef double best_act
        cdef double restart_limit = RESTART_FIRST
        cdef long conflicts_since_restart = 0
        cdef vector[int] learnt
        cdef vector[int]* cl
        cdef list model

        if self.trivially_unsat:
            return 0, None, self._stats()

        for ci in range(<int> self.clause_db.size()):
            cl = &self.clause_db[ci]
            if cl[0].size() >= 2:
                self.watches[cl[0][0]].push_back(ci)
                self.watches[cl[0][1]].push_back(ci)
        for ci in range(<int> self.clause_db.size()):
            cl = &self.clause_db[ci]
            if cl[0].size() == 1:
                if self.lit_value(cl[0][0]) == FALSE:
                    return 0, None, self._stats()
                if self.lit_value(cl[0][0]) == UNASSIGNED:
                    self.enqueue(cl[0][0], ci)

        while True:
            confl = self.propagate()
            if confl >= 0:
                self.conflicts += 1
                conflicts_since_restart += 1
                if self.trail_lim.size() == 0:
                    return 0, None, self._stats()
                if 0 <= max_conflicts < self.conflicts:
                    return 2, None, self._stats()
                bt = self.analyze(confl, learnt)
                self.backtrack(bt)
                self.clause_db.push_back(learnt)
                self.learned += 1
                ci = <int> self.clause_db.size() - 1
                if learnt.size() >= 2:
                    self.watches[learnt[0]].push_back(ci)
                    self.watches[learnt[1]].push_back(ci)
                self.enqueue(learnt[0], ci)
                self.var_inc *= 1.0 / ACTIVITY_DECAY
            else:
                if conflicts_since_restart >= restart_limit and self.trail_lim.size() > 0:
                    conflicts_since_restart = 0
                    restart_limit *= RESTART_GROWTH
                    self.restarts += 1
                    self.backtrack(0)
                    continue
                if <int> self.trail.size() == self.n_vars:
                    model = [self.assigns[v] == TRUE for v in range(1, self.n_vars + 1)]
                    return 1, model, self._stats()
                self.decisions += 1
                best = 0
                best_act = -1.0
                for v in range(1, self.n_vars + 1):
                    if self.assigns[v] == UNASSIGNED and self.activity[v] > best_act:
                        best = v
                        best_act = self.activity[v]
                self.trail_lim.push_back(<int> self.trail.size())
                self.enqueue(2 * best + (0 if self.saved_phase[best] else 1), -1)

    def _stats(self):
        return (self.decisions, self.propagations, self.conflicts,
                self.learned, self.restarts)


def solve_core(int n_vars, list clauses, long max_conflicts):
    """Mirror of core_py.solve_core: (status, model or None, stats tuple)."""
    return _Solver(n_vars, clauses).run(max_conflicts)
