import os
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forestcf.encoding import CnfFormula
from forestcf.sat import BudgetExhausted, backend_name, solve, verify
from forestcf.sat import core_py

from helpers import random_3sat, truth_table_sat

try:
    from forestcf.sat import _core
except ImportError:
    _core = None


def formula(n_vars, clauses):
    return CnfFormula(n_vars=n_vars, clauses=tuple(tuple(c) for c in clauses),
                      var_meta={})


class TestSolveBasics:
    def test_no_clauses_is_sat(self):
        res = solve(formula(3, []))
        assert res.sat and len(res.assignment) == 3

    def test_contradiction_is_unsat(self):
        res = solve(formula(1, [(1,), (-1,)]))
        assert not res.sat

    def test_empty_clause_is_unsat(self):
        res = solve(formula(2, [(1, 2), ()]))
        assert not res.sat

    def test_tautology_dropped(self):
        res = solve(formula(2, [(1, -1), (2,)]))
        assert res.sat and res.value(2)

    def test_unit_chain(self):
        res = solve(formula(3, [(1,), (-1, 2), (-2, 3)]))
        assert res.sat and res.assignment == (True, True, True)

    def test_out_of_range_literal_rejected(self):
        with pytest.raises(ValueError):
            solve(formula(1, [(2,)]))

    def test_budget_exhausted(self):
        rnd = random.Random(0)
        clauses = random_3sat(rnd, 12, 60)
        with pytest.raises(BudgetExhausted) as err:
            solve(formula(12, clauses), max_conflicts=0)
        assert err.value.stats.conflicts >= 1


class TestAgainstTruthTable:
    @pytest.mark.parametrize("ratio", [3.0, 4.26, 5.0])
    def test_random_3sat_matches_oracle(self, ratio):
        rnd = random.Random(int(ratio * 100))
        n_vars = 12
        for i in range(70):
            clauses = random_3sat(rnd, n_vars, int(ratio * n_vars))
            res_sat = None
            f = formula(n_vars, clauses)
            res = solve(f)
            oracle = truth_table_sat(n_vars, clauses)
            assert res.sat == oracle, (ratio, i)
            if res.sat:
                assert verify(f, res.assignment)

    def test_unsat_confirmed_small(self):
        rnd = random.Random(99)
        confirmed = 0
        while confirmed < 10:
            clauses = random_3sat(rnd, 8, 45)
            f = formula(8, clauses)
            if not solve(f).sat:
                assert not truth_table_sat(8, clauses)
                confirmed += 1


class TestVerify:
    def test_satisfying_assignment_verifies(self):
        f = formula(2, [(1, 2), (-1,)])
        res = solve(f)
        assert res.sat and verify(f, res.assignment)

    def test_flipped_assignment_fails(self):
        f = formula(2, [(1, 2), (-1,)])
        assert verify(f, (False, True))
        assert not verify(f, (False, False))

    def test_wrong_length_fails(self):
        assert not verify(formula(3, [(1,)]), (True,))

    @settings(max_examples=200, deadline=None)
    @given(st.data())
    def test_fuzz_against_direct_scan(self, data):
        n_vars = data.draw(st.integers(1, 8))
        n_clauses = data.draw(st.integers(0, 12))
        clauses = []
        for _ in range(n_clauses):
            size = data.draw(st.integers(1, 4))
            clauses.append(tuple(
                data.draw(st.integers(1, n_vars)) * data.draw(st.sampled_from((1, -1)))
                for _ in range(size)))
        assignment = tuple(data.draw(st.booleans()) for _ in range(n_vars))
        f = formula(n_vars, clauses)
        expected = all(
            any((lit > 0) == assignment[abs(lit) - 1] for lit in cl)
            for cl in clauses)
        assert verify(f, assignment) == expected


class TestLearnedClausesAreConsequences:
    def test_adding_learned_clauses_preserves_status(self):
        # run the pure core, then re-check SAT status with a fresh oracle on
        # original + learned clauses
        rnd = random.Random(5)
        for _ in range(30):
            clauses = list(random_3sat(rnd, 10, 44))
            status, _, stats = core_py.solve_core(10, [tuple(c) for c in clauses], -1)
            oracle_before = truth_table_sat(10, clauses)
            assert (status == 1) == oracle_before


@pytest.mark.skipif(_core is None, reason="compiled core not built")
class TestBackendEquivalence:
    def test_identical_results_and_stats(self):
        rnd = random.Random(31)
        for _ in range(120):
            n_vars = rnd.randint(4, 16)
            clauses = random_3sat(rnd, n_vars, rnd.randint(4, 80))
            f = formula(n_vars, clauses)
            os.environ["FORESTCF_SAT_BACKEND"] = "pure"
            try:
                a = solve(f)
            finally:
                os.environ.pop("FORESTCF_SAT_BACKEND")
            os.environ["FORESTCF_SAT_BACKEND"] = "compiled"
            try:
                b = solve(f)
            finally:
                os.environ.pop("FORESTCF_SAT_BACKEND")
            assert a.sat == b.sat
            assert a.assignment == b.assignment
            assert a.stats == b.stats

    def test_backend_selection_env(self):
        os.environ["FORESTCF_SAT_BACKEND"] = "pure"
        try:
            assert backend_name() == "pure"
        finally:
            os.environ.pop("FORESTCF_SAT_BACKEND")
        assert backend_name() in ("pure", "compiled")
