import pytest

from ocalign.solver import (
    SolverError,
    find_solver,
    parse_sexprs,
    problem_script,
    solve_minimize,
    solver_command,
    value_of,
)
from ocalign.terms import IntVar, add, and_, eq, evaluate, ge, le, or_

from .conftest import needs_yices, needs_z3

x, y, z = IntVar("x"), IntVar("y"), IntVar("z")
# minimum of x + y with x, y >= 0, x + y >= 3, and x = 2 or y = 4
PROBLEM = [ge(x, 0), ge(y, 0), ge(add(x, y), 3), or_(eq(x, 2), eq(y, 4)), eq(z, add(x, y))]


@pytest.mark.parametrize(
    "text, parsed",
    [
        ("sat", ["sat"]),
        ("((x 3) (y (- 2)))", [[["x", "3"], ["y", ["-", "2"]]]]),
        ('(error "bad ""quote""")', [["error", '"bad ""quote"""']]),
        ("(|odd name| 1)", [["odd name", "1"]]),
    ],
)
def test_parse_sexprs(text, parsed):
    assert parse_sexprs(text) == parsed


@pytest.mark.parametrize("text", ["(a", "a)"])
def test_unbalanced_output(text):
    with pytest.raises(SolverError):
        parse_sexprs(text)


@pytest.mark.parametrize("sx, value", [("true", True), ("7", 7), (["-", "4"], -4)])
def test_value_of(sx, value):
    assert value_of(sx) == value


def test_rational_values_are_rejected():
    with pytest.raises(SolverError):
        value_of(["/", "1", "2"])


def test_missing_solver():
    with pytest.raises(SolverError):
        find_solver("/nonexistent/solver")


@pytest.mark.parametrize(
    "name, args",
    [("/x/z3", ["-in", "-smt2"]), ("/x/yices-smt2", ["--incremental"]), ("/x/other", [])],
)
def test_solver_command(name, args):
    assert solver_command(name)[1:] == args


def test_models_are_requested_before_the_logic():
    lines = problem_script([x], [ge(x, 0)])
    assert lines[:2] == ["(set-option :produce-models true)", "(set-logic QF_LIA)"]
    assert lines[-1] == "(assert (>= x 0))"


SETUPS = [
    pytest.param("z3", "native", "descent", marks=needs_z3),
    pytest.param("z3", "iterative", "descent", marks=needs_z3),
    pytest.param("z3", "iterative", "binary", marks=needs_z3),
    pytest.param("yices-smt2", "iterative", "descent", marks=needs_yices),
    pytest.param("yices-smt2", "iterative", "binary", marks=needs_yices),
]


@pytest.mark.parametrize("solver, dialect, strategy", SETUPS)
def test_minimum_is_found(solver, dialect, strategy):
    res = solve_minimize([x, y, z], PROBLEM, z, ["x", "y"], solver=solver, dialect=dialect, strategy=strategy)
    assert res.optimal and res.objective == 3
    assert all(evaluate(c, res.assignment) for c in PROBLEM)


@pytest.mark.parametrize("solver, dialect, strategy", SETUPS)
def test_trivial_objective(solver, dialect, strategy):
    res = solve_minimize([x], [eq(x, 0)], x, [], solver=solver, dialect=dialect, strategy=strategy)
    assert res.optimal and res.objective == 0


@pytest.mark.parametrize("solver, dialect, strategy", SETUPS)
def test_unsat(solver, dialect, strategy):
    res = solve_minimize([x], [and_(le(x, 0), ge(x, 1))], x, [], solver=solver, dialect=dialect, strategy=strategy)
    assert res.status == "unsat" and not res.feasible


@needs_yices
def test_native_needs_an_optimizer():
    with pytest.raises(SolverError):
        solve_minimize([x], [eq(x, 0)], x, [], solver="yices-smt2", dialect="native")


@needs_z3
def test_transcript_is_recorded():
    log: list[str] = []
    solve_minimize([x], [ge(x, 5)], x, [], solver="z3", log=log)
    assert any("(minimize x)" in line for line in log)
