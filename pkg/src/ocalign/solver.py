"""Talk SMT-LIB 2 to an external solver process and minimize an integer objective.

Two dialects: ``native`` sends a ``(minimize ...)`` directive (z3, OptiMathSAT),
``iterative`` repeatedly asks for a model and asserts a strictly smaller
objective until the solver answers unsat (any QF_LIA solver).
"""

from __future__ import annotations

import os
import queue
import shutil
import subprocess
import threading
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .terms import Term, Var, declare, to_smt


class SolverError(RuntimeError):
    pass


class SolverTimeout(SolverError):
    pass


def find_solver(path: str | None = None) -> str:
    """Explicit path, then $SOLVER_PATH, then z3 or yices-smt2 on $PATH."""
    for cand in (path, os.environ.get("SOLVER_PATH")):
        if cand:
            found = shutil.which(cand) or (cand if os.path.isfile(cand) else None)
            if not found:
                raise SolverError(f"solver binary {cand!r} not found")
            return found
    for name in ("z3", "yices-smt2"):
        found = shutil.which(name)
        if found:
            return found
    raise SolverError("no SMT solver found; pass --solver or set SOLVER_PATH")


def supports_native(path: str) -> bool:
    name = os.path.basename(path).lower()
    return "z3" in name or "optimathsat" in name


def solver_command(path: str) -> list[str]:
    name = os.path.basename(path).lower()
    if "z3" in name:
        return [path, "-in", "-smt2"]
    if "yices" in name:
        return [path, "--incremental"]
    if "cvc" in name:
        return [path, "--lang=smt2", "--incremental"]
    return [path]


# -- s-expressions -------------------------------------------------------------


def parse_sexprs(text: str) -> list:
    """Parse a sequence of s-expressions into nested lists of atoms."""
    out: list = []
    stack: list[list] = [out]
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c == "(":
            stack.append([])
            i += 1
        elif c == ")":
            if len(stack) == 1:
                raise SolverError("unbalanced ')' in solver output")
            done = stack.pop()
            stack[-1].append(done)
            i += 1
        elif c == '"':
            j = i + 1
            while j < n and not (text[j] == '"' and (j + 1 >= n or text[j + 1] != '"')):
                j += 2 if text[j] == '"' else 1
            stack[-1].append(text[i : j + 1])
            i = j + 1
        elif c == "|":
            j = text.index("|", i + 1)
            stack[-1].append(text[i + 1 : j])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            stack[-1].append(text[i:j])
            i = j
    if len(stack) != 1:
        raise SolverError("unbalanced '(' in solver output")
    return out


def _balance(text: str) -> int:
    depth, in_str = 0, False
    for c in text:
        if c == '"':
            in_str = not in_str
        elif not in_str:
            depth += (c == "(") - (c == ")")
    return depth


def value_of(sx) -> int | bool:
    if isinstance(sx, str):
        if sx == "true":
            return True
        if sx == "false":
            return False
        return int(sx)
    if len(sx) == 2 and sx[0] == "-":
        return -value_of(sx[1])
    if len(sx) == 3 and sx[0] == "/":
        raise SolverError(f"non-integer model value {sx}")
    raise SolverError(f"cannot read model value {sx}")


# -- sessions ------------------------------------------------------------------


@dataclass
class SolverStats:
    wall: float = 0.0
    checks: int = 0
    iterations: int = 0


class SolverSession:
    """One solver process; not shared between tasks."""

    def __init__(self, path: str, timeout: float | None = None, log: list[str] | None = None):
        self.path = path
        self.timeout = timeout
        self.deadline = None if timeout is None else time.monotonic() + timeout
        self.stats = SolverStats()
        self.log = log
        self._lines: queue.Queue = queue.Queue()
        try:
            self.proc = subprocess.Popen(
                solver_command(path),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.STDOUT,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise SolverError(f"cannot start solver {path}: {exc}") from exc
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        for line in self.proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def __enter__(self) -> "SolverSession":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        if self.proc.poll() is None:
            try:
                self.proc.stdin.write("(exit)\n")
                self.proc.stdin.flush()
                self.proc.wait(timeout=1)
            except (OSError, subprocess.TimeoutExpired):
                self.proc.kill()
                self.proc.wait()

    def send(self, command: str) -> None:
        if self.log is not None:
            self.log.append(command)
        try:
            self.proc.stdin.write(command + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise SolverError(f"solver pipe closed: {exc}") from exc

    def send_all(self, commands: Iterable[str]) -> None:
        for c in commands:
            self.send(c)

    def _read_response(self) -> str:
        parts: list[str] = []
        while True:
            remaining = None if self.deadline is None else self.deadline - time.monotonic()
            if remaining is not None and remaining <= 0:
                self._kill()
                raise SolverTimeout("solver timed out")
            try:
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                self._kill()
                raise SolverTimeout("solver timed out") from None
            if line is None:
                raise SolverError("solver exited: " + "".join(parts).strip())
            if not line.strip() and not parts:
                continue
            parts.append(line)
            text = "".join(parts)
            if _balance(text) <= 0:
                text = text.strip()
                if text.startswith("(error"):
                    raise SolverError(f"solver error: {text}")
                return text

    def _kill(self) -> None:
        if self.proc.poll() is None:
            self.proc.kill()

    def check_sat(self) -> str:
        self.send("(check-sat)")
        self.stats.checks += 1
        answer = self._read_response()
        if answer not in ("sat", "unsat", "unknown"):
            raise SolverError(f"unexpected check-sat answer {answer!r}")
        return answer

    def get_values(self, names: Sequence[str], chunk: int = 2000) -> dict[str, int | bool]:
        out: dict[str, int | bool] = {}
        for k in range(0, len(names), chunk):
            part = names[k : k + chunk]
            self.send("(get-value (" + " ".join(part) + "))")
            parsed = parse_sexprs(self._read_response())
            if len(parsed) != 1:
                raise SolverError("malformed get-value response")
            for pair in parsed[0]:
                out[pair[0]] = value_of(pair[1])
        return out


@dataclass
class SolveResult:
    status: str  # optimal | unsat | timeout | unknown
    objective: int | None = None
    assignment: dict[str, int | bool] = field(default_factory=dict)
    stats: SolverStats = field(default_factory=SolverStats)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    @property
    def feasible(self) -> bool:
        return self.objective is not None


def problem_script(declarations: Sequence[Var], constraints: Sequence[Term]) -> list[str]:
    # produce-models must precede set-logic for yices
    lines = ["(set-option :produce-models true)", "(set-logic QF_LIA)"]
    lines += [declare(v) for v in declarations]
    lines += [f"(assert {to_smt(c)})" for c in constraints]
    return lines


def solve_minimize(
    declarations: Sequence[Var],
    constraints: Sequence[Term],
    objective: Var,
    wanted: Sequence[str],
    solver: str | None = None,
    dialect: str | None = None,
    strategy: str = "descent",
    timeout: float | None = None,
    log: list[str] | None = None,
) -> SolveResult:
    """Minimize `objective` subject to `constraints`; return values for `wanted`.

    `dialect` is ``native`` or ``iterative`` (default: native when the solver
    supports it).  The iterative dialect uses strict-decrease descent, or
    binary search with ``strategy="binary"``.  On timeout the best model
    found so far is returned with status ``timeout``.
    """
    path = find_solver(solver)
    if dialect is None:
        dialect = "native" if supports_native(path) else "iterative"
    if dialect == "native" and not supports_native(path):
        raise SolverError(f"{os.path.basename(path)} has no native optimization")
    if dialect not in ("native", "iterative"):
        raise SolverError(f"unknown dialect {dialect!r}")
    wanted = list(dict.fromkeys([objective.name, *wanted]))
    start = time.monotonic()
    best = SolveResult("unknown")
    with SolverSession(path, timeout, log) as s:
        try:
            s.send_all(problem_script(declarations, constraints))
            if dialect == "native":
                best = _native(s, objective, wanted)
            elif strategy == "binary":
                best = _binary(s, objective, wanted, best)
            else:
                best = _descent(s, objective, wanted, best)
        except SolverTimeout:
            best.status = "timeout"
        best.stats = s.stats
    best.stats.wall = time.monotonic() - start
    return best


def _native(s: SolverSession, objective: Var, wanted) -> SolveResult:
    s.send(f"(minimize {objective.name})")
    answer = s.check_sat()
    s.stats.iterations = 1
    if answer == "unsat":
        return SolveResult("unsat")
    if answer == "unknown":
        return SolveResult("unknown")
    values = s.get_values(wanted)
    return SolveResult("optimal", int(values[objective.name]), values)


def _descent(s: SolverSession, objective: Var, wanted, best: SolveResult) -> SolveResult:
    while True:
        answer = s.check_sat()
        s.stats.iterations += 1
        if answer == "unsat":
            if best.objective is None:
                best.status = "unsat"
            else:
                best.status = "optimal"
            return best
        if answer == "unknown":
            best.status = "unknown"
            return best
        values = s.get_values(wanted)
        best.objective, best.assignment = int(values[objective.name]), values
        s.send(f"(assert (< {objective.name} {best.objective}))")


def _binary(s: SolverSession, objective: Var, wanted, best: SolveResult) -> SolveResult:
    answer = s.check_sat()
    s.stats.iterations += 1
    if answer != "sat":
        best.status = "unsat" if answer == "unsat" else "unknown"
        return best
    values = s.get_values(wanted)
    best.objective, best.assignment = int(values[objective.name]), values
    lo = 0
    while lo < best.objective:
        mid = (lo + best.objective - 1) // 2
        s.send("(push 1)")
        s.send(f"(assert (<= {objective.name} {mid}))")
        answer = s.check_sat()
        s.stats.iterations += 1
        if answer == "sat":
            values = s.get_values(wanted)
            best.objective, best.assignment = int(values[objective.name]), values
        elif answer == "unsat":
            lo = mid + 1
        else:
            best.status = "unknown"
            return best
        s.send("(pop 1)")
    best.status = "optimal"
    return best
