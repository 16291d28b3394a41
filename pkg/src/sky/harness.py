"""Running programs end to end, comparing solver modes, and the regression corpus.

A corpus case is an ordinary ``.sky`` program whose leading comment block
records the oracle's expectations::

    % @case triangle-coloring
    % @expect-models 6
    % @model {chosen(a,bl), chosen(b,g), chosen(c,r)}
    % @provenance enumerate_bruteforce: 512 candidates, 44 accepted, 6 minimal

Since ``%`` starts a comment, case files stay runnable with ``sky run``.
"""

from __future__ import annotations

import re
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from .backtrack import SolveConfig, SolverStats, solve
from .circumscription import (
    DEFAULT_ORACLE_BOUND,
    ModelSet,
    OracleGuardError,
    enumerate_bruteforce,
)
from .grounder import GroundProgram, ground_program
from .parser import ParseError, parse_program
from .syntax import ValidityError

EXIT_OK = 0
EXIT_PARSE = 10
EXIT_SAFETY = 11
EXIT_STRATIFICATION = 12
EXIT_POLICY = 13
EXIT_GUARD = 14
EXIT_CORPUS = 20

_VIOLATION_EXIT = {
    "safety": EXIT_SAFETY,
    "arity": EXIT_SAFETY,
    "guess": EXIT_SAFETY,
    "stratification": EXIT_STRATIFICATION,
    "policy": EXIT_POLICY,
}

MODES = ("backtrack", "enumerate", "oracle")


def exit_code(exc: Exception) -> int:
    """Exit status for an error class; content never matters."""
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, ValidityError):
        return min(_VIOLATION_EXIT[v.kind] for v in exc.violations)
    if isinstance(exc, OracleGuardError):
        return EXIT_GUARD
    raise TypeError(f"no exit code for {type(exc).__name__}")


@dataclass
class RunReport:
    path: str
    mode: str
    model_count: int
    stats: SolverStats
    wall_time: float  # milliseconds
    truncated: bool = False
    lines: list[str] = field(default_factory=list)

    def stats_record(self) -> dict:
        return {**asdict(self.stats), "wall_time": self.wall_time}


def solve_ground(ground: GroundProgram, mode: str = "backtrack", *,
                 branch: str = "lexicographic", dominance: bool = True,
                 max_models: int | None = None,
                 force_large: bool = False) -> tuple[ModelSet, SolverStats, bool]:
    if mode == "oracle":
        models, ostats = enumerate_bruteforce(ground, max_models, force=force_large)
        stats = SolverStats(nodes_expanded=ostats.tried, leaves_evaluated=ostats.tried,
                            models_found=ostats.accepted)
        return models, stats, ostats.truncated
    config = SolveConfig(mode=mode, branch_order=branch, max_models=max_models,
                         dominance_pruning=None if dominance else False)
    result = solve(ground, config)
    return result.models, result.stats, result.truncated


def run_text(text: str, mode: str = "backtrack", path: str = "<string>", **options) -> RunReport:
    start = time.perf_counter()
    ground = ground_program(parse_program(text))
    models, stats, truncated = solve_ground(ground, mode, **options)
    wall = round((time.perf_counter() - start) * 1000.0, 3)
    lines = models.lines()
    return RunReport(path, mode, len(lines), stats, wall, truncated, lines)


def run(path: str | Path, mode: str = "backtrack", **options) -> RunReport:
    """Parse, ground and solve the program at ``path``.

    Errors propagate as ParseError / ValidityError / OracleGuardError.
    """
    text = Path(path).read_text(encoding="utf-8")
    return run_text(text, mode, str(path), **options)


@dataclass
class ModeRow:
    mode: str
    models: ModelSet
    stats: SolverStats


@dataclass
class Comparison:
    ok: bool
    rows: list[ModeRow]

    def table(self) -> str:
        header = ("mode", "models", "leaves", "nodes", "constraint_prunes", "dominance_prunes")
        body = [(r.mode, len(r.models), r.stats.leaves_evaluated, r.stats.nodes_expanded,
                 r.stats.constraint_prunes, r.stats.dominance_prunes) for r in self.rows]
        widths = [max(len(str(x)) for x in col) for col in zip(header, *body)]
        lines = ["  ".join(str(x).ljust(w) for x, w in zip(row, widths)).rstrip()
                 for row in [header, *body]]
        lines.append(f"VERDICT: {'ok' if self.ok else 'MISMATCH'}")
        return "\n".join(lines)


def compare_ground(ground: GroundProgram, force_large: bool = False) -> Comparison:
    n = len(ground.decision_atoms)
    if n > DEFAULT_ORACLE_BOUND and not force_large:
        raise OracleGuardError(n, DEFAULT_ORACLE_BOUND)
    rows = []
    for mode in MODES[::-1]:  # oracle, enumerate, backtrack
        models, stats, _ = solve_ground(ground, mode, force_large=force_large)
        rows.append(ModeRow(mode, models, stats))
    ok = all(r.models == rows[0].models for r in rows)
    return Comparison(ok, rows)


def compare_modes(path: str | Path, force_large: bool = False) -> Comparison:
    ground = ground_program(parse_program(Path(path).read_text(encoding="utf-8")))
    return compare_ground(ground, force_large)


# ---------------------------------------------------------------------------
# corpus

_HEADER_RE = re.compile(r"%\s*@([a-z-]+)\s*(.*?)\s*$")


class CaseFormatError(Exception):
    pass


@dataclass
class CorpusCase:
    name: str
    text: str
    expected_model_count: int
    expected_models: list[str] | None = None
    provenance: str = ""
    path: str = ""

    @classmethod
    def from_text(cls, text: str, path: str = "") -> "CorpusCase":
        fields: dict[str, list[str]] = {}
        for line in text.splitlines():
            m = _HEADER_RE.match(line.strip())
            if m:
                fields.setdefault(m.group(1), []).append(m.group(2))
        if "expect-models" not in fields:
            raise CaseFormatError(f"{path or 'case'}: missing '% @expect-models' header")
        try:
            count = int(fields["expect-models"][0])
        except ValueError:
            raise CaseFormatError(f"{path}: '@expect-models' is not an integer") from None
        name = fields.get("case", [Path(path).stem])[0]
        models = fields.get("model")
        return cls(name, text, count, sorted(models) if models is not None else None,
                   " ".join(fields.get("provenance", [])), path)

    @classmethod
    def load(cls, path: str | Path) -> "CorpusCase":
        return cls.from_text(Path(path).read_text(encoding="utf-8"), str(path))


@dataclass
class CaseResult:
    name: str
    passed: bool
    message: str
    counts: dict[str, int] = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.message}"


def _first_difference(expected: list[str], actual: list[str]) -> str:
    for e, a in zip(expected, actual):
        if e != a:
            return f"expected {e}, got {a}"
    if len(expected) > len(actual):
        return f"missing {expected[len(actual)]}"
    return f"unexpected {actual[len(expected)]}"


def run_case(case: CorpusCase) -> CaseResult:
    try:
        ground = ground_program(parse_program(case.text))
        comparison = compare_ground(ground)
    except (ParseError, ValidityError, OracleGuardError) as exc:
        return CaseResult(case.name, False, f"error: {exc}")
    counts = {r.mode: len(r.models) for r in comparison.rows}
    problems = []
    for row in comparison.rows:
        lines = row.models.lines()
        if len(lines) != case.expected_model_count:
            problems.append(f"{row.mode}: expected {case.expected_model_count} models, "
                            f"got {len(lines)}")
        if case.expected_models is not None and lines != case.expected_models:
            problems.append(f"{row.mode}: {_first_difference(case.expected_models, lines)}")
    if not comparison.ok:
        problems.append("modes disagree")
    if problems:
        return CaseResult(case.name, False, "; ".join(problems), counts)
    leaves = {r.mode: r.stats.leaves_evaluated for r in comparison.rows}
    return CaseResult(case.name, True,
                      f"{case.expected_model_count} models; leaves enumerate="
                      f"{leaves['enumerate']} backtrack={leaves['backtrack']}", counts)


def corpus_files(directory: str | Path) -> list[Path]:
    return sorted(Path(directory).glob("*.sky"))


def run_corpus(directory: str | Path) -> list[CaseResult]:
    results = []
    for path in corpus_files(directory):
        try:
            case = CorpusCase.load(path)
        except (CaseFormatError, OSError, UnicodeDecodeError) as exc:
            results.append(CaseResult(path.stem, False, f"malformed case: {exc}"))
            continue
        results.append(run_case(case))
    return results


def rebuild_case(path: str | Path) -> CorpusCase:
    """Rewrite the expectation header of a case file from an oracle run."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    existing = {}
    for line in lines:
        m = _HEADER_RE.match(line.strip())
        if m:
            existing.setdefault(m.group(1), m.group(2))
    program_lines = [l for l in lines if not _HEADER_RE.match(l.strip())]
    while program_lines and not program_lines[0].strip():
        program_lines.pop(0)
    ground = ground_program(parse_program(text))
    models, stats = enumerate_bruteforce(ground)
    rendered = models.lines()
    header = [f"% @case {existing.get('case', path.stem)}",
              f"% @expect-models {len(rendered)}"]
    header += [f"% @model {m}" for m in rendered]
    header.append(f"% @provenance enumerate_bruteforce: {stats.tried} candidates, "
                  f"{stats.accepted} accepted, {stats.minimal} minimal")
    path.write_text("\n".join(header + [""] + program_lines) + "\n", encoding="utf-8")
    return CorpusCase.load(path)


def shipped_corpus() -> Path:
    return Path(str(resources.files("sky") / "corpus"))
