import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circuitlm import scoring
from circuitlm.erc import ErcReport
from circuitlm.scoring import (
    BenchmarkSummary,
    Difficulty,
    EmptyStratumError,
    MismatchedPromptSetError,
    PromptRecord,
    RunOutcome,
    aggregate,
    classify_pass,
    difficulty_rate,
)
from circuitlm.violations import Severity, Violation


def report(fatal=0, major=0, minor=0, warning=0, halted=False) -> ErcReport:
    violations = []
    for severity, count in ((Severity.FATAL, fatal), (Severity.MAJOR, major),
                            (Severity.MINOR, minor),
                            (Severity.WARNING, warning)):
        violations.extend(
            Violation(rule_id=f"x-{severity.value.lower()}-{i}",
                      severity=severity, message="t")
            for i in range(count))
    return ErcReport(violations=violations, halted_ood=halted)


class TestClassifyPass:
    # Twelve-case truth table: (fatal, major, minor, warning, halted) -> pass
    TRUTH_TABLE = [
        ((0, 0, 0, 0, False), True),
        ((0, 0, 2, 3, False), True),   # minors and warnings never fail
        ((0, 0, 0, 5, False), True),
        ((0, 0, 9, 0, False), True),
        ((1, 0, 0, 0, False), False),
        ((0, 1, 0, 0, False), False),
        ((1, 1, 0, 0, False), False),
        ((2, 0, 1, 1, False), False),
        ((0, 3, 0, 2, False), False),
        ((0, 0, 0, 0, True), False),   # OOD halt is an automatic failure
        ((0, 0, 1, 1, True), False),
        ((1, 0, 0, 0, True), False),
    ]

    @pytest.mark.parametrize("counts,expected", TRUTH_TABLE)
    def test_truth_table(self, counts, expected):
        fatal, major, minor, warning, halted = counts
        assert classify_pass(report(fatal, major, minor, warning,
                                    halted)) is expected

    def test_monotone_under_violation_removal(self):
        failing = report(fatal=1, major=2, minor=1)
        for keep in range(len(failing.violations)):
            smaller = ErcReport(violations=failing.violations[:keep])
            if classify_pass(failing):
                assert classify_pass(smaller)


def outcomes_from_counts(major_counts: list[int],
                         run_index: int = 0) -> list[RunOutcome]:
    return [RunOutcome(prompt_id=f"p{i}", run_index=run_index,
                       report=report(major=count))
            for i, count in enumerate(major_counts)]


def prompts_for(outcomes: list[RunOutcome],
                difficulty: Difficulty = Difficulty.EASY,
                ) -> list[PromptRecord]:
    ids = sorted({o.prompt_id for o in outcomes})
    return [PromptRecord(id=pid, text=pid, difficulty=difficulty)
            for pid in ids]


class TestDifficultyRate:
    def test_direct_formula(self):
        passed = [RunOutcome(f"p{i}", 0, report()) for i in range(10)]
        failed = [RunOutcome(f"p{i}", 0, report(major=1))
                  for i in range(10, 20)]
        outcomes = passed + failed
        prompts = prompts_for(outcomes)
        assert difficulty_rate(outcomes, prompts, Difficulty.EASY) == 50.0

    def test_mean_across_runs(self):
        # Per-run rates 40, 50, 60 over ten prompts -> mean 50.
        outcomes = []
        for run, passes in enumerate((4, 5, 6)):
            for i in range(10):
                outcomes.append(RunOutcome(
                    f"p{i}", run, report(major=0 if i < passes else 1)))
        prompts = prompts_for(outcomes)
        assert difficulty_rate(outcomes, prompts, Difficulty.EASY) == 50.0

    def test_empty_stratum(self):
        outcomes = outcomes_from_counts([0])
        prompts = prompts_for(outcomes, Difficulty.EASY)
        with pytest.raises(EmptyStratumError):
            difficulty_rate(outcomes, prompts, Difficulty.HARD)

    def test_adversarial_is_an_alias_for_hard(self):
        assert scoring.parse_difficulty("Adversarial") is Difficulty.HARD
        assert scoring.parse_difficulty("hard") is Difficulty.HARD


class TestAggregate:
    def test_vacuous_single_run(self):
        outcomes = outcomes_from_counts([0, 0, 0])
        summary = aggregate(outcomes, prompts_for(outcomes))
        assert summary.pass_at_1_percent == 100.0
        for severity in Severity:
            assert summary.per_severity[severity] == (0.0, 0.0)

    def test_severity_mean_and_population_std(self):
        # Major counts [0, 1, 2, 1]: mean 1.0, population std 0.7071.
        outcomes = outcomes_from_counts([0, 1, 2, 1])
        summary = aggregate(outcomes, prompts_for(outcomes))
        mu, sigma = summary.per_severity[Severity.MAJOR]
        assert mu == pytest.approx(1.0)
        assert sigma == pytest.approx(math.sqrt(0.5), abs=1e-4)
        assert sigma == pytest.approx(0.7071, abs=1e-4)

    def test_three_run_mean(self):
        # 88, 87, 89 passes out of 100 -> 88.0 overall.
        outcomes = []
        for run, passes in enumerate((88, 87, 89)):
            for i in range(100):
                outcomes.append(RunOutcome(
                    f"p{i:03}", run, report(major=0 if i < passes else 1)))
        summary = aggregate(outcomes, prompts_for(outcomes))
        assert summary.pass_at_1_percent == pytest.approx(88.0)

    def test_permutation_invariance(self):
        outcomes = outcomes_from_counts([0, 1, 2, 1])
        prompts = prompts_for(outcomes)
        forward = aggregate(outcomes, prompts)
        backward = aggregate(list(reversed(outcomes)), prompts)
        assert forward == backward

    def test_mismatched_prompt_sets_rejected(self):
        outcomes = [RunOutcome("p0", 0, report()),
                    RunOutcome("p1", 1, report())]
        prompts = prompts_for(outcomes)
        with pytest.raises(MismatchedPromptSetError):
            aggregate(outcomes, prompts)

    def test_noncontiguous_runs_rejected(self):
        outcomes = [RunOutcome("p0", 1, report())]
        with pytest.raises(ValueError):
            aggregate(outcomes, prompts_for(outcomes))

    def test_ood_halt_counts_as_failure(self):
        outcomes = [RunOutcome("p0", 0, report(halted=True)),
                    RunOutcome("p1", 0, report())]
        summary = aggregate(outcomes, prompts_for(outcomes))
        assert summary.pass_at_1_percent == 50.0

    def test_pass_at_1_equals_independent_per_run_rates(self):
        outcomes = []
        per_run = {0: [0, 1, 0, 0], 1: [1, 1, 0, 0], 2: [0, 0, 0, 0]}
        for run, counts in per_run.items():
            outcomes.extend(outcomes_from_counts(counts, run))
        summary = aggregate(outcomes, prompts_for(outcomes))
        rates = [100.0 * sum(1 for c in counts if c == 0) / len(counts)
                 for counts in per_run.values()]
        assert summary.pass_at_1_percent == pytest.approx(
            sum(rates) / len(rates))

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(0, 3), min_size=1, max_size=12))
    def test_rates_bounded(self, counts):
        outcomes = outcomes_from_counts(counts)
        summary = aggregate(outcomes, prompts_for(outcomes))
        assert 0.0 <= summary.pass_at_1_percent <= 100.0
        for mu, sigma in summary.per_severity.values():
            assert mu >= 0.0
            assert sigma >= 0.0


class TestRenderTable:
    def test_table_layout(self):
        outcomes = outcomes_from_counts([0, 1, 2, 1])
        summary = aggregate(outcomes, prompts_for(outcomes))
        table = scoring.render_table(summary, label="demo")
        lines = table.splitlines()
        assert lines[0].split() == ["Model", "Pass@1", "Fatal", "Major",
                                    "Minor", "Warning"]
        assert lines[2].startswith("demo")
        assert "1.0 ± 0.7" in lines[2]

    def test_summary_json_round_trip(self):
        outcomes = outcomes_from_counts([0, 1])
        summary = aggregate(outcomes, prompts_for(outcomes))
        data = summary.to_dict()
        assert data["pass_at_1_percent"] == 50.0
        assert data["per_severity"]["Major"]["mean"] == 0.5

    def test_prompt_loader_validates(self, tmp_path):
        path = tmp_path / "prompts.json"
        path.write_text('[{"id": "a", "text": "t", "difficulty": '
                        '"Adversarial"}]')
        prompts = scoring.load_prompts(path)
        assert prompts[0].difficulty is Difficulty.HARD
        path.write_text('[{"id": "a", "text": "t", "difficulty": "Easy"},'
                        '{"id": "a", "text": "u", "difficulty": "Easy"}]')
        with pytest.raises(ValueError):
            scoring.load_prompts(path)
