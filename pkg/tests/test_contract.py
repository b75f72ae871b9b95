import pytest

from plancontrol import (
    ErrorCode,
    parse_plan_text,
    serialize_plan,
    truncate_plan_text,
    validate_plan_text,
)

from conftest import CHILLER_PLAN_TEXT, VALID_TWO_STEP_TEXT


def two_step_plan(dep2="#S1", agent2="IoT Data Download", task_indices=(1, 2)):
    i1, i2 = task_indices
    return (
        f"#Task{i1}: List the assets available at the MAIN site.\n"
        f"#Agent1: IoT Data Download\n"
        f"#Dependency1: None\n"
        f"#ExpectedOutput1: A list of assets at the MAIN site.\n"
        f"\n"
        f"#Task{i2}: Summarize the assets found at the MAIN site.\n"
        f"#Agent2: {agent2}\n"
        f"#Dependency2: {dep2}\n"
        f"#ExpectedOutput2: A summary of the assets at the MAIN site.\n"
    )


MISSING_AGENT_LINES = "\n".join(
    line for line in VALID_TWO_STEP_TEXT.splitlines() if not line.startswith("#Agent")
)

# The validator fixture matrix: description -> (plan_text, is_valid, messages).
VALIDATOR_MATRIX = {
    "VALID_PLAN": (VALID_TWO_STEP_TEXT, True, []),
    "MISSING_AGENT_LINES": (
        MISSING_AGENT_LINES,
        False,
        [
            "Agent lines missing",
            "Counts of Task/Agent/Dependency/ExpectedOutput must match",
        ],
    ),
    "BAD_TASK_NUMBERS": (
        two_step_plan(task_indices=(1, 3)),
        False,
        ["Task numbers must be 1..N in order; got [1, 3]"],
    ),
    "DEP_BAD_FORMAT": (
        two_step_plan(dep2="INVALID_FORMAT"),
        False,
        ["Dependency2 must be 'None' or '#S1 #S2 ...'; got 'INVALID_FORMAT'"],
    ),
    "DEP_OUT_OF_RANGE": (
        two_step_plan(dep2="#S3"),
        False,
        [
            "Dependency2 out of range [3]; valid 1..2",
            "Dependency2 forward reference [3]; only past steps allowed",
        ],
    ),
    "DEP_FORWARD_REF": (
        two_step_plan(dep2="#S2"),
        False,
        ["Dependency2 forward reference [2]; only past steps allowed"],
    ),
    "UNKNOWN_AGENT": (
        two_step_plan(agent2="Bad Agent"),
        False,
        ["Agent2 unknown 'Bad Agent'. Allowed: ['IoT Data Download']"],
    ),
}


@pytest.mark.parametrize("case", VALIDATOR_MATRIX)
def test_validator_matrix(case, iot_registry):
    plan_text, expect_valid, expect_messages = VALIDATOR_MATRIX[case]
    report = validate_plan_text(plan_text, iot_registry)
    assert report.is_valid is expect_valid
    assert report.messages == expect_messages


class TestParse:
    def test_two_task_sensor_plan(self, iot_registry):
        text = (
            "#Task1: Identify the relevant sensors for monitoring compressor overheating failure in Chiller 6.\n"
            "#Agent1: IoT Data Download\n"
            "#Dependency1: None\n"
            "#ExpectedOutput1: List of relevant sensors for monitoring compressor overheating in Chiller 6.\n"
            "\n"
            "#Task2: Prioritize the identified sensors for monitoring compressor overheating in Chiller 6.\n"
            "#Agent2: IoT Data Download\n"
            "#Dependency2: #S1\n"
            "#ExpectedOutput2: The most relevant sensor to prioritize.\n"
        )
        plan, extractions = parse_plan_text(text)
        assert plan is not None
        assert [set(s.dependencies) for s in plan.steps] == [set(), {1}]
        assert len(extractions) == 8
        assert extractions[0] == (
            "Task",
            1,
            "Identify the relevant sensors for monitoring compressor overheating failure in Chiller 6.",
        )

    def test_empty_text_yields_no_extractions(self):
        plan, extractions = parse_plan_text("")
        assert plan is None
        assert extractions == []

    def test_comma_separated_dependencies(self):
        plan, _ = parse_plan_text(CHILLER_PLAN_TEXT)
        assert plan is not None
        assert set(plan.steps[2].dependencies) == {1, 2}

    def test_never_fails_on_garbage(self):
        plan, extractions = parse_plan_text("### random\nnoise #TaskX: nope\n")
        assert plan is None
        assert extractions == []

    def test_empty_content_line_is_not_extracted(self, iot_registry):
        text = VALID_TWO_STEP_TEXT.replace(
            "#Task2: Summarize the assets found at the MAIN site.", "#Task2:   "
        )
        _, extractions = parse_plan_text(text)
        assert ("Task", 2, "") not in extractions
        report = validate_plan_text(text, iot_registry)
        assert not report.is_valid
        assert (
            "Counts of Task/Agent/Dependency/ExpectedOutput must match"
            in report.messages
        )

    def test_duplicate_index_first_occurrence_wins(self, iot_registry):
        text = VALID_TWO_STEP_TEXT + "#Task2: A second task two.\n"
        report = validate_plan_text(text, iot_registry)
        codes = [error.code for error in report.errors]
        assert codes == [ErrorCode.TASK_NUMBERS_NOT_SEQ, ErrorCode.COUNTS_MISMATCH]
        assert "Task numbers must be 1..N in order; got [1, 2, 2]" in report.messages


class TestValidateEdges:
    def test_mixed_none_and_token_is_bad_format(self, iot_registry):
        report = validate_plan_text(two_step_plan(dep2="None #S1"), iot_registry)
        assert report.errors[0].code == ErrorCode.DEP_BAD_FORMAT

    def test_space_inside_token_is_bad_format(self, iot_registry):
        report = validate_plan_text(two_step_plan(dep2="#S 1"), iot_registry)
        assert report.errors[0].code == ErrorCode.DEP_BAD_FORMAT

    def test_whitespace_and_comma_separators_both_accepted(self, iot_registry):
        three = (
            two_step_plan()
            + "\n#Task3: Combine the results.\n"
            + "#Agent3: IoT Data Download\n"
            + "#Dependency3: #S1, #S2\n"
            + "#ExpectedOutput3: Combined result.\n"
        )
        report = validate_plan_text(three, iot_registry)
        assert report.is_valid
        plan, _ = parse_plan_text(three)
        assert set(plan.steps[2].dependencies) == {1, 2}

    def test_empty_plan_reports_all_sections_missing(self, iot_registry):
        report = validate_plan_text("", iot_registry)
        assert [error.code for error in report.errors] == [ErrorCode.MISSING_SECTION] * 4
        assert report.messages[0] == "Task lines missing"

    def test_agent_comparison_is_case_sensitive(self, iot_registry):
        report = validate_plan_text(
            two_step_plan(agent2="iot data download"), iot_registry
        )
        assert report.errors[0].code == ErrorCode.AGENT_UNKNOWN

    def test_determinism(self, iot_registry):
        text = two_step_plan(dep2="#S3", agent2="Bad Agent")
        first = validate_plan_text(text, iot_registry)
        second = validate_plan_text(text, iot_registry)
        assert first == second

    def test_deleting_any_required_line_invalidates(self, iot_registry):
        lines = VALID_TWO_STEP_TEXT.strip().splitlines()
        for position, line in enumerate(lines):
            if not line.startswith("#"):
                continue
            mutated = "\n".join(lines[:position] + lines[position + 1 :])
            assert not validate_plan_text(mutated, iot_registry).is_valid


class TestSerialize:
    def test_dependency_rendering(self, chiller_plan):
        text = serialize_plan(chiller_plan)
        assert "#Dependency1: None" in text
        assert "#Dependency3: #S1 #S2" in text

    def test_two_step_contains_s1(self, iot_registry):
        plan, _ = parse_plan_text(VALID_TWO_STEP_TEXT)
        assert "#Dependency2: #S1" in serialize_plan(plan)

    def test_round_trip_is_fixed_point(self, chiller_plan, chiller_registry):
        once = serialize_plan(chiller_plan)
        assert validate_plan_text(once, chiller_registry).is_valid
        reparsed, _ = parse_plan_text(once)
        assert reparsed == chiller_plan
        assert serialize_plan(reparsed) == once

    def test_truncate_single_block(self, chiller_plan):
        text = truncate_plan_text(chiller_plan, 1)
        assert text.startswith("#Task1:")
        assert "#Task2:" not in text

    def test_truncate_full_equals_serialize(self, chiller_plan):
        assert truncate_plan_text(chiller_plan, 4) == serialize_plan(chiller_plan)

    def test_truncate_preserves_indices(self, chiller_plan):
        text = truncate_plan_text(chiller_plan, 3)
        assert "#Task3:" in text and "#Task4:" not in text

    def test_truncate_range_errors(self, chiller_plan):
        with pytest.raises(ValueError):
            truncate_plan_text(chiller_plan, 0)
        with pytest.raises(ValueError):
            truncate_plan_text(chiller_plan, 5)
