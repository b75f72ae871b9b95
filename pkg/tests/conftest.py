import json
from pathlib import Path

import pytest

from plancontrol import AgentRegistry, parse_plan_text

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = Path(__file__).parent / "golden"

CHILLER_AGENTS = [
    "WorkOrder Agent",
    "Time Series Analytics and Forecasting",
    "Failure Mode and Sensor Relevancy Expert for Industrial Asset",
]

CHILLER_PLAN_TEXT = """#Task1: Retrieve existing work orders for Chiller 9 with equipment ID CWC04009 in May and June 2020.
#Agent1: WorkOrder Agent
#Dependency1: None
#ExpectedOutput1: List of existing work orders for Chiller 9 (CWC04009) in May and June 2020.

#Task2: Check for anomalies and alerts for Chiller 9 (CWC04009) in May and June 2020.
#Agent2: Time Series Analytics and Forecasting
#Dependency2: #S1
#ExpectedOutput2: Analysis of anomalies and alerts for Chiller 9 (CWC04009) in the specified period.

#Task3: Analyze the results from existing work orders and anomalies/alerts to determine if a new work order is needed for July 2020.
#Agent3: Failure Mode and Sensor Relevancy Expert for Industrial Asset
#Dependency3: #S1, #S2
#ExpectedOutput3: Recommendation on whether to create a new work order for Chiller 9 (CWC04009) in July 2020.

#Task4: Create a new work order if recommended by the Failure Mode and Sensor Relevancy Expert.
#Agent4: WorkOrder Agent
#Dependency4: #S3
#ExpectedOutput4: New work order created if necessary.
"""

VALID_TWO_STEP_TEXT = """#Task1: List the assets available at the MAIN site.
#Agent1: IoT Data Download
#Dependency1: None
#ExpectedOutput1: A list of assets at the MAIN site.

#Task2: Summarize the assets found at the MAIN site.
#Agent2: IoT Data Download
#Dependency2: #S1
#ExpectedOutput2: A summary of the assets at the MAIN site.
"""

SITE_ASSETS_ANSWER = (
    "The assets for site MAIN are: CQPA AHU 1, CQPA AHU 2B, Chiller 4, "
    "Chiller 6, Chiller 9, Chiller 3."
)


def read_golden(name: str) -> str:
    """Golden files end with the conventional final newline; the prompt
    builders do not emit one, so it is stripped here."""
    text = (GOLDEN_DIR / name).read_text(encoding="utf-8")
    return text[:-1] if text.endswith("\n") else text


@pytest.fixture
def chiller_registry():
    return AgentRegistry(CHILLER_AGENTS)


@pytest.fixture
def chiller_plan():
    plan, _ = parse_plan_text(CHILLER_PLAN_TEXT)
    assert plan is not None
    return plan


@pytest.fixture
def iot_registry():
    return AgentRegistry(["IoT Data Download"])


@pytest.fixture
def trajectories():
    return json.loads((DATA_DIR / "trajectories.json").read_text(encoding="utf-8"))
