"""Scenario runner, demonstration recorder, replay, and metrics."""

from puppet.harness.scenario import (
    Scenario,
    ScriptedOperator,
    SinusoidOperator,
    ExternalOperator,
    Waypoint,
    FaultInjection,
    load_scenario,
    scenario_from_dict,
)
from puppet.harness.session import SessionConfig, SessionResult, run_scenario
from puppet.harness.record import DemoWriter, read_demo, DemoRecord
from puppet.harness.metrics import Metrics, compute_metrics, replay

__all__ = [
    "Scenario",
    "ScriptedOperator",
    "SinusoidOperator",
    "ExternalOperator",
    "Waypoint",
    "FaultInjection",
    "load_scenario",
    "scenario_from_dict",
    "SessionConfig",
    "SessionResult",
    "run_scenario",
    "DemoWriter",
    "read_demo",
    "DemoRecord",
    "Metrics",
    "compute_metrics",
    "replay",
]
