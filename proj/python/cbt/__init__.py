"""Concurrent behavior trees: parsing, simulation and trace checking."""

import json

from ._cbt import (
    ConfigError,
    ContractViolation,
    ParseError,
    TraceFormatError,
    canonical,
    compose_parallel,
    compose_progress_fallback,
    compose_progress_sequence,
    effective_priority,
    oracle_equivalence,
    parse,
    run_scenario,
    scenarios,
    starvation_bound,
    usecase_tree,
    validate,
)
from ._cbt import verify as _verify


def verify(trace, property="all", bound=None):
    """Check a JSON-lines trace and return the verdict as a dict."""
    return json.loads(_verify(trace, property, bound))


def events(trace):
    """Event records of a JSON-lines trace, without the header and footer."""
    rows = [json.loads(line) for line in trace.splitlines() if line.strip()]
    return [r for r in rows if "event" in r]


__all__ = [
    "ConfigError",
    "ContractViolation",
    "ParseError",
    "TraceFormatError",
    "canonical",
    "compose_parallel",
    "compose_progress_fallback",
    "compose_progress_sequence",
    "effective_priority",
    "events",
    "oracle_equivalence",
    "parse",
    "run_scenario",
    "scenarios",
    "starvation_bound",
    "usecase_tree",
    "validate",
    "verify",
]
