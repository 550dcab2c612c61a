"""Shared fixtures: deterministic property-test profile, one session-wide
contact-calibration run, a CLI runner, and a terminal summary that prints
one PASS/FAIL line per acceptance criterion."""

from __future__ import annotations

import re
import subprocess
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "deterministic", derandomize=True, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deterministic")

REPO_ROOT = Path(__file__).resolve().parent.parent
CONFIG_DIR = REPO_ROOT / "configs"


@pytest.fixture(scope="session")
def packaged_fits():
    """Fit the contact law to the packaged measured targets once; reused
    by the calibration unit tests and the acceptance gate."""
    from softquad.config import load_targets, packaged_targets_path
    from softquad.contact import calibrate_contact

    return calibrate_contact(load_targets(packaged_targets_path()))


@pytest.fixture(scope="session")
def run_cli():
    """Invoke the installed command line in a subprocess."""

    def _run(*args, cwd=None):
        return subprocess.run(
            [sys.executable, "-m", "softquad", *map(str, args)],
            capture_output=True, text=True, cwd=cwd, timeout=600)

    return _run


# ---------------------------------------------------------------------------
# Acceptance reporting: one line per criterion at the end of the run.

_ACCEPTANCE: dict[int, tuple[str, str]] = {}
_CRITERION_RE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _CRITERION_RE.search(report.nodeid)
    if not m:
        return
    number = int(m.group(1))
    label = m.group(2).replace("_", " ")
    if report.when == "call":
        outcome = "PASS" if report.passed else (
            "SKIP" if report.skipped else "FAIL")
        _ACCEPTANCE[number] = (label, outcome)
    elif report.when == "setup" and (report.failed or report.skipped):
        _ACCEPTANCE[number] = (label, "FAIL" if report.failed else "SKIP")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        label, outcome = _ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number:2d} ({label}): {outcome}")
