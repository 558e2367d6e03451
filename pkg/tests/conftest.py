import time

import pytest

from tomholdem.experiment import Condition, ExperimentConfig, run_factorial
from tomholdem.experiment.io import load_run


@pytest.fixture(scope="session")
def factorial_run(tmp_path_factory):
    """The default 4 conditions x 5 replications x 100 hands, master seed 0."""
    out = tmp_path_factory.mktemp("factorial")
    t0 = time.perf_counter()
    logs = run_factorial(ExperimentConfig(Condition.Full, output_dir=out))
    elapsed = time.perf_counter() - t0
    return {"dir": out, "logs": logs, "seconds": elapsed}


@pytest.fixture(scope="session")
def loaded_run(factorial_run):
    return load_run(factorial_run["dir"])


@pytest.fixture(scope="session")
def analyzed(factorial_run):
    from tomholdem.report import analyze_run

    t0 = time.perf_counter()
    bundle = analyze_run(factorial_run["dir"])
    return {"bundle": bundle, "seconds": time.perf_counter() - t0}


@pytest.fixture
def criterion(capsys):
    """Print one PASS/FAIL line per acceptance criterion, bypassing capture."""

    def emit(name: str, ok: bool, detail: str = "") -> bool:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}" + (f" -- {detail}" if detail else ""))
        return ok

    return emit
