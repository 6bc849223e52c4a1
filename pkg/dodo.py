"""Run or update the project. This file uses the `doit` Python package. It works
like a Makefile, but is Python-based

Every task calls the `speclog` command line through `src/harness.py`, so
`doit` only reruns a command when the config or one of the modules it reads
has changed.
"""
import sys
sys.path.insert(1, './src/')


import config
from pathlib import Path

OUTPUT_DIR = Path(config.OUTPUT_DIR)
DATA_DIR = Path(config.DATA_DIR)
DEFAULT_CONFIG = Path(config.DEFAULT_CONFIG)

CORE = ["./src/config.py", "./src/coremath.py", "./src/bounds.py", "./src/misc_tools.py"]
SOLVER = [*CORE, "./src/solver.py", "./src/form_cache.py"]


def harness(command, *extra):
    return " ".join(
        ["python ./src/harness.py", command, f"--config {DEFAULT_CONFIG}", f"--out {OUTPUT_DIR}", *extra]
    )


def task_config():
    """Create the data, cache and output directories"""
    return {
        "actions": ["python src/config.py"],
        "file_dep": ["./src/config.py"],
        "targets": [DATA_DIR / "manual", config.CACHE_DIR, OUTPUT_DIR],
        "verbosity": 2,
    }


def task_bounds():
    """
    Tabulate the eigenvalue-sum lower bound, the upper-bound leading term
    and the Weyl asymptotics for k = 1..k_max
    """
    return {
        "actions": [harness("bounds")],
        "file_dep": [DEFAULT_CONFIG, *CORE, "./src/harness.py"],
        "targets": [OUTPUT_DIR / "bounds.csv"],
        "task_dep": ["config"],
        "clean": True,
    }


def task_asymptotics():
    """
    Karamata summation ratios and the Weyl-sum consistency column
    """
    return {
        "actions": [harness("asymptotics")],
        "file_dep": [DEFAULT_CONFIG, *CORE, "./src/harness.py"],
        "targets": [OUTPUT_DIR / "asymptotics.csv"],
        "task_dep": ["config"],
        "clean": True,
    }


def task_solve():
    """
    Assemble the Galerkin form matrix (cached) and write its spectrum
    """
    return {
        "actions": [harness("solve")],
        "file_dep": [DEFAULT_CONFIG, *SOLVER, "./src/harness.py"],
        "targets": [OUTPUT_DIR / "spectrum.csv"],
        "task_dep": ["config"],
        "clean": True,
        "verbosity": 2,
    }


def task_cutoff():
    """
    Plane-wave energies of boundary-layer cutoffs and the remainder power-law fit
    """
    return {
        "actions": [harness("cutoff")],
        "file_dep": [DEFAULT_CONFIG, *SOLVER, "./src/harness.py"],
        "targets": [OUTPUT_DIR / "cutoff.csv", OUTPUT_DIR / "cutoff_fit.csv"],
        "task_dep": ["config"],
        "clean": True,
    }


def task_verify():
    """
    Run the full acceptance suite. Takes several minutes at the default sizes.
    """
    return {
        "actions": [harness("verify")],
        "file_dep": [DEFAULT_CONFIG, *SOLVER, "./src/harness.py"],
        "targets": [OUTPUT_DIR / "verification.json"],
        "task_dep": ["config"],
        "clean": True,
        "verbosity": 2,
    }


def task_test():
    """Run the unit tests"""
    return {
        "actions": ["pytest"],
        "file_dep": [*SOLVER, "./src/harness.py"],
        "verbosity": 2,
    }
