"""Shared fixtures: real harness CSV outputs, produced via the bitemper CLI.

The plotting package consumes only the harness's external CSV interface, so
the test corpus is generated by invoking the installed ``bitemper`` command
as a subprocess.
"""
import subprocess

import pytest


def _run_harness(out_dir, config, extra=()):
    cmd = ["bitemper", "run", "--config", config, "--out", str(out_dir),
           "--seeds", "3", *extra]
    subprocess.run(cmd, check=True, capture_output=True, text=True)
    return out_dir


@pytest.fixture(scope="session")
def bimodal_csvs(tmp_path_factory):
    out = tmp_path_factory.mktemp("bimodal16")
    return _run_harness(out, "bimodal16", ("--rounds", "300"))


@pytest.fixture(scope="session")
def scaled_csvs(tmp_path_factory):
    out = tmp_path_factory.mktemp("scaled200")
    return _run_harness(out, "scaled200")
