"""One test per acceptance criterion, at the tolerances in the default config.

Each prints a PASS/FAIL line, also collected into the terminal summary.
"""
import pytest

from hkcollapse import acceptance
from hkcollapse.config import load_config


@pytest.fixture(scope="module")
def cfg():
    return load_config()


@pytest.mark.parametrize("name", list(acceptance.CHECKS))
def test_criterion(name, cfg, acceptance_record):
    res = acceptance.CHECKS[name](cfg)
    line = res.line()
    print(line)
    acceptance_record(line)
    assert res.passed, line
