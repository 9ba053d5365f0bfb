# conftest.py — ensure repo root is on sys.path so pytest can import project packages
from pathlib import Path
import sys
PROJECT_ROOT = Path(__file__).resolve().parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

import pytest  # noqa: E402

from Module_1_Ring_Model import utils  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="also run the full-length scenario runs")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-length run, skipped without --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True)
def isolated_events(tmp_path):
    """Every test starts with its events log in its own tmp_path."""
    utils.set_events_log(str(tmp_path / "events.log"))
    utils.set_echo(True)
    yield
    utils.set_events_log(None)
    utils.set_echo(True)
