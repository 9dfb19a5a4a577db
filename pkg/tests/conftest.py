import os
import sys
import tempfile
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
PARI_ADAPTER = ROOT / "adapters" / "pari_oracle.py"
sys.path.insert(0, str(Path(__file__).resolve().parent))

# one cache directory per session, so cached files from elsewhere never leak in
_CACHE = tempfile.mkdtemp(prefix="fh-cache-")
os.environ["FERMAT_HASSE_CACHE"] = _CACHE


def pari_available() -> bool:
    try:
        import cypari  # noqa: F401
    except Exception:
        return False
    return PARI_ADAPTER.exists()


PARI_CMD = f"{sys.executable} {PARI_ADAPTER}"

requires_oracle = pytest.mark.skipif(not pari_available(), reason="no external class-group oracle (cypari) available")


@pytest.fixture(scope="session")
def cache_dir():
    return Path(_CACHE)


@pytest.fixture(scope="session")
def oracle_backend():
    if not pari_available():
        pytest.skip("no external class-group oracle (cypari) available")
    from fermat_hasse.classgroup import BackendConfig

    return BackendConfig("oracle", oracle_cmd=PARI_CMD)


# acceptance lines collected by test_acceptance.report()
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
