import contextlib
import time

import numpy as np
import pytest

_criteria = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion(request):
    """Run a block as one acceptance criterion and record a PASS/FAIL line.

    The block fails if it raises or if it exceeds ``limit_s`` seconds.
    """
    lines = request.config.stash.setdefault(_criteria, [])

    @contextlib.contextmanager
    def run(number, title, limit_s):
        start = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            elapsed = time.perf_counter() - start
            line = f"criterion {number} FAIL ({elapsed:.2f}s): {title}: {type(exc).__name__}: {exc}".splitlines()[0]
            lines.append(line)
            print(line)
            raise
        elapsed = time.perf_counter() - start
        ok = elapsed < limit_s
        line = f"criterion {number} {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s, limit {limit_s:g}s): {title}"
        lines.append(line)
        print(line)
        assert ok, f"criterion {number} took {elapsed:.2f}s, limit {limit_s}s"

    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_criteria, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
