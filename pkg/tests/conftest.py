import os

# single-threaded BLAS so timing criteria measure one core; must precede numpy import
for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")

import contextlib  # noqa: E402
import time  # noqa: E402

import pytest  # noqa: E402

_RESULTS = pytest.StashKey[dict]()


class Recorder:
    def __init__(self, store):
        self.store = store

    @contextlib.contextmanager
    def criterion(self, number, title):
        detail = {}
        start = time.perf_counter()
        try:
            yield detail
        except BaseException:
            self._record(number, title, False, detail, start)
            raise
        self._record(number, title, True, detail, start)

    def _record(self, number, title, ok, detail, start):
        extra = ", ".join(f"{k}={v}" for k, v in detail.items())
        line = (f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}"
                f" [{extra}{', ' if extra else ''}{time.perf_counter() - start:.1f}s]")
        self.store[number] = line
        print(line)


@pytest.fixture
def acceptance(request):
    return Recorder(request.config.stash.setdefault(_RESULTS, {}))


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, {})
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
