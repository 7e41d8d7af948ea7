"""Collects acceptance verdicts and prints one line per criterion at the end of the run."""

import pytest

RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[RESULTS] = {}


class Recorder:
    def __init__(self, results: dict):
        self.results = results

    def check(self, criterion: int, label: str, ok: bool, detail: str) -> bool:
        self.results.setdefault(criterion, []).append((label, bool(ok), detail))
        print(f"criterion {criterion} {label}: {'PASS' if ok else 'FAIL'} ({detail})")
        return bool(ok)

    def near(self, criterion: int, label: str, observed: float, expected: float, tol: float) -> bool:
        err = abs(observed - expected)
        return self.check(criterion, label, err <= tol, f"{observed:.8g} vs {expected:.10g} +- {tol:g}, off by {err:.3g}")

    def at_most(self, criterion: int, label: str, observed: float, bound: float) -> bool:
        return self.check(criterion, label, observed <= bound, f"{observed:.3g} <= {bound:g}")


@pytest.fixture
def acceptance(request):
    return Recorder(request.config.stash[RESULTS])


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        items = results[n]
        failed = [f"{label}: {detail}" for label, ok, detail in items if not ok]
        if failed:
            terminalreporter.write_line(f"criterion {n}: FAIL  " + "; ".join(failed))
        else:
            terminalreporter.write_line(f"criterion {n}: PASS  ({len(items)} checks)")
