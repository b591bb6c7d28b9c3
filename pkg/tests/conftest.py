import pytest

_ACCEPTANCE = {}


class _Recorder:
    def __init__(self, number, title):
        self.number, self.title = number, title
        self.failures = []

    def check(self, ok, detail):
        if not ok:
            self.failures.append(detail)
        return ok

    def finish(self):
        _ACCEPTANCE[self.number] = (self.title, self.failures)
        assert not self.failures, "; ".join(self.failures[:10])


@pytest.fixture
def criterion():
    """Build a recorder: ``rec = criterion(n, title)``; ``rec.check(...)``; ``rec.finish()``."""
    made = []

    def factory(number, title):
        rec = _Recorder(number, title)
        made.append(rec)
        return rec

    yield factory
    for rec in made:
        # a test that raised before finish() still gets its line
        if rec.number not in _ACCEPTANCE:
            _ACCEPTANCE[rec.number] = (rec.title, rec.failures or ["did not complete"])


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, failures = _ACCEPTANCE[number]
        status = "PASS" if not failures else "FAIL"
        line = f"criterion {number}: {status}  {title}"
        if failures:
            line += f"  ({len(failures)} check(s) failed; first: {failures[0]})"
        terminalreporter.write_line(line)
