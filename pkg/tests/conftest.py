import time

_START = {}


def pytest_sessionstart(session):
    _START["t"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if not VERDICTS:
        return
    elapsed = time.perf_counter() - _START["t"]
    terminalreporter.section("acceptance criteria")
    for line in VERDICTS:
        terminalreporter.write_line(line)
    status = "PASS" if elapsed < 60 else "FAIL"
    terminalreporter.write_line(f"{status}  10c  full suite runtime {elapsed:.1f} s (limit 60 s)")
