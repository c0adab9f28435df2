def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance pass/fail lines even when capture is on."""
    try:
        from test_acceptance import RESULT_LINES
    except ImportError:
        return
    if RESULT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in RESULT_LINES:
            terminalreporter.write_line(line)
