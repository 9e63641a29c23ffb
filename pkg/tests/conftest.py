import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def warm_enumerator():
    # numba compiles on first use; keep that out of timed sections
    from fibtype.coset import enumerate_cosets
    from fibtype.presentations import FibTypeParams, make_fib_presentation

    for strategy in ("hlt", "felsch"):
        enumerate_cosets(make_fib_presentation(FibTypeParams(5, 1, 2)).to_general(), strategy=strategy)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        status, text = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {status} {text}")
