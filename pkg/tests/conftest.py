import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# criterion number -> list of (label, passed)
ACCEPTANCE: dict[int, list] = {}


def record(criterion: int, label: str, passed: bool) -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed)))
    return bool(passed)


def below(criterion: int, label: str, measured: float, bound: float) -> bool:
    return record(criterion, f"{label} = {measured:.3g} < {bound:.3g}", measured < bound)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        items = ACCEPTANCE[c]
        ok = all(p for _, p in items)
        detail = "; ".join(f"{'ok' if p else 'FAILED'} {label}" for label, p in items)
        terminalreporter.write_line(f"criterion {c:2d}: {'PASS' if ok else 'FAIL'} | {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def const_one(n: int):
    e = np.zeros(1 << n)
    e[0] = 1.0
    return lambda x: np.broadcast_to(e, np.shape(x)[:-1] + (1 << n,))
