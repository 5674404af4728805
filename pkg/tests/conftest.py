import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def populations(draw, min_agents=1, max_agents=6, min_options=2, max_options=6):
    """Row-stochastic matrices with occasional exact zeros."""
    M = draw(st.integers(min_agents, max_agents))
    N = draw(st.integers(min_options, max_options))
    raw = draw(hnp.arrays(float, (M, N), elements=st.floats(0.0, 1.0)))
    raw = np.where(raw < 0.1, 0.0, raw)
    raw[np.arange(M), raw.argmax(axis=1)] += 0.5  # no empty rows
    return raw / raw.sum(axis=1, keepdims=True)


def pytest_terminal_summary(terminalreporter):
    from runs import SUMMARY

    if SUMMARY:
        terminalreporter.section("acceptance criteria")
        for name, status, detail in SUMMARY:
            terminalreporter.write_line(f"[{status}] {name}: {detail}")
