import math
import sys

import pytest
from hypothesis import strategies as st

from tumorhopf.model import INFINITE, ModelParams

CANONICAL = dict(gamma=1.0, mu=1.0, sigma_tilde=2.0, sigma_inf=3.3)


@pytest.fixture
def canonical_params():
    return ModelParams(alpha=0.2, **CANONICAL)


alphas = st.one_of(
    st.just(INFINITE),
    st.floats(min_value=math.log(0.05), max_value=math.log(1e4)).map(math.exp),
)


@st.composite
def valid_params(draw):
    """Parameter sets with a positive equilibrium (sigma_inf > sigma_tilde)."""
    sigma_tilde = draw(st.floats(0.2, 5.0))
    ratio = draw(st.floats(1.05, 4.0))
    return ModelParams(
        gamma=draw(st.floats(0.1, 10.0)),
        mu=draw(st.floats(0.1, 5.0)),
        sigma_tilde=sigma_tilde,
        sigma_inf=sigma_tilde * ratio,
        alpha=draw(alphas),
    )


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("tests.test_acceptance")
    if acc is None or not acc.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acc.RESULTS):
        terminalreporter.write_line(acc.RESULTS[n])
    for line in acc.DIAGNOSTICS:
        terminalreporter.write_line(f"  diagnostic: {line}")
