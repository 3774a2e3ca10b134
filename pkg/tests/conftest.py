import os

from hypothesis import HealthCheck, settings, strategies as st

from derived_intersect.polyring import PolyRing

settings.register_profile(
    "default",
    max_examples=int(os.environ.get("DI_HYPOTHESIS_EXAMPLES", "40")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def exponents(nvars, max_deg=3):
    return st.lists(st.integers(0, max_deg), min_size=nvars, max_size=nvars).map(tuple)


def polys(ring: PolyRing, max_terms=4, max_deg=3):
    coeff = st.integers(-5, 5)
    term = st.tuples(exponents(ring.nvars, max_deg), coeff)
    return st.lists(term, max_size=max_terms).map(
        lambda ts: sum((ring.monomial(e, c) for e, c in ts), ring.zero())
    )


# (number, title, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")
