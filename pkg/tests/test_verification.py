from curvscat import SolverConfig
from curvscat.verification import run_suite


def test_suite_passes_on_single_eta():
    results = run_suite((8.0,), SolverConfig())
    assert len(results) == 9
    for r in results:
        assert r.passed, f"{r.name}: {r.detail}"
    # one item per declared check, in declaration order
    names = [r.name for r in results]
    assert names == [
        "forbidden-zone confinement",
        "single-inflection convexity",
        "monotone past iteration",
        "eta-zero time lower bound",
        "half-level bound and envelope sandwich",
        "interior-maximum regime bounds",
        "monotone future iteration",
        "area-curvature identity",
        "logarithmic tail slopes",
    ]


def test_suite_skips_regime_bound_below_threshold():
    results = run_suite((4.0,), SolverConfig())
    item = next(r for r in results if r.name == "interior-maximum regime bounds")
    assert item.passed and "skipped" in item.detail
    for r in results:
        assert r.passed, f"{r.name}: {r.detail}"
