import pytest

from shellmodal.services.verification import CHECKS, run_checks

FAST = ["square-table", "disk-tables", "material", "potential", "mass", "consistency", "toy-pencil"]


@pytest.mark.parametrize("name", FAST)
def test_fast_checks_pass(name):
    results = run_checks([name])
    assert results
    failed = [(item.name, item.value, item.expected) for item in results if not item.passed]
    assert failed == []


def test_results_are_reported_as_they_finish():
    seen = []
    results = run_checks(["toy-pencil"], on_result=seen.append)
    assert seen == results


def test_unknown_check():
    with pytest.raises(KeyError):
        run_checks(["bogus"])


def test_registry_covers_fe_checks():
    assert {"rigid-modes", "plate-fe"} <= set(CHECKS)


@pytest.mark.slow
@pytest.mark.parametrize("name", ["rigid-modes", "plate-fe"])
def test_slow_checks_pass(name):
    assert all(item.passed for item in run_checks([name]))
