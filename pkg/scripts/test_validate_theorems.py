#!/usr/bin/env python3
"""
Test Validation Batteries
Validates that every seeded battery passes at a reduced scale and that
battery selection and seeding behave
"""

import sys
import time
from pathlib import Path
sys.path.append(str(Path(__file__).parent))

import pytest

from oprange_errors import OperatorRangeError
from validate_theorems import BATTERIES, DEFAULT_SEED, _run_cases, run_batteries

QUICK_SCALE = 0.02


def test_all_batteries_pass():
    """Every battery passes on a small seeded sample"""
    print("🧪 Testing every validation battery...")

    results = run_batteries(scale=QUICK_SCALE)
    assert [r.name for r in results] == list(BATTERIES), "Batteries run in registry order"
    for result in results:
        assert result.cases >= 1, f"{result.name} ran no cases"
        assert result.passed, f"{result.name} failed cases {result.failed_cases}"

    print("✅ Validation batteries working correctly!")


def test_battery_selection():
    """--only style selection and unknown names"""
    print("🧪 Testing battery selection...")

    results = run_batteries(["worked_cases"], scale=QUICK_SCALE)
    assert len(results) == 1 and results[0].to_dict()["passed"], "Selected battery should pass"

    with pytest.raises(OperatorRangeError):
        run_batteries(["no_such_battery"])

    print("✅ Battery selection working correctly!")


def test_seeding_is_reproducible():
    """The same seed gives the same outcome"""
    print("🧪 Testing battery seeding...")

    first = run_batteries(["douglas_equivalence"], scale=QUICK_SCALE, seed=DEFAULT_SEED + 1)
    second = run_batteries(["douglas_equivalence"], scale=QUICK_SCALE, seed=DEFAULT_SEED + 1)
    assert first[0].to_dict() == second[0].to_dict(), "Seeded runs should agree"

    print("✅ Battery seeding working correctly!")


def test_budget_overrun_fails_battery():
    """A battery that outlasts its budget fails even when every case passes"""
    print("🧪 Testing battery time budgets...")

    def slow_case(rng):
        time.sleep(0.02)
        return True

    result = _run_cases("slow", 2, DEFAULT_SEED, 0.001, slow_case)
    assert result.failures == 0, "Every case passed"
    assert result.over_budget and not result.passed, "Exceeding the budget fails the battery"
    assert result.to_dict()["over_budget"] is True, "The overrun is reported"

    quick = _run_cases("quick", 2, DEFAULT_SEED, 60.0, lambda rng: True)
    assert quick.passed and not quick.over_budget, "A battery inside its budget passes"

    print("✅ Battery time budgets working correctly!")


def main():
    """Run all validation battery tests"""
    print("🧪 Validation Battery Test Suite")
    print("=" * 60)

    try:
        test_all_batteries_pass()
        test_battery_selection()
        test_seeding_is_reproducible()
        test_budget_overrun_fails_battery()

        print("\n🎉 All tests passed! Validation batteries are working correctly.")

    except AssertionError as e:
        print(f"\n❌ Test failed: {e}")
        sys.exit(1)
    except Exception as e:
        print(f"\n💥 Unexpected error: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
