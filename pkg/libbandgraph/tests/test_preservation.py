"""
Unittests for preservation module.
"""
import pytest
from libbandgraph.preservation import SPD
from libbandgraph.preservation import preservation_trials


class TestPreservation:
    """
    Test randomized class preservation under local expansions.
    """

    def test_short(self):
        """
        Test a short run checks outputs and finds no violation.
        """
        report = preservation_trials(40, seed=3)

        assert sum(report.trials.values()) == 40
        assert report.checked[SPD] > 0
        assert report.passed, [v.to_dict() for v in report.violations]

        data = report.to_dict()
        assert data["seed"] == 3
        assert data["passed"]
        assert data["violations"] == []

    def test_repeatable(self):
        """
        Test the same seed walks through the same expansions.
        """
        first = preservation_trials(20, seed=11)
        second = preservation_trials(20, seed=11)

        assert first.to_dict() == second.to_dict()

    @pytest.mark.slow
    def test_thousand(self):
        """
        Test a thousand local expansions keep the SPD and globally
        standard classes.
        """
        report = preservation_trials(1000, seed=2024)

        assert sum(report.trials.values()) == 1000
        assert report.checked[SPD] > 0
        assert report.passed, [v.to_dict() for v in report.violations]
