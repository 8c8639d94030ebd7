"""
Tests for the acceptance suite
"""

import pytest

from app.core.exceptions import NumericalError
from app.services.acceptance import AcceptanceSuite, run_acceptance


@pytest.mark.unit
class TestAcceptanceSuite:
    """Item selection, quick mode and failure reporting"""

    def test_fast_items_pass(self):
        report = run_acceptance(quick=True, only=[3, 4, 5, 6, 8, 12])
        assert [item.number for item in report.items] == [3, 4, 5, 6, 8, 12]
        assert report.all_passed, [item.detail for item in report.failures]

    def test_quick_mode_skips_oracle_items(self):
        report = AcceptanceSuite(quick=True).run(only=[9, 10, 13])
        assert [item.passed for item in report.items] == [None, None, None]
        assert report.all_passed
        assert report.failures == []

    def test_errors_become_failures(self):
        suite = AcceptanceSuite(quick=True)

        def broken():
            raise NumericalError("boom")

        suite.ratio_symmetry = broken
        report = suite.run(only=[3])
        assert not report.all_passed
        assert report.failures[0].detail == "NumericalError: boom"

    def test_item_table(self):
        numbers = [number for number, _, _, _ in AcceptanceSuite().items()]
        assert numbers == list(range(1, 14))

    def test_sudden_closed_form(self):
        passed, _ = AcceptanceSuite().sudden_closed_form()
        assert passed

    def test_quick_n_conservation(self):
        passed, detail = AcceptanceSuite(quick=True).n_conservation()
        assert passed, detail


@pytest.mark.slow
class TestSlowItems:
    def test_symplectic_and_efficiency(self):
        report = run_acceptance(quick=True, only=[2, 7])
        assert report.all_passed, [item.detail for item in report.failures]
