import pytest

from bflow import verify


@pytest.mark.slow
@pytest.mark.parametrize("suite", verify.SUITES)
def test_suite_passes(suite):
    report = verify.run_suite(suite)
    print(verify.summary(report))
    assert report["tests"] > 0
    assert report["failures"] == 0, verify.summary(report)


def test_unknown_suite():
    with pytest.raises(ValueError):
        verify.run_suite("everything")
