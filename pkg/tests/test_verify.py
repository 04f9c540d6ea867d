import pytest

from sosplab.harness import verify


@pytest.mark.parametrize("suite", sorted(verify.SUITES))
def test_suite_passes(suite):
    results = verify.run_suite(suite, seed=verify.DEFAULT_SEED)
    assert len(results) == len(verify.SUITES[suite])
    failed = [r for r in results if not r.passed]
    assert not failed, "\n".join(f"{r.name}: {r.detail}" for r in failed)


def test_unknown_suite_rejected():
    from sosplab.errors import ConfigError

    with pytest.raises(ConfigError):
        verify.run_suite("cooking")


def test_checks_report_details():
    results = verify.run_suite("core", seed=verify.DEFAULT_SEED)
    for r in results:
        assert r.name and isinstance(r.detail, str) and r.detail
