import pytest

from fairrank.model import FairnessConstraints, in_group_rankings


@pytest.fixture
def items_for():
    """Synthetic in-group rankings long enough for a constraint set."""

    def make(c: FairnessConstraints):
        return in_group_rankings([[f"g{j}-{t}" for t in range(max(c.upper[j], 1))] for j in range(c.ell)])

    return make


def pytest_terminal_summary(terminalreporter):
    import sys

    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance") and getattr(mod, "RESULTS", None):
            terminalreporter.section("acceptance criteria")
            for line in mod.RESULTS:
                terminalreporter.write_line(line)
