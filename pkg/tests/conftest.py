import math

import pytest

from netvuln.rules import AttachmentRule


def sqrt_rule(k_max=2000):
    """C-class rule ``f(k) = k/2 + sqrt(k+1)`` tabulated up to ``k_max``."""
    return AttachmentRule.from_function(lambda k: 0.5 * k + math.sqrt(k + 1), gamma=0.5, k_max=k_max)


@pytest.fixture(scope="session")
def sqrt_example():
    return sqrt_rule()


@pytest.fixture(scope="session")
def affine_half():
    return AttachmentRule.affine(0.5, 1.0)


ACCEPTANCE: list[str] = []


def record(number, ok, detail):
    ACCEPTANCE.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
