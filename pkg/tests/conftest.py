import numpy as np
import pytest

from pidq import JointDist


def gate_joint(fn) -> JointDist:
    """Uniform independent bits x1, x2 with y = fn(x1, x2)."""
    p = np.zeros((2, 2, 2))
    for a in range(2):
        for b in range(2):
            p[a, b, fn(a, b)] = 0.25
    return JointDist.from_array(p)


# reference table, (x1, x2, y) -> p; its masses sum to 0.99
DIS_XOR_ROWS = [
    (0, 0, 0, 0.0),
    (0, 0, 1, 0.05),
    (0, 1, 0, 0.03),
    (0, 1, 1, 0.28),
    (1, 0, 0, 0.53),
    (1, 0, 1, 0.03),
    (1, 1, 0, 0.01),
    (1, 1, 1, 0.06),
]


def dis_xor() -> JointDist:
    return JointDist.from_table(DIS_XOR_ROWS, normalize=True)


def copy_x1() -> JointDist:
    return gate_joint(lambda a, b: a)


def all_equal() -> JointDist:
    return JointDist.from_table([(0, 0, 0, 0.5), (1, 1, 1, 0.5)])


def random_joint(rng, shape) -> JointDist:
    return JointDist.from_array(rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape))


@pytest.fixture
def and_gate():
    return gate_joint(lambda a, b: a & b)


@pytest.fixture
def or_gate():
    return gate_joint(lambda a, b: a | b)


@pytest.fixture
def xor_gate():
    return gate_joint(lambda a, b: a ^ b)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# per-criterion PASS/FAIL lines for the acceptance module; each test class
# there carries a ``criterion`` label and every test in it must pass
_CRITERIA: dict[str, list[str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    label = getattr(item.cls, "criterion", None)
    if label is None:
        return
    slot = _CRITERIA.setdefault(label, [])
    if report.failed or (report.when == "call" and report.skipped):
        slot.append(item.name)
    elif report.when == "call":
        slot.append("")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: int(s.split()[0])):
        failed = sorted({name for name in _CRITERIA[label] if name})
        status = "PASS" if not failed else "FAIL"
        tail = "" if not failed else "  (failing: " + ", ".join(failed) + ")"
        terminalreporter.write_line(f"criterion {label}: {status}{tail}")
