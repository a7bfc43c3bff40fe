import random

import pytest
from hypothesis import settings

from dyncover.functions import Coverage, GraphicMatroidRank, Junta, Modular

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_coverage(rnd: random.Random, n: int, items: int = 5, weighted: bool = False) -> Coverage:
    sets = {e: [i for i in range(items) if rnd.random() < 0.4] for e in range(n)}
    weights = {i: rnd.randint(1, 4) for i in range(items)} if weighted else None
    return Coverage(sets, weights)


def random_matroid(rnd: random.Random, n: int, vertices: int = 5) -> GraphicMatroidRank:
    edges = {e: tuple(rnd.sample(range(vertices), 2)) for e in range(n)}
    return GraphicMatroidRank(edges, vertices=range(vertices))


def random_junta(rnd: random.Random, n: int, r: int = 3) -> Junta:
    support = rnd.sample(range(n), r)
    cov = Coverage({u: [i for i in range(3) if rnd.random() < 0.6] for u in support})
    return Junta(support, lambda s: cov.value(s), elements=range(n))


def random_modular(rnd: random.Random, n: int) -> Modular:
    return Modular({e: rnd.randint(0, 5) for e in range(n)})


KINDS = {
    "coverage": lambda rnd, n: random_coverage(rnd, n),
    "weighted_coverage": lambda rnd, n: random_coverage(rnd, n, weighted=True),
    "matroid": random_matroid,
    "junta": random_junta,
    "modular": random_modular,
}


@pytest.fixture
def rnd():
    return random.Random(12345)


# --- acceptance reporting ----------------------------------------------------

ACCEPTANCE = {}


class AcceptanceLog:
    """Collects sub-check outcomes; one summary line per criterion is printed
    at the end of the session."""

    def record(self, criterion: int, name: str, ok: bool, detail: str = ""):
        ACCEPTANCE.setdefault(criterion, []).append((name, bool(ok), detail))
        return ok


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[k]
        ok = all(c[1] for c in checks)
        tr.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}")
        for name, passed, detail in checks:
            tr.write_line(f"    [{'pass' if passed else 'FAIL'}] {name}: {detail}")
