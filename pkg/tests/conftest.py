import numpy as np
from hypothesis import settings, strategies as st

from relclust.core import SideInfo

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@st.composite
def labelings(draw, min_n=2, max_n=30, max_k=5):
    n = draw(st.integers(min_n, max_n))
    k = draw(st.integers(1, max_k))
    return np.array(draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n)))


@st.composite
def side_infos(draw, n, max_links=40):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if not pairs:
        return SideInfo(n)
    chosen = draw(st.lists(st.sampled_from(pairs), max_size=max_links, unique=True))
    vals = draw(st.lists(st.integers(0, 1), min_size=len(chosen), max_size=len(chosen)))
    return SideInfo(n, dict(zip(chosen, vals)))


def random_side_info(rng, n, m):
    """m distinct random pairs with random link values."""
    iu, ju = np.triu_indices(n, 1)
    idx = rng.choice(iu.size, size=min(m, iu.size), replace=False)
    return SideInfo.from_arrays(n, iu[idx], ju[idx], rng.integers(0, 2, idx.size))


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
