import pytest

from conchk import BOTTOM, build_history, read, write


@pytest.fixture
def write_then_read():
    """A write completing before a read that returns the written value."""
    return build_history(
        [write(0, "pa", "x", 1, 0, 10), read(1, "pb", "x", 1, 20, 30)]
    )


@pytest.fixture
def stale_bottom_read():
    """A completed write followed by a read that still returns the initial value."""
    return build_history(
        [write(0, "pa", "x", 1, 0, 10), read(1, "pb", "x", BOTTOM, 20, 30)]
    )


@pytest.fixture
def concurrent_unwritten_read():
    """A read overlapping a write and returning a value nobody wrote."""
    return build_history(
        [write(0, "pa", "x", 1, 0, 30), read(1, "pb", "x", 2, 10, 20)]
    )


@pytest.fixture
def inverted_reads():
    """Two writes in one session; a second session reads them newest-first."""
    return build_history(
        [
            write(0, "pa", "x", 1, 0, 10),
            write(1, "pa", "x", 2, 20, 30),
            read(2, "pb", "x", 2, 40, 50),
            read(3, "pb", "x", 1, 60, 70),
        ]
    )


@pytest.fixture
def cross_bottom_reads():
    """Two sessions write different objects, then each misses the other's write."""
    return build_history(
        [
            write(0, "pa", "x", 1, 0, 10),
            write(1, "pb", "y", 1, 0, 10),
            read(2, "pa", "y", BOTTOM, 20, 30),
            read(3, "pb", "x", BOTTOM, 20, 30),
        ]
    )
