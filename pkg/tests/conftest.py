import numpy as np
import pytest

from rydmis import generate_lattice, sample_family


@pytest.fixture(scope="session")
def triangular_layout():
    return generate_lattice("triangular", 6, 6, 5.0)


@pytest.fixture(scope="session")
def square_layout():
    return generate_lattice("square", 6, 6, 5.0)


@pytest.fixture(scope="session")
def small_triangular_family(triangular_layout):
    """Ten graphs of sizes 5..7 used across module tests."""
    return sample_family(triangular_layout, [5, 6, 7], per_size=4, seed=11)[:10]


def unique_mis_graph(layout, size, seed_start=0):
    """First family sample of the given size whose MIS is unique."""
    from rydmis import mis_exact

    for seed in range(seed_start, seed_start + 200):
        (g,) = sample_family(layout, [size], per_size=1, seed=seed)
        if len(mis_exact(g, enumerate_all=True).configurations) == 1:
            return g
    raise RuntimeError("no unique-MIS instance found")


@pytest.fixture(scope="session")
def six_node_unique_mis(triangular_layout):
    return unique_mis_graph(triangular_layout, 6, seed_start=100)


def path_graph(n, spacing=5.0, r_b=6.0):
    from rydmis import build_unit_disk_graph

    return build_unit_disk_graph([(i * spacing, 0.0) for i in range(n)], r_b)


def triangle_graph(side=5.0, r_b=6.0):
    from rydmis import build_unit_disk_graph

    return build_unit_disk_graph(
        [(0.0, 0.0), (side, 0.0), (side / 2, side * np.sqrt(3) / 2)], r_b
    )
