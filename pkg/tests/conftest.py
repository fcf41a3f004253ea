import pytest

from least_sim import Network, Point, SensorNode


def make_nodes(positions, energy=1.0):
    return [
        SensorNode(id=i, pos=Point(x, y), energy=energy)
        for i, (x, y) in enumerate(positions, start=1)
    ]


def make_net(positions, energy=1.0, bs=(50.0, 50.0)):
    return Network(make_nodes(positions, energy), Point(*bs))


@pytest.fixture
def line10_net():
    """Ten sensors on the horizontal midline, BS at the center."""
    return make_net([(10.0 * i - 5.0, 50.0) for i in range(1, 11)])


FIVE_POSITIONS = [(10.0, 10.0), (20.0, 80.0), (80.0, 20.0), (90.0, 90.0), (55.0, 45.0)]


@pytest.fixture
def five_net():
    return make_net(FIVE_POSITIONS, energy=0.1)
