"""Shared fixtures: the combinatorial golden configurations used throughout.

Each golden is a labelled disk model taken from a known drawing of the
degree-d family: chords are (odd, even) homoclinic pairs and the landing map
sends the remaining directions to equilibrium indices.  Centers get explicit
cylinder assignments so the models are fully combinatorial.
"""

import pytest

from polysep.diskmodel import decompose
from polysep.tracing import SeparatrixGraph


def make_model(degree, homoclinics, landing, center_map=None, taus=None):
    homs = tuple(sorted((k, j, (taus or {}).get((k, j), 1.0)) for k, j in homoclinics))
    graph = SeparatrixGraph(degree, homs, dict(landing))
    return decompose(graph, None, center_map=center_map)


@pytest.fixture
def model_d2_two_centers():
    # z^2 + 1 shape: one homoclinic, two center cylinders
    return make_model(2, [(1, 0)], {})


@pytest.fixture
def model_break_one():
    # degree 3, one sink + one source + one center; homoclinic s_{1,0};
    # s_2 lands backward at the source (eq 0), s_3 forward at the sink (eq 1)
    return make_model(3, [(1, 0)], {2: 0, 3: 1})


@pytest.fixture
def model_double_point_two_centers():
    # degree 4, double point receiving s_2 and s_3, two center cylinders
    # bounded by s_{1,0} and s_{5,4}; the pair breaks to form s_{1,4}
    return make_model(4, [(1, 0), (5, 4)], {2: 0, 3: 0})


@pytest.fixture
def model_one_strip_three_cylinders():
    # degree 5: sink, source, three centers; homoclinics s_{1,2}, s_{5,4},
    # s_{7,6}; landing s_0 (source) and s_3 (sink); one strip with
    # distinguished transversal T_{3,0}
    return make_model(5, [(1, 2), (5, 4), (7, 6)], {0: 0, 3: 1})


@pytest.fixture
def model_center_sink_double():
    # degree 4: one center (cylinder of s_{1,2}), one sink (ray 3), one
    # double point (rays 0, 4, 5 and two sepal zones); one strip
    return make_model(4, [(1, 2)], {0: 0, 3: 1, 4: 0, 5: 0})


@pytest.fixture
def model_hgraph_seven():
    # degree 10, seven homoclinics; two double points (rays 3,4 and 14,15);
    # six centers.  The wheel of cylinders makes wrap-around H-graph edges.
    return make_model(
        10,
        [(7, 0), (1, 2), (5, 6), (9, 8), (11, 10), (17, 12), (13, 16)],
        {3: 0, 4: 0, 14: 1, 15: 1},
    )


@pytest.fixture
def model_chain_break_three():
    # degree 8: a sepal chain c1..c4 over a double point plus a clockwise
    # cylinder holding c4, c5, c6; breaking {c1, c4, c6} forms two new
    # homoclinics (the three-break/two-form rank-1 pattern)
    return make_model(
        8,
        [(1, 2), (3, 4), (5, 6), (7, 12), (11, 10), (9, 8)],
        {0: 0, 13: 0},
    )


@pytest.fixture
def model_simultaneous():
    # degree 8: four homoclinics in three strips; breaking all four can form
    # s_{3,0} and s_{5,12} simultaneously (a rank-2 event)
    return make_model(
        8,
        [(3, 8), (5, 4), (9, 0), (13, 12)],
        {1: 0, 2: 1, 6: 2, 7: 3, 10: 4, 11: 5},
    )
