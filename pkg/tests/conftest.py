# tests/conftest.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""Shared fixtures: a small simulated corpus and its graphs."""

import pytest

from wave_twin.core.Topology import IntersectionTopology
from wave_twin.graphs.GraphStore import build_graphs, topology_index
from wave_twin.simkit.Corpus import generate_corpus

SMALL_W = 16


@pytest.fixture(scope="session")
def topologies():
    return [IntersectionTopology.shipped("full"), IntersectionTopology.shipped("t_intersection")]


@pytest.fixture(scope="session")
def records(topologies):
    return [r for r, _ in generate_corpus(8, topologies, "mixed", seed=3, w=SMALL_W)]


@pytest.fixture(scope="session")
def exit_graphs(records, topologies):
    return list(build_graphs(records, topology_index(topologies), "exit"))


@pytest.fixture(scope="session")
def inflow_graphs(records, topologies):
    return list(build_graphs(records, topology_index(topologies), "inflow"))
