# tests/test_graphs.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""Unit tests for graph templates, simulation graphs, datasets and batches."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wave_twin.constants.DTwin import DGraph
from wave_twin.core.Topology import IntersectionTopology
from wave_twin.graphs.ExitGraph import ExitGraph, build_exit_graph
from wave_twin.graphs.GraphBatch import GraphBatch
from wave_twin.graphs.GraphStore import build_graphs, read_graphs, write_graphs
from wave_twin.graphs.GraphTemplate import TemplateKind, load_template
from wave_twin.graphs.InflowGraph import InflowGraph, build_inflow_graph
from wave_twin.graphs.SimGraph import CONTEXT_NAMES, SimGraph
from wave_twin.utils.TwinErrors import ConfigError, InvalidArgumentError, MappingError

from .conftest import SMALL_W


class TestGraphTemplate:
    """Test cases for the shipped templates."""

    def test_exit_template(self):
        """Test the exit template sizes and its one-edge-per-stop-bar layout."""
        template = load_template(TemplateKind.EXIT)
        assert (template.n_nodes, template.n_edges) == (33, 22)
        assert template.target_mask().sum() == 11
        assert sorted(template.edges[:, 0].tolist()) == list(range(22))

    def test_inflow_template(self):
        """Test the inflow template sizes and its pillar edges."""
        template = load_template(TemplateKind.INFLOW)
        assert (template.n_nodes, template.n_edges) == (36, 180)
        assert template.pillar_mask().sum() == DGraph.INF_PILLAR_EDGES
        assert template.target_mask().sum() == 12
        assert template.layers == ("NB", "SB", "EB", "WB")

    def test_template_is_cached(self):
        """Test that templates load once."""
        assert load_template(TemplateKind.EXIT) is load_template(TemplateKind.EXIT)


class TestExitGraph:
    """Test cases for exit graphs."""

    def test_shapes(self, exit_graphs):
        """Test node, edge and feature shapes."""
        g = exit_graphs[0]
        assert isinstance(g, ExitGraph)
        assert (g.n_nodes, g.n_edges, g.edge_dim, g.w) == (33, 22, 29, SMALL_W)
        assert g.z.shape == (22, 29, SMALL_W)
        assert g.edge_summary().shape == (22, 29)
        assert g.context().shape == (len(CONTEXT_NAMES),)

    def test_targets_hidden_from_input(self, exit_graphs):
        """Test that exit rows are zero in x and kept in y."""
        for g in exit_graphs:
            assert np.all(g.x[g.target_mask] == 0)
            np.testing.assert_array_equal(g.x[~g.target_mask], g.y[~g.target_mask])

    def test_dummy_rows_are_zero(self, exit_graphs):
        """Test that dummy slots carry zero counts and no loss."""
        tee = exit_graphs[1]
        assert tee.intersection_id == "t_intersection"
        assert tee.dummy_mask.sum() == 15
        assert np.all(tee.y[tee.dummy_mask] == 0)
        assert not tee.loss_mask()[tee.dummy_mask].any()

    def test_dummy_edges_carry_zero_features(self, exit_graphs):
        """Test that edges touching a dummy slot have all-zero features."""
        tee = exit_graphs[1]
        inactive = ~tee.edge_active
        assert inactive.any()
        assert np.all(tee.z[inactive] == 0)
        assert np.all(tee.z[tee.edge_active, DGraph.TMC_DIM + DGraph.DRV_DIM :] == tee.sig)

    def test_static_features(self, exit_graphs):
        """Test that active edges carry the flattened ratios and behavior."""
        g = exit_graphs[0]
        row = g.edge_static[np.flatnonzero(g.edge_active)[0]]
        np.testing.assert_allclose(row[: DGraph.TMC_DIM], g.tmc.reshape(-1))
        np.testing.assert_allclose(row[DGraph.TMC_DIM :], g.drv)

    def test_arrays_are_read_only(self, exit_graphs):
        """Test that graph arrays cannot be modified in place."""
        with pytest.raises(ValueError):
            exit_graphs[0].y[0, 0] = 1.0

    def test_nonzero_dummy_rejected(self, exit_graphs):
        """Test that a dummy slot with counts is rejected."""
        tee = exit_graphs[1]
        data = tee.to_dict()
        slot = int(np.flatnonzero(tee.dummy_mask)[0])
        data["y"][slot][0] = 1
        with pytest.raises(InvalidArgumentError):
            SimGraph.from_dict(data)

    def test_canonical_hash(self, exit_graphs):
        """Test that the digest is stable and sees count changes."""
        g = exit_graphs[0]
        assert g.canonical_hash() == SimGraph.from_dict(g.to_dict()).canonical_hash()
        data = g.to_dict()
        data["y"][0][0] = 1 if data["y"][0][0] == 0 else 0
        assert SimGraph.from_dict(data).canonical_hash() != g.canonical_hash()


class TestApproachOrder:
    """Test cases for the order of approaches in a topology document."""

    @settings(max_examples=10, deadline=None)
    @given(st.permutations(["NB", "SB", "EB", "WB"]), st.permutations(["N", "S", "E", "W"]))
    def test_reordered_document_is_isomorphic(self, records, topologies, approaches, legs):
        """Test that listing approaches in another order yields the same graphs."""
        doc = json.loads(topologies[0].to_json())
        doc["approaches"] = {a: doc["approaches"][a] for a in approaches}
        doc["outgoing"] = {leg: doc["outgoing"][leg] for leg in legs}
        reordered = IntersectionTopology.from_doc(doc)
        record = next(r for r in records if r.intersection_id == "full")
        for build in (build_exit_graph, build_inflow_graph):
            a, b = build(record, topologies[0]), build(record, reordered)
            assert a.canonical_hash() == b.canonical_hash()
            np.testing.assert_array_equal(a.edge_summary(), b.edge_summary())


class TestInflowGraph:
    """Test cases for inflow graphs."""

    def test_shapes(self, inflow_graphs):
        """Test node, edge and target counts."""
        g = inflow_graphs[0]
        assert isinstance(g, InflowGraph)
        assert (g.n_nodes, g.n_edges, g.edge_dim) == (36, 180, 29)
        assert g.pillar_mask().sum() == 108
        assert g.layer_rows(2).sum() == 9

    def test_rotated_ratios(self, inflow_graphs):
        """Test that each layer's edges see their own approach row first."""
        g = inflow_graphs[0]
        layers = g.template.edge_layer()
        for layer in range(4):
            active = np.flatnonzero((layers == layer) & g.edge_active)
            assert active.size
            np.testing.assert_allclose(g.edge_static[active[0], :3], g.tmc[layer])

    def test_inflow_rows_are_targets(self, inflow_graphs):
        """Test that the inflow slots are masked in the input."""
        g = inflow_graphs[0]
        assert np.all(g.x[g.target_mask] == 0)
        assert g.y[g.metric_rows()].sum() > 0


class TestGraphStore:
    """Test cases for graph datasets on disk."""

    def test_write_and_read(self, exit_graphs, tmp_path):
        """Test that a dataset reads back equal graphs and its header."""
        path = tmp_path / "graphs.jsonl"
        header = write_graphs(exit_graphs, path)
        back_header, back = read_graphs(path)

        assert header == back_header
        assert header.summary() == {"nodes": 33, "edges": 22, "edge_dim": 29}
        assert back == exit_graphs
        assert isinstance(back[0], ExitGraph)
        assert len(read_graphs(path, limit=2)[1]) == 2

    def test_empty_dataset(self, tmp_path):
        """Test that writing no graph returns no header."""
        assert write_graphs([], tmp_path / "empty.jsonl") is None
        with pytest.raises(ConfigError):
            read_graphs(tmp_path / "empty.jsonl")

    def test_mixed_kinds_rejected(self, exit_graphs, inflow_graphs, tmp_path):
        """Test that exit and inflow graphs cannot share a dataset."""
        with pytest.raises(ConfigError):
            write_graphs([exit_graphs[0], inflow_graphs[0]], tmp_path / "mixed.jsonl")

    def test_foreign_header(self, tmp_path):
        """Test that a file without the dataset header is rejected."""
        path = tmp_path / "other.jsonl"
        path.write_text(json.dumps({"format": "something-else"}) + "\n")
        with pytest.raises(ConfigError):
            read_graphs(path)

    def test_unknown_topology(self, records):
        """Test that a record without a known topology is a mapping error."""
        with pytest.raises(MappingError):
            list(build_graphs(records[:1], {}, "exit"))


class TestGraphBatch:
    """Test cases for graph batching."""

    def test_collate_offsets_edges(self, exit_graphs):
        """Test that graph b's edges are offset by b * N."""
        batch = GraphBatch.collate(exit_graphs[:3])
        assert batch.x.shape == (99, SMALL_W)
        assert batch.edges.shape == (66, 2)
        np.testing.assert_array_equal(batch.edges[22:44], exit_graphs[1].edges + 33)
        assert batch.edge_attr.shape == (66, 29)

    def test_split(self, exit_graphs):
        """Test that split() undoes the stacking."""
        batch = GraphBatch.collate(exit_graphs[:3])
        parts = batch.split(batch.y)
        assert len(parts) == 3
        np.testing.assert_array_equal(parts[2], exit_graphs[2].y)

    def test_empty_batch(self):
        """Test that an empty batch is rejected."""
        with pytest.raises(InvalidArgumentError):
            GraphBatch.collate([])

    def test_mixed_batch(self, exit_graphs, inflow_graphs):
        """Test that kinds cannot be mixed within a batch."""
        with pytest.raises(ConfigError):
            GraphBatch.collate([exit_graphs[0], inflow_graphs[0]])


if __name__ == "__main__":
    pytest.main([__file__])
