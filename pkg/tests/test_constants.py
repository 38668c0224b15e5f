# tests/test_constants.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""Test constants module."""

import logging

import pytest

from wave_twin.constants.DTwin import (
    LOG_LEVELS,
    MOVEMENT_LEG,
    PHASE_OF,
    DApproach,
    DCliMsg,
    DDrv,
    DGraph,
    DMovement,
    DSignal,
    DTrain,
    DTwin,
    DTwinErr,
    DTwinLog,
    DTwinMsgText,
    DVariant,
)


class TestDTwin:
    """Test DTwin constants."""

    def test_version_exists(self):
        """Test that version constant exists and is a string."""
        assert isinstance(DTwin.VERSION, str)
        assert len(DTwin.VERSION) > 0

    def test_window_defaults(self):
        """Test the canonical 80 x 5 s window and saturation cap."""
        assert DTwin.W == 80
        assert DTwin.BUCKET_SECONDS == 5
        assert DTwin.SATURATION == 8


class TestDTwinLog:
    """Test TwinLog level constants."""

    def test_default_is_warning(self):
        """Test the default level maps to logging.WARNING."""
        assert LOG_LEVELS[DTwinLog.DEFAULT] == logging.WARNING

    def test_levels_are_lowercase(self):
        """Test that every level key is lowercase."""
        assert all(k == k.lower() for k in LOG_LEVELS)


class TestDSignal:
    """Test ring-and-barrier constants."""

    def test_rings_partition_phases(self):
        """Test that the two rings hold phases 1 to 8 exactly once."""
        assert sorted(DSignal.RING1 + DSignal.RING2) == list(range(1, 9))

    def test_cycle_ranges(self):
        """Test the named cycle ranges."""
        assert DSignal.CYCLE_RANGES["standard"] == DSignal.CYCLE_STANDARD == (120, 240)
        assert DSignal.CYCLE_RANGES["field"] == DSignal.CYCLE_FIELD == (150, 240)

    def test_every_movement_has_a_phase_and_leg(self):
        """Test that every approach/movement pair is governed and routed."""
        for a in DApproach.ORDER:
            for m in DMovement.ORDER:
                assert 1 <= PHASE_OF[(a, m)] <= 8
                assert MOVEMENT_LEG[(a, m)] in ("N", "S", "E", "W")

    def test_major_throughs_are_coordinated(self):
        """Test that phases 2 and 6 serve the EB and WB throughs."""
        assert PHASE_OF[("EB", "T")] == 2
        assert PHASE_OF[("WB", "T")] == 6


class TestDGraph:
    """Test template size constants."""

    def test_exit_sizes(self):
        """Test the exit template node and edge counts."""
        assert DGraph.EXIT_INCOMING + DGraph.EXIT_OUTGOING == DGraph.EXIT_NODES == 33
        assert DGraph.EXIT_EDGES == 22

    def test_inflow_sizes(self):
        """Test the inflow template node and edge counts."""
        assert DGraph.INF_LAYERS * DGraph.INF_SLOTS == DGraph.INF_NODES == 36
        assert DGraph.INF_INTRA_EDGES + DGraph.INF_PILLAR_EDGES == DGraph.INF_EDGES == 180

    def test_edge_dim(self):
        """Test that the edge feature width is TMC + driving + signal summary."""
        assert DGraph.TMC_DIM + DGraph.DRV_DIM + DGraph.SIG_DIM == DGraph.EDGE_DIM == 29


class TestDDrv:
    """Test driving behavior ranges."""

    def test_every_field_has_a_range(self):
        """Test that each of the nine fields has an ordered range."""
        assert len(DDrv.FIELDS) == 9
        for name in DDrv.FIELDS:
            lo, hi = DDrv.RANGES[name]
            assert lo < hi


class TestDTrain:
    """Test training defaults."""

    def test_split_sums_to_one(self):
        """Test that the default split fractions sum to one."""
        assert sum(DTrain.SPLIT) == pytest.approx(1.0)

    def test_aggregations(self):
        """Test the 5/10/15/20 s aggregation factors and the CI multiplier."""
        assert DTrain.AGGREGATIONS == (1, 2, 3, 4)
        assert DTrain.CI_Z == 1.96

    def test_variants(self):
        """Test that every variant name is listed once."""
        assert len(set(DVariant.ALL)) == 5
        assert DVariant.GATCONV_EXT in DVariant.ALL


class TestMessages:
    """Test message templates."""

    def test_messages_have_placeholders(self):
        """Test that messages contain format placeholders."""
        assert "{factor}" in DTwinErr.REBUCKET
        assert "{epoch}" in DTwinErr.DIVERGED
        assert "{e}" in DTwinMsgText.WORKER_ERROR
        assert "{path}" in DCliMsg.MISSING_FILE

    def test_summary_format(self):
        """Test the graphs summary line."""
        line = DCliMsg.SUMMARY.format(kind="exit", nodes=33, edges=22, edge_dim=29)
        assert line == "exit graphs: nodes=33 edges=22 edge_dim=29"

    def test_cleanup_message(self):
        """Test cleanup message."""
        assert "cleanup" in DTwinMsgText.WORKER_CLEANUP.lower()
        assert "cleanup" in DTwinMsgText.CLIENT_CLEANUP.lower()


if __name__ == "__main__":
    pytest.main([__file__])
