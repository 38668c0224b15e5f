# tests/test_core.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""Unit tests for waveforms, traffic descriptors, topologies and records."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from wave_twin.constants.DTwin import DDrv
from wave_twin.core.SimRecord import SimulationRecord, read_records, write_records
from wave_twin.core.Topology import (
    SHIPPED_TOPOLOGIES,
    IntersectionTopology,
    dummy_mask,
    lane_group,
)
from wave_twin.core.Traffic import DrivingBehavior, TurningMovementCounts
from wave_twin.core.Waveform import (
    SaturationCounter,
    Waveform,
    WaveKind,
    clip_saturation,
    rebucket,
    rebucket_array,
)
from wave_twin.graphs.GraphTemplate import TemplateKind
from wave_twin.signal.SignalPlan import sample_plan
from wave_twin.signal.SignalSeries import render_series
from wave_twin.utils.TwinErrors import (
    CapacityError,
    ConfigError,
    InvalidArgumentError,
    MappingError,
    ShapeError,
)

counts = st.lists(st.integers(min_value=0, max_value=8), min_size=1, max_size=12)


class TestWaveform:
    """Test cases for Waveform and rebucketing."""

    def test_negative_count_rejected(self):
        """Test that negative counts are rejected."""
        with pytest.raises(InvalidArgumentError):
            Waveform("EB_T0", WaveKind.STOPBAR, (1, -1, 0))

    def test_count_above_cap_rejected(self):
        """Test that a 5 s bucket cannot exceed the saturation cap."""
        with pytest.raises(InvalidArgumentError):
            Waveform("EB_T0", WaveKind.STOPBAR, (9,))

    def test_coarse_cap_scales(self):
        """Test that a 10 s bucket may hold up to 16 vehicles."""
        wf = Waveform("EB_T0", WaveKind.STOPBAR, (16,), bucket_seconds=10)
        assert wf.total() == 16

    def test_zeros(self):
        """Test the all-zero factory."""
        wf = Waveform.zeros("OUT_E0", WaveKind.EXIT, w=6)
        assert wf.w == 6
        assert wf.total() == 0

    def test_check_window(self):
        """Test that a wrong window length is reported."""
        with pytest.raises(InvalidArgumentError):
            Waveform.zeros("OUT_E0", WaveKind.EXIT, w=6).check_window(80)

    def test_rebucket_sums_groups(self):
        """Test that output bucket i sums input buckets [i*f, (i+1)*f)."""
        wf = Waveform("EB_T0", WaveKind.STOPBAR, (1, 2, 3, 4, 0, 8))
        out = rebucket(wf, 2)

        assert out.buckets == (3, 7, 8)
        assert out.bucket_seconds == 10
        assert out.lane_id == "EB_T0"

    @given(counts, st.integers(min_value=1, max_value=4))
    def test_rebucket_conserves_total(self, values, factor):
        """Test that rebucketing preserves the total count."""
        usable = (len(values) // factor) * factor
        if usable == 0:
            return
        wf = Waveform("EB_T0", WaveKind.STOPBAR, tuple(values[:usable]))
        assert rebucket(wf, factor).total() == wf.total()

    def test_rebucket_rejects_non_divisor(self):
        """Test that a factor not dividing w is rejected."""
        with pytest.raises(InvalidArgumentError):
            rebucket_array(np.zeros(80), 3)

    def test_rebucket_array_axis(self):
        """Test rebucketing along the first axis of a float array."""
        values = np.arange(12, dtype=np.float64).reshape(4, 3)
        out = rebucket_array(values, 2, axis=0)
        np.testing.assert_allclose(out, [[3, 5, 7], [15, 17, 19]])


class TestSaturation:
    """Test cases for saturation clipping."""

    def test_clip_and_count(self):
        """Test that counts above the cap are clipped and counted."""
        counter = SaturationCounter()
        out = clip_saturation([3, 9, 12, 8], counter=counter)

        assert out.tolist() == [3, 8, 8, 8]
        assert counter.events == 2
        assert counter.excess == 5

    def test_negative_rejected(self):
        """Test that clipping refuses negative counts."""
        with pytest.raises(InvalidArgumentError):
            clip_saturation([1, -2])


class TestTurningMovementCounts:
    """Test cases for turning movement counts."""

    def test_rows_must_sum_to_one(self):
        """Test that a partial row is rejected."""
        with pytest.raises(InvalidArgumentError):
            TurningMovementCounts.from_list([[0.5, 0.2, 0.2], [0, 0, 0], [0, 1, 0], [0, 1, 0]])

    def test_zero_row_marks_absent(self):
        """Test that an all-zero row marks an absent approach."""
        tmc = TurningMovementCounts.from_rows({"EB": (0.2, 0.7, 0.1), "WB": (0, 1, 0)})
        assert tmc.absent == (True, True, False, False)

    def test_wrong_shape(self):
        """Test that anything but 4 x 3 is a shape error."""
        with pytest.raises(ShapeError):
            TurningMovementCounts.from_list([[1, 0, 0]])

    def test_rotated(self):
        """Test that rotation brings the given approach to the first row."""
        tmc = TurningMovementCounts.from_rows({"EB": (0.2, 0.7, 0.1)})
        np.testing.assert_allclose(tmc.rotated("EB")[0], [0.2, 0.7, 0.1])

    @given(st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=12, max_size=12))
    def test_normalized_rows(self, weights):
        """Test that normalized rows sum to one or stay all zero."""
        out = TurningMovementCounts.normalized(np.array(weights).reshape(4, 3))
        for row, raw in zip(out, np.array(weights).reshape(4, 3)):
            if raw.sum() > 0:
                assert row.sum() == pytest.approx(1.0)
            else:
                assert row.sum() == 0.0


class TestDrivingBehavior:
    """Test cases for driving behavior."""

    def test_midpoint_in_range(self):
        """Test that the midpoint lies inside every range."""
        drv = DrivingBehavior.midpoint()
        for name, value in drv.to_dict().items():
            lo, hi = DDrv.RANGES[name]
            assert lo <= value <= hi

    def test_out_of_range_rejected(self):
        """Test that a field outside its range is rejected."""
        values = DrivingBehavior.midpoint().to_dict()
        values["tau"] = 5.0
        with pytest.raises(InvalidArgumentError):
            DrivingBehavior.from_dict(values)

    def test_bounds_accepted(self):
        """Test that range bounds are inclusive."""
        drv = DrivingBehavior.from_vector([DDrv.RANGES[n][0] for n in DDrv.FIELDS])
        assert drv.accel == DDrv.RANGES["accel"][0]

    @pytest.mark.parametrize("name", DDrv.FIELDS)
    def test_every_field_validated(self, name):
        """Test that each field accepts both bounds and rejects values past them."""
        lo, hi = DDrv.RANGES[name]
        values = DrivingBehavior.midpoint().to_dict()
        for bound in (lo, hi):
            assert getattr(DrivingBehavior(**{**values, name: bound}), name) == bound
        with pytest.raises(InvalidArgumentError, match=name):
            DrivingBehavior(**{**values, name: hi + 0.5})
        with pytest.raises(InvalidArgumentError):
            DrivingBehavior(**{**values, name: lo - 0.05})

    def test_unknown_field_rejected(self):
        """Test that extra fields and missing fields are rejected."""
        values = DrivingBehavior.midpoint().to_dict()
        with pytest.raises(InvalidArgumentError):
            DrivingBehavior(**values, speed_factor=1.2)
        values.pop("tau")
        with pytest.raises(InvalidArgumentError):
            DrivingBehavior(**values)

    def test_frozen(self):
        """Test that behavior cannot be changed after construction."""
        drv = DrivingBehavior.midpoint()
        with pytest.raises(ValidationError):
            drv.tau = 1.0  # type: ignore[misc]

    def test_sample_is_seeded(self):
        """Test that equal seeds give equal behavior."""
        a = DrivingBehavior.sample(np.random.default_rng(5))
        b = DrivingBehavior.sample(np.random.default_rng(5))
        assert a == b
        assert a.vector().shape == (9,)

    def test_vector_length_checked(self):
        """Test that from_vector() needs nine values."""
        with pytest.raises(ShapeError):
            DrivingBehavior.from_vector([1.0, 2.0])


class TestTopology:
    """Test cases for intersection topologies and slot maps."""

    @pytest.mark.parametrize("name", SHIPPED_TOPOLOGIES)
    def test_shipped_topologies_map(self, name):
        """Test that every shipped topology maps onto both templates."""
        topology = IntersectionTopology.shipped(name)
        exit_map = topology.slot_map(TemplateKind.EXIT)
        inflow_map = topology.slot_map(TemplateKind.INFLOW)

        assert len(set(exit_map.values())) == len(exit_map)
        assert len(exit_map) == len(topology.incoming) + len(topology.outgoing)
        assert len(inflow_map) == len(topology.incoming) + len(topology.inflow)

    def test_full_topology_fills_exit_template(self):
        """Test that the full topology leaves no dummy exit slot."""
        topology = IntersectionTopology.shipped("full")
        assert not dummy_mask(topology, TemplateKind.EXIT).any()

    def test_t_intersection_slots(self):
        """Test lane ids, slots and dummies of the T intersection."""
        topology = IntersectionTopology.shipped("t_intersection")
        mapping = topology.slot_map("exit")

        assert topology.approaches == ("NB", "EB", "WB")
        assert mapping["EB_T0"] == 12
        assert mapping["OUT_E0"] == 27
        assert int(dummy_mask(topology, "exit").sum()) == 33 - 18
        assert topology.exit_lane_of()["EB_T0"] == "OUT_E0"

    def test_missing_approach_has_no_rate(self):
        """Test that an absent approach has base rate zero."""
        topology = IntersectionTopology.shipped("t_intersection")
        assert topology.base_rate("SB") == 0.0
        assert topology.base_rate("EB") > 0.0

    def test_field_tmc_respects_lanes(self):
        """Test that field ratios are zero for movements without lanes."""
        tmc = IntersectionTopology.shipped("t_intersection").field_tmc()
        assert tmc.row("EB")[0] == 0.0
        assert tmc.row("EB").sum() == pytest.approx(1.0)
        assert tmc.row("SB").sum() == 0.0

    def test_capacity_error(self):
        """Test that too many lanes for the template is a capacity error."""
        topology = IntersectionTopology.from_doc(
            {
                "intersection_id": "wide",
                "approaches": {"EB": {"left": 3, "through": 1}},
                "outgoing": {"N": [0, 1, 2], "E": [0]},
            }
        )
        with pytest.raises(CapacityError) as info:
            topology.slot_map("exit")
        assert info.value.approach == "EB"

    def test_missing_exit_lane_is_mapping_error(self):
        """Test that an edge into a missing outgoing lane is a mapping error."""
        topology = IntersectionTopology.from_doc(
            {"intersection_id": "dead_end", "approaches": {"EB": {"through": 1}}}
        )
        with pytest.raises(MappingError) as info:
            topology.slot_map("exit")
        assert info.value.lane_id == "EB_T0"

    def test_invalid_document(self):
        """Test that schema violations are configuration errors."""
        with pytest.raises(ConfigError):
            IntersectionTopology.from_doc({"intersection_id": "x", "approaches": {"XB": {}}})

    def test_doc_round_trip(self):
        """Test that the JSON form rebuilds the same layout."""
        topology = IntersectionTopology.shipped("asymmetric")
        back = IntersectionTopology.from_json(topology.to_json())
        assert back.slot_map("inflow") == topology.slot_map("inflow")

    def test_resolve_missing_file(self, tmp_path):
        """Test that an unknown reference raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            IntersectionTopology.resolve(str(tmp_path / "nope.json"))

    def test_lane_group(self):
        """Test lane group tags of template slots."""
        assert lane_group("exit", 12) == "LG-EB"
        assert lane_group("exit", 27) == "LG-OUT-E"


def _record(w=8):
    topology = IntersectionTopology.shipped("t_intersection")
    plan = sample_plan(3)
    stp = {
        ln.lane_id: Waveform(ln.lane_id, WaveKind.STOPBAR, (1,) * w) for ln in topology.incoming
    }
    ext = {ln.lane_id: Waveform.zeros(ln.lane_id, WaveKind.EXIT, w) for ln in topology.outgoing}
    inf = {ln.lane_id: Waveform.zeros(ln.lane_id, WaveKind.INFLOW, w) for ln in topology.inflow}
    return topology, SimulationRecord(
        intersection_id=topology.intersection_id,
        plan=plan,
        sig=render_series(plan, w),
        tmc=topology.field_tmc(),
        drv=DrivingBehavior.midpoint(),
        stp=stp,
        ext=ext,
        inf=inf,
        meta={"seed": 3, "warnings": []},
    )


class TestSimulationRecord:
    """Test cases for SimulationRecord."""

    def test_check_topology(self):
        """Test that a complete record matches its topology."""
        topology, record = _record()
        record.check_topology(topology)
        assert record.w == 8

    def test_missing_lane(self):
        """Test that a record without a declared lane fails the check."""
        topology, record = _record()
        stp = dict(record.stp)
        stp.pop("EB_T0")
        short = SimulationRecord(
            record.intersection_id,
            record.plan,
            record.sig,
            record.tmc,
            record.drv,
            stp,
            record.ext,
            record.inf,
        )
        with pytest.raises(MappingError):
            short.check_topology(topology)

    def test_mixed_windows_rejected(self):
        """Test that waveforms of different length are rejected."""
        _, record = _record()
        stp = dict(record.stp)
        stp["EB_T0"] = Waveform.zeros("EB_T0", WaveKind.STOPBAR, 9)
        with pytest.raises(InvalidArgumentError):
            SimulationRecord(
                record.intersection_id,
                record.plan,
                record.sig,
                record.tmc,
                record.drv,
                stp,
                record.ext,
                record.inf,
            )

    def test_jsonl_file(self, tmp_path):
        """Test writing and reading a JSON Lines file."""
        _, record = _record()
        path = tmp_path / "records.jsonl"

        assert write_records([record, record], path) == 2
        back = list(read_records(path))

        assert len(back) == 2
        assert back[0].stp["EB_T0"] == record.stp["EB_T0"]
        assert back[0].sig == record.sig
        assert back[0].plan == record.plan
        assert len(list(read_records(path, limit=1))) == 1

    def test_missing_keys(self):
        """Test that a record lacking a key is rejected."""
        _, record = _record()
        data = record.to_dict()
        del data["drv"]
        with pytest.raises(InvalidArgumentError):
            SimulationRecord.from_dict(data)


if __name__ == "__main__":
    pytest.main([__file__])
