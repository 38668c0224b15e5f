# tests/test_ndiff.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""Unit tests for the autodiff engine, Adam and checkpoints."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wave_twin.harness.GradSuite import PRIMITIVES, run_gradcheck
from wave_twin.ndiff import Ops
from wave_twin.ndiff.Adam import Adam, AdamState, adam_step
from wave_twin.ndiff.Checkpoint import load_checkpoint, save_checkpoint
from wave_twin.ndiff.GradCheck import check_gradients, relative_error
from wave_twin.ndiff.Tensor import Tape, Tensor, make, no_grad, precision
from wave_twin.utils.TwinErrors import (
    ConfigError,
    DivergenceError,
    InvalidArgumentError,
    ShapeError,
)

small = arrays(
    np.float64, (3, 4), elements=st.floats(min_value=-10, max_value=10, allow_nan=False)
)


class TestTensor:
    """Test cases for Tensor and the tape."""

    def test_broadcast_add_gradients(self):
        """Test that a broadcast operand receives the summed gradient."""
        a = Tensor(np.ones((3, 4)), requires_grad=True)
        b = Tensor(np.zeros(4), requires_grad=True)
        (a + b).sum().backward()

        np.testing.assert_array_equal(a.grad, np.ones((3, 4)))
        np.testing.assert_array_equal(b.grad, np.full(4, 3.0))

    @settings(max_examples=25)
    @given(small, small)
    def test_product_gradient(self, x, y):
        """Test that d/dx sum(x * y) is y."""
        a = Tensor(x, requires_grad=True)
        (a * Tensor(y)).sum().backward()
        np.testing.assert_allclose(a.grad, y)

    def test_matmul_gradients(self):
        """Test the matrix product rule."""
        a = Tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
        b = Tensor(np.arange(12.0).reshape(3, 4), requires_grad=True)
        (a @ b).sum().backward()

        np.testing.assert_allclose(a.grad, np.ones((2, 4)) @ b.data.T)
        np.testing.assert_allclose(b.grad, a.data.T @ np.ones((2, 4)))

    def test_gradients_accumulate(self):
        """Test that leaf gradients add up until zero_grad()."""
        a = Tensor(np.ones(3), requires_grad=True)
        (a * 2.0).sum().backward()
        (a * 3.0).sum().backward()
        np.testing.assert_array_equal(a.grad, np.full(3, 5.0))
        a.zero_grad()
        assert a.grad is None

    def test_shared_subexpression(self):
        """Test that a tensor used twice gets both contributions."""
        a = Tensor(np.array([2.0]), requires_grad=True)
        (a * a).sum().backward()
        np.testing.assert_allclose(a.grad, [4.0])

    def test_backward_needs_scalar(self):
        """Test that backward() on a vector is rejected."""
        with pytest.raises(InvalidArgumentError):
            Tensor(np.ones(3), requires_grad=True).backward()

    def test_no_grad_records_nothing(self):
        """Test that no operation is recorded under no_grad()."""
        a = Tensor(np.ones(3), requires_grad=True)
        with no_grad():
            out = a * 2.0
        assert out.node is None
        assert not out.requires_grad

    def test_precision_block(self):
        """Test that tensors and leaf gradients follow the precision block."""
        with precision(np.float32):
            a = Tensor(np.ones(3), requires_grad=True)
            loss = (a * np.arange(3.0)).sum()
            loss.backward()
        assert a.data.dtype == np.float32
        assert loss.data.dtype == np.float32
        assert a.grad.dtype == np.float32
        np.testing.assert_array_equal(a.grad, [0.0, 1.0, 2.0])
        assert Tensor(np.ones(3, dtype=np.float32)).data.dtype == np.float64

    def test_tape_order(self):
        """Test that the tape lists operations from the leaves to the loss."""
        a = Tensor(np.ones((2, 2)), requires_grad=True)
        loss = Ops.relu(a @ a).sum()
        assert Tape.collect(loss).ops() == ["matmul", "relu", "sum"]

    def test_shape_mismatch(self):
        """Test that non-broadcastable operands are a shape error."""
        with pytest.raises(ShapeError):
            Tensor(np.ones((3, 4))) + Tensor(np.ones(3))
        with pytest.raises(ShapeError):
            Tensor(np.ones((3, 4))) @ Tensor(np.ones((3, 4)))


class TestOps:
    """Test cases for the primitives."""

    def test_masked_softmax(self):
        """Test that masked entries get zero probability."""
        mask = np.array([[True, False, True]])
        s = Ops.softmax(Tensor([[1.0, 5.0, 1.0]]), mask=mask)
        np.testing.assert_allclose(s.data, [[0.5, 0.0, 0.5]])

    def test_fully_masked_row(self):
        """Test that a row with nothing allowed is rejected."""
        with pytest.raises(InvalidArgumentError):
            Ops.softmax(Tensor(np.ones((2, 3))), mask=np.zeros(3, dtype=bool))

    def test_segment_softmax_sums_to_one(self):
        """Test that each segment's weights sum to one."""
        seg = np.array([0, 0, 2, 2, 2])
        s = Ops.segment_softmax(Tensor(np.random.default_rng(0).normal(size=(5, 2))), seg, 3)
        sums = Ops.segment_sum_array(s.data, seg, 3)
        np.testing.assert_allclose(sums[[0, 2]], 1.0)
        np.testing.assert_array_equal(sums[1], 0.0)

    def test_gather_scatter(self):
        """Test that gathered rows scatter back by index."""
        x = Tensor(np.arange(6.0).reshape(3, 2))
        out = Ops.scatter_add(Ops.gather(x, np.array([0, 2, 2])), np.array([1, 1, 0]), 2)
        np.testing.assert_allclose(out.data, [[4.0, 5.0], [4.0, 6.0]])

    def test_gather_out_of_range(self):
        """Test that a bad index is a shape error."""
        with pytest.raises(ShapeError):
            Ops.gather(Tensor(np.ones((2, 2))), np.array([2]))

    def test_masked_mse(self):
        """Test that masked-out entries neither count nor receive gradient."""
        pred = Tensor(np.array([[1.0, 10.0]]), requires_grad=True)
        loss = Ops.mse(pred, np.zeros((1, 2)), np.array([[True, False]]))
        loss.backward()

        assert loss.item() == pytest.approx(1.0)
        np.testing.assert_allclose(pred.grad, [[2.0, 0.0]])

    def test_empty_mask(self):
        """Test that an empty loss mask is rejected."""
        with pytest.raises(InvalidArgumentError):
            Ops.mse(Tensor(np.ones(2)), np.ones(2), np.zeros(2, dtype=bool))

    def test_dropout(self):
        """Test that dropout is the identity outside training and rescales inside."""
        x = Tensor(np.ones((50, 50)))
        assert Ops.dropout(x, 0.5, train=False) is x
        out = Ops.dropout(x, 0.5, train=True, rng=np.random.default_rng(0))
        assert set(np.unique(out.data)) <= {0.0, 2.0}
        with pytest.raises(InvalidArgumentError):
            Ops.dropout(x, 1.0, train=True)

    def test_concat_split_gradient(self):
        """Test that concat routes gradients back to each part."""
        a = Tensor(np.ones((2, 1)), requires_grad=True)
        b = Tensor(np.ones((2, 2)), requires_grad=True)
        Ops.mul(Ops.concat([a, b], axis=1), np.array([1.0, 2.0, 3.0])).sum().backward()
        np.testing.assert_allclose(a.grad, [[1.0], [1.0]])
        np.testing.assert_allclose(b.grad, [[2.0, 3.0], [2.0, 3.0]])


class TestGradCheck:
    """Test cases for finite-difference checking."""

    def test_primitives_pass(self):
        """Test that every primitive matches central differences."""
        results = run_gradcheck(seed=0, names=list(PRIMITIVES))
        assert [r.name for r in results] == list(PRIMITIVES)
        for r in results:
            assert r.ok, (r.name, r.max_rel_err)

    def test_wrong_rule_fails(self):
        """Test that a deliberately wrong gradient is caught."""
        x = Tensor(np.array([1.0, 2.0]), requires_grad=True)

        def loss():
            return Ops.sum(_bad_square(x))

        assert not check_gradients("bad", loss, {"x": x}).ok

    def test_wrong_rule_fails_at_small_scale(self):
        """Test that a wrong gradient is caught when every gradient is tiny."""
        x = Tensor(np.array([1e-5, 2e-5]), requires_grad=True)

        def loss():
            return Ops.sum(_bad_square(x))

        result = check_gradients("bad_small", loss, {"x": x})
        assert not result.ok
        assert result.max_rel_err > 0.3

    def test_relative_error_is_scale_free(self):
        """Test that the same relative error scores alike at any magnitude."""
        big = relative_error(np.array([2.0]), np.array([3.0]))
        small = relative_error(np.array([2e-5]), np.array([3e-5]))
        assert big == pytest.approx(1 / 3)
        assert small == pytest.approx(1 / 3, rel=1e-2)

    def test_round_off_within_atol(self):
        """Test that differences below the absolute floor count as exact."""
        assert relative_error(np.array([0.0, 1e-9]), np.array([1e-10, 2e-9])) == 0.0

    def test_unknown_case(self):
        """Test that an unknown case name is rejected."""
        with pytest.raises(InvalidArgumentError):
            run_gradcheck(names=["nope"])


def _bad_square(x):
    # d/dx of x * x recorded as 3x
    return make(x.data * x.data, "bad_square", (x,), lambda g: (3.0 * g * x.data,))


class TestAdam:
    """Test cases for the optimizer."""

    def test_first_step_moves_by_lr(self):
        """Test that the first bias-corrected step is lr * sign(g)."""
        p = {"w": np.array([1.0, -1.0, 0.5])}
        g = {"w": np.array([0.3, -2.0, 4.0])}
        out = adam_step(p, g, AdamState(lr=0.1))
        np.testing.assert_allclose(out["w"], p["w"] - 0.1 * np.sign(g["w"]), atol=1e-6)

    def test_missing_gradient_is_zero(self):
        """Test that a parameter without gradient does not move."""
        out = adam_step({"w": np.ones(2)}, {"w": None}, AdamState())
        np.testing.assert_array_equal(out["w"], np.ones(2))

    def test_nan_gradient(self):
        """Test that a NaN gradient names the parameter."""
        with pytest.raises(DivergenceError) as info:
            adam_step({"w": np.ones(2)}, {"w": np.array([np.nan, 0.0])}, AdamState())
        assert info.value.name == "w"

    def test_optimizer_updates_tensors(self):
        """Test that Adam.step() writes new values into the tensors."""
        w = Tensor(np.array([1.0]), requires_grad=True)
        opt = Adam({"w": w}, AdamState(lr=0.5))
        (w * w).sum().backward()
        opt.step()
        opt.zero_grad()

        assert w.data[0] == pytest.approx(0.5)
        assert w.grad is None
        assert opt.state.t == 1


class TestCheckpoint:
    """Test cases for checkpoint files."""

    def test_save_and_load(self, tmp_path):
        """Test that arrays and header survive a checkpoint file bit for bit."""
        params = {"b": np.array([0.1, -2.5]), "a.w": np.arange(6.0).reshape(2, 3) / 7.0}
        path = tmp_path / "model.bin"
        save_checkpoint(path, params, {"steps": 12})
        back, header = load_checkpoint(path)

        assert header["steps"] == 12
        assert sorted(back) == ["a.w", "b"]
        for k in params:
            np.testing.assert_array_equal(back[k], params[k])

    def test_not_a_checkpoint(self, tmp_path):
        """Test that a foreign file is rejected."""
        path = tmp_path / "junk.bin"
        path.write_bytes(b"hello world, not a checkpoint")
        with pytest.raises(ConfigError):
            load_checkpoint(path)

    def test_truncated(self, tmp_path):
        """Test that a truncated body is rejected."""
        path = tmp_path / "model.bin"
        save_checkpoint(path, {"w": np.ones(10)}, {})
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ConfigError):
            load_checkpoint(path)


if __name__ == "__main__":
    pytest.main([__file__])
