# tests/test_twins.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""Unit tests for twin configuration and the auto-encoder model."""

from dataclasses import replace

import numpy as np
import pytest

from wave_twin.constants.DTwin import DVariant
from wave_twin.graphs.GraphBatch import GraphBatch
from wave_twin.ndiff.Tensor import no_grad, precision
from wave_twin.twins.TwinConfig import Encoder, TrainConfig, TwinConfig, TwinKind
from wave_twin.twins.TwinModel import TwinModel, make_variant
from wave_twin.utils.TwinErrors import ConfigError

from .conftest import SMALL_W


def _model(variant=DVariant.GATCONV_EXT, **overrides):
    overrides.setdefault("hidden", 8)
    return make_variant(TwinConfig.for_variant(variant, w=SMALL_W, **overrides))


class TestTwinConfig:
    def test_defaults(self):
        """The default configuration is a one-layer GAT exit twin with self-attention."""
        c = TwinConfig()
        assert c.kind == TwinKind.EXT
        assert c.encoder == Encoder.GAT
        assert c.use_self_attention
        assert c.layers == 1
        assert TrainConfig().dtype == "float32"

    @pytest.mark.parametrize("name", DVariant.ALL)
    def test_variants(self, name):
        """Every variant name yields a valid configuration tagged with that name."""
        c = TwinConfig.for_variant(name)
        assert c.variant == name
        if name == DVariant.GATCONV_INF:
            assert c.kind == TwinKind.INF and c.layers == 2
        if name == DVariant.GATCONV_ABLATED:
            assert not c.use_self_attention

    def test_unknown_variant(self):
        """An unknown variant is a configuration error naming the valid ones."""
        with pytest.raises(ConfigError, match="gatconv-ext"):
            TwinConfig.for_variant("transformer")

    def test_inflow_needs_gat(self):
        """Inflow twins cannot use the GCN or SAGE encoders."""
        with pytest.raises(ConfigError):
            TwinConfig.load({"kind": "inf", "encoder": "sage"})

    def test_layer_count_mismatch(self):
        """An explicit layer count must match the twin kind."""
        with pytest.raises(ConfigError):
            TwinConfig.load({"kind": "ext", "gat_layers": 2})
        assert TwinConfig.load({"kind": "inf", "gat_layers": 2}).layers == 2

    def test_unknown_field(self):
        """Unknown keys are rejected."""
        with pytest.raises(ConfigError):
            TwinConfig.load({"hiden": 4})

    def test_bad_dropout(self):
        """Dropout must lie in [0, 1)."""
        with pytest.raises(ConfigError):
            TwinConfig.for_variant(DVariant.GATCONV_EXT, dropout=1.0)

    def test_train_split_must_sum_to_one(self):
        """Split fractions are validated."""
        with pytest.raises(ConfigError):
            TrainConfig.load({"split": [0.5, 0.2, 0.2]})
        assert TrainConfig.load({"split": [0.6, 0.2, 0.2]}).split == (0.6, 0.2, 0.2)

    def test_train_dtype(self):
        """Training precision is float32 or float64."""
        assert TrainConfig.load({"dtype": "float64"}).dtype == "float64"
        with pytest.raises(ConfigError):
            TrainConfig.load({"dtype": "float16"})


class TestTwinModel:
    @pytest.mark.parametrize(
        "variant", [DVariant.GATCONV_EXT, DVariant.SAGECONV_EXT, DVariant.GCNCONV_EXT]
    )
    def test_exit_forward_shape(self, variant, exit_graphs):
        """A batch reconstructs one w-wide row per stacked node."""
        model = _model(variant)
        batch = GraphBatch.collate(exit_graphs[:3])
        out = model.forward(batch)
        assert out.shape == (3 * 33, SMALL_W)
        assert np.all(out.data >= 0)
        assert model.last_latents.shape == (3 * 33, 8)

    def test_inflow_forward_shape(self, inflow_graphs):
        """The inflow twin reconstructs the 36-node template."""
        model = _model(DVariant.GATCONV_INF)
        assert model.forward(inflow_graphs[0]).shape == (36, SMALL_W)
        assert len(model.encoders) == 2

    def test_kind_mismatch(self, inflow_graphs):
        """An exit twin refuses inflow graphs."""
        with pytest.raises(ConfigError):
            _model().forward(inflow_graphs[0])

    def test_window_mismatch(self, exit_graphs):
        """A twin built for another window refuses the graphs."""
        model = make_variant(TwinConfig.for_variant(DVariant.GATCONV_EXT, hidden=8))
        with pytest.raises(ConfigError):
            model.forward(exit_graphs[0])

    def test_targets_never_enter(self, exit_graphs):
        """Changing the true target rows leaves the reconstruction unchanged."""
        model = _model()
        g = exit_graphs[0]
        y = np.array(g.y)
        live_targets = g.target_mask & ~g.dummy_mask
        y[live_targets] += 7.0
        changed = replace(g, y=y)
        np.testing.assert_array_equal(model.reconstruct(g), model.reconstruct(changed))

    @pytest.mark.parametrize(
        "variant", [DVariant.GATCONV_EXT, DVariant.SAGECONV_EXT, DVariant.GCNCONV_EXT]
    )
    def test_edge_order_does_not_matter(self, variant, exit_graphs):
        """Shuffling the edge list leaves the reconstruction unchanged within 1e-6."""
        model = _model(variant)
        model.eval()
        batch = GraphBatch.collate(exit_graphs[:2])
        order = np.random.default_rng(8).permutation(len(batch.edges))
        shuffled = replace(batch, edges=batch.edges[order], edge_attr=batch.edge_attr[order])
        with no_grad():
            expected = model.forward(batch).data
            got = model.forward(shuffled).data
        np.testing.assert_allclose(got, expected, atol=1e-6)

    def test_same_seed_same_weights(self):
        """Initialization is reproducible from the configuration seed."""
        a, b = _model(seed=4), _model(seed=4)
        for name, p in a.parameters().items():
            np.testing.assert_array_equal(b.parameters()[name].data, p.data)

    def test_loss_and_gradients(self, exit_graphs):
        """The masked loss is finite and reaches every parameter."""
        model = _model()
        batch = GraphBatch.collate(exit_graphs[:2])
        loss = model.loss(model.forward(batch), batch)
        assert np.isfinite(loss.item())
        loss.backward()
        for name, p in model.parameters().items():
            assert p.grad is not None, name

    def test_impute(self, exit_graphs):
        """Imputed counts cover the physical target lanes as non-negative integers."""
        model = _model()
        g = exit_graphs[1]
        result = model.impute(g)
        physical = {g.slot_lanes[s] for s in np.flatnonzero(g.target_mask & ~g.dummy_mask)}
        assert set(result.counts) == physical
        for counts in result.counts.values():
            assert counts.dtype == np.int64
            assert np.all(counts >= 0)
        dense = result.dense_counts()
        assert dense.shape == (int(g.target_mask.sum()), SMALL_W)
        assert np.all(dense[result.dummy] == 0)

    def test_reconstruct_restores_mode(self, exit_graphs):
        """reconstruct() runs in evaluation mode and restores training mode after."""
        model = _model()
        model.train()
        model.reconstruct(exit_graphs[0])
        assert model.training

    def test_summary(self):
        """The summary reports parameter counts per component."""
        full = _model().summary()
        assert full["self_attention_params"] > 0
        assert full["edge_projection_params"] > 0
        assert full["total_params"] > full["encoder_params"]
        ablated = _model(DVariant.GATCONV_ABLATED).summary()
        assert "self_attention_params" not in ablated
        assert ablated["self_attention"] is False
        sage = _model(DVariant.SAGECONV_EXT).summary()
        assert sage["heads"] is None
        assert sage["edge_projection_params"] == 0

    def test_state_round_trip(self, exit_graphs):
        """A fresh twin loaded with another's weights reconstructs identically."""
        a, b = _model(seed=1), _model(seed=2)
        b.load_state_dict(a.state_dict())
        np.testing.assert_array_equal(
            a.reconstruct(exit_graphs[0]), b.reconstruct(exit_graphs[0])
        )

    @pytest.mark.parametrize("variant", DVariant.ALL)
    def test_float32_agrees_with_float64(self, variant, exit_graphs, inflow_graphs):
        """A float32 copy of a twin reconstructs within 1e-4 of the float64 one."""
        graph = inflow_graphs[0] if variant == DVariant.GATCONV_INF else exit_graphs[0]
        model = _model(variant)
        reference = model.reconstruct(graph)
        model.to(np.float32)
        with precision(np.float32):
            low = model.reconstruct(graph)
        assert low.dtype == np.float32
        np.testing.assert_allclose(low, reference, rtol=1e-4, atol=1e-4)
        model.to(np.float64)
        np.testing.assert_allclose(model.reconstruct(graph), reference, rtol=1e-5, atol=1e-5)

    def test_ablated_has_no_attention(self):
        """The ablated twin has no self-attention parameters at all."""
        model = _model(DVariant.GATCONV_ABLATED)
        assert model.attention is None
        assert not any(name.startswith("attention.") for name in model.parameters())
        assert isinstance(model, TwinModel)


if __name__ == "__main__":
    pytest.main([__file__])
