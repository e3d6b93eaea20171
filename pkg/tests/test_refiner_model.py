"""Model-level properties: adapter identity at init, timestep
sensitivity, permutation equivariance, flow identities, autodiff vs
finite differences."""

import numpy as np
import pytest
import torch

from splatflow.refiner.flow import euler_integrate, fm_sample_training_tuple
from splatflow.refiner.model import RefinerConfig, RefinerModel, factorized_pos_embed

torch.set_num_threads(1)

CFG = RefinerConfig(d=32, heads=2, blocks=4, ps=8, pt=4)
GRID = (2, 4, 4)
N_TOK = 32


def _model(seed=0, cfg=CFG):
    torch.manual_seed(seed)
    return RefinerModel(cfg)


def _randomized(seed=0, cfg=CFG):
    """Model with every parameter randomized (kills zero inits)."""
    model = _model(seed, cfg)
    gen = torch.Generator().manual_seed(seed + 1)
    with torch.no_grad():
        for p in model.parameters():
            p.copy_(torch.randn(p.shape, generator=gen) * 0.03)
    return model


class TestIdentities:
    def test_zero_gate_ignores_conditioning(self):
        model = _model()
        x = torch.randn(1, N_TOK, CFG.latent_channels)
        t = torch.tensor([0.4])
        out_none = model(x, t, GRID, cond=None)
        out_a = model(x, t, GRID, cond=torch.randn(1, CFG.cond_channels, *GRID))
        out_b = model(x, t, GRID, cond=torch.randn(1, CFG.cond_channels, *GRID))
        assert torch.equal(out_none, out_a)
        assert torch.equal(out_a, out_b)

    def test_gates_zeroed_after_training_restores_backbone(self):
        model = _randomized()
        with torch.no_grad():
            for blk in model.ga_blocks:
                blk.gate.zero_()
        x = torch.randn(1, N_TOK, CFG.latent_channels)
        t = torch.tensor([0.1])
        cond = torch.randn(1, CFG.cond_channels, *GRID)
        assert torch.equal(model(x, t, GRID, cond=cond), model(x, t, GRID, cond=None))

    def test_output_shape(self):
        model = _model()
        x = torch.randn(3, N_TOK, CFG.latent_channels)
        out = model(x, torch.rand(3), GRID, cond=None)
        assert out.shape == x.shape

    def test_timestep_changes_output(self):
        model = _randomized()
        x = torch.randn(1, N_TOK, CFG.latent_channels)
        y0 = model(x, torch.tensor([0.0]), GRID, cond=None)
        y1 = model(x, torch.tensor([1.0]), GRID, cond=None)
        assert (y0 - y1).abs().max() > 1e-6

    def test_nan_input_raises_with_block_index(self):
        model = _model()
        x = torch.full((1, N_TOK, CFG.latent_channels), float("nan"))
        with pytest.raises(FloatingPointError, match="block 0"):
            model(x, torch.tensor([0.5]), GRID, cond=None)

    def test_token_grid_mismatch_rejected(self):
        model = _model()
        with pytest.raises(ValueError, match="token count"):
            model(torch.randn(1, 7, CFG.latent_channels), torch.tensor([0.5]), GRID)


class TestPermutationEquivariance:
    def test_backbone_blocks_equivariant(self):
        # Spatial attention with positions folded into the tokens:
        # permuting tokens permutes outputs.
        cfg = RefinerConfig(d=16, heads=2, blocks=2, ps=8, pt=4)
        model = _randomized(3, cfg)
        x = torch.randn(1, 10, cfg.d, dtype=torch.float64)
        temb = torch.randn(1, cfg.d, dtype=torch.float64)
        model = model.double()
        perm = torch.randperm(10)
        with torch.no_grad():
            y = x
            for blk in model.dit_blocks:
                y = blk(y, temb)
            yp = x[:, perm]
            for blk in model.dit_blocks:
                yp = blk(yp, temb)
        assert (yp - y[:, perm]).abs().max() < 1e-10


class TestFlowIdentities:
    def test_tuple_relations_bitwise(self):
        rng = np.random.default_rng(0)
        x1 = rng.uniform(-1, 1, (2, 4, 4, 24)).astype(np.float32)
        for seed in range(10):
            x_t, t, v, x0 = fm_sample_training_tuple(x1, seed)
            assert 0.0 <= t <= 1.0
            np.testing.assert_array_equal(v, np.asarray(x1, np.float64) - x0)
            np.testing.assert_array_equal(v + x0, np.asarray(x1, np.float64))
            np.testing.assert_array_equal(x_t, t * np.asarray(x1, np.float64) + (1 - t) * x0)

    def test_endpoints(self):
        x1 = np.ones((1, 1, 1, 4), dtype=np.float32)
        x_t, t, v, x0 = fm_sample_training_tuple(x1, 3)
        # analytic endpoint checks of the interpolant
        np.testing.assert_array_equal(0.0 * x1 + 1.0 * x0, x0)
        np.testing.assert_array_equal(1.0 * np.asarray(x1, np.float64) + 0.0 * x0, x1)

    def test_constant_velocity_exact_single_step(self):
        v = torch.randn(1, 8, 16)
        x0 = torch.randn(1, 8, 16)
        out = euler_integrate(lambda x, t: v, x0, steps=1)
        assert torch.equal(out, x0 + v)

    @pytest.mark.parametrize("steps", [2, 3, 7, 50])
    def test_constant_velocity_any_steps(self, steps):
        # Euler is exact for constant fields; float32 summation noise only.
        v = torch.randn(1, 8, 16)
        x0 = torch.randn(1, 8, 16)
        out = euler_integrate(lambda x, t: v, x0, steps=steps)
        assert (out - (x0 + v)).abs().max() < 1e-5

    def test_zero_steps_rejected(self):
        with pytest.raises(ValueError):
            euler_integrate(lambda x, t: x, torch.zeros(1), steps=0)


class TestAutodiffVsFiniteDifferences:
    def _loss(self, model, x_t, t, cond, v):
        pred = model(x_t, t, GRID, cond=cond)
        return torch.mean((pred - v) ** 2)

    def test_probe_parameter_f64(self):
        cfg = RefinerConfig(d=16, heads=2, blocks=2, ps=8, pt=4)
        model = _randomized(5, cfg).double()
        gen = torch.Generator().manual_seed(9)
        x_t = torch.randn(1, N_TOK, cfg.latent_channels, generator=gen, dtype=torch.float64)
        v = torch.randn(1, N_TOK, cfg.latent_channels, generator=gen, dtype=torch.float64)
        cond = torch.randn(1, cfg.cond_channels, *GRID, generator=gen, dtype=torch.float64)
        t = torch.tensor([0.37], dtype=torch.float64)
        with torch.no_grad():
            model.ga_blocks[0].gate.fill_(0.5)  # exercise the GA path

        probes = [
            ("in_proj.weight", model.in_proj.weight, (0, 3)),
            ("ga gate", model.ga_blocks[0].gate, ()),
            ("out_proj.weight", model.out_proj.weight, (1, 2)),
            ("skip_gate.weight", model.skip_gate.weight, (0, 0)),
        ]
        loss = self._loss(model, x_t, t, cond, v)
        loss.backward()
        h = 1e-6
        for name, param, ix in probes:
            an = param.grad[ix].item() if ix else param.grad.item()
            with torch.no_grad():
                orig = param[ix].item() if ix else param.item()
                if ix:
                    param[ix] = orig + h
                else:
                    param.fill_(orig + h)
                lp = self._loss(model, x_t, t, cond, v).item()
                if ix:
                    param[ix] = orig - h
                else:
                    param.fill_(orig - h)
                lm = self._loss(model, x_t, t, cond, v).item()
                if ix:
                    param[ix] = orig
                else:
                    param.fill_(orig)
            fd = (lp - lm) / (2 * h)
            assert an == pytest.approx(fd, rel=1e-4, abs=1e-10), name


class TestPosEmbed:
    def test_shape_and_determinism(self):
        a = factorized_pos_embed((2, 4, 4), 32)
        b = factorized_pos_embed((2, 4, 4), 32)
        assert a.shape == (32, 32)
        assert torch.equal(a, b)

    def test_distinct_tokens_distinct_embeddings(self):
        emb = factorized_pos_embed((2, 4, 4), 32)
        assert torch.unique(emb, dim=0).shape[0] == 32
