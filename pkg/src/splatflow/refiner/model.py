"""Toy flow transformer with interleaved geometry-adapter blocks.

A small DiT-style backbone predicts flow velocities on video latent
tokens.  After every second backbone block a geometry adapter (GA)
block injects buffer-conditioned features:

    z   = conv3d projection of the concatenated buffer latent (shared)
    zt  = SelfAttn(LayerNorm(z))
    x_g = FFN(CrossAttn(zt, context tokens))
    x  <- x + gate * x_g          (gate is a scalar, initialized to 0)

Zero gates make a fresh model bitwise independent of the conditioning,
so finetuning can start from an exact backbone identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import torch
import torch.nn as nn


@dataclass
class RefinerConfig:
    d: int = 128
    heads: int = 4
    blocks: int = 6
    ps: int = 8
    pt: int = 4
    in_channels: int = 3
    n_context: int = 8
    mlp_ratio: int = 4
    # Depth normalization range baked in at training time.
    norm_near: float = 0.2
    norm_far: float = 30.0
    # Latent grid the model was trained on (validated at inference).
    grid: tuple[int, int, int] | None = None

    def __post_init__(self):
        if self.d % 2 or self.d % self.heads:
            raise ValueError("d must be even and divisible by heads")
        if self.blocks < 2:
            raise ValueError("need at least 2 backbone blocks")

    @property
    def latent_channels(self) -> int:
        return self.in_channels * self.ps * self.ps * self.pt

    @property
    def cond_channels(self) -> int:
        return 5 * 3 * self.ps * self.ps * self.pt

    @property
    def n_ga(self) -> int:
        return self.blocks // 2


def sinusoidal(values: torch.Tensor, dim: int) -> torch.Tensor:
    """(N,) -> (N, dim) sin/cos features, dim even."""
    half = dim // 2
    dtype = values.dtype if values.is_floating_point() else torch.float32
    freqs = torch.exp(-math.log(10000.0) * torch.arange(half, dtype=dtype, device=values.device) / half)
    args = values.to(dtype)[:, None] * freqs[None, :]
    return torch.cat([torch.sin(args), torch.cos(args)], dim=-1)


def factorized_pos_embed(grid: tuple[int, int, int], d: int, device=None) -> torch.Tensor:
    """Per-token positional features over (t, y, x) coordinates: (N, d)."""
    tt, hh, ww = grid
    d_xy = 2 * (d // 6)
    d_t = d - 2 * d_xy
    ts, ys, xs = torch.meshgrid(
        torch.arange(tt, dtype=torch.float32, device=device),
        torch.arange(hh, dtype=torch.float32, device=device),
        torch.arange(ww, dtype=torch.float32, device=device),
        indexing="ij",
    )
    emb = torch.cat(
        [
            sinusoidal(ts.reshape(-1), d_t),
            sinusoidal(ys.reshape(-1), d_xy),
            sinusoidal(xs.reshape(-1), d_xy),
        ],
        dim=-1,
    )
    return emb  # (tt*hh*ww, d)


class DiTBlock(nn.Module):
    """Pre-norm self-attention + MLP with timestep modulation (adaLN)."""

    def __init__(self, d: int, heads: int, mlp_ratio: int):
        super().__init__()
        self.norm1 = nn.LayerNorm(d, elementwise_affine=False)
        self.attn = nn.MultiheadAttention(d, heads, batch_first=True)
        self.norm2 = nn.LayerNorm(d, elementwise_affine=False)
        self.mlp = nn.Sequential(
            nn.Linear(d, mlp_ratio * d), nn.GELU(), nn.Linear(mlp_ratio * d, d)
        )
        self.ada = nn.Linear(d, 6 * d)
        nn.init.zeros_(self.ada.weight)
        nn.init.zeros_(self.ada.bias)

    def forward(self, x: torch.Tensor, temb: torch.Tensor) -> torch.Tensor:
        sh1, sc1, g1, sh2, sc2, g2 = self.ada(temb)[:, None, :].chunk(6, dim=-1)
        h = self.norm1(x) * (1 + sc1) + sh1
        x = x + g1 * self.attn(h, h, h, need_weights=False)[0]
        h = self.norm2(x) * (1 + sc2) + sh2
        x = x + g2 * self.mlp(h)
        return x


class GABlock(nn.Module):
    """Geometry adapter: buffer tokens modulate the latent stream."""

    def __init__(self, d: int, heads: int, mlp_ratio: int):
        super().__init__()
        self.norm_z = nn.LayerNorm(d)
        self.self_attn = nn.MultiheadAttention(d, heads, batch_first=True)
        self.norm_q = nn.LayerNorm(d)
        self.cross_attn = nn.MultiheadAttention(d, heads, batch_first=True)
        self.norm_f = nn.LayerNorm(d)
        self.ffn = nn.Sequential(
            nn.Linear(d, mlp_ratio * d), nn.GELU(), nn.Linear(mlp_ratio * d, d)
        )
        self.gate = nn.Parameter(torch.zeros(()))

    def forward(self, x: torch.Tensor, z: torch.Tensor, context: torch.Tensor) -> torch.Tensor:
        zt = self.self_attn(self.norm_z(z), self.norm_z(z), self.norm_z(z), need_weights=False)[0]
        q = self.norm_q(zt)
        x_g = self.cross_attn(q, context, context, need_weights=False)[0]
        x_g = self.ffn(self.norm_f(x_g))
        return x + self.gate * x_g


class RefinerModel(nn.Module):
    def __init__(self, cfg: RefinerConfig):
        super().__init__()
        self.cfg = cfg
        d = cfg.d
        self.in_proj = nn.Linear(cfg.latent_channels, d)
        self.t_mlp = nn.Sequential(nn.Linear(d, d), nn.SiLU(), nn.Linear(d, d))
        self.cond_proj = nn.Sequential(
            nn.Conv3d(cfg.cond_channels, d, kernel_size=1),
            nn.GELU(),
            nn.Conv3d(d, d, kernel_size=3, padding=1),
        )
        self.context = nn.Parameter(torch.randn(cfg.n_context, d) * 0.02)
        self.dit_blocks = nn.ModuleList(
            DiTBlock(d, cfg.heads, cfg.mlp_ratio) for _ in range(cfg.blocks)
        )
        self.ga_blocks = nn.ModuleList(
            GABlock(d, cfg.heads, cfg.mlp_ratio) for _ in range(cfg.n_ga)
        )
        self.norm_out = nn.LayerNorm(d, elementwise_affine=False)
        self.ada_out = nn.Linear(d, 2 * d)
        nn.init.zeros_(self.ada_out.weight)
        nn.init.zeros_(self.ada_out.bias)
        self.out_proj = nn.Linear(d, cfg.latent_channels)
        # Timestep-gated skip from the input tokens to the velocity.  The
        # straight-line field is affine in x_t (v = (x1 - x_t)/(1 - t)),
        # which a narrow backbone cannot express through in_proj alone;
        # the gate starts at zero so the init behavior is unchanged.
        self.skip_gate = nn.Linear(d, cfg.latent_channels)
        nn.init.zeros_(self.skip_gate.weight)
        nn.init.zeros_(self.skip_gate.bias)

    def ga_parameters(self):
        """Parameters trained during adapter-only finetuning."""
        for p in self.ga_blocks.parameters():
            yield p
        for p in self.cond_proj.parameters():
            yield p
        yield self.context

    def backbone_parameters(self):
        ga_ids = {id(p) for p in self.ga_parameters()}
        for p in self.parameters():
            if id(p) not in ga_ids:
                yield p

    def forward(
        self,
        tokens: torch.Tensor,                 # (B, N, C_lat)
        t: torch.Tensor,                      # (B,)
        grid: tuple[int, int, int],
        cond: torch.Tensor | None = None,     # (B, 5*3*ps*ps*pt, T', H', W')
        drop_context: bool = False,
    ) -> torch.Tensor:
        cfg = self.cfg
        b, n, _ = tokens.shape
        if n != grid[0] * grid[1] * grid[2]:
            raise ValueError(f"token count {n} != grid {grid}")
        pos = factorized_pos_embed(grid, cfg.d, device=tokens.device).to(tokens.dtype)
        x = self.in_proj(tokens) + pos[None]
        temb = self.t_mlp(sinusoidal(t, cfg.d))

        z = None
        if cond is not None and len(self.ga_blocks) > 0:
            zg = self.cond_proj(cond)                       # (B, d, T', H', W')
            z = zg.flatten(2).transpose(1, 2) + pos[None]   # (B, N, d)
        context = torch.zeros_like(self.context) if drop_context else self.context
        context = context[None].expand(b, -1, -1)

        ga_i = 0
        for i, block in enumerate(self.dit_blocks):
            x = block(x, temb)
            if not torch.isfinite(x).all():
                raise FloatingPointError(f"non-finite activations after backbone block {i}")
            if (i + 1) % 2 == 0 and ga_i < len(self.ga_blocks):
                if z is not None:
                    x = self.ga_blocks[ga_i](x, z, context)
                    if not torch.isfinite(x).all():
                        raise FloatingPointError(f"non-finite activations after GA block {ga_i}")
                ga_i += 1

        sh, sc = self.ada_out(temb)[:, None, :].chunk(2, dim=-1)
        out = self.out_proj(self.norm_out(x) * (1 + sc) + sh)
        return out + self.skip_gate(temb)[:, None, :] * tokens
