"""Patchify encoder: exact round trips and buffer-latent assembly."""

import numpy as np
import pytest

from splatflow.core.types import VideoTensor
from splatflow.raster.render import GPVideo
from splatflow.refiner.patchify import decode, encode, encode_gpbuffer, normalize_modality


def _gp_video(rng, t=8, h=32, w=32):
    return GPVideo(
        color=VideoTensor(rng.uniform(0, 1, (t, h, w, 3)).astype(np.float32)),
        alpha=VideoTensor(rng.uniform(0, 1, (t, h, w, 1)).astype(np.float32)),
        depth=VideoTensor(rng.uniform(0.2, 30, (t, h, w, 1)).astype(np.float32)),
        normal=VideoTensor(rng.uniform(-1, 1, (t, h, w, 3)).astype(np.float32)),
        uncertainty=VideoTensor(rng.uniform(0, 8, (t, h, w, 3)).astype(np.float32)),
    )


class TestRoundTrip:
    @pytest.mark.parametrize("shape", [(4, 8, 8, 3), (8, 32, 32, 3), (4, 16, 24, 1), (12, 8, 16, 5)])
    def test_bitwise(self, shape):
        rng = np.random.default_rng(0)
        video = VideoTensor(rng.normal(0, 5, shape).astype(np.float32))
        lat = encode(video, ps=8, pt=4)
        back = decode(lat, channels=shape[3])
        np.testing.assert_array_equal(back.frames, video.frames)

    def test_token_count(self):
        video = VideoTensor(np.zeros((8, 32, 48, 3), dtype=np.float32))
        lat = encode(video, ps=8, pt=4)
        assert lat.grid == (2, 4, 6)
        assert lat.channels == 4 * 8 * 8 * 3

    def test_constant_video_constant_tokens(self):
        video = VideoTensor(np.full((4, 16, 16, 3), 0.25, dtype=np.float32))
        lat = encode(video, ps=8, pt=4)
        assert np.unique(lat.tokens).tolist() == [np.float32(0.25)]

    def test_nondivisible_rejected(self):
        with pytest.raises(ValueError, match="divisible"):
            encode(VideoTensor(np.zeros((5, 32, 32, 3), dtype=np.float32)), ps=8, pt=4)
        with pytest.raises(ValueError, match="divisible"):
            encode(VideoTensor(np.zeros((4, 30, 32, 3), dtype=np.float32)), ps=8, pt=4)


class TestNormalization:
    def test_depth_endpoints(self):
        near, far = 0.5, 12.0
        lo = normalize_modality("depth", np.array([near]), near, far)
        hi = normalize_modality("depth", np.array([far]), near, far)
        assert lo[0] == pytest.approx(-1.0)
        assert hi[0] == pytest.approx(1.0)

    def test_color_alpha_affine(self):
        assert normalize_modality("color", np.array([0.0]), 0, 1)[0] == -1.0
        assert normalize_modality("color", np.array([1.0]), 0, 1)[0] == 1.0
        assert normalize_modality("alpha", np.array([0.5]), 0, 1)[0] == 0.0

    def test_normal_passthrough(self):
        x = np.array([-1.0, 0.0, 1.0])
        np.testing.assert_array_equal(normalize_modality("normal", x, 0, 1), x)

    def test_uncertainty_bounded(self):
        x = np.array([0.0, 1.0, 100.0, 1e6])
        y = normalize_modality("uncertainty", x, 0, 1)
        assert (y >= 0).all() and (y < 1).all()
        assert np.all(np.diff(y) > 0)


class TestEncodeGPBuffer:
    def test_channel_count_is_five_blocks(self):
        rng = np.random.default_rng(1)
        lat = encode_gpbuffer(_gp_video(rng), ps=8, pt=4)
        assert lat.channels == 5 * 3 * 8 * 8 * 4
        assert lat.grid == (2, 4, 4)

    def test_all_dropped_zero(self):
        rng = np.random.default_rng(2)
        drop = {m: True for m in ("color", "alpha", "depth", "normal", "uncertainty")}
        lat = encode_gpbuffer(_gp_video(rng), ps=8, pt=4, drop=drop)
        assert np.abs(lat.tokens).max() == 0.0

    def test_partial_drop_zeroes_only_that_block(self):
        rng = np.random.default_rng(3)
        gp = _gp_video(rng)
        full = encode_gpbuffer(gp, ps=8, pt=4)
        dropped = encode_gpbuffer(gp, ps=8, pt=4, drop={"depth": True})
        c = full.channels // 5
        np.testing.assert_array_equal(dropped.tokens[..., :2 * c], full.tokens[..., :2 * c])
        assert np.abs(dropped.tokens[..., 2 * c:3 * c]).max() == 0.0
        np.testing.assert_array_equal(dropped.tokens[..., 3 * c:], full.tokens[..., 3 * c:])

    def test_mismatched_dims_rejected(self):
        rng = np.random.default_rng(4)
        gp = _gp_video(rng)
        bad = GPVideo(
            color=VideoTensor(rng.uniform(0, 1, (8, 32, 40, 3)).astype(np.float32)),
            alpha=gp.alpha, depth=gp.depth, normal=gp.normal, uncertainty=gp.uncertainty,
        )
        with pytest.raises(ValueError):
            encode_gpbuffer(bad, ps=8, pt=4)
