import numpy as np
import pytest

from splatflow.core.plyio import PlyParseError, PlySchemaError, load_ply, write_ply
from splatflow.core.types import GaussianCloud


def _f32_cloud(n: int, seed: int, basis: int = 4) -> GaussianCloud:
    """Cloud whose raw values are exactly float32-representable."""
    rng = np.random.default_rng(seed)
    q = rng.normal(0, 1, (n, 4)).astype(np.float32)
    return GaussianCloud(
        positions=rng.normal(0, 1, (n, 3)).astype(np.float32),
        opacities_raw=rng.normal(0, 1, n).astype(np.float32),
        sh_coeffs=rng.normal(0, 1, (n, basis, 3)).astype(np.float32),
        scales_raw=rng.normal(-2, 0.5, (n, 3)).astype(np.float32),
        rotations=q,
    )


class TestRoundTrip:
    def test_identity_vertex(self, tmp_path):
        # All-zero raw fields: sigmoid(0) = 0.5 opacity, exp(0) = 1 scale.
        cloud = GaussianCloud(
            positions=np.zeros((1, 3)),
            opacities_raw=[0.0],
            sh_coeffs=np.zeros((1, 4, 3)),
            scales_raw=np.zeros((1, 3)),
            rotations=[[1.0, 0.0, 0.0, 0.0]],
        )
        path = tmp_path / "one.ply"
        write_ply(path, cloud)
        back = load_ply(path)
        assert back.n == 1
        assert back.opacities()[0] == 0.5
        np.testing.assert_array_equal(back.scales()[0], [1.0, 1.0, 1.0])
        np.testing.assert_array_equal(back.rotations[0], [1.0, 0.0, 0.0, 0.0])

    def test_file_round_trip_byte_identical(self, tmp_path):
        p1 = tmp_path / "a.ply"
        p2 = tmp_path / "b.ply"
        write_ply(p1, _f32_cloud(17, seed=1))
        write_ply(p2, load_ply(p1))
        assert p1.read_bytes() == p2.read_bytes()

    @pytest.mark.parametrize("basis", [1, 4, 9, 16])
    def test_value_round_trip_exact(self, tmp_path, basis):
        cloud = _f32_cloud(100, seed=2, basis=basis)
        path = tmp_path / "c.ply"
        write_ply(path, cloud)
        back = load_ply(path)
        for name in ("positions", "opacities_raw", "sh_coeffs", "scales_raw", "rotations"):
            err = np.abs(getattr(back, name) - getattr(cloud, name)).max()
            assert err == 0.0, f"{name} max abs err {err}"


class TestErrors:
    def test_malformed_header_names_line(self, tmp_path):
        path = tmp_path / "bad.ply"
        path.write_bytes(b"ply\nformat binary_little_endian 1.0\nelement vertex\nend_header\n")
        with pytest.raises(PlyParseError, match="element vertex"):
            load_ply(path)

    def test_bad_format_line(self, tmp_path):
        path = tmp_path / "ascii.ply"
        path.write_bytes(b"ply\nformat ascii 1.0\nelement vertex 0\nend_header\n")
        with pytest.raises(PlyParseError, match="format"):
            load_ply(path)

    def test_missing_field_schema_error(self, tmp_path):
        path = tmp_path / "missing.ply"
        good = tmp_path / "good.ply"
        write_ply(good, _f32_cloud(2, seed=3))
        text = good.read_bytes()
        # drop the opacity property from the header: schema violation
        path.write_bytes(text.replace(b"property float opacity\n", b"property float op\n"))
        with pytest.raises(PlySchemaError, match="opacity"):
            load_ply(path)

    def test_extra_fields_tolerated(self, tmp_path):
        cloud = _f32_cloud(3, seed=4)
        path = tmp_path / "extra.ply"
        # hand-write a file with nx/ny/nz interleaved, reader must cope
        fields = ["x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"]
        fields += [f"f_rest_{i}" for i in range(9)]
        fields += ["opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"]
        header = ["ply", "format binary_little_endian 1.0", f"element vertex {cloud.n}"]
        header += [f"property float {f}" for f in fields] + ["end_header"]
        rec = np.zeros(cloud.n, dtype=[(f, "<f4") for f in fields])
        rec["x"], rec["y"], rec["z"] = cloud.positions.T.astype(np.float32)
        for c in range(3):
            rec[f"f_dc_{c}"] = cloud.sh_coeffs[:, 0, c].astype(np.float32)
            for b in range(3):
                rec[f"f_rest_{c * 3 + b}"] = cloud.sh_coeffs[:, b + 1, c].astype(np.float32)
        rec["opacity"] = cloud.opacities_raw.astype(np.float32)
        for i in range(3):
            rec[f"scale_{i}"] = cloud.scales_raw[:, i].astype(np.float32)
        for i in range(4):
            rec[f"rot_{i}"] = cloud.rotations[:, i].astype(np.float32)
        path.write_bytes(("\n".join(header) + "\n").encode() + rec.tobytes())
        back = load_ply(path)
        assert np.abs(back.positions - cloud.positions).max() == 0.0
        assert np.abs(back.sh_coeffs - cloud.sh_coeffs).max() == 0.0
