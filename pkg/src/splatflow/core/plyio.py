"""Binary PLY I/O in the de-facto splat field layout.

Canonical vertex properties (all float32, little-endian):

    x y z
    f_dc_0..2                  SH DC term, one per channel
    f_rest_0..(3*(B-1)-1)      higher SH terms, channel-major
    opacity                    raw (pre-sigmoid)
    scale_0..2                 raw (log)
    rot_0..3                   quaternion (w, x, y, z)

The reader accepts extra properties (e.g. nx/ny/nz written by other
tools) and any property order; the writer always emits the canonical
order so write(read(f)) is byte-identical for canonical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .types import SH_BASIS_SIZES, GaussianCloud


class PlyParseError(ValueError):
    pass


class PlySchemaError(ValueError):
    pass


_PLY_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


def _canonical_fields(basis: int) -> list[str]:
    rest = [f"f_rest_{i}" for i in range(3 * (basis - 1))]
    return (
        ["x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2"]
        + rest
        + ["opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"]
    )


def _parse_header(data: bytes, path) -> tuple[int, list[tuple[str, str]], int]:
    """Returns (vertex count, [(name, dtype)], body offset)."""
    end = data.find(b"end_header\n")
    if end < 0:
        raise PlyParseError(f"{path}: no end_header line")
    body_offset = end + len(b"end_header\n")
    lines = data[:end].decode("ascii", errors="replace").splitlines()
    if not lines or lines[0].strip() != "ply":
        raise PlyParseError(f"{path}: first line must be 'ply', got {lines[0]!r}" if lines else f"{path}: empty header")
    n_vertex = None
    props: list[tuple[str, str]] = []
    in_vertex = False
    fmt_seen = False
    for line in lines[1:]:
        tok = line.split()
        if not tok or tok[0] == "comment":
            continue
        if tok[0] == "format":
            if tok[1:] != ["binary_little_endian", "1.0"]:
                raise PlyParseError(f"{path}: unsupported format line: {line!r}")
            fmt_seen = True
        elif tok[0] == "element":
            if len(tok) != 3:
                raise PlyParseError(f"{path}: malformed element line: {line!r}")
            in_vertex = tok[1] == "vertex"
            if in_vertex:
                try:
                    n_vertex = int(tok[2])
                except ValueError:
                    raise PlyParseError(f"{path}: bad vertex count in line: {line!r}") from None
        elif tok[0] == "property":
            if not in_vertex:
                continue
            if len(tok) != 3 or tok[1] == "list":
                raise PlyParseError(f"{path}: unsupported property line: {line!r}")
            if tok[1] not in _PLY_TYPES:
                raise PlyParseError(f"{path}: unknown property type in line: {line!r}")
            props.append((tok[2], _PLY_TYPES[tok[1]]))
        else:
            raise PlyParseError(f"{path}: unrecognized header line: {line!r}")
    if not fmt_seen:
        raise PlyParseError(f"{path}: missing format line")
    if n_vertex is None:
        raise PlyParseError(f"{path}: no vertex element")
    return n_vertex, props, body_offset


def load_ply(path: str | Path) -> GaussianCloud:
    path = Path(path)
    data = path.read_bytes()
    n, props, offset = _parse_header(data, path)
    names = [p[0] for p in props]

    rest_count = sum(1 for nm in names if nm.startswith("f_rest_"))
    if rest_count % 3 != 0:
        raise PlySchemaError(f"{path}: f_rest count {rest_count} not divisible by 3")
    basis = rest_count // 3 + 1
    if basis not in SH_BASIS_SIZES:
        raise PlySchemaError(f"{path}: SH basis size {basis} unsupported (f_rest count {rest_count})")
    required = _canonical_fields(basis)
    missing = [f for f in required if f not in names]
    if missing:
        raise PlySchemaError(f"{path}: missing required fields: {missing}")

    dtype = np.dtype([(nm, "<" + code) for nm, code in props])
    body = data[offset : offset + dtype.itemsize * n]
    if len(body) < dtype.itemsize * n:
        raise PlyParseError(f"{path}: body truncated ({len(body)} bytes for {n} vertices)")
    verts = np.frombuffer(body, dtype=dtype, count=n)

    def col(nm: str) -> np.ndarray:
        return np.asarray(verts[nm], dtype=np.float64)

    positions = np.stack([col("x"), col("y"), col("z")], axis=1)
    dc = np.stack([col(f"f_dc_{c}") for c in range(3)], axis=1)  # (N, 3)
    sh = np.zeros((n, basis, 3))
    sh[:, 0, :] = dc
    # f_rest is channel-major: index = channel * (basis-1) + (b-1)
    for c in range(3):
        for b in range(basis - 1):
            sh[:, b + 1, c] = col(f"f_rest_{c * (basis - 1) + b}")
    return GaussianCloud(
        positions=positions,
        opacities_raw=col("opacity"),
        sh_coeffs=sh,
        scales_raw=np.stack([col(f"scale_{i}") for i in range(3)], axis=1),
        rotations=np.stack([col(f"rot_{i}") for i in range(4)], axis=1),
    )


def write_ply(path: str | Path, cloud: GaussianCloud) -> None:
    basis = cloud.sh_coeffs.shape[1]
    fields = _canonical_fields(basis)
    dtype = np.dtype([(f, "<f4") for f in fields])
    out = np.empty(cloud.n, dtype=dtype)
    out["x"], out["y"], out["z"] = cloud.positions.T.astype(np.float32)
    for c in range(3):
        out[f"f_dc_{c}"] = cloud.sh_coeffs[:, 0, c].astype(np.float32)
        for b in range(basis - 1):
            out[f"f_rest_{c * (basis - 1) + b}"] = cloud.sh_coeffs[:, b + 1, c].astype(np.float32)
    out["opacity"] = cloud.opacities_raw.astype(np.float32)
    for i in range(3):
        out[f"scale_{i}"] = cloud.scales_raw[:, i].astype(np.float32)
    for i in range(4):
        out[f"rot_{i}"] = cloud.rotations[:, i].astype(np.float32)

    header_lines = ["ply", "format binary_little_endian 1.0", f"element vertex {cloud.n}"]
    header_lines += [f"property float {f}" for f in fields]
    header_lines.append("end_header")
    with open(path, "wb") as f:
        f.write(("\n".join(header_lines) + "\n").encode("ascii"))
        f.write(out.tobytes())
