"""On-disk formats: KITTI pose files, match CSVs, P5 PGM label masks.

All writers go through a write-temp-then-rename step so a failed run never
leaves a partial output file behind.
"""

import os

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    InvalidRotationError,
    ParseError,
    UnsupportedFormatError,
)
from .geometry import Pose, Trajectory
from .masks import LabelMask


def atomic_write_bytes(path, data: bytes):
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def atomic_write_text(path, text: str):
    atomic_write_bytes(path, text.encode("utf-8"))


# --- KITTI pose files ------------------------------------------------------


def read_poses_kitti(path) -> Trajectory:
    """Read a KITTI odometry pose file (12 numbers per line, row-major R|t)."""
    poses = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 12:
                raise ParseError(
                    f"expected 12 numbers, got {len(parts)}", path=path, line=lineno
                )
            try:
                vals = np.array([float(p) for p in parts])
            except ValueError:
                raise ParseError("non-numeric pose entry", path=path, line=lineno)
            m = vals.reshape(3, 4)
            try:
                poses.append(Pose(m[:, :3], m[:, 3]))
            except InvalidRotationError as exc:
                raise InvalidRotationError(f"{path}:{lineno}: {exc}") from exc
    if not poses:
        raise ParseError("pose file holds no poses", path=path)
    return Trajectory(poses)


def write_poses_kitti(trajectory: Trajectory, path):
    lines = []
    for pose in trajectory:
        m = np.hstack([pose.r, pose.t.reshape(3, 1)])
        lines.append(" ".join(f"{v:.12g}" for v in m.ravel()))
    atomic_write_text(path, "\n".join(lines) + "\n")


# --- correspondence CSVs -----------------------------------------------------


def pair_filename(prev_index, next_index):
    return f"{prev_index:06d}_{next_index:06d}.csv"


def read_matches(path):
    """Read `u0,v0,u1,v1` rows into an (N, 4) float array.

    A single leading header line is tolerated and skipped.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if lineno == 1 and any(not _is_number(p) for p in parts):
                continue
            if len(parts) != 4:
                raise ParseError(
                    f"expected 4 values, got {len(parts)}", path=path, line=lineno
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ParseError("non-numeric match entry", path=path, line=lineno)
    return np.array(rows, dtype=np.float64).reshape(len(rows), 4)


def _is_number(text):
    try:
        float(text)
        return True
    except ValueError:
        return False


def write_matches(matches, path):
    matches = np.asarray(matches, dtype=np.float64).reshape(-1, 4)
    lines = ["u0,v0,u1,v1"]
    for row in matches:
        lines.append(",".join(f"{v:.17g}" for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


# --- P5 PGM label masks ------------------------------------------------------


def read_mask(path, road_label=1, dynamic_labels=(2,), expected_size=None) -> LabelMask:
    """Read a binary (P5) PGM of 8-bit class labels.

    `expected_size` is (width, height); a mismatch raises
    DimensionMismatchError so a wrong-resolution mask cannot slip through.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        magic, rest = _pgm_token(data, 0)
        if magic != b"P5":
            raise UnsupportedFormatError(f"{path}: not a P5 PGM (magic {magic!r})")
        width_tok, rest = _pgm_token(data, rest)
        height_tok, rest = _pgm_token(data, rest)
        maxval_tok, rest = _pgm_token(data, rest)
        width, height, maxval = int(width_tok), int(height_tok), int(maxval_tok)
    except (ValueError, IndexError) as exc:
        raise UnsupportedFormatError(f"{path}: malformed PGM header") from exc
    if maxval != 255:
        raise UnsupportedFormatError(f"{path}: maxval {maxval} unsupported, need 255")
    pixels = data[rest : rest + width * height]
    if len(pixels) != width * height:
        raise UnsupportedFormatError(
            f"{path}: truncated pixel data ({len(pixels)} of {width * height} bytes)"
        )
    if expected_size is not None and (width, height) != tuple(expected_size):
        raise DimensionMismatchError(
            f"{path}: mask is {width}x{height}, expected "
            f"{expected_size[0]}x{expected_size[1]}"
        )
    labels = np.frombuffer(pixels, dtype=np.uint8).reshape(height, width)
    return LabelMask(labels, road_label=road_label, dynamic_labels=frozenset(dynamic_labels))


def _pgm_token(data, start):
    """Next whitespace-delimited header token, skipping # comment lines."""
    i = start
    while True:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
            continue
        break
    j = i
    while j < len(data) and not data[j : j + 1].isspace():
        j += 1
    if i == j:
        raise ValueError("unexpected end of header")
    # Exactly one whitespace byte separates the maxval from pixel data.
    return data[i:j], j + 1


def write_mask(mask: LabelMask, path):
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    atomic_write_bytes(path, header + mask.labels.tobytes())


# --- per-frame scale table -----------------------------------------------------


def write_scales_csv(records, path):
    """Rows of (frame_index, raw_scale, filtered_scale, mode)."""
    lines = ["frame_index,raw_scale,filtered_scale,mode"]
    for frame_index, raw, filtered, mode in records:
        lines.append(f"{frame_index},{raw:.17g},{filtered:.17g},{mode}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_scales_csv(path):
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or lineno == 1:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ParseError(
                    f"expected 4 fields, got {len(parts)}", path=path, line=lineno
                )
            records.append((int(parts[0]), float(parts[1]), float(parts[2]), parts[3]))
    return records
