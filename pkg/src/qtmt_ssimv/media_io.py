"""Luma plane containers and raw video/image readers and writers.

Supported inputs are YUV4MPEG2 streams, headerless planar 4:2:0 YUV and
binary PGM (P5). Only the luma channel is kept; chroma is read past and
dropped. Partition overlays are written as binary PPM (P6).
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class MediaFormatError(ValueError):
    """Input bytes do not describe a supported image or video."""


class MalformedHeaderError(MediaFormatError):
    pass


class TruncatedPayloadError(MediaFormatError):
    pass


class UnsupportedFormatError(MediaFormatError):
    pass


@dataclass(frozen=True)
class Rect:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"rect must be at least 1x1, got {self.w}x{self.h}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"rect origin must be non-negative, got ({self.x}, {self.y})")

    @property
    def x1(self) -> int:
        return self.x + self.w

    @property
    def y1(self) -> int:
        return self.y + self.h

    @property
    def size(self) -> tuple[int, int]:
        return self.w, self.h

    def contains(self, other: "Rect") -> bool:
        return (self.x <= other.x and self.y <= other.y
                and other.x1 <= self.x1 and other.y1 <= self.y1)

    def offset(self, dx: int, dy: int) -> "Rect":
        return Rect(self.x + dx, self.y + dy, self.w, self.h)

    def transposed(self) -> "Rect":
        return Rect(self.y, self.x, self.h, self.w)


@dataclass(frozen=True, eq=False)
class Plane:
    """One luma sample grid.

    ``samples`` is stored as a read-only ``(height, width)`` uint16 array so a
    loaded plane can be shared freely between workers.
    """

    samples: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        if self.bit_depth not in (8, 10):
            raise UnsupportedFormatError(f"bit depth {self.bit_depth} not supported (8 or 10)")
        arr = np.asarray(self.samples)
        if arr.ndim != 2:
            raise ValueError(f"plane samples must be 2-D, got shape {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() > self.max_value):
            raise MediaFormatError(
                f"sample values outside [0, {self.max_value}] for {self.bit_depth}-bit plane")
        arr = np.array(arr, dtype=np.uint16)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1

    @property
    def rect(self) -> Rect:
        return Rect(0, 0, self.width, self.height)

    def view(self, rect: Rect) -> np.ndarray:
        """Read-only ``(h, w)`` view of the samples under ``rect``."""
        if rect.x1 > self.width or rect.y1 > self.height:
            raise ValueError(f"{rect} exceeds {self.width}x{self.height} plane")
        return self.samples[rect.y:rect.y1, rect.x:rect.x1]

    def transposed(self) -> "Plane":
        return Plane(self.samples.T, self.bit_depth)

    def __eq__(self, other):
        if not isinstance(other, Plane):
            return NotImplemented
        return self.bit_depth == other.bit_depth and np.array_equal(self.samples, other.samples)

    __hash__ = None


@dataclass
class FrameSequence:
    planes: list[Plane] = field(default_factory=list)
    frame_rate: float | None = None

    def __post_init__(self):
        shapes = {(p.width, p.height, p.bit_depth) for p in self.planes}
        if len(shapes) > 1:
            raise ValueError(f"frames disagree on geometry/bit depth: {sorted(shapes)}")

    def __len__(self) -> int:
        return len(self.planes)

    def __iter__(self):
        return iter(self.planes)

    def __getitem__(self, i: int) -> Plane:
        return self.planes[i]


def pad_plane(plane: Plane, multiple: int) -> Plane:
    """Extend right/bottom edges by replication up to a multiple of ``multiple``."""
    pad_h = -plane.height % multiple
    pad_w = -plane.width % multiple
    if not pad_h and not pad_w:
        return plane
    return Plane(np.pad(plane.samples, ((0, pad_h), (0, pad_w)), mode="edge"), plane.bit_depth)


def _chroma_size(width: int, height: int) -> int:
    return ((width + 1) // 2) * ((height + 1) // 2)


def _decode_luma(buf: bytes, width: int, height: int, bit_depth: int) -> Plane:
    if bit_depth == 8:
        arr = np.frombuffer(buf, dtype=np.uint8)
    else:
        arr = np.frombuffer(buf, dtype="<u2")
        if arr.size and arr.max() > (1 << bit_depth) - 1:
            raise MediaFormatError(
                f"stored sample {int(arr.max())} exceeds {bit_depth}-bit range")
    return Plane(arr.reshape(height, width), bit_depth)


# --- YUV4MPEG2 ---------------------------------------------------------------

_Y4M_MAGIC = b"YUV4MPEG2"

# colorspace tag -> (bit depth, has chroma)
_Y4M_COLORSPACES = {
    "420": (8, True), "420jpeg": (8, True), "420paldv": (8, True), "420mpeg2": (8, True),
    "420p10": (10, True),
    "mono": (8, False), "mono10": (10, False),
}


def _parse_y4m_header(line: bytes) -> tuple[int, int, int, bool, float | None]:
    tokens = line.split()
    if not tokens or tokens[0] != _Y4M_MAGIC:
        raise MalformedHeaderError("missing YUV4MPEG2 signature")
    width = height = None
    colorspace = "420jpeg"
    frame_rate = None
    for tok in tokens[1:]:
        key, val = chr(tok[0]), tok[1:].decode("ascii", "replace")
        try:
            if key == "W":
                width = int(val)
            elif key == "H":
                height = int(val)
            elif key == "C":
                colorspace = val
            elif key == "F":
                num, den = val.split(":")
                frame_rate = int(num) / int(den) if int(den) else None
        except ValueError as exc:
            raise MalformedHeaderError(f"bad header token {tok!r}") from exc
    if not width or not height or width < 1 or height < 1:
        raise MalformedHeaderError("header lacks positive W and H")
    if colorspace not in _Y4M_COLORSPACES:
        raise UnsupportedFormatError(f"unsupported Y4M colorspace C{colorspace}")
    bit_depth, has_chroma = _Y4M_COLORSPACES[colorspace]
    return width, height, bit_depth, has_chroma, frame_rate


def load_y4m(path: str | os.PathLike) -> FrameSequence:
    """Read every frame of a Y4M file, keeping luma only."""
    with open(path, "rb") as f:
        data = f.read()
    nl = data.find(b"\n")
    if nl < 0:
        raise MalformedHeaderError("header line not terminated")
    width, height, bit_depth, has_chroma, frame_rate = _parse_y4m_header(data[:nl])
    bps = 1 if bit_depth == 8 else 2
    luma_bytes = width * height * bps
    frame_bytes = luma_bytes + (2 * _chroma_size(width, height) * bps if has_chroma else 0)

    planes = []
    pos = nl + 1
    while pos < len(data):
        end = data.find(b"\n", pos)
        if end < 0 or not data.startswith(b"FRAME", pos):
            raise MalformedHeaderError(f"expected FRAME marker at byte {pos}")
        pos = end + 1
        if pos + frame_bytes > len(data):
            raise TruncatedPayloadError(
                f"frame {len(planes)} needs {frame_bytes} bytes, {len(data) - pos} left")
        planes.append(_decode_luma(data[pos:pos + luma_bytes], width, height, bit_depth))
        pos += frame_bytes
    return FrameSequence(planes, frame_rate)


def write_y4m(planes: Iterable[Plane], path: str | os.PathLike, frame_rate: int = 30) -> None:
    """Write planes as a 4:2:0 Y4M stream with flat mid-grey chroma."""
    planes = list(planes)
    if not planes:
        raise ValueError("need at least one plane to infer geometry")
    p0 = planes[0]
    cs = "420jpeg" if p0.bit_depth == 8 else "420p10"
    with open(path, "wb") as f:
        f.write(f"YUV4MPEG2 W{p0.width} H{p0.height} F{frame_rate}:1 Ip A1:1 C{cs}\n".encode())
        for p in planes:
            f.write(b"FRAME\n")
            f.write(_encode_420(p))


# --- headerless planar YUV ------------------------------------------------------

def _encode_420(plane: Plane, luma_only: bool = False) -> bytes:
    dtype = np.uint8 if plane.bit_depth == 8 else np.dtype("<u2")
    out = plane.samples.astype(dtype).tobytes()
    if not luma_only:
        mid = np.full(2 * _chroma_size(plane.width, plane.height), 1 << (plane.bit_depth - 1),
                      dtype=dtype)
        out += mid.tobytes()
    return out


def load_raw_yuv(path: str | os.PathLike, width: int, height: int, bit_depth: int = 8,
                 luma_only: bool = False) -> FrameSequence:
    """Read headerless planar YUV 4:2:0 (or bare luma with ``luma_only``).

    10-bit samples are little-endian 16-bit words; values above 1023 are an
    error rather than being clamped.
    """
    if bit_depth not in (8, 10):
        raise UnsupportedFormatError(f"bit depth {bit_depth} not supported (8 or 10)")
    bps = 1 if bit_depth == 8 else 2
    luma_bytes = width * height * bps
    stride = luma_bytes if luma_only else luma_bytes + 2 * _chroma_size(width, height) * bps
    size = os.path.getsize(path)
    if size % stride:
        raise MediaFormatError(
            f"file size {size} is not a multiple of the {width}x{height} frame stride {stride}")
    planes = []
    with open(path, "rb") as f:
        for _ in range(size // stride):
            frame = f.read(stride)
            planes.append(_decode_luma(frame[:luma_bytes], width, height, bit_depth))
    return FrameSequence(planes)


def write_raw_yuv(planes: Iterable[Plane], path: str | os.PathLike,
                  luma_only: bool = False) -> None:
    with open(path, "wb") as f:
        for p in planes:
            f.write(_encode_420(p, luma_only))


# --- PGM / PPM --------------------------------------------------------------------

_PNM_TOKEN = re.compile(rb"(?:\s+|#[^\n]*\n)*(\S+)")


def load_pgm(path: str | os.PathLike) -> Plane:
    """Read a binary PGM (P5). maxval <= 255 gives 8-bit, <= 1023 gives 10-bit."""
    with open(path, "rb") as f:
        data = f.read()
    fields, pos = [], 0
    for _ in range(4):
        m = _PNM_TOKEN.match(data, pos)
        if not m:
            raise MalformedHeaderError("incomplete PGM header")
        fields.append(m.group(1))
        pos = m.end()
    if fields[0] != b"P5":
        raise UnsupportedFormatError(f"expected binary PGM (P5), got {fields[0]!r}")
    try:
        width, height, maxval = (int(v) for v in fields[1:])
    except ValueError as exc:
        raise MalformedHeaderError("non-numeric PGM header field") from exc
    pos += 1  # single whitespace byte before raster
    if maxval <= 255:
        bit_depth, dtype = 8, np.uint8
    elif maxval <= 1023:
        bit_depth, dtype = 10, np.dtype(">u2")
    else:
        raise UnsupportedFormatError(f"PGM maxval {maxval} exceeds 10-bit range")
    nbytes = width * height * np.dtype(dtype).itemsize
    if len(data) - pos < nbytes:
        raise TruncatedPayloadError(f"PGM raster needs {nbytes} bytes, {len(data) - pos} present")
    arr = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos)
    return Plane(arr.reshape(height, width), bit_depth)


def write_pgm(plane: Plane, path: str | os.PathLike) -> None:
    dtype = np.uint8 if plane.bit_depth == 8 else np.dtype(">u2")
    with open(path, "wb") as f:
        f.write(f"P5\n{plane.width} {plane.height}\n{plane.max_value}\n".encode())
        f.write(plane.samples.astype(dtype).tobytes())


def load_frames(path: str | os.PathLike, width: int | None = None, height: int | None = None,
                bit_depth: int = 8) -> FrameSequence:
    """Dispatch on file extension: .y4m, .pgm, or raw .yuv (needs geometry)."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".y4m":
        return load_y4m(path)
    if ext in (".pgm", ".pnm"):
        return FrameSequence([load_pgm(path)])
    if ext == ".yuv":
        if not width or not height:
            raise MediaFormatError(f"{path}: raw YUV input needs --width and --height")
        return load_raw_yuv(path, width, height, bit_depth)
    raise UnsupportedFormatError(f"{path}: unrecognised extension {ext!r}")


OVERLAY_COLOR = (255, 0, 0)


def render_overlay(plane: Plane, trees: Sequence) -> np.ndarray:
    """RGB image of ``plane`` with partition boundaries drawn 1 px wide.

    Each leaf contributes its top and left edges; the root's right and bottom
    edges close the border. Lines falling in padding are clipped.
    """
    grey = plane.samples >> (plane.bit_depth - 8)
    rgb = np.repeat(grey.astype(np.uint8)[:, :, None], 3, axis=2)
    H, W = plane.height, plane.width

    def hline(y, x0, x1):
        if 0 <= y < H:
            rgb[y, max(x0, 0):min(x1, W)] = OVERLAY_COLOR

    def vline(x, y0, y1):
        if 0 <= x < W:
            rgb[max(y0, 0):min(y1, H), x] = OVERLAY_COLOR

    for tree in trees:
        root = tree.cu.rect
        for leaf in tree.leaves():
            r = leaf.cu.rect
            hline(r.y, r.x, r.x1)
            vline(r.x, r.y, r.y1)
        hline(min(root.y1, H) - 1, root.x, root.x1)
        vline(min(root.x1, W) - 1, root.y, root.y1)
    return rgb


def write_overlay(plane: Plane, tree, path: str | os.PathLike) -> None:
    """Write ``plane`` with the partition of ``tree`` (or a list of CTU trees) as P6."""
    trees = tree if isinstance(tree, (list, tuple)) else [tree]
    for t in trees:
        if t.cu.rect.x >= plane.width or t.cu.rect.y >= plane.height:
            raise ValueError(f"tree at {t.cu.rect} lies outside the {plane.width}x{plane.height} plane")
    rgb = render_overlay(plane, trees)
    with open(path, "wb") as f:
        f.write(f"P6\n{plane.width} {plane.height}\n255\n".encode())
        f.write(rgb.tobytes())
