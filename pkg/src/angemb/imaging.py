"""Frame-stack ingestion (binary PGM) and the imaging pipelines.

Frames become columns of a D×n matrix (row-major pixel flattening), the
layout used by the background-modeling and shadow-removal studies. Only
8-bit binary grayscale PGM (P5) is decoded or written.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyInput, InvalidData, MixedDimensions, UnsupportedFormat
from .linalg import DataMatrix
from .methods import DEFAULT_ETA_THETA, fit_method
from .model import FitModel, atomic_write_bytes

BACKGROUND_COMPONENTS = 5
FACE_COMPONENTS = 9


@dataclass(frozen=True)
class FrameStack:
    """Frames as columns: D = width*height, pixel (r, c) at row r*width + c."""

    width: int
    height: int
    frames: DataMatrix
    names: tuple[str, ...]

    def __post_init__(self):
        if self.frames.D != self.width * self.height:
            raise InvalidData(
                f"frame length {self.frames.D} != width*height "
                f"{self.width * self.height}"
            )
        if len(self.names) != self.frames.n:
            raise InvalidData("one name per frame required")

    @property
    def n(self) -> int:
        return self.frames.n

    def with_frames(self, values: np.ndarray) -> "FrameStack":
        return FrameStack(
            width=self.width,
            height=self.height,
            frames=DataMatrix.from_array(values),
            names=self.names,
        )


def _read_pgm(path: Path) -> tuple[int, int, np.ndarray]:
    data = path.read_bytes()

    pos = 0

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(data):
            ch = data[pos : pos + 1]
            if ch == b"#":
                eol = data.find(b"\n", pos)
                pos = len(data) if eol < 0 else eol + 1
            elif ch.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise UnsupportedFormat(f"{path}: truncated header")
        return data[start:pos]

    magic = next_token()
    if magic != b"P5":
        raise UnsupportedFormat(
            f"{path}: magic {magic!r}; only binary grayscale PGM (P5) is supported"
        )
    try:
        width, height, maxval = (int(next_token()) for _ in range(3))
    except ValueError as exc:
        raise UnsupportedFormat(f"{path}: malformed header ({exc})") from exc
    if width < 1 or height < 1:
        raise UnsupportedFormat(f"{path}: bad dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise UnsupportedFormat(f"{path}: maxval {maxval} is not 8-bit")
    pos += 1  # single whitespace byte separates header from raster
    raster = data[pos : pos + width * height]
    if len(raster) != width * height:
        raise UnsupportedFormat(
            f"{path}: expected {width * height} pixel bytes, found {len(raster)}"
        )
    return width, height, np.frombuffer(raster, dtype=np.uint8).astype(np.float64)


def load_frames(paths) -> FrameStack:
    """Decode PGM frames, sorted lexicographically by file name."""
    paths = [Path(p) for p in paths]
    if not paths:
        raise EmptyInput("no frames given")
    decoded = sorted(
        ((p.name, *_read_pgm(p)) for p in paths), key=lambda entry: entry[0]
    )
    width, height = decoded[0][1], decoded[0][2]
    for name, w, h, _ in decoded:
        if (w, h) != (width, height):
            raise MixedDimensions(
                f"{name} is {w}x{h}, expected {width}x{height}"
            )
    matrix = np.stack([pix for _, _, _, pix in decoded], axis=1)
    return FrameStack(
        width=width,
        height=height,
        frames=DataMatrix.from_array(matrix),
        names=tuple(name for name, _, _, _ in decoded),
    )


def quantize(values: np.ndarray) -> np.ndarray:
    """Clamp to [0, 255] then round half-up to 8-bit."""
    return np.floor(np.clip(values, 0.0, 255.0) + 0.5).astype(np.uint8)


def write_frames(stack: FrameStack, out_dir, suffix: str = "") -> list[Path]:
    """Emit one binary P5 file per frame: <stem><suffix>.pgm under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = f"P5\n{stack.width} {stack.height}\n255\n".encode("ascii")
    written = []
    pixels = quantize(stack.frames.values)
    for j, name in enumerate(stack.names):
        target = out_dir / f"{Path(name).stem}{suffix}.pgm"
        atomic_write_bytes(target, header + pixels[:, j].tobytes())
        written.append(target)
    return written


@dataclass(frozen=True)
class BackgroundResult:
    model: FitModel
    backgrounds: FrameStack
    foreground: FrameStack
    raw_reconstruction: np.ndarray  # pre-clamp, kept for metrics


@dataclass(frozen=True)
class ShadowResult:
    model: FitModel
    reconstructed: FrameStack
    inverted_difference: FrameStack
    raw_reconstruction: np.ndarray


def _reconstruct_raw(model: FitModel, stack: FrameStack) -> np.ndarray:
    from .ae import reconstruct

    return reconstruct(model, stack.frames).values


def background_model(
    stack: FrameStack,
    d: int = BACKGROUND_COMPONENTS,
    method: str = "tae",
    eta_theta: float = DEFAULT_ETA_THETA,
    **fit_kwargs,
) -> BackgroundResult:
    """Low-rank background per frame plus the absolute foreground residual."""
    model = fit_method(stack.frames, method, d, eta_theta=eta_theta, **fit_kwargs)
    raw = _reconstruct_raw(model, stack)
    backgrounds = np.clip(raw, 0.0, 255.0)
    foreground = np.abs(stack.frames.values - backgrounds)
    return BackgroundResult(
        model=model,
        backgrounds=stack.with_frames(backgrounds),
        foreground=stack.with_frames(foreground),
        raw_reconstruction=raw,
    )


def shadow_removal(
    stack: FrameStack,
    d: int = FACE_COMPONENTS,
    method: str = "tae",
    eta_theta: float = DEFAULT_ETA_THETA,
    **fit_kwargs,
) -> ShadowResult:
    """Low-rank face reconstruction and the inverted absolute difference."""
    model = fit_method(stack.frames, method, d, eta_theta=eta_theta, **fit_kwargs)
    raw = _reconstruct_raw(model, stack)
    recon = np.clip(raw, 0.0, 255.0)
    inverted = np.clip(255.0 - np.abs(stack.frames.values - recon), 0.0, 255.0)
    return ShadowResult(
        model=model,
        reconstructed=stack.with_frames(recon),
        inverted_difference=stack.with_frames(inverted),
        raw_reconstruction=raw,
    )


def stack_from_matrix(values, width: int, height: int, prefix: str = "frame") -> FrameStack:
    """Wrap a D×n matrix as a stack with zero-padded synthetic names."""
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[1]
    digits = max(3, len(str(max(n - 1, 1))))
    names = tuple(f"{prefix}{j:0{digits}d}.pgm" for j in range(n))
    return FrameStack(
        width=width,
        height=height,
        frames=DataMatrix.from_array(values),
        names=names,
    )
