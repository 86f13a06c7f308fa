"""Feature-matrix container and its on-disk formats.

Two formats are supported:

* text: UTF-8, one frame per line, comma separated, no header.  Values are
  written with the shortest decimal string that round-trips (``repr``), and
  integral values drop the trailing ``.0`` so that ``[[1, 2], [3, 4]]`` is
  written as ``"1,2\\n3,4\\n"``.
* binary: ``b"RPM1"`` | u32-LE n_frames | u32-LE dim | n_frames*dim f64-LE,
  row-major.

Both loaders validate fully and raise a subclass of
:class:`~repcount.errors.MalformedMatrix` instead of returning a matrix that
breaks an invariant.
"""

from __future__ import annotations

import enum
import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    IoFailure,
    MalformedMatrix,
    MissingFile,
    NonFiniteValue,
    NonNumericField,
    RaggedRows,
    TooFewFrames,
    TrailingData,
    TruncatedPayload,
)

MAGIC = b"RPM1"
HEADER = struct.Struct("<4sII")

PathLike = str | os.PathLike


class StreamKind(str, enum.Enum):
    SPATIAL = "spatial"
    TEMPORAL = "temporal"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True, order="C")
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """N frames by D features, immutable.

    ``values`` is a read-only float64 array of shape ``(n_frames, dim)``.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise MalformedMatrix(f"expected a 2-D array, got shape {v.shape}")
        if v.shape[0] < 2:
            raise TooFewFrames(f"need at least 2 frames, got {v.shape[0]}")
        if v.shape[1] < 1:
            raise MalformedMatrix("feature dimension must be at least 1")
        if not np.all(np.isfinite(v)):
            bad = np.argwhere(~np.isfinite(v))[0]
            raise NonFiniteValue(
                f"non-finite value at frame {bad[0]}, feature {bad[1]}"
            )
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other):
        if not isinstance(other, FeatureMatrix):
            return NotImplemented
        # bitwise comparison, so -0.0 != 0.0
        return (
            self.values.shape == other.values.shape
            and self.values.tobytes() == other.values.tobytes()
        )

    __hash__ = None


# -- text --------------------------------------------------------------------

def format_value(x: float) -> str:
    """Shortest decimal string that parses back to exactly ``x``."""
    x = float(x)
    if x.is_integer() and abs(x) < 1e16 and not (x == 0 and math.copysign(1, x) < 0):
        return str(int(x))
    return repr(x)


def _parse_field(text: str, line: int, path: str | None) -> float:
    s = text.strip()
    # float() would accept "1_000", which is not a decimal number here
    if not s or "_" in s:
        raise NonNumericField(line, text, path)
    try:
        x = float(s)
    except ValueError:
        raise NonNumericField(line, text, path) from None
    if not math.isfinite(x):
        raise NonFiniteValue(f"{path + ': ' if path else ''}line {line}: {text!r} is not finite")
    return x


def parse_text_matrix(text: str, path: str | None = None) -> FeatureMatrix:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    rows = []
    width = None
    for lineno, raw in enumerate(lines, start=1):
        fields = raw.rstrip("\r").split(",")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise RaggedRows(lineno, width, len(fields), path)
        rows.append([_parse_field(f, lineno, path) for f in fields])
    if len(rows) < 2:
        raise TooFewFrames(
            f"{path + ': ' if path else ''}need at least 2 frames, got {len(rows)}"
        )
    return FeatureMatrix(np.array(rows, dtype=np.float64))


def load_text_matrix(path: PathLike) -> FeatureMatrix:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise MissingFile(f"no such file: {p}") from None
    except UnicodeDecodeError as exc:
        raise NonNumericField(0, f"<undecodable bytes: {exc.reason}>", str(p)) from None
    except OSError as exc:
        raise IoFailure(f"cannot read {p}: {exc}") from exc
    return parse_text_matrix(text, str(p))


def dump_text_matrix(m: FeatureMatrix) -> str:
    return "".join(",".join(map(format_value, row)) + "\n" for row in m.values)


def save_text_matrix(m: FeatureMatrix, path: PathLike) -> None:
    _write(path, dump_text_matrix(m).encode("utf-8"))


# -- binary ------------------------------------------------------------------

def decode_binary_matrix(data: bytes, path: str | None = None) -> FeatureMatrix:
    where = f"{path}: " if path else ""
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic(f"{where}missing RPM1 header (got {data[:4]!r})")
    if len(data) < HEADER.size:
        raise TruncatedPayload(f"{where}header is {len(data)} bytes, need {HEADER.size}")
    _, n, d = HEADER.unpack_from(data)
    if n < 2:
        raise TooFewFrames(f"{where}need at least 2 frames, got {n}")
    if d < 1:
        raise MalformedMatrix(f"{where}feature dimension must be at least 1")
    need = HEADER.size + 8 * n * d
    if len(data) < need:
        raise TruncatedPayload(f"{where}declared {n}x{d} needs {need} bytes, file has {len(data)}")
    if len(data) > need:
        raise TrailingData(f"{where}{len(data) - need} unexpected bytes after payload")
    values = np.frombuffer(data, dtype="<f8", count=n * d, offset=HEADER.size)
    return FeatureMatrix(values.reshape(n, d))


def encode_binary_matrix(m: FeatureMatrix) -> bytes:
    return HEADER.pack(MAGIC, m.n_frames, m.dim) + m.values.astype("<f8").tobytes()


def load_binary_matrix(path: PathLike) -> FeatureMatrix:
    p = Path(path)
    return decode_binary_matrix(_read(p), str(p))


def save_binary_matrix(m: FeatureMatrix, path: PathLike) -> None:
    _write(path, encode_binary_matrix(m))


def load_matrix(path: PathLike) -> FeatureMatrix:
    """Load either format, deciding by the leading magic bytes."""
    p = Path(path)
    data = _read(p)
    if data[:4] == MAGIC:
        return decode_binary_matrix(data, str(p))
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise NonNumericField(0, f"<undecodable bytes: {exc.reason}>", str(p)) from None
    return parse_text_matrix(text, str(p))


def save_matrix(m: FeatureMatrix, path: PathLike) -> None:
    """Binary for ``.bin`` paths, text otherwise."""
    if Path(path).suffix == ".bin":
        save_binary_matrix(m, path)
    else:
        save_text_matrix(m, path)


# -- waveforms ---------------------------------------------------------------

def dump_waveform_text(samples) -> str:
    return "".join(format_value(x) + "\n" for x in np.asarray(samples, dtype=np.float64))


def load_waveform_text(path: PathLike) -> np.ndarray:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise MissingFile(f"no such file: {p}") from None
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        out.append(_parse_field(line, lineno, str(p)))
    return np.array(out, dtype=np.float64)


def _read(p: Path) -> bytes:
    try:
        return p.read_bytes()
    except FileNotFoundError:
        raise MissingFile(f"no such file: {p}") from None
    except OSError as exc:
        raise IoFailure(f"cannot read {p}: {exc}") from exc


def _write(path: PathLike, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
