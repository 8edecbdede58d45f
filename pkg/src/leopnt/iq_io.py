"""IQ capture files with a JSON sidecar, and CSV tables.

The payload holds interleaved little-endian (I, Q) pairs, either float32
(``cf32le``) or int16 scaled by 1/32768 (``ci16le``).  The sidecar lives
next to the payload at ``<payload>.json``.  Concurrent writers to the same
path are not coordinated.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .signal_model import IqSignal

FORMATS = {"cf32le": np.dtype("<f4"), "ci16le": np.dtype("<i2")}
CI16_SCALE = 32768.0


class IqFormatError(ValueError):
    pass


@dataclass(frozen=True)
class IqFileHeader:
    sample_rate_hz: float
    sample_format: str = "cf32le"
    num_samples: int = 0
    center_frequency_hz: float = 0.0
    description: str = ""

    def __post_init__(self):
        if self.sample_format not in FORMATS:
            raise IqFormatError(f"unknown sample format {self.sample_format!r}")
        if not self.sample_rate_hz > 0:
            raise IqFormatError("sample_rate_hz must be positive")

    @property
    def bytes_per_sample(self) -> int:
        return 2 * FORMATS[self.sample_format].itemsize


@dataclass(frozen=True, eq=False)
class Table:
    columns: tuple
    rows: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.rows)[:, self.columns.index(name)]


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_iq(signal: IqSignal, path, sample_format: str = "cf32le",
             center_frequency_hz: float = 0.0, description: str = "") -> IqFileHeader:
    header = IqFileHeader(float(signal.sample_rate), sample_format, len(signal),
                          float(center_frequency_hz), description)
    pairs = np.empty((len(signal), 2), dtype=np.float64)
    pairs[:, 0] = signal.samples.real
    pairs[:, 1] = signal.samples.imag
    if sample_format == "ci16le":
        pairs = np.clip(np.round(pairs * CI16_SCALE), -32768, 32767)
    Path(path).write_bytes(pairs.astype(FORMATS[sample_format]).tobytes())
    meta = {
        "sample_rate_hz": header.sample_rate_hz,
        "center_frequency_hz": header.center_frequency_hz,
        "sample_format": header.sample_format,
        "num_samples": header.num_samples,
        "description": header.description,
    }
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return header


def read_header(path) -> IqFileHeader:
    try:
        meta = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
        return IqFileHeader(
            sample_rate_hz=float(meta["sample_rate_hz"]),
            sample_format=meta["sample_format"],
            num_samples=int(meta["num_samples"]),
            center_frequency_hz=float(meta.get("center_frequency_hz", 0.0)),
            description=str(meta.get("description", "")),
        )
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise IqFormatError(f"unreadable sidecar for {path}: {exc}") from exc


def read_iq(path) -> IqSignal:
    header = read_header(path)
    raw = Path(path).read_bytes()
    expected = header.num_samples * header.bytes_per_sample
    if len(raw) != expected:
        raise IqFormatError(
            f"payload holds {len(raw)} bytes, sidecar promises {expected}"
        )
    pairs = np.frombuffer(raw, dtype=FORMATS[header.sample_format]).reshape(-1, 2)
    if header.sample_format == "cf32le":
        samples = pairs.astype(np.float32).view(np.complex64).ravel()
    else:
        samples = (pairs[:, 0] + 1j * pairs[:, 1]) / CI16_SCALE
    return IqSignal(samples.copy(), header.sample_rate_hz)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if np.isnan(value):
            return "nan"
        if np.isinf(value):
            return "inf" if value > 0 else "-inf"
        return "%.17g" % float(value)
    return str(value)


def write_csv(table: Table, path) -> None:
    """Header row then one line per row; floats at 17 significant digits.

    Formatting goes through ``%`` on Python floats, which never consults
    the locale, so the decimal separator is always a point.
    """
    if hasattr(path, "write"):
        _write_rows(table, path)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_rows(table, fh)


def _write_rows(table: Table, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(v) for v in row])


def read_csv(path) -> Table:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        columns = tuple(next(reader))
        rows = [[float(v) for v in row] for row in reader]
    arr = np.array(rows, dtype=float) if rows else np.empty((0, len(columns)))
    return Table(columns, arr)
