"""Spectrum files, run manifests, reproducible writes.

Spectra travel as two-column CSV with a header naming the schema:
``omega_rad_per_s,intensity`` for ideal densities (difference frequency in
rad/s) or ``wavelength_nm,counts`` for sampled spectra on a spectrometer
axis. Comment lines start with '#'. Floats are written with 17 significant
digits so write-then-read is lossless; all writes go to a temp file in the
target directory and are renamed into place.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .biphoton import SPEED_OF_LIGHT
from .errors import ConfigurationError, InputDataError
from .transform import FrequencyGrid, SpectralPattern

SCHEMA_VERSION = 1
OMEGA_HEADER = ("omega_rad_per_s", "intensity")
WAVELENGTH_HEADER = ("wavelength_nm", "counts")
_SNAP_RTOL = 1e-9
_MIN_ROWS = 16


def format_float(value: float) -> str:
    """17 significant digits: enough to reproduce any float64 exactly."""
    return format(float(value), ".17g")


def sha256_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def atomic_write_text(path, text: str) -> None:
    """Write via temp file in the same directory, then rename into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def difference_frequency_from_wavelength(
    wavelength: np.ndarray, center_wavelength: float
) -> np.ndarray:
    """Map a spectrometer wavelength axis (meters) to difference frequency.

    With a monochromatic pump, a signal photon detuned by d sits opposite
    an idler detuned by -d, so the difference frequency is twice the
    single-photon detuning: omega = 2 * 2 pi c (1/lambda - 1/lambda_c).
    """
    return 4.0 * math.pi * SPEED_OF_LIGHT * (1.0 / wavelength - 1.0 / center_wavelength)


def wavelength_from_difference_frequency(
    omega: np.ndarray, center_wavelength: float
) -> np.ndarray:
    inverse = omega / (4.0 * math.pi * SPEED_OF_LIGHT) + 1.0 / center_wavelength
    if np.any(inverse <= 0.0):
        raise ConfigurationError(
            "frequency grid extends past zero optical frequency for this center wavelength"
        )
    return 1.0 / inverse


def write_spectrum(
    path,
    pattern: SpectralPattern,
    center_wavelength: float = 810e-9,
    comments: tuple[str, ...] = (),
) -> None:
    """Write a spectrum CSV; schema follows the pattern kind.

    ideal-density patterns use the (omega_rad_per_s, intensity) schema;
    counts patterns use (wavelength_nm, counts) with the axis mapped
    through ``center_wavelength`` and rows sorted by wavelength.
    """
    lines = [f"# {c}" for c in comments]
    if pattern.kind == "ideal-density":
        lines.append(",".join(OMEGA_HEADER))
        for omega, value in zip(pattern.grid.values, pattern.values):
            lines.append(f"{format_float(omega)},{format_float(value)}")
    else:
        wavelength = wavelength_from_difference_frequency(
            pattern.grid.values, center_wavelength
        )
        counts = np.asarray(pattern.values)
        order = np.argsort(wavelength)
        lines.append(",".join(WAVELENGTH_HEADER))
        for lam, count in zip(wavelength[order], counts[order]):
            lines.append(f"{format_float(lam * 1e9)},{int(round(count))}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def _parse_rows(path) -> tuple[tuple[str, ...], list[tuple[float, float]]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputDataError(f"cannot read spectrum file {path}: {exc}") from exc
    header: tuple[str, ...] | None = None
    rows: list[tuple[float, float]] = []
    for line_no, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or (row[0].lstrip().startswith("#")):
            continue
        cells = [c.strip() for c in row]
        if header is None:
            header = tuple(cells)
            continue
        if len(cells) != 2:
            raise InputDataError(f"line {line_no}: expected 2 columns, got {len(cells)}")
        try:
            rows.append((float(cells[0]), float(cells[1])))
        except ValueError as exc:
            raise InputDataError(f"line {line_no}: non-numeric cell") from exc
    if header is None:
        raise InputDataError("spectrum file is empty (no header line)")
    return header, rows


def read_spectrum(path, center_wavelength: float = 810e-9) -> SpectralPattern:
    """Read a spectrum CSV onto a symmetric uniform frequency grid.

    The header names the schema. Abscissas must be strictly increasing and
    values nonnegative (counts additionally integral). Wavelength axes are
    converted to difference frequency first. An axis that already is a
    symmetric uniform midpoint grid (to 1e-9 relative) is adopted exactly;
    anything else is resampled by linear interpolation onto such a grid
    (counts rounded back to integers), zero-filled outside the data.
    """
    header, rows = _parse_rows(path)
    if header == OMEGA_HEADER:
        kind = "ideal-density"
    elif header == WAVELENGTH_HEADER:
        kind = "counts"
    else:
        raise InputDataError(f"unknown spectrum schema header {header!r}")
    if len(rows) < _MIN_ROWS:
        raise InputDataError(f"spectrum needs at least {_MIN_ROWS} rows, got {len(rows)}")
    abscissa = np.array([r[0] for r in rows])
    values = np.array([r[1] for r in rows])
    if not np.all(np.diff(abscissa) > 0.0):
        raise InputDataError("abscissa must be strictly increasing")
    if np.any(values < 0.0) or not np.all(np.isfinite(values)):
        raise InputDataError("spectrum values must be finite and nonnegative")
    if kind == "counts":
        if np.any(values != np.floor(values)):
            raise InputDataError("counts schema requires integer values")
        omega = difference_frequency_from_wavelength(abscissa * 1e-9, center_wavelength)
        order = np.argsort(omega)
        omega = omega[order]
        values = values[order]
    else:
        omega = abscissa

    grid, resampled = _to_midpoint_grid(omega, values, kind)
    return SpectralPattern(grid=grid, values=resampled, kind=kind)


def _to_midpoint_grid(
    omega: np.ndarray, values: np.ndarray, kind: str
) -> tuple[FrequencyGrid, np.ndarray]:
    n = omega.size if omega.size % 2 == 0 else omega.size - 1
    diffs = np.diff(omega)
    step = float(np.mean(diffs))
    span = omega[-1] - omega[0]
    uniform = float(np.max(np.abs(diffs - step))) <= _SNAP_RTOL * step
    symmetric = float(np.max(np.abs(omega + omega[::-1]))) <= _SNAP_RTOL * span
    if uniform and symmetric and omega.size % 2 == 0:
        grid = FrequencyGrid(omega_max=0.5 * step * omega.size, n_bins=omega.size)
        return grid, values.copy()
    omega_max = float(np.max(np.abs(omega)))
    grid = FrequencyGrid(omega_max=omega_max, n_bins=n)
    resampled = np.interp(grid.values, omega, values, left=0.0, right=0.0)
    if kind == "counts":
        resampled = np.rint(resampled)
    return grid, resampled


@dataclass(frozen=True)
class RunManifest:
    """Record of one CLI run: inputs, resolved SI configuration, outputs."""

    command: str
    config: dict
    seed: int | None
    version: str
    input_digests: dict = field(default_factory=dict)
    output_digests: dict = field(default_factory=dict)
    duration_seconds: float = 0.0
    schema_version: int = SCHEMA_VERSION


def write_manifest(path, manifest: RunManifest) -> None:
    atomic_write_text(path, json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> RunManifest:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputDataError(f"cannot read manifest {path}: {exc}") from exc
    try:
        return RunManifest(**payload)
    except TypeError as exc:
        raise InputDataError(f"manifest {path} has unexpected fields: {exc}") from exc


def write_json(path, payload: dict) -> None:
    """JSON with sorted keys; floats use Python's shortest exact repr."""
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_table(path, header: tuple[str, ...], rows, comments: tuple[str, ...] = ()) -> None:
    """Generic CSV: floats at 17 significant digits, ints and strings as-is."""
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, str):
                cells.append(cell)
            elif isinstance(cell, (int, np.integer)):
                cells.append(str(int(cell)))
            elif cell is None:
                cells.append("")
            else:
                value = float(cell)
                cells.append(format_float(value) if math.isfinite(value) else str(value))
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")
