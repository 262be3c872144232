"""Pulse CSV and spectrum JSON readers/writers.

Pulse file: CSV with header ``t,re_q,im_q`` and one row per uniform sample.

Spectrum file::

    {"eigenvalues": [{"re": .., "im": ..}, ...],
     "qd":          [{"re": .., "im": ..}, ...],
     "b":           [{"re": .., "im": ..}, ...],          (optional)
     "qc": {"lambda": [..], "re": [..], "im": [..]},      (optional)
     "metadata": {...}}                                    (optional)

Floats are written with ``repr`` (shortest round-trip, at most 17 digits) so
that a write/read cycle is lossless.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import SpectrumFormatError
from .spectra import ContinuousSpectrum, DiscreteSpectrum, NonlinearSpectrum, SampledPulse

PULSE_HEADER = ("t", "re_q", "im_q")


def _fmt(x: float) -> str:
    return repr(float(x))


def pulse_to_csv(pulse: SampledPulse, t_offset: float = 0.0) -> str:
    buf = io.StringIO()
    buf.write(",".join(PULSE_HEADER) + "\n")
    for t, q in zip(pulse.t + t_offset, pulse.samples):
        buf.write(f"{_fmt(t)},{_fmt(q.real)},{_fmt(q.imag)}\n")
    return buf.getvalue()


def write_pulse_csv(path, pulse: SampledPulse, t_offset: float = 0.0) -> None:
    Path(path).write_text(pulse_to_csv(pulse, t_offset))


def parse_pulse_csv(text: str, rtol: float = 1e-9) -> tuple[SampledPulse, float]:
    """Parse pulse CSV text.

    Returns the pulse on its symmetric window together with the window centre;
    a non-zero centre has to be compensated with ``time_shift_correction``.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = tuple(h.strip() for h in next(reader))
    except StopIteration:
        raise SpectrumFormatError("empty pulse file") from None
    if header != PULSE_HEADER:
        raise SpectrumFormatError(f"expected header {','.join(PULSE_HEADER)}, got {','.join(header)}")
    rows = [r for r in reader if r and any(c.strip() for c in r)]
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise SpectrumFormatError(f"non-numeric pulse entry: {exc}") from None
    if data.ndim != 2 or data.shape[1] != 3 or data.shape[0] < 2:
        raise SpectrumFormatError("pulse file needs at least two rows of three columns")
    t = data[:, 0]
    dt = np.diff(t)
    h = (t[-1] - t[0]) / (t.size - 1)
    if h <= 0 or np.max(np.abs(dt - h)) > rtol * max(abs(h), 1.0) * 10:
        raise SpectrumFormatError("time column is not uniformly increasing")
    centre = 0.5 * (t[0] + t[-1])
    if abs(centre) < rtol * (t[-1] - t[0]):
        centre = 0.0
    pulse = SampledPulse(0.5 * (t[-1] - t[0]), data[:, 1] + 1j * data[:, 2])
    return pulse, centre


def read_pulse_csv(path) -> tuple[SampledPulse, float]:
    return parse_pulse_csv(Path(path).read_text())


def _complex_list(items, name: str) -> np.ndarray:
    if not isinstance(items, list):
        raise SpectrumFormatError(f"'{name}' must be a list")
    out = []
    for k, item in enumerate(items):
        if not isinstance(item, dict) or "re" not in item or "im" not in item:
            raise SpectrumFormatError(f"'{name}[{k}]' must be an object with 're' and 'im'")
        try:
            out.append(complex(float(item["re"]), float(item["im"])))
        except (TypeError, ValueError):
            raise SpectrumFormatError(f"'{name}[{k}]' is not numeric") from None
    return np.array(out, dtype=complex)


def _to_list(z) -> list:
    return [{"re": float(np.real(v)), "im": float(np.imag(v))} for v in np.asarray(z).reshape(-1)]


def spectrum_from_dict(doc: dict) -> NonlinearSpectrum:
    """Build a spectrum from a decoded JSON document.

    Raises ``SpectrumFormatError`` for structural problems; duplicate or
    lower-half-plane eigenvalues surface as the errors of ``DiscreteSpectrum``.
    """
    if not isinstance(doc, dict):
        raise SpectrumFormatError("spectrum document must be a JSON object")
    eig = _complex_list(doc.get("eigenvalues", []), "eigenvalues")
    qd = _complex_list(doc.get("qd", []), "qd")
    if eig.size != qd.size:
        raise SpectrumFormatError("'eigenvalues' and 'qd' differ in length")
    b = _complex_list(doc["b"], "b") if doc.get("b") is not None else None
    if b is not None and b.size != eig.size:
        raise SpectrumFormatError("'b' and 'eigenvalues' differ in length")
    if np.any(eig.imag <= 0):
        raise SpectrumFormatError("eigenvalues must lie in the upper half-plane")
    discrete = DiscreteSpectrum(eig, qd, b)
    continuous = None
    qc = doc.get("qc")
    if qc is not None:
        try:
            lam = np.asarray(qc["lambda"], dtype=float)
            vals = np.asarray(qc["re"], dtype=float) + 1j * np.asarray(qc["im"], dtype=float)
            continuous = ContinuousSpectrum(lam, vals)
        except (KeyError, TypeError, ValueError) as exc:
            raise SpectrumFormatError(f"malformed 'qc' block: {exc}") from None
    return NonlinearSpectrum(discrete, continuous)


def spectrum_to_dict(spec: NonlinearSpectrum, metadata: dict | None = None) -> dict:
    doc = {
        "eigenvalues": _to_list(spec.discrete.eigenvalues),
        "qd": _to_list(spec.discrete.qd),
    }
    if spec.discrete.b is not None:
        doc["b"] = _to_list(spec.discrete.b)
    if spec.continuous is not None:
        # NaN marks grid points where a(lambda) vanished; JSON has no NaN, use null
        def clean(v):
            return [None if not math.isfinite(x) else float(x) for x in v]

        doc["qc"] = {
            "lambda": [float(x) for x in spec.continuous.lambda_grid],
            "re": clean(spec.continuous.qc.real),
            "im": clean(spec.continuous.qc.imag),
        }
    if metadata:
        doc["metadata"] = metadata
    return doc


def read_spectrum_json(path) -> NonlinearSpectrum:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SpectrumFormatError(f"invalid JSON: {exc}") from None
    return spectrum_from_dict(doc)


def write_spectrum_json(path, spec: NonlinearSpectrum, metadata: dict | None = None) -> None:
    text = json.dumps(spectrum_to_dict(spec, metadata), indent=2, sort_keys=False)
    Path(path).write_text(text + "\n")
