"""CSV readers and writers for potentials, matrices, spectra and reports.

Floats are written with 17 significant digits, which round-trips doubles.
"""
import csv
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np

from hillspec.errors import PotentialError, PotentialFileError
from hillspec.services.eig import SpectrumResult
from hillspec.services.locate import LocalizationReport
from hillspec.services.operator import TruncatedOperator
from hillspec.services.resolvent import RieszCount
from hillspec.services.seqspace import CoeffSeq

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

POTENTIAL_HEADER = ["k", "re", "im"]
MATRIX_HEADER = ["k", "j", "re", "im"]
SPECTRUM_HEADER = ["index", "re", "im", "residual"]
REPORT_HEADER = ["n", "dev_odd", "dev_even", "bound", "pass"]
SUMMARY_HEADER = ["cone_count", "expected", "M", "n0", "certified"]
CERTIFICATE_HEADER = ["s", "trace_re", "trace_im", "count", "valid"]


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def fmt_bool(flag: bool) -> str:
    return "true" if flag else "false"


def _write_rows(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    logger.debug(f"Wrote {path}")
    return path


def sha256_file(path: PathLike) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# Potentials
def ingest_potential(path: PathLike) -> CoeffSeq:
    """Read a `k,re,im` coefficient file; the header line is optional"""
    path = Path(path)
    if not path.is_file():
        raise PotentialFileError(f"Potential file not found: {path}")
    entries: Dict[int, complex] = {}
    with path.open(newline="") as f:
        for line_no, row in enumerate(csv.reader(f), start=1):
            row = [cell.strip() for cell in row]
            if not row or (len(row) == 1 and not row[0]) or row[0].startswith("#"):
                continue
            if line_no == 1 and row == POTENTIAL_HEADER:
                continue
            if len(row) != 3:
                raise PotentialFileError(f"{path}:{line_no}: expected 3 columns k,re,im, got {len(row)}")
            try:
                k = int(row[0])
                re, im = float(row[1]), float(row[2])
            except ValueError:
                raise PotentialFileError(f"{path}:{line_no}: malformed row {row}")
            if not (math.isfinite(re) and math.isfinite(im)):
                raise PotentialFileError(f"{path}:{line_no}: non-finite coefficient at k={k}")
            if k in entries:
                raise PotentialFileError(f"{path}:{line_no}: duplicate index k={k}")
            entries[k] = complex(re, im)
    try:
        v = CoeffSeq(entries)
    except PotentialError as e:
        raise PotentialFileError(f"{path}: {e}")
    logger.info(f"Loaded {len(v)} coefficients from {path}")
    return v


# Operator sections
def write_matrix(path: PathLike, A: TruncatedOperator) -> Path:
    """Nonzero entries as `k,j,re,im` rows"""
    return _write_rows(path, MATRIX_HEADER,
                       ([str(k), str(j), fmt(a.real), fmt(a.imag)] for k, j, a in A.nonzero_entries()))


# Spectra
def write_spectrum(path: PathLike, result: SpectrumResult) -> List[Path]:
    """Spectrum CSV plus a `.meta.json` sidecar with the run metadata"""
    path = Path(path)
    rows = ([str(i), fmt(lam.real), fmt(lam.imag), fmt(res)]
            for i, (lam, res) in enumerate(zip(result.eigenvalues, result.residuals)))
    csv_path = _write_rows(path, SPECTRUM_HEADER, rows)
    meta_path = path.with_suffix(".meta.json")
    meta_path.write_text(json.dumps(result.metadata(), indent=2, sort_keys=True) + "\n")
    return [csv_path, meta_path]


def write_truncation(path: PathLike, rows: Sequence) -> Path:
    """Leading eigenvalues per K as `K,index,re,im,max_change`"""
    def lines():
        for row in rows:
            change = "" if row.max_change is None else fmt(row.max_change)
            for i, lam in enumerate(row.leading):
                yield [str(row.K), str(i), fmt(lam.real), fmt(lam.imag), change]
    return _write_rows(path, ["K", "index", "re", "im", "max_change"], lines())


# Localization reports
def write_report(report_path: PathLike, summary_path: PathLike, report: LocalizationReport) -> List[Path]:
    rows = ([str(d.n), fmt(d.dev_odd), fmt(d.dev_even), fmt(d.bound), fmt_bool(d.passed)] for d in report.discs)
    summary = [[str(report.cone_count), str(report.expected_cone_count), fmt(report.M), str(report.n0),
                fmt_bool(report.certified)]]
    return [_write_rows(report_path, REPORT_HEADER, rows), _write_rows(summary_path, SUMMARY_HEADER, summary)]


def write_ratios(path: PathLike, ratios: Sequence) -> Path:
    return _write_rows(path, ["n", "ratio"], ([str(n), fmt(r)] for n, r in ratios))


# Contour certificates
def write_certificate(path: PathLike, counts: Sequence[RieszCount]) -> Path:
    rows = ([fmt(c.s), fmt(c.trace.real), fmt(c.trace.imag), str(c.count), fmt_bool(c.valid)] for c in counts)
    return _write_rows(path, CERTIFICATE_HEADER, rows)


def write_table(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Generic numeric table; floats formatted with 17 digits"""
    def cell(x):
        if isinstance(x, bool):
            return fmt_bool(x)
        if isinstance(x, (float, np.floating)):
            return fmt(x)
        return str(x)
    return _write_rows(path, header, ([cell(x) for x in row] for row in rows))
