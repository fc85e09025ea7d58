"""Readers and writers for datasets, embeddings, curves, reports and charts.

Reals are written with 17 significant digits, which round-trips every
float64 exactly and renders identically on every platform.
"""

from __future__ import annotations

import io
import json
import math
from html import escape
from typing import Any, Iterable, Iterator, Mapping, Sequence, TextIO, Union

import numpy as np

from .errors import DuplicatePairError, InvalidInputError, ParseError
from .meta_stability import StabilityReport
from .sanity_check import CheckVerdict, CurvePoint, DegradationCurve
from .synthetic import SimilarityDataset, WordPair
from .vector_space import VectorTable

__all__ = [
    "fmt_real",
    "parse_dataset",
    "write_dataset",
    "parse_embeddings",
    "write_embeddings",
    "write_curve_csv",
    "parse_curve_csv",
    "write_report_csv",
    "parse_report_csv",
    "write_svg_chart",
    "to_json",
    "CURVE_HEADER",
    "REPORT_HEADER",
]

Source = Union[str, bytes, TextIO, Iterable[str], Iterable[bytes]]

CURVE_HEADER = "epsilon,mean_rho,var_rho,k"
REPORT_HEADER = "n,k,repetitions,pass_count,pass_rate,pass_rate_stderr,mean_roughness"
DELIMITERS = {"whitespace": None, "tab": "\t", "comma": ","}


def fmt_real(x: float) -> str:
    return format(float(x), ".17g")


def _lines(source: Source, name: str | None) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, text without newline)."""
    if isinstance(source, bytes):
        source = source.splitlines()
    elif isinstance(source, str):
        source = source.splitlines()
    it = iter(source)
    lineno = 0
    while True:
        try:
            raw = next(it)
        except StopIteration:
            return
        except UnicodeDecodeError as exc:
            raise ParseError(f"undecodable text ({exc.reason})", lineno + 1, source=name) from None
        lineno += 1
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(f"undecodable text ({exc.reason})", lineno, source=name) from None
        yield lineno, raw.rstrip("\r\n")


def _real(token: str, lineno: int, line: str, name: str | None) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"not a number: {token!r}", lineno, line, name) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value: {token!r}", lineno, line, name)
    return value


def _split(line: str, delimiter: str | None) -> list[str]:
    if delimiter is None:
        return line.split()
    return [f.strip() for f in line.split(delimiter)]


def parse_dataset(source: Source, delimiter: str | None = None, *, name: str | None = None,
                  label: str = "") -> SimilarityDataset:
    """Parse ``word_a word_b score`` lines.

    ``delimiter=None`` splits on any run of whitespace; pass ``"\\t"`` or
    ``","`` for strict files. Blank lines and lines starting with ``#``
    are skipped.
    """
    if delimiter in DELIMITERS:
        delimiter = DELIMITERS[delimiter]
    pairs: list[WordPair] = []
    seen: dict[frozenset[str], int] = {}
    for lineno, line in _lines(source, name):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = _split(line, delimiter)
        if len(fields) != 3:
            raise ParseError(f"expected 3 columns, found {len(fields)}", lineno, line, name)
        a, b, score = fields
        for w in (a, b):
            if not w or any(c.isspace() for c in w):
                raise ParseError(f"invalid word {w!r}", lineno, line, name)
        if a == b:
            raise ParseError(f"word paired with itself: {a!r}", lineno, line, name)
        key = frozenset((a, b))
        if key in seen:
            raise DuplicatePairError(f"duplicate pair ({a}, {b}), first seen on line {seen[key]}",
                                     lineno, line, name)
        seen[key] = lineno
        pairs.append(WordPair(a, b, _real(score, lineno, line, name)))
    return SimilarityDataset(tuple(pairs), label=label)


def write_dataset(ds: SimilarityDataset) -> str:
    """Tab-separated ``word_a word_b score`` lines."""
    return "".join(f"{a}\t{b}\t{fmt_real(g)}\n" for a, b, g in ds)


def _is_int(token: str) -> bool:
    try:
        int(token)
    except ValueError:
        return False
    return True


def parse_embeddings(source: Source, *, name: str | None = None) -> VectorTable:
    """Parse the word2vec text format.

    An optional first line ``vocab_count dimension`` is recognised when it
    has exactly two integer tokens; otherwise the dimension is taken from
    the first row.
    """
    words: list[str] = []
    rows: list[list[float]] = []
    index: dict[str, int] = {}
    dim: int | None = None
    declared_count: int | None = None
    first = True
    for lineno, line in _lines(source, name):
        tokens = line.split()
        if not tokens:
            continue
        if first:
            first = False
            if len(tokens) == 2 and _is_int(tokens[0]) and _is_int(tokens[1]):
                declared_count, dim = int(tokens[0]), int(tokens[1])
                if declared_count < 0 or dim < 1:
                    raise ParseError("header must declare count >= 0 and dimension >= 1", lineno, line, name)
                continue
        word, values = tokens[0], tokens[1:]
        if dim is None:
            if not values:
                raise ParseError("row has no vector components", lineno, line, name)
            dim = len(values)
        if len(values) != dim:
            raise ParseError(f"dimension mismatch: expected {dim} components, found {len(values)}",
                             lineno, line, name)
        if word in index:
            raise ParseError(f"duplicate word {word!r} (first on line {index[word]})", lineno, line, name)
        index[word] = lineno
        words.append(word)
        rows.append([_real(v, lineno, line, name) for v in values])
    if dim is None:
        raise ParseError("no vectors found", None, None, name)
    if declared_count is not None and declared_count != len(words):
        raise ParseError(f"header declares {declared_count} words but {len(words)} were read",
                         None, None, name)
    try:
        return VectorTable(words, np.array(rows, dtype=np.float64).reshape(len(words), dim))
    except InvalidInputError as exc:
        raise ParseError(str(exc), None, None, name) from None


def write_embeddings(table: VectorTable, header: bool = True) -> str:
    out = io.StringIO()
    if header:
        out.write(f"{len(table)} {table.dimension}\n")
    for w, vec in zip(table.words, table.vectors):
        out.write(w + " " + " ".join(fmt_real(x) for x in vec) + "\n")
    return out.getvalue()


def _provenance_lines(provenance: Mapping[str, Any] | None) -> str:
    if not provenance:
        return ""
    return "".join(f"# {key}: {value}\n" for key, value in provenance.items())


def write_curve_csv(curve: DegradationCurve, provenance: Mapping[str, Any] | None = None) -> str:
    """CSV with header ``epsilon,mean_rho,var_rho,k``, one row per point.

    ``provenance`` entries, if given, are prepended as ``# key: value``
    comment lines, which :func:`parse_curve_csv` skips.
    """
    eps = [p.epsilon for p in curve.points]
    assert all(b > a for a, b in zip(eps, eps[1:]))
    lines = [_provenance_lines(provenance), CURVE_HEADER, "\n"]
    for p in curve.points:
        lines.append(f"{fmt_real(p.epsilon)},{fmt_real(p.mean_rho)},{fmt_real(p.var_rho)},{p.k}\n")
    return "".join(lines)


def _csv_rows(source: Source, header: str, name: str | None) -> Iterator[tuple[int, str, list[str]]]:
    seen_header = False
    for lineno, line in _lines(source, name):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if not seen_header:
            if stripped != header:
                raise ParseError(f"expected header {header!r}", lineno, line, name)
            seen_header = True
            continue
        fields = stripped.split(",")
        if len(fields) != header.count(",") + 1:
            raise ParseError(f"expected {header.count(',') + 1} fields, found {len(fields)}",
                             lineno, line, name)
        yield lineno, line, fields
    if not seen_header:
        raise ParseError("missing header line", None, None, name)


def _int(token: str, lineno: int, line: str, name: str | None) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"not an integer: {token!r}", lineno, line, name) from None


def parse_curve_csv(source: Source, *, name: str | None = None, label: str = "") -> DegradationCurve:
    points = []
    for lineno, line, (e, m, v, k) in _csv_rows(source, CURVE_HEADER, name):
        try:
            point = CurvePoint(_real(e, lineno, line, name), _real(m, lineno, line, name),
                               _real(v, lineno, line, name), _int(k, lineno, line, name))
        except InvalidInputError as exc:
            raise ParseError(str(exc), lineno, line, name) from None
        if points and point.epsilon <= points[-1].epsilon:
            raise ParseError("epsilon values must be strictly increasing", lineno, line, name)
        points.append(point)
    if not points:
        raise ParseError("curve has no data rows", None, None, name)
    return DegradationCurve(tuple(points), label=label)


def write_report_csv(report: StabilityReport, provenance: Mapping[str, Any] | None = None) -> str:
    lines = [_provenance_lines(provenance), REPORT_HEADER, "\n"]
    for c in report.cells:
        lines.append(",".join([
            str(c.n_pairs), str(c.k), str(c.repetitions), str(c.pass_count),
            fmt_real(c.pass_rate), fmt_real(c.pass_rate_stderr), fmt_real(c.mean_roughness),
        ]) + "\n")
    return "".join(lines)


def parse_report_csv(source: Source, *, name: str | None = None) -> list[dict[str, float]]:
    """Rows of a report CSV as dicts keyed by the header columns."""
    cols = REPORT_HEADER.split(",")
    rows = []
    for lineno, line, fields in _csv_rows(source, REPORT_HEADER, name):
        row: dict[str, float] = {}
        for col, tok in zip(cols, fields):
            if col in ("n", "k", "repetitions", "pass_count"):
                row[col] = _int(tok, lineno, line, name)
            else:
                row[col] = _real(tok, lineno, line, name)
        rows.append(row)
    return rows


def to_json(obj: CheckVerdict | DegradationCurve | StabilityReport, **kwargs) -> str:
    return json.dumps(obj.to_dict(**kwargs), indent=2) + "\n"


# chart geometry
_W, _H = 640, 420
_LEFT, _RIGHT, _TOP, _BOTTOM = 60, 150, 20, 50
_YMIN, _YMAX = -0.2, 1.05
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _nice_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9)
    ticks = []
    i = first
    while i * step <= hi + 1e-9:
        ticks.append(round(i * step, 10))
        i += 1
    return ticks


def write_svg_chart(curves: Sequence[DegradationCurve], title: str = "",
                    comment: str | None = None) -> str:
    """Static SVG line chart: noise magnitude on x, mean rho on y, one polyline per curve."""
    if not curves:
        raise InvalidInputError("need at least one curve to plot")
    x_max = max(float(c.epsilons[-1]) for c in curves)
    if x_max <= 0:
        x_max = 1.0
    pw = _W - _LEFT - _RIGHT
    ph = _H - _TOP - _BOTTOM

    def sx(x: float) -> float:
        return _LEFT + pw * (x / x_max)

    def sy(y: float) -> float:
        y = min(_YMAX, max(_YMIN, y))
        return _TOP + ph * (_YMAX - y) / (_YMAX - _YMIN)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
    ]
    if comment:
        out.append(f"<!-- {escape(comment.replace('--', '- -'))} -->")
    out.append(f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>')
    if title:
        out.append(f'<text x="{_LEFT + pw / 2:.2f}" y="14" text-anchor="middle" font-size="12" '
                   f'font-family="sans-serif">{escape(title)}</text>')
    out.append('<g stroke="#999" stroke-width="1" fill="none">')
    out.append(f'<rect x="{_LEFT}" y="{_TOP}" width="{pw}" height="{ph}"/>')
    out.append("</g>")
    out.append('<g font-size="10" font-family="sans-serif" fill="#333">')
    for t in _nice_ticks(_YMIN, _YMAX):
        y = sy(t)
        out.append(f'<line x1="{_LEFT - 4}" y1="{y:.2f}" x2="{_LEFT}" y2="{y:.2f}" stroke="#999"/>')
        out.append(f'<text x="{_LEFT - 6}" y="{y + 3:.2f}" text-anchor="end">{t:g}</text>')
    for t in _nice_ticks(0.0, x_max):
        x = sx(t)
        out.append(f'<line x1="{x:.2f}" y1="{_TOP + ph}" x2="{x:.2f}" y2="{_TOP + ph + 4}" stroke="#999"/>')
        out.append(f'<text x="{x:.2f}" y="{_TOP + ph + 16}" text-anchor="middle">{t:g}</text>')
    out.append(f'<text x="{_LEFT + pw / 2:.2f}" y="{_H - 12}" text-anchor="middle">maximum random noise</text>')
    out.append(f'<text x="14" y="{_TOP + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {_TOP + ph / 2:.2f})">Spearman rho</text>')
    out.append("</g>")
    for i, c in enumerate(curves):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{sx(p.epsilon):.2f},{sy(p.mean_rho):.2f}" for p in c.points)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
    out.append('<g font-size="11" font-family="sans-serif">')
    for i, c in enumerate(curves):
        color = _COLORS[i % len(_COLORS)]
        y = _TOP + 14 + 18 * i
        x = _W - _RIGHT + 12
        out.append(f'<line x1="{x}" y1="{y - 4}" x2="{x + 20}" y2="{y - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{x + 26}" y="{y}">{escape(c.label or f"curve {i + 1}")}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
