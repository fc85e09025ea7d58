import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisecheck import (
    CurvePoint,
    DegradationCurve,
    DuplicatePairError,
    ExperimentConfig,
    InvalidInputError,
    ParseError,
    StabilityCell,
    StabilityReport,
    SyntheticSpec,
    VectorTable,
    generate,
)
from noisecheck.io_formats import (
    fmt_real,
    parse_curve_csv,
    parse_dataset,
    parse_embeddings,
    parse_report_csv,
    write_curve_csv,
    write_dataset,
    write_embeddings,
    write_report_csv,
    write_svg_chart,
)


def _curve(means, label="c"):
    pts = tuple(CurvePoint(0.1 * i, m, 0.0, 5) for i, m in enumerate(means))
    return DegradationCurve(pts, label=label)


# datasets

def test_single_line_dataset():
    ds = parse_dataset("car auto 3.92\n")
    assert len(ds) == 1
    p = ds.pairs[0]
    assert (p.word_a, p.word_b, p.gold) == ("car", "auto", 3.92)


def test_non_numeric_score_reports_line_and_content():
    with pytest.raises(ParseError) as info:
        parse_dataset("a b x\n")
    assert info.value.line == 1
    assert "a b x" in str(info.value)


def test_unordered_duplicate_pair():
    with pytest.raises(DuplicatePairError) as info:
        parse_dataset("a b 1\nb a 2\n")
    assert info.value.line == 2


def test_comments_blank_lines_and_delimiters():
    text = "# header\n\ncar\tauto\t3.5\n  gem   jewel 4 \n"
    ds = parse_dataset(text)
    assert [p.word_a for p in ds.pairs] == ["car", "gem"]
    assert parse_dataset("x,y,1.5\n", "comma").pairs[0].gold == 1.5
    with pytest.raises(ParseError):
        parse_dataset("a b 1\n", "tab")


def test_wrong_column_count():
    with pytest.raises(ParseError) as info:
        parse_dataset("a b 1\na b c 2\n", name="f.tsv")
    assert info.value.line == 2
    assert "f.tsv" in str(info.value)


def test_scores_are_not_normalised():
    ds = parse_dataset("a b 50\nc d 0\n")
    assert ds.gold.tolist() == [50.0, 0.0]


# embeddings

def test_embeddings_with_header():
    t = parse_embeddings("2 2\nab 1 0\ncd 0 1\n")
    assert t.words == ("ab", "cd") and t.dimension == 2


def test_embeddings_without_header():
    t = parse_embeddings("w 0.5 0.5\n")
    assert t.dimension == 2 and t["w"].tolist() == [0.5, 0.5]


def test_embedding_dimension_mismatch():
    with pytest.raises(ParseError) as info:
        parse_embeddings("a 1 2\nb 1 2 3\n")
    assert info.value.line == 2 and "dimension" in str(info.value)


def test_embedding_duplicate_word_and_count_mismatch():
    with pytest.raises(ParseError):
        parse_embeddings("a 1\na 2\n")
    with pytest.raises(ParseError):
        parse_embeddings("3 1\na 1\nb 2\n")


# curves and reports

def test_single_point_curve_csv():
    c = DegradationCurve((CurvePoint(0.0, 1.0, 0.0, 5),))
    assert write_curve_csv(c) == "epsilon,mean_rho,var_rho,k\n0,1,0,5\n"


def test_curve_provenance_is_skipped_on_parse():
    c = _curve([1.0, 0.5, 0.25])
    text = write_curve_csv(c, {"seed": 7, "k": 5})
    assert text.startswith("# seed: 7\n")
    assert parse_curve_csv(text).points == c.points


def test_curve_csv_rejects_unsorted_epsilons():
    with pytest.raises(ParseError) as info:
        parse_curve_csv("epsilon,mean_rho,var_rho,k\n0.5,1,0,5\n0.1,1,0,5\n", name="c.csv")
    assert info.value.line == 3 and "c.csv" in str(info.value)


def test_report_row():
    cell = StabilityCell(30, 5, 200, 120, 0.01)
    report = StabilityReport((cell,), master_seed=1, config=ExperimentConfig())
    text = write_report_csv(report)
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    assert lines[0] == "n,k,repetitions,pass_count,pass_rate,pass_rate_stderr,mean_roughness"
    assert len(lines) == 2 and lines[1].startswith("30,5,200,120,0.59999999999999998,")
    (row,) = parse_report_csv(text)
    assert row["pass_rate"] == 0.6 and row["pass_rate_stderr"] == cell.pass_rate_stderr


# svg

def test_svg_polyline_count():
    svg = write_svg_chart([_curve([1, 0.5]), _curve([1, 0.9], "d")])
    assert svg.count("<polyline") == 2
    assert ">c<" in svg and ">d<" in svg


def test_svg_clips_and_has_no_negative_coordinates():
    svg = write_svg_chart([_curve([1.0, -1.0, 0.3])])
    pts = re.search(r'points="([^"]*)"', svg).group(1)
    coords = [float(v) for pair in pts.split() for v in pair.split(",")]
    assert min(coords) >= 0
    # rho = -1 is drawn at the lower edge of the plot, the same as -0.2
    frame = re.search(r'<rect x="(\d+)" y="(\d+)" width="(\d+)" height="(\d+)"/>', svg)
    bottom = int(frame.group(2)) + int(frame.group(4))
    assert coords[3] == bottom
    assert max(coords[1::2]) <= bottom


def test_svg_flat_curve_is_constant():
    svg = write_svg_chart([_curve([0.5, 0.5, 0.5])])
    ys = {p.split(",")[1] for p in re.search(r'points="([^"]*)"', svg).group(1).split()}
    assert len(ys) == 1


def test_svg_requires_a_curve():
    with pytest.raises(InvalidInputError):
        write_svg_chart([])


# round trips and robustness

reals = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_real_round_trips(x):
    assert float(fmt_real(x)) == x


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 40), st.integers(1, 12), st.integers(0, 2**32))
def test_synthetic_round_trip(n, d, seed):
    ds, table = generate(SyntheticSpec(n, d, seed))
    ds2 = parse_dataset(write_dataset(ds))
    assert ds2.pairs == ds.pairs
    assert parse_embeddings(write_embeddings(table)) == table
    assert parse_embeddings(write_embeddings(table, header=False)) == table


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(reals, min_size=3, max_size=3), min_size=1, max_size=5))
def test_embedding_round_trip_arbitrary_reals(rows):
    t = VectorTable([f"w{i}" for i in range(len(rows))], rows)
    assert parse_embeddings(write_embeddings(t)) == t


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(0, 1e6), st.integers(1, 1000)),
                min_size=1, max_size=20))
def test_curve_round_trip(rows):
    pts = tuple(CurvePoint(float(i) * 0.37, m, v, k) for i, (m, v, k) in enumerate(rows))
    c = DegradationCurve(pts)
    assert parse_curve_csv(write_curve_csv(c)).points == pts


@settings(max_examples=200, deadline=None)
@given(st.binary(max_size=200))
def test_parsers_raise_only_parse_errors_on_bytes(blob):
    for parse in (parse_dataset, parse_embeddings, parse_curve_csv, parse_report_csv):
        try:
            parse(blob)
        except ParseError as exc:
            assert exc.line is None or exc.line >= 1


def test_embedding_values_exact_after_round_trip():
    rng = np.random.default_rng(3)
    t = VectorTable(["a", "b"], rng.normal(size=(2, 7)) * 1e-300)
    assert np.array_equal(parse_embeddings(write_embeddings(t)).vectors, t.vectors)
