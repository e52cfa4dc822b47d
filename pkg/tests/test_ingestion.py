import io
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cruc.errors import EmptyMatrix, IoFailure, MalformedLine, ZeroTotalDwell
from cruc.ingestion import (
    DEFAULT_SCALES,
    SensorEvent,
    compute_stats,
    dwell_proportions,
    parse_iot_events,
    parse_movielens,
    reformulate_iot,
)
from cruc.matrix import RatingScale, build_matrix, density

from .conftest import FIXTURE_1K

EXPECTED = [("1", "10", 4.0), ("1", "20", 2.5), ("7", "10", 5.0)]


def test_three_line_tab_file(tmp_path):
    path = tmp_path / "u.data"
    path.write_text("1\t10\t4\t881250949\n1\t20\t2.5\t881250950\n7\t10\t5\t881250951\n")
    triples, stats = parse_movielens(path, "tab-separated")
    assert list(triples) == EXPECTED
    assert (stats.n_users, stats.n_items, stats.n_ratings, stats.n_skipped) == (2, 2, 3, 0)


def test_three_line_double_colon_file(tmp_path):
    path = tmp_path / "ratings.dat"
    path.write_text("1::10::4::881250949\n1::20::2.5::881250950\n7::10::5::881250951\n")
    triples, _ = parse_movielens(path, "double-colon")
    assert list(triples) == EXPECTED


def test_bytes_and_stream_sources():
    data = b"1\t10\t4\t1\n\n1\t20\t2.5\t2\r\n7\t10\t5\t3"
    assert list(parse_movielens(data)[0]) == EXPECTED
    assert list(parse_movielens(io.StringIO(data.decode()))[0]) == EXPECTED


def test_stdin_source(monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("1::10::4::0\n"))
    triples, _ = parse_movielens("-", "double-colon")
    assert list(triples) == [("1", "10", 4.0)]


def test_empty_file_gives_no_triples(tmp_path):
    path = tmp_path / "empty"
    path.write_text("")
    triples, stats = parse_movielens(path)
    assert len(triples) == 0 and stats.n_ratings == 0
    with pytest.raises(EmptyMatrix):
        density(build_matrix(triples, DEFAULT_SCALES["tab-separated"]))


@pytest.mark.parametrize(
    "bad",
    ["1\t10\t4", "1\t10\tfour\t0", "1\t10\t4\tnoon", "\t10\t4\t0", "1\t10\t4\t0\textra", "1\t10\tnan\t0"],
)
def test_strict_mode_reports_line(bad):
    data = f"1\t10\t4\t0\n{bad}\n2\t10\t3\t0\n"
    with pytest.raises(MalformedLine) as info:
        parse_movielens(data.encode())
    assert info.value.line_no == 2


def test_lenient_mode_counts_skips():
    data = b"1\t10\t4\t0\ngarbage\n2\t10\t3\t0\n1::2::3::4\n"
    triples, stats = parse_movielens(data, strict=False)
    assert len(triples) == 2 and stats.n_skipped == 2


def test_missing_file_is_io_failure(tmp_path):
    with pytest.raises(IoFailure):
        parse_movielens(tmp_path / "nope.dat")


def test_unknown_format():
    with pytest.raises(ValueError):
        parse_movielens(b"", "csv")


def test_bundled_fixture_stats():
    triples, stats = parse_movielens(FIXTURE_1K)
    assert (stats.n_users, stats.n_items, stats.n_ratings) == (50, 80, 1000)
    assert stats.density == 0.25
    assert stats.avg_items_per_user == 20.0
    assert stats.avg_users_per_item == 12.5
    assert stats == compute_stats(triples)


lines = st.lists(
    st.tuples(st.integers(1, 30), st.integers(1, 30), st.sampled_from(["1", "2.5", "3", "4.5", "5"])),
    max_size=60,
)


@settings(max_examples=60, deadline=None)
@given(lines, st.lists(st.sampled_from(["", "junk", "1\t2", "  "]), max_size=10))
def test_streaming_stats_match_recomputed(records, noise):
    body = [f"{u}\t{i}\t{r}\t0" for u, i, r in records] + noise
    text = "\n".join(body).encode()
    triples, stats = parse_movielens(text, strict=False)
    assert len(triples) == len(records)
    assert stats.n_skipped == sum(1 for x in noise if x.strip())
    again = compute_stats(triples)
    for name in stats.FIELDS:
        a, b = getattr(stats, name), getattr(again, name)
        assert a == b or (math.isnan(a) and math.isnan(b))
    if records:
        assert stats.density == stats.n_ratings / (stats.n_users * stats.n_items)
        assert stats.avg_items_per_user == stats.n_ratings / stats.n_users


def test_stats_format_lists_fields_in_order():
    _, stats = parse_movielens(b"1\t10\t4\t0\n2\t10\t3\t0\n")
    keys = [line.split(":")[0] for line in stats.format().splitlines()]
    assert keys == list(stats.FIELDS)


def test_single_location_gets_scale_max():
    out = reformulate_iot([SensorEvent("u", "kitchen", 30.0)], RatingScale(1, 5))
    assert list(out) == [("u", "kitchen", 5.0)]


def test_equal_dwell_maps_to_midpoint():
    events = [SensorEvent("u", "a", 10.0), SensorEvent("u", "b", 4.0), SensorEvent("u", "b", 6.0)]
    assert sorted(reformulate_iot(events, RatingScale(1, 5))) == [("u", "a", 3.0), ("u", "b", 3.0)]


def test_zero_total_dwell():
    with pytest.raises(ZeroTotalDwell):
        reformulate_iot([SensorEvent("u", "a", 0.0), SensorEvent("v", "a", 1.0)], RatingScale(1, 5))


def test_parse_iot_file(tmp_path):
    path = tmp_path / "events.tsv"
    path.write_text("u1\tbedroom\t120\nu1\tkitchen\t40.5\nbroken line\nu2\tbedroom\t-3\n")
    events, skipped = parse_iot_events(path, strict=False)
    assert events == [SensorEvent("u1", "bedroom", 120.0), SensorEvent("u1", "kitchen", 40.5)]
    assert skipped == 2
    with pytest.raises(MalformedLine):
        parse_iot_events(path)


event_lists = st.lists(
    st.tuples(st.sampled_from("uvw"), st.sampled_from("abcd"), st.floats(0.01, 1e4)), min_size=1, max_size=30
)


@settings(max_examples=100, deadline=None)
@given(event_lists, st.floats(0.1, 100))
def test_proportions_simplex_and_scale_invariance(events, factor):
    events = [SensorEvent(*e) for e in events]
    dist = dwell_proportions(events)
    for locs in dist.values():
        assert all(p >= 0 for p in locs.values())
        assert math.fsum(locs.values()) == pytest.approx(1.0, abs=1e-9)
    scale = RatingScale(1, 5)
    base = {(u, l): r for u, l, r in reformulate_iot(events, scale)}
    scaled = {(u, l): r for u, l, r in reformulate_iot([e._replace(dwell=e.dwell * factor) for e in events], scale)}
    assert base.keys() == scaled.keys()
    for key in base:
        assert scaled[key] == pytest.approx(base[key], abs=1e-9)
        assert scale.min <= base[key] <= scale.max


@settings(max_examples=100, deadline=None)
@given(event_lists)
def test_doubling_dwell_is_exact(events):
    events = [SensorEvent(*e) for e in events]
    doubled = [e._replace(dwell=e.dwell * 2) for e in events]
    assert list(reformulate_iot(doubled, RatingScale(1, 5))) == list(reformulate_iot(events, RatingScale(1, 5)))
