import io
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from reference_tables import DIMS, TABLE_I, TABLE_II_STAE
from stae import latency as lm
from stae.errors import ProfileError

MIB = 2**20


def test_raw_size_examples():
    assert lm.raw_size_bytes(16, 1.0, DIMS) == 9_633_792
    assert lm.raw_size_bytes(1, 0.4, DIMS) == 4 * 1 * 3 * 20070 == 240_840
    assert lm.raw_size_bytes(4, 0.4, DIMS) == 963_360
    assert 9_633_792 / MIB == pytest.approx(9.1875)


@pytest.mark.parametrize("a", sorted(TABLE_I))
def test_raw_sizes_match_table(a):
    s100, s40 = TABLE_I[a][1], TABLE_I[a][4]
    assert abs(lm.raw_size_bytes(a, 1.0, DIMS) / MIB - s100) <= 0.01
    assert abs(lm.raw_size_bytes(a, 0.4, DIMS) / MIB - s40) <= 0.01


@given(st.sampled_from([1, 2, 4, 8, 16]), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_raw_size_monotone(a, b1, b2):
    lo, hi = sorted((b1, b2))
    assert lm.raw_size_bytes(a, lo, DIMS) <= lm.raw_size_bytes(a, hi, DIMS)
    if a < 16:
        assert lm.raw_size_bytes(a, lo, DIMS) <= lm.raw_size_bytes(2 * a, lo, DIMS)


def test_coded_size_examples(profile):
    bits = lm.coded_size_bits(4, 0.4, DIMS, profile)
    assert bits == pytest.approx(240_840 * 12.89)
    assert bits == pytest.approx(3.10e6, rel=0.005)
    assert lm.comm_time_ms(bits, lm.LinkModel(100)) == pytest.approx(31.0, abs=0.1)
    assert lm.compression_ratio(1, 0.4, profile) == pytest.approx(16 / 1 * 100 / 40 * 32 / 12.26, rel=1e-3)
    assert lm.compression_ratio(1, 0.4, profile) == pytest.approx(104.4, abs=0.5)


def test_entropy_32_means_no_saving():
    csv = "\n".join([",".join(lm.CSV_COLUMNS), "stae,2,40,1,1,1,1,1,1,32,50,"]) + "\n"
    p = lm.load_profile(csv)
    assert lm.coded_size_bits(2, 0.4, DIMS, p) == 8 * lm.raw_size_bytes(2, 0.4, DIMS)


def test_comm_time():
    assert lm.comm_time_ms(1e6, lm.LinkModel(100)) == 10.0
    assert lm.comm_time_ms(1e6, lm.LinkModel(200)) == 5.0
    with pytest.raises(ValueError):
        lm.LinkModel(0)
    with pytest.raises(ValueError):
        lm.LinkModel(10, "bogus")


@given(st.floats(1e3, 1e9), st.floats(0.1, 1e4), st.floats(1.0001, 10))
def test_comm_time_strictly_decreasing(bits, g, factor):
    assert lm.comm_time_ms(bits, lm.LinkModel(g * factor)) < lm.comm_time_ms(bits, lm.LinkModel(g))


def test_compute_examples(profile):
    assert lm.compute_time_ms(4, 0.4, profile, True) == pytest.approx(2.7 + 30.3 + 5.90 + 4.91 + 4.9 + 18.7)
    assert lm.compute_time_ms(4, 0.4, profile, True) == pytest.approx(67.41)
    assert lm.compute_time_ms(16, 1.0, profile, False) == pytest.approx(31.5)
    assert lm.compute_time_ms(1, 1.0, profile, False) == pytest.approx(9.5)


def test_device_server_split_sums_to_compute(profile):
    for (a, pct) in TABLE_II_STAE:
        for e in (False, True):
            b = pct / 100
            total = lm.device_time_ms(a, b, profile, e) + lm.server_time_ms(a, b, profile, e)
            assert total == pytest.approx(lm.compute_time_ms(a, b, profile, e), abs=1e-12)


def test_completion_examples(profile):
    t_a = lm.completion_time_ms(4, 0.4, lm.LinkModel(100), profile, True)
    assert t_a == pytest.approx(98.4, abs=0.5)
    assert t_a == pytest.approx(240_840 * 12.89 / 1e5 + 67.41)
    t_b = lm.completion_time_ms(4, 1.0, lm.LinkModel(200), profile, True)
    assert t_b == pytest.approx(4 * 3 * 224 * 224 * 13.86 / 2e5 + 2.7 + 18.7 + 6.94 + 5.52)
    assert t_b == pytest.approx(75.6, abs=0.1)
    fast = lm.completion_time_ms(4, 0.4, lm.LinkModel(1e12), profile, True)
    assert fast == pytest.approx(lm.compute_time_ms(4, 0.4, profile, True), abs=1e-6)
    assert lm.completion_time_ms(4, 0.4, lm.LinkModel(1), profile, True, method="local") == 620


@given(st.sampled_from(sorted(TABLE_II_STAE)), st.booleans(), st.floats(0.5, 5000))
def test_completion_is_additive(key, ent, g):
    a, pct = key
    p = lm.default_profile()
    link = lm.LinkModel(g)
    bits = lm.payload_bits(a, pct / 100, DIMS, p, ent)
    assert lm.completion_time_ms(a, pct / 100, link, p, ent) == lm.comm_time_ms(bits, link) + lm.compute_time_ms(
        a, pct / 100, p, ent
    )
    assert bits <= 8 * lm.raw_size_bytes(a, pct / 100, DIMS)


def test_full_packet_convention_adds_overhead(profile):
    a = lm.transmitted_bits(4, 0.4, DIMS, profile, False, lm.LinkModel(100))
    b = lm.transmitted_bits(4, 0.4, DIMS, profile, False, lm.LinkModel(100, "full_packet"))
    assert b - a == 8 * (22 + 2 * 4 + 4 * 6272)


# -- profile loading ----------------------------------------------------------------

def test_default_profile_values(profile):
    assert profile.entry("stae", 16, 1.0).accuracy_pct == 73.3
    assert profile.entry("stae", 16, 1.0).accuracy_spread == 0.24
    assert profile.entry("stae", 1, 0.4).accuracy_pct == 68.1
    assert profile.entry("stae", 1, 0.4).entropy_bits == 12.26
    assert profile.entry("deepisc", 16, 0.4).t_fr_ms == 82.7
    assert profile.local_inference_time_ms == 620
    for a, row in TABLE_I.items():
        assert profile.entry("stae", a, 1.0).t_vit_ms == row[0]
        assert profile.entry("stae", a, 0.4).t_sa_ms == row[6]
        assert profile.entry("stae", a, 0.4).t_fr_ms == row[7]
        assert profile.entry("deepisc", a, 0.4).accuracy_pct == row[8]
    for (a, pct), (bits, ee, ed) in TABLE_II_STAE.items():
        e = profile.entry("stae", a, pct / 100)
        assert (e.entropy_bits, e.t_ee_ms, e.t_ed_ms) == (bits, ee, ed)


def test_interpolated_entries_are_flagged(profile):
    e = profile.entry("stae", 4, 0.7)
    assert e.interpolated
    assert e.accuracy_pct == pytest.approx((70.1 + 70.8) / 2)
    assert e.t_sa_ms == 30.3 and e.t_fr_ms == 4.9
    assert not profile.entry("stae", 4, 0.4).interpolated
    with pytest.raises(ProfileError):
        profile.entry("stae", 4, 0.7, interpolate=False)
    with pytest.raises(ProfileError):
        profile.entry("stae", 4, 0.3)
    with pytest.raises(ProfileError):
        profile.entry("deepisc", 4, 1.0)


def test_csv_roundtrip(profile, tmp_path):
    text = profile.to_csv()
    again = lm.load_profile(text)
    assert again.entries == profile.entries
    path = tmp_path / "p.csv"
    path.write_text(text)
    assert lm.load_profile(path).entries == profile.entries
    assert lm.load_profile(str(path)).entries == profile.entries
    assert lm.load_profile(io.StringIO(text)).entries == profile.entries
    assert again.to_csv() == text


HEADER = ",".join(lm.CSV_COLUMNS)


@pytest.mark.parametrize(
    "body",
    [
        "stae,4,40,1,1,1,1,1,1,12,70\n",  # short row
        "stae,x,40,1,1,1,1,1,1,12,70,0\n",
        "stae,4,40,1,1,1,1,1,1,12,abc,0\n",
        "stae,4,40,1,1,1,1,1,1,12,170,0\n",
        "stae,4,40,-1,1,1,1,1,1,12,70,0\n",
        "stae,4,40,1,1,1,1,1,1,40,70,0\n",
        "stae,4,0,1,1,1,1,1,1,12,70,0\n",
        "stae,4,40,1,1,1,1,1,1,12,70,0\nstae,4,40.0,1,1,1,1,1,1,12,70,0\n",  # duplicate
        "local,16,100,,,,,,,,73.3,\n",
        "",
    ],
)
def test_malformed_profiles_rejected(body):
    with pytest.raises(ProfileError):
        lm.load_profile(HEADER + "\n" + body)


def test_bad_header_rejected():
    with pytest.raises(ProfileError):
        lm.load_profile("a,b,c\n1,2,3\n")


def test_local_override(profile):
    p = profile.with_local_time(100)
    assert p.local_inference_time_ms == 100
    assert profile.local_inference_time_ms == 620
    assert math.isclose(p.local_accuracy_pct, 73.3)
