import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from xmdl import coding as C
from xmdl import expfam as E
from xmdl import predict as P
from xmdl.errors import ConfigError, KraftViolation, StreamUnderflow


@st.composite
def length_functions(draw):
    k = draw(st.integers(1, 4))
    base = draw(st.sampled_from([2, 3]))
    w = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k)))
    shrink = draw(st.floats(0.3, 1.0))
    alphabet = tuple("abcd"[:k])
    return C.LengthFunction(alphabet, {a: -math.log(w[i] / w.sum() * shrink, base)
                                       for i, a in enumerate(alphabet)}, base)


@given(length_functions(), st.integers(1, 5))
def test_block_code_properties(lf, n):
    code = C.build_block_code(lf, n)
    assert len(code.codebook) == len(lf.alphabet) ** n
    assert C.check_prefix_free(code)
    assert code.kraft_sum() <= 1
    assert C.block_deviation(lf, code) <= 1.0 / n + 1e-12
    blocks = list(code.codebook)[:7]
    assert code.decode(code.encode(blocks)) == blocks


def test_exact_dyadic_lengths_are_kept():
    lf = C.LengthFunction.from_probs({"a": 0.5, "b": 0.25, "c": 0.25})
    code = C.build_block_code(lf, 2)
    assert code.lengths()[("a", "a")] == 2
    assert code.lengths()[("b", "c")] == 4
    assert code.kraft_sum() == Fraction(1)


def test_kraft_violation():
    lf = C.LengthFunction(("a", "b", "c"), {"a": 1.0, "b": 1.0, "c": 1.0})
    with pytest.raises(KraftViolation):
        C.build_block_code(lf, 1)
    with pytest.raises(ValueError):
        C.LengthFunction(("a",), {"a": -1.0})


def test_prefix_checker():
    assert C.check_prefix_free(["0", "10", "11"])
    assert not C.check_prefix_free(["0", "01", "11"])


@given(st.lists(st.floats(-30, 0), min_size=1, max_size=50), st.sampled_from([1 << 8, 1 << 16]))
def test_quantize(lps, total):
    f = C.quantize(lps, total)
    assert sum(f) == total and min(f) >= 1


@given(st.lists(st.integers(0, 1), max_size=300))
def test_bitstream_bytes_round_trip(bits):
    s = C.BitStream(bits)
    assert C.BitStream.from_bytes(s.to_bytes()) == s


@pytest.mark.parametrize("system", ["jeffreys", "snml", "plugin", "kt"])
@given(xs=st.lists(st.integers(0, 1), min_size=0, max_size=200), m=st.integers(0, 3))
def test_bernoulli_round_trip_and_bound(system, xs, m):
    F = E.bernoulli()
    m = min(m, len(xs))
    s = P.get_system(system, F)
    rep = C.encode_with_report(s, xs, m)
    assert C.arithmetic_decode(s, rep.stream, len(xs), m, xs[:m]) == xs[m:]
    assert rep.within_bound


def test_nml_round_trip():
    F = E.bernoulli()
    xs = np.random.default_rng(1).integers(0, 2, 64).tolist()
    s = P.NML(F, 64)
    st_ = C.arithmetic_encode(s, xs)
    assert C.arithmetic_decode(s, st_, 64) == xs


@given(st.lists(st.integers(0, 60), max_size=40))
def test_poisson_round_trip(xs):
    F = E.poisson()
    xs = [1] + xs
    s = P.BayesMixture(F, "jeffreys")
    rep = C.encode_with_report(s, xs, 1)
    assert C.arithmetic_decode(s, rep.stream, len(xs), 1, xs[:1]) == xs[1:]
    assert rep.within_bound


def test_poisson_escape():
    F = E.poisson()
    s = P.BayesMixture(F, "jeffreys")
    xs = [3, 0, 2, 100000, 1]
    rep = C.encode_with_report(s, xs, 1)
    assert rep.escapes == 1
    assert C.arithmetic_decode(s, rep.stream, len(xs), 1, xs[:1]) == xs[1:]


def test_deterministic_predictor_costs_at_most_two_bits():
    F = E.bernoulli()
    s = P.FixedElement(F, 1 - 1e-9)
    rep = C.encode_with_report(s, [1] * 500)
    assert rep.bits <= 2


def test_truncated_stream_underflows():
    F = E.bernoulli()
    s = P.BayesMixture(F, "jeffreys")
    xs = np.random.default_rng(5).integers(0, 2, 300).tolist()
    stream = C.arithmetic_encode(s, xs)
    short = C.BitStream(stream.bits[: len(stream) // 2])
    with pytest.raises(StreamUnderflow):
        C.arithmetic_decode(s, short, len(xs))


def test_container_round_trip_and_checks():
    F = E.bernoulli()
    s = P.BayesMixture(F, "jeffreys")
    xs = [1, 0, 1, 1, 0, 0, 0, 1, 1, 1]
    box = C.Container("bernoulli", 1, 2, len(xs), tuple(xs[:2]), C.arithmetic_encode(s, xs, 2))
    blob = C.pack(box)
    assert blob[:4] == b"XMDL"
    back = C.unpack(blob, "bernoulli")
    assert (back.m, back.n, back.prefix, back.system_code) == (2, 10, (1, 0), 1)
    assert C.arithmetic_decode(s, back.stream, back.n, back.m, back.prefix) == xs[2:]
    with pytest.raises(ConfigError):
        C.unpack(blob, "poisson")
    corrupt = bytearray(blob)
    corrupt[5] ^= 0xFF
    with pytest.raises(ConfigError):
        C.unpack(bytes(corrupt))
    with pytest.raises(StreamUnderflow):
        C.unpack(blob[:8])


def test_continuous_family_rejected():
    with pytest.raises(Exception):
        C.arithmetic_encode(P.BayesMixture(E.exponential(), "jeffreys"), [1.0, 2.0], 1)
