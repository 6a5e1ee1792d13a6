"""Codes from length functions and an arithmetic codec driven by prediction systems.

The block-code construction rounds the block length sum(l(a_i)) up to an
integer and assigns canonical codewords in base beta.  The arithmetic coder
is a fixed-precision integer coder (P-bit registers, pending "follow" bits
for carries) with next-symbol probabilities quantized to 2^freq_bits
counts, every coded symbol getting at least one count.
"""
from __future__ import annotations

import itertools
import math
import struct
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError, KraftViolation, StreamUnderflow, ZeroProbability

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class LengthFunction:
    alphabet: tuple
    lengths: dict
    output_base: int = 2

    def __post_init__(self):
        if self.output_base < 2 or self.output_base > len(_DIGITS):
            raise ValueError(f"output base must lie in [2, {len(_DIGITS)}]")
        if set(self.lengths) != set(self.alphabet):
            raise ValueError("lengths must cover exactly the alphabet")
        for v in self.lengths.values():
            if not (math.isfinite(v) and v >= 0):
                raise ValueError("code lengths must be finite and nonnegative")

    @classmethod
    def from_probs(cls, probs: dict, base: int = 2) -> "LengthFunction":
        return cls(tuple(probs), {a: -math.log(p, base) for a, p in probs.items()}, base)


@dataclass(frozen=True)
class PrefixCode:
    block_length: int
    codebook: dict
    output_base: int = 2

    def lengths(self) -> dict:
        return {blk: len(w) for blk, w in self.codebook.items()}

    def encode(self, blocks) -> str:
        return "".join(self.codebook[tuple(b)] for b in blocks)

    def decode(self, s: str) -> list:
        inv = {w: blk for blk, w in self.codebook.items()}
        out, cur = [], ""
        for ch in s:
            cur += ch
            if cur in inv:
                out.append(inv[cur])
                cur = ""
        if cur:
            raise StreamUnderflow("trailing digits do not form a codeword")
        return out

    def kraft_sum(self) -> Fraction:
        return sum((Fraction(1, self.output_base ** len(w)) for w in self.codebook.values()), Fraction(0))


def kraft_sum(lf: LengthFunction) -> float:
    return float(sum(lf.output_base ** -lf.lengths[a] for a in lf.alphabet))


def _to_digits(value: int, length: int, base: int) -> str:
    out = []
    for _ in range(length):
        value, r = divmod(value, base)
        out.append(_DIGITS[r])
    if value:
        raise KraftViolation("codeword overflow during canonical assignment")
    return "".join(reversed(out))


def _canonical(lens: dict, base: int) -> dict:
    """Assign codewords in order of (length, block)."""
    order = sorted(lens, key=lambda b: (lens[b], b))
    book, code, prev = {}, 0, None
    for blk in order:
        L = lens[blk]
        if prev is not None:
            code = (code + 1) * base ** (L - prev)
        book[blk] = _to_digits(code, L, base)
        prev = L
    return book


def _integer_lengths(lf: LengthFunction, n: int, slack: float) -> dict:
    out = {}
    for blk in itertools.product(lf.alphabet, repeat=n):
        s = math.fsum(lf.lengths[a] for a in blk)
        out[blk] = max(int(math.ceil(s - slack * max(1.0, s))), 0)
    return out


def build_block_code(lf: LengthFunction, n: int) -> PrefixCode:
    """Prefix code on blocks of n symbols with lengths ceil(sum of symbol lengths)."""
    if n < 1:
        raise ValueError("block length must be at least 1")
    if kraft_sum(lf) > 1.0 + 1e-12:
        raise KraftViolation(f"Kraft sum {kraft_sum(lf):.15g} exceeds 1")
    base = lf.output_base
    # a relative slack absorbs float noise such as 1.5 + 1.5 = 3.0000000000000004
    for slack in (1e-12, 0.0):
        lens = _integer_lengths(lf, n, slack)
        if sum(Fraction(1, base ** L) for L in lens.values()) <= 1:
            return PrefixCode(n, _canonical(lens, base), base)
    raise KraftViolation("integer block lengths violate Kraft's inequality")


def check_prefix_free(code: PrefixCode | Sequence[str]) -> bool:
    words = sorted(code.codebook.values() if isinstance(code, PrefixCode) else code)
    return all(not b.startswith(a) for a, b in zip(words, words[1:]))


def block_deviation(lf: LengthFunction, code: PrefixCode) -> float:
    """max over blocks of |len(codeword)/n - (1/n) sum l(a_i)|."""
    n = code.block_length
    return max(abs(len(w) - math.fsum(lf.lengths[a] for a in blk)) / n for blk, w in code.codebook.items())


# ---------------------------------------------------------------------------
# bit streams

class BitStream:
    """An ordered bit sequence with a read cursor.

    Reads past the end return 0 (the coder's implicit padding) and are
    counted in `overrun`, so callers can tell padding from real data.
    """

    def __init__(self, bits: Sequence[int] = ()):
        self.bits = list(bits)
        self.cursor = 0
        self.overrun = 0

    def __len__(self) -> int:
        return len(self.bits)

    def __eq__(self, other) -> bool:
        return isinstance(other, BitStream) and self.bits == other.bits

    def __repr__(self) -> str:
        return f"BitStream({len(self.bits)} bits)"

    def write(self, bit: int) -> None:
        self.bits.append(bit)

    def read(self) -> int:
        if self.cursor < len(self.bits):
            b = self.bits[self.cursor]
        else:
            b = 0
            self.overrun += 1
        self.cursor += 1
        return b

    def read_strict(self) -> int:
        if self.cursor >= len(self.bits):
            raise StreamUnderflow("bit stream exhausted")
        b = self.bits[self.cursor]
        self.cursor += 1
        return b

    def to_bytes(self) -> bytes:
        """Bits, a terminating 1, then zero padding to a byte boundary."""
        bits = self.bits + [1]
        bits += [0] * (-len(bits) % 8)
        return np.packbits(np.array(bits, dtype=np.uint8)).tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "BitStream":
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8)).tolist()
        while bits and bits[-1] == 0:
            bits.pop()
        if not bits:
            raise StreamUnderflow("missing stream terminator")
        bits.pop()
        return cls(bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


# ---------------------------------------------------------------------------
# arithmetic coding

PRECISION = 32
FREQ_BITS = 16
ESCAPE_CAP = 1 << 12
ESCAPE_TAIL = 2.0**-20


def quantize(log_probs: Sequence[float], total: int) -> list[int]:
    """Integer frequencies summing to `total`, each at least 1 (deterministic)."""
    k = len(log_probs)
    if k > total:
        raise ZeroProbability(f"{k} symbols cannot all receive a count out of {total}")
    p = np.exp(np.asarray(log_probs, dtype=float))
    freqs = [max(1, int(v * total)) for v in p]
    diff = total - sum(freqs)
    order = sorted(range(k), key=lambda i: (-freqs[i], i))
    j = 0
    while diff != 0:
        i = order[j % k]
        if diff > 0:
            freqs[i] += diff
            diff = 0
        elif freqs[i] > 1:
            take = min(freqs[i] - 1, -diff)
            freqs[i] -= take
            diff += take
        j += 1
        if j > 4 * k and diff < 0:
            raise ZeroProbability("cannot floor frequencies")
    return freqs


class _Model:
    """Quantized next-symbol model over a finite alphabet, with an escape for unbounded supports."""

    def __init__(self, system, freq_bits: int):
        F = system.family
        if not F.discrete:
            raise DomainError("arithmetic coding needs a discrete family")
        self.system = system
        self.total = 1 << freq_bits
        self.finite = F.finite_support
        self.support = list(F.support) if self.finite else None
        self.lo = 0 if self.finite else int(F.support[0])

    def table(self, m: int, S: int):
        """(symbols, log probs of coded symbols, freqs, cumulative) at state (m, S)."""
        if self.finite:
            syms = self.support
            lps = list(self.system.next_log_probs(m, S, syms))
            escape_lp = None
        else:
            syms, lps, mass = [], [], 0.0
            x = self.lo
            while len(syms) < min(ESCAPE_CAP, self.total // 2):
                lp = float(self.system.next_log_probs(m, S, [x])[0])
                syms.append(x)
                lps.append(lp)
                mass += math.exp(lp)
                x += 1
                if 1.0 - mass < ESCAPE_TAIL and len(syms) > 1:
                    break
            escape_lp = math.log(max(1.0 - mass, 1e-300))
        qlps = lps + ([escape_lp] if escape_lp is not None else [])
        freqs = quantize(qlps, self.total)
        cum = [0]
        for f in freqs:
            cum.append(cum[-1] + f)
        return syms, lps, escape_lp, freqs, cum


@dataclass
class CodecReport:
    stream: BitStream
    bits: int
    ideal_bits: float
    slack_bits: float
    escapes: int = 0

    @property
    def bound(self) -> float:
        return self.ideal_bits + 2.0 + self.slack_bits

    @property
    def within_bound(self) -> bool:
        return self.bits <= self.bound + 1e-9


class _Coder:
    def __init__(self, precision: int):
        if precision < FREQ_BITS + 2 or precision > 62:
            raise ConfigError("precision must lie in [18, 62]")
        self.P = precision
        self.full = 1 << precision
        self.half = self.full >> 1
        self.quarter = self.half >> 1
        self.mask = self.full - 1
        self.low = 0
        self.high = self.mask
        self.pending = 0
        self.emitted = 0

    def narrow(self, cum_lo: int, cum_hi: int, total: int):
        rng = self.high - self.low + 1
        self.high = self.low + rng * cum_hi // total - 1
        self.low = self.low + rng * cum_lo // total

    def renorm(self, emit, shift_in=None):
        half, quarter = self.half, self.quarter
        while True:
            if self.high < half:
                emit(0)
            elif self.low >= half:
                emit(1)
                self.low -= half
                self.high -= half
                if shift_in:
                    shift_in(-half)
            elif self.low >= quarter and self.high < half + quarter:
                self.pending += 1
                self.low -= quarter
                self.high -= quarter
                if shift_in:
                    shift_in(-quarter)
            else:
                return
            self.low <<= 1
            self.high = (self.high << 1) | 1
            if shift_in:
                shift_in(None)


class ArithmeticEncoder(_Coder):
    def __init__(self, precision: int = PRECISION):
        super().__init__(precision)
        self.out = BitStream()

    def _emit(self, bit: int):
        self.out.write(bit)
        self.emitted += 1
        for _ in range(self.pending):
            self.out.write(1 - bit)
            self.emitted += 1
        self.pending = 0

    def encode(self, cum_lo, cum_hi, total):
        self.narrow(cum_lo, cum_hi, total)
        self.renorm(self._emit)

    def finish(self) -> BitStream:
        self.pending += 1
        self._emit(0 if self.low < self.quarter else 1)
        return self.out


class ArithmeticDecoder(_Coder):
    def __init__(self, stream: BitStream, precision: int = PRECISION):
        super().__init__(precision)
        self.stream = stream
        self.value = 0
        for _ in range(precision):
            self.value = (self.value << 1) | stream.read()

    def _count(self, bit: int):
        self.emitted += 1 + self.pending
        self.pending = 0

    def _shift(self, delta):
        if delta is None:
            self.value = ((self.value << 1) & self.mask) | self.stream.read()
        else:
            self.value += delta

    def target(self, total: int) -> int:
        rng = self.high - self.low + 1
        return ((self.value - self.low + 1) * total - 1) // rng

    def decode(self, cum: list, total: int) -> int:
        t = self.target(total)
        # binary search for the symbol whose cumulative interval holds t
        lo, hi = 0, len(cum) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if cum[mid] <= t:
                lo = mid
            else:
                hi = mid
        self.narrow(cum[lo], cum[lo + 1], total)
        self.renorm(self._count, self._shift)
        return lo

    def expected_length(self) -> int:
        """Bits the encoder emitted, replayed from the decoder's own state."""
        return self.emitted + 1 + self.pending + 1


def _gamma_bits(v: int) -> list[int]:
    """Elias-gamma code of v >= 1."""
    b = bin(v)[2:]
    return [0] * (len(b) - 1) + [int(c) for c in b]


def _prepare(system, x, m):
    F = system.family
    xs = [int(v) for v in x]
    for v in xs:
        if not F.in_support(v):
            raise DomainError(f"symbol {v} outside the support of {F.name}")
    return xs


def encode_with_report(system, x: Sequence[int], m: int = 0, precision: int = PRECISION,
                       freq_bits: int = FREQ_BITS) -> CodecReport:
    """Encode x[m:] given the prefix x[:m]; reports ideal length and the slack bound."""
    xs = _prepare(system, x, m)
    model = _Model(system, freq_bits)
    enc = ArithmeticEncoder(precision)
    total = model.total
    S = sum(xs[:m])
    ideal = slack = 0.0
    escapes = 0
    trunc_unit = total / float(1 << (precision - 2))
    for i in range(m, len(xs)):
        syms, lps, esc_lp, freqs, cum = model.table(i, S)
        v = xs[i]
        true_lp = float(system.step_log(i, S, v))
        ideal += -true_lp / math.log(2)
        if model.finite or v < syms[-1] + 1:
            j = v - syms[0] if not model.finite else syms.index(v)
            enc.encode(cum[j], cum[j + 1], total)
            slack += (true_lp - math.log(freqs[j] / total)) / math.log(2) \
                - math.log2(1.0 - trunc_unit / freqs[j])
        else:
            j = len(syms)
            enc.encode(cum[j], cum[j + 1], total)
            escapes += 1
            gbits = _gamma_bits(v - syms[-1])
            half = total // 2
            for b in gbits:
                enc.encode(b * half, (b + 1) * half, total)
            slack += (true_lp - math.log(freqs[j] / total)) / math.log(2) + len(gbits) \
                - math.log2(1.0 - trunc_unit / freqs[j]) - len(gbits) * math.log2(1.0 - trunc_unit / half)
        S += v
    stream = enc.finish()
    return CodecReport(stream, len(stream), ideal, slack, escapes)


def arithmetic_encode(system, x: Sequence[int], m: int = 0, precision: int = PRECISION,
                      freq_bits: int = FREQ_BITS) -> BitStream:
    return encode_with_report(system, x, m, precision, freq_bits).stream


def arithmetic_decode(system, stream: BitStream, n: int, m: int = 0, prefix: Sequence[int] = (),
                      precision: int = PRECISION, freq_bits: int = FREQ_BITS) -> list[int]:
    """Decode n - m symbols following the conditioning prefix (of length m)."""
    prefix = [int(v) for v in prefix]
    if len(prefix) != m:
        raise DomainError("prefix length must equal m")
    model = _Model(system, freq_bits)
    stream.cursor = stream.overrun = 0
    dec = ArithmeticDecoder(stream, precision)
    total = model.total
    out = list(prefix)
    S = sum(prefix)
    for i in range(m, n):
        syms, _, _, _, cum = model.table(i, S)
        j = dec.decode(cum, total)
        if j < len(syms):
            v = syms[j]
        else:
            half = total // 2
            zeros = 0
            while True:
                b = dec.decode([0, half, total], total)
                if b == 1:
                    break
                zeros += 1
                if zeros > 64:
                    raise StreamUnderflow("corrupt escape code")
            val = 1
            for _ in range(zeros):
                val = (val << 1) | dec.decode([0, half, total], total)
            v = syms[-1] + val
        out.append(v)
        S += v
    if dec.expected_length() > len(stream):
        raise StreamUnderflow(f"stream holds {len(stream)} bits but the encoder emitted "
                              f"{dec.expected_length()}")
    return out[m:]


# ---------------------------------------------------------------------------
# container

MAGIC = b"XMDL"
VERSION = 1
_HEADER = struct.Struct("<4sBBBBHHI")


def family_hash(family_id: str) -> int:
    return zlib.crc32(family_id.encode()) & 0xFFFF


@dataclass(frozen=True)
class Container:
    family_id: str
    system_code: int
    m: int
    n: int
    prefix: tuple
    stream: BitStream
    precision: int = PRECISION
    freq_bits: int = FREQ_BITS


def pack(c: Container) -> bytes:
    if c.m > 0xFFFF or c.n > 0xFFFFFFFF:
        raise ConfigError("m or n too large for the container header")
    head = _HEADER.pack(MAGIC, VERSION, c.precision, c.freq_bits, c.system_code,
                        family_hash(c.family_id), c.m, c.n)
    pre = struct.pack(f"<{c.m}I", *c.prefix)
    body = head + pre + c.stream.to_bytes()
    return body + struct.pack("<I", zlib.crc32(body))


def unpack(data: bytes, family_id: str | None = None) -> Container:
    if len(data) < _HEADER.size + 4:
        raise StreamUnderflow("container shorter than its header")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise ConfigError("checksum mismatch: corrupt or truncated container")
    magic, ver, prec, fbits, code, fh, m, n = _HEADER.unpack(body[:_HEADER.size])
    if magic != MAGIC or ver != VERSION:
        raise ConfigError("not an encoded stream of a supported version")
    if family_id is not None and family_hash(family_id) != fh:
        raise ConfigError(f"stream was not encoded with family {family_id!r}")
    off = _HEADER.size + 4 * m
    prefix = struct.unpack(f"<{m}I", body[_HEADER.size:off])
    return Container(family_id or "", code, m, n, prefix, BitStream.from_bytes(body[off:]), prec, fbits)
