"""The 226-bit chromosome and its mapping to MicroParams."""

# Needed so classes can make self references to their type
from __future__ import annotations

import math
from collections.abc import Iterable

import numpy as np
import numpy.typing as npt

from .errors import InvalidGenomeError, InvalidParamsError
from .fields import PF_TERMS, MicroParams, PFTerm
from .influence import IMParams

# ------------------------------------------------------------
# Bit layout, most significant bit first within every field:
#   13 x (c: 12 bits, e: 4 bits)   bits   0..207
#   r: 4, i_f: 4, w1: 3, w2: 3, w3: 4  bits 208..225
# ------------------------------------------------------------
C_BITS = 12
E_BITS = 4
C_MIN, C_MAX = -10000.0, 10000.0
E_MIN = -7
IM_FIELDS: tuple[tuple[str, int], ...] = (("r", 4), ("i_f", 4), ("w1", 3), ("w2", 3), ("w3", 4))
R_MAX = 8
W3_MAX = 8.0

GENOME_LENGTH = PF_TERMS * (C_BITS + E_BITS) + sum(width for _, width in IM_FIELDS)

_C_CODES = (1 << C_BITS) - 1


class Genome:
    """
    An immutable 226-bit chromosome.

    Serialized as a string of '0' and '1' characters, bit 0 first.
    """

    __slots__ = ("_bits",)
    _bits: npt.NDArray[np.uint8]

    def __init__(self, bits: Iterable[int | bool] | npt.NDArray[np.generic]) -> None:
        """
        Build a genome from a sequence of 0/1 values.

        Raises:
            InvalidGenomeError: if the length is not 226 or a value is not 0 or 1.
        """
        arr = np.array(list(bits) if not isinstance(bits, np.ndarray) else bits)
        if arr.ndim != 1 or len(arr) != GENOME_LENGTH:
            raise InvalidGenomeError(f"genome must have exactly {GENOME_LENGTH} bits, got {arr.size}")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise InvalidGenomeError("genome bits must be 0 or 1")
        self._bits = arr.astype(np.uint8)
        self._bits.setflags(write=False)

    @classmethod
    def fromstring(cls, text: str) -> Genome:
        """
        Parse a 226-character 0/1 string. Surrounding whitespace is ignored.

        Raises:
            InvalidGenomeError: on any other character or a wrong length.
        """
        text = text.strip()
        bad = set(text) - {"0", "1"}
        if bad:
            raise InvalidGenomeError(f"genome string holds characters other than 0 and 1: {sorted(bad)}")
        return cls(np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0"))

    @property
    def bits(self) -> npt.NDArray[np.uint8]:
        """Read-only bit array."""
        return self._bits

    def __len__(self) -> int:
        return GENOME_LENGTH

    def __str__(self) -> str:
        return (self._bits + ord("0")).tobytes().decode("ascii")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Genome):
            return NotImplemented
        return bool(np.array_equal(self._bits, other._bits))

    def __hash__(self) -> int:
        return hash(self._bits.tobytes())

    def __repr__(self) -> str:
        return f"Genome({str(self)[:16]}...)"


def _read(bits: npt.NDArray[np.uint8], start: int, width: int) -> int:
    value = 0
    for b in bits[start : start + width]:
        value = (value << 1) | int(b)
    return value


def _write(out: list[int], value: int, width: int) -> None:
    out.extend((value >> (width - 1 - k)) & 1 for k in range(width))


def _decode_r(code: int) -> int:
    # 8 * code / 15 never lands on .5, so this is plain rounding
    return math.floor(code * R_MAX / 15 + 0.5)


def _nearest(value: float, lo: float, hi: float, codes: int) -> int:
    return min(codes, max(0, math.floor((value - lo) / (hi - lo) * codes + 0.5)))


def decode(g: Genome) -> MicroParams:
    """
    Turn a genome into controller parameters.

    c = -10000 + k / 4095 * 20000 and e = -7 + k for each term; the
    influence-map block gives r = round(8k / 15), i_f = k / 15,
    w1 = k / 7, w2 = k / 7 and w3 = 8k / 15.

    Raises:
        InvalidGenomeError: if g is not a 226-bit Genome.
    """
    if not isinstance(g, Genome):
        raise InvalidGenomeError(f"expected a Genome, got '{type(g).__name__}'")
    bits = g.bits

    pos = 0
    terms = []
    for _ in range(PF_TERMS):
        c_code = _read(bits, pos, C_BITS)
        e_code = _read(bits, pos + C_BITS, E_BITS)
        pos += C_BITS + E_BITS
        terms.append(PFTerm(c=C_MIN + c_code / _C_CODES * (C_MAX - C_MIN), e=E_MIN + e_code))

    codes = {}
    for name, width in IM_FIELDS:
        codes[name] = _read(bits, pos, width)
        pos += width

    im = IMParams(
        r=_decode_r(codes["r"]),
        i_f=codes["i_f"] / 15,
        w1=codes["w1"] / 7,
        w2=codes["w2"] / 7,
        w3=codes["w3"] / 15 * W3_MAX,
    )
    return MicroParams(pf=tuple(terms), im=im)


def encode(p: MicroParams) -> Genome:
    """
    Nearest-quantized inverse of decode.

    Every decoded field lies within one quantization step of p. For r the
    smallest code that decodes to r is used.

    Raises:
        InvalidParamsError: if p holds an out-of-range value.
    """
    if len(p.pf) != PF_TERMS:
        raise InvalidParamsError(f"expected {PF_TERMS} potential-field terms, got {len(p.pf)}")

    out: list[int] = []
    for t in p.pf:
        if not (C_MIN <= t.c <= C_MAX) or not (E_MIN <= t.e <= E_MIN + (1 << E_BITS) - 1):
            raise InvalidParamsError(f"potential-field term out of range: {t}")
        _write(out, _nearest(t.c, C_MIN, C_MAX, _C_CODES), C_BITS)
        _write(out, t.e - E_MIN, E_BITS)

    im = p.im
    if not (0 <= im.r <= R_MAX):
        raise InvalidParamsError(f"r must be in [0, {R_MAX}], got {im.r}")
    r_code = next(k for k in range(16) if _decode_r(k) == im.r)
    _write(out, r_code, 4)
    _write(out, _nearest(im.i_f, 0.0, 1.0, 15), 4)
    _write(out, _nearest(im.w1, 0.0, 1.0, 7), 3)
    _write(out, _nearest(im.w2, 0.0, 1.0, 7), 3)
    _write(out, _nearest(im.w3, 0.0, W3_MAX, 15), 4)

    return Genome(out)


def random_genome(rng: np.random.Generator) -> Genome:
    """226 independent fair bits from rng."""
    return Genome(rng.integers(0, 2, size=GENOME_LENGTH, dtype=np.uint8))
