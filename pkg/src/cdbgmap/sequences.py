"""DNA alphabet, bit-packed k-mers, and read records shared by the whole toolkit.

K-mers are packed two bits per base, most significant bits first, with
A=0, C=1, G=2, T=3.  Because the code order matches the lexicographic base
order, integer comparison of two packed k-mers of equal length is exactly
lexicographic comparison of their sequences, so the canonical form of a
k-mer is simply ``min(code, rc_code)``.
"""

from __future__ import annotations

from dataclasses import dataclass

BASES = "ACGT"

#: Largest supported k; two machine words cover 2*63 bits.  Larger values are
#: a configuration error, not a silent fallback.
MAX_K = 63

_COMPLEMENT = str.maketrans("ACGT", "TGCA")
_COMPLEMENT_WITH_N = str.maketrans("ACGTN", "TGCAN")

# ord(base) -> 2-bit code; 4 marks anything that is not A/C/G/T.
_CODE = [4] * 256
for _i, _b in enumerate(BASES):
    _CODE[ord(_b)] = _i


def reverse_complement(s: str) -> str:
    """Reverse complement of an exact DNA string (A<->T, C<->G).

    Raises ValueError on any symbol outside ACGT; ambiguous bases are only
    legal at the read-parsing boundary, never in exact k-mer contexts.
    """
    for ch in s:
        if _CODE[ord(ch)] == 4:
            raise ValueError(f"non-ACGT in exact context: {ch!r}")
    return s.translate(_COMPLEMENT)[::-1]


def reverse_complement_read(s: str) -> str:
    """Reverse complement tolerating N (N maps to N). For read sequences."""
    return s.translate(_COMPLEMENT_WITH_N)[::-1]


def canonical_kmer(s: str) -> str:
    """Lexicographic minimum of a k-mer and its reverse complement."""
    return min(s, reverse_complement(s))


def encode_kmer(s: str) -> int:
    """Pack an ACGT string into an integer, first base in the highest bits."""
    if not 1 <= len(s) <= MAX_K:
        raise ValueError(f"k-mer length must be in [1, {MAX_K}], got {len(s)}")
    bits = 0
    for ch in s:
        code = _CODE[ord(ch)]
        if code == 4:
            raise ValueError(f"non-ACGT in exact context: {ch!r}")
        bits = (bits << 2) | code
    return bits


def decode_kmer(bits: int, length: int) -> str:
    """Inverse of encode_kmer."""
    out = []
    for shift in range(2 * (length - 1), -1, -2):
        out.append(BASES[(bits >> shift) & 3])
    return "".join(out)


def rc_code(bits: int, length: int) -> int:
    """Packed reverse complement of a packed k-mer."""
    out = 0
    for _ in range(length):
        out = (out << 2) | (3 - (bits & 3))
        bits >>= 2
    return out


def canonical_code(bits: int, length: int) -> int:
    """Packed canonical form (min of the k-mer and its reverse complement)."""
    rc = rc_code(bits, length)
    return bits if bits <= rc else rc


@dataclass(frozen=True, slots=True)
class Kmer:
    """A fixed-length DNA word in 2-bit packed form (oriented, not canonical)."""

    length: int
    bits: int

    @classmethod
    def from_string(cls, s: str) -> "Kmer":
        return cls(length=len(s), bits=encode_kmer(s))

    def to_string(self) -> str:
        return decode_kmer(self.bits, self.length)

    def reverse_complement(self) -> "Kmer":
        return Kmer(self.length, rc_code(self.bits, self.length))

    def canonical(self) -> "Kmer":
        return Kmer(self.length, canonical_code(self.bits, self.length))

    def is_canonical(self) -> bool:
        return self.bits <= rc_code(self.bits, self.length)


@dataclass(frozen=True, slots=True)
class Read:
    """A sequencing read; quality is carried through parsing but never scored."""

    id: str
    sequence: str
    quality: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("read id must be non-empty")
        if len(self.sequence) < 1:
            raise ValueError("read sequence must be non-empty")


def window_codes(seq: str, size: int) -> list[tuple[int, int, int]]:
    """All N-free windows of `seq` as (position, fwd_code, rc_code) triples.

    Windows containing any non-ACGT symbol are skipped; positions of the
    remaining windows are preserved.  This is the shared hot path for
    counting, indexing and mapping.
    """
    mask = (1 << (2 * size)) - 1
    shift = 2 * (size - 1)
    comp_shift = (3 << shift, 2 << shift, 1 << shift, 0)
    code = _CODE
    out = []
    fwd = rc = 0
    valid = 0
    append = out.append
    for i, byte in enumerate(seq.encode("ascii", "replace")):
        b = code[byte]
        if b == 4:
            valid = 0
            fwd = rc = 0
            continue
        fwd = ((fwd << 2) | b) & mask
        rc = (rc >> 2) | comp_shift[b]
        valid += 1
        if valid >= size:
            append((i - size + 1, fwd, rc))
    return out


def enumerate_kmers(read: Read | str, k: int) -> list[tuple[int, Kmer]]:
    """All N-free k-mer windows of a read as (position, Kmer) pairs.

    A read shorter than k yields nothing; that is not an error.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > MAX_K:
        raise ValueError(f"k must be <= {MAX_K}, got {k}")
    seq = read.sequence if isinstance(read, Read) else read
    return [(pos, Kmer(k, fwd)) for pos, fwd, _ in window_codes(seq, k)]
