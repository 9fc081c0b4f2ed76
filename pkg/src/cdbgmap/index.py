"""Anchor and interior (k-1)-mer indexes over a compacted graph.

The anchor index maps each canonical (k-1)-mer that is a unitig prefix or
suffix to the unitigs carrying it.  Entries are stored only for the side and
orientation combinations whose written form equals the canonical key; a
query for the non-canonical written form is answered by mirroring (a unitig
starts with a word exactly when its flipped orientation ends with the word's
reverse complement).  Palindromic keys store both orientation classes
explicitly, merged under the single canonical key.

The interior index lists every (k-1)-mer occurrence inside unitigs longer
than a length threshold, sampled at a configurable stride.  It backs the
single-unitig mapping regime.
"""

from __future__ import annotations

import struct
import sys
from dataclasses import dataclass
from pathlib import Path

from .graph import CompactedGraph
from .sequences import encode_kmer, rc_code, window_codes

_INDEX_MAGIC = b"CDBGIDX1"
_INDEX_VERSION = 1

FORWARD = "+"
REVERSE = "-"
STARTS_WITH = "starts_with"
ENDS_WITH = "ends_with"

_ORIENTS = (FORWARD, REVERSE)


@dataclass(frozen=True)
class Incidence:
    """One unitig end carrying an overlap, as written under the given orientation."""

    unitig_id: int
    side: str  # STARTS_WITH or ENDS_WITH
    orientation: str  # "+" or "-"


def _flip(orient_bit: int) -> int:
    return orient_bit ^ 1


class AnchorIndex:
    """Canonical (k-1)-mer -> unitig incidences for unitig ends."""

    def __init__(self, k: int):
        self.k = k
        # key -> (starts, ends); each a tuple of (unitig_id, orient_bit)
        self._table: dict[int, tuple[tuple, tuple]] = {}

    def __len__(self) -> int:
        return len(self._table)

    def __contains__(self, key: int) -> bool:
        return key in self._table

    def keys(self):
        return self._table.keys()

    def starts_with_key(self, key: int) -> list[tuple[int, str]]:
        """Stored starts for a canonical key, as (unitig_id, '+'/'-')."""
        entry = self._table.get(key)
        if entry is None:
            return []
        return [(uid, _ORIENTS[o]) for uid, o in entry[0]]

    def ends_with_key(self, key: int) -> list[tuple[int, str]]:
        entry = self._table.get(key)
        if entry is None:
            return []
        return [(uid, _ORIENTS[o]) for uid, o in entry[1]]

    # Hot-path queries used by the mapper: written form given as fwd/rc codes.
    def starts_with_codes(self, fwd: int, rc: int) -> tuple:
        """Unitigs whose oriented sequence starts with the written word."""
        key = fwd if fwd <= rc else rc
        entry = self._table.get(key)
        if entry is None:
            return ()
        if fwd == key:
            return entry[0]
        return tuple((uid, _flip(o)) for uid, o in entry[1])

    def ends_with_codes(self, fwd: int, rc: int) -> tuple:
        key = fwd if fwd <= rc else rc
        entry = self._table.get(key)
        if entry is None:
            return ()
        if fwd == key:
            return entry[1]
        return tuple((uid, _flip(o)) for uid, o in entry[0])

    def has_key_codes(self, fwd: int, rc: int) -> bool:
        return (fwd if fwd <= rc else rc) in self._table


def build_anchor_index(graph: CompactedGraph) -> AnchorIndex:
    idx = AnchorIndex(k=graph.k)
    size = graph.k - 1
    starts: dict[int, list] = {}
    ends: dict[int, list] = {}
    for u in graph.unitigs:
        pf = encode_kmer(u.sequence[:size])
        sf = encode_kmer(u.sequence[-size:])
        pf_rc = rc_code(pf, size)
        sf_rc = rc_code(sf, size)
        # (written_code, rc_of_written, side_dict, orient_bit)
        combos = (
            (pf, pf_rc, starts, 0),  # forward starts with its prefix
            (sf, sf_rc, ends, 0),  # forward ends with its suffix
            (sf_rc, sf, starts, 1),  # reverse starts with rc(suffix)
            (pf_rc, pf, ends, 1),  # reverse ends with rc(prefix)
        )
        for written, written_rc, table, orient in combos:
            if written <= written_rc:  # written form is canonical: store it
                table.setdefault(written, []).append((u.id, orient))
    for key in set(starts) | set(ends):
        idx._table[key] = (
            tuple(starts.get(key, ())),
            tuple(ends.get(key, ())),
        )
    return idx


def query_anchor(idx: AnchorIndex, mer: str) -> list[Incidence]:
    """Exact incidence lookup for a written (k-1)-mer; [] when absent."""
    size = idx.k - 1
    if len(mer) != size:
        raise ValueError(f"anchor query must have length {size}, got {len(mer)}")
    fwd = encode_kmer(mer)
    rc = rc_code(fwd, size)
    out = [
        Incidence(uid, STARTS_WITH, orient)
        for uid, orient in _as_public(idx.starts_with_codes(fwd, rc))
    ]
    out.extend(
        Incidence(uid, ENDS_WITH, orient)
        for uid, orient in _as_public(idx.ends_with_codes(fwd, rc))
    )
    return out


def _as_public(entries) -> list[tuple[int, str]]:
    return [(uid, o if isinstance(o, str) else _ORIENTS[o]) for uid, o in entries]


class InteriorIndex:
    """Canonical (k-1)-mer -> occurrences inside long unitigs.

    Each stored occurrence is (unitig_id, offset, written_is_canonical) with
    the offset on the forward strand of the stored unitig orientation; the
    lengths of the indexed unitigs are kept so reverse-strand offsets can be
    mirrored without the graph at hand.
    """

    def __init__(self, k: int, min_length: int = 0, stride: int = 1):
        self.k = k
        self.min_length = min_length
        self.stride = stride
        self._table: dict[int, tuple] = {}
        self._unitig_lengths: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self._table)

    def get_codes(self, fwd: int, rc: int) -> tuple:
        return self._table.get(fwd if fwd <= rc else rc, ())


def build_interior_index(
    graph: CompactedGraph, min_length: int = 0, stride: int = 1
) -> InteriorIndex:
    if stride < 1:
        raise ValueError("stride must be >= 1")
    idx = InteriorIndex(k=graph.k, min_length=min_length, stride=stride)
    size = graph.k - 1
    table: dict[int, list] = {}
    lengths: dict[int, int] = {}
    for u in graph.unitigs:
        if len(u.sequence) <= min_length:
            continue
        lengths[u.id] = len(u.sequence)
        for pos, fwd, rc in window_codes(u.sequence, size):
            if pos % stride:
                continue
            if fwd <= rc:
                table.setdefault(fwd, []).append((u.id, pos, 1))
            else:
                table.setdefault(rc, []).append((u.id, pos, 0))
    idx._table = {key: tuple(v) for key, v in table.items()}
    idx._unitig_lengths = lengths
    return idx


def query_interior(idx: InteriorIndex, mer: str) -> list[tuple]:
    """Occurrences of a written (k-1)-mer as (unitig_id, offset, orientation).

    The offset is within the unitig's oriented sequence, so the mer matches
    graph.oriented_sequence(uid, orientation)[offset : offset + k - 1] exactly.
    """
    size = idx.k - 1
    if len(mer) != size:
        raise ValueError(f"interior query must have length {size}, got {len(mer)}")
    fwd = encode_kmer(mer)
    rc = rc_code(fwd, size)
    key = min(fwd, rc)
    out = []
    for uid, off, canon_written in idx.get_codes(fwd, rc):
        mirror = idx._unitig_lengths[uid] - size - off
        if fwd == key:
            if canon_written:
                out.append((uid, off, FORWARD))
                if fwd == rc:  # palindromic mer also matches the other strand
                    out.append((uid, mirror, REVERSE))
            else:
                out.append((uid, mirror, REVERSE))
        else:
            if canon_written:
                out.append((uid, mirror, REVERSE))
            else:
                out.append((uid, off, FORWARD))
    return out


def save_indexes(path: str | Path, anchor: AnchorIndex, interior: InteriorIndex) -> None:
    """Versioned binary dump of both indexes (magic, version, k, counts)."""
    with open(path, "wb") as out:
        out.write(_INDEX_MAGIC)
        out.write(
            struct.pack(
                "<IIII",
                _INDEX_VERSION,
                anchor.k,
                interior.min_length,
                interior.stride,
            )
        )
        out.write(struct.pack("<Q", len(anchor._table)))
        for key in sorted(anchor._table):
            starts, ends = anchor._table[key]
            out.write(key.to_bytes(16, "big"))
            out.write(struct.pack("<HH", len(starts), len(ends)))
            for uid, orient in starts:
                out.write(struct.pack("<IB", uid, orient))
            for uid, orient in ends:
                out.write(struct.pack("<IB", uid, orient))
        out.write(struct.pack("<Q", len(interior._table)))
        for key in sorted(interior._table):
            occs = interior._table[key]
            out.write(key.to_bytes(16, "big"))
            out.write(struct.pack("<I", len(occs)))
            for uid, off, canon_written in occs:
                out.write(struct.pack("<IIB", uid, off, canon_written))
        out.write(struct.pack("<Q", len(interior._unitig_lengths)))
        for uid in sorted(interior._unitig_lengths):
            out.write(struct.pack("<II", uid, interior._unitig_lengths[uid]))


def load_indexes(path: str | Path) -> tuple[AnchorIndex, InteriorIndex]:
    with open(path, "rb") as inp:
        if inp.read(8) != _INDEX_MAGIC:
            raise ValueError(f"not an index file: {path}")
        version, k, min_length, stride = struct.unpack("<IIII", inp.read(16))
        if version != _INDEX_VERSION:
            raise ValueError(f"unsupported index format version {version}")
        anchor = AnchorIndex(k=k)
        (n_keys,) = struct.unpack("<Q", inp.read(8))
        for _ in range(n_keys):
            key = int.from_bytes(inp.read(16), "big")
            n_starts, n_ends = struct.unpack("<HH", inp.read(4))
            starts = tuple(
                struct.unpack("<IB", inp.read(5)) for _ in range(n_starts)
            )
            ends = tuple(struct.unpack("<IB", inp.read(5)) for _ in range(n_ends))
            anchor._table[key] = (starts, ends)
        interior = InteriorIndex(k=k, min_length=min_length, stride=stride)
        (n_keys,) = struct.unpack("<Q", inp.read(8))
        table = {}
        for _ in range(n_keys):
            key = int.from_bytes(inp.read(16), "big")
            (n_occ,) = struct.unpack("<I", inp.read(4))
            table[key] = tuple(
                struct.unpack("<IIB", inp.read(9)) for _ in range(n_occ)
            )
        interior._table = table
        (n_lengths,) = struct.unpack("<Q", inp.read(8))
        interior._unitig_lengths = dict(
            struct.unpack("<II", inp.read(8)) for _ in range(n_lengths)
        )
    return anchor, interior


def approximate_bytes(index: AnchorIndex | InteriorIndex) -> int:
    """Rough in-memory footprint, for the CLI's per-key memory report."""
    table = index._table
    total = sys.getsizeof(table)
    for key, value in table.items():
        total += sys.getsizeof(key) + sys.getsizeof(value)
        if value and isinstance(value[0], tuple):
            for item in value:
                total += sys.getsizeof(item)
    return total
