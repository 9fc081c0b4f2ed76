"""Compacted de Bruijn graph construction over canonical solid k-mers.

The graph is node-centric: a k-mer and its reverse complement are one node.
Unitigs are maximal non-branching paths; extension across a junction is
allowed only when the current end has exactly one forward neighbour, that
neighbour has exactly one backward neighbour, the junction (k-1)-overlap is
not its own reverse complement, and the neighbour has not already been
consumed (which also cuts cycles).

Construction is deterministic: seeds are taken in ascending packed-canonical
order, ids are dense in seed order, and each unitig is stored in whichever
orientation is lexicographically smaller end to end.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, NamedTuple, Sequence

from .census import SolidKmerSet
from .fastx import read_sequences, write_fasta
from .sequences import (
    canonical_code,
    decode_kmer,
    encode_kmer,
    rc_code,
    reverse_complement,
)

if TYPE_CHECKING:  # pragma: no cover
    from .index import AnchorIndex

BASES = "ACGT"


@dataclass(frozen=True)
class Unitig:
    """One maximal non-branching path; sequence is the stored orientation."""

    id: int
    sequence: str


class CompactedGraph:
    """A set of unitigs plus k; the reference the mapper aligns against."""

    def __init__(self, k: int, unitigs: Sequence[Unitig]):
        if k < 2:
            raise ValueError(f"k must be >= 2, got {k}")
        for i, u in enumerate(unitigs):
            if u.id != i:
                raise ValueError(f"unitig ids must be dense from 0, got {u.id} at {i}")
            if len(u.sequence) < k:
                raise ValueError(f"unitig {u.id} shorter than k")
            if any(b not in BASES for b in u.sequence):
                raise ValueError(f"unitig {u.id} contains non-ACGT symbols")
        self.k = k
        self.unitigs = list(unitigs)
        self._rc_cache: dict[int, str] = {}

    def __len__(self) -> int:
        return len(self.unitigs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CompactedGraph)
            and self.k == other.k
            and self.unitigs == other.unitigs
        )

    def sequence(self, unitig_id: int) -> str:
        return self.unitigs[unitig_id].sequence

    def rc_sequence(self, unitig_id: int) -> str:
        cached = self._rc_cache.get(unitig_id)
        if cached is None:
            cached = reverse_complement(self.unitigs[unitig_id].sequence)
            self._rc_cache[unitig_id] = cached
        return cached

    def oriented_sequence(self, unitig_id: int, orientation: str) -> str:
        if orientation == "+":
            return self.unitigs[unitig_id].sequence
        if orientation == "-":
            return self.rc_sequence(unitig_id)
        raise ValueError(f"orientation must be '+' or '-', got {orientation!r}")

    def total_length(self) -> int:
        return sum(len(u.sequence) for u in self.unitigs)

    def mean_length(self) -> float:
        return self.total_length() / len(self.unitigs) if self.unitigs else 0.0


def _unique_forward(fwd: int, rc: int, codes, mask: int, shift: int):
    """The single forward extension of an oriented k-mer, or None if 0 or >1."""
    found = None
    for b in range(4):
        nf = ((fwd << 2) | b) & mask
        nr = (rc >> 2) | ((3 - b) << shift)
        nc = nf if nf < nr else nr
        if nc in codes:
            if found is not None:
                return None
            found = (nf, nr, nc)
    return found


def _backward_degree_is_one(fwd: int, rc: int, codes, mask: int, shift: int) -> bool:
    n = 0
    for b in range(4):
        pf = (fwd >> 2) | (b << shift)
        pr = ((rc << 2) | (3 - b)) & mask
        pc = pf if pf < pr else pr
        if pc in codes:
            n += 1
            if n > 1:
                return False
    return n == 1


def _extend_right(fwd: int, rc: int, codes, used: set[int], consumed, k: int) -> list[int]:
    """Greedy maximal rightward extension; returns appended base codes.

    Mutates `used` with the canonical codes it consumes.
    """
    mask = (1 << (2 * k)) - 1
    shift = 2 * (k - 1)
    k1mask = (1 << (2 * (k - 1))) - 1
    out = []
    while True:
        # stop at a palindromic junction overlap (possible when k-1 is even)
        if (fwd & k1mask) == (rc >> 2):
            break
        step = _unique_forward(fwd, rc, codes, mask, shift)
        if step is None:
            break
        nf, nr, nc = step
        if nc in used or nc in consumed:
            break
        if not _backward_degree_is_one(nf, nr, codes, mask, shift):
            break
        out.append(nf & 3)
        used.add(nc)
        fwd, rc = nf, nr
    return out


def compact(solid: SolidKmerSet) -> CompactedGraph:
    """Build the compacted graph; every solid k-mer lands in exactly one unitig."""
    if not solid.codes:
        raise ValueError("cannot compact an empty solid k-mer set")
    k = solid.k
    codes = solid.codes
    consumed: set[int] = set()
    unitigs: list[Unitig] = []
    for seed in sorted(codes):
        if seed in consumed:
            continue
        fwd = seed
        rc = rc_code(seed, k)
        used = {seed}
        right = _extend_right(fwd, rc, codes, used, consumed, k)
        # leftward extension is rightward extension of the reverse orientation
        left = _extend_right(rc, fwd, codes, used, consumed, k)
        prefix = "".join(BASES[3 - b] for b in reversed(left))
        seq = prefix + decode_kmer(seed, k) + "".join(BASES[b] for b in right)
        seq = min(seq, reverse_complement(seq))
        unitigs.append(Unitig(id=len(unitigs), sequence=seq))
        consumed |= used
    return CompactedGraph(k=k, unitigs=unitigs)


@dataclass(frozen=True)
class DbgWalk:
    """A node-centric walk: consecutive k-mers overlap by k-1 characters."""

    nodes: tuple[str, ...]

    @property
    def is_path(self) -> bool:
        return len(set(self.nodes)) == len(self.nodes)


def walk_sequence(walk: DbgWalk | Sequence[str]) -> str:
    """The sequence a walk generates: first node plus one character per step."""
    nodes = walk.nodes if isinstance(walk, DbgWalk) else tuple(walk)
    if not nodes:
        raise ValueError("empty walk")
    k = len(nodes[0])
    parts = [nodes[0]]
    for prev, cur in zip(nodes, nodes[1:]):
        if len(cur) != k or prev[1:] != cur[:-1]:
            raise ValueError("not a walk")
        parts.append(cur[-1])
    return "".join(parts)


class PathEnumeration(NamedTuple):
    walks: list[DbgWalk]
    truncated: bool


def enumerate_paths(
    solid: SolidKmerSet, start: str, len_nodes: int, budget: int = 100_000
) -> PathEnumeration:
    """All oriented node paths of exactly len_nodes nodes starting at `start`.

    A node is an oriented k-mer whose canonical form is solid; a path never
    repeats one.  Intended for small instances only: the search is
    exhaustive, counting one unit of budget per node expansion.  When the
    budget runs out the partial result is returned with truncated=True,
    never silently dropped.
    """
    if len_nodes < 1:
        raise ValueError("len_nodes must be >= 1")
    k = solid.k
    if len(start) != k:
        raise ValueError(f"start must be a {k}-mer")
    bits = encode_kmer(start)
    if canonical_code(bits, k) not in solid.codes:
        return PathEnumeration([], False)

    codes = solid.codes
    mask = (1 << (2 * k)) - 1
    shift = 2 * (k - 1)
    walks: list[DbgWalk] = []
    expansions = 0
    truncated = False
    stack: list[int] = [bits]
    on_path: set[int] = {bits}

    def recurse(fwd: int, rc: int) -> None:
        nonlocal expansions, truncated
        if len(stack) == len_nodes:
            walks.append(DbgWalk(nodes=tuple(decode_kmer(c, k) for c in stack)))
            return
        base = (fwd << 2) & mask
        rc_shifted = rc >> 2
        for b in range(4):
            nf = base | b
            nr = rc_shifted | ((3 - b) << shift)
            if (nf if nf < nr else nr) not in codes or nf in on_path:
                continue
            expansions += 1
            if expansions > budget:
                truncated = True
                return
            stack.append(nf)
            on_path.add(nf)
            recurse(nf, nr)
            on_path.discard(nf)
            stack.pop()
            if truncated:
                return

    recurse(bits, rc_code(bits, k))
    return PathEnumeration(walks, truncated)


def write_unitigs_fasta(path: str | Path, graph: CompactedGraph) -> int:
    return write_fasta(path, ((f"u{u.id}", u.sequence) for u in graph.unitigs))


def read_unitigs_fasta(path: str | Path, k: int) -> CompactedGraph:
    records = []
    for rec in read_sequences(path):
        if not rec.id.startswith("u"):
            raise ValueError(f"not a unitig FASTA header: {rec.id!r}")
        records.append(Unitig(id=int(rec.id[1:]), sequence=rec.sequence))
    records.sort(key=lambda u: u.id)
    return CompactedGraph(k=k, unitigs=records)


def write_gfa(path: str | Path, graph: CompactedGraph, anchor_index: "AnchorIndex") -> None:
    """GFA1 dump: S lines with sequences, L lines with (k-1)-overlap links.

    Links are derived from the anchor index itself so the two views can never
    disagree on ids or orientations.  A link and its reverse-complement
    counterpart are the same bidirected edge and are emitted once.
    """
    overlap = graph.k - 1
    links = set()
    for key in anchor_index.keys():
        starts = anchor_index.starts_with_key(key)
        ends = anchor_index.ends_with_key(key)
        for a, oa in ends:
            for b, ob in starts:
                fwd = (a, oa, b, ob)
                mirror = (b, _flip(ob), a, _flip(oa))
                links.add(min(fwd, mirror))
    with open(path, "w", encoding="ascii") as out:
        out.write("H\tVN:Z:1.0\n")
        for u in graph.unitigs:
            out.write(f"S\tu{u.id}\t{u.sequence}\n")
        for a, oa, b, ob in sorted(links):
            out.write(f"L\tu{a}\t{oa}\tu{b}\t{ob}\t{overlap}M\n")


def _flip(orientation: str) -> str:
    return "-" if orientation == "+" else "+"
