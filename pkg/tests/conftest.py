"""Shared oracles and builders.

The oracles here are deliberately string-level and independent of the
package's packed-integer implementations, so a bug in the bit twiddling
cannot hide in the tests that check it.
"""

import random

import pytest

from cdbgmap.census import count_kmers, solid_set
from cdbgmap.graph import CompactedGraph, Unitig, compact
from cdbgmap.index import build_anchor_index, build_interior_index

COMP = {"A": "T", "C": "G", "G": "C", "T": "A", "N": "N"}


def naive_rc(s):
    return "".join(COMP[b] for b in reversed(s))


def naive_canonical(s):
    return min(s, naive_rc(s))


def naive_kmers(seq, k):
    return [seq[i : i + k] for i in range(len(seq) - k + 1)]


def random_genome(seed, length):
    rng = random.Random(seed)
    return "".join(rng.choice("ACGT") for _ in range(length))


def graph_from_sequences(seqs, k, min_count=1):
    solid = solid_set(count_kmers(seqs, k), min_count)
    return compact(solid), solid


def build_graph(unitig_seqs, k):
    """Construct a graph directly from unitig sequences (for mapper scenarios)."""
    return CompactedGraph(
        k=k, unitigs=[Unitig(id=i, sequence=s) for i, s in enumerate(unitig_seqs)]
    )


def indexes_for(graph, min_length=0, stride=1):
    return build_anchor_index(graph), build_interior_index(graph, min_length, stride)


def oriented(graph, uid, orientation):
    """Orientation helper that does not reuse the graph's cached RC."""
    seq = graph.unitigs[uid].sequence
    return seq if orientation == "+" else naive_rc(seq)


def reconstruct_mapping(graph, result, read_seq):
    """Independent replay of a mapping: rebuild the generated sequence from the
    path, compare against the read (or its RC for strand '-'), and return the
    mismatch positions.  This is the primary self-audit for every result."""
    k = graph.k
    seqs = [oriented(graph, uid, o) for uid, o in result.path]
    generated = seqs[0] + "".join(s[k - 1 :] for s in seqs[1:])
    target = read_seq if result.strand == "+" else naive_rc(read_seq)
    window = generated[result.start_offset : result.start_offset + len(target)]
    assert len(window) == len(target), "path does not cover the read"
    positions = tuple(i for i, (a, b) in enumerate(zip(target, window)) if a != b)
    return positions


def assert_result_consistent(graph, anchor, result, read_seq):
    from cdbgmap.index import query_anchor

    positions = reconstruct_mapping(graph, result, read_seq)
    assert positions == tuple(result.mismatch_positions)
    assert len(positions) == result.mismatches
    k = graph.k
    for (a, oa), (b, ob) in zip(result.path, result.path[1:]):
        junction = oriented(graph, a, oa)[-(k - 1) :]
        assert junction == oriented(graph, b, ob)[: k - 1]
        hits = query_anchor(anchor, junction)
        assert any(
            h.unitig_id == a and h.side == "ends_with" and h.orientation == oa
            for h in hits
        )
        assert any(
            h.unitig_id == b and h.side == "starts_with" and h.orientation == ob
            for h in hits
        )


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
