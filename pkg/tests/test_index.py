import random

import pytest

from cdbgmap.graph import compact
from cdbgmap.index import (
    AnchorIndex,
    Incidence,
    approximate_bytes,
    build_anchor_index,
    build_interior_index,
    load_indexes,
    query_anchor,
    query_interior,
    save_indexes,
)

from conftest import (
    build_graph,
    graph_from_sequences,
    naive_canonical,
    naive_rc,
    oriented,
    random_genome,
)


def scan_incidences(graph, mer):
    """Exhaustive oracle: check every unitig in both orientations."""
    k1 = graph.k - 1
    out = set()
    for u in graph.unitigs:
        for o in "+-":
            seq = oriented(graph, u.id, o)
            if seq[:k1] == mer:
                out.add((u.id, "starts_with", o))
            if seq[-k1:] == mer:
                out.add((u.id, "ends_with", o))
    return out


def scan_interior(graph, mer, min_length=0):
    k1 = graph.k - 1
    out = set()
    for u in graph.unitigs:
        if len(u.sequence) <= min_length:
            continue
        for o in "+-":
            seq = oriented(graph, u.id, o)
            for i in range(len(seq) - k1 + 1):
                if seq[i : i + k1] == mer:
                    out.add((u.id, i, o))
    return out


def test_anchor_example_branching_set():
    graph, _ = graph_from_sequences(["ACTG", "ACTT"], 3)
    hits = set(
        (i.unitig_id, i.side, i.orientation) for i in query_anchor(
            build_anchor_index(graph), "CT"
        )
    )
    assert hits == scan_incidences(graph, "CT")
    # CT starts the unitigs carrying CTG and CTT, ends the one carrying ACT
    started = {graph.oriented_sequence(u, o)[:2] for u, s, o in hits if s == "starts_with"}
    ended = {graph.oriented_sequence(u, o)[-2:] for u, s, o in hits if s == "ends_with"}
    assert started == {"CT"} and ended == {"CT"}
    assert sum(1 for _, s, _ in hits if s == "starts_with") == 2
    assert sum(1 for _, s, _ in hits if s == "ends_with") == 1


def test_anchor_single_unitig_keys():
    graph, _ = graph_from_sequences(["ACTGA"], 3)
    idx = build_anchor_index(graph)
    assert query_anchor(idx, "AC") == [Incidence(0, "starts_with", "+")]
    assert query_anchor(idx, "GA") == [Incidence(0, "ends_with", "+")]
    # the reverse-complement written forms hit the mirrored incidences
    assert query_anchor(idx, "GT") == [Incidence(0, "ends_with", "-")]
    assert query_anchor(idx, "TC") == [Incidence(0, "starts_with", "-")]
    assert query_anchor(idx, "GG") == []


def test_anchor_wrong_length_rejected():
    graph, _ = graph_from_sequences(["ACTGA"], 3)
    idx = build_anchor_index(graph)
    with pytest.raises(ValueError, match="length 2"):
        query_anchor(idx, "ACT")


def test_anchor_empty_graph():
    idx = AnchorIndex(k=3)
    assert len(idx) == 0
    assert query_anchor(idx, "AC") == []


def test_anchor_palindromic_key_merges_orientation_classes():
    # k=5 unitig ending in ATAT, which is its own reverse complement
    graph = build_graph(["GGATAT", "ATATCC"], 5)
    idx = build_anchor_index(graph)
    hits = set(
        (i.unitig_id, i.side, i.orientation) for i in query_anchor(idx, "ATAT")
    )
    assert hits == scan_incidences(graph, "ATAT")
    orientations = {o for _, _, o in hits}
    assert orientations == {"+", "-"}


def test_anchor_matches_scan_oracle_on_random_graphs():
    rng = random.Random(404)
    for seed in range(15):
        k = (5, 7, 9)[seed % 3]
        genome = random_genome(seed + 5000, 350)
        graph, _ = graph_from_sequences([genome], k)
        idx = build_anchor_index(graph)
        mers = set()
        for u in graph.unitigs:
            mers.add(u.sequence[: k - 1])
            mers.add(u.sequence[-(k - 1) :])
            mers.add(naive_rc(u.sequence[: k - 1]))
        for _ in range(10):
            mers.add("".join(rng.choice("ACGT") for _ in range(k - 1)))
        for mer in mers:
            got = set(
                (i.unitig_id, i.side, i.orientation) for i in query_anchor(idx, mer)
            )
            assert got == scan_incidences(graph, mer), (mer, seed)


def test_every_unitig_contributes_prefix_and_suffix():
    genome = random_genome(42, 600)
    graph, _ = graph_from_sequences([genome], 7)
    idx = build_anchor_index(graph)
    for u in graph.unitigs:
        pre = query_anchor(idx, u.sequence[:6])
        suf = query_anchor(idx, u.sequence[-6:])
        assert any(
            i.unitig_id == u.id and i.side == "starts_with" and i.orientation == "+"
            for i in pre
        )
        assert any(
            i.unitig_id == u.id and i.side == "ends_with" and i.orientation == "+"
            for i in suf
        )


def test_sharing_bound_on_random_graphs():
    for seed in range(20):
        k = (5, 7, 9)[seed % 3]
        genome = random_genome(seed + 900, 500)
        graph, _ = graph_from_sequences([genome], k)
        idx = build_anchor_index(graph)
        from cdbgmap.sequences import decode_kmer, rc_code

        for key in idx.keys():
            mer = decode_kmer(key, k - 1)
            if rc_code(key, k - 1) == key:
                continue  # palindromic keys merge both classes and are exempt
            assert len(idx.starts_with_key(key)) <= 4
            assert len(idx.ends_with_key(key)) <= 4


def test_interior_example():
    graph = build_graph(["ACTGA"], 3)
    idx = build_interior_index(graph)
    assert query_interior(idx, "CT") == [(0, 1, "+")]
    # reverse-strand written form of the same site
    assert query_interior(idx, "AG") == [(0, 2, "-")]


def test_interior_repeat_ascending_offsets():
    graph = build_graph(["ACTACT"], 3)
    idx = build_interior_index(graph)
    hits = query_interior(idx, "AC")
    assert [(u, off) for u, off, o in hits if o == "+"] == [(0, 0), (0, 3)]


def test_interior_threshold_filters_everything():
    graph = build_graph(["ACTGA"], 3)
    idx = build_interior_index(graph, min_length=10)
    assert query_interior(idx, "CT") == []


def test_interior_matches_scan_oracle():
    rng = random.Random(777)
    for seed in range(10):
        k = (5, 7)[seed % 2]
        genome = random_genome(seed + 300, 300)
        graph, _ = graph_from_sequences([genome], k)
        idx = build_interior_index(graph)
        mers = {genome[i : i + k - 1] for i in range(0, 200, 17)}
        mers |= {"".join(rng.choice("ACGT") for _ in range(k - 1)) for _ in range(8)}
        for mer in mers:
            assert set(query_interior(idx, mer)) == scan_interior(graph, mer)


def test_interior_palindromic_mer_hits_both_strands():
    graph = build_graph(["GGATATCC"], 5)
    idx = build_interior_index(graph)
    got = set(query_interior(idx, "ATAT"))
    assert got == scan_interior(graph, "ATAT")
    assert {o for _, _, o in got} == {"+", "-"}


def test_interior_stride_sampling():
    graph = build_graph(["ACTACTACT"], 3)
    dense = build_interior_index(graph, stride=1)
    sparse = build_interior_index(graph, stride=2)
    assert len(query_interior(sparse, "CT")) < len(
        query_interior(dense, "CT")
    )


def test_serialization_round_trip_and_reproducibility(tmp_path):
    genome = random_genome(31415, 800)
    graph, _ = graph_from_sequences([genome], 7)
    anchor = build_anchor_index(graph)
    interior = build_interior_index(graph, min_length=3, stride=1)
    p1, p2 = tmp_path / "a.idx", tmp_path / "b.idx"
    save_indexes(p1, anchor, interior)
    anchor2, interior2 = load_indexes(p1)
    assert anchor2._table == anchor._table
    assert interior2._table == interior._table
    assert (anchor2.k, interior2.min_length, interior2.stride) == (7, 3, 1)
    # equal graphs give byte-identical files
    graph_b, _ = graph_from_sequences([genome], 7)
    save_indexes(p2, build_anchor_index(graph_b), build_interior_index(graph_b, 3, 1))
    assert p1.read_bytes() == p2.read_bytes()


def test_load_rejects_garbage(tmp_path):
    p = tmp_path / "bad.idx"
    p.write_bytes(b"WRONGMAG" + b"\x00" * 24)
    with pytest.raises(ValueError, match="not an index"):
        load_indexes(p)


def test_approximate_bytes_positive():
    graph = build_graph(["ACTGACCTGA"], 3)
    anchor = build_anchor_index(graph)
    interior = build_interior_index(graph)
    assert approximate_bytes(anchor) > 0
    assert approximate_bytes(interior) > 0
