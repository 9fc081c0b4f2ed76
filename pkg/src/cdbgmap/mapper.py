"""Read mapping onto unitig paths of a compacted de Bruijn graph.

Two regimes exist.  A read that fits inside one unitig is placed by the
interior index (single-unitig regime).  A read spanning two or more unitigs
is mapped by the greedy seed-and-extend procedure (branching regime):

1. its (k-1)-mer windows that are indexed unitig overlaps are detected;
2. among the first `max_anchor_attempts` detected overlaps, a unitig ending
   with the overlap must align the read's left extremity (begin anchor);
3. symmetrically, among the last ones, a unitig starting with the overlap
   must align the right extremity (end anchor);
4. the gap between the two anchors is covered junction by junction, always
   keeping the cumulative Hamming cost within the mismatch budget.

Within one cover there is no backtracking; when a cover fails, the anchor
loops move on to the next begin/end overlap until the attempt budgets are
spent.  At a junction the candidate whose suffix lands exactly on the next
detected overlap is tried first and, if it fits the budget, the remaining
candidates are skipped; that shortcut is disabled at the first and last
detected overlaps of the read.  Ties are always broken by smallest unitig
id, then forward orientation, so results are deterministic.

The exhaustive mapper anchors like the greedy one (begin anchors only) and
then explores every junction choice with branch-and-bound, which makes its
cost a lower bound for the greedy cost on every read.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .graph import CompactedGraph
from .index import AnchorIndex, Incidence, InteriorIndex, query_anchor
from .sequences import (
    Read,
    encode_kmer,
    rc_code,
    reverse_complement_read,
    window_codes,
)

SINGLE_UNITIG = "single_unitig"
BRANCHING_PATH = "branching_path"
UNMAPPED = "unmapped"

NO_ANCHOR = "no_anchor"
BEGIN_NOT_FOUND = "begin_not_found"
END_NOT_FOUND = "end_not_found"
COVER_FAILED = "cover_failed"
BUDGET_EXCEEDED = "budget_exceeded"

_REASON_PRIORITY = {
    None: -1,
    NO_ANCHOR: 0,
    BEGIN_NOT_FOUND: 1,
    END_NOT_FOUND: 2,
    COVER_FAILED: 3,
    BUDGET_EXCEEDED: 4,
}

_ORIENTS = ("+", "-")


@dataclass(frozen=True)
class MappingParams:
    """Mapping knobs: mismatch budget, anchor attempts per direction, strands.

    The defaults (two mismatches, two anchor attempts, both strands) are the
    ones every evaluation in this package uses."""

    max_mismatches: int = 2
    max_anchor_attempts: int = 2
    strand_mode: str = "both"  # "both" or "forward_only"

    def __post_init__(self):
        if self.max_mismatches < 0:
            raise ValueError("max_mismatches must be >= 0")
        if self.max_anchor_attempts < 1:
            raise ValueError("max_anchor_attempts must be >= 1")
        if self.strand_mode not in ("both", "forward_only"):
            raise ValueError(f"unknown strand_mode {self.strand_mode!r}")

    @property
    def strands(self) -> tuple[str, ...]:
        return ("+", "-") if self.strand_mode == "both" else ("+",)


@dataclass(frozen=True)
class MappingResult:
    read_id: str
    regime: str
    strand: str | None = None
    path: tuple[tuple[int, str], ...] = ()
    start_offset: int | None = None
    mismatches: int | None = None
    mismatch_positions: tuple[int, ...] = ()
    reason: str | None = None
    repeated: bool = False
    truncated: bool = False

    @property
    def mapped(self) -> bool:
        return self.regime != UNMAPPED


def _hamming(a: str, b: str, limit: int):
    """Mismatch count and positions between equal-length strings, aborting
    with (count, None) as soon as the count exceeds `limit`."""
    if a == b:
        return 0, ()
    cost = 0
    out = []
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            cost += 1
            if cost > limit:
                return cost, None
            out.append(i)
    return cost, tuple(out)


def _require_length(seq: str, k: int) -> None:
    if len(seq) < k:
        raise ValueError("read below k")


def detect_read_overlaps(
    read: Read | str, index: AnchorIndex
) -> list[tuple[int, str, list[Incidence]]]:
    """Indexed overlaps present in the read, in ascending position order."""
    seq = read.sequence if isinstance(read, Read) else read
    _require_length(seq, index.k)
    out = []
    for pos, fwd, rc in window_codes(seq, index.k - 1):
        if index.has_key_codes(fwd, rc):
            mer = seq[pos : pos + index.k - 1]
            out.append((pos, mer, query_anchor(index, mer)))
    return out


# One detected overlap in hot-path form: (position, fwd_code, rc_code).
def _detected(wins, anchor: AnchorIndex):
    has = anchor.has_key_codes
    return [w for w in wins if has(w[1], w[2])]


@dataclass
class _Attempt:
    """Internal outcome of one strand pass."""

    path: list = field(default_factory=list)
    start_offset: int = 0
    cost: int = 0
    positions: tuple = ()
    reason: str | None = None

    @property
    def ok(self) -> bool:
        return self.reason is None


def _worse(reason_a: str | None, reason_b: str | None) -> str | None:
    return reason_a if _REASON_PRIORITY[reason_a] >= _REASON_PRIORITY[reason_b] else reason_b


def _branch_pass(
    seq: str,
    wins,
    graph: CompactedGraph,
    anchor: AnchorIndex,
    params: MappingParams,
) -> _Attempt:
    k = graph.k
    k1 = k - 1
    t = params.max_mismatches
    n = params.max_anchor_attempts
    length = len(seq)
    oriented = graph.oriented_sequence

    dets = _detected(wins, anchor)
    if not dets:
        return _Attempt(reason=NO_ANCHOR)
    det_positions = [d[0] for d in dets]
    first_det = det_positions[0]
    last_det = det_positions[-1]

    failure = BEGIN_NOT_FOUND
    for pos_b, bf, br in dets[:n]:
        begin = None
        for uid, orient in sorted(anchor.ends_with_codes(bf, br)):
            s = oriented(uid, _ORIENTS[orient])
            left_start = len(s) - k1 - pos_b
            if left_start < 0:
                continue  # read would extend past the unitig start
            cost_b, plist_b = _hamming(seq[:pos_b], s[left_start : left_start + pos_b], t)
            if plist_b is None:
                continue
            begin = (uid, _ORIENTS[orient], left_start, cost_b, plist_b)
            break  # first success fixes the begin for this overlap
        if begin is None:
            continue
        failure = _worse(failure, END_NOT_FOUND)

        uid_b, orient_b, left_start, cost_b, plist_b = begin
        attempts_e = 0
        for pos_e, ef, er in reversed(dets):
            if attempts_e >= n:
                break
            if pos_e < pos_b:
                attempts_e += 1
                continue
            attempts_e += 1
            tail_len = length - pos_e - k1
            end = None
            for uid, orient in sorted(anchor.starts_with_codes(ef, er)):
                s = oriented(uid, _ORIENTS[orient])
                if len(s) - k1 < tail_len:
                    continue  # read would extend past the unitig end
                cost_e, plist_e = _hamming(
                    seq[pos_e + k1 :], s[k1 : k1 + tail_len], t - cost_b
                )
                if plist_e is None:
                    continue
                end = (uid, _ORIENTS[orient], cost_e, plist_e)
                break
            if end is None:
                continue
            result = _greedy_cover(
                seq, graph, anchor, dets, begin, end, pos_b, bf, br, pos_e, t,
                first_det, last_det,
            )
            if result.ok:
                return result
            failure = _worse(failure, result.reason)
    return _Attempt(reason=failure)


def _greedy_cover(
    seq, graph, anchor, dets, begin, end, pos_b, bf, br, pos_e, t, first_det, last_det
) -> _Attempt:
    k1 = graph.k - 1
    length = len(seq)
    oriented = graph.oriented_sequence
    uid_b, orient_b, left_start, cost_b, plist_b = begin
    uid_e, orient_e, cost_e, plist_e = end

    path: list[tuple[int, str]] = []
    positions: list[int] = list(plist_b)
    start_offset = 0
    if pos_b > 0:
        # a begin anchored at read position 0 covers nothing left of the
        # junction token, so it is not emitted as a path element
        path.append((uid_b, orient_b))
        start_offset = left_start

    remaining = t - cost_b - cost_e
    cost_mid = 0
    jpos = pos_b
    token_f, token_r = bf, br
    token_str = seq[pos_b : pos_b + k1]
    det_iter_positions = [d[0] for d in dets]

    while True:
        if jpos == pos_e:
            if token_str != seq[pos_e : pos_e + k1]:
                return _Attempt(reason=COVER_FAILED)
            if pos_e + k1 < length:
                path.append((uid_e, orient_e))
                positions.extend(pos_e + k1 + p for p in plist_e)
            return _Attempt(
                path=path,
                start_offset=start_offset,
                cost=cost_b + cost_mid + cost_e,
                positions=tuple(positions),
            )

        candidates = sorted(anchor.starts_with_codes(token_f, token_r))
        if not candidates:
            return _Attempt(reason=COVER_FAILED)

        next_det = None
        for p in det_iter_positions:
            if p > jpos:
                next_det = p
                break

        chosen = None
        structural = False
        # junction shortcut: try the candidate landing on the next detected
        # overlap first, unless we sit on the first detected overlap or the
        # landing would be the last one
        if next_det is not None and jpos != first_det and next_det != last_det:
            for uid, orient in candidates:
                s = oriented(uid, _ORIENTS[orient])
                jnext = jpos + len(s) - k1
                if jnext != next_det or jnext > pos_e:
                    continue
                if s[-k1:] != seq[next_det : next_det + k1]:
                    continue
                cost_u, plist = _hamming(
                    seq[jpos + k1 : jpos + len(s)], s[k1:], remaining - cost_mid
                )
                if plist is not None:
                    chosen = (cost_u, uid, orient, s, jnext, plist)
                break
        if chosen is None:
            best = None
            for uid, orient in candidates:
                s = oriented(uid, _ORIENTS[orient])
                jnext = jpos + len(s) - k1
                if jnext > pos_e:
                    continue
                structural = True
                cost_u, plist = _hamming(
                    seq[jpos + k1 : jpos + len(s)], s[k1:], remaining - cost_mid
                )
                if plist is None:
                    continue
                cand = (cost_u, uid, orient, s, jnext, plist)
                if best is None or cand[:3] < best[:3]:
                    best = cand
            if best is None:
                return _Attempt(
                    reason=BUDGET_EXCEEDED if structural else COVER_FAILED
                )
            chosen = best

        cost_u, uid, orient, s, jnext, plist = chosen
        path.append((uid, _ORIENTS[orient]))
        positions.extend(jpos + k1 + p for p in plist)
        cost_mid += cost_u
        jpos = jnext
        token_str = s[-k1:]
        token_f = encode_kmer(token_str)
        token_r = rc_code(token_f, k1)


def _finish(read_id: str, strand: str, attempt: _Attempt) -> MappingResult:
    path = tuple(attempt.path)
    uids = [u for u, _ in path]
    return MappingResult(
        read_id=read_id,
        regime=SINGLE_UNITIG if len(path) == 1 else BRANCHING_PATH,
        strand=strand,
        path=path,
        start_offset=attempt.start_offset,
        mismatches=attempt.cost,
        mismatch_positions=attempt.positions,
        repeated=len(set(uids)) != len(uids),
    )


def map_branching(
    read: Read,
    graph: CompactedGraph,
    anchor: AnchorIndex,
    params: MappingParams = MappingParams(),
) -> MappingResult:
    """Greedy mapping of a read across branching unitig paths."""
    _require_length(read.sequence, graph.k)
    reason = None
    for strand in params.strands:
        seq = read.sequence if strand == "+" else reverse_complement_read(read.sequence)
        wins = window_codes(seq, graph.k - 1)
        attempt = _branch_pass(seq, wins, graph, anchor, params)
        if attempt.ok:
            return _finish(read.id, strand, attempt)
        reason = _worse(reason, attempt.reason)
    return MappingResult(read_id=read.id, regime=UNMAPPED, reason=reason)


def _single_pass(
    seq: str,
    wins,
    graph: CompactedGraph,
    interior: InteriorIndex,
    params: MappingParams,
) -> _Attempt:
    t = params.max_mismatches
    n = params.max_anchor_attempts
    length = len(seq)
    unitigs = graph.unitigs
    table_get = interior._table.get

    attempts = 0
    failure = NO_ANCHOR
    for pos, f, r in wins:
        key = f if f <= r else r
        entry = table_get(key)
        if not entry:
            continue
        # this strand pass only places the read on the forward unitig text;
        # reverse placements surface through the reverse-complement pass
        want = 1 if f == key else 0
        best = None
        structural = False
        seeded = False
        for uid, off, canon_written in entry:
            if canon_written != want:
                continue
            seeded = True
            start = off - pos
            if start < 0:
                continue
            useq = unitigs[uid].sequence
            if start + length > len(useq):
                continue
            structural = True
            cost, plist = _hamming(seq, useq[start : start + length], t)
            if plist is None:
                continue
            cand = (cost, uid, start, plist)
            if best is None or cand[:3] < best[:3]:
                best = cand
        if not seeded:
            continue
        if best is not None:
            cost, uid, start, plist = best
            return _Attempt(
                path=[(uid, "+")], start_offset=start, cost=cost, positions=plist
            )
        failure = _worse(failure, BUDGET_EXCEEDED if structural else COVER_FAILED)
        attempts += 1
        if attempts >= n:
            break
    return _Attempt(reason=failure)


def map_single_unitig(
    read: Read,
    graph: CompactedGraph,
    interior: InteriorIndex,
    params: MappingParams = MappingParams(),
) -> MappingResult:
    """Place a read entirely inside one unitig via the interior index."""
    _require_length(read.sequence, graph.k)
    reason = None
    for strand in params.strands:
        seq = read.sequence if strand == "+" else reverse_complement_read(read.sequence)
        wins = window_codes(seq, graph.k - 1)
        attempt = _single_pass(seq, wins, graph, interior, params)
        if attempt.ok:
            return _finish(read.id, strand, attempt)
        reason = _worse(reason, attempt.reason)
    return MappingResult(read_id=read.id, regime=UNMAPPED, reason=reason)


def map_read(
    read: Read,
    graph: CompactedGraph,
    anchor: AnchorIndex,
    interior: InteriorIndex,
    params: MappingParams = MappingParams(),
) -> MappingResult:
    """Dispatch over both regimes: single-unitig first, then branching; the
    cheaper result wins and ties go to the single-unitig placement."""
    _require_length(read.sequence, graph.k)
    single: MappingResult | None = None
    branching: MappingResult | None = None
    for strand in params.strands:
        seq = read.sequence if strand == "+" else reverse_complement_read(read.sequence)
        wins = window_codes(seq, graph.k - 1)
        if single is None or not single.mapped:
            attempt = _single_pass(seq, wins, graph, interior, params)
            if attempt.ok:
                single = _finish(read.id, strand, attempt)
                if single.mismatches == 0:
                    return single  # nothing can beat a perfect placement
            else:
                single = _merge_unmapped(read.id, single, attempt.reason)
        if branching is None or not branching.mapped:
            attempt = _branch_pass(seq, wins, graph, anchor, params)
            if attempt.ok:
                branching = _finish(read.id, strand, attempt)
            else:
                branching = _merge_unmapped(read.id, branching, attempt.reason)
        if single.mapped and branching.mapped:
            break
    if single.mapped and branching.mapped:
        return single if single.mismatches <= branching.mismatches else branching
    if single.mapped:
        return single
    if branching.mapped:
        return branching
    return MappingResult(
        read_id=read.id,
        regime=UNMAPPED,
        reason=_worse(single.reason, branching.reason),
    )


def _merge_unmapped(
    read_id: str, prev: MappingResult | None, reason: str | None
) -> MappingResult:
    merged = reason if prev is None else _worse(prev.reason, reason)
    return MappingResult(read_id=read_id, regime=UNMAPPED, reason=merged)


def _exhaustive_pass(
    seq: str,
    wins,
    graph: CompactedGraph,
    anchor: AnchorIndex,
    params: MappingParams,
    expansion_budget: int,
    collect_limit: int,
):
    """Branch-and-bound over all junction choices from the begin anchors.

    Returns (list of co-optimal _Attempts, reason, truncated, budget_blocked).
    """
    k1 = graph.k - 1
    t = params.max_mismatches
    n = params.max_anchor_attempts
    length = len(seq)
    oriented = graph.oriented_sequence

    dets = _detected(wins, anchor)
    if not dets:
        return [], NO_ANCHOR, False, False

    best_cost = t + 1
    results: list[_Attempt] = []
    expansions = 0
    truncated = False
    budget_blocked = False
    anchored = False

    def record(path, start_offset, cost, positions):
        nonlocal best_cost, results
        if cost < best_cost:
            best_cost = cost
            results = []
        if cost == best_cost and len(results) < collect_limit:
            # the same path can be reached from several begin anchors
            if any(a.path == list(path) and a.start_offset == start_offset for a in results):
                return
            results.append(
                _Attempt(
                    path=list(path),
                    start_offset=start_offset,
                    cost=cost,
                    positions=tuple(positions),
                )
            )

    def dfs(jpos, token_f, token_r, cost_so_far, path, positions, start_offset):
        nonlocal expansions, truncated, budget_blocked
        if truncated:
            return
        for uid, orient in sorted(anchor.starts_with_codes(token_f, token_r)):
            expansions += 1
            if expansions > expansion_budget:
                truncated = True
                return
            s = oriented(uid, _ORIENTS[orient])
            budget = min(t, best_cost) - cost_so_far
            if budget < 0:
                return
            if jpos + len(s) >= length:
                cost_u, plist = _hamming(
                    seq[jpos + k1 :], s[k1 : length - jpos], budget
                )
                if plist is None:
                    budget_blocked = True
                    continue
                record(
                    path + [(uid, _ORIENTS[orient])],
                    start_offset,
                    cost_so_far + cost_u,
                    positions + [jpos + k1 + p for p in plist],
                )
            else:
                cost_u, plist = _hamming(
                    seq[jpos + k1 : jpos + len(s)], s[k1:], budget
                )
                if plist is None:
                    budget_blocked = True
                    continue
                token = s[-k1:]
                tf = encode_kmer(token)
                dfs(
                    jpos + len(s) - k1,
                    tf,
                    rc_code(tf, k1),
                    cost_so_far + cost_u,
                    path + [(uid, _ORIENTS[orient])],
                    positions + [jpos + k1 + p for p in plist],
                    start_offset,
                )

    for pos_b, bf, br in dets[:n]:
        for uid, orient in sorted(anchor.ends_with_codes(bf, br)):
            s = oriented(uid, _ORIENTS[orient])
            left_start = len(s) - k1 - pos_b
            if left_start < 0:
                continue
            cost_b, plist_b = _hamming(
                seq[:pos_b], s[left_start : left_start + pos_b], min(t, best_cost)
            )
            if plist_b is None:
                budget_blocked = True
                continue
            anchored = True
            if pos_b + k1 == length:
                record([(uid, _ORIENTS[orient])], left_start, cost_b, list(plist_b))
                continue
            path0 = [] if pos_b == 0 else [(uid, _ORIENTS[orient])]
            dfs(pos_b, bf, br, cost_b, path0, list(plist_b), 0 if pos_b == 0 else left_start)

    if results:
        return results, None, truncated, budget_blocked
    if not anchored:
        return [], BEGIN_NOT_FOUND, truncated, budget_blocked
    return [], BUDGET_EXCEEDED if budget_blocked else COVER_FAILED, truncated, budget_blocked


def map_exhaustive(
    read: Read,
    graph: CompactedGraph,
    anchor: AnchorIndex,
    params: MappingParams = MappingParams(),
    expansion_budget: int = 200_000,
) -> MappingResult:
    """Minimum-cost mapping over all anchored paths; cost never exceeds the
    greedy mapper's on the same input."""
    results = map_exhaustive_all(read, graph, anchor, params, expansion_budget, limit=1)
    return results[0]


def map_exhaustive_all(
    read: Read,
    graph: CompactedGraph,
    anchor: AnchorIndex,
    params: MappingParams = MappingParams(),
    expansion_budget: int = 200_000,
    limit: int = 1,
) -> list[MappingResult]:
    """Up to `limit` co-optimal exhaustive mappings (at least one element;
    a single unmapped result when nothing is reachable)."""
    _require_length(read.sequence, graph.k)
    best: list[MappingResult] = []
    best_cost = None
    reason = None
    truncated_any = False
    for strand in params.strands:
        seq = read.sequence if strand == "+" else reverse_complement_read(read.sequence)
        wins = window_codes(seq, graph.k - 1)
        attempts, fail, truncated, _ = _exhaustive_pass(
            seq, wins, graph, anchor, params, expansion_budget, limit
        )
        truncated_any = truncated_any or truncated
        if attempts:
            cost = attempts[0].cost
            if best_cost is None or cost < best_cost:
                best_cost = cost
                best = [
                    replace(_finish(read.id, strand, a), truncated=truncated)
                    for a in attempts
                ]
        else:
            reason = _worse(reason, fail)
    if best:
        return best[:limit]
    return [
        MappingResult(
            read_id=read.id, regime=UNMAPPED, reason=reason, truncated=truncated_any
        )
    ]


# ---------------------------------------------------------------------------
# Parallel mapping: stateless per read over shared immutable structures.
# Workers are forked so the graph and indexes are inherited, never pickled;
# output order always matches input order, whatever the worker count.

_WORKER_STATE: tuple | None = None


def _map_chunk(chunk: Sequence[Read]) -> list[MappingResult]:
    graph, anchor, interior, params = _WORKER_STATE
    return [map_read(r, graph, anchor, interior, params) for r in chunk]


def map_reads(
    reads: Iterable[Read],
    graph: CompactedGraph,
    anchor: AnchorIndex,
    interior: InteriorIndex,
    params: MappingParams = MappingParams(),
    threads: int = 1,
    chunk_size: int = 1024,
) -> list[MappingResult]:
    """Map reads preserving input order, optionally over forked workers."""
    reads = list(reads)
    if threads <= 1 or len(reads) <= chunk_size:
        return [map_read(r, graph, anchor, interior, params) for r in reads]
    global _WORKER_STATE
    _WORKER_STATE = (graph, anchor, interior, params)
    try:
        ctx = multiprocessing.get_context("fork")
    except ValueError:  # pragma: no cover - no fork on this platform
        _WORKER_STATE = None
        return [map_read(r, graph, anchor, interior, params) for r in reads]
    try:
        chunks = [reads[i : i + chunk_size] for i in range(0, len(reads), chunk_size)]
        out: list[MappingResult] = []
        with ctx.Pool(processes=threads) as pool:
            for part in pool.imap(_map_chunk, chunks):
                out.extend(part)
        return out
    finally:
        _WORKER_STATE = None
