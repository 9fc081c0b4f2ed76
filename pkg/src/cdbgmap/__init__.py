"""Compacted de Bruijn graph construction and short-read mapping on its
branching unitig paths, with an exhaustive audit mapper and an accuracy
evaluation harness."""

from .census import (
    KmerCensus,
    SolidKmerSet,
    count_kmers,
    load_solid,
    save_solid,
    solid_set,
)
from .evaluation import (
    EvalReport,
    EvalRow,
    SimConfig,
    SimulatedRead,
    build_reference_graph,
    distance_to_optimum,
    run_accuracy_sweep,
    simulate_reads,
)
from .fastx import read_sequences, write_fasta
from .graph import (
    CompactedGraph,
    DbgWalk,
    PathEnumeration,
    Unitig,
    compact,
    enumerate_paths,
    read_unitigs_fasta,
    walk_sequence,
    write_gfa,
    write_unitigs_fasta,
)
from .index import (
    AnchorIndex,
    Incidence,
    InteriorIndex,
    build_anchor_index,
    build_interior_index,
    load_indexes,
    query_anchor,
    query_interior,
    save_indexes,
)
from .mapper import (
    MappingParams,
    MappingResult,
    detect_read_overlaps,
    map_branching,
    map_exhaustive,
    map_exhaustive_all,
    map_read,
    map_reads,
    map_single_unitig,
)
from .sequences import (
    MAX_K,
    Kmer,
    Read,
    canonical_kmer,
    enumerate_kmers,
    reverse_complement,
    reverse_complement_read,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorIndex",
    "CompactedGraph",
    "DbgWalk",
    "EvalReport",
    "EvalRow",
    "Incidence",
    "InteriorIndex",
    "Kmer",
    "KmerCensus",
    "MappingParams",
    "MappingResult",
    "MAX_K",
    "PathEnumeration",
    "Read",
    "SimConfig",
    "SimulatedRead",
    "SolidKmerSet",
    "Unitig",
    "build_anchor_index",
    "build_interior_index",
    "build_reference_graph",
    "canonical_kmer",
    "compact",
    "count_kmers",
    "detect_read_overlaps",
    "distance_to_optimum",
    "enumerate_kmers",
    "enumerate_paths",
    "load_indexes",
    "load_solid",
    "map_branching",
    "map_exhaustive",
    "map_exhaustive_all",
    "map_read",
    "map_reads",
    "map_single_unitig",
    "query_anchor",
    "query_interior",
    "read_sequences",
    "read_unitigs_fasta",
    "reverse_complement",
    "reverse_complement_read",
    "run_accuracy_sweep",
    "save_indexes",
    "save_solid",
    "simulate_reads",
    "solid_set",
    "walk_sequence",
    "write_fasta",
    "write_gfa",
    "write_unitigs_fasta",
]
