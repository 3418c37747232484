"""Sparse blossom minimum-weight embedded matching decoder."""
from .graph import (
    DetectorGraph, Edge, SignSplit, discretize_weights, format_graph_file, gen_lattice_graph,
    gen_repetition_graph, parse_graph_file, split_signs, weight_from_probability,
)
from .decoder import (
    Decoder, MwemSolution, SignedDecoder, decode, decode_batch, decode_signed, verify_solution,
)
from .matcher import UnmatchableSyndromeError
from .oracle import oracle_decode

__all__ = [
    "DetectorGraph", "Edge", "SignSplit", "discretize_weights", "format_graph_file",
    "gen_lattice_graph", "gen_repetition_graph", "parse_graph_file", "split_signs",
    "weight_from_probability", "Decoder", "MwemSolution", "SignedDecoder", "decode",
    "decode_batch", "decode_signed", "verify_solution", "UnmatchableSyndromeError",
    "oracle_decode",
]
