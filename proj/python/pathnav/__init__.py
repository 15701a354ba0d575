"""Python bindings for the pathnav C++ core."""

from ._core import (
    EMBEDDING_DIM,
    PathnavError,
    accuracy,
    auroc_ovr_macro,
    checklist_accuracy,
    decode_emb1,
    encode_emb1,
    format_decision,
    generate_slides,
    km_estimate,
    logrank_test,
    macro_f1,
    navigate,
    paired_t_test,
    parse_decision,
    preprocess,
    read_embeddings,
    score_heads,
    toy_encode,
    write_embeddings,
)

__version__ = "0.3.0"

__all__ = [
    "EMBEDDING_DIM",
    "PathnavError",
    "accuracy",
    "auroc_ovr_macro",
    "checklist_accuracy",
    "decode_emb1",
    "encode_emb1",
    "format_decision",
    "generate_slides",
    "km_estimate",
    "logrank_test",
    "macro_f1",
    "navigate",
    "paired_t_test",
    "parse_decision",
    "preprocess",
    "read_embeddings",
    "score_heads",
    "toy_encode",
    "write_embeddings",
]
