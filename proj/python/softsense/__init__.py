"""Graph-attention soft sensing for multivariate process data."""

from ._softsense import (
    Checkpoint,
    attention_matrix,
    cosine_similarity,
    embedding_correlation,
    evaluate,
    gen_synth,
    init_embeddings,
    load_csv,
    mape,
    nmae,
    nrmse,
    r2,
    topk_adjacency,
    train,
)

__all__ = [
    "Checkpoint",
    "attention_matrix",
    "cosine_similarity",
    "embedding_correlation",
    "evaluate",
    "gen_synth",
    "init_embeddings",
    "load_csv",
    "mape",
    "nmae",
    "nrmse",
    "r2",
    "topk_adjacency",
    "train",
]
