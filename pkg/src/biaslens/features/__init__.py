from .embeddings import (
    EmbeddingModel,
    embed_token,
    load_embeddings,
    save_embeddings,
    train_embeddings,
)
from .tfidf import TfidfModel, fit_tfidf, load_tfidf, save_tfidf, transform, transform_many
from .assemble import (
    DocFeatureVector,
    TokenFeatureRow,
    assemble_doc_features,
    assemble_token_features,
    doc_feature_width,
    pack_doc_features,
    pack_token_features,
    token_feature_names,
)

__all__ = [
    "EmbeddingModel", "train_embeddings", "embed_token",
    "save_embeddings", "load_embeddings",
    "TfidfModel", "fit_tfidf", "transform", "transform_many",
    "save_tfidf", "load_tfidf",
    "TokenFeatureRow", "DocFeatureVector",
    "assemble_token_features", "assemble_doc_features",
    "pack_token_features", "pack_doc_features",
    "token_feature_names", "doc_feature_width",
]
