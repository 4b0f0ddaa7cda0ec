"""Fact-driven logical reasoning over parsed text.

Pipeline: entity-predicate-entity fact extraction from dependency parses,
Levi-form supergraph construction, a gated relational graph encoder fused
with a sequence encoder, question-option interaction, a hierarchical answer
decoder, and a desk-scale training harness.
"""

from .config import ABLATION_FLAGS, Ablations, ModelConfig
from .corpus import Example, ParsedSentence, Token, load_dataset, load_embeddings, save_dataset
from .extraction import detect_negation, extract_triplets, reformulate_question
from .model import FocalReasoner, build_model
from .supergraph import assemble_supergraph, build_fact_levi, export_dot, supergraph_for_example
from .training import evaluate, predict, train

__version__ = "0.1.0"

__all__ = [
    "ABLATION_FLAGS",
    "Ablations",
    "Example",
    "FocalReasoner",
    "ModelConfig",
    "ParsedSentence",
    "Token",
    "assemble_supergraph",
    "build_fact_levi",
    "build_model",
    "detect_negation",
    "evaluate",
    "export_dot",
    "extract_triplets",
    "load_dataset",
    "load_embeddings",
    "predict",
    "reformulate_question",
    "save_dataset",
    "supergraph_for_example",
    "train",
]
