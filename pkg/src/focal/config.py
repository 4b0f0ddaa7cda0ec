"""Model and training configuration."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields

ABLATION_FLAGS = (
    "no_global_atom",
    "no_coref",
    "single_edge_type",
    "no_interaction",
    "beta_zero",
    "entity_only",
    "no_question_marker",
    "question_only_global",
)


@dataclass
class Ablations:
    no_global_atom: bool = False
    no_coref: bool = False
    single_edge_type: bool = False
    no_interaction: bool = False
    beta_zero: bool = False
    entity_only: bool = False
    no_question_marker: bool = False
    question_only_global: bool = False

    def active(self):
        return tuple(name for name in ABLATION_FLAGS if getattr(self, name))


@dataclass
class ModelConfig:
    """Hyperparameters and switches.

    ``d`` and ``learning_rate`` left unset follow the backbone: 64 and 1e-3
    for the trainable embedding backbone, 1024 and 8e-6 for frozen
    precomputed vectors.  One supergraph carries one global atom; treating
    the options as additional graph vertices is deliberately not a mode.
    """

    d: int | None = None
    graph_layers: int = 2
    max_seq_len: int = 384
    epochs: int = 10
    batch_size: int = 16
    learning_rate: float | None = None
    weight_decay: float = 0.01
    warmup_proportion: float = 0.1
    dropout: float = 0.1
    alpha: float = 1.0
    beta: float = 0.5
    seed: int = 0
    backbone: str = "trainable"  # "trainable" | "precomputed"
    embeddings_path: str | None = None  # required for the precomputed backbone
    grad_clip_norm: float | None = 1.0
    early_stop_acc: float | None = None  # stop when dev accuracy reaches this
    decoder_e2_literal: bool = False  # see decoder module
    ablations: Ablations = field(default_factory=Ablations)

    def __post_init__(self):
        if isinstance(self.ablations, dict):
            self.ablations = Ablations(**self.ablations)
        if self.d is None:
            self.d = 1024 if self.backbone == "precomputed" else 64
        if self.learning_rate is None:
            self.learning_rate = 8e-6 if self.backbone == "precomputed" else 1e-3
        for name in ("d", "graph_layers", "max_seq_len", "epochs", "batch_size"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.backbone not in ("trainable", "precomputed"):
            raise ValueError(f"unknown backbone {self.backbone!r}")
        if not 0.0 <= self.warmup_proportion < 1.0:
            raise ValueError("warmup_proportion must lie in [0, 1)")

    @property
    def effective_beta(self):
        return 0.0 if self.ablations.beta_zero else self.beta

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, obj):
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def with_ablations(self, names):
        """Copy of this config with the given ablation flags switched on."""
        obj = self.to_dict()
        for name in names:
            if name not in ABLATION_FLAGS:
                raise ValueError(
                    f"unknown ablation {name!r}; choose from {', '.join(ABLATION_FLAGS)}"
                )
            obj["ablations"][name] = True
        return ModelConfig.from_dict(obj)

    def hash(self):
        canon = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]

    def run_manifest(self):
        """The settings echoed into logs and checkpoints."""
        return {
            "backbone": self.backbone,
            "d": self.d,
            "layers": self.graph_layers,
            "seed": self.seed,
            "alpha": self.alpha,
            "beta": self.effective_beta,
            "ablations": list(self.ablations.active()),
            "config_hash": self.hash(),
        }
