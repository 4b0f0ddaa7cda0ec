"""Training harness: Adam with decoupled weight decay, a linear
warmup/decay schedule, deterministic batched training with gradient
clipping, evaluation, prediction, and bitwise-reloadable checkpoints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .autodiff import NonFiniteError, Tape
from .config import ModelConfig
from .corpus import load_embeddings
from .encoders import Dropout, Vocab
from .model import FocalReasoner


class NumericAbort(RuntimeError):
    """Training hit a non-finite value; the last good checkpoint is kept."""

    def __init__(self, message, checkpoint_path=None):
        super().__init__(message)
        self.checkpoint_path = checkpoint_path


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0


def adam_step(params, grads, state, lr, weight_decay=0.0, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam update with decoupled weight decay.

    ``params`` maps names to Tensors, ``grads`` names to arrays.  Decay is
    applied as lr * wd * param alongside the moment update.
    """
    state.t += 1
    t = state.t
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(p.data)
        if not np.all(np.isfinite(g)):
            raise NumericAbort(f"non-finite gradient for parameter {name!r}")
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(p.data)
            v = np.zeros_like(p.data)
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * (g * g)
        state.m[name] = m
        state.v[name] = v
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        delta = m_hat / (np.sqrt(v_hat) + eps)
        if weight_decay:
            delta = delta + weight_decay * p.data
        p.data = p.data - lr * delta


def lr_at(step, total_steps, base_lr, warmup_proportion):
    """Linear warmup from 0 to base_lr, then linear decay to 0."""
    warmup = int(round(warmup_proportion * total_steps))
    if warmup > 0 and step < warmup:
        return base_lr * step / warmup
    if total_steps <= warmup:
        return base_lr
    return base_lr * (total_steps - step) / (total_steps - warmup)


def clip_gradients(grads, max_norm):
    """Scale all gradients so their global L2 norm is at most ``max_norm``."""
    total = 0.0
    for g in grads.values():
        total += float((g * g).sum())
    norm = np.sqrt(total)
    if norm > max_norm > 0:
        factor = max_norm / norm
        for name in grads:
            grads[name] = grads[name] * factor
    return norm


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(path, model, adam_state=None, epoch=0, rng=None):
    arrays = {}
    for name, p in model.parameters().items():
        arrays[f"param/{name}"] = p.data
    if adam_state is not None:
        for name, m in adam_state.m.items():
            arrays[f"adam_m/{name}"] = m
        for name, v in adam_state.v.items():
            arrays[f"adam_v/{name}"] = v
    meta = {
        "config": model.config.to_dict(),
        "config_hash": model.config.hash(),
        "vocab": list(model.vocab.tokens) if model.vocab is not None else None,
        "epoch": epoch,
        "adam_t": adam_state.t if adam_state is not None else 0,
        "rng_state": _jsonable_rng_state(rng),
    }
    arrays["meta"] = np.array(json.dumps(meta))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)
    return path


def _jsonable_rng_state(rng):
    if rng is None:
        return None
    state = rng.bit_generator.state
    return json.loads(json.dumps(state, default=int))


@dataclass
class Checkpoint:
    config: ModelConfig
    vocab_tokens: list | None
    params: dict
    adam: AdamState
    epoch: int
    rng_state: dict | None
    config_hash: str


def load_checkpoint(path):
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        params, adam_m, adam_v = {}, {}, {}
        for key in data.files:
            if key.startswith("param/"):
                params[key[len("param/"):]] = data[key]
            elif key.startswith("adam_m/"):
                adam_m[key[len("adam_m/"):]] = data[key]
            elif key.startswith("adam_v/"):
                adam_v[key[len("adam_v/"):]] = data[key]
    return Checkpoint(
        config=ModelConfig.from_dict(meta["config"]),
        vocab_tokens=meta["vocab"],
        params=params,
        adam=AdamState(m=adam_m, v=adam_v, t=meta["adam_t"]),
        epoch=meta["epoch"],
        rng_state=meta.get("rng_state"),
        config_hash=meta["config_hash"],
    )


def model_from_checkpoint(ckpt, embedding_file=None):
    # The Vocab constructor prepends the special tokens and skips them in
    # the input, so feeding the stored list back reproduces it exactly.
    vocab = Vocab(ckpt.vocab_tokens) if ckpt.vocab_tokens else None
    if vocab is not None and list(vocab.tokens) != list(ckpt.vocab_tokens):
        raise ValueError("checkpoint vocabulary does not round-trip")
    model = FocalReasoner(ckpt.config, vocab=vocab, embedding_file=embedding_file)
    current = model.parameters()
    if set(current) != set(ckpt.params):
        missing = set(current) ^ set(ckpt.params)
        raise ValueError(f"checkpoint parameter set mismatch: {sorted(missing)[:4]}...")
    for name, arr in ckpt.params.items():
        if current[name].data.shape != arr.shape:
            raise ValueError(
                f"checkpoint shape mismatch for {name}: {arr.shape} vs "
                f"{current[name].data.shape}"
            )
        current[name].data = arr.copy()
    return model


def load_embedding_file_for(config, examples):
    if config.backbone != "precomputed":
        return None
    if not config.embeddings_path:
        raise ValueError("precomputed backbone requires embeddings_path in the config")
    return load_embeddings(config.embeddings_path, examples, expected_d=config.d)


# ---------------------------------------------------------------------------
# loops


@dataclass
class EvalResult:
    accuracy: float
    n: int
    per_type: dict
    predictions: list


def evaluate(model, examples):
    """Accuracy over a labeled dataset, with a per-question-type breakdown
    when type tags are present."""
    unlabeled = [e.example_id for e in examples if e.label is None]
    if unlabeled:
        raise ValueError(
            f"dataset has unlabeled examples (e.g. {unlabeled[0]!r}); use predict instead"
        )
    correct = 0
    per_type = {}
    predictions = []
    for ex in examples:
        res = model.forward(ex, compute_loss=False)
        hit = res.prediction == ex.label
        correct += int(hit)
        predictions.append(
            {"example_id": ex.example_id, "prediction": res.prediction, "label": ex.label}
        )
        if ex.qtype:
            got = per_type.setdefault(ex.qtype, [0, 0])
            got[0] += int(hit)
            got[1] += 1
    per_type = {k: {"accuracy": c / n, "n": n} for k, (c, n) in sorted(per_type.items())}
    return EvalResult(
        accuracy=correct / len(examples) if examples else 0.0,
        n=len(examples),
        per_type=per_type,
        predictions=predictions,
    )


def predict(model, examples):
    """Logits and argmax predictions, one record per example."""
    out = []
    for ex in examples:
        res = model.forward(ex, compute_loss=False)
        out.append(
            {
                "example_id": ex.example_id,
                "logits": [float(x) for x in res.logits],
                "prediction": res.prediction,
            }
        )
    return out


def write_jsonl(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


@dataclass
class TrainResult:
    checkpoint_path: Path | None
    metrics: list
    best_dev_acc: float
    epochs_run: int


def train(
    config: ModelConfig,
    train_examples,
    dev_examples=None,
    checkpoint_path=None,
    log_path=None,
    embedding_file=None,
):
    """End-to-end training.

    Deterministic given the seed: shuffling, dropout masks, and the update
    order are all driven by one seeded generator.  Dev accuracy (over
    ``dev_examples``, defaulting to the training set) is logged per epoch
    and the best-dev parameters are what the final checkpoint stores.  A
    non-finite loss or gradient aborts with the last good checkpoint kept.
    """
    if not train_examples:
        raise ValueError("training set is empty")
    if any(e.label is None for e in train_examples):
        raise ValueError("training requires labels on every example")
    dev = dev_examples if dev_examples is not None else train_examples

    if embedding_file is None:
        embedding_file = load_embedding_file_for(config, list(train_examples) + list(dev))
    vocab = Vocab.from_examples(train_examples)
    model = FocalReasoner(config, vocab=vocab, embedding_file=embedding_file)
    params = model.parameters()
    adam = AdamState()
    rng = np.random.default_rng(config.seed)

    n = len(train_examples)
    batches_per_epoch = (n + config.batch_size - 1) // config.batch_size
    total_steps = config.epochs * batches_per_epoch

    metrics = []
    log_fh = open(log_path, "w", encoding="utf-8") if log_path else None

    def log(record):
        metrics.append(record)
        if log_fh:
            log_fh.write(json.dumps(record) + "\n")
            log_fh.flush()

    log({"manifest": config.run_manifest(), "total_steps": total_steps})

    best_acc = -1.0
    best_params = None
    best_epoch = 0
    step = 0
    epochs_run = 0
    try:
        for epoch in range(config.epochs):
            order = rng.permutation(n)
            for b in range(batches_per_epoch):
                batch_idx = order[b * config.batch_size : (b + 1) * config.batch_size]
                batch = [train_examples[i] for i in batch_idx]
                model.zero_grad()
                loss_sum = ans_sum = lfr_sum = 0.0
                drop = Dropout(config.dropout, rng)
                for ex in batch:
                    with Tape() as tape:
                        res = model.forward(ex, drop=drop)
                        scaled = ad.scale(res.loss, 1.0 / len(batch))
                        tape.backward(scaled)
                    loss_sum += float(res.loss.data)
                    ans_sum += float(res.l_ans.data)
                    lfr_sum += float(res.l_lfr.data)
                grads = {
                    name: (p.grad if p.grad is not None else np.zeros_like(p.data))
                    for name, p in params.items()
                }
                if config.grad_clip_norm:
                    clip_gradients(grads, config.grad_clip_norm)
                lr = lr_at(step, total_steps, config.learning_rate, config.warmup_proportion)
                adam_step(params, grads, adam, lr, config.weight_decay)
                log(
                    {
                        "epoch": epoch,
                        "step": step,
                        "loss": loss_sum / len(batch),
                        "l_ans": ans_sum / len(batch),
                        "l_lfr": lfr_sum / len(batch),
                        "dev_acc": None,
                        "lr": lr,
                    }
                )
                step += 1
            acc = evaluate(model, dev).accuracy
            epochs_run = epoch + 1
            log(
                {
                    "epoch": epoch,
                    "step": step,
                    "loss": None,
                    "l_ans": None,
                    "l_lfr": None,
                    "dev_acc": acc,
                }
            )
            if acc > best_acc:
                best_acc = acc
                best_epoch = epoch
                best_params = {name: p.data.copy() for name, p in params.items()}
            if config.early_stop_acc is not None and acc >= config.early_stop_acc:
                break
    except (NonFiniteError, NumericAbort) as exc:
        path = None
        if checkpoint_path and best_params is not None:
            _restore(params, best_params)
            path = save_checkpoint(checkpoint_path, model, adam, best_epoch, rng)
        raise NumericAbort(
            f"training diverged at epoch {epochs_run} step {step}: {exc}",
            checkpoint_path=path,
        ) from exc
    finally:
        if log_fh:
            log_fh.close()

    if best_params is not None:
        _restore(params, best_params)
    path = None
    if checkpoint_path:
        path = save_checkpoint(checkpoint_path, model, adam, best_epoch, rng)
    return TrainResult(
        checkpoint_path=path,
        metrics=metrics,
        best_dev_acc=best_acc,
        epochs_run=epochs_run,
    ), model


def _restore(params, saved):
    for name, arr in saved.items():
        params[name].data = arr.copy()
