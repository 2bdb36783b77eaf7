"""Trainable subword embedding model for package-name strings.

Names are lowercased and split on delimiters into tokens; a skip-gram
model with negative sampling is trained over the token sequences. A
token is represented as the mean of its hashed character n-gram vectors
(boundary-marked, lengths 3..6 by default) plus a whole-token vector, so
unseen names always embed through their n-grams.

Hash buckets that training never touched resolve to a deterministic
seeded initialization vector, which keeps the model file proportional to
the corpus instead of the 2^20-bucket table.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyCorpus,
    FormatVersionMismatch,
    InvalidParams,
    IoFailure,
    MissingComponent,
)
from .registry import PackageRef, normalize, split_tokens

logger = logging.getLogger(__name__)

MAGIC = b"PKGVEC1"
FORMAT_VERSION = 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = (1 << 64) - 1


def fnv1a(data: str) -> int:
    """64-bit FNV-1a hash; stable across runs unlike builtin hash()."""
    h = _FNV_OFFSET
    for byte in data.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _U64
    return h


def char_ngrams(token: str, nmin: int, nmax: int) -> list[str]:
    wrapped = f"<{token}>"
    grams = []
    for n in range(nmin, nmax + 1):
        if n > len(wrapped):
            break
        grams.extend(wrapped[i : i + n] for i in range(len(wrapped) - n + 1))
    return grams


@dataclass(frozen=True)
class TrainingParams:
    seed: int
    epochs: int = 5
    window: int = 5
    negative_samples: int = 5
    dimension: int = 100
    bucket_count: int = 1 << 20
    ngram_min: int = 3
    ngram_max: int = 6
    learning_rate: float = 0.05
    holdout_fraction: float = 0.05

    def validate(self) -> None:
        if self.dimension <= 0:
            raise InvalidParams("dimension must be positive")
        if self.bucket_count <= 0:
            raise InvalidParams("bucket_count must be positive")
        if self.epochs <= 0 or self.window <= 0 or self.negative_samples < 1:
            raise InvalidParams("epochs, window, and negatives must be positive")
        if self.ngram_min < 1 or self.ngram_max < self.ngram_min:
            raise InvalidParams("ngram range is invalid")
        if self.learning_rate <= 0:
            raise InvalidParams("learning rate must be positive")
        if self.seed is None:
            raise InvalidParams("seed is required for reproducibility")


@dataclass(frozen=True)
class NameEmbedding:
    vector: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    @property
    def dimension(self) -> int:
        return int(self.vector.shape[0])


def _seeded_vector(seed: int, key: int, dimension: int) -> np.ndarray:
    rng = np.random.default_rng((seed & _U64, key & _U64))
    return rng.uniform(-1.0 / dimension, 1.0 / dimension, dimension).astype(np.float32)


@dataclass
class EmbeddingModel:
    dimension: int
    bucket_count: int
    ngram_min: int
    ngram_max: int
    seed: int
    token_index: dict[str, int]
    token_matrix: np.ndarray          # (V, dim) learned whole-token vectors
    subword_index: dict[int, int]     # bucket id -> row in subword_matrix
    subword_matrix: np.ndarray        # (S, dim) learned n-gram vectors
    training_meta: TrainingParams
    epoch_losses: list[float] = field(default_factory=list)

    def _bucket_vector(self, bucket: int) -> np.ndarray:
        row = self.subword_index.get(bucket)
        if row is not None:
            return self.subword_matrix[row]
        return _seeded_vector(self.seed, bucket, self.dimension)

    def _buckets(self, text: str) -> list[int]:
        return [
            fnv1a(g) % self.bucket_count
            for g in char_ngrams(text, self.ngram_min, self.ngram_max)
        ]

    def text_vector(self, text: str) -> np.ndarray:
        """Un-normalized representation of one normalized string."""
        parts = [self._bucket_vector(b) for b in self._buckets(text)]
        idx = self.token_index.get(text)
        if idx is not None:
            parts.append(self.token_matrix[idx])
        if not parts:  # unreachable for non-empty text; keep embed total
            return _seeded_vector(self.seed, fnv1a(text), self.dimension)
        return np.mean(parts, axis=0, dtype=np.float32)


def embed_text(model: EmbeddingModel, text: str) -> NameEmbedding:
    """Unit-norm embedding of an arbitrary normalized string."""
    if not text:
        raise InvalidParams("cannot embed an empty string")
    vec = model.text_vector(text).astype(np.float32)
    norm = float(np.linalg.norm(vec))
    if norm < 1e-12:
        vec = _seeded_vector(model.seed, fnv1a(text), model.dimension)
        norm = float(np.linalg.norm(vec))
    return NameEmbedding(vec / np.float32(norm))


def embed(model: EmbeddingModel, ref: PackageRef, part: str = "full") -> NameEmbedding:
    """Embedding of a package name or one of its components.

    ``part`` is "full", "namespace", or "identifier". Component parts
    require a hierarchical name (MissingComponent otherwise).
    """
    if part == "full":
        return embed_text(model, ref.normalized)
    if part == "namespace":
        if ref.namespace is None:
            raise MissingComponent(f"{ref} has no namespace")
        return embed_text(model, normalize(ref.namespace))
    if part == "identifier":
        return embed_text(model, normalize(ref.identifier))
    raise InvalidParams(f"unknown part: {part!r}")


def cosine(a: NameEmbedding, b: NameEmbedding) -> float:
    if a.dimension != b.dimension:
        raise DimensionMismatch(f"{a.dimension} vs {b.dimension}")
    return float(np.dot(a.vector, b.vector))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -30.0, 30.0)))


def train(corpus: Iterable[str], params: TrainingParams) -> EmbeddingModel:
    """Fit the subword skip-gram model on a corpus of name strings.

    Raises EmptyCorpus on an empty corpus and InvalidParams on bad
    hyperparameters. Deterministic for a fixed seed: retraining yields
    bit-identical vectors.
    """
    params.validate()
    sentences = []
    for name in corpus:
        if not name or not name.strip():
            continue
        tokens = split_tokens(name)
        if not tokens:
            continue
        if len(tokens) > 1:
            # Also train the concatenated form: deployment embeds the
            # delimiter-free string, so its seam and edge n-grams must
            # see the same contexts as the token parts.
            tokens = tokens + ["".join(tokens)]
        sentences.append(tokens)
    if not sentences:
        raise EmptyCorpus("training corpus contains no names")

    vocab: dict[str, int] = {}
    counts: list[int] = []
    for sent in sentences:
        for tok in sent:
            idx = vocab.get(tok)
            if idx is None:
                vocab[tok] = len(counts)
                counts.append(1)
            else:
                counts[idx] += 1

    dim = params.dimension
    vocab_size = len(vocab)
    rng = np.random.default_rng(params.seed)

    # Per-token n-gram bucket lists, plus the dense bucket universe in use.
    token_list = list(vocab.keys())
    bucket_ids: dict[int, int] = {}
    token_buckets: list[np.ndarray] = []
    for tok in token_list:
        rows = []
        for g in char_ngrams(tok, params.ngram_min, params.ngram_max):
            bucket = fnv1a(g) % params.bucket_count
            row = bucket_ids.setdefault(bucket, len(bucket_ids))
            rows.append(row)
        token_buckets.append(np.asarray(rows, dtype=np.int64))

    ordered_buckets = sorted(bucket_ids, key=bucket_ids.get)
    subword_matrix = np.stack(
        [_seeded_vector(params.seed, b, dim) for b in ordered_buckets]
    ) if ordered_buckets else np.zeros((0, dim), dtype=np.float32)
    token_matrix = rng.uniform(-1.0 / dim, 1.0 / dim, (vocab_size, dim)).astype(np.float32)
    output_matrix = np.zeros((vocab_size, dim), dtype=np.float32)

    # Skip-gram pairs within each name.
    pairs: list[tuple[int, int]] = []
    for sent in sentences:
        idxs = [vocab[t] for t in sent]
        for i, center in enumerate(idxs):
            lo = max(0, i - params.window)
            hi = min(len(idxs), i + params.window + 1)
            for j in range(lo, hi):
                if j != i:
                    pairs.append((center, idxs[j]))

    # Negative-sampling distribution: unigram counts to the 3/4 power.
    weights = np.asarray(counts, dtype=np.float64) ** 0.75
    cumulative = np.cumsum(weights / weights.sum())
    last = vocab_size - 1

    def sample_negatives(count: int) -> np.ndarray:
        idx = np.searchsorted(cumulative, rng.random(count))
        return np.minimum(idx, last).astype(np.int64)

    holdout: list[tuple[int, int, np.ndarray]] = []
    if pairs:
        n_hold = max(1, int(len(pairs) * params.holdout_fraction))
        hold_idx = rng.choice(len(pairs), size=min(n_hold, len(pairs)), replace=False)
        for i in sorted(hold_idx):
            c, o = pairs[i]
            holdout.append((c, o, sample_negatives(params.negative_samples)))

    def representation(center: int) -> tuple[np.ndarray, np.ndarray, float]:
        rows = token_buckets[center]
        total = len(rows) + 1
        vec = (subword_matrix[rows].sum(axis=0) + token_matrix[center]) / total
        return vec.astype(np.float32), rows, total

    def holdout_loss() -> float:
        if not holdout:
            return 0.0
        loss = 0.0
        for c, o, negs in holdout:
            v, _, _ = representation(c)
            pos = _sigmoid(np.array([output_matrix[o] @ v]))[0]
            neg = _sigmoid(-(output_matrix[negs] @ v))
            loss -= np.log(max(pos, 1e-10)) + np.log(np.maximum(neg, 1e-10)).sum()
        return float(loss / len(holdout))

    k = params.negative_samples
    total_updates = max(1, len(pairs) * params.epochs)
    done = 0
    losses: list[float] = []
    order = np.arange(len(pairs))
    for epoch in range(params.epochs):
        rng.shuffle(order)
        for pi in order:
            center, ctx = pairs[pi]
            lr = params.learning_rate * max(1e-4, 1.0 - done / total_updates)
            done += 1

            v, rows, total = representation(center)
            negs = sample_negatives(k)
            negs = negs[negs != ctx]
            targets = np.concatenate(([ctx], negs))
            labels = np.zeros(len(targets), dtype=np.float32)
            labels[0] = 1.0

            u = output_matrix[targets]
            g = (_sigmoid(u @ v) - labels).astype(np.float32)
            grad_v = (g @ u) * np.float32(lr)
            np.subtract.at(output_matrix, targets, np.outer(g, v) * np.float32(lr))
            # Full hidden-gradient on every contributing row (the mean is
            # only used on the forward pass), matching subword practice.
            np.subtract.at(subword_matrix, rows, grad_v)
            token_matrix[center] -= grad_v
        loss = holdout_loss()
        losses.append(loss)
        logger.info("epoch %d/%d held-out loss %.5f", epoch + 1, params.epochs, loss)

    return EmbeddingModel(
        dimension=dim,
        bucket_count=params.bucket_count,
        ngram_min=params.ngram_min,
        ngram_max=params.ngram_max,
        seed=params.seed,
        token_index=dict(vocab),
        token_matrix=token_matrix,
        subword_index={b: i for i, b in enumerate(ordered_buckets)},
        subword_matrix=subword_matrix.astype(np.float32),
        training_meta=params,
        epoch_losses=losses,
    )


# -- persistence -----------------------------------------------------------

_HEADER = struct.Struct("<IQBBQIIIIQ")


def save_model(model: EmbeddingModel, path: str | Path) -> None:
    """Write the model atomically (temp file + rename)."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    meta = model.training_meta
    try:
        with tmp.open("wb") as fh:
            fh.write(MAGIC)
            fh.write(bytes([FORMAT_VERSION]))
            fh.write(
                _HEADER.pack(
                    model.dimension,
                    model.bucket_count,
                    model.ngram_min,
                    model.ngram_max,
                    model.seed & _U64,
                    meta.epochs,
                    meta.window,
                    meta.negative_samples,
                    len(model.token_index),
                    len(model.subword_index),
                )
            )
            for token in model.token_index:
                raw = token.encode("utf-8")
                fh.write(struct.pack("<H", len(raw)))
                fh.write(raw)
            fh.write(model.token_matrix.astype("<f4").tobytes())
            buckets = sorted(model.subword_index, key=model.subword_index.get)
            fh.write(np.asarray(buckets, dtype="<u8").tobytes())
            fh.write(model.subword_matrix.astype("<f4").tobytes())
        tmp.replace(path)
    except OSError as exc:
        raise IoFailure(f"cannot write model to {path}: {exc}") from exc


def load_model(path: str | Path) -> EmbeddingModel:
    """Load a saved model; never returns a partially read model."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read model from {path}: {exc}") from exc
    if len(blob) < len(MAGIC) + 1 or blob[: len(MAGIC)] != MAGIC:
        raise FormatVersionMismatch(f"{path} is not a model file")
    if blob[len(MAGIC)] != FORMAT_VERSION:
        raise FormatVersionMismatch(f"unsupported model version {blob[len(MAGIC)]}")
    off = len(MAGIC) + 1
    try:
        (
            dim,
            bucket_count,
            nmin,
            nmax,
            seed,
            epochs,
            window,
            negatives,
            token_count,
            subword_count,
        ) = _HEADER.unpack_from(blob, off)
        off += _HEADER.size
        tokens = []
        for _ in range(token_count):
            (tlen,) = struct.unpack_from("<H", blob, off)
            off += 2
            tokens.append(blob[off : off + tlen].decode("utf-8"))
            off += tlen
        need = token_count * dim * 4
        token_matrix = np.frombuffer(blob[off : off + need], dtype="<f4")
        if token_matrix.size != token_count * dim:
            raise ValueError("token matrix truncated")
        token_matrix = token_matrix.reshape(token_count, dim).copy()
        off += need
        need = subword_count * 8
        buckets = np.frombuffer(blob[off : off + need], dtype="<u8")
        if buckets.size != subword_count:
            raise ValueError("bucket table truncated")
        off += need
        need = subword_count * dim * 4
        subword_matrix = np.frombuffer(blob[off : off + need], dtype="<f4")
        if subword_matrix.size != subword_count * dim:
            raise ValueError("subword matrix truncated")
        subword_matrix = subword_matrix.reshape(subword_count, dim).copy()
        off += need
        if off != len(blob):
            raise ValueError("trailing bytes")
    except (struct.error, ValueError, UnicodeDecodeError) as exc:
        raise IoFailure(f"model file {path} is corrupt: {exc}") from exc
    params = TrainingParams(
        seed=int(seed),
        epochs=epochs,
        window=window,
        negative_samples=negatives,
        dimension=dim,
        bucket_count=int(bucket_count),
        ngram_min=nmin,
        ngram_max=nmax,
    )
    return EmbeddingModel(
        dimension=dim,
        bucket_count=int(bucket_count),
        ngram_min=nmin,
        ngram_max=nmax,
        seed=int(seed),
        token_index={t: i for i, t in enumerate(tokens)},
        token_matrix=token_matrix,
        subword_index={int(b): i for i, b in enumerate(buckets)},
        subword_matrix=subword_matrix,
        training_meta=params,
    )


def export_text_dump(model: EmbeddingModel, path: str | Path) -> None:
    """Plain-text token vector dump: "count dim" header then one per line."""
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8") as fh:
            fh.write(f"{len(model.token_index)} {model.dimension}\n")
            for token, idx in model.token_index.items():
                values = " ".join(f"{x:.6g}" for x in model.token_matrix[idx])
                fh.write(f"{token} {values}\n")
    except OSError as exc:
        raise IoFailure(f"cannot write dump to {path}: {exc}") from exc


def import_text_dump(path: str | Path) -> dict[str, np.ndarray]:
    """Read a plain-text vector dump back into a token -> vector map."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoFailure(f"cannot read dump from {path}: {exc}") from exc
    if not lines:
        raise IoFailure(f"{path} is empty")
    try:
        count, dim = (int(x) for x in lines[0].split())
        vectors: dict[str, np.ndarray] = {}
        for line in lines[1 : count + 1]:
            fields = line.split()
            vectors[fields[0]] = np.asarray([float(x) for x in fields[1:]], dtype=np.float32)
            if vectors[fields[0]].size != dim:
                raise ValueError(f"bad vector width for {fields[0]}")
    except (ValueError, IndexError) as exc:
        raise IoFailure(f"dump file {path} is malformed: {exc}") from exc
    if len(vectors) != count:
        raise IoFailure(f"dump file {path} is incomplete")
    return vectors
