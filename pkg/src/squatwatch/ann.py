"""Approximate nearest-neighbor search over name embeddings.

A hierarchical navigable small-world graph over unit vectors with cosine
distance (1 - dot). One structure holds entries for every name part
(full / namespace / identifier); queries filter on the part tag. An
exhaustive ``exact_search`` over the raw items doubles as the test
oracle for recall measurements.
"""

from __future__ import annotations

import heapq
import json
import math
import random
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .embedder import NameEmbedding
from .errors import (
    DimensionMismatch,
    EmptyIndex,
    EmptyInput,
    FormatVersionMismatch,
    IoFailure,
)
from .registry import PackageRef, RegistryId

INDEX_MAGIC = b"PKGHNSW1"
INDEX_VERSION = 1

DEFAULT_M = 16
DEFAULT_EF_CONSTRUCTION = 200
DEFAULT_EF_SEARCH = 100


@dataclass(frozen=True)
class NeighborHit:
    ref: PackageRef
    part: str
    similarity: float


# -- graph traversal (shared by builder and frozen index) ------------------


def _greedy_closest(
    vectors: np.ndarray, links: list[list[list[int]]], q: np.ndarray, start: int, layer: int
) -> int:
    current = start
    best = float(1.0 - vectors[current] @ q)
    while True:
        node_layers = links[current]
        neighbors = node_layers[layer] if layer < len(node_layers) else []
        if not neighbors:
            return current
        dists = 1.0 - vectors[neighbors] @ q
        i = int(np.argmin(dists))
        if dists[i] >= best:
            return current
        best = float(dists[i])
        current = neighbors[i]


def _search_layer(
    vectors: np.ndarray,
    links: list[list[list[int]]],
    q: np.ndarray,
    entry_points: Sequence[int],
    ef: int,
    layer: int,
) -> list[tuple[float, int]]:
    """Best-first expansion; returns up to ``ef`` (distance, node) sorted."""
    visited = set(entry_points)
    candidates = [(float(1.0 - vectors[e] @ q), e) for e in entry_points]
    heapq.heapify(candidates)
    best = [(-d, e) for d, e in candidates]
    heapq.heapify(best)

    while candidates:
        d, c = heapq.heappop(candidates)
        if d > -best[0][0] and len(best) >= ef:
            break
        node_layers = links[c]
        neighbors = [
            n
            for n in (node_layers[layer] if layer < len(node_layers) else [])
            if n not in visited
        ]
        if not neighbors:
            continue
        visited.update(neighbors)
        dists = 1.0 - vectors[neighbors] @ q
        bound = -best[0][0]
        for nd, n in zip(dists, neighbors):
            nd = float(nd)
            if len(best) < ef or nd < bound:
                heapq.heappush(candidates, (nd, n))
                heapq.heappush(best, (-nd, n))
                if len(best) > ef:
                    heapq.heappop(best)
                bound = -best[0][0]
    return sorted((-d, e) for d, e in best)


def _select_neighbors(
    vectors: np.ndarray, candidates: list[tuple[float, int]], m: int
) -> list[tuple[float, int]]:
    """Diversity heuristic: keep a candidate only when it is closer to the
    query than to every already-kept neighbor; backfill pruned candidates
    if the budget is not filled."""
    selected: list[tuple[float, int]] = []
    pruned: list[tuple[float, int]] = []
    for d, e in sorted(candidates):
        if len(selected) >= m:
            break
        keep = True
        if selected:
            sel_ids = [r for _, r in selected]
            to_selected = 1.0 - vectors[sel_ids] @ vectors[e]
            if float(np.min(to_selected)) < d:
                keep = False
        (selected if keep else pruned).append((d, e))
    for d, e in pruned:
        if len(selected) >= m:
            break
        selected.append((d, e))
    return selected


class AnnIndexBuilder:
    """Incrementally grows the graph; ``freeze()`` yields the index."""

    def __init__(
        self,
        dimension: int,
        M: int = DEFAULT_M,
        ef_construction: int = DEFAULT_EF_CONSTRUCTION,
        seed: int = 0,
    ):
        if dimension <= 0:
            raise DimensionMismatch("dimension must be positive")
        self.dimension = dimension
        self.M = M
        self.ef_construction = ef_construction
        self.seed = seed
        self._ml = 1.0 / math.log(M)
        self._rng = random.Random(seed)
        self.entries: list[tuple[PackageRef, str]] = []
        self._store = np.zeros((64, dimension), dtype=np.float32)
        self.count = 0
        self.links: list[list[list[int]]] = []
        self.entry_point: Optional[int] = None
        self.max_level = -1
        self._frozen = False

    @property
    def vectors(self) -> np.ndarray:
        return self._store[: self.count]

    def add(self, ref: PackageRef, part: str, embedding: NameEmbedding) -> int:
        if self._frozen:
            raise EmptyInput("builder already frozen")
        vec = np.asarray(embedding.vector, dtype=np.float32)
        if vec.shape != (self.dimension,):
            raise DimensionMismatch(f"expected dimension {self.dimension}, got {vec.shape}")
        if self.count == len(self._store):
            grown = np.zeros((2 * len(self._store), self.dimension), dtype=np.float32)
            grown[: self.count] = self._store[: self.count]
            self._store = grown
        node = self.count
        self._store[node] = vec
        self.count += 1
        self.entries.append((ref, part))

        u = self._rng.random()
        level = int(-math.log(max(u, 1e-12)) * self._ml)
        self.links.append([[] for _ in range(level + 1)])

        if self.entry_point is None:
            self.entry_point = node
            self.max_level = level
            return node

        vectors = self.vectors
        ep = self.entry_point
        for layer in range(self.max_level, level, -1):
            ep = _greedy_closest(vectors, self.links, vec, ep, layer)

        entry_points = [ep]
        for layer in range(min(self.max_level, level), -1, -1):
            candidates = _search_layer(
                vectors, self.links, vec, entry_points, self.ef_construction, layer
            )
            neighbors = _select_neighbors(vectors, candidates, self.M)
            self.links[node][layer] = [e for _, e in neighbors]
            max_links = 2 * self.M if layer == 0 else self.M
            for _, e in neighbors:
                e_links = self.links[e][layer]
                e_links.append(node)
                if len(e_links) > max_links:
                    ev = vectors[e]
                    scored = list(zip((1.0 - vectors[e_links] @ ev).tolist(), e_links))
                    kept = _select_neighbors(vectors, scored, max_links)
                    self.links[e][layer] = [n for _, n in kept]
            entry_points = [e for _, e in candidates]

        if level > self.max_level:
            self.entry_point = node
            self.max_level = level
        return node

    def freeze(self) -> "AnnIndex":
        if not self.entries:
            raise EmptyInput("cannot freeze an empty index")
        self._frozen = True
        return AnnIndex(
            dimension=self.dimension,
            M=self.M,
            ef_construction=self.ef_construction,
            seed=self.seed,
            entries=list(self.entries),
            vectors=self.vectors.copy(),
            links=[[list(layer) for layer in node] for node in self.links],
            entry_point=self.entry_point,
            max_level=self.max_level,
        )


class AnnIndex:
    """Frozen, immutable search structure (safe for concurrent queries)."""

    def __init__(
        self,
        dimension: int,
        M: int,
        ef_construction: int,
        seed: int,
        entries: list[tuple[PackageRef, str]],
        vectors: np.ndarray,
        links: list[list[list[int]]],
        entry_point: Optional[int],
        max_level: int,
    ):
        self.dimension = dimension
        self.M = M
        self.ef_construction = ef_construction
        self.seed = seed
        self.entries = entries
        self.vectors = vectors
        self.links = links
        self.entry_point = entry_point
        self.max_level = max_level

    def __len__(self) -> int:
        return len(self.entries)

    def search(
        self,
        query: NameEmbedding,
        k: int,
        ef_search: int = DEFAULT_EF_SEARCH,
        part: Optional[str] = None,
    ) -> list[NeighborHit]:
        """Top-k neighbors by true cosine similarity.

        Traversal is approximate; similarities in the hits are exact dot
        products, so downstream thresholds apply to true scores. ``part``
        restricts results to one entry tag (the candidate pool is
        over-fetched so filtered queries stay useful).
        """
        if not self.entries:
            raise EmptyIndex("index has no entries")
        if k <= 0:
            return []
        q = np.asarray(query.vector, dtype=np.float32)
        if q.shape != (self.dimension,):
            raise DimensionMismatch(f"query dimension {q.shape} != {self.dimension}")
        ef = max(ef_search, k)
        if part is not None:
            ef = max(ef, 4 * k)

        ep = self.entry_point
        for layer in range(self.max_level, 0, -1):
            ep = _greedy_closest(self.vectors, self.links, q, ep, layer)
        pool = _search_layer(self.vectors, self.links, q, [ep], ef, 0)

        seen: set[tuple[str, str, str]] = set()
        hits: list[NeighborHit] = []
        for d, node in pool:
            ref, tag = self.entries[node]
            if part is not None and tag != part:
                continue
            key = (ref.registry.value, ref.raw, tag)
            if key in seen:
                continue
            seen.add(key)
            hits.append(NeighborHit(ref, tag, 1.0 - d))
        hits.sort(key=lambda h: (-h.similarity, h.ref.raw))
        return hits[:k]

    # -- persistence --------------------------------------------------

    def save(self, path: str | Path) -> None:
        path = Path(path)
        header = {
            "dimension": self.dimension,
            "M": self.M,
            "ef_construction": self.ef_construction,
            "seed": self.seed,
            "entry_point": self.entry_point,
            "max_level": self.max_level,
            "entries": [[ref.registry.value, ref.raw, tag] for ref, tag in self.entries],
            "links": self.links,
        }
        blob = json.dumps(header, separators=(",", ":")).encode("utf-8")
        tmp = path.with_suffix(path.suffix + ".tmp")
        try:
            with tmp.open("wb") as fh:
                fh.write(INDEX_MAGIC)
                fh.write(bytes([INDEX_VERSION]))
                fh.write(struct.pack("<Q", len(blob)))
                fh.write(blob)
                fh.write(self.vectors.astype("<f4").tobytes())
            tmp.replace(path)
        except OSError as exc:
            raise IoFailure(f"cannot write index to {path}: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "AnnIndex":
        from .registry import parse_name

        path = Path(path)
        try:
            blob = path.read_bytes()
        except OSError as exc:
            raise IoFailure(f"cannot read index from {path}: {exc}") from exc
        if len(blob) < len(INDEX_MAGIC) + 9 or blob[: len(INDEX_MAGIC)] != INDEX_MAGIC:
            raise FormatVersionMismatch(f"{path} is not an index file")
        if blob[len(INDEX_MAGIC)] != INDEX_VERSION:
            raise FormatVersionMismatch("unsupported index version")
        off = len(INDEX_MAGIC) + 1
        try:
            (hlen,) = struct.unpack_from("<Q", blob, off)
            off += 8
            header = json.loads(blob[off : off + hlen].decode("utf-8"))
            off += hlen
            n = len(header["entries"])
            dim = header["dimension"]
            vectors = np.frombuffer(blob[off:], dtype="<f4")
            if vectors.size != n * dim:
                raise ValueError("vector table truncated")
            vectors = vectors.reshape(n, dim).copy()
            entries = [
                (parse_name(RegistryId.parse(reg), raw), tag)
                for reg, raw, tag in header["entries"]
            ]
        except (struct.error, ValueError, KeyError, json.JSONDecodeError) as exc:
            raise IoFailure(f"index file {path} is corrupt: {exc}") from exc
        return cls(
            dimension=dim,
            M=header["M"],
            ef_construction=header["ef_construction"],
            seed=header["seed"],
            entries=entries,
            vectors=vectors,
            links=header["links"],
            entry_point=header["entry_point"],
            max_level=header["max_level"],
        )


def build(
    items: Iterable[tuple[PackageRef, str, NameEmbedding]],
    M: int = DEFAULT_M,
    ef_construction: int = DEFAULT_EF_CONSTRUCTION,
    seed: int = 0,
) -> AnnIndex:
    """Build a frozen index from (ref, part, embedding) triples."""
    items = list(items)
    if not items:
        raise EmptyInput("no items to index")
    builder = AnnIndexBuilder(items[0][2].dimension, M, ef_construction, seed)
    for ref, part, emb in items:
        builder.add(ref, part, emb)
    return builder.freeze()


def exact_search(
    items: Sequence[tuple[PackageRef, str, NameEmbedding]],
    query: NameEmbedding,
    k: int,
) -> list[NeighborHit]:
    """Exhaustive top-k by cosine; ties broken by ascending raw name."""
    if k <= 0 or not items:
        return []
    matrix = np.stack([np.asarray(e.vector, dtype=np.float32) for _, _, e in items])
    if matrix.shape[1] != query.dimension:
        raise DimensionMismatch("query dimension does not match items")
    sims = matrix @ np.asarray(query.vector, dtype=np.float32)
    order = sorted(range(len(items)), key=lambda i: (-sims[i], items[i][0].raw))
    seen: set[tuple[str, str, str]] = set()
    hits: list[NeighborHit] = []
    for i in order:
        ref, part, _ = items[i]
        key = (ref.registry.value, ref.raw, part)
        if key in seen:
            continue
        seen.add(key)
        hits.append(NeighborHit(ref, part, float(sims[i])))
        if len(hits) == k:
            break
    return hits
