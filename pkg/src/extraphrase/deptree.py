"""Rule-based sentence compression over dependency trees.

A sentence is compressed in four steps:

1. build the token-level dependency tree;
2. fold functional tokens (determiners, adpositions, auxiliaries, ...) into
   the chunk of their content head, giving a coarser chunk tree;
3. drop every chunk deeper than half of the chunk tree's depth;
4. emit the surviving tokens in their original order.

Depths are counted from 1 at the root chunk, so a tree of depth 6 keeps
chunks of depth <= 3.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from extraphrase.corpus_io import Sentence

# UD closed-class attachment relations. Matched on the part before ":".
DEFAULT_FUNCTIONAL_DEPRELS = frozenset(
    {"case", "det", "aux", "aux:pass", "cop", "mark", "cc", "clf", "neg", "punct"}
)

ROUNDING = ("ceil", "floor")


@dataclass(frozen=True)
class CompressionConfig:
    functional_deprels: FrozenSet[str] = DEFAULT_FUNCTIONAL_DEPRELS
    depth_rounding: str = "ceil"
    keep_threshold_override: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "functional_deprels", frozenset(self.functional_deprels))
        if not self.functional_deprels:
            raise ValueError("functional_deprels must not be empty")
        if self.depth_rounding not in ROUNDING:
            raise ValueError(f"depth_rounding must be one of {ROUNDING}, got {self.depth_rounding!r}")
        if self.keep_threshold_override is not None and self.keep_threshold_override < 1:
            raise ValueError("keep_threshold_override must be a positive integer")

    def is_functional(self, deprel: str) -> bool:
        return deprel in self.functional_deprels or deprel.split(":", 1)[0] in self.functional_deprels


@dataclass
class DepTree:
    sentence: Sentence
    children: Dict[int, List[int]]
    root: int

    def head(self, index: int) -> int:
        return self.sentence.tokens[index - 1].head


@dataclass(frozen=True)
class Chunk:
    head_token: int
    member_tokens: Tuple[int, ...]
    parent: Optional[int]  # head_token of the parent chunk
    depth: int


@dataclass
class ChunkTree:
    sentence: Sentence
    chunks: Dict[int, Chunk]  # keyed by head_token, in token order
    root: int
    max_depth: int = field(init=False)

    def __post_init__(self):
        self.max_depth = max(c.depth for c in self.chunks.values())

    def children(self, head_token: int) -> List[int]:
        return [h for h, c in self.chunks.items() if c.parent == head_token]

    def tokens(self) -> List[int]:
        return sorted(i for c in self.chunks.values() for i in c.member_tokens)


def build_tree(sentence: Sentence) -> DepTree:
    children: Dict[int, List[int]] = {t.index: [] for t in sentence.tokens}
    root = None
    for tok in sentence.tokens:
        if tok.head == 0:
            root = tok.index
        else:
            children[tok.head].append(tok.index)
    return DepTree(sentence=sentence, children=children, root=root)


def _preorder(tree: DepTree) -> List[int]:
    order = []
    stack = [tree.root]
    while stack:
        node = stack.pop()
        order.append(node)
        stack.extend(reversed(tree.children[node]))
    return order


def merge_functional(tree: DepTree, config: CompressionConfig) -> ChunkTree:
    """Collapse functional tokens into the chunk of their nearest
    chunk-heading ancestor.

    A functional token is only absorbed when its whole subtree is functional;
    otherwise merging it would hide content below it. The root always heads
    a chunk.
    """
    tokens = tree.sentence.tokens
    order = _preorder(tree)

    # all_functional[i]: token i and every descendant carry functional labels
    all_functional = {}
    for node in reversed(order):
        all_functional[node] = config.is_functional(tokens[node - 1].deprel) and all(
            all_functional[c] for c in tree.children[node]
        )

    owner: Dict[int, int] = {}
    depth: Dict[int, int] = {}
    parent: Dict[int, Optional[int]] = {}
    for node in order:
        if node != tree.root and all_functional[node]:
            owner[node] = owner[tree.head(node)]
            continue
        owner[node] = node
        if node == tree.root:
            parent[node] = None
            depth[node] = 1
        else:
            p = owner[tree.head(node)]
            parent[node] = p
            depth[node] = depth[p] + 1

    members: Dict[int, List[int]] = {h: [] for h in depth}
    for node, head in owner.items():
        members[head].append(node)
    chunks = {
        h: Chunk(head_token=h, member_tokens=tuple(sorted(members[h])), parent=parent[h],
                 depth=depth[h])
        for h in sorted(depth)
    }
    return ChunkTree(sentence=tree.sentence, chunks=chunks, root=tree.root)


def keep_depth(max_depth: int, config: CompressionConfig) -> int:
    """Deepest chunk depth that survives pruning."""
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if config.keep_threshold_override is not None:
        return config.keep_threshold_override
    if config.depth_rounding == "ceil":
        return math.ceil(max_depth / 2)
    return max(1, max_depth // 2)


def prune(ctree: ChunkTree, keep: int) -> ChunkTree:
    if keep < 1:
        raise ValueError("keep must be >= 1")
    kept = {h: c for h, c in ctree.chunks.items() if c.depth <= keep}
    return ChunkTree(sentence=ctree.sentence, chunks=kept, root=ctree.root)


def linearize(ctree: ChunkTree) -> str:
    tokens = ctree.sentence.tokens
    return " ".join(tokens[i - 1].form for i in ctree.tokens())


def compress(sentence: Sentence, config: Optional[CompressionConfig] = None) -> str:
    if config is None:
        config = CompressionConfig()
    ctree = merge_functional(build_tree(sentence), config)
    return linearize(prune(ctree, keep_depth(ctree.max_depth, config)))
