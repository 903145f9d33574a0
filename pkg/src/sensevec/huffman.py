"""Binary Huffman coding for hierarchical softmax.

Each vocabulary entry gets a prefix-free binary code built from its corpus
count; frequent entries get short codes.  Alongside the code, every leaf
stores the row indices of the internal nodes on its root-to-leaf path, which
are the output-matrix rows touched when computing its probability.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = ["HuffmanTree", "build_huffman"]


@dataclass
class HuffmanTree:
    """Per-leaf codes and internal-node paths.

    ``codes[i]`` is the bit sequence of leaf ``i`` (0 = first-merged child),
    ``points[i]`` the matching internal-node rows from the root down.  A
    single-leaf tree has an empty code and no internal nodes.
    """

    codes: list[np.ndarray]
    points: list[np.ndarray]
    num_leaves: int

    @property
    def num_internal(self) -> int:
        return max(self.num_leaves - 1, 0)


def build_huffman(counts: Sequence[int]) -> HuffmanTree:
    """Optimal prefix code over ``counts`` with deterministic tie-breaking.

    Leaves are merged by (count, index); internal nodes take indices past
    the leaves in creation order, so equal-count inputs always produce the
    same tree.
    """
    n = len(counts)
    if n == 0:
        raise ValueError("cannot build a Huffman tree over an empty vocabulary")
    if n == 1:
        return HuffmanTree(
            codes=[np.zeros(0, dtype=np.uint8)],
            points=[np.zeros(0, dtype=np.int64)],
            num_leaves=1,
        )

    # heap entries: (count, tie-break index, node); leaves are plain ints,
    # merges become (left, right, internal_row) tuples
    heap: list[tuple[int, int, object]] = [(c, i, i) for i, c in enumerate(counts)]
    heapq.heapify(heap)
    for row in range(n - 1):
        c1, i1, left = heapq.heappop(heap)
        c2, i2, right = heapq.heappop(heap)
        heapq.heappush(heap, (c1 + c2, n + row, (left, right, row)))

    codes: list[np.ndarray] = [None] * n  # type: ignore[list-item]
    points: list[np.ndarray] = [None] * n  # type: ignore[list-item]
    root = heap[0][2]
    stack: list[tuple[object, list[int], list[int]]] = [(root, [], [])]
    while stack:
        node, code, path = stack.pop()
        if isinstance(node, int):
            codes[node] = np.asarray(code, dtype=np.uint8)
            points[node] = np.asarray(path, dtype=np.int64)
        else:
            left, right, row = node
            stack.append((left, code + [0], path + [row]))
            stack.append((right, code + [1], path + [row]))
    return HuffmanTree(codes=codes, points=points, num_leaves=n)
