"""Exact optimization over deterministic strategy pairs.

Everything here works on a real payoff tensor T[x, a, y, b]: the joint score
of a pair (f, g) is sum_y T-row values at (x, f(x), y, g(y)) summed over x,
and for a fixed Alice map f Bob's best reply decomposes per question,

    score(f) = sum_y max_b sum_x T[x, f(x), y, b].

Alice's maps are enumerated with a meet-in-the-middle split of her input set:
partial sums over each half are tabulated once, so scoring all nA^nX maps
costs one broadcast add per half-pair instead of a fresh O(nX) gather.  Maps
are indexed row-major, f(0) most significant; ties break to the lowest index.
"""

from __future__ import annotations

import numpy as np

_CHUNK_ELEMENTS = 6_000_000  # scratch budget for the enumeration inner block


def partial_scores(tensor: np.ndarray, inputs: range) -> np.ndarray:
    """Partial sums S[v] = sum_{x in inputs} T[x, digit_x(v)] over all digit
    combinations, most significant digit first; shape (nA^len, nY, nB)."""
    _, _, n_y, n_b = tensor.shape
    scores = np.zeros((1, n_y, n_b))
    for x in inputs:
        scores = (scores[:, None, :, :] + tensor[x][None, :, :, :]).reshape(-1, n_y, n_b)
    return scores


def scan_scores(tensor: np.ndarray):
    """Yield (offset, scores) blocks covering every Alice map in index order.

    ``scores[i]`` is the best-reply value of map ``offset + i``.
    """
    n_x, _, n_y, n_b = tensor.shape
    half = n_x // 2
    first = partial_scores(tensor, range(0, half))
    second = partial_scores(tensor, range(half, n_x))
    n2 = second.shape[0]
    chunk = max(1, _CHUNK_ELEMENTS // max(1, n2 * n_y * n_b))
    for start in range(0, first.shape[0], chunk):
        block = first[start:start + chunk]
        totals = block[:, None, :, :] + second[None, :, :, :]
        yield start * n2, totals.max(axis=3).sum(axis=2).reshape(-1)


def decode_strategy(index: int, n_inputs: int, n_outputs: int) -> tuple[int, ...]:
    digits = []
    for pos in range(n_inputs):
        power = n_outputs ** (n_inputs - 1 - pos)
        digits.append((index // power) % n_outputs)
    return tuple(digits)


def best_reply(tensor: np.ndarray, f: tuple[int, ...]) -> tuple[tuple[int, ...], float]:
    """Bob's exact best reply to a fixed Alice map, with the joint value."""
    n_x = tensor.shape[0]
    table = tensor[np.arange(n_x), list(f)].sum(axis=0)  # (nY, nB)
    g = tuple(int(b) for b in np.argmax(table, axis=1))
    value = float(table[np.arange(table.shape[0]), list(g)].sum())
    return g, value


def argmax_strategy(tensor: np.ndarray) -> tuple[float, tuple[int, ...], tuple[int, ...]]:
    """The best deterministic pair: (value, f, g)."""
    best_score = -np.inf
    best_index = -1
    for offset, scores in scan_scores(tensor):
        j = int(np.argmax(scores))
        if scores[j] > best_score:
            best_score = float(scores[j])
            best_index = offset + j
    f = decode_strategy(best_index, tensor.shape[0], tensor.shape[1])
    g, value = best_reply(tensor, f)
    return value, f, g


def top_strategies(tensor: np.ndarray, count: int):
    """The ``count`` best pairs as (value, f, g), by value then map index."""
    top_scores = np.zeros(0)
    top_indices = np.zeros(0, dtype=np.int64)
    for offset, scores in scan_scores(tensor):
        indices = np.arange(offset, offset + scores.size, dtype=np.int64)
        pool_scores = np.concatenate([top_scores, scores])
        pool_indices = np.concatenate([top_indices, indices])
        if pool_scores.size > count:
            keep = np.argpartition(-pool_scores, count - 1)[:count]
            pool_scores, pool_indices = pool_scores[keep], pool_indices[keep]
        top_scores, top_indices = pool_scores, pool_indices
    order = np.lexsort((top_indices, -top_scores))
    out = []
    for k in order:
        f = decode_strategy(int(top_indices[k]), tensor.shape[0], tensor.shape[1])
        g, value = best_reply(tensor, f)
        out.append((value, f, g))
    return out
