"""
Seeded sampling of the random key graph, the ER overlay and their intersection.

Every unordered node pair {i, j} (i < j) owns one slot of a condensed vector
of length C(n, 2); edge sets are stored as packed bitsets over those slots.
"""

import math
import os
import struct
import sys
import operator
import xxhash
import numpy as np
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor
from data import DEBUG, MAX_NODES, OVERLAY_CHUNK_PAIRS, THREADS_ENV_VAR, WILSON_Z
from .errors import InvalidParameterError
from .keymath import Theta, check_probability

_U64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class ModelParams:
    n: int
    theta: Theta
    alpha: float

    def __post_init__(self):
        if isinstance(self.n, bool):
            raise InvalidParameterError("n must be an integer")
        try:
            n = operator.index(self.n)
        except TypeError:
            raise InvalidParameterError(
                f"n must be an integer. Received: {type(self.n).__name__}."
            ) from None
        if not 1 <= n <= MAX_NODES:
            raise InvalidParameterError(
                f"n must be between 1 and {MAX_NODES}. Received: {n}."
            )
        if not isinstance(self.theta, Theta):
            raise InvalidParameterError("theta must be a Theta")

        object.__setattr__(self, "n", n)
        object.__setattr__(self, "alpha", check_probability(self.alpha))

    @classmethod
    def from_values(cls, n, K, P, alpha):
        return cls(n=n, theta=Theta(K=K, P=P), alpha=alpha)

    def as_dict(self):
        return {
            "n": self.n,
            "K": self.theta.K,
            "P": self.theta.P,
            "alpha": self.alpha,
        }


@dataclass(frozen=True)
class RngSpec:
    master_seed: int
    stream_index: int

    def __post_init__(self):
        for name in ("master_seed", "stream_index"):
            value = getattr(self, name)
            if isinstance(value, bool):
                raise InvalidParameterError(f"{name} must be an integer")
            try:
                value = operator.index(value)
            except TypeError:
                raise InvalidParameterError(
                    f"{name} must be an integer. Received: {type(value).__name__}."
                ) from None
            if not -(2**63) <= value < 2**64:
                raise InvalidParameterError(f"{name} must fit in 64 bits")
            object.__setattr__(self, name, value)


def substream_seed(master_seed, stream_index):
    """Mix (master_seed, stream_index) into one 64-bit seed."""
    packed = struct.pack("<QQ", master_seed & _U64, stream_index & _U64)
    return xxhash.xxh3_64_intdigest(packed)


def _generators(rng):
    root = np.random.SeedSequence(substream_seed(rng.master_seed, rng.stream_index))
    ss_keys, ss_channels = root.spawn(2)
    return np.random.default_rng(ss_keys), np.random.default_rng(ss_channels)


def pair_count(n):
    return n * (n - 1) // 2


def pair_index(n, i, j):
    """Slot of the unordered pair {i, j} in the condensed pair vector."""
    if i > j:
        i, j = j, i
    if i == j or i < 0 or j >= n:
        raise IndexError(f"({i}, {j}) is not a pair of distinct nodes below {n}")
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def _pair_slots(n, i, j):
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def sample_key_rings(params, rng):
    """
    n uniform K-subsets of {1..P}, one sorted row per node.

    Floyd's distinct-sampling method, vectorised across nodes: memory is
    O(nK) whatever the pool size.
    """
    key_gen, _ = _generators(rng)
    n, K, P = params.n, params.theta.K, params.theta.P

    rings = np.empty((n, K), dtype=np.int64)
    for step, j in enumerate(range(P - K, P)):
        t = key_gen.integers(0, j + 1, size=n, dtype=np.int64)
        taken = (rings[:, :step] == t[:, None]).any(axis=1)
        rings[:, step] = np.where(taken, j, t)

    rings.sort(axis=1)
    return rings + 1


def sample_er_overlay(params, rng):
    """
    Channel states B_ij as a packed bitset over the condensed pair vector.

    Draws are made OVERLAY_CHUNK_PAIRS at a time and packed straight away,
    so peak memory stays at the packed size plus one chunk.
    """
    _, channel_gen = _generators(rng)
    total = pair_count(params.n)
    packed = np.zeros((total + 7) // 8, dtype=np.uint8)

    for start in range(0, total, OVERLAY_CHUNK_PAIRS):
        size = min(OVERLAY_CHUNK_PAIRS, total - start)
        chunk = np.packbits(channel_gen.random(size) < params.alpha)
        packed[start // 8 : start // 8 + chunk.size] = chunk
    return packed


def unpack_pairs(bits, n):
    """Packed pair bitset back to a boolean vector of length C(n, 2)."""
    return np.unpackbits(bits, count=pair_count(n)).astype(bool)


def _test_bits(bits, slots):
    return (bits[slots >> 3] & (0x80 >> (slots & 7)).astype(np.uint8)) != 0


def _set_bits(bits, slots):
    np.bitwise_or.at(bits, slots >> 3, (0x80 >> (slots & 7)).astype(np.uint8))


def key_adjacent_pairs(key_rings):
    """Sorted unique (i, j), i < j, of nodes whose rings share a key."""
    n, K = key_rings.shape
    keys = key_rings.ravel()
    nodes = np.repeat(np.arange(n, dtype=np.int64), K)

    order = np.lexsort((nodes, keys))
    sorted_keys = keys[order]
    sorted_nodes = nodes[order]

    left, right = [], []
    offset = 1
    while offset < sorted_keys.size:
        same = sorted_keys[offset:] == sorted_keys[:-offset]
        if not same.any():
            break
        left.append(sorted_nodes[:-offset][same])
        right.append(sorted_nodes[offset:][same])
        offset += 1

    if not left:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty

    left = np.concatenate(left)
    right = np.concatenate(right)
    # Rings sharing several keys show up once per shared key
    _, first = np.unique(_pair_slots(n, left, right), return_index=True)
    return left[first], right[first]


@dataclass(frozen=True, eq=False)
class GraphSample:
    params: ModelParams
    key_rings: np.ndarray
    er_bits: np.ndarray
    adjacency_bits: np.ndarray
    isolated: np.ndarray
    isolated_count: int

    def _bit(self, bits, i, j):
        if i == j:
            return False
        slot = pair_index(self.params.n, i, j)
        return bool(bits[slot >> 3] & (0x80 >> (slot & 7)))

    def er_edge(self, i, j):
        return self._bit(self.er_bits, i, j)

    def adjacent(self, i, j):
        return self._bit(self.adjacency_bits, i, j)

    def key_adjacent(self, i, j):
        if i == j:
            return False
        return bool(np.intersect1d(self.key_rings[i], self.key_rings[j]).size)

    def degree(self, i):
        return sum(self.adjacent(i, j) for j in range(self.params.n) if j != i)

    def adjacency_matrix(self):
        n = self.params.n
        flat = unpack_pairs(self.adjacency_bits, n)
        matrix = np.zeros((n, n), dtype=bool)
        rows, cols = np.triu_indices(n, k=1)
        matrix[rows, cols] = flat
        matrix[cols, rows] = flat
        return matrix


def intersect_and_count(params, rng):
    """Sample K-cap-G(n; theta, alpha) and mark its isolated nodes."""
    n = params.n
    key_rings = sample_key_rings(params, rng)
    er_bits = sample_er_overlay(params, rng)

    i, j = key_adjacent_pairs(key_rings)
    on = _test_bits(er_bits, _pair_slots(n, i, j))
    i, j = i[on], j[on]

    adjacency_bits = np.zeros_like(er_bits)
    _set_bits(adjacency_bits, _pair_slots(n, i, j))

    has_neighbor = np.zeros(n, dtype=bool)
    has_neighbor[i] = True
    has_neighbor[j] = True
    isolated = ~has_neighbor

    return GraphSample(
        params=params,
        key_rings=key_rings,
        er_bits=er_bits,
        adjacency_bits=adjacency_bits,
        isolated=isolated,
        isolated_count=int(isolated.sum()),
    )


def wilson_interval(successes, trials, z=WILSON_Z):
    if trials <= 0:
        raise InvalidParameterError("trials must be > 0")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials))
    half /= denom
    return max(0.0, center - half), min(1.0, center + half)


def summarize_counts(counts):
    """Empirical summary of isolated-node counts, independent of trial order."""
    counts = np.asarray(counts, dtype=np.int64)
    trials = int(counts.size)
    if trials == 0:
        raise InvalidParameterError("at least one trial is required")

    mean = math.fsum(counts.tolist()) / trials
    if trials > 1:
        var = math.fsum(((counts - mean) ** 2).tolist()) / (trials - 1)
    else:
        var = 0.0

    zero_count = int((counts == 0).sum())
    freq_zero = zero_count / trials
    wilson_low, wilson_high = wilson_interval(zero_count, trials)

    return {
        "trials": trials,
        "mean_I": mean,
        "var_I": var,
        "stderr_mean_I": math.sqrt(var / trials),
        "freq_I0": freq_zero,
        "stderr_I0": math.sqrt(freq_zero * (1.0 - freq_zero) / trials),
        "wilson_I0": [wilson_low, wilson_high],
    }


def resolve_workers(requested=None):
    workers = requested if requested else os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV_VAR)
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            print(f"[WARNING] Ignoring non-integer {THREADS_ENV_VAR}={cap!r}", file=sys.stderr)
    return max(1, workers)


def run_trials(params, trials, master_seed, workers=1, keep_counts=False):
    """
    Monte Carlo over `trials` independent samples; trial t uses stream t.

    Counts land in pre-assigned slots, so the summary does not depend on
    how many workers ran the trials.
    """
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 1:
        raise InvalidParameterError(f"trials must be at least 1. Received: {trials}.")

    counts = np.empty(trials, dtype=np.int64)

    def run_block(block):
        for t in block:
            sample = intersect_and_count(params, RngSpec(master_seed, t))
            counts[t] = sample.isolated_count

    workers = resolve_workers(workers)
    block_size = max(1, math.ceil(trials / (workers * 4)))
    blocks = [range(s, min(s + block_size, trials)) for s in range(0, trials, block_size)]

    if DEBUG:
        print(
            f"[INFO] {trials} trials in {len(blocks)} blocks on {workers} worker(s)",
            file=sys.stderr,
        )

    if workers == 1:
        for block in blocks:
            run_block(block)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_block, blocks))

    summary = summarize_counts(counts)
    summary["master_seed"] = master_seed
    if keep_counts:
        summary["counts"] = counts
    return summary
