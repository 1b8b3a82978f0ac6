"""Comparison algorithms: greedy agglomeration (mLouv) and the two
single-layer spectral baselines (sMeanSpec, sFullSpec).

All three report the same raw modularity as the shared scorer.  mLouv
follows the greedy merging description: repeatedly join the community
pair with the largest positive gain, treat the merged group as one node,
stop when no merger improves Q, then run bounded Kernighan-Lin style
single-vertex relocation sweeps.  Randomness enters only through seeded
restarts that permute tie-breaking; the best run by Q is reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modularity import (
    ModularityParams,
    Partition,
    build_modularity_matrix,
    modularity,
)
from .mspec import DetectionResult, Division, _canonical_labels, kl_relocate, spectral_partition
from .network import MultilayerNetwork
from .params import CouplingSpec

__all__ = ["BaselineConfig", "mlouv", "smean_spec", "sfull_spec"]

_GAIN_EPS = 1e-12


@dataclass(frozen=True)
class BaselineConfig:
    """Knobs shared by the baseline runs."""

    seed: int = 0
    restarts: int = 5
    max_passes: int = 10
    kl_swap: bool = True


def _q_matrix(matrix: np.ndarray, labels: np.ndarray) -> float:
    q = 0.0
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        q += float(matrix[np.ix_(idx, idx)].sum())
    return q


def _greedy_merge(matrix: np.ndarray) -> tuple[np.ndarray, list[float]]:
    """Merge the best community pair while the gain is positive.

    Returns final labels and the Q value after every merge.
    """
    n = matrix.shape[0]
    labels = np.arange(n)
    # between-community weight sums; diagonal masked out of the argmax
    w = matrix.copy()
    alive = np.ones(n, dtype=bool)
    gains_trace: list[float] = []
    q = float(np.trace(matrix))
    work = w.copy()
    np.fill_diagonal(work, -np.inf)
    while True:
        flat = int(np.argmax(work))
        a, b = divmod(flat, n)
        gain = 2.0 * float(work[a, b])
        if not np.isfinite(gain) or gain <= _GAIN_EPS:
            break
        # merge b into a
        merged = w[a] + w[b]
        w[a, :] = merged
        w[:, a] = merged
        alive[b] = False
        work[a, :] = np.where(alive, merged, -np.inf)
        work[:, a] = work[a, :]
        work[b, :] = -np.inf
        work[:, b] = -np.inf
        work[a, a] = -np.inf
        labels[labels == b] = a
        q += gain
        gains_trace.append(q)
    return labels, gains_trace


def mlouv(net: MultilayerNetwork, spec: CouplingSpec, params: ModularityParams,
          config: BaselineConfig | None = None) -> DetectionResult:
    """Greedy agglomerative optimization of the supra-modularity matrix.

    Runs ``config.restarts`` seeded restarts; each permutes the vertex
    order (which permutes tie-breaking), merges greedily, then applies up
    to ``config.max_passes`` relocation sweeps when ``kl_swap`` is on.
    """
    config = config or BaselineConfig()
    dm = build_modularity_matrix(net, spec, params)
    n = dm.size
    best_labels: np.ndarray | None = None
    best_q = -np.inf
    best_trace: list[float] = []
    for r in range(max(1, config.restarts)):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((config.seed, r))))
        perm = rng.permutation(n)
        m = dm.matrix[np.ix_(perm, perm)]
        labels, trace = _greedy_merge(m)
        if config.kl_swap:
            labels = kl_relocate(m, labels, max_sweeps=config.max_passes)
            trace = trace + [_q_matrix(m, labels)]
        q = _q_matrix(m, labels)
        if q > best_q:
            inverse = np.empty(n, dtype=int)
            inverse[perm] = np.arange(n)
            best_labels = labels[inverse]
            best_q = q
            best_trace = trace
    partition = Partition(_canonical_labels(best_labels))
    q_total = modularity(net, spec, params, partition)
    meta = {
        "algorithm": "mlouv",
        "seed": str(config.seed),
        "restarts": str(config.restarts),
        "kl_swap": "true" if config.kl_swap else "false",
        "chi": repr(dm.chi),
        "q_trace": ",".join(repr(v) for v in best_trace),
        "normalization": params.normalization,
    }
    return DetectionResult(partition=partition, q_total=q_total, divisions=(),
                           soft_labels=None, meta=meta)


def _single_layer_matrix(adjacency: np.ndarray, gamma: float,
                         gamma_minus: float | None = None) -> np.ndarray:
    """Newman modularity matrix of one dense adjacency; signed weights are
    handled by subtracting the negative subset's own null model."""
    a_pos = np.clip(adjacency, 0.0, None)
    a_neg = np.clip(-adjacency, 0.0, None)
    out = np.zeros_like(adjacency)
    for a, g, sign in ((a_pos, gamma, 1.0), (a_neg, gamma_minus or gamma, -1.0)):
        m = a.sum() / 2.0
        if m <= 0:
            continue
        k = a.sum(axis=1)
        out += sign * (a - g * np.outer(k, k) / (2.0 * m))
    return out


def smean_spec(net: MultilayerNetwork, spec: CouplingSpec, params: ModularityParams,
               refine: bool = True, tol: float = 1e-10) -> DetectionResult:
    """Single-layer spectral recursion on the mean of all layer adjacencies.

    The per-node labels found on the mean network are broadcast to every
    cell of that node, then scored with the full multilayer modularity.
    The mean matrix uses the average of the per-layer resolutions.
    """
    mean_adj = np.zeros((net.n_nodes, net.n_nodes))
    for t in range(net.n_cells):
        mean_adj += net.adjacency_dense(t)
    mean_adj /= net.n_cells
    gamma = float(np.mean(params.gamma))
    gamma_minus = None
    if params.signed:
        gamma_minus = float(np.mean(params.gamma_signed()[1]))
    b = _single_layer_matrix(mean_adj, gamma, gamma_minus)
    node_labels, divisions, _, _ = spectral_partition(b, refine=refine, tol=tol)
    partition = Partition.broadcast(net, _canonical_labels(node_labels)).canonical()
    q_total = modularity(net, spec, params, partition)
    meta = {
        "algorithm": "smean",
        "mean_gamma": repr(gamma),
        "normalization": params.normalization,
    }
    return DetectionResult(partition=partition, q_total=q_total,
                           divisions=tuple(divisions), soft_labels=None, meta=meta)


def sfull_spec(net: MultilayerNetwork, spec: CouplingSpec, params: ModularityParams,
               refine: bool = True, tol: float = 1e-10) -> DetectionResult:
    """Independent single-layer spectral recursion per layer.

    Community ids are kept disjoint across layers (no reconciliation), so
    co-assignment of node copies never occurs in the scored partition.
    """
    labels = np.zeros(net.supra_size, dtype=int)
    divisions: list[Division] = []
    offset = 0
    gp, gm = params.gamma_signed()
    for t in range(net.n_cells):
        a = net.adjacency_dense(t)
        if params.signed:
            b = _single_layer_matrix(a, gp[t], gm[t])
        else:
            b = _single_layer_matrix(a, params.gamma[t])
        layer_labels, divs, _, _ = spectral_partition(b, refine=refine, tol=tol)
        layer_labels = _canonical_labels(layer_labels)
        labels[t * net.n_nodes:(t + 1) * net.n_nodes] = layer_labels + offset
        offset += int(layer_labels.max()) + 1
        divisions.extend(divs)
    partition = Partition(labels).canonical()
    q_total = modularity(net, spec, params, partition)
    meta = {"algorithm": "sfull", "normalization": params.normalization}
    return DetectionResult(partition=partition, q_total=q_total,
                           divisions=tuple(divisions), soft_labels=None, meta=meta)
