"""Undirected simple graphs and the spectral quantities the tracking analysis needs.

Everything here is dense linear algebra on small graphs (tens of nodes):
Laplacian / incidence construction, BFS connectivity, algebraic connectivity,
and the mean-removing projector that commutes with every Laplacian.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np


class DisconnectedGraphError(ValueError):
    """Raised when an operation requires a connected graph."""


@dataclass(frozen=True)
class UndirectedGraph:
    """Simple undirected graph on nodes 0 .. n_nodes-1.

    Edges are stored canonically as sorted (i, j) tuples with i < j; duplicates
    and self-loops are rejected at construction.
    """

    n_nodes: int
    edges: tuple

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("graph needs at least one node")
        canon = []
        seen = set()
        for e in self.edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes):
                raise ValueError(f"edge ({i},{j}) out of range for {self.n_nodes} nodes")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            canon.append(key)
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @property
    def n_edges(self):
        return len(self.edges)

    def neighbors(self, i):
        """Sorted neighbor list of node i."""
        out = []
        for a, b in self.edges:
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return sorted(out)

    def neighbor_csr(self):
        """Neighbor lists in CSR form (offsets, indices) for the kernels."""
        lists = [self.neighbors(i) for i in range(self.n_nodes)]
        offsets = np.zeros(self.n_nodes + 1, dtype=np.int64)
        for i, lst in enumerate(lists):
            offsets[i + 1] = offsets[i] + len(lst)
        indices = np.array([j for lst in lists for j in lst], dtype=np.int64)
        return offsets, indices


@dataclass(frozen=True)
class GraphSpectrum:
    """Laplacian together with its sorted eigenvalues and algebraic connectivity."""

    laplacian: np.ndarray
    eigenvalues: np.ndarray
    lambda2: float


def path_graph(n):
    return UndirectedGraph(n, tuple((i, i + 1) for i in range(n - 1)))


def cycle_graph(n):
    if n < 3:
        raise ValueError("cycle needs at least 3 nodes")
    return UndirectedGraph(n, tuple((i, (i + 1) % n) for i in range(n)))


def complete_graph(n):
    return UndirectedGraph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def adjacency(g: UndirectedGraph) -> np.ndarray:
    A = np.zeros((g.n_nodes, g.n_nodes))
    for i, j in g.edges:
        A[i, j] = 1.0
        A[j, i] = 1.0
    return A


def laplacian(g: UndirectedGraph) -> np.ndarray:
    """Graph Laplacian L = degree matrix minus adjacency.

    Symmetric, rows sum to zero, positive semi-definite.
    """
    A = adjacency(g)
    return np.diag(A.sum(axis=1)) - A


def incidence(g: UndirectedGraph) -> np.ndarray:
    """Node-by-edge incidence matrix with a fixed orientation.

    The lower-index endpoint of each edge is the tail (+1), the higher-index
    endpoint the head (-1); column order follows the canonical edge order.
    With this convention (1/2) D D^T reproduces the Laplacian exactly.
    """
    D = np.zeros((g.n_nodes, g.n_edges))
    for col, (i, j) in enumerate(g.edges):
        D[i, col] = 1.0
        D[j, col] = -1.0
    return D


def is_connected(g: UndirectedGraph) -> bool:
    """BFS reachability from node 0; O(n + |E|)."""
    if g.n_nodes == 1:
        return True
    adj = [[] for _ in range(g.n_nodes)]
    for i, j in g.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = [False] * g.n_nodes
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if not seen[j]:
                seen[j] = True
                count += 1
                queue.append(j)
    return count == g.n_nodes


def spectrum(g: UndirectedGraph) -> GraphSpectrum:
    """Laplacian eigendecomposition summary (eigenvalues sorted ascending)."""
    L = laplacian(g)
    eig = np.linalg.eigvalsh(L)
    lam2 = float(eig[1]) if g.n_nodes > 1 else 0.0
    return GraphSpectrum(laplacian=L, eigenvalues=eig, lambda2=lam2)


def lambda2(g: UndirectedGraph) -> float:
    """Algebraic connectivity: second-smallest Laplacian eigenvalue.

    Raises DisconnectedGraphError for disconnected graphs, where the value
    would be 0 and the consensus analysis breaks down.
    """
    if not is_connected(g):
        raise DisconnectedGraphError("graph is not connected")
    if g.n_nodes == 1:
        # No nonzero eigenvalues exist; treat the single-node network as
        # infinitely well connected is overreach -- return 0-size guard.
        raise ValueError("lambda2 is undefined for a single-node graph")
    return spectrum(g).lambda2


def averaging_projector(n: int) -> np.ndarray:
    """M = I - (1/n) * ones * ones^T.

    Removes the network mean: M @ 1 = 0, M @ M = M, and L @ M = M @ L = L
    for the Laplacian of any n-node graph.
    """
    if n < 1:
        raise ValueError("n must be positive")
    return np.eye(n) - np.full((n, n), 1.0 / n)
