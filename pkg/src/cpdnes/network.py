"""Undirected weighted communication graphs and their Laplacians."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Topology:
    """Undirected weighted graph on players 0..N-1.

    weights is the symmetric adjacency matrix with zero diagonal; an entry
    w_ij > 0 means i and j exchange messages with that consensus weight.
    Construction rejects disconnected graphs: every algorithm here relies on
    information reaching all players.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {w.shape}")
        if w.shape[0] < 2:
            raise ValueError("topology requires at least two players")
        if not np.allclose(w, w.T):
            raise ValueError("adjacency must be symmetric (undirected graph)")
        if np.any(np.diag(w) != 0):
            raise ValueError("adjacency must have zero diagonal")
        if np.any(w < 0):
            raise ValueError("edge weights must be nonnegative")
        object.__setattr__(self, "weights", w)
        if not _connected(w):
            raise ValueError("graph is disconnected")

    @property
    def n_players(self) -> int:
        return self.weights.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        """Weighted degrees d_i = sum_j w_ij."""
        return self.weights.sum(axis=1)


def _connected(w: np.ndarray) -> bool:
    n = w.shape[0]
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        i = stack.pop()
        for j in np.nonzero(w[i] > 0)[0]:
            if not seen[j]:
                seen[j] = True
                stack.append(int(j))
    return bool(seen.all())


@dataclass(frozen=True)
class LaplacianView:
    """Graph Laplacian L = D - W with its extreme nonzero eigenvalues."""

    matrix: np.ndarray
    lambda2: float
    lambda_max: float


def ring(n: int, weight: float = 1.0) -> Topology:
    """Cycle graph on n players with a uniform edge weight."""
    if n < 3:
        raise ValueError("ring requires at least three players")
    if weight <= 0:
        raise ValueError("ring weight must be positive")
    w = np.zeros((n, n))
    idx = np.arange(n)
    w[idx, (idx + 1) % n] = weight
    w[(idx + 1) % n, idx] = weight
    return Topology(w)


def laplacian(topology: Topology) -> LaplacianView:
    """L = D - W with algebraic connectivity lambda2 and largest eigenvalue."""
    w = topology.weights
    lap = np.diag(topology.degrees) - w
    eigs = np.linalg.eigvalsh(lap)
    # lambda_1 = 0 up to roundoff for any zero-row-sum Laplacian
    return LaplacianView(matrix=lap, lambda2=float(eigs[1]), lambda_max=float(eigs[-1]))


def mixing_matrix(topology: Topology, beta: float) -> np.ndarray:
    """A = I - beta L; rows always sum to one.

    Negative diagonal entries (beta * d_i > 1) are legal for the update but
    usually signal an aggressive step, so they draw a warning rather than an
    error.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    lap = laplacian(topology).matrix
    a = np.eye(topology.n_players) - beta * lap
    if np.any(np.diag(a) < 0):
        worst = int(np.argmin(np.diag(a)))
        warnings.warn(
            f"mixing matrix has negative diagonal at player {worst} "
            f"(beta * degree = {beta * topology.degrees[worst]:.3g} > 1)",
            RuntimeWarning,
            stacklevel=2,
        )
    return a
