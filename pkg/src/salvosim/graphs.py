"""Directed sensing and actuation graphs and their structural certificates.

The sensing graph has n+1 nodes; node 0 is the target, which transmits but
never receives. Its Laplacian partitions into the target column and the
follower block ``l_ii``. The actuation graph is a leaderless digraph over the
n interceptors used to exchange time-to-go values.

Adjacency convention matches the in-neighbor definition: ``adjacency[i, j] = 1``
means a directed edge j -> i (node i receives from node j). Edge lists use
``(src, dst)`` pairs, interceptors numbered 1..n, target = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CertificateNotFound, ConfigError, TheoryViolation

# Candidate count for the randomized diagonal-scaling search fallback.
_SCALING_SEARCH_DRAWS = 2000
_EIG_TOL = 1e-9


def _adjacency_from_edges(
    node_count: int, edges, *, allow_target: bool, label: str
) -> np.ndarray:
    adjacency = np.zeros((node_count, node_count), dtype=np.int64)
    low = 0 if allow_target else 1
    seen = set()
    for edge in edges:
        if len(edge) != 2:
            raise ConfigError(f"{label}: edge {edge!r} must be a (src, dst) pair")
        src, dst = int(edge[0]), int(edge[1])
        hi = node_count - 1 if allow_target else node_count
        if not (low <= src <= hi) or not (low <= dst <= hi):
            raise ConfigError(
                f"{label}: edge ({src}, {dst}) out of range [{low}, {hi}]"
            )
        if src == dst:
            raise ConfigError(f"{label}: self-loop at node {src}")
        if allow_target and dst == 0:
            raise ConfigError(f"{label}: target node 0 cannot receive (edge {src}->0)")
        if (src, dst) in seen:
            raise ConfigError(f"{label}: duplicate edge ({src}, {dst})")
        seen.add((src, dst))
        row = dst if allow_target else dst - 1
        col = src if allow_target else src - 1
        adjacency[row, col] = 1
    return adjacency


def _laplacian(adjacency: np.ndarray) -> np.ndarray:
    degrees = adjacency.sum(axis=1)
    return np.diag(degrees) - adjacency


@dataclass(frozen=True, eq=False)
class SensingGraph:
    """Target-rooted sensing topology with precomputed Laplacian partitions."""

    n: int
    adjacency: np.ndarray = field(repr=False)  # (n+1, n+1)
    laplacian: np.ndarray = field(repr=False)  # (n+1, n+1)

    @property
    def l_ti(self) -> np.ndarray:
        """Target-to-interceptor Laplacian column, shape (n,)."""
        return self.laplacian[1:, 0]

    @property
    def l_ii(self) -> np.ndarray:
        """Follower block of the Laplacian, shape (n, n), float."""
        return self.laplacian[1:, 1:].astype(float)

    @property
    def seeker_flags(self) -> np.ndarray:
        """Boolean per interceptor: receives the target state directly."""
        return self.adjacency[1:, 0] == 1


@dataclass(frozen=True, eq=False)
class ActuationGraph:
    """Leaderless interceptor-only topology for the consensus exchange."""

    n: int
    adjacency: np.ndarray = field(repr=False)  # (n, n)
    laplacian: np.ndarray = field(repr=False)  # (n, n), int

    def reduced_laplacian(self, active: np.ndarray) -> np.ndarray:
        """Laplacian of the subgraph induced by the active agents (float).

        In-degrees are recomputed on the induced subgraph, so rows still sum
        to zero after agents drop out.
        """
        idx = np.flatnonzero(np.asarray(active))
        sub = self.adjacency[np.ix_(idx, idx)]
        return _laplacian(sub).astype(float)


def build_sensing_graph(n: int, edges) -> SensingGraph:
    """Assemble the (n+1)-node sensing graph from (src, dst) edges, target = 0."""
    if n < 1:
        raise ConfigError(f"need at least one interceptor, got n={n}")
    adjacency = _adjacency_from_edges(n + 1, edges, allow_target=True, label="sensing")
    return SensingGraph(n=n, adjacency=adjacency, laplacian=_laplacian(adjacency))


def build_actuation_graph(n: int, edges) -> ActuationGraph:
    """Assemble the n-node leaderless actuation graph, interceptors 1..n."""
    if n < 1:
        raise ConfigError(f"need at least one interceptor, got n={n}")
    adjacency = _adjacency_from_edges(n, edges, allow_target=False, label="actuation")
    return ActuationGraph(n=n, adjacency=adjacency, laplacian=_laplacian(adjacency))


def build_graphs(
    n: int, sensing_edges, actuation_edges
) -> tuple[SensingGraph, ActuationGraph]:
    return build_sensing_graph(n, sensing_edges), build_actuation_graph(
        n, actuation_edges
    )


def check_spanning_tree(graph: SensingGraph) -> bool:
    """True iff every interceptor is reachable from the target along edges."""
    reached = np.zeros(graph.n + 1, dtype=bool)
    reached[0] = True
    frontier = [0]
    while frontier:
        node = frontier.pop()
        # successors of `node` are the rows with adjacency[row, node] = 1
        for succ in np.flatnonzero(graph.adjacency[:, node]):
            if not reached[succ]:
                reached[succ] = True
                frontier.append(int(succ))
    return bool(reached[1:].all())


def follower_spectrum(graph: SensingGraph) -> np.ndarray:
    """Eigenvalues of the follower Laplacian block, sorted by real part.

    With a target-rooted spanning tree all real parts are positive; a
    violation indicates a numerical or construction fault, not a tuning
    problem, so it raises.
    """
    eigenvalues = np.linalg.eigvals(graph.l_ii)
    order = np.lexsort((eigenvalues.imag, eigenvalues.real))
    eigenvalues = eigenvalues[order]
    if check_spanning_tree(graph) and eigenvalues.real.min() <= _EIG_TOL:
        raise TheoryViolation(
            "follower Laplacian has a nonpositive eigenvalue despite a "
            f"target-rooted spanning tree: {eigenvalues}"
        )
    return eigenvalues


@dataclass(frozen=True)
class ScalingCertificate:
    """Positive diagonal scaling certifying the follower Laplacian inequality.

    With S(D) = l_ii^T D + D l_ii, the certificate states
    min-eig(S(d_hat)) >= 2, where d_hat = 2 * d_bar / lambda_m and lambda_m
    is the smallest eigenvalue of S(d_bar).
    """

    d_bar: tuple[float, ...]
    lambda_m: float
    d_hat: tuple[float, ...]
    d_max: float
    valid: bool


def _symmetric_form(l_ii: np.ndarray, diag: np.ndarray) -> np.ndarray:
    return l_ii.T @ np.diag(diag) + np.diag(diag) @ l_ii


def _try_certificate(l_ii: np.ndarray, d_bar: np.ndarray) -> ScalingCertificate | None:
    lambda_m = float(np.linalg.eigvalsh(_symmetric_form(l_ii, d_bar)).min())
    if lambda_m <= _EIG_TOL:
        return None
    d_hat = 2.0 * d_bar / lambda_m
    verified = float(np.linalg.eigvalsh(_symmetric_form(l_ii, d_hat)).min())
    if verified < 2.0 - _EIG_TOL:
        return None
    return ScalingCertificate(
        d_bar=tuple(d_bar.tolist()),
        lambda_m=lambda_m,
        d_hat=tuple(d_hat.tolist()),
        d_max=float(d_hat.max()),
        valid=True,
    )


def scaling_certificate(graph: SensingGraph) -> ScalingCertificate:
    """Find a diagonal scaling certificate for the follower Laplacian.

    Tries the identity first (it succeeds for the common tree-like
    topologies and keeps the certificate canonical), then the M-matrix
    construction diag(q_i / p_i) with p = l_ii^{-1} 1 and q = l_ii^{-T} 1,
    then a coarse randomized positive-diagonal search.
    """
    l_ii = graph.l_ii
    n = graph.n

    cert = _try_certificate(l_ii, np.ones(n))
    if cert is not None:
        return cert

    try:
        ones = np.ones(n)
        p = np.linalg.solve(l_ii, ones)
        q = np.linalg.solve(l_ii.T, ones)
        if np.all(p > 0.0) and np.all(q > 0.0):
            cert = _try_certificate(l_ii, q / p)
            if cert is not None:
                return cert
    except np.linalg.LinAlgError:
        pass

    rng = np.random.default_rng(0)
    for _ in range(_SCALING_SEARCH_DRAWS):
        cert = _try_certificate(l_ii, 10.0 ** rng.uniform(-2.0, 2.0, size=n))
        if cert is not None:
            return cert

    raise CertificateNotFound(
        "no positive diagonal scaling found for the follower Laplacian"
    )
