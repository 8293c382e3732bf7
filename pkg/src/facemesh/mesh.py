"""Quad-mesh connectivity, edge graph, edge geodesics and Catmull-Clark subdivision.

Vertex positions follow the image convention: x and y are pixel coordinates,
z is depth expressed in the same pixel-equivalent units.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import InvariantError, ParseError, TopologyError


@dataclass(frozen=True, eq=False)
class MeshTopology:
    """Immutable quad connectivity.

    Parameters
    ----------
    num_vertices : int
        Number of vertices referenced by ``quads``.
    quads : array_like, shape (F, 4)
        Vertex indices of each quad, counter-clockwise.
    """

    num_vertices: int
    quads: np.ndarray

    def __post_init__(self):
        n = int(self.num_vertices)
        quads = np.array(self.quads, dtype=np.int64, copy=True)
        if quads.size == 0:
            quads = quads.reshape(0, 4)
        if quads.ndim != 2 or quads.shape[1] != 4:
            raise TopologyError(f"quads must have shape (F, 4), got {quads.shape}")
        if n <= 0:
            raise TopologyError("topology needs at least one vertex")
        if quads.shape[0] == 0:
            raise TopologyError("topology needs at least one quad")
        bad = (quads < 0) | (quads >= n)
        if bad.any():
            f, k = np.argwhere(bad)[0]
            raise TopologyError(
                f"quad {f} references vertex {quads[f, k]}, index out of range for {n} vertices"
            )
        s = np.sort(quads, axis=1)
        dup = (s[:, 1:] == s[:, :-1]).any(axis=1)
        if dup.any():
            raise TopologyError(f"quad {int(np.argmax(dup))} repeats a vertex index")
        used = np.bincount(quads.ravel(), minlength=n)
        if (used == 0).any():
            raise TopologyError(f"vertex {int(np.argmin(used))} belongs to no quad")
        quads.setflags(write=False)
        object.__setattr__(self, "num_vertices", n)
        object.__setattr__(self, "quads", quads)
        # Builds the edge graph eagerly so non-manifold edges fail at construction.
        self.edge_graph

    @property
    def num_quads(self) -> int:
        return self.quads.shape[0]

    @cached_property
    def edge_graph(self) -> "EdgeGraph":
        return build_edge_graph(self)

    @property
    def num_edges(self) -> int:
        return self.edge_graph.num_edges

    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges + self.num_quads

    def __eq__(self, other):
        if not isinstance(other, MeshTopology):
            return NotImplemented
        return self.num_vertices == other.num_vertices and np.array_equal(self.quads, other.quads)

    def __hash__(self):
        return hash((self.num_vertices, self.quads.tobytes()))

    def __repr__(self):
        return f"MeshTopology(num_vertices={self.num_vertices}, num_quads={self.num_quads})"


@dataclass(frozen=True, eq=False)
class EdgeGraph:
    """Undirected edges of a quad mesh.

    ``edges[e]`` holds the sorted endpoint pair of edge ``e``; ``edge_quads[e]``
    the (up to two) incident quads, padded with -1. ``quad_edges[f, k]`` is the
    edge joining ``quads[f, k]`` and ``quads[f, (k + 1) % 4]``. Adjacency is
    stored CSR-style: the neighbours of ``v`` are
    ``neighbors[indptr[v]:indptr[v + 1]]`` reached over ``edge_ids`` of the same slice.
    """

    edges: np.ndarray
    edge_quads: np.ndarray
    quad_edges: np.ndarray
    indptr: np.ndarray
    neighbors: np.ndarray
    edge_ids: np.ndarray

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def is_boundary(self) -> np.ndarray:
        return self.edge_quads[:, 1] < 0

    @property
    def num_boundary_edges(self) -> int:
        return int(self.is_boundary.sum())

    def adjacency(self, v: int) -> list[tuple[int, int]]:
        """``(neighbor, edge id)`` pairs of vertex ``v``."""
        sl = slice(self.indptr[v], self.indptr[v + 1])
        return list(zip(self.neighbors[sl].tolist(), self.edge_ids[sl].tolist()))

    def boundary_loops(self) -> int:
        """Number of connected components formed by the boundary edges."""
        b = self.edges[self.is_boundary]
        if len(b) == 0:
            return 0
        parent: dict[int, int] = {}

        def find(a):
            while parent.setdefault(a, a) != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for u, v in b.tolist():
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
        return len({find(a) for a in list(parent)})


def build_edge_graph(topology: MeshTopology) -> EdgeGraph:
    quads = topology.quads
    nf = quads.shape[0]
    n = topology.num_vertices
    half = np.stack([quads, np.roll(quads, -1, axis=1)], axis=-1).reshape(-1, 2)
    keys = np.sort(half, axis=1)
    edges, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    if (counts > 2).any():
        e = int(np.argmax(counts > 2))
        u, v = edges[e]
        raise TopologyError(f"non-manifold edge ({u}, {v}) shared by {counts[e]} quads")

    order = np.argsort(inverse, kind="stable")
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    slot = np.arange(len(order)) - starts[inverse[order]]
    edge_quads = np.full((len(edges), 2), -1, dtype=np.int64)
    edge_quads[inverse[order], slot] = order // 4
    if (edge_quads[:, 0] == edge_quads[:, 1]).any():
        raise TopologyError("a quad uses the same edge twice")

    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    eid = np.concatenate([np.arange(len(edges))] * 2)
    srt = np.lexsort((dst, src))
    indptr = np.concatenate([[0], np.cumsum(np.bincount(src, minlength=n))])

    arrays = dict(
        edges=edges.astype(np.int64),
        edge_quads=edge_quads,
        quad_edges=inverse.reshape(nf, 4).astype(np.int64),
        indptr=indptr.astype(np.int64),
        neighbors=dst[srt].astype(np.int64),
        edge_ids=eid[srt].astype(np.int64),
    )
    for a in arrays.values():
        a.setflags(write=False)
    return EdgeGraph(**arrays)


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Per-vertex 3D positions, optionally bound to a quad topology.

    Landmark sets coming out of traces carry no connectivity, hence
    ``topology`` may be ``None``.
    """

    vertices: np.ndarray
    topology: Optional[MeshTopology] = None

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64, copy=True)
        if v.ndim != 2 or v.shape[1] != 3:
            raise TopologyError(f"vertices must have shape (N, 3), got {v.shape}")
        if self.topology is not None and v.shape[0] != self.topology.num_vertices:
            raise TopologyError(
                f"{v.shape[0]} vertices given for a topology with {self.topology.num_vertices}"
            )
        if not np.isfinite(v).all():
            raise TopologyError("vertex coordinates must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def xy(self) -> np.ndarray:
        return self.vertices[:, :2]

    def with_vertices(self, vertices) -> "SurfaceMesh":
        return SurfaceMesh(vertices, self.topology)

    def require_topology(self) -> MeshTopology:
        if self.topology is None:
            raise TopologyError("operation needs a mesh with connectivity")
        return self.topology


def load_topology(text: str) -> MeshTopology:
    """Parse the topology text format.

    The first meaningful line is ``vertices <N>``; each following line is
    ``q <i0> <i1> <i2> <i3>`` with 0-based indices. Blank lines and ``#``
    comments are skipped.
    """
    n = None
    quads = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if n is None:
                if parts[0] != "vertices" or len(parts) != 2:
                    raise ParseError(f"line {lineno}: expected 'vertices <N>'")
                n = int(parts[1])
            else:
                if parts[0] != "q" or len(parts) != 5:
                    raise ParseError(f"line {lineno}: expected 'q i0 i1 i2 i3'")
                quads.append([int(p) for p in parts[1:]])
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"line {lineno}: {exc}") from None
    if n is None:
        raise ParseError("empty topology file")
    return MeshTopology(n, np.array(quads, dtype=np.int64).reshape(-1, 4))


def format_topology(topology: MeshTopology) -> str:
    lines = [f"vertices {topology.num_vertices}"]
    lines += ["q %d %d %d %d" % tuple(q) for q in topology.quads.tolist()]
    return "\n".join(lines) + "\n"


def edge_lengths(mesh: SurfaceMesh) -> np.ndarray:
    e = mesh.require_topology().edge_graph.edges
    return np.linalg.norm(mesh.vertices[e[:, 0]] - mesh.vertices[e[:, 1]], axis=1)


def geodesic_distances(mesh: SurfaceMesh, pivot: int) -> np.ndarray:
    """Shortest-path distance from ``pivot`` along mesh edges (Dijkstra).

    Edge weights are Euclidean 3D lengths at the current vertex positions.
    Vertices in other connected components get ``inf``.
    """
    topo = mesh.require_topology()
    n = topo.num_vertices
    if not 0 <= pivot < n:
        raise IndexError(f"pivot {pivot} out of range for {n} vertices")
    g = topo.edge_graph
    lengths = edge_lengths(mesh).tolist()
    indptr = g.indptr.tolist()
    nbrs = g.neighbors.tolist()
    eids = g.edge_ids.tolist()

    dist = [float("inf")] * n
    dist[pivot] = 0.0
    done = [False] * n
    heap = [(0.0, pivot)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for k in range(indptr[u], indptr[u + 1]):
            v = nbrs[k]
            nd = d + lengths[eids[k]]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return np.array(dist)


def _scatter_sum(index, values, n):
    out = np.empty((n, values.shape[1]))
    for c in range(values.shape[1]):
        out[:, c] = np.bincount(index, weights=values[:, c], minlength=n)
    return out


def _subdivide_once(mesh: SurfaceMesh) -> SurfaceMesh:
    topo = mesh.require_topology()
    g = topo.edge_graph
    p = mesh.vertices
    q = topo.quads
    e = g.edges
    nv, ne, nf = topo.num_vertices, g.num_edges, topo.num_quads

    face_pts = p[q].mean(axis=1)
    mids = 0.5 * (p[e[:, 0]] + p[e[:, 1]])
    boundary = g.is_boundary
    inner = ~boundary
    edge_pts = mids.copy()
    eq = g.edge_quads[inner]
    edge_pts[inner] = 0.5 * mids[inner] + 0.25 * (face_pts[eq[:, 0]] + face_pts[eq[:, 1]])

    # Interior vertices: (F + 2R + (n - 3) P) / n.
    valence = np.bincount(e.ravel(), minlength=nv).astype(np.float64)[:, None]
    face_cnt = np.bincount(q.ravel(), minlength=nv).astype(np.float64)[:, None]
    f_avg = _scatter_sum(q.ravel(), np.repeat(face_pts, 4, axis=0), nv) / face_cnt
    r_avg = _scatter_sum(e.T.ravel(), np.concatenate([mids, mids]), nv) / valence
    new_p = (f_avg + 2.0 * r_avg + (valence - 3.0) * p) / valence

    # Boundary vertices: 1/8 of each boundary neighbour plus 3/4 of self.
    be = e[boundary]
    if len(be):
        bcount = np.bincount(be.ravel(), minlength=nv)
        nbr_sum = _scatter_sum(
            np.concatenate([be[:, 0], be[:, 1]]),
            np.concatenate([p[be[:, 1]], p[be[:, 0]]]),
            nv,
        )
        regular = bcount == 2
        new_p[regular] = 0.125 * nbr_sum[regular] + 0.75 * p[regular]
        # Vertices where several boundary fans meet have no curve to follow; keep them fixed.
        pinned = bcount > 2
        new_p[pinned] = p[pinned]

    qe = g.quad_edges
    fid = nv + ne + np.arange(nf)
    sub = np.empty((nf, 4, 4), dtype=np.int64)
    for k in range(4):
        sub[:, k, 0] = q[:, k]
        sub[:, k, 1] = nv + qe[:, k]
        sub[:, k, 2] = fid
        sub[:, k, 3] = nv + qe[:, (k - 1) % 4]
    new_topo = MeshTopology(nv + ne + nf, sub.reshape(-1, 4))
    return SurfaceMesh(np.concatenate([new_p, edge_pts, face_pts]), new_topo)


def catmull_clark_subdivide(mesh: SurfaceMesh, levels: int = 1) -> SurfaceMesh:
    """Apply ``levels`` rounds of Catmull-Clark subdivision.

    New vertices are laid out as [updated originals, edge points, face points],
    so every level maps V, E, F to V + E + F vertices and 4F quads. Boundary
    edges use the cubic B-spline curve rules.
    """
    if levels < 0:
        raise InvariantError("levels must be >= 0")
    mesh.require_topology()
    for _ in range(levels):
        mesh = _subdivide_once(mesh)
    return mesh


def grid_topology(nx: int, ny: int) -> MeshTopology:
    """Row-major ``nx`` by ``ny`` vertex grid with (nx - 1)(ny - 1) quads."""
    if nx < 2 or ny < 2:
        raise ValueError("grid needs at least 2x2 vertices")
    i, j = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1))
    a = (j * nx + i).ravel()
    quads = np.stack([a, a + 1, a + nx + 1, a + nx], axis=1)
    return MeshTopology(nx * ny, quads)


def grid_mesh(nx: int, ny: int, spacing: float = 1.0, origin=(0.0, 0.0)) -> SurfaceMesh:
    x, y = np.meshgrid(np.arange(nx) * spacing, np.arange(ny) * spacing)
    v = np.stack([x.ravel() + origin[0], y.ravel() + origin[1], np.zeros(nx * ny)], axis=1)
    return SurfaceMesh(v, grid_topology(nx, ny))


_CUBE_QUADS = [
    [0, 2, 3, 1],
    [4, 5, 7, 6],
    [0, 1, 5, 4],
    [2, 6, 7, 3],
    [0, 4, 6, 2],
    [1, 3, 7, 5],
]


def cube_mesh(half_size: float = 1.0) -> SurfaceMesh:
    """Closed cube with corners at (+-h, +-h, +-h), outward-facing quads."""
    bits = np.arange(8)
    v = np.stack([bits & 1, (bits >> 1) & 1, (bits >> 2) & 1], axis=1) * 2.0 - 1.0
    return SurfaceMesh(v * half_size, MeshTopology(8, _CUBE_QUADS))
