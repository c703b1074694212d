"""Attributed-graph data model and tab-separated file ingestion.

Node ids are arbitrary strings mapped to dense indices 0..N-1 in
first-appearance order; all matrices and edge indices use the dense indices.
"""

from __future__ import annotations

import warnings

import numpy as np


class GraphFormatError(ValueError):
    """Malformed edge/attribute file or structurally invalid graph."""


class AttributedGraph:
    """Unweighted graph with L binary attributes per node.

    Instances are immutable after construction: attribute and index arrays
    are marked read-only, so a graph can be shared freely across workers.

    Invariants enforced here: no self-loops, no duplicate edges, undirected
    edges stored once with src < dst, attrs is N x L with 0/1 entries.
    """

    def __init__(self, node_ids, edges, directed=False, attr_names=None, attrs=None):
        self.node_ids = list(node_ids)
        if len(set(self.node_ids)) != len(self.node_ids):
            raise GraphFormatError("node ids are not unique")
        self.directed = bool(directed)
        self.attr_names = list(attr_names) if attr_names is not None else []

        n = len(self.node_ids)
        edge_set = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"edge endpoint {(u, v)} out of range for N={n}")
            if u == v:
                raise GraphFormatError(f"self-loop at node index {u}")
            if not self.directed and u > v:
                u, v = v, u
            if (u, v) in edge_set:
                raise GraphFormatError(f"duplicate edge {(u, v)}")
            edge_set.add((u, v))
        self.edges = frozenset(edge_set)

        pairs = sorted(edge_set)
        self._src = np.asarray([p[0] for p in pairs], dtype=np.int64)
        self._dst = np.asarray([p[1] for p in pairs], dtype=np.int64)
        self._src.setflags(write=False)
        self._dst.setflags(write=False)

        out_lists = [[] for _ in range(n)]
        in_lists = [[] for _ in range(n)]
        for u, v in pairs:
            out_lists[u].append(v)
            in_lists[v].append(u)
        self._out = [np.asarray(sorted(a), dtype=np.int64) for a in out_lists]
        self._in = [np.asarray(sorted(a), dtype=np.int64) for a in in_lists]
        if not self.directed:
            self._nbrs = [
                np.asarray(sorted(set(out_lists[v]) | set(in_lists[v])), dtype=np.int64)
                for v in range(n)
            ]
        else:
            self._nbrs = None

        L = len(self.attr_names)
        if attrs is None:
            attrs = np.zeros((n, L))
        attrs = np.asarray(attrs, dtype=np.float64)
        if attrs.shape != (n, L):
            raise GraphFormatError(f"attrs shape {attrs.shape} != ({n}, {L})")
        if L and not np.all((attrs == 0.0) | (attrs == 1.0)):
            raise GraphFormatError("attribute values must be 0 or 1")
        self.attrs = attrs
        self.attrs.setflags(write=False)

    # -- basic accessors ----------------------------------------------------

    @property
    def n_nodes(self):
        return len(self.node_ids)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_attrs(self):
        return len(self.attr_names)

    @property
    def edge_index(self):
        """(src, dst) int arrays over stored edges, sorted lexicographically."""
        return self._src, self._dst

    def neighbors(self, v):
        """Neighbors of v in an undirected graph."""
        if self.directed:
            raise ValueError("neighbors() is for undirected graphs; use out_/in_neighbors")
        return self._nbrs[v]

    def out_neighbors(self, v):
        return self._out[v]

    def in_neighbors(self, v):
        return self._in[v]

    def degree(self, v):
        """Incident-edge count; out-degree plus in-degree when directed."""
        if not (0 <= v < self.n_nodes):
            raise IndexError(f"node index {v} out of range")
        if self.directed:
            return len(self._out[v]) + len(self._in[v])
        return len(self._nbrs[v])

    def index_of(self, node_id):
        if not hasattr(self, "_id_to_idx"):
            self._id_to_idx = {nid: i for i, nid in enumerate(self.node_ids)}
        return self._id_to_idx[node_id]


def _parse_edge_file(path):
    """Yield (line_no, src_id, dst_id) from a tab-separated edge file."""
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                raise GraphFormatError(
                    f"{path}:{line_no}: expected 'src<TAB>dst', got {line!r}"
                )
            yield line_no, parts[0].strip(), parts[1].strip()


def load_graph(edge_path, attr_path=None, directed=False, strict=False):
    """Load an AttributedGraph from an edge file and optional attribute TSV.

    Duplicate edges are deduplicated with a warning unless ``strict``, in
    which case they are fatal. Nodes appearing only in the attribute file
    become isolated nodes; nodes missing from the attribute file get all-zero
    attribute rows (warned).
    """
    idx = {}
    node_ids = []

    def intern(node_id):
        if node_id not in idx:
            idx[node_id] = len(node_ids)
            node_ids.append(node_id)
        return idx[node_id]

    edge_set = set()
    n_dups = 0
    for line_no, s_id, d_id in _parse_edge_file(edge_path):
        u, v = intern(s_id), intern(d_id)
        if u == v:
            raise GraphFormatError(f"{edge_path}:{line_no}: self-loop on {s_id!r}")
        key = (u, v) if directed or u < v else (v, u)
        if key in edge_set:
            if strict:
                raise GraphFormatError(
                    f"{edge_path}:{line_no}: duplicate edge {s_id!r} -> {d_id!r}"
                )
            n_dups += 1
            continue
        edge_set.add(key)
    if n_dups:
        warnings.warn(f"{edge_path}: dropped {n_dups} duplicate edge(s)")

    attr_names = []
    attr_rows = {}
    if attr_path is not None:
        with open(attr_path, "r", encoding="utf-8") as fh:
            header = fh.readline().rstrip("\r\n")
            if not header:
                raise GraphFormatError(f"{attr_path}:1: missing header row")
            attr_names = header.split("\t")[1:]
            if not attr_names:
                raise GraphFormatError(f"{attr_path}:1: header has no attribute columns")
            for line_no, raw in enumerate(fh, start=2):
                line = raw.rstrip("\r\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 1 + len(attr_names):
                    raise GraphFormatError(
                        f"{attr_path}:{line_no}: expected {1 + len(attr_names)} "
                        f"fields, got {len(parts)}"
                    )
                v = intern(parts[0].strip())
                if v in attr_rows:
                    raise GraphFormatError(
                        f"{attr_path}:{line_no}: duplicate row for node {parts[0]!r}"
                    )
                row = []
                for cell in parts[1:]:
                    cell = cell.strip()
                    if cell not in ("0", "1"):
                        raise GraphFormatError(
                            f"{attr_path}:{line_no}: attribute value {cell!r} not in {{0,1}}"
                        )
                    row.append(float(cell))
                attr_rows[v] = row

    n = len(node_ids)
    attrs = None
    if attr_path is not None:
        attrs = np.zeros((n, len(attr_names)))
        missing = 0
        for v in range(n):
            if v in attr_rows:
                attrs[v] = attr_rows[v]
            else:
                missing += 1
        if missing:
            warnings.warn(
                f"{attr_path}: {missing} node(s) missing from attribute file; "
                "their attribute rows default to all zeros"
            )

    return AttributedGraph(node_ids, edge_set, directed=directed,
                           attr_names=attr_names, attrs=attrs)


def save_graph(g, edge_path, attr_path=None):
    """Write a graph back to the edge/attribute file formats, order-normalized.

    Edges are written sorted by dense index pair; the attribute file (if
    requested) lists every node in index order, which also preserves isolated
    nodes on reload.
    """
    src, dst = g.edge_index
    with open(edge_path, "w", encoding="utf-8") as fh:
        for u, v in zip(src, dst):
            fh.write(f"{g.node_ids[u]}\t{g.node_ids[v]}\n")
    if attr_path is not None:
        if g.n_attrs == 0:
            raise ValueError("graph has no attributes to save")
        with open(attr_path, "w", encoding="utf-8") as fh:
            fh.write("node\t" + "\t".join(g.attr_names) + "\n")
            for v in range(g.n_nodes):
                cells = "\t".join(str(int(x)) for x in g.attrs[v])
                fh.write(f"{g.node_ids[v]}\t{cells}\n")
