"""Turn fitted parameters into interpretable maps and compute local zooms.

A map has one landmark per role. Landmark k is characterized through a
virtual node purely affiliated to role k at strength c: its attribute
probabilities psi_{k,i} = sigma(c * w_{k,i}) and the road probabilities
omega_{k,l} = 1 - exp(-c_k c_l r_{k,l}). Zooming splits one landmark into
sub-roles by re-optimizing a (K+1)-role model whose non-sub-role coordinates
are pulled toward the parent solution.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .optimizer import LocalityPenalty, fit
from .role_model import ModelParams, canon_json_bytes, params_hash

MAP_DOC_VERSION = 1

#: Membership threshold for counting a node as practicing a role (mean mode).
AFFILIATION_THRESHOLD = 1e-6


@dataclass
class NetworkMap:
    """Landmarks with attribute probabilities psi (K x L), road probabilities
    omega (K x K), node coordinates (the fitted memberships), and optional
    lineage back to the map this one was zoomed from."""

    landmark_ids: list
    psi: np.ndarray
    omega: np.ndarray
    node_coords: np.ndarray
    main_role: np.ndarray
    c_used: list
    attr_names: list
    model_ref: str
    lineage: dict | None = None
    directed: bool = False

    @property
    def K(self):
        return len(self.landmark_ids)


@dataclass
class ZoomSpec:
    """Request to split ``split_role`` of ``parent_params`` into
    ``n_subroles`` sub-roles under locality weight ``beta``."""

    parent_params: ModelParams
    split_role: int
    n_subroles: int = 2
    beta: float = 0.002

    def validate(self):
        if not 0 <= self.split_role < self.parent_params.n_roles:
            raise ValueError(f"split role {self.split_role} out of range")
        if self.n_subroles < 2:
            raise ValueError("a zoom must create at least 2 sub-roles")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        return self


def default_landmark_ids(k):
    return [f"r{i + 1}" for i in range(k)]


def build_map(m, g, c_mode="unit", c=1.0, *, landmark_ids=None, lineage=None,
              affil_threshold=AFFILIATION_THRESHOLD):
    """Construct the map for fitted parameters m on graph g.

    ``c_mode="unit"`` scales every virtual node by the constant c.
    ``c_mode="mean"`` uses c_k = mean membership of the nodes practicing
    role k (entries above ``affil_threshold``); roles nobody practices fall
    back to c_k = 1 with a warning. Roads combine the two scales as c_k c_l.
    """
    k = m.n_roles
    if m.n_nodes != g.n_nodes or m.n_attrs != g.n_attrs:
        raise ValueError("parameters do not match the graph")
    if c_mode == "unit":
        if not c > 0:
            raise ValueError("c must be positive")
        c_vec = np.full(k, float(c))
    elif c_mode == "mean":
        c_vec = np.empty(k)
        for j in range(k):
            members = m.X[:, j] > affil_threshold
            if members.any():
                c_vec[j] = float(m.X[members, j].mean())
            else:
                warnings.warn(f"role {j} has no affiliated nodes; using c=1")
                c_vec[j] = 1.0
    else:
        raise ValueError(f"unknown c_mode {c_mode!r}")

    psi = expit(c_vec[:, None] * m.W)
    omega = -np.expm1(-np.outer(c_vec, c_vec) * m.R)
    ids = list(landmark_ids) if landmark_ids is not None else default_landmark_ids(k)
    if len(ids) != k:
        raise ValueError("landmark id count != K")
    return NetworkMap(
        landmark_ids=ids,
        psi=psi,
        omega=omega,
        node_coords=m.X.copy(),
        main_role=m.X.argmax(axis=1),
        c_used=[float(x) for x in c_vec],
        attr_names=list(g.attr_names),
        model_ref=params_hash(m),
        lineage=lineage,
        directed=m.directed,
    )


def reduce_roles(m, roles):
    """Drop the listed roles: X columns, R rows+cols, W rows."""
    idx = sorted(set(int(r) for r in roles))
    for r in idx:
        if not 0 <= r < m.n_roles:
            raise ValueError(f"role index {r} out of range")
    return ModelParams(
        np.delete(m.X, idx, axis=1),
        np.delete(np.delete(m.R, idx, axis=0), idx, axis=1),
        np.delete(m.W, idx, axis=0),
        directed=m.directed,
    )


def d_map(theta_n, theta_p, new_roles, parent_roles):
    """Sum of squared differences between the two models after dropping the
    sub-roles from theta_n and the split role from theta_p."""
    a = reduce_roles(theta_n, new_roles)
    b = reduce_roles(theta_p, parent_roles)
    if a.X.shape != b.X.shape or a.R.shape != b.R.shape or a.W.shape != b.W.shape:
        raise ValueError("reduced models have mismatched shapes")
    return float(((a.X - b.X) ** 2).sum()
                 + ((a.R - b.R) ** 2).sum()
                 + ((a.W - b.W) ** 2).sum())


def _append_subrole_blocks(base, n_sub, rng):
    """Extend a reduced model with randomly initialized sub-role blocks."""
    n, k0 = base.X.shape
    x = np.hstack([base.X, rng.uniform(0.05, 0.15, size=(n, n_sub))])
    r = np.zeros((k0 + n_sub, k0 + n_sub))
    r[:k0, :k0] = base.R
    cross_a = rng.uniform(0.05, 0.15, size=(k0, n_sub))
    cross_b = rng.uniform(0.05, 0.15, size=(n_sub, k0))
    sub = rng.uniform(0.05, 0.15, size=(n_sub, n_sub))
    if base.directed:
        r[:k0, k0:] = cross_a
        r[k0:, :k0] = cross_b
        r[k0:, k0:] = sub
    else:
        r[:k0, k0:] = cross_a
        r[k0:, :k0] = cross_a.T
        r[k0:, k0:] = 0.5 * (sub + sub.T)
    w = np.vstack([base.W, rng.uniform(0.05, 0.15, size=(n_sub, base.W.shape[1]))])
    return ModelParams(x, r, w, directed=base.directed)


def zoom(g, spec, h, parent_landmark_ids=None, log_path=None, progress=None):
    """Split one landmark into sub-roles while keeping the rest anchored.

    Builds the warm start by removing the split role from the parent and
    appending ``n_subroles`` randomly initialized blocks, then re-optimizes
    with the objective penalized by beta times the squared movement of all
    non-sub-role coordinates. Returns (child ModelParams, child NetworkMap)
    with lineage recorded; the child has parent K - 1 + n_subroles roles.
    """
    spec.validate()
    parent = spec.parent_params
    if parent.n_nodes != g.n_nodes:
        raise ValueError("parent parameters were fitted on a different node count")
    if parent.directed != g.directed:
        raise ValueError("parent parameters directedness does not match the graph")

    rng = np.random.default_rng(h.seed)
    base = reduce_roles(parent, [spec.split_role])
    start = _append_subrole_blocks(base, spec.n_subroles, rng)
    child_k = start.n_roles
    sub_idx = np.arange(child_k - spec.n_subroles, child_k)
    penalty = (LocalityPenalty(spec.beta, start.copy(), sub_idx)
               if spec.beta > 0 else None)
    child, state = fit(g, child_k, h, init=start, penalty=penalty,
                       log_path=log_path, progress=progress)

    p_ids = (list(parent_landmark_ids) if parent_landmark_ids is not None
             else default_landmark_ids(parent.n_roles))
    if len(p_ids) != parent.n_roles:
        raise ValueError("parent landmark id count != parent K")
    split_id = p_ids[spec.split_role]
    child_ids = ([pid for i, pid in enumerate(p_ids) if i != spec.split_role]
                 + [f"{split_id}.{j + 1}" for j in range(spec.n_subroles)])
    lineage = {
        "parent": params_hash(parent),
        "split_role": spec.split_role,
        "split_role_id": split_id,
        "child_ids": child_ids[-spec.n_subroles:],
    }
    child_map = build_map(child, g, c_mode=h.c_mode, c=h.c,
                          landmark_ids=child_ids, lineage=lineage)
    return child, child_map


# -- exports ------------------------------------------------------------------

def map_doc(nm):
    return {
        "version": MAP_DOC_VERSION,
        "K": nm.K,
        "landmark_ids": list(nm.landmark_ids),
        "psi": nm.psi.tolist(),
        "omega": nm.omega.tolist(),
        "c_used": list(nm.c_used),
        "main_role": [int(r) for r in nm.main_role],
        "lineage": nm.lineage,
        "attr_names": list(nm.attr_names),
        "model_ref": nm.model_ref,
    }


def save_map(path, nm):
    doc = map_doc(nm)
    with open(path, "wb") as fh:
        fh.write(canon_json_bytes(doc))
    return doc


def load_map(path):
    """Rebuild a NetworkMap from its JSON document.

    Node coordinates are exported separately, so they come back empty;
    directedness is inferred from omega symmetry.
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("version") != MAP_DOC_VERSION:
        raise ValueError(f"unsupported map document version {doc.get('version')!r}")
    omega = np.array(doc["omega"], dtype=np.float64)
    psi = np.asarray(doc["psi"], dtype=np.float64)
    if psi.ndim != 2:
        psi = psi.reshape(doc["K"], 0)
    return NetworkMap(
        landmark_ids=doc["landmark_ids"],
        psi=psi,
        omega=omega,
        node_coords=np.zeros((len(doc["main_role"]), doc["K"])),
        main_role=np.array(doc["main_role"], dtype=np.int64),
        c_used=doc["c_used"],
        attr_names=doc["attr_names"],
        model_ref=doc["model_ref"],
        lineage=doc.get("lineage"),
        directed=not np.array_equal(omega, omega.T),
    )


def coords_tsv(nm):
    """Node coordinates as TSV: header = landmark ids, one row per node."""
    lines = ["\t".join(nm.landmark_ids)]
    for row in nm.node_coords:
        lines.append("\t".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def _dot_label(nm, k, top=3):
    parts = [str(nm.landmark_ids[k])]
    if nm.attr_names:
        order = np.argsort(-nm.psi[k], kind="stable")[:top]
        parts += [f"{nm.attr_names[i]}:{nm.psi[k, i]:.2f}" for i in order]
    return "\\n".join(parts)


def render_dot(nm, omega_min=0.05):
    """Graphviz rendering: one node per landmark labeled with its top-3
    attributes by psi, one edge per road with omega >= omega_min, penwidth
    proportional to omega."""
    directed = nm.directed
    lines = ["digraph map {" if directed else "graph map {"]
    lines.append('  node [shape=ellipse, style=filled, fillcolor="#e8f0fe"];')
    for k in range(nm.K):
        lines.append(f'  n{k} [label="{_dot_label(nm, k)}"];')
    op = "->" if directed else "--"
    for k in range(nm.K):
        for l in range(nm.K) if directed else range(k, nm.K):
            w = float(nm.omega[k, l])
            if w >= omega_min:
                lines.append(
                    f'  n{k} {op} n{l} [penwidth={max(6.0 * w, 0.2):.2f}, '
                    f'label="{w:.2f}"];'
                )
    lines.append("}")
    return "\n".join(lines) + "\n"
