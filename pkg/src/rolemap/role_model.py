"""Generative model of attributed graphs with latent roles.

A node v carries a nonnegative membership vector x_v over K roles. Roles
interact with nonnegative tendencies r_{k,l}; the link predictor for a pair
(u, v) is rho = x_u^T R x_v and the link probability is 1 - exp(-rho).
Attribute i is a logistic regression on x_v with weights w_i (no intercept).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.special import expit

MODEL_DOC_VERSION = 1

#: Dense reconstruction refuses graphs larger than this by default.
DENSE_CAP = 2000


@dataclass
class ModelParams:
    """Fitted parameters: memberships X (N x K), interactions R (K x K),
    attribute weights W (K x L). X and R are elementwise nonnegative and R
    is exactly symmetric when the model is undirected."""

    X: np.ndarray
    R: np.ndarray
    W: np.ndarray
    directed: bool = False

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.R = np.asarray(self.R, dtype=np.float64)
        self.W = np.asarray(self.W, dtype=np.float64)

    @property
    def n_nodes(self):
        return self.X.shape[0]

    @property
    def n_roles(self):
        return self.R.shape[0]

    @property
    def n_attrs(self):
        return self.W.shape[1]

    def copy(self):
        return ModelParams(self.X.copy(), self.R.copy(), self.W.copy(), self.directed)

    def validate(self):
        n, k = self.X.shape
        if self.R.shape != (k, k):
            raise ValueError(f"R shape {self.R.shape} != ({k}, {k})")
        if self.W.shape[0] != k:
            raise ValueError(f"W has {self.W.shape[0]} rows, expected {k}")
        if np.any(self.X < 0) or np.any(self.R < 0):
            raise ValueError("X and R must be elementwise nonnegative")
        if not self.directed and not np.array_equal(self.R, self.R.T):
            raise ValueError("R must be exactly symmetric for undirected models")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.R))
                and np.all(np.isfinite(self.W))):
            raise ValueError("parameters contain non-finite values")
        return self


@dataclass
class Hyperparams:
    """Objective weights and optimizer controls.

    alpha trades link against attribute likelihood; alpha_r/alpha_x are the
    l1 sparsity weights; beta is the zoom-locality weight. c_mode selects how
    landmark probabilities are scaled ("unit" uses the constant c, "mean"
    uses per-role average affiliations). eps clamps probabilities away from
    0/1 inside logs and the present-link gradient factor.
    """

    alpha: float = 0.5
    alpha_r: float = 0.2
    alpha_x: float = 0.2
    beta: float = 0.002
    c_mode: str = "unit"
    c: float = 1.0
    eta0: float = 0.5
    max_outer: int = 100
    max_inner: int = 3
    tol: float = 1e-6
    seed: int = 0
    eps: float = 1e-10

    def validate(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.alpha_r < 0 or self.alpha_x < 0 or self.beta < 0:
            raise ValueError("regularization weights must be nonnegative")
        if self.c_mode not in ("unit", "mean"):
            raise ValueError(f"unknown c_mode {self.c_mode!r}")
        if self.c_mode == "unit" and not self.c > 0:
            raise ValueError("c must be positive in unit mode")
        if not 0.0 < self.eps <= 1e-3:
            raise ValueError("eps must lie in (0, 1e-3]")
        if self.eta0 <= 0 or self.max_outer < 1 or self.max_inner < 1 or self.tol < 0:
            raise ValueError("invalid optimizer controls")
        return self


# -- link and attribute predictors -------------------------------------------

def link_predictor(x_u, R, x_v):
    """rho_{u,v} = x_u^T R x_v, the additive evidence for link (u, v)."""
    x_u = np.asarray(x_u, dtype=np.float64)
    x_v = np.asarray(x_v, dtype=np.float64)
    R = np.asarray(R, dtype=np.float64)
    if x_u.shape != (R.shape[0],) or x_v.shape != (R.shape[1],):
        raise ValueError("shape mismatch in link predictor")
    return float(x_u @ R @ x_v)


def link_probability(rho):
    """1 - exp(-rho); maps nonnegative evidence to a probability in [0, 1)."""
    rho_arr = np.asarray(rho, dtype=np.float64)
    if np.any(rho_arr < 0):
        raise ValueError("link predictor must be nonnegative")
    out = -np.expm1(-rho_arr)
    return float(out) if np.isscalar(rho) or rho_arr.ndim == 0 else out


def attribute_probability(w_i, x_v):
    """Logistic probability sigma(w_i^T x_v) of observing attribute i on v."""
    w_i = np.asarray(w_i, dtype=np.float64)
    x_v = np.asarray(x_v, dtype=np.float64)
    if w_i.shape != x_v.shape:
        raise ValueError("shape mismatch in attribute predictor")
    return float(expit(w_i @ x_v))


def edge_predictors(g, m):
    """rho for every stored edge, in edge_index order."""
    src, dst = g.edge_index
    if len(src) == 0:
        return np.zeros(0)
    return np.einsum("ek,ek->e", m.X[src] @ m.R, m.X[dst])


# -- log-likelihoods ----------------------------------------------------------

def log_likelihood_links(g, m, state=None, eps=1e-10):
    """Link log-likelihood over present and absent pairs.

    Absent pairs are never enumerated: log(1 - phi(rho)) = -rho, and the sum
    of rho over all ordered pairs collapses to x~^T R x~ with x~ = sum_v x_v,
    from which the diagonal and the present edges are subtracted (halving the
    ordered total for undirected graphs, whose pair universe is unordered).
    Present-link probabilities are clamped to [eps, 1) before the log.
    """
    rho_e = edge_predictors(g, m)
    present = float(np.log(np.clip(-np.expm1(-rho_e), eps, None)).sum())
    x_tilde = state.x_tilde if state is not None else m.X.sum(axis=0)
    ordered_total = float(x_tilde @ m.R @ x_tilde)
    diag = float(np.einsum("vk,kl,vl->", m.X, m.R, m.X))
    if g.directed:
        absent = ordered_total - diag - float(rho_e.sum())
    else:
        absent = 0.5 * (ordered_total - diag) - float(rho_e.sum())
    return present - absent


def log_likelihood_attrs(g, m, eps=1e-10):
    """Attribute log-likelihood; probabilities clamped to [eps, 1 - eps]."""
    if g.n_attrs == 0:
        return 0.0
    q = np.clip(expit(m.X @ m.W), eps, 1.0 - eps)
    a = g.attrs
    return float((a * np.log(q) + (1.0 - a) * np.log1p(-q)).sum())


def objective(g, m, h, state=None):
    """f = (1 - alpha) l_links + alpha l_attrs - alpha_r |R|_1 - alpha_x |X|_1."""
    le = log_likelihood_links(g, m, state, eps=h.eps)
    la = log_likelihood_attrs(g, m, eps=h.eps)
    return ((1.0 - h.alpha) * le + h.alpha * la
            - h.alpha_r * float(np.abs(m.R).sum())
            - h.alpha_x * float(np.abs(m.X).sum()))


def reconstruct_probabilities(g, m, dense_cap=DENSE_CAP):
    """Dense N x N link-probability and N x L attribute-probability matrices.

    Diagnostic export for small graphs; the diagonal of the link matrix is
    reported as 0 (self-links are never modeled).
    """
    n = g.n_nodes
    if n > dense_cap:
        raise ValueError(f"N={n} exceeds dense reconstruction cap {dense_cap}")
    rho = m.X @ m.R @ m.X.T
    if not m.directed:
        rho = 0.5 * (rho + rho.T)  # mathematically a no-op; kills BLAS ulp skew
    p = -np.expm1(-rho)
    np.fill_diagonal(p, 0.0)
    q = expit(m.X @ m.W)
    return p, q


# -- persistence --------------------------------------------------------------

def canon_json_bytes(doc):
    """Canonical JSON encoding used for every on-disk/wire document.

    Float values serialize via repr (shortest round-trip), preserving at
    least 15 significant digits; NaN/Inf are rejected.
    """
    return (json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False)
            + "\n").encode("utf-8")


def params_hash(m):
    """Content address of the bare parameters; stable across save paths."""
    doc = {
        "K": m.n_roles,
        "directed": m.directed,
        "X": m.X.tolist(),
        "R": m.R.tolist(),
        "W": m.W.tolist(),
    }
    return hashlib.sha256(canon_json_bytes(doc)).hexdigest()


def model_doc(m, node_ids, attr_names, hyperparams=None, objective_trace=None):
    return {
        "version": MODEL_DOC_VERSION,
        "K": m.n_roles,
        "directed": m.directed,
        "node_ids": list(node_ids),
        "attr_names": list(attr_names),
        "X": m.X.tolist(),
        "R": m.R.tolist(),
        "W": m.W.tolist(),
        "hyperparams": asdict(hyperparams) if hyperparams is not None else None,
        "objective_trace": list(objective_trace) if objective_trace is not None else [],
    }


def save_model(path, m, node_ids, attr_names, hyperparams=None, objective_trace=None):
    doc = model_doc(m, node_ids, attr_names, hyperparams, objective_trace)
    with open(path, "wb") as fh:
        fh.write(canon_json_bytes(doc))
    return doc


@dataclass
class ModelDocument:
    params: ModelParams
    node_ids: list
    attr_names: list
    hyperparams: dict | None = None
    objective_trace: list = field(default_factory=list)
    version: int = MODEL_DOC_VERSION


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("version") != MODEL_DOC_VERSION:
        raise ValueError(f"unsupported model document version {doc.get('version')!r}")
    w = np.asarray(doc["W"], dtype=np.float64)
    if w.ndim != 2:
        w = w.reshape(doc["K"], 0)  # L = 0 serializes as K empty rows or []
    m = ModelParams(np.array(doc["X"], dtype=np.float64),
                    np.array(doc["R"], dtype=np.float64),
                    w,
                    directed=bool(doc["directed"]))
    m.validate()
    return ModelDocument(params=m,
                         node_ids=doc["node_ids"],
                         attr_names=doc["attr_names"],
                         hyperparams=doc.get("hyperparams"),
                         objective_trace=doc.get("objective_trace", []),
                         version=doc["version"])
