"""Homogeneity and expressiveness evaluation of fitted maps.

Nodes are grouped by their main role (argmax membership). Attribute
homogeneity averages, over landmarks, the within-group binary entropy of
each attribute. Link homogeneity averages the KL divergence of each node's
neighbor-group distribution from its group's mean distribution. Natural
logs throughout; lower is more homogeneous.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .role_model import (
    canon_json_bytes,
    log_likelihood_attrs,
    log_likelihood_links,
)

#: Added to every component of both KL arguments, then renormalized, so
#: one-hot neighbor distributions stay at finite divergence.
KL_SMOOTHING = 1e-9

EVAL_TSV_COLUMNS = ("f", "log_lik_links", "log_lik_attrs", "h_attrib",
                    "h_link", "k", "alpha", "x_zero_frac", "r_zero_frac")


def main_role_grouping(m):
    """Partition node indices into K groups by argmax membership.

    Ties break toward the lowest role index; all-zero membership rows land
    in group 0 (argmax of zeros), counted separately in the report.
    """
    labels = m.X.argmax(axis=1)
    return [np.flatnonzero(labels == k) for k in range(m.n_roles)]


def _binary_entropy(p):
    p = np.asarray(p, dtype=np.float64)
    out = np.zeros_like(p)
    inner = (p > 0.0) & (p < 1.0)
    pi = p[inner]
    out[inner] = -(pi * np.log(pi) + (1.0 - pi) * np.log1p(-pi))
    return out


def attribute_homogeneity(g, grouping):
    """(1/K) sum over groups and attributes of the binary entropy of the
    within-group attribute frequency. Empty groups contribute 0."""
    if g.n_attrs == 0:
        raise ValueError("graph has no attributes")
    total = 0.0
    for members in grouping:
        if len(members) == 0:
            continue
        freq = g.attrs[members].mean(axis=0)
        total += float(_binary_entropy(freq).sum())
    return total / len(grouping)


def _neighbor_distributions(g, grouping):
    """Per-node distribution of neighbors over the K groups (degree
    normalized; out-edges for directed graphs). Zero-degree nodes get None."""
    n, k = g.n_nodes, len(grouping)
    group_of = np.empty(n, dtype=np.int64)
    for gi, members in enumerate(grouping):
        group_of[members] = gi
    dists = [None] * n
    for v in range(n):
        nbrs = g.out_neighbors(v) if g.directed else g.neighbors(v)
        if len(nbrs) == 0:
            continue
        counts = np.bincount(group_of[nbrs], minlength=k).astype(np.float64)
        dists[v] = counts / len(nbrs)
    return dists


def _smooth(q, lam=KL_SMOOTHING):
    q = q + lam
    return q / q.sum()


def link_homogeneity(g, grouping, lam=KL_SMOOTHING):
    """(1/K) sum over groups of sum over member nodes of
    KL(group mean distribution || node distribution), both smoothed by lam.
    Zero-degree nodes are skipped."""
    dists = _neighbor_distributions(g, grouping)
    total = 0.0
    for members in grouping:
        qs = [dists[v] for v in members if dists[v] is not None]
        if not qs:
            continue
        q_bar = _smooth(np.mean(qs, axis=0), lam)
        for q in qs:
            total += float((q_bar * np.log(q_bar / _smooth(q, lam))).sum())
    return total / len(grouping)


@dataclass
class HomogeneityReport:
    h_attrib: float
    h_link: float
    per_group: list = field(default_factory=list)
    n_zero_membership: int = 0
    n_zero_degree_skipped: int = 0


def homogeneity_report(g, m, lam=KL_SMOOTHING):
    """Full breakdown: per-landmark sizes, attribute entropies, KL terms."""
    grouping = main_role_grouping(m)
    dists = _neighbor_distributions(g, grouping)
    per_group = []
    for gi, members in enumerate(grouping):
        entry = {"role": gi, "size": int(len(members))}
        if g.n_attrs and len(members):
            freq = g.attrs[members].mean(axis=0)
            entry["attr_entropies"] = _binary_entropy(freq).tolist()
        else:
            entry["attr_entropies"] = [0.0] * g.n_attrs
        kl_terms = []
        qs = [dists[v] for v in members if dists[v] is not None]
        if qs:
            q_bar = _smooth(np.mean(qs, axis=0), lam)
            kl_terms = [float((q_bar * np.log(q_bar / _smooth(q, lam))).sum())
                        for q in qs]
        entry["kl_terms"] = kl_terms
        entry["empty"] = len(members) == 0
        per_group.append(entry)
    h_attrib = attribute_homogeneity(g, grouping) if g.n_attrs else 0.0
    h_link = link_homogeneity(g, grouping, lam)
    return HomogeneityReport(
        h_attrib=h_attrib,
        h_link=h_link,
        per_group=per_group,
        n_zero_membership=int((m.X.sum(axis=1) == 0).sum()),
        n_zero_degree_skipped=sum(1 for d in dists if d is None),
    )


@dataclass
class EvalReport:
    f: float
    log_lik_links: float
    log_lik_attrs: float
    h_attrib: float
    h_link: float
    k: int
    alpha: float
    x_zero_frac: float
    r_zero_frac: float
    homogeneity: HomogeneityReport | None = None

    def summary_tsv(self):
        vals = [self.f, self.log_lik_links, self.log_lik_attrs, self.h_attrib,
                self.h_link, self.k, self.alpha, self.x_zero_frac,
                self.r_zero_frac]
        header = "\t".join(EVAL_TSV_COLUMNS)
        row = "\t".join(repr(v) if isinstance(v, float) else str(v) for v in vals)
        return header + "\n" + row + "\n"

    def detail_doc(self):
        doc = {
            "f": self.f,
            "log_lik_links": self.log_lik_links,
            "log_lik_attrs": self.log_lik_attrs,
            "h_attrib": self.h_attrib,
            "h_link": self.h_link,
            "k": self.k,
            "alpha": self.alpha,
            "x_zero_frac": self.x_zero_frac,
            "r_zero_frac": self.r_zero_frac,
        }
        if self.homogeneity is not None:
            doc["per_group"] = self.homogeneity.per_group
            doc["n_zero_membership"] = self.homogeneity.n_zero_membership
            doc["n_zero_degree_skipped"] = self.homogeneity.n_zero_degree_skipped
        return doc

    def detail_json_bytes(self):
        return canon_json_bytes(self.detail_doc())


def evaluate(g, m, h):
    """Evaluate a fitted model on its graph: objective pieces, homogeneity,
    and sparsity statistics."""
    le = log_likelihood_links(g, m, eps=h.eps)
    la = log_likelihood_attrs(g, m, eps=h.eps)
    f = ((1.0 - h.alpha) * le + h.alpha * la
         - h.alpha_r * float(np.abs(m.R).sum())
         - h.alpha_x * float(np.abs(m.X).sum()))
    hom = homogeneity_report(g, m)
    return EvalReport(
        f=f,
        log_lik_links=le,
        log_lik_attrs=la,
        h_attrib=hom.h_attrib,
        h_link=hom.h_link,
        k=m.n_roles,
        alpha=h.alpha,
        x_zero_frac=float((m.X == 0.0).mean()),
        r_zero_frac=float((m.R == 0.0).mean()),
        homogeneity=hom,
    )
