"""rolemap: latent-role discovery and zoomable maps for attributed graphs."""

__version__ = "0.1.0"

from .graph_core import AttributedGraph, GraphFormatError, load_graph, save_graph
from .role_model import (
    Hyperparams,
    ModelParams,
    attribute_probability,
    link_predictor,
    link_probability,
    load_model,
    log_likelihood_attrs,
    log_likelihood_links,
    objective,
    reconstruct_probabilities,
    save_model,
)
from .optimizer import (
    OptimizerState,
    fit,
    grad_R,
    grad_w,
    grad_x,
    project_nonneg,
    refresh_state,
    step_with_backtracking,
)
from .cartographer import (
    NetworkMap,
    ZoomSpec,
    build_map,
    coords_tsv,
    d_map,
    load_map,
    reduce_roles,
    render_dot,
    save_map,
    zoom,
)
from .metrics import (
    HomogeneityReport,
    attribute_homogeneity,
    evaluate,
    homogeneity_report,
    link_homogeneity,
    main_role_grouping,
)
from .synthgen import PlantedSpec, expected_edge_count, plant_params, sample_graph

__all__ = [name for name in dir() if not name.startswith("_")]
