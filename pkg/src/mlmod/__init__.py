"""Multilayer modularity with multiple aspects.

Core pieces: the aspect-layer network model and its supra representation
(`network`), coupling strategies and resolution parameters (`params`),
the modularity score / Hamiltonian / supra-modularity matrix
(`modularity`), the recursive spectral optimizer (`mspec`), comparison
baselines (`baselines`), file formats (`io`) and bundled benchmark data
(`datasets`).
"""

from .errors import ConvergenceError, DomainError, MlmodError, ParseError
from .network import (
    Aspect,
    AspectGrid,
    LayerStats,
    MultilayerNetwork,
    between_layer_strength,
    build_supra_adjacency,
    flatten_aspect_grid,
    full_couplings,
    generate_couplings,
    inverse_node_index,
    node_index,
)
from .params import CouplingSpec, ModularityParams
from .modularity import (
    Partition,
    SupraModularityMatrix,
    build_modularity_matrix,
    chi_value,
    coupling_strength,
    hamiltonian,
    modularity,
    modularity_signed,
    normalization_factor,
    null_model_ng,
)
from .eigen import leading_eigenpair
from .mspec import (
    DetectionResult,
    Division,
    SoftLabels,
    bisect,
    kl_relocate,
    mspec_detect,
    refine_cut,
    soft_labels,
    spectral_partition,
    subdivision_matrix,
)
from .baselines import BaselineConfig, mlouv, sfull_spec, smean_spec
from .datasets import build_karate_replica, load_karate
from .io import (
    DatasetManifest,
    load_aspect_grid,
    load_dataset,
    load_manifest,
    load_multiplex,
    load_result,
    save_multiplex,
    save_result,
)

__version__ = "0.1.0"
