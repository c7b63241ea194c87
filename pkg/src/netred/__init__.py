"""Structure-preserving model reduction of second-order network systems.

Reduces mass-damper-spring / power-grid-type models by graph clustering:
vertices with similar input responses (measured by H2 distances read off a
semistable controllability Gramian) are aggregated, and the projected model
is again a second-order network on a reconstructible quotient graph, with
an exactly computable H2 approximation error.
"""

from . import cluster, errors, gramian, matrixeq, network, reduce, sys2
from .cluster import (
    Dendrogram,
    DissimilarityMatrix,
    dissimilarity_position,
    dissimilarity_velocity,
    greedy_clustering,
    hierarchical_clustering,
    linkage,
    random_clustering,
)
from .gramian import (
    CouplingGramian,
    NetworkGramian,
    coupling_gramian,
    h2_output_norm,
    network_gramian,
)
from .network import (
    BenchmarkConfig,
    CharacteristicMatrix,
    ClusteringPartition,
    WeightedGraph,
    benchmark_system,
    characteristic_matrix,
    graph_from_laplacian,
    incidence_matrix,
    laplacian,
    watts_strogatz,
)
from .reduce import (
    ErrorSystem,
    ReducedModel,
    approximation_error_h2,
    error_system,
    project,
    reduced_first_order,
)
from .sys2 import (
    ConvergenceData,
    FirstOrderRealization,
    SecondOrderNetwork,
    convergence_matrix,
    eval_transfer,
    first_order,
    h2_quadrature,
    simulate,
    validate,
)

__version__ = "0.1.0"
