"""Spin-s Hamiltonians on arbitrary simple graphs.

Graph ensembles, exact and Lanczos ground-state solvers, ground-state
observables, and the scaling studies that probe how dense random graphs
reduce to collective-spin physics.
"""

from .graphs import (CutScanResult, EnsembleSpec, Graph, GraphError,
                     antiregular_graph, chain_graph, complete_graph,
                     cut_deviation_scan, cut_graph, cut_size, erdos_renyi,
                     expected_cut_params, generate, havel_hakimi,
                     is_graphical, read_graph_json, site_ordering,
                     uniform_degree_graph, write_graph_json)
from .hamiltonian import (CouplingParams, DenseOperator, HamiltonianError,
                          SectorBasis, SpinOperator, attainable_sectors,
                          build, build_collective_pair, build_difference,
                          preset_tfi, preset_xxz, sector_basis)
from .observables import (CorrelationMatrix, EnsembleStats,
                          ObservablesRecord, corr_matrix, ensemble_stats,
                          entanglement_entropy, magnetization, order_params,
                          shannon_entropy)
from .seeding import Seed, mix64
from .solvers import (ClassicalPairConfig, GroundStateResult, SolverError,
                      SpectralDensity, SpectrumEntry, StateVector,
                      complete_xxz_spectrum, critical_point, dense_spectrum,
                      extreme_abs_eigenvalue, free_energy_density,
                      lanczos_ground, semiclassical_pair_minimize,
                      spectral_density, spectrum_multiset, tfi_meanfield)
from .theorybench import (ScalingFit, cut_concentration, diffmax_scaling,
                          free_energy_convergence, lemma_s1_check,
                          theorem_s2_check)

__version__ = "0.1.0"
