"""Link-level simulator for surface-aided intra-cell pilot reuse in
massive MIMO: correlated channel synthesis, MMSE estimation under pilot
sharing, linear combining/precoding, unit-modulus phase-profile
optimization, and deterministic deployment-angle planning."""

from .channels import (ArrayGeometry, ChannelRealization, FadingParams,
                       LinkGeometry, RISConfiguration, bs_array_response,
                       bs_ue_correlation, complex_normal,
                       compose_overall_channel, covariance_factor,
                       effective_correlation, path_loss, ris_array_response,
                       ris_correlation_kernel, ris_reflected_covariance,
                       sample_bs_ris_channel, sample_correlated_vector,
                       serving_ris, steering_vector)
from .combining import (CombinerSet, PowerDecomposition, dl_sinr,
                        dl_sinr_from_moments, mmse_combiner, mr_combiner,
                        precoders, spectral_efficiency, ul_sinr, zf_combiner)
from .estimation import (EstimationOutput, InfeasibleScheduleError,
                         PilotAssignment, assign_pilots, estimate_all,
                         mmse_estimate, simulate_pilot_phase)
from .phase_opt import (AscentReport, QuadraticForm, build_quadratic,
                        euclidean_gradient, objective, random_phases,
                        riemannian_ascent)
from .placement import (AngularGrid, PlacementExhaustedError, Violation,
                        build_angle_grid, normalized_interference,
                        snap_to_grid, steering_inner_product_magnitude,
                        validate_placement)
from .simulation import (ConfigError, CorrelationSet, ExperimentResult,
                         InfeasibleScenarioError, InterferenceResult,
                         LinkLevelResult, Scenario, SystemConfig,
                         build_topology, emit_results, load_results,
                         make_config, run_experiment, run_interference,
                         run_link_level)

__version__ = "0.1.0"
