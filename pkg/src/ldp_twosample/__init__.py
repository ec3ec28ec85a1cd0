"""Two-sample testing under local differential privacy.

Privatize multinomial or continuous samples with LapU, DiscLapU, RAPPOR or
generalized randomized response, then test equality of distributions with a
permutation-calibrated l2 U-statistic or asymptotic chi-square baselines.
"""

__version__ = "0.1.0"

from .adaptive import AdaptivePlan, adaptive_density_test, adaptive_test_count, plan_adaptive
from .density import (BinningSpec, SmoothnessClass, SmoothnessSpec, Transform, bin_dataset,
                      bin_index, normal_cdf, theoretical_kappa, transform_to_unit_cube)
from .exceptions import (ConfigurationError, DegenerateSampleError, DomainError, LDPTestError,
                         ParameterError, SizeError, UnsupportedMechanismError)
from .mechanisms import (Mechanism, MechanismParams, PrivacyConfig, PrivateViewMatrix,
                         derive_params, exact_privacy_ratio, one_hot, privatize, privatize_disclapu,
                         privatize_genrr, privatize_lapu, privatize_rappor)
from .permutation import PermutationResult, exact_permutation_pvalue, mc_permutation_pvalue
from .procedures import (Calibration, TestResult, chisq_quantile, density_test, multinomial_test)
from .sampling import (Stream, StreamKey, derive_stream, sample_categorical,
                       sample_discrete_laplace, sample_laplace, sample_std_gaussian_vector)
from .simulation import (PowerEstimate, ScenarioKind, ScenarioSpec, SweepConfig, TestConfig,
                         estimate_power, estimate_size_curve, run_sweep, sample_scenario,
                         scenario_prob_vectors)
from .statistics import (GroupSums, StatisticKind, chi_statistic, group_sums, proj_chi_statistic,
                         u_statistic_fast, u_statistic_naive)
