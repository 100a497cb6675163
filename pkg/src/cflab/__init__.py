"""Exact continued-fraction statistics: intermediate fractions of bounded
height, Farey-neighbor indicators, weighted counts by independent methods,
and a reproducible Monte Carlo harness over random reals."""

from .cf import (ContinuedFraction, ConvergentPair, CutoffData, DyadicStream,
                 Intermediate, NeedsMoreBits, OutOfQuotients,
                 PartialQuotientStream, PeriodicStream, QuotientCapExceeded,
                 RationalStream, cf_of_rational, compare_real_rational,
                 convergents, cutoff, intermediates, parse_stream, quotient,
                 value_of_cf)
from .farey import (FareyTable, HeightSet, NeighborPair, chi, chi_mask,
                    cumulative_expected_count, divergence_functional,
                    enumerate_farey, euler_constant, expected_chi,
                    farey_neighbors, farey_size, farey_table,
                    parse_height_set, row_sum_exact, row_sum_formula,
                    totients_up_to)
from .harness import (ExperimentConfig, InvariantViolation, ResultRow,
                      Summary, aggregate, run, sample_stream, write_csv,
                      write_json)
from .rationals import FareyFraction, height, mediant, reduce_mod1
from .stats import (TruncationFn, WeightFunction, birkhoff_average,
                    classical_stats, double_exceedance, gauss_kuzmin_prob,
                    hypothesis_check, indicator_sum, main_term, mq_all,
                    mq_closed_form, mq_level_expectation, mq_via_farey,
                    mq_via_intermediates, parse_weight, weight_c, x_nf)

__version__ = "0.1.0"
