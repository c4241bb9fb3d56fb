"""First rencontre times of independent Bernoulli random walks."""

from .bounds import (AppendixBConstants, BoundsReport, LambdaConfig, TABLE1, coeff_bounds_check,
                     cond_exp_bounds, cond_exp_classification, envelope_constants, envelope_series,
                     tail_cond_exp_upper, threshold_L, threshold_N)
from .exact import (FirstPassageSequence, RencontreSequence, binomial_weight_argmax, coefficient_sum,
                    first_passage_inclusion_exclusion, first_passage_seq, rencontre_prob,
                    rencontre_sequence, stirling_trend)
from .model import (DerivedConstants, ParameterError, WalkParams, amgm_gap, derived_constants,
                    exact_walk_params, new_walk_params)
from .montecarlo import SimConfig, SimSummary, run_batch, simulate_one
from .polylog import DivergentSeries, Enclosure, SeriesValue, polylog_tail
from .series import (TailProbResult, mean_divergence_witness, no_rencontre_prob, phi2_closed_form,
                     varphi2_closed_form, varphi_series)

__version__ = "0.1.0"
