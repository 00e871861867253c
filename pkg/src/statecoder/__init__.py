"""Achievable rates, optimization and simulation for compound channels with encoder-side state."""

from .bound_eval import (RateReport, constraint_region, cutset_upper, deterministic_capacity,
                         gp_rate, max_feasible_rate, thm1_rate)
from .channel_model import (AuxScheme, ChannelFormatError, GpAux, StateChannel, example_channel,
                            gacs_korner_common, induced_joint, section3_scheme)
from .coding_sim import SimConfig, SimResult, covering_experiment, run_trials
from .gaussian_dpc import GaussianCompound, branch_rate, dpc_auxiliary, optimize_power_split
from .itcore import JointPmf, entropy, is_typical, mutual_information
from .optimizer import (appendix_b_maximize, appendix_b_objective, appendix_b_witness,
                        maximize_gp, maximize_thm1, symmetrize)

__version__ = "0.1.0"
