from .response import BestResponse, best_response, boltzmann_response, respond
from .policy_level import PolicyLevelVerdict, policy_interferes_policy_level
from .naive import NaivetyVerdict, acts_naively, myopic_support_ok, observes_naively
from .pairs import OptimalPair, PairFlags, SolveReport, optimal_pairs, optimal_value
from .channels import add_channel, channel_size, lift_policy, strip_message, strip_trajectory
from .virtual import VirtualStatePolicy, flatten_virtual_policy, trajectory_law
from .checks import (CheckResult, certify_channel, check_channel_removes_interference,
                     check_non_interfering_optimum, check_policy_level_clean_optimum, check_two_way_channel,
                     full_information_value, random_game)
