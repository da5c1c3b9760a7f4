"""Slotted simulator for time-sequence broadcast in wireless ad hoc networks."""

from .baselines import GreedyTrace, flooding, greedy_broadcast, mcds_bruteforce
from .bounds import lower_bound_transmissions, upper_bound_transmissions, worst_case_topology
from .dynamics import GmmmParams, MacModel, RpgmParams
from .engine import SessionConfig, SessionMetrics, replay_greedy, run_session
from .model import DeploymentArea, NetworkSnapshot, build_udg, deploy_uniform, is_connected
from .timeseq import TsVector, build_time_sequence, vector_at_slot

__version__ = "0.1.0"
