"""Anytime approximate evaluation of discrete Bayesian networks by state-space abstraction."""

from .abstraction import (AbstractNetwork, Partition, PartitionError, Policy, Strategy, Superstate,
                          WeightingPolicy, build_apn, cf_weights, elementary_partition,
                          initial_partition, map_evidence, select_splits, split)
from .anytime import AnytimeConfig, AnytimeTrace, IterationRecord, abstract_iter
from .inference import enumerate_joint, evaluate_exact, marginals_by_enumeration
from .models import (ParamStyle, TrafficConfig, discretized_row, gen_chain, gen_commuter,
                     gen_traffic, sample_cpt_row)
from .network import (Cpt, EvidenceError, MarginalSet, Network, NetworkError, ResourceGuardError,
                      ValidationReport, Variable, ZeroEvidenceError, validate_network)
from .scoring import avg_relscore, log_score, relscore, spread

__version__ = "0.1.0"
