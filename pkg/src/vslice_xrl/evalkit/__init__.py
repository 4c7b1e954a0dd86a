"""QoS satisfaction and explanation fidelity evaluation."""
from .baselines import RandomPolicy, random_policy
from .compare import ComparisonRow, evaluate_policy, random_factory, run_comparison
from .fidelity import FidelityReport, fidelity_pearson, pearson, perturbation_response
from .qos import EpisodeMetrics, collect_episode, qos_satisfaction

__all__ = ["ComparisonRow", "EpisodeMetrics", "FidelityReport", "RandomPolicy", "collect_episode",
           "evaluate_policy", "fidelity_pearson", "pearson", "perturbation_response", "qos_satisfaction",
           "random_factory", "random_policy", "run_comparison"]
