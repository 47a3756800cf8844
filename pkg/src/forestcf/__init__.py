"""forestcf: SAT-backed minimal counterfactual explanations for random forests.

Compiles a trained forest into propositional logic, searches outward from a
query point for the smallest neighborhood containing a prediction flip, and
reports exactly which thresholds must be crossed. Ships Shapley and local
surrogate attribution baselines, cohort reports, a CLI and an HTTP service.
"""

__version__ = "0.1.0"
