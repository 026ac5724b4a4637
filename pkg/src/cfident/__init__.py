"""Identification of P0(Y=1) in three-variable counterfactual models.

The public surface is re-exported here; see the submodules for details.
"""

__version__ = "0.1.0"

from .conditions import Condition, Kind, UnknownCondition, catalog, condition_holds, parse_condition, parse_conditions
# ``identify`` the function lives in ``cfident.identify``; re-exporting it here
# would shadow the submodule.
from .identify import IdentificationResult, branch_table, verify_branch, verify_table
from .models import ModelA, ModelB, ObservedSummary, causal_effect_oracle, intervention_joint, observed_joint, summary
from .modelio import ParseError, load, load_model, save_model
from .prob_core import CiQuery, JointTable, ProbabilityError, check_ci
from .sampling import DegenerateBase, UnsatisfiableConstraintSet, sample_model, witness_pair

__all__ = [
    "CiQuery", "Condition", "DegenerateBase", "IdentificationResult", "JointTable", "Kind",
    "ModelA", "ModelB", "ObservedSummary", "ParseError", "ProbabilityError", "UnknownCondition",
    "UnsatisfiableConstraintSet", "branch_table", "catalog", "causal_effect_oracle", "check_ci",
    "condition_holds", "intervention_joint", "load", "load_model", "observed_joint",
    "parse_condition", "parse_conditions", "sample_model", "save_model", "summary", "verify_branch",
    "verify_table", "witness_pair",
]
