"""Session-adaptive search over a publication base.

The engine watches a user's activities (dialogue, queries, clicks, profile
edits), infers the hidden objective/context/characteristics with a discrete
dynamic Bayesian network, and returns the subset of the corpus that satisfies
the inferred-plus-explicit objective.
"""
from . import adaptation, corpus, dbn, errors, service, user_model

__all__ = ["adaptation", "corpus", "dbn", "errors", "service", "user_model"]

__version__ = "0.1.0"
