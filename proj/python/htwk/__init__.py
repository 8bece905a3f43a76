"""Cycle maxima of random walks with heavy-tailed negative jumps.

Thin wrapper over the compiled ``_htwk`` module. Report blocks and ratio
curves are returned as plain dictionaries decoded from their JSON form.
"""

import json

from . import _htwk
from ._htwk import (
    HtwkError,
    Model,
    ParseError,
    criterion_K,
    default_model_spec,
    format_spec,
    g1_tail,
    gh_tail,
    mtau_tail,
    mu_plus,
    renewal_estimate,
    run_cli,
    sample_sup,
    truncated_mean,
)

__all__ = [
    "HtwkError",
    "Model",
    "ParseError",
    "criterion_K",
    "default_model_spec",
    "format_spec",
    "g1_tail",
    "gh_tail",
    "main_theorem_report",
    "membership_curve",
    "mtau_tail",
    "mu_plus",
    "recompute_verdict",
    "renewal_estimate",
    "run_cli",
    "sample_sup",
    "theorem2_report",
    "truncated_mean",
]


def membership_curve(kind, model, xs):
    return json.loads(_htwk.membership_curve(kind, model, list(xs)))


def main_theorem_report(model, xs, cycles, seed, workers=0, tol=0.2, sup_samples=100000):
    return json.loads(_htwk.main_theorem_report(model, list(xs), cycles, seed, workers, tol, sup_samples))


def theorem2_report(model, xs):
    return json.loads(_htwk.theorem2_report(model, list(xs)))


def recompute_verdict(block):
    """Verdict of a block dictionary, recomputed from its stored numbers."""
    return _htwk.recompute_verdict(json.dumps(block))
