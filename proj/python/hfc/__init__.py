"""Joint H-infinity functional calculus of commuting sectorial matrices."""

import json

import numpy as np

from ._hfc import HfcError, SchemaError, __version__, verbs
from . import _hfc

__all__ = ["HfcError", "SchemaError", "__version__", "verbs", "run", "fc", "random_tuple"]


def run(verb, problem, *, seed=None, jobs=1, profile="default"):
    """Runs a suite on a problem (dict or JSON text) and returns the report as a dict."""
    text = problem if isinstance(problem, str) else json.dumps(problem)
    return json.loads(_hfc.run_suite(verb, text, seed=seed, jobs=jobs, profile=profile))


def fc(operators, function, *, space=None, method="contour"):
    """f(A_1, ..., A_d) for commuting matrices; `function` uses the JSON function schema."""
    ops = [np.asarray(a, dtype=complex) for a in operators]
    return _hfc.fc(ops, json.dumps(function), json.dumps(space) if space else "", method)


def random_tuple(d, n, seed, normal=True):
    return _hfc.random_tuple(d, n, seed, normal)
