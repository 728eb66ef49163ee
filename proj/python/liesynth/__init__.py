"""Lie-bracket synthesis of non-admissible vector fields on communication graphs.

Vector fields are dicts ``{"dim": n, "components": {"1": "(sin (var 3))"}}``
with 1-based components and s-expression entries.
"""

import json

from . import _core
from ._core import Error

__all__ = ["Error", "lie_bracket", "rewrite", "verify", "simulate", "sweep", "solve_kkt", "run_demo"]


def _dump(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def _problem_text(problem):
    if hasattr(problem, "read_text"):
        return problem.read_text()
    return problem


def lie_bracket(f, g):
    """Symbolic bracket [f, g] = Dg f - Df g."""
    return json.loads(_core.lie_bracket(_dump(f), _dump(g)))


def rewrite(graph, target, strategy="auto", **options):
    """Rewrite `target` into admissible brackets on the edge-list `graph`."""
    return json.loads(_core.rewrite(graph, _dump(target), strategy, **options))


def verify(result, samples=64, seed=0, tol=1e-6):
    return json.loads(_core.verify(_dump(result), samples, seed, tol))


def simulate(result, z0, T, omega=200.0, **options):
    """Returns (times, states) of the oscillatory-input system."""
    return _core.simulate(_dump(result), list(z0), T, omega, **options)


def sweep(result, z0, T, omegas, jobs=1):
    """Returns [(omega, sup_error)] against the bracket system."""
    return _core.sweep(_dump(result), list(z0), T, list(omegas), jobs)


def solve_kkt(problem):
    """KKT point of a TOML problem (text or pathlib.Path)."""
    return _core.solve_kkt(_problem_text(problem))


def run_demo(problem, omega=400.0, T=40.0):
    return json.loads(_core.run_demo(_problem_text(problem), omega, T))
