"""Central tolerance record.

Defaults can be overridden process-wide through the ``QFLUCT_TOLERANCES``
environment variable, which holds a JSON object mapping field names to
floats, e.g. ``QFLUCT_TOLERANCES='{"cluster": 1e-8}'``.
"""
from __future__ import annotations

import contextlib
import dataclasses
import json
import os
from dataclasses import dataclass

ENV_VAR = "QFLUCT_TOLERANCES"


@dataclass(frozen=True)
class Tolerances:
    # matrix-level
    entry: float = 1e-10
    hermiticity: float = 1e-9
    degeneracy: float = 1e-8
    positive_definite: float = 1e-12
    # channels
    completeness: float = 1e-9
    fixed_point_eig: float = 1e-9
    stationarity: float = 1e-8
    positivity: float = 1e-8
    amplitude: float = 1e-10
    log_gap: float = 1e-9
    channel_equality: float = 1e-9
    # distributions
    rank: float = 1e-12
    cluster: float = 1e-9
    negligible: float = 1e-12
    normalization: float = 1e-9
    crooks: float = 1e-9
    integral: float = 1e-10
    marginal: float = 1e-10
    nonreal_marginal: float = 1e-9
    # two-point measurement
    leakage: float = 1e-8
    tpm_exact: float = 1e-10
    sampled_deviation: float = 0.1

    def replace(self, **overrides: float) -> "Tolerances":
        unknown = set(overrides) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise KeyError(f"unknown tolerance fields: {sorted(unknown)}")
        return dataclasses.replace(self, **{k: float(v) for k, v in overrides.items()})


def _from_env() -> Tolerances:
    raw = os.environ.get(ENV_VAR)
    if not raw:
        return Tolerances()
    return Tolerances().replace(**json.loads(raw))


_active = _from_env()


def current() -> Tolerances:
    return _active


@contextlib.contextmanager
def override(**overrides: float):
    """Temporarily replace fields of the active tolerance record."""
    global _active
    previous = _active
    _active = previous.replace(**overrides)
    try:
        yield _active
    finally:
        _active = previous
