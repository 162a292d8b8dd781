"""Experiment configuration: a single JSON document validated against
``config_schema.json``. Omitted sections fall back to the photonic scenario
(p=0.2864, s=0.1316, initial populations 4/5 and 1/5)."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .channels import KrausChannel, build_covariant, build_incovariant, identity_channel
from .errors import ConfigError
from .fluctuation import PHOTONIC_P, PHOTONIC_S, ProcessContext, state_from_eigen

_C, _S = float(np.cos(np.pi / 6)), float(np.sin(np.pi / 6))

DEFAULTS = {
    "channel": {"builder": "incovariant", "p": PHOTONIC_P, "s": PHOTONIC_S},
    "initial_state": {
        "eigenvalues": [0.8, 0.2],
        "eigenvectors": [[[_S, 0.0], [0.0, -_C]], [[_C, 0.0], [0.0, _S]]],
    },
    "theta": {"min": -np.pi, "max": np.pi, "count": 101},
}


def load_schema() -> dict:
    return json.loads(resources.files("qfluct").joinpath("config_schema.json").read_text())


def _complex_matrix(rows) -> np.ndarray:
    m = np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError(f"matrix must be square, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class ExperimentConfig:
    document: dict  # validated, defaults filled in

    @classmethod
    def from_dict(cls, raw: dict | None = None) -> "ExperimentConfig":
        raw = {} if raw is None else raw
        try:
            jsonschema.validate(raw, load_schema())
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"invalid config at {list(exc.absolute_path)}: {exc.message}") from None
        doc = copy.deepcopy(DEFAULTS)
        doc.update(copy.deepcopy(raw))
        return cls(doc)

    @classmethod
    def load(cls, path: str | Path | None) -> "ExperimentConfig":
        if path is None:
            return cls.from_dict({})
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(raw)

    @property
    def sha256(self) -> str:
        blob = json.dumps(self.document, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def channel(self) -> KrausChannel:
        spec = self.document["channel"]
        builder = spec.get("builder")
        if builder == "incovariant":
            return build_incovariant(spec["p"], spec["s"])
        if builder == "covariant":
            return build_covariant(spec["p"], spec["s"])
        if builder == "identity":
            return identity_channel(spec.get("dim", 2))
        return KrausChannel(tuple(_complex_matrix(k) for k in spec["kraus"]), label=spec.get("label", "explicit"))

    def initial_state(self) -> np.ndarray:
        spec = self.document["initial_state"]
        if "density_matrix" in spec:
            return _complex_matrix(spec["density_matrix"])
        vecs = [[complex(re, im) for re, im in v] for v in spec["eigenvectors"]]
        if len(vecs) != len(spec["eigenvalues"]):
            raise ConfigError("need one eigenvector per eigenvalue")
        return state_from_eigen(spec["eigenvalues"], vecs)

    def gamma(self) -> np.ndarray | None:
        spec = self.document.get("gamma")
        return None if spec is None else _complex_matrix(spec["density_matrix"])

    def context(self) -> ProcessContext:
        return ProcessContext.build(self.channel(), self.initial_state(), self.gamma())

    def thetas(self) -> np.ndarray:
        spec = self.document["theta"]
        if isinstance(spec, list):
            return np.array(spec, dtype=float)
        return np.linspace(spec["min"], spec["max"], spec["count"])

    @property
    def shots(self) -> int | None:
        return self.document.get("shots")

    @property
    def seed(self) -> int:
        return self.document.get("seed", 0)

    @property
    def output_dir(self) -> str | None:
        return self.document.get("output_dir")

    @property
    def tolerances(self) -> dict:
        return self.document.get("tolerances", {})
