"""JSON model files and built-in presets.

A model file is a JSON object with a ``kind`` field:

========== ==============================================================
kind       fields
========== ==============================================================
ph         ``pi``, ``T``
fph        ``pi``, ``T``, ``alpha`` (optional ``atom``, checked)
mph        ``pi``, ``T``, ``R``
mpha       ``pi``, ``T``, ``R``, ``alpha``
feedforward ``pi``, ``alpha``, ``blocks``: list of ``{"C": ..., "D": ...}``
           (no ``D`` on the last block)
bivariate  ``alpha``, ``blocks``: ``pi1, pi2, pi3, T11, T12, T13, T22, T33``
preset     ``name``
========== ==============================================================

Any kind may carry ``nu``, a power vector for the transformed law.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .constructors import BivariateBlockSpec, FeedForwardSpec, build_bivariate, build_feed_forward
from .frac_phase import FracPHDist
from .mph import MPHAlphaDist, MPHStarDist
from .phase_type import PHDist, ValidationError

__all__ = ["Model", "KINDS", "parse_model", "load_model", "list_presets", "fph_document"]

KINDS = ("ph", "fph", "mph", "mpha", "feedforward", "bivariate", "preset")

_REQUIRED = {
    "ph": ("pi", "T"),
    "fph": ("pi", "T", "alpha"),
    "mph": ("pi", "T", "R"),
    "mpha": ("pi", "T", "R", "alpha"),
    "feedforward": ("pi", "blocks", "alpha"),
    "bivariate": ("blocks", "alpha"),
    "preset": ("name",),
}


@dataclass(frozen=True)
class Model:
    """A parsed model: the distribution, its kind and an optional power vector."""

    dist: object
    kind: str
    nu: np.ndarray | None = None

    @property
    def n(self) -> int:
        return getattr(self.dist, "n", 1)


def list_presets():
    files = resources.files("fracph").joinpath("presets").iterdir()
    return sorted(f.name[: -len(".json")] for f in files if f.name.endswith(".json"))


def _preset_document(name: str) -> dict:
    path = resources.files("fracph").joinpath("presets", f"{name}.json")
    if not path.is_file():
        raise ValidationError([f"unknown preset {name!r}; available: {', '.join(list_presets())}"])
    return json.loads(path.read_text())


def parse_model(doc: dict) -> Model:
    """Build a validated distribution from a model document.

    Raises
    ------
    ValidationError
        Naming the missing field or the violated invariant.
    """
    if not isinstance(doc, dict):
        raise ValidationError(["model file must hold a JSON object"])
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ValidationError([f"kind must be one of {', '.join(KINDS)}, got {kind!r}"])
    missing = [f for f in _REQUIRED[kind] if f not in doc]
    if missing:
        raise ValidationError([f"{kind} model is missing field {f!r}" for f in missing])
    try:
        if kind == "preset":
            inner = parse_model(_preset_document(doc["name"]))
            dist = inner.dist
            nu = doc.get("nu", None if inner.nu is None else inner.nu.tolist())
        else:
            dist = _build(kind, doc)
            nu = doc.get("nu")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError([f"malformed {kind} model: {exc}"]) from exc
    if nu is not None:
        nu = np.atleast_1d(np.asarray(nu, dtype=float))
        n = getattr(dist, "n", 1)
        if nu.shape != (n,) or np.any(nu <= 0):
            raise ValidationError([f"nu must be a positive vector of length {n}"])
    return Model(dist, kind, nu)


def _build(kind, doc):
    if kind == "ph":
        return PHDist(doc["pi"], doc["T"])
    if kind == "fph":
        dist = FracPHDist.from_arrays(doc["pi"], doc["T"], doc["alpha"])
        if "atom" in doc and abs(float(doc["atom"]) - dist.atom) > 1e-12:
            raise ValidationError([f"atom {doc['atom']!r} disagrees with 1 - pi e = {dist.atom!r}"])
        return dist
    if kind == "mph":
        return MPHStarDist.from_arrays(doc["pi"], doc["T"], doc["R"])
    if kind == "mpha":
        return MPHAlphaDist.from_arrays(doc["pi"], doc["T"], doc["R"], doc["alpha"])
    if kind == "feedforward":
        blocks = doc["blocks"]
        if not isinstance(blocks, list) or not blocks:
            raise ValidationError(["feedforward blocks must be a non-empty list"])
        C = [b["C"] for b in blocks]
        D = [b["D"] for b in blocks[:-1]]
        return build_feed_forward(FeedForwardSpec(doc["pi"], C, D), doc["alpha"])
    blocks = doc["blocks"]
    if not isinstance(blocks, dict):
        raise ValidationError(["bivariate blocks must be an object"])
    return build_bivariate(BivariateBlockSpec(**blocks), doc["alpha"])


def load_model(source: str) -> Model:
    """Load a model from a JSON file path, or a preset given as ``preset:<name>``.

    A bare preset name is accepted too when no such file exists.

    Raises
    ------
    OSError, json.JSONDecodeError
        On unreadable files.
    ValidationError
        On invalid content.
    """
    if source.startswith("preset:"):
        return parse_model({"kind": "preset", "name": source[len("preset:") :]})
    try:
        with open(source, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        if source in list_presets():
            return parse_model({"kind": "preset", "name": source})
        raise
    return parse_model(doc)


def fph_document(dist: FracPHDist, atom: float | None = None) -> dict:
    """Model document of kind ``fph`` (plus the atom) for a PH_alpha law."""
    doc = {
        "kind": "fph",
        "alpha": float(dist.alpha),
        "pi": [float(v) for v in dist.pi],
        "T": [[float(v) for v in row] for row in dist.T],
    }
    doc["atom"] = float(dist.atom if atom is None else atom)
    return doc
