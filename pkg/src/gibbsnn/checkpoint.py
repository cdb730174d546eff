"""Checkpoint serialization: JSON, canonical form, lossless round-trip.

Numbers are emitted with Python's shortest-round-trip float repr and keys
are sorted, so save -> load -> save is byte-identical.  The file stores
the point estimate (weights, activation parameters, scales), per-chain
final states with their RNG states when the producer was the sampler, and
provenance (config hash, seed, package version).
"""

import hashlib
import json

import numpy as np

from . import __version__
from .activations import ActivationParams
from .errors import FormatError
from .model import HyperState, ModelState
from .network import NetworkSpec

FORMAT_VERSION = 1


def _canon(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(doc) -> str:
    """sha256 of the canonical JSON encoding of a config document."""
    return hashlib.sha256(_canon(doc).encode()).hexdigest()


def _act_doc(act):
    if isinstance(act, ActivationParams):
        return act.as_dict()
    # zoo parameter dict: arrays become lists, the basis tuple a list
    out = {}
    for key, val in act.items():
        if isinstance(val, np.ndarray):
            out[key] = val.tolist()
        elif isinstance(val, tuple):
            out[key] = list(val)
        else:
            out[key] = val
    return out


def _act_from(doc, activation_name):
    if activation_name == "mmelu":
        return ActivationParams(**doc)
    out = {}
    for key, val in doc.items():
        if isinstance(val, list) and val and isinstance(val[0], (int, float)):
            out[key] = np.asarray(val, dtype=np.float64)
        elif isinstance(val, list):
            out[key] = tuple(val)
        else:
            out[key] = val
    return out


def _state_doc(w, act, hyper: HyperState | None) -> dict:
    return {
        "weights": [np.asarray(wi).tolist() for wi in w],
        "activation": _act_doc(act),
        "hyper": None if hyper is None else {
            "lam": hyper.lam.tolist(),
            "lam_b": hyper.lam_b,
            "sigma2": hyper.sigma2,
        },
    }


def _state_from(doc, activation_name) -> dict:
    hyper = doc["hyper"]
    return {
        "w": [np.asarray(wi, dtype=np.float64) for wi in doc["weights"]],
        "act": _act_from(doc["activation"], activation_name),
        "hyper": None if hyper is None else HyperState(
            np.asarray(hyper["lam"], dtype=np.float64),
            hyper["lam_b"], hyper["sigma2"]),
    }


def as_model_state(state: dict) -> ModelState:
    """Rebuild a sampler ModelState from a loaded checkpoint state dict."""
    if state["hyper"] is None or not isinstance(state["act"], ActivationParams):
        raise FormatError("checkpoint does not hold a sampler state")
    return ModelState(state["w"], state["act"], state["hyper"])


def _jsonable_rng(rng_state):
    # PCG64 state dicts hold arbitrary-precision ints; JSON keeps them exact
    return rng_state


def save_checkpoint(path, net_spec: NetworkSpec, w, act, hyper,
                    iteration: int, provenance: dict, chains: list | None = None,
                    activation_name: str = "mmelu", extra: dict | None = None):
    """Write a checkpoint.

    w/act/hyper describe the point estimate (hyper may be None for the
    gradient-descent path).  `chains` optionally carries per-chain dicts
    {"state": ModelState, "rng_state": bit-generator state dict}.
    """
    doc = {
        "format_version": FORMAT_VERSION,
        "network": net_spec.to_dict(),
        "activation_name": activation_name,
        "state": _state_doc(w, act, hyper),
        "iteration": int(iteration),
        "provenance": dict(provenance),
        "chains": [
            {"state": _state_doc(ch["state"].w, ch["state"].act, ch["state"].hyper),
             "rng_state": _jsonable_rng(ch.get("rng_state"))}
            for ch in (chains or [])
        ],
    }
    if extra:
        doc["extra"] = extra
    with open(path, "w") as fh:
        fh.write(_canon(doc))
    return doc


def load_checkpoint(path) -> dict:
    """Read a checkpoint back; inverse of save_checkpoint.

    Returns a dict with keys: network (NetworkSpec), state (ModelState),
    iteration, provenance, chains, activation_name, extra, raw.
    """
    with open(path) as fh:
        raw = fh.read()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid checkpoint JSON: {exc}") from None
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatError(
            f"{path}: unsupported checkpoint format_version {version!r}")
    try:
        name = doc.get("activation_name", "mmelu")
        return {
            "network": NetworkSpec.from_dict(doc["network"]),
            "activation_name": name,
            "state": _state_from(doc["state"], name),
            "iteration": doc["iteration"],
            "provenance": doc["provenance"],
            "chains": [
                {"state": _state_from(ch["state"], name),
                 "rng_state": ch.get("rng_state")}
                for ch in doc.get("chains", [])
            ],
            "extra": doc.get("extra"),
            "raw": doc,
        }
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: malformed checkpoint: {exc!r}") from None


def resave(path, loaded: dict):
    """Re-serialize a loaded checkpoint; used to verify byte-identity."""
    with open(path, "w") as fh:
        fh.write(_canon(loaded["raw"]))
