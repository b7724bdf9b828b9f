"""JSON encodings of matrices, POVMs, subalgebras, priors, models and reports."""

import json
import os

import numpy as np

from .bayes import DiscretePrior, disk_prior
from .exceptions import ValidationError
from .models import BUILTIN_MODELS, BUILTIN_SUBALGEBRAS, get_model, point_model
from .operators import Povm, validate_povm
from .subalgebra import BlockSpec, Ring, SubalgebraSpec


def matrix_to_json(A):
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValidationError("only 2-d arrays can be encoded as matrices")
    return {"dim": int(A.shape[0]), "re": A.real.tolist(), "im": np.imag(A).tolist()}


def matrix_from_json(obj):
    """Accepts ``{"re": ..., "im": ...}`` (``im`` optional) or a bare nested list."""
    if isinstance(obj, dict):
        if "re" not in obj:
            raise ValidationError("matrix object needs an 're' field")
        A = np.asarray(obj["re"], dtype=float).astype(complex)
        if obj.get("im") is not None:
            A = A + 1j * np.asarray(obj["im"], dtype=float)
        if "dim" in obj and A.shape != (obj["dim"], obj["dim"]):
            raise ValidationError(f"matrix declares dim {obj['dim']} but has shape {A.shape}")
    else:
        A = np.asarray(obj, dtype=complex)
        if A.ndim == 0:
            A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"matrix must be square, got shape {A.shape}")
    return A


def real_matrix_from_json(obj):
    A = matrix_from_json(obj)
    if np.max(np.abs(A.imag)) > 0:
        raise ValidationError("expected a real matrix")
    return A.real


def povm_to_json(M):
    return {"dim": int(M.dim), "elements": [matrix_to_json(E) for E in M]}


def povm_from_json(obj):
    if not isinstance(obj, dict) or "elements" not in obj:
        raise ValidationError("POVM object needs an 'elements' field")
    M = validate_povm([matrix_from_json(E) for E in obj["elements"]])
    if "dim" in obj and obj["dim"] != M.dim:
        raise ValidationError(f"POVM declares dim {obj['dim']} but elements have dim {M.dim}")
    return M


def subalgebra_to_json(spec):
    return {
        "ambient_dim": int(spec.ambient_dim),
        "blocks": [{"ring": b.ring.value, "n": b.n, "m": b.m} for b in spec.blocks],
        "basis_change": None if spec.basis_change is None else matrix_to_json(spec.basis_change),
    }


def subalgebra_from_json(obj):
    try:
        blocks = [BlockSpec(Ring.parse(b["ring"]), b["n"], b.get("m", 1)) for b in obj["blocks"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed subalgebra block: {exc}") from None
    U = obj.get("basis_change")
    return SubalgebraSpec(
        tuple(blocks),
        ambient_dim=obj.get("ambient_dim"),
        basis_change=None if U is None else matrix_from_json(U),
    )


def prior_to_json(prior):
    return {
        "d": int(prior.d),
        "points": [
            {
                "theta": prior.thetas[k].tolist(),
                "pi": float(prior.weights[k]),
                "W": prior.W[k].tolist(),
                "rho": matrix_to_json(prior.rhos[k]),
            }
            for k in range(prior.size)
        ],
    }


def prior_from_json(obj):
    try:
        points = obj["points"]
        thetas = [np.atleast_1d(np.asarray(p["theta"], dtype=float)) for p in points]
        weights = [p["pi"] for p in points]
        rhos = [matrix_from_json(p["rho"]) for p in points]
        Ws = [real_matrix_from_json(p["W"]) if "W" in p else None for p in points]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed prior: {exc}") from None
    d = obj.get("d", thetas[0].size if thetas else 0)
    if any(t.size != d for t in thetas):
        raise ValidationError(f"every theta must have d={d} entries")
    W = None if all(w is None for w in Ws) else np.stack([np.eye(d) if w is None else w for w in Ws])
    return DiscretePrior(np.stack(thetas), weights, rhos, W)


def point_model_to_json(tangent):
    return {
        "hilbert_dim": int(tangent.dim),
        "d": int(tangent.d),
        "rho": matrix_to_json(tangent.rho),
        "drho": [matrix_to_json(D) for D in tangent.drho],
    }


def point_model_from_json(obj):
    try:
        model = point_model(matrix_from_json(obj["rho"]), [matrix_from_json(D) for D in obj["drho"]])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed model: {exc}") from None
    if obj.get("d", model.param_dim) != model.param_dim or obj.get("hilbert_dim", model.hilbert_dim) != model.hilbert_dim:
        raise ValidationError("model declares d/hilbert_dim inconsistent with its matrices")
    return model


def report_to_json(report):
    out = {
        "mode": report.mode,
        "best_cost": report.best_cost,
        "best_povm": povm_to_json(report.best_povm),
        "per_restart_costs": [float(c) if np.isfinite(c) else None for c in report.per_restart_costs],
        "near_optimal": list(report.near_optimal),
    }
    if report.best_fisher is not None:
        out["best_fisher"] = report.best_fisher.tolist()
        out["fisher_spread"] = report.fisher_spread
    if report.best_estimates is not None:
        out["best_estimates"] = report.best_estimates.tolist()
    if report.cost_history:
        out["cost_history"] = list(report.cost_history)
    return out


def reduced_to_json(reduced):
    out = {
        "povm": povm_to_json(reduced.povm),
        "rounds": reduced.rounds,
        "certificates": [c.to_dict() for c in reduced.certificates],
    }
    for key in ("fisher_before", "fisher_after"):
        value = getattr(reduced, key)
        if value is not None:
            out[key] = value.tolist()
    for key in ("cost_before", "cost_after"):
        value = getattr(reduced, key)
        if value is not None:
            out[key] = value
    return out


def load_json(source):
    """Parse ``source`` as inline JSON when it looks like JSON, otherwise read it as a file path."""
    if isinstance(source, (dict, list)):
        return source
    text = str(source).strip()
    if text.startswith(("{", "[")):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid inline JSON: {exc}") from None
    if not os.path.exists(text):
        raise ValidationError(f"no such file: {text}")
    with open(text) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{text}: invalid JSON: {exc}") from None


def load_model(source):
    if source in BUILTIN_MODELS:
        return get_model(source)
    return point_model_from_json(load_json(source))


def load_subalgebra(source):
    if source in BUILTIN_SUBALGEBRAS:
        return BUILTIN_SUBALGEBRAS[source]()
    return subalgebra_from_json(load_json(source))


def load_prior(source):
    """Prior from JSON, or a builtin disk prior ``qubit-disk[:n]`` / ``qubit-disk-2copy[:n]``."""
    name, _, size = str(source).partition(":")
    if name in ("qubit-disk", "qubit-disk-2copy"):
        try:
            n = int(size) if size else 5
        except ValueError:
            raise ValidationError(f"bad grid size in {source!r}") from None
        return disk_prior(n, copies=2 if name.endswith("2copy") else 1)
    return prior_from_json(load_json(source))


def load_povm(source):
    return povm_from_json(load_json(source))


def load_weight(source, d):
    if source is None:
        return np.eye(d)
    return real_matrix_from_json(load_json(source))


def dumps(obj):
    return json.dumps(obj, indent=2)

