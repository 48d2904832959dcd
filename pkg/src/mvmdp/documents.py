"""JSON model documents and report serialization."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InvalidModel
from .global_opt import SolveReport
from .mdp_core import Mdp

LOAD_ROW_TOL = 1e-9
SIG_DIGITS = 12


def num(x: float) -> float:
    """Round to 12 significant digits for output."""
    x = float(x)
    if not math.isfinite(x) or x == 0.0:
        return x
    return float(f"{x:.{SIG_DIGITS}g}")


def mdp_from_document(doc: dict) -> Mdp:
    """Parse an MDP document.

    Keys: ``states``, ``actions_per_state`` (counts or explicit label lists),
    ``transitions[s][a][j]``, ``rewards[s][a]``, optional ``beta`` (default 1.0)
    and ``name``. Transition rows may be off by up to 1e-9 and are renormalized.
    """
    if not isinstance(doc, dict):
        raise InvalidModel("MDP document must be a JSON object")
    try:
        S = doc["states"]
        per_state = doc["actions_per_state"]
        transitions = doc["transitions"]
        rewards = doc["rewards"]
    except KeyError as exc:
        raise InvalidModel(f"MDP document is missing key {exc}") from None
    if not isinstance(S, int) or isinstance(S, bool) or S < 1:
        raise InvalidModel(f"'states' must be a positive integer, got {S!r}")
    if not isinstance(per_state, list) or len(per_state) != S:
        raise InvalidModel("'actions_per_state' must list one entry per state")
    labels = None
    if all(isinstance(n, int) and not isinstance(n, bool) for n in per_state):
        counts = list(per_state)
    elif all(isinstance(n, list) for n in per_state):
        labels = [tuple(n) for n in per_state]
        counts = [len(n) for n in per_state]
    else:
        raise InvalidModel("'actions_per_state' entries must be all counts or all action lists")
    if not isinstance(transitions, list) or len(transitions) != S or not isinstance(rewards, list) or len(rewards) != S:
        raise InvalidModel("'transitions' and 'rewards' must have one entry per state")
    A = max(counts)
    P = np.zeros((S, A, S))
    R = np.full((S, A), np.nan)
    for s in range(S):
        if not isinstance(transitions[s], list) or len(transitions[s]) != counts[s]:
            raise InvalidModel(f"state {s}: expected {counts[s]} transition rows")
        if not isinstance(rewards[s], list) or len(rewards[s]) != counts[s]:
            raise InvalidModel(f"state {s}: expected {counts[s]} rewards")
        for a in range(counts[s]):
            row = transitions[s][a]
            if not isinstance(row, list) or len(row) != S:
                raise InvalidModel(f"transition row ({s}, {a}) must have {S} entries")
            try:
                P[s, a] = [float(v) for v in row]
                R[s, a] = float(rewards[s][a])
            except (TypeError, ValueError):
                raise InvalidModel(f"non-numeric entry at ({s}, {a})") from None
            total = P[s, a].sum()
            if abs(total - 1.0) > LOAD_ROW_TOL:
                raise InvalidModel(f"transition row ({s}, {a}) sums to {total!r}")
            if total != 1.0 and abs(total - 1.0) > 1e-12:
                P[s, a] /= total
    beta = doc.get("beta", 1.0)
    if not isinstance(beta, (int, float)) or isinstance(beta, bool):
        raise InvalidModel(f"'beta' must be a number, got {beta!r}")
    return Mdp(P, R, tuple(counts), beta=float(beta), name=str(doc.get("name", "")), action_labels=labels)


def mdp_to_document(mdp: Mdp) -> dict:
    counts = list(mdp.action_counts)
    per_state: list[Any]
    if mdp.action_labels is None:
        per_state = counts
    else:
        per_state = [list(row) for row in mdp.action_labels]
    return {
        "name": mdp.name,
        "states": mdp.n_states,
        "actions_per_state": per_state,
        "beta": mdp.beta,
        "transitions": [[mdp.transitions[s, a].tolist() for a in range(n)] for s, n in enumerate(counts)],
        "rewards": [[float(mdp.rewards[s, a]) for a in range(n)] for s, n in enumerate(counts)],
    }


def load_mdp(path) -> Mdp:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidModel(f"{path}: not valid JSON ({exc})") from None
    return mdp_from_document(doc)


def save_mdp(mdp: Mdp, path) -> None:
    Path(path).write_text(json.dumps(mdp_to_document(mdp), indent=1))


def report_to_document(rep: SolveReport, mdp: Mdp, wall_time_ms: float) -> dict:
    policy = [mdp.action_label(s, a) for s, a in enumerate(rep.policy)]
    return {
        "instance": mdp.name,
        "objective_mode": rep.mode.value,
        "algorithm": rep.algorithm.value,
        "beta": num(mdp.beta),
        "eta_star": num(rep.objective),
        "mu_star": num(rep.mean),
        "sigma_star": num(rep.variance),
        "y_star": num(rep.y),
        "policy": policy,
        "aux_solves": rep.aux_solves,
        "policies_evaluated": rep.policies_evaluated,
        "termination": rep.termination,
        "iterations": [
            {
                "y": num(it.y),
                "policy": [mdp.action_label(s, a) for s, a in enumerate(it.policy)],
                "mu": num(it.mean),
                "sigma": num(it.variance),
                "eta": num(it.objective),
                "eta_tilde": num(it.pseudo_objective),
                "removed": [[num(lo), num(hi)] for lo, hi in it.removed],
                "best_eta": num(it.best_objective),
            }
            for it in rep.trace
        ],
        "wall_time_ms": num(wall_time_ms),
    }
