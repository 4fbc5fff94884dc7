"""Named subalgebra and state presets for the command line"""
import json
import logging
import math
import re
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from modules.algebra import (
    GeneratorPayload,
    SubalgebraPayload,
    SubalgebraStructure,
    decompose_from_generators,
    make_diagonal,
    make_tensor_factor,
    make_trivial,
    pimsner_popa_index,
)
from modules.exceptions import ConfigError
from modules.linops import DensityOperator, DensityPayload, permutation_matrix, random_density

logger = logging.getLogger(__name__)

_CALL = re.compile(r"^\s*([a-z][a-z\-]*)\s*(?:\(\s*([0-9,\s]*)\s*\))?\s*$")


def swap_invariant() -> SubalgebraStructure:
    """Algebra generated by SWAP on C²⊗C², blocks [(3, 1), (1, 1)]"""
    return decompose_from_generators([permutation_matrix([2, 2], [1, 0])], mode="algebra")


ALGEBRA_PRESETS: Dict[str, Callable[..., SubalgebraStructure]] = {
    "trivial": make_trivial,
    "diagonal": make_diagonal,
    "factor": lambda m, n: make_tensor_factor(m, n, keep_first=True),
    "swap-invariant": swap_invariant,
}

_ALGEBRA_ARITY = {"trivial": 1, "diagonal": 1, "factor": 2, "swap-invariant": 0}

STATE_PRESETS = ("plus", "ghz-ish", "random")


def _parse_call(text: str):
    match = _CALL.match(text)
    if match is None:
        return None, []
    args = [int(a) for a in re.split(r"[,\s]+", match.group(2) or "") if a]
    return match.group(1), args


def _load_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}", line=exc.lineno, column=exc.colno) from exc


def resolve_algebra(source: str, seed: Optional[int] = None) -> SubalgebraStructure:
    """Preset name such as diagonal(2) or factor(2,3), or a JSON file

    The file holds either a structure (dim, blocks, unitary) or generators
    with a decomposition mode.
    """
    path = Path(source)
    if path.suffix == ".json":
        if not path.exists():
            raise ConfigError("algebra file does not exist", path=source)
        raw = _load_json(path)
        try:
            if "generators" in raw:
                payload = GeneratorPayload(**raw)
                gens = [g.to_array() for g in payload.generators]
                return decompose_from_generators(gens, d=raw.get("dim"), mode=payload.mode, seed=seed)
            return SubalgebraStructure.from_payload(SubalgebraPayload(**raw))
        except ValidationError as exc:
            raise ConfigError(f"invalid algebra file {path}", errors=exc.error_count()) from exc

    name, args = _parse_call(source)
    if name not in ALGEBRA_PRESETS:
        raise ConfigError("unknown algebra preset", algebra=source, known=sorted(ALGEBRA_PRESETS))
    if len(args) != _ALGEBRA_ARITY[name]:
        raise ConfigError(f"{name} takes {_ALGEBRA_ARITY[name]} integer argument(s)", algebra=source)
    if any(a < 1 for a in args):
        raise ConfigError("preset arguments must be positive", algebra=source)
    return ALGEBRA_PRESETS[name](*args)


def plus_state(d: int) -> np.ndarray:
    v = np.full(d, 1 / math.sqrt(d), dtype=complex)
    return np.outer(v, v.conj())


def ghz_ish_state(d: int, weight: float = 0.9) -> np.ndarray:
    """weight·|GHZ⟩⟨GHZ| + (1 − weight)·1/d on log₂ d qubits"""
    if d < 2 or d & (d - 1):
        raise ConfigError("ghz-ish needs a qubit register (d a power of two)", dim=d)
    v = np.zeros(d, dtype=complex)
    v[0] = v[-1] = 1 / math.sqrt(2)
    return weight * np.outer(v, v.conj()) + (1 - weight) * np.eye(d) / d


def resolve_state(source: str, d: int, seed: int) -> np.ndarray:
    """plus, ghz-ish, random or random(seed), or a density JSON file"""
    path = Path(source)
    if path.suffix == ".json":
        if not path.exists():
            raise ConfigError("state file does not exist", path=source)
        try:
            state = DensityOperator.from_payload(DensityPayload(**_load_json(path)))
        except ValidationError as exc:
            raise ConfigError(f"invalid state file {path}", errors=exc.error_count()) from exc
        if state.dim != d:
            raise ConfigError("state dimension does not match the algebra", state=state.dim, algebra=d)
        return state.matrix

    name, args = _parse_call(source)
    if name == "plus" and not args:
        return plus_state(d)
    if name == "ghz-ish" and not args:
        return ghz_ish_state(d)
    if name == "random" and len(args) <= 1:
        return random_density(d, np.random.default_rng(args[0] if args else seed))
    raise ConfigError("unknown state preset", state=source, known=list(STATE_PRESETS))


def presets() -> List[Dict[str, Any]]:
    """Catalogue of the named presets with sample instances"""
    shown = ["trivial(2)", "diagonal(2)", "factor(2,3)", "swap-invariant"]
    out: List[Dict[str, Any]] = []
    for source in shown:
        N = resolve_algebra(source)
        out.append({
            "kind": "algebra",
            "name": source,
            "dim": N.ambient_dim,
            "blocks": [list(b) for b in N.blocks],
            "index_inverse": pimsner_popa_index(N).inverse,
        })
    for name in STATE_PRESETS:
        out.append({"kind": "state", "name": name})
    logger.debug(f"Listed {len(out)} presets")
    return out
