"""Model-spec documents: validated JSON in, coefficient sources out.

A document selects one of four models:

    {"model": "zero"}
    {"model": "explicit", "alphas": [[re, im], ...]}
    {"model": "sparse", "eta": 0.5, "lengths": [2, 4, 64]}
    {"model": "sparse", "eta": 0.5, "lengths": {"log2_factorial": 4}}
    {"model": "walk", "eta": 0.5, "lengths": [...]}           # rotation coins
    {"model": "walk", "coins": [[[re,im],[re,im],[re,im],[re,im]], ...]}

plus an optional "lambda_phase_radians" boundary rotation (explicit and
sparse models only).  The rule form of "lengths" generates the first k
sites of log2(L_j) = j!.  Explicit walk coins list sites 1..k, each coin
given row-major as [c11, c12, c21, c22].
"""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cmv import VerblunskySequence
from .errors import SchemaError, UnsupportedCoinError
from .qwalk import coins_to_cmv, gauge_transform
from .sparse import SparseSpec, coin_sequence, verblunsky

__all__ = ["ModelHandle", "parse_model", "load_model"]

_MODELS = ("zero", "explicit", "sparse", "walk")


@dataclass
class ModelHandle:
    """A parsed model: its operator-side coefficients plus provenance."""

    kind: str
    sequence: VerblunskySequence
    sparse: SparseSpec | None = None
    coins: dict[int, np.ndarray] | None = None

    @property
    def eta(self) -> float | None:
        return self.sparse.eta if self.sparse is not None else None

    @property
    def is_walk(self) -> bool:
        return self.kind == "walk"


def _require(obj: dict, field: str, kinds, where: str = ""):
    if field not in obj:
        raise SchemaError("required field is missing", field)
    value = obj[field]
    if not isinstance(value, kinds):
        raise SchemaError(
            f"expected {getattr(kinds, '__name__', kinds)}, got {type(value).__name__}",
            field,
        )
    return value


def _no_extras(obj: dict, allowed: set[str]):
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"unknown field (allowed: {sorted(allowed)})", key)


def _parse_lengths(value) -> tuple[int, ...]:
    if isinstance(value, dict):
        if set(value) != {"log2_factorial"}:
            raise SchemaError(
                'rule object must be {"log2_factorial": count}', "lengths"
            )
        count = value["log2_factorial"]
        if not isinstance(count, int) or count < 1:
            raise SchemaError(
                "count must be a positive integer", "lengths.log2_factorial"
            )
        return SparseSpec.default(count=count).lengths
    if not isinstance(value, list) or not value:
        raise SchemaError("expected a nonempty list or a rule object", "lengths")
    out = []
    for i, entry in enumerate(value):
        if not isinstance(entry, int) or isinstance(entry, bool):
            raise SchemaError("expected an integer", f"lengths[{i}]")
        out.append(entry)
    return tuple(out)


def _parse_eta(obj: dict) -> float:
    eta = _require(obj, "eta", (int, float))
    if isinstance(eta, bool) or not (0.0 < float(eta) < 1.0):
        raise SchemaError(f"eta must lie in (0, 1), got {eta}", "eta")
    return float(eta)


def _parse_phase(obj: dict) -> complex:
    raw = obj.get("lambda_phase_radians", 0.0)
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise SchemaError("expected a number", "lambda_phase_radians")
    return cmath.exp(1j * float(raw))


def _parse_complex_pair(value, field: str) -> complex:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)
    ):
        raise SchemaError("expected a [re, im] number pair", field)
    return complex(value[0], value[1])


def _parse_alphas(obj: dict) -> list[complex]:
    raw = _require(obj, "alphas", list)
    alphas = []
    for i, pair in enumerate(raw):
        a = _parse_complex_pair(pair, f"alphas[{i}]")
        if abs(a) >= 1.0:
            raise SchemaError(
                f"|alpha| must be < 1, got {abs(a):.6f}", f"alphas[{i}]"
            )
        alphas.append(a)
    return alphas


def _parse_coins(obj: dict) -> dict[int, np.ndarray]:
    raw = _require(obj, "coins", list)
    if not raw:
        raise SchemaError("at least one coin is required", "coins")
    coins: dict[int, np.ndarray] = {}
    for i, entry in enumerate(raw):
        if not isinstance(entry, list) or len(entry) != 4:
            raise SchemaError(
                "expected four [re, im] pairs (c11, c12, c21, c22)", f"coins[{i}]"
            )
        vals = [
            _parse_complex_pair(entry[k], f"coins[{i}][{k}]") for k in range(4)
        ]
        mat = np.array([[vals[0], vals[1]], [vals[2], vals[3]]])
        defect = float(np.max(np.abs(mat @ mat.conj().T - np.eye(2))))
        if defect > 1e-12:
            raise SchemaError(
                f"coin is not unitary (defect {defect:.2e})", f"coins[{i}]"
            )
        coins[i + 1] = mat
    return coins


def parse_model(obj) -> ModelHandle:
    """Validate a decoded JSON object and build the model it describes."""
    if not isinstance(obj, dict):
        raise SchemaError(f"document must be an object, got {type(obj).__name__}")
    kind = _require(obj, "model", str)
    if kind not in _MODELS:
        raise SchemaError(f"unknown model {kind!r} (one of {_MODELS})", "model")

    if kind == "zero":
        _no_extras(obj, {"model"})
        return ModelHandle("zero", VerblunskySequence.zero())

    if kind == "explicit":
        _no_extras(obj, {"model", "alphas", "lambda_phase_radians"})
        alphas = _parse_alphas(obj)
        seq = VerblunskySequence.from_alphas(alphas)
        phase = _parse_phase(obj)
        if phase != 1.0:
            seq = seq.rotated(phase)
        return ModelHandle("explicit", seq)

    if kind == "sparse":
        _no_extras(obj, {"model", "eta", "lengths", "lambda_phase_radians"})
        eta = _parse_eta(obj)
        phase = _parse_phase(obj)
        lengths = _parse_lengths(_require(obj, "lengths", (list, dict)))
        try:
            spec = SparseSpec(eta, lengths, phase)
        except SchemaError:
            raise
        except ValueError as exc:
            raise SchemaError(str(exc), "lengths") from exc
        return ModelHandle("sparse", verblunsky(spec), sparse=spec)

    # walk: rotation coins from a sparse rule, or explicit unitary coins
    if "coins" in obj:
        _no_extras(obj, {"model", "coins"})
        coins = _parse_coins(obj)
        try:
            seq = coins_to_cmv(coins)
        except UnsupportedCoinError:
            try:
                seq, _ = gauge_transform(coins)
            except UnsupportedCoinError as exc:
                raise SchemaError(str(exc), "coins") from exc
        return ModelHandle("walk", seq, coins=coins)
    _no_extras(obj, {"model", "eta", "lengths"})
    eta = _parse_eta(obj)
    lengths = _parse_lengths(_require(obj, "lengths", (list, dict)))
    try:
        spec = SparseSpec(eta, lengths)
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(str(exc), "lengths") from exc
    coins = coin_sequence(spec).coin_map()
    return ModelHandle("walk", coins_to_cmv(coins), sparse=spec, coins=coins)


def load_model(path: str | Path) -> ModelHandle:
    """Read and validate a model document from a file (or '-' for stdin)."""
    if str(path) == "-":
        import sys

        text = sys.stdin.read()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise SchemaError(f"cannot read model file: {exc}")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        )
    return parse_model(obj)
