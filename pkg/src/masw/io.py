"""File formats and the synthetic datasets.

Models and inversion specs are JSON objects; curves are two-column CSV
with a units header::

    wavelength[m],velocity[m/s]
    12.5,187.5

Doubles are written with 17 significant digits so a write/read cycle
returns the same values. Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import functools
import itertools
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np

from .model import (DispersionCurve, LayeredEarthModel, ModelValidationError, VelocitySweep,
                    validate_curve, validate_model)
from .parallel import PartitionStrategy

PathLike = Union[str, Path]

MODEL_FORMAT = "masw-model/1"
SPEC_FORMAT = "masw-inversion/1"
CURVE_HEADER = "wavelength[m],velocity[m/s]"
UNITS = {"thickness": "m", "density": "kg/m^3", "vp": "m/s", "vs": "m/s"}
TIERS = (72, 238, 256)
VARIABLE_LENGTH = 40


class FormatError(ValueError):
    """Malformed input file, with the location of the problem."""

    def __init__(self, path, message, line=None, field=None):
        self.path = str(path)
        self.line = line
        self.field = field
        where = self.path
        if line is not None:
            where += f":{line}"
        if field is not None:
            where += f" [{field}]"
        super().__init__(f"{where}: {message}")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


# -- models -----------------------------------------------------------------

def model_to_json(model: LayeredEarthModel) -> dict:
    return {"format": MODEL_FORMAT, "units": dict(UNITS), **model.to_dict()}


def model_from_json(obj, path="<model>") -> LayeredEarthModel:
    if not isinstance(obj, dict):
        raise FormatError(path, "model must be a JSON object")
    fmt_tag = obj.get("format", MODEL_FORMAT)
    if fmt_tag != MODEL_FORMAT:
        raise FormatError(path, f"unsupported format {fmt_tag!r}", field="format")
    values = {}
    for name in ("thickness", "density", "vp", "vs"):
        if name not in obj:
            raise FormatError(path, "missing array", field=name)
        arr = obj[name]
        if not isinstance(arr, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                                for v in arr):
            raise FormatError(path, "expected an array of numbers", field=name)
        values[name] = arr
    n = obj.get("n_layers", len(values["thickness"]))
    if not isinstance(n, int) or isinstance(n, bool):
        raise FormatError(path, "expected an integer", field="n_layers")
    model = LayeredEarthModel(n, values["thickness"], values["density"], values["vp"], values["vs"])
    errors = validate_model(model)
    if errors:
        raise ModelValidationError([f"{path}: {e}" for e in errors])
    return model


def _load_json(path: PathLike):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(path, f"cannot read file: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(path, exc.msg, line=exc.lineno) from exc


def read_model(path: PathLike) -> LayeredEarthModel:
    return model_from_json(_load_json(path), path)


def write_model(path: PathLike, model: LayeredEarthModel) -> None:
    Path(path).write_text(json.dumps(model_to_json(model), indent=2) + "\n", encoding="utf-8")


# -- curves -----------------------------------------------------------------

def format_curve(curve: DispersionCurve, footer: str | None = None) -> str:
    lines = [CURVE_HEADER]
    lines += [f"{fmt(w)},{fmt(v)}" for w, v in zip(curve.wavelengths, curve.velocities)]
    if footer:
        lines.append(f"# {footer}")
    return "\n".join(lines) + "\n"


def write_curve(path: PathLike, curve: DispersionCurve, footer: str | None = None) -> None:
    Path(path).write_text(format_curve(curve, footer), encoding="utf-8")


def parse_curve(text: str, path="<curve>", require_velocities=True) -> DispersionCurve:
    wavelengths, velocities = [], []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            header_seen = True
            if line.replace(" ", "").lower().startswith("wavelength"):
                continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) not in (1, 2) or (require_velocities and len(cells) != 2):
            raise FormatError(path, f"expected 'wavelength,velocity', got {raw!r}", line=lineno)
        try:
            w = float(cells[0])
            v = float(cells[1]) if len(cells) == 2 else None
        except ValueError:
            raise FormatError(path, f"not a number in {raw!r}", line=lineno) from None
        wavelengths.append(w)
        if v is not None:
            velocities.append(v)
    if not wavelengths:
        raise FormatError(path, "empty curve (no data rows)")
    if velocities and len(velocities) != len(wavelengths):
        raise FormatError(path, "some rows lack a velocity")
    curve = DispersionCurve(wavelengths, velocities)
    errors = validate_curve(curve, require_velocities)
    if errors:
        raise ModelValidationError([f"{path}: {e}" for e in errors])
    return curve


def read_curve(path: PathLike, require_velocities=True) -> DispersionCurve:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(path, f"cannot read file: {exc.strerror or exc}") from exc
    return parse_curve(text, path, require_velocities)


# -- sweeps and inversion specs ---------------------------------------------

def sweep_from_json(obj, path="<spec>") -> VelocitySweep:
    try:
        return VelocitySweep(obj["v_min"], obj["v_max"], obj["v_step"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(path, f"sweep needs numeric v_min, v_max, v_step ({exc})", field="sweep") from None


@dataclass(frozen=True)
class EngineConfig:
    kind: str = "serial"
    workers: int = 1
    strategy: PartitionStrategy = PartitionStrategy.MODULAR
    block_size: int = 256

    def __post_init__(self):
        if self.kind not in ("serial", "parallel", "batched"):
            raise ValueError(f"unknown engine {self.kind!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")


@dataclass(frozen=True)
class InversionSpec:
    experimental_curve: Path
    sweep: VelocitySweep
    candidates: tuple[LayeredEarthModel, ...]
    engine: EngineConfig = field(default_factory=EngineConfig)


_PARAM = re.compile(r"^(thickness|density|vp|vs)\[(\d+)\]$")


def expand_grid(base: LayeredEarthModel, parameters: dict) -> list[LayeredEarthModel]:
    """Candidates for every combination of the swept parameters.

    ``parameters`` maps names like ``"vs[0]"`` to ``{"min", "max", "step"}``
    (or an explicit ``"values"`` list). Parameters are iterated in sorted
    name order, the last one varying fastest.
    """
    names = sorted(parameters)
    axes = []
    for name in names:
        m = _PARAM.match(name)
        if not m:
            raise ValueError(f"bad grid parameter {name!r}; expected e.g. 'vs[0]'")
        spec = parameters[name]
        if "values" in spec:
            vals = [float(v) for v in spec["values"]]
        else:
            lo, hi, step = float(spec["min"]), float(spec["max"]), float(spec["step"])
            if step <= 0 or hi < lo:
                raise ValueError(f"bad range for {name}: {spec}")
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            vals = [lo + i * step for i in range(count)]
        if not vals:
            raise ValueError(f"grid parameter {name} has no values")
        axes.append((m.group(1), int(m.group(2)), vals))
    out = []
    for combo in itertools.product(*(a[2] for a in axes)):
        fields = {k: list(getattr(base, k)) for k in ("thickness", "density", "vp", "vs")}
        for (key, idx, _), value in zip(axes, combo):
            if idx >= len(fields[key]):
                raise ValueError(f"{key}[{idx}] out of range for a {base.n_layers}-layer model")
            fields[key][idx] = value
        out.append(LayeredEarthModel(base.n_layers, **fields))
    return out


def read_inversion_spec(path: PathLike) -> InversionSpec:
    path = Path(path)
    obj = _load_json(path)
    if not isinstance(obj, dict):
        raise FormatError(path, "spec must be a JSON object")
    if "experimental_curve" not in obj:
        raise FormatError(path, "missing curve path", field="experimental_curve")
    curve_path = Path(obj["experimental_curve"])
    if not curve_path.is_absolute():
        curve_path = path.parent / curve_path
    sweep = sweep_from_json(obj.get("sweep", {}), path)

    if "candidates" in obj:
        if not isinstance(obj["candidates"], list):
            raise FormatError(path, "expected a list of models", field="candidates")
        candidates = [model_from_json(c, f"{path} candidate {i}") for i, c in enumerate(obj["candidates"])]
    elif "grid" in obj:
        grid = obj["grid"]
        if not isinstance(grid, dict) or "base" not in grid:
            raise FormatError(path, "grid needs a base model and parameters", field="grid")
        base = model_from_json(grid["base"], f"{path} grid base")
        try:
            candidates = expand_grid(base, grid.get("parameters", {}))
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(path, str(exc), field="grid") from None
        for i, c in enumerate(candidates):
            errors = validate_model(c)
            if errors:
                raise ModelValidationError([f"{path} grid candidate {i}: {e}" for e in errors])
    else:
        raise FormatError(path, "need 'candidates' or 'grid'")
    if not candidates:
        raise FormatError(path, "no candidate models")

    eng = obj.get("engine", {})
    try:
        engine = EngineConfig(
            kind=eng.get("kind", "serial"),
            workers=int(eng.get("workers", 1)),
            strategy=PartitionStrategy.parse(eng.get("strategy", "modular")),
            block_size=int(eng.get("block_size", 256)),
        )
    except (ValueError, TypeError, AttributeError) as exc:
        raise FormatError(path, str(exc), field="engine") from None
    return InversionSpec(curve_path, sweep, tuple(candidates), engine)


# -- bundled reference model and datasets -----------------------------------

@functools.lru_cache(maxsize=None)
def _reference_json() -> dict:
    with resources.files("masw").joinpath("data/reference_model.json").open("r", encoding="utf-8") as fh:
        return json.load(fh)


def reference_model() -> LayeredEarthModel:
    return model_from_json(_reference_json(), "reference_model.json")


def reference_sweep() -> VelocitySweep:
    return sweep_from_json(_reference_json()["sweep"])


def tier_wavelength(tier: int) -> float:
    """Wavelength whose reference-model phase velocity equals ``tier`` m/s."""
    table = _reference_json()["tier_wavelengths"]
    try:
        return float(table[str(int(tier))])
    except (KeyError, ValueError):
        raise ValueError(f"unknown tier {tier!r}; choose from {TIERS}") from None


def gen_uniform(length: int, tier: int = 238) -> DispersionCurve:
    """``length`` identical wavelengths, with the tier velocity as Ce."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    w = tier_wavelength(tier)
    return DispersionCurve([w] * length, [float(tier)] * length)


def variable_wavelengths(length: int = VARIABLE_LENGTH) -> np.ndarray:
    hi, lo = _reference_json()["variable_wavelength_range"]
    return np.geomspace(hi, lo, length) if length > 1 else np.array([hi])


def gen_variable(length: int = VARIABLE_LENGTH, sweep: VelocitySweep | None = None) -> DispersionCurve:
    """Decreasing wavelengths with the reference model's own velocities."""
    from .dispersion import theoretical_dispersion_curve

    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    ws = variable_wavelengths(length)
    return theoretical_dispersion_curve(reference_model(), ws, sweep or reference_sweep())


def find_tier_wavelength(tier: float, lo: float = 0.3, hi: float = 200.0,
                         iterations: int = 60) -> tuple[float, float]:
    """Wavelength interval on which the reference model's velocity equals ``tier``.

    Bisection on the (non-decreasing) phase velocity versus wavelength. Used
    to derive the bundled tier wavelengths.
    """
    from .dispersion import theoretical_dispersion_curve

    model, sweep = reference_model(), reference_sweep()

    def ct(w):
        return theoretical_dispersion_curve(model, [w], sweep).velocities[0]

    def bisect(pred):
        a, b = lo, hi
        for _ in range(iterations):
            mid = 0.5 * (a + b)
            if pred(ct(mid)):
                b = mid
            else:
                a = mid
        return b

    start = bisect(lambda v: v >= tier)
    end = bisect(lambda v: v > tier)
    return start, end
