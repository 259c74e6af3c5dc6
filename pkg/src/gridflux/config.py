"""Run configuration: strict JSON in, validated scenario objects out.

A config names a scenario and overrides any of its defaults. Unknown keys,
wrong types and non-finite numbers are rejected with the dotted key path.
The fully resolved config (defaults filled in) is plain JSON and loads
back to the identical scenario.
"""

from dataclasses import fields, is_dataclass
import copy
import json
import math
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, ValidationError

from .components import DisturbanceSignal, GtgParams, RlcParams
from .control import ControllerConfig, EnergyGains, PdGains, PiGains
from .errors import ConfigError, InvalidParams
from .sim import SCENARIOS, Scenario, TwoAreaParams, default_scenario


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True)


class _Rlc(_Strict):
    R: Optional[float] = None
    L: Optional[float] = None
    C: Optional[float] = None
    u_max: Optional[float] = None
    v_floor: Optional[float] = None


class _Pi(_Strict):
    kp_v: Optional[float] = None
    ki_v: Optional[float] = None
    kp_i: Optional[float] = None
    ki_i: Optional[float] = None


class _Pd(_Strict):
    kp: Optional[float] = None
    kd: Optional[float] = None
    tf: Optional[float] = None


class _Energy(_Strict):
    k_E: Optional[float] = None
    k_p: Optional[float] = None
    i_floor: Optional[float] = None
    min_separation: Optional[float] = None


class _Controller(_Strict):
    kind: Optional[str] = None
    v_ref: Optional[float] = None
    pi: Optional[_Pi] = None
    pd: Optional[_Pd] = None
    energy: Optional[_Energy] = None


class _Disturbance(_Strict):
    kind: Optional[str] = None
    magnitude: Optional[float] = None
    start: Optional[float] = None
    duration: Optional[float] = None
    base: Optional[float] = None
    seed: Optional[int] = None
    bandwidth: Optional[float] = None
    period: Optional[float] = None


class _Unit(_Strict):
    M: Optional[float] = None
    damping: Optional[float] = None
    Tt: Optional[float] = None
    Kt: Optional[float] = None
    Tg: Optional[float] = None
    r: Optional[float] = None
    omega0: Optional[float] = None
    droop: Optional[float] = None


class _TwoArea(_Strict):
    unit: Optional[_Unit] = None
    b_internal: Optional[float] = None
    b_tie: Optional[float] = None
    step_area: Optional[int] = None
    step_size: Optional[float] = None
    step_time: Optional[float] = None
    solar_sigma: Optional[float] = None
    solar_bandwidth: Optional[float] = None
    solar_period: Optional[float] = None
    agc: Optional[bool] = None
    k_I: Optional[float] = None
    eps: Optional[float] = None
    agc_period: Optional[float] = None
    susceptances: Optional[List[float]] = None


class _Subsystem(_Strict):
    name: str = ""
    A: List[List[float]]
    G: Optional[List[List[float]]] = None


class _Coupling(_Strict):
    to: int
    source: int
    A: List[List[float]]


class _Stability(_Strict):
    subsystems: List[_Subsystem]
    couplings: List[_Coupling] = []


class _Root(_Strict):
    scenario: str
    dt: Optional[float] = None
    tf: Optional[float] = None
    seed: Optional[int] = None
    hold: Optional[float] = None
    stats_from: Optional[float] = None
    rlc: Optional[_Rlc] = None
    controller: Optional[_Controller] = None
    controllers: Optional[List[_Controller]] = None
    disturbance: Optional[_Disturbance] = None
    two_area: Optional[_TwoArea] = None
    stability: Optional[_Stability] = None


def _reject_constant(name):
    raise ConfigError(f"non-finite number {name} is not allowed")


def parse_json(text, source="<config>"):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def set_path(cfg: dict, dotted: str, raw: str):
    """Apply a ``key.sub=value`` override; ``value`` is parsed as JSON if it can be."""
    try:
        value = json.loads(raw, parse_constant=_reject_constant)
    except (json.JSONDecodeError, ConfigError):
        value = raw
    keys = dotted.split(".")
    node = cfg
    for k in keys[:-1]:
        if not isinstance(node.setdefault(k, {}), dict):
            raise ConfigError(f"{dotted}: {k} is not an object")
        node = node[k]
    node[keys[-1]] = value


def _as_plain(obj):
    if is_dataclass(obj):
        return {f.name: _as_plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, tuple):
        return [_as_plain(x) for x in obj]
    return obj


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _drop_none(d):
    if isinstance(d, dict):
        return {k: _drop_none(v) for k, v in d.items() if v is not None}
    if isinstance(d, list):
        return [_drop_none(x) for x in d]
    return d


def _check_finite(node, path=""):
    if isinstance(node, float) and not math.isfinite(node):
        raise ConfigError(f"{path}: non-finite value")
    if isinstance(node, dict):
        for k, v in node.items():
            _check_finite(v, f"{path}.{k}" if path else k)
    if isinstance(node, list):
        for i, v in enumerate(node):
            _check_finite(v, f"{path}[{i}]")


def _validate(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    _check_finite(cfg)
    try:
        model = _Root.model_validate(cfg)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = ".".join(str(x) for x in err["loc"])
        raise ConfigError(f"{loc}: {err['msg']}") from None
    if model.scenario not in SCENARIOS:
        raise ConfigError(f"scenario: unknown scenario {model.scenario!r}; expected one of {', '.join(SCENARIOS)}")
    return _drop_none(model.model_dump())


def _section(label, build, *args, **kwargs):
    try:
        return build(*args, **kwargs)
    except (InvalidParams, TypeError) as exc:
        msg = str(exc)
        key = msg.split(" ", 1)[0]
        if key.isidentifier():
            raise ConfigError(f"{label}.{key}: {msg.split(' ', 1)[1]}") from None
        raise ConfigError(f"{label}: {msg}") from None


def _controller(d, label="controller"):
    return _section(
        label, ControllerConfig, kind=d["kind"], v_ref=d["v_ref"],
        pi=_section(f"{label}.pi", PiGains, **d["pi"]),
        pd=_section(f"{label}.pd", PdGains, **d["pd"]),
        energy=_section(f"{label}.energy", EnergyGains, **d["energy"]),
    )


def resolve(cfg: dict, seed=None) -> dict:
    """Validated config with every default filled in."""
    user = _validate(cfg)
    base = _as_plain(default_scenario(user["scenario"]))
    base["scenario"] = base.pop("name")
    resolved = _merge(base, {k: v for k, v in user.items() if k not in ("controllers", "stability")})
    if seed is not None:
        resolved["seed"] = int(seed)
    resolved["disturbance"]["seed"] = resolved["seed"]
    if "controllers" in user:
        resolved["controllers"] = [_merge(base["controller"], c) for c in user["controllers"]]
    if "stability" in user:
        resolved["stability"] = user["stability"]
    return resolved


def build_scenario(resolved: dict, controller: Optional[dict] = None, label="controller") -> Scenario:
    """Scenario from a resolved config (optionally with another controller)."""
    r = resolved
    ta = dict(r["two_area"])
    ta["unit"] = _section("two_area.unit", GtgParams, **ta["unit"])
    ta["susceptances"] = tuple(ta["susceptances"])
    return _section(
        "scenario", Scenario,
        name=r["scenario"], dt=r["dt"], tf=r["tf"], seed=r["seed"],
        rlc=_section("rlc", RlcParams, **r["rlc"]),
        controller=_controller(controller or r["controller"], label),
        disturbance=_section("disturbance", DisturbanceSignal, **r["disturbance"]),
        two_area=_section("two_area", TwoAreaParams, **ta), hold=r["hold"], stats_from=r["stats_from"],
    )


def load_config(path, overrides=(), seed=None) -> dict:
    """Read, override and resolve a config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    cfg = parse_json(text, str(path))
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        set_path(cfg, k.strip(), v.strip())
    return resolve(cfg, seed)


def stability_inputs(resolved: dict):
    """``(subsystems, couplings)`` from an explicit stability section."""
    from .stability import SubsystemSpec

    sec = resolved["stability"]
    try:
        subs = [SubsystemSpec(s["A"], s.get("G"), s.get("name", "")) for s in sec["subsystems"]]
    except ValueError as exc:
        raise ConfigError(f"stability.subsystems: {exc}") from None
    cpl = {}
    for c in sec.get("couplings", []):
        i, j = c["to"], c["source"]
        if not (0 <= i < len(subs) and 0 <= j < len(subs)):
            raise ConfigError(f"stability.couplings: index out of range ({i}, {j})")
        cpl[(i, j)] = c["A"]
    return subs, cpl


__all__ = ["load_config", "resolve", "build_scenario", "parse_json", "set_path", "stability_inputs"]
