"""
Experiment configuration: flat ``group.key = value`` text files.

Every key has a documented default (see :data:`DEFAULTS`); unknown keys and
malformed lines are rejected with the line number, and values that violate a
module invariant are rejected with the key path.

Boundary signals are Fourier series, written as two keys per signal::

    boundary.G2.mean  = 1.0
    boundary.G2.terms = 0.001 1 0.3; 0.0005 2 0

Each term is ``amplitude harmonic phase``.  With ``boundary.reference = steady``
(the default) the series are perturbations around the steady boundary
invariants, so ``boundary.G2.mean`` is M0; with ``reference = absolute`` they
are the absolute boundary values of the Riemann invariants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, DomainError
from .field_grid import PeriodicGrid
from .gas_model import PHI_KINDS, GasModel
from .periodic_builder import BoundarySpec, FourierSeries
from .steady_fanno import DampingProfile, InflowCondition, SteadyProfile, solve_fanno

# key -> (type, default).  Types: float, int, str, floats (list), series terms, optional float.
DEFAULTS = {
    "gas.gamma": ("float", 1.4),
    "gas.phi_kind": ("str", "exponential"),
    "gas.phi.scale": ("float", 1.0),
    "gas.phi.rate": ("float", 1.0),
    "gas.phi.value": ("float", 1.0),
    "damping.kind": ("str", "constant"),
    "damping.coeffs": ("floats", (-0.2,)),
    "damping.alpha_star": ("optfloat", None),
    "inflow.u_minus": ("float", 0.2),
    "inflow.c_minus": ("float", 1.0),
    "inflow.S_minus": ("float", 0.0),
    "duct.L": ("float", 1.0),
    "duct.n_x": ("int", 512),
    "time.P": ("float", 4.0),
    "time.n_t": ("int", 256),
    "time.cfl": ("float", 0.9),
    "boundary.reference": ("str", "steady"),
    "boundary.K1": ("float", 0.7),
    "boundary.K2": ("float", 0.1),
    "boundary.K3": ("float", 0.7),
    "boundary.G1.mean": ("float", 0.0),
    "boundary.G1.terms": ("terms", ((1e-3, 1, 0.0),)),
    "boundary.G2.mean": ("float", 1.0),
    "boundary.G2.terms": ("terms", ((1e-3, 1, 0.3),)),
    "boundary.G3.mean": ("float", 0.0),
    "boundary.G3.terms": ("terms", ((1e-3, 1, 0.7),)),
    "builder.tol_iter": ("float", 1e-10),
    "builder.max_iter": ("int", 200),
    "builder.entropy_gradient": ("str", "central"),
    "harness.windows": ("int", 10),
    "harness.bump_amplitude": ("float", 0.01),
    "harness.bump_support": ("floats", (0.1, 0.9)),
    "harness.bump_components": ("ints", (1, 2, 3)),
    "harness.slices_per_window": ("int", 40),
    "harness.n_paths": ("int", 100),
    "seed": ("int", 0),
}


def fmt_float(v):
    """17 significant digits: round-trips every double."""
    if v is None:
        return "none"
    return format(float(v), ".17g")


def _parse_value(kind, raw, key, line):
    raw = raw.strip()
    try:
        if kind == "float":
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError("not finite")
            return v
        if kind == "optfloat":
            return None if raw.lower() in ("", "none") else float(raw)
        if kind == "int":
            return int(raw)
        if kind == "str":
            return raw
        if kind == "floats":
            return tuple(float(p) for p in raw.replace(",", " ").split())
        if kind == "ints":
            return tuple(int(p) for p in raw.replace(",", " ").split())
        if kind == "terms":
            out = []
            for chunk in raw.split(";"):
                if not chunk.strip():
                    continue
                a, k, th = chunk.split()
                out.append((float(a), int(k), float(th)))
            return tuple(out)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {raw!r} as {kind}: {exc}", key=key, line=line) from None
    raise AssertionError(kind)


def _format_value(kind, v):
    if kind in ("float", "optfloat"):
        return fmt_float(v)
    if kind in ("int", "str"):
        return str(v)
    if kind == "floats":
        return " ".join(fmt_float(a) for a in v)
    if kind == "ints":
        return " ".join(str(a) for a in v)
    if kind == "terms":
        return "; ".join(f"{fmt_float(a)} {k} {fmt_float(th)}" for a, k, th in v)
    raise AssertionError(kind)


def _attr(key):
    return key.replace(".", "_")


@dataclass(frozen=True)
class SimConfig:
    """Fully resolved experiment configuration, indexed by dotted key."""

    values: tuple  # sorted ((key, value), ...) so instances compare and hash by content

    def __getitem__(self, key):
        return dict(self.values)[key]

    def get(self, key):
        return self[key]

    def as_dict(self):
        return dict(self.values)

    def replace(self, **changes):
        """Copy with keys replaced; keyword names use ``_`` for ``.``, e.g. ``time_P=2.0``."""
        by_attr = {_attr(k): k for k in DEFAULTS}
        d = self.as_dict()
        for name, v in changes.items():
            if name not in by_attr:
                raise ConfigError("unknown key", key=name)
            d[by_attr[name]] = v
        return make_config(d)

    def to_text(self):
        lines = [f"{k} = {_format_value(DEFAULTS[k][0], v)}" for k, v in self.values]
        return "\n".join(lines) + "\n"

    def echo(self):
        """String form of every key, as emitted in reports."""
        return {k: _format_value(DEFAULTS[k][0], v) for k, v in self.values}

    # -- domain objects -------------------------------------------------

    def gas(self) -> GasModel:
        kind = self["gas.phi_kind"]
        if kind == "exponential":
            params = {"scale": self["gas.phi.scale"], "rate": self["gas.phi.rate"]}
        else:
            params = {"value": self["gas.phi.value"]}
        return GasModel(self["gas.gamma"], kind, params)

    def damping(self) -> DampingProfile:
        return DampingProfile(tuple(self["damping.coeffs"]), self["damping.alpha_star"]).certify(self["duct.L"])

    def inflow(self) -> InflowCondition:
        return InflowCondition(self["inflow.u_minus"], self["inflow.c_minus"], self["inflow.S_minus"])

    def grid(self, refine=1) -> PeriodicGrid:
        g = PeriodicGrid(self["time.P"], self["time.n_t"], self["duct.L"], self["duct.n_x"])
        return g if refine == 1 else g.refine(refine)

    def profile(self, refine=1) -> SteadyProfile:
        n_x = self.grid(refine).n_x
        return solve_fanno(self.gas(), self.damping(), self.inflow(), self["duct.L"], n_x=n_x)

    def series(self):
        return tuple(FourierSeries(self[f"boundary.G{i}.mean"], tuple(self[f"boundary.G{i}.terms"]))
                     for i in (1, 2, 3))

    def boundary(self, profile: SteadyProfile, P=None) -> BoundarySpec:
        P = self["time.P"] if P is None else P
        s1, s2, s3 = self.series()
        K = (self["boundary.K1"], self["boundary.K2"], self["boundary.K3"])
        if self["boundary.reference"] == "steady":
            return BoundarySpec.from_perturbation(profile, P, s1, s2, s3, *K)
        return BoundarySpec(P, s1, s2, s3, *K)


def _check(cond, key, msg):
    if not cond:
        raise ConfigError(msg, key=key)


def _validate(d):
    g = d["gas.gamma"]
    _check(1.0 < g < 3.0, "gas.gamma", f"gamma={g} violates 1<γ<3")
    _check(d["gas.phi_kind"] in PHI_KINDS, "gas.phi_kind", f"must be one of {PHI_KINDS}")
    if d["gas.phi_kind"] == "exponential":
        _check(d["gas.phi.scale"] > 0, "gas.phi.scale", "phi must be positive (scale > 0)")
    else:
        _check(d["gas.phi.value"] > 0, "gas.phi.value", "phi must be positive")
    _check(d["damping.kind"] in ("constant", "polynomial"), "damping.kind", "must be constant or polynomial")
    coeffs = d["damping.coeffs"]
    _check(len(coeffs) >= 1, "damping.coeffs", "needs at least one coefficient")
    if d["damping.kind"] == "constant":
        _check(len(coeffs) == 1, "damping.coeffs", "constant damping takes exactly one coefficient")
    _check(d["inflow.c_minus"] > 0, "inflow.c_minus", "must be positive")
    _check(0.0 < d["inflow.u_minus"] < d["inflow.c_minus"], "inflow.u_minus",
           "inflow must be subsonic: 0 < u_minus < c_minus")
    _check(d["duct.L"] > 0, "duct.L", "must be positive")
    _check(d["duct.n_x"] >= 8, "duct.n_x", "must be at least 8")
    _check(d["time.P"] > 0, "time.P", "must be positive")
    _check(d["time.n_t"] >= 8, "time.n_t", "must be at least 8")
    _check(0.0 < d["time.cfl"] <= 0.9, "time.cfl", "CFL number must lie in (0, 0.9]")
    _check(d["boundary.reference"] in ("steady", "absolute"), "boundary.reference", "must be steady or absolute")
    K1, K3 = d["boundary.K1"], d["boundary.K3"]
    _check(abs(K1) <= 1.0, "boundary.K1", "violates |K1|<=1")
    _check(abs(K3) <= 1.0, "boundary.K3", "violates |K3|<=1")
    _check(abs(K1 * K3) < 1.0, "boundary.K1", f"|K1*K3|={abs(K1 * K3)} violates |K1K3|<1")
    for i in (1, 2, 3):
        for a, k, _ in d[f"boundary.G{i}.terms"]:
            _check(k >= 1, f"boundary.G{i}.terms", "harmonics must be positive integers")
    _check(d["builder.tol_iter"] > 0, "builder.tol_iter", "must be positive")
    _check(d["builder.max_iter"] >= 1, "builder.max_iter", "must be at least 1")
    _check(d["builder.entropy_gradient"] in ("central", "characteristic"), "builder.entropy_gradient",
           "must be central or characteristic")
    _check(d["harness.windows"] >= 5, "harness.windows", "need at least 5 windows")
    sup = d["harness.bump_support"]
    _check(len(sup) == 2 and 0.1 <= sup[0] < sup[1] <= 0.9, "harness.bump_support",
           "support must be two fractions inside [0.1, 0.9]")
    _check(set(d["harness.bump_components"]) <= {1, 2, 3} and d["harness.bump_components"],
           "harness.bump_components", "components must be among 1, 2, 3")
    _check(d["harness.slices_per_window"] >= 32, "harness.slices_per_window", "need at least 32 slices per window")
    _check(d["harness.n_paths"] >= 1, "harness.n_paths", "must be positive")


def make_config(values: dict) -> SimConfig:
    """Defaults merged with ``values`` (typed), validated."""
    d = {k: v for k, (_, v) in DEFAULTS.items()}
    for k, v in values.items():
        if k not in DEFAULTS:
            raise ConfigError("unknown key", key=k)
        d[k] = v
    _validate(d)
    cfg = SimConfig(tuple(sorted(d.items())))
    # constructors own the remaining invariants; surface them with a key path
    for key, build in (("gas", cfg.gas), ("damping", cfg.damping), ("inflow", cfg.inflow)):
        try:
            build()
        except DomainError as exc:
            raise ConfigError(str(exc), key=key) from None
    return cfg


def loads(text: str) -> SimConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in values:
            raise ConfigError("duplicate key", key=key, line=lineno)
        values[key] = _parse_value(DEFAULTS[key][0], value, key, lineno)
    return make_config(values)


def load_config(path) -> SimConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return loads(text)


def default_config() -> SimConfig:
    return make_config({})
