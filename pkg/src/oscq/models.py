"""The oscillator zoo: ring, negative-resistance LC, spin-torque (LLG), and
a conservative mass-action chemical oscillator.

Every builder returns an immutable :class:`~oscq.dae.DaeSystem` with
analytic Jacobians, and the registry attaches per-model seed states,
period hints, Jacobian sampling boxes, and analytic oracles where they
exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .dae import DaeSystem, ParameterSet
from .errors import ModelDomainError, ModelParameterError

GOLDEN_RATIO = (math.sqrt(5.0) + 1.0) / 2.0


def _tanh(u):
    return np.tanh(u)


def _sech2(u):
    # 1/cosh(u)^2 without overflow: cosh(500) is already far beyond any
    # double's reciprocal square.
    u = np.clip(u, -500.0, 500.0)
    c = np.cosh(u)
    return (1.0 / c) ** 2


@dataclass(frozen=True)
class ModelSpec:
    """Registry entry: builder plus analysis defaults for one model."""

    name: str
    description: str
    builder: Callable[[ParameterSet], DaeSystem]
    defaults: ParameterSet
    seed_state: np.ndarray
    period_hint: Callable[[ParameterSet], float]
    oracle: dict = field(default_factory=dict)
    validate_x0: Optional[Callable[[np.ndarray], None]] = None

    def build(self, overrides: dict[str, float] | None = None) -> DaeSystem:
        params = self.defaults.with_overrides(overrides or {})
        return self.builder(params)

    def hint(self, params: ParameterSet) -> float:
        return float(self.period_hint(params))


# ---------------------------------------------------------------------------
# Three-stage ring oscillator
# ---------------------------------------------------------------------------

def build_ring(tau: float = 1.0, s: float = 100.0) -> DaeSystem:
    """Three-stage inverter ring: tau*vdot_i = f(v_prev) - v_i.

    The comparator inverter is smoothed to f(v) = -tanh(s*v); the ideal
    s -> infinity limit has the closed-form period 6*tau*ln(phi), swing
    phi - 1 and multipliers {1, phi^-6, phi^-12} with phi the golden
    ratio, which serve as oracles for the smoothed model.
    """
    if tau <= 0 or s <= 0:
        raise ModelParameterError("ring: tau and s must be positive")
    params = ParameterSet({"tau": float(tau), "s": float(s)})
    tau = float(tau)
    s = float(s)
    C = np.eye(3) * tau

    def q_eval(x):
        return tau * x

    def f_eval(x):
        return np.array([
            x[0] + _tanh(s * x[2]),
            x[1] + _tanh(s * x[0]),
            x[2] + _tanh(s * x[1]),
        ])

    def jq_eval(x):
        return C

    def jf_eval(x):
        d = s * _sech2(s * x)
        return np.array([
            [1.0, 0.0, d[2]],
            [d[0], 1.0, 0.0],
            [0.0, d[1], 1.0],
        ])

    return DaeSystem(
        name="ring",
        n=3,
        q_eval=q_eval,
        f_eval=f_eval,
        jq_eval=jq_eval,
        jf_eval=jf_eval,
        params=params,
        state_names=("v1", "v2", "v3"),
        sampling_box=((-1.0, 1.0),) * 3,
    )


def _ring_spec() -> ModelSpec:
    phi = GOLDEN_RATIO
    return ModelSpec(
        name="ring",
        description="3-stage tanh-inverter ring oscillator",
        builder=lambda p: build_ring(tau=p["tau"], s=p["s"]),
        defaults=ParameterSet({"tau": 1.0, "s": 100.0}),
        seed_state=np.array([0.2, -0.1, 0.05]),
        period_hint=lambda p: 6.0 * p["tau"] * math.log(phi),
        oracle={
            "period": 6.0 * math.log(phi),
            "multipliers": (1.0, phi ** -6, phi ** -12),
            "swing": phi - 1.0,
        },
    )


# ---------------------------------------------------------------------------
# Negative-resistance LC oscillator
# ---------------------------------------------------------------------------

def build_lc(
    L: float = 0.5e-9,
    C_cap: float = 0.5e-9,
    K: float = 1.0,
    a: float = 1.01,
) -> DaeSystem:
    """Parallel LC tank with the nonlinear conductor i = K*(v - tanh(a*v)).

    C_cap*vdot = -i_L - K*(v - tanh(a*v)),  L*didot = v.  The conductor
    combines the positive resistor and the negative-resistance element
    into one node current; for a > 1 its small-signal conductance
    K*(1 - a) is negative, sustaining oscillation.
    """
    if min(L, C_cap, a) <= 0 or K < 0:
        raise ModelParameterError("lc: L, C_cap, a must be positive and K nonnegative")
    params = ParameterSet({"L": float(L), "C": float(C_cap), "K": float(K), "a": float(a)})
    L, C_cap, K, a = (float(v) for v in (L, C_cap, K, a))
    Cmat = np.diag([C_cap, L])

    def q_eval(x):
        return np.array([C_cap * x[0], L * x[1]])

    def f_eval(x):
        v, i = x
        return np.array([i + K * (v - _tanh(a * v)), -v])

    def jq_eval(x):
        return Cmat

    def jf_eval(x):
        v = x[0]
        return np.array([
            [K * (1.0 - a * _sech2(a * v)), 1.0],
            [-1.0, 0.0],
        ])

    return DaeSystem(
        name="lc",
        n=2,
        q_eval=q_eval,
        f_eval=f_eval,
        jq_eval=jq_eval,
        jf_eval=jf_eval,
        params=params,
        state_names=("v", "i_L"),
        sampling_box=((-1.5, 1.5), (-1.5, 1.5)),
    )


def _lc_spec() -> ModelSpec:
    return ModelSpec(
        name="lc",
        description="negative-resistance LC oscillator",
        builder=lambda p: build_lc(L=p["L"], C_cap=p["C"], K=p["K"], a=p["a"]),
        defaults=ParameterSet({"L": 0.5e-9, "C": 0.5e-9, "K": 1.0, "a": 1.01}),
        seed_state=np.array([0.5, 0.0]),
        period_hint=lambda p: 2.0 * math.pi * math.sqrt(p["L"] * p["C"]),
        oracle={"linear_period": 2.0 * math.pi * math.sqrt(0.25e-18)},
    )


# ---------------------------------------------------------------------------
# Spin-torque nano-oscillator (LLG equation)
# ---------------------------------------------------------------------------

STNO_DEFAULTS = {
    "tau": 1e-9,
    "alpha": 0.02,
    "kx": -10.0,
    "ky": 0.0,
    "kz": 1.0,
    "is_x": 0.0,
    "is_y": 0.0,
    "is_z": -0.6,
    "hx": 0.0,
    "hy": 0.0,
    "hz": 2.0,
}

# Spherical chart used by the 2-state form: polar angle from +z, azimuth
# measured from the -x direction, where the default orbit stays far from
# both poles and clear of the atan2 branch cut.
#   M(theta, phi) = (-sin(theta)cos(phi), sin(theta)sin(phi), cos(theta))
POLE_TOL = 1e-8


def _sph_to_cart(theta: float, phi: float) -> np.ndarray:
    st, ct = math.sin(theta), math.cos(theta)
    return np.array([-st * math.cos(phi), st * math.sin(phi), ct])


def _stno_field(params: ParameterSet):
    """Cartesian torque field w(M) = tau*dM/dt and its Jacobian.

    w = -M x h - alpha*M x (M x h) - M x (M x i_s),  h = k o M + h_ext.
    The spin-transfer vector i_s enters in effective-field units (the
    current-to-field conversion of the source device is absorbed into
    its value), which is the standard damping-independent torque form.
    Spelled out in scalars: this sits in the innermost Newton loop.
    """
    alpha = params["alpha"]
    kx, ky, kz = params["kx"], params["ky"], params["kz"]
    hex_, hey, hez = params["hx"], params["hy"], params["hz"]
    ix, iy, iz = params["is_x"], params["is_y"], params["is_z"]

    def w_eval(M):
        mx, my, mz = M
        hx = kx * mx + hex_
        hy = ky * my + hey
        hz = kz * mz + hez
        # p = M x h, d = M x p, t = M x i_s, s = M x t
        px = my * hz - mz * hy
        py = mz * hx - mx * hz
        pz = mx * hy - my * hx
        dx = my * pz - mz * py
        dy = mz * px - mx * pz
        dz = mx * py - my * px
        tx = my * iz - mz * iy
        ty = mz * ix - mx * iz
        tz = mx * iy - my * ix
        sx = my * tz - mz * ty
        sy = mz * tx - mx * tz
        sz = mx * ty - my * tx
        return np.array([
            -px - alpha * dx - sx,
            -py - alpha * dy - sy,
            -pz - alpha * dz - sz,
        ])

    def jw_eval(M):
        mx, my, mz = M
        hx = kx * mx + hex_
        hy = ky * my + hey
        hz = kz * mz + hez
        mh = mx * hx + my * hy + mz * hz
        mi = mx * ix + my * iy + mz * iz
        m2 = mx * mx + my * my + mz * mz
        # dP = d(M x h)/dM = -[h]_x + [M]_x diag(k)
        dp00, dp01, dp02 = 0.0, hz - mz * ky, my * kz - hy
        dp10, dp11, dp12 = mz * kx - hz, 0.0, hx - mx * kz
        dp20, dp21, dp22 = hy - my * kx, mx * ky - hx, 0.0
        # dD[i][j] = (M.h) dij + M_i h_j + M_i M_j k_j - |M|^2 k_j dij - 2 h_i M_j
        dd00 = mh + mx * hx + mx * mx * kx - m2 * kx - 2 * hx * mx
        dd01 = mx * hy + mx * my * ky - 2 * hx * my
        dd02 = mx * hz + mx * mz * kz - 2 * hx * mz
        dd10 = my * hx + my * mx * kx - 2 * hy * mx
        dd11 = mh + my * hy + my * my * ky - m2 * ky - 2 * hy * my
        dd12 = my * hz + my * mz * kz - 2 * hy * mz
        dd20 = mz * hx + mz * mx * kx - 2 * hz * mx
        dd21 = mz * hy + mz * my * ky - 2 * hz * my
        dd22 = mh + mz * hz + mz * mz * kz - m2 * kz - 2 * hz * mz
        # dS[i][j] = (M.i_s) dij + M_i i_j - 2 i_i M_j
        ds00 = mi + mx * ix - 2 * ix * mx
        ds01 = mx * iy - 2 * ix * my
        ds02 = mx * iz - 2 * ix * mz
        ds10 = my * ix - 2 * iy * mx
        ds11 = mi + my * iy - 2 * iy * my
        ds12 = my * iz - 2 * iy * mz
        ds20 = mz * ix - 2 * iz * mx
        ds21 = mz * iy - 2 * iz * my
        ds22 = mi + mz * iz - 2 * iz * mz
        a = alpha
        return np.array([
            [-dp00 - a * dd00 - ds00, -dp01 - a * dd01 - ds01, -dp02 - a * dd02 - ds02],
            [-dp10 - a * dd10 - ds10, -dp11 - a * dd11 - ds11, -dp12 - a * dd12 - ds12],
            [-dp20 - a * dd20 - ds20, -dp21 - a * dd21 - ds21, -dp22 - a * dd22 - ds22],
        ])

    return w_eval, jw_eval


def build_stno(form: str = "spherical", **overrides) -> DaeSystem:
    """Macrospin LLG oscillator, 3-state Cartesian or 2-state spherical.

    The Cartesian form conserves |M| exactly (all torque terms are
    perpendicular to M), which pins a second unit multiplier beyond the
    phase mode; the spherical form works inside the sphere and exposes
    the transverse amplitude multiplier directly.
    """
    params = ParameterSet(dict(STNO_DEFAULTS)).with_overrides(overrides)
    if params["tau"] <= 0:
        raise ModelParameterError("stno: tau must be positive")
    tau = params["tau"]
    w_eval, jw_eval = _stno_field(params)

    if form == "cartesian":
        C = np.eye(3) * tau

        def q_eval(M):
            return tau * M

        def f_eval(M):
            return -w_eval(M)

        def jq_eval(M):
            return C

        def jf_eval(M):
            return -jw_eval(M)

        return DaeSystem(
            name="stno-cartesian",
            n=3,
            q_eval=q_eval,
            f_eval=f_eval,
            jq_eval=jq_eval,
            jf_eval=jf_eval,
            params=params,
            state_names=("mx", "my", "mz"),
            sampling_box=((-1.0, 1.0),) * 3,
        )

    if form != "spherical":
        raise ModelParameterError(f"stno: unknown form {form!r}")

    C2 = np.eye(2) * tau

    def _frame(x):
        th, ph = x
        st, ct = math.sin(th), math.cos(th)
        if abs(st) < POLE_TOL:
            raise ModelDomainError(
                "stno-spherical: state at a coordinate pole (sin(theta) ~ 0)",
                state=np.asarray(x, float),
            )
        sp, cp = math.sin(ph), math.cos(ph)
        M = np.array([-st * cp, st * sp, ct])
        eth = np.array([-ct * cp, ct * sp, -st])
        eph = np.array([sp, cp, 0.0])
        return M, eth, eph, st, ct

    def q_eval(x):
        return tau * np.asarray(x, float)

    def f_eval(x):
        M, eth, eph, st, ct = _frame(x)
        w = w_eval(M)
        return -np.array([w @ eth, (w @ eph) / st])

    def jq_eval(x):
        return C2

    def jf_eval(x):
        M, eth, eph, st, ct = _frame(x)
        w = w_eval(M)
        Jw = jw_eval(M)
        g11 = eth @ Jw @ eth - w @ M
        g12 = st * (eth @ Jw @ eph) + ct * (w @ eph)
        g21 = (eph @ Jw @ eth) / st - ct * (w @ eph) / st ** 2
        g22 = eph @ Jw @ eph - w @ M - (ct / st) * (w @ eth)
        return -np.array([[g11, g12], [g21, g22]])

    return DaeSystem(
        name="stno-spherical",
        n=2,
        q_eval=q_eval,
        f_eval=f_eval,
        jq_eval=jq_eval,
        jf_eval=jf_eval,
        params=params,
        state_names=("theta", "phi"),
        sampling_box=((0.4, 2.7), (-1.2, 1.2)),
    )


_STNO_SEED_ANGLES = (1.23, 0.49)


def _stno_cart_spec() -> ModelSpec:
    return ModelSpec(
        name="stno-cartesian",
        description="LLG spin-torque oscillator, 3-state magnetization vector",
        builder=lambda p: build_stno("cartesian", **dict(p.items())),
        defaults=ParameterSet(dict(STNO_DEFAULTS)),
        seed_state=_sph_to_cart(*_STNO_SEED_ANGLES),
        period_hint=lambda p: 0.88 * p["tau"],
        oracle={"conserved": "|M|"},
    )


def _stno_sph_spec() -> ModelSpec:
    return ModelSpec(
        name="stno-spherical",
        description="LLG spin-torque oscillator, 2-state (theta, phi) on |M| = 1",
        builder=lambda p: build_stno("spherical", **dict(p.items())),
        defaults=ParameterSet(dict(STNO_DEFAULTS)),
        seed_state=np.array(_STNO_SEED_ANGLES),
        period_hint=lambda p: 0.88 * p["tau"],
    )


# ---------------------------------------------------------------------------
# Conservative chemical oscillator (cyclic mass action)
# ---------------------------------------------------------------------------

def build_chemical(k: float = 1.0) -> DaeSystem:
    """Cyclic mass-action system A+B -> 2B, B+C -> 2C, C+A -> 2A.

    Rate equations: adot = k(ca - ab), bdot = k(ab - bc),
    cdot = k(bc - ca).  Total concentration a+b+c is conserved (the rate
    terms cancel pairwise), so the orbit family is continuous and the
    monodromy carries more than one unit multiplier.
    """
    if k <= 0:
        raise ModelParameterError("chemical: k must be positive")
    params = ParameterSet({"k": float(k)})
    k = float(k)
    I3 = np.eye(3)

    def q_eval(x):
        return np.asarray(x, float)

    def f_eval(x):
        a, b, c = x
        return -k * np.array([c * a - a * b, a * b - b * c, b * c - c * a])

    def jq_eval(x):
        return I3

    def jf_eval(x):
        a, b, c = x
        return -k * np.array([
            [c - b, -a, a],
            [b, a - c, -b],
            [-c, c, b - a],
        ])

    return DaeSystem(
        name="chemical",
        n=3,
        q_eval=q_eval,
        f_eval=f_eval,
        jq_eval=jq_eval,
        jf_eval=jf_eval,
        params=params,
        state_names=("a", "b", "c"),
        sampling_box=((0.05, 1.2),) * 3,
    )


def _chemical_validate_x0(x0: np.ndarray) -> None:
    if np.any(np.asarray(x0) < 0):
        raise ModelParameterError("chemical: concentrations must be nonnegative")


def _chemical_spec() -> ModelSpec:
    return ModelSpec(
        name="chemical",
        description="conservative cyclic mass-action oscillator",
        builder=lambda p: build_chemical(k=p["k"]),
        defaults=ParameterSet({"k": 1.0}),
        seed_state=np.array([1.0, 0.3, 0.2]),
        period_hint=lambda p: 8.5 / p["k"],
        oracle={"conserved": "a+b+c"},
        validate_x0=_chemical_validate_x0,
    )


REGISTRY: dict[str, ModelSpec] = {
    spec.name: spec
    for spec in (
        _ring_spec(),
        _lc_spec(),
        _stno_cart_spec(),
        _stno_sph_spec(),
        _chemical_spec(),
    )
}


def get_model(name: str) -> ModelSpec:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ModelParameterError(
            f"unknown model {name!r} (available: {', '.join(REGISTRY)})"
        ) from None
