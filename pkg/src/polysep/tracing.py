"""Numerical tracing of separatrices and assembly of the separatrix graph.

The field z' = P(z) is integrated in the bounded-speed regularization
z' = P/(1 + |P|^2), with true time accumulated as a quadrature variable
(dt = ds / (1 + |P|^2)).  Homoclinic trajectories, which take finite true
time, become infinite in the regularized parameter but are cut off at the
far-field circle |z| = R_inf; the missing tails are added back from the
asymptotic series of the rectifying coordinate (see farfield).

A single Dormand-Prince 5(4) stepper drives all flows used in the package;
rotating the field by a unit phase gives backward time (phase pi) and the
orthogonal flow used for transversal construction (phase +-pi/2).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import PairingError, TraceError
from .farfield import FarField, direction_count
from .polynomial import EquilibriumPoint, Polynomial, roots

# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_ERR = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


@dataclass(frozen=True)
class TraceConfig:
    """Tolerances and geometry for separatrix tracing.

    Built from a polynomial via :meth:`for_polynomial`, which also computes
    the equilibria and the far-field expansion shared by all traces.
    """

    r_inf: float
    rtol: float = 1e-10
    atol: float = 1e-13
    angle_tol: float = 0.0      # filled in for_polynomial: pi / (8(d-1))
    landing_eps: float = 0.0    # filled in: 1e-8 * r_inf
    max_steps: int = 40000
    max_dz: float = 0.0         # per-step spatial cap, filled in
    match_tol: float = 0.0      # Hausdorff tolerance for pairing, filled in
    equilibria: tuple[EquilibriumPoint, ...] = ()
    far: FarField | None = field(default=None, compare=False)

    @staticmethod
    def for_polynomial(P: Polynomial, cluster_eps: float = 1e-7, **overrides) -> "TraceConfig":
        eqs = tuple(roots(P, cluster_eps))
        root_scale = max(abs(e.location) for e in eqs)
        r_inf = overrides.pop("r_inf", 10.0 * (1.0 + root_scale))
        d = P.degree
        cfg = TraceConfig(
            r_inf=r_inf,
            angle_tol=math.pi / (8 * (d - 1)),
            landing_eps=1e-8 * r_inf,
            max_dz=0.025 * r_inf,
            match_tol=0.01 * r_inf,
            equilibria=eqs,
            far=FarField(P),
        )
        cfg = replace(cfg, **overrides)
        if any(abs(e.location) >= cfg.r_inf / 4.0 for e in eqs):
            raise TraceError(f"R_inf = {cfg.r_inf} is not large enough: a root violates |zeta| < R_inf/4")
        return cfg


@dataclass(frozen=True)
class SeparatrixTrace:
    """Result of tracing one asymptotic direction.

    ``outcome`` is ("landing", eq_index) or ("homoclinic", k, j).  The
    polyline runs in the traced parameter (forward flow for odd ell,
    backward flow for even ell).  ``accumulated_time`` is the full true-time
    duration including the far-field tails; for a homoclinic it equals the
    invariant travel time tau.
    """

    ell: int
    outcome: tuple
    polyline: np.ndarray
    accumulated_time: float

    @property
    def is_homoclinic(self) -> bool:
        return self.outcome[0] == "homoclinic"

    @property
    def travel_time(self) -> float:
        return self.accumulated_time


@dataclass(frozen=True)
class SeparatrixGraph:
    """Labelled separatrix graph: homoclinic pairings and the landing map."""

    degree: int
    homoclinics: tuple[tuple[int, int, float], ...]   # (k odd, j even, tau)
    landing: dict[int, int]                           # direction -> eq index
    traces: dict[int, SeparatrixTrace] = field(default_factory=dict, compare=False)

    @property
    def homoclinic_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((k, j) for k, j, _ in self.homoclinics)


def integrate_flow(P: Polynomial, z0: complex, phase: complex, cfg: TraceConfig, handler):
    """Adaptive Dormand-Prince integration of z' = phase*P/(1+|P|^2).

    ``handler(z_prev, z_new, t_new, nsteps)`` is called after every accepted
    step and may return a terminal result (anything not None) to stop.  The
    quadrature variable t accumulates ds/(1+|P|^2), i.e. the modulus of the
    rectifying-coordinate displacement along the path.

    Returns (result, polyline, t_total).
    """
    coeffs = [complex(c) for c in P.full_coefficients()]
    deg = len(coeffs) - 1

    def rhs(z):
        w = coeffs[0]
        for i in range(1, deg + 1):
            w = w * z + coeffs[i]
        den = 1.0 + (w.real * w.real + w.imag * w.imag)
        return phase * w / den, 1.0 / den

    rtol, atol = cfg.rtol, cfg.atol
    z, t = complex(z0), 0.0
    poly = [z]
    f0, g0 = rhs(z)
    speed = abs(f0) + 1e-300
    h = 0.05 * cfg.max_dz / speed
    nsteps = 0
    result = None
    kz = [0j] * 7
    kt = [0.0] * 7
    while True:
        if nsteps >= cfg.max_steps:
            raise TraceError(
                "step budget exhausted before termination (near-bifurcation input?)",
                steps=nsteps,
            )
        # spatial cap keeps the polyline faithful and approaches geometric
        speed = abs(f0) + 1e-300
        r_near = min(abs(z - e.location) for e in cfg.equilibria) if cfg.equilibria else cfg.r_inf
        cap = min(0.25 * r_near + 1e-6 * cfg.r_inf, cfg.max_dz) / speed
        if h > cap:
            h = cap
        kz[0], kt[0] = f0, g0
        for i in range(1, 7):
            zi = z
            ti = 0.0
            arow = _A[i]
            for j in range(i):
                zi += h * arow[j] * kz[j]
                ti += arow[j] * kt[j]
            kz[i], kt[i] = rhs(zi)
        z_new = z
        t_inc = 0.0
        err_z = 0j
        err_t = 0.0
        for i in range(7):
            z_new += h * _B5[i] * kz[i]
            t_inc += _B5[i] * kt[i]
            err_z += _ERR[i] * kz[i]
            err_t += _ERR[i] * kt[i]
        t_new = t + h * t_inc
        sc_z = atol + rtol * max(abs(z), abs(z_new))
        sc_t = atol + rtol * max(1.0, abs(t_new))
        err = max(abs(h * err_z) / sc_z, abs(h * err_t) / sc_t)
        if err <= 1.0:
            nsteps += 1
            z_prev = z
            z, t = z_new, t_new
            poly.append(z)
            f0, g0 = kz[6], kt[6]  # FSAL: stage 7 is the RHS at the new point
            result = handler(z_prev, z, t, nsteps)
            if result is not None:
                break
        factor = 0.9 * err ** -0.2 if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
        if not math.isfinite(h) or h <= 1e-16 * cfg.max_dz / speed:
            raise TraceError("step size underflow during integration", steps=nsteps)
    return result, np.array(poly), t


def trace(P: Polynomial, ell: int, cfg: TraceConfig | None = None) -> SeparatrixTrace:
    """Trace the separatrix with asymptotic direction index ell.

    Odd ell integrates forward in time from the far-field circle, even ell
    backward.  Terminates on landing (within ``landing_eps`` of an
    equilibrium, moving inward) or on re-exit through |z| = R_inf with
    outward radial velocity, in which case the paired direction index is
    identified from the exit angle.
    """
    if cfg is None:
        cfg = TraceConfig.for_polynomial(P)
    d = P.degree
    if not 0 <= ell < direction_count(d):
        raise ValueError(f"direction index {ell} out of range for degree {d}")
    far = cfg.far
    outgoing = ell % 2 == 1
    phase = 1.0 + 0.0j if outgoing else -1.0 + 0.0j
    z0 = far.start_point(ell, cfg.r_inf)
    eqs = cfg.equilibria

    def handler(z_prev, z, t, nsteps):
        # landing: inside the eps-ball of an equilibrium and still contracting
        best_i, best_r = None, None
        for i, e in enumerate(eqs):
            r = abs(z - e.location)
            if best_r is None or r < best_r:
                best_i, best_r = i, r
        if best_r <= cfg.landing_eps:
            fz = phase * P(z)
            u = z - eqs[best_i].location
            if (u.conjugate() * fz).real < 0:
                return ("landing", best_i)
        if abs(z) >= cfg.r_inf and nsteps > 1:
            fz = phase * P(z)
            if (z.conjugate() * fz).real > 0:
                return ("exit", z)
        return None

    result, polyline, t_total = integrate_flow(P, z0, phase, cfg, handler)

    start_tail = far.tail_time(z0, incoming=outgoing)
    if result[0] == "landing":
        return SeparatrixTrace(ell, ("landing", result[1]), polyline, t_total + start_tail)
    z_exit = result[1]
    other = far.match_direction(z_exit, parity=(0 if outgoing else 1), angle_tol=cfg.angle_tol)
    exit_tail = far.tail_time(z_exit, incoming=not outgoing)
    tau = t_total + start_tail + exit_tail
    k, j = (ell, other) if outgoing else (other, ell)
    if tau <= 0:
        raise TraceError(f"homoclinic travel time came out non-positive: {tau}")
    return SeparatrixTrace(ell, ("homoclinic", k, j), polyline, tau)


def _point_segment_dist(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Min distance of each point in pts to the polyline with nodes a->b pairs."""
    seg = b - a
    L2 = (seg * seg.conj()).real
    L2 = np.where(L2 == 0, 1e-300, L2)
    # projection parameter of each point onto each segment, clamped
    w = pts[:, None] - a[None, :]
    tproj = (w * seg.conj()[None, :]).real / L2[None, :]
    tproj = np.clip(tproj, 0.0, 1.0)
    closest = a[None, :] + tproj * seg[None, :]
    return np.min(np.abs(pts[:, None] - closest), axis=1)


def polyline_hausdorff(p: np.ndarray, q: np.ndarray, interior_radius: float | None = None) -> float:
    """Symmetric point-to-segment Hausdorff distance of two polylines.

    With ``interior_radius`` set, only points inside that radius are compared
    (trace endpoints overshoot the far-field circle by up to one step, so the
    two traversals of one homoclinic have slightly different extents there).
    """
    pp, qq = p, q
    if interior_radius is not None:
        pp = p[np.abs(p) <= interior_radius]
        qq = q[np.abs(q) <= interior_radius]
        if len(pp) == 0 or len(qq) == 0:
            return math.inf
    d1 = _point_segment_dist(pp, q[:-1], q[1:]).max()
    d2 = _point_segment_dist(qq, p[:-1], p[1:]).max()
    return max(d1, d2)


def build_graph(P: Polynomial, cfg: TraceConfig | None = None) -> SeparatrixGraph:
    """Trace all 2(d-1) directions and assemble a consistent labelled graph.

    Every homoclinic found from its odd side is cross-validated against the
    backward trace from its even side: the pairing must agree, the travel
    times must match to 1e-6 relative, and the two polylines must describe
    the same curve within the Hausdorff matching tolerance.
    """
    if cfg is None:
        cfg = TraceConfig.for_polynomial(P)
    d = P.degree
    traces = {ell: trace(P, ell, cfg) for ell in range(direction_count(d))}

    homoclinics = []
    landing = {}
    claimed = {}
    for ell, tr in traces.items():
        if tr.outcome[0] == "landing":
            landing[ell] = tr.outcome[1]
        else:
            _, k, j = tr.outcome
            claimed.setdefault((k, j), []).append(tr)
    for (k, j), pair in sorted(claimed.items()):
        if len(pair) != 2:
            raise PairingError(
                f"homoclinic ({k},{j}) seen from {len(pair)} side(s); "
                "forward/backward traces disagree"
            )
        fwd = pair[0] if pair[0].ell == k else pair[1]
        bwd = pair[0] if pair[0].ell == j else pair[1]
        if fwd.ell != k or bwd.ell != j:
            raise PairingError(f"pairing ({k},{j}) claimed by directions {[t.ell for t in pair]}")
        dt = abs(fwd.travel_time - bwd.travel_time) / max(fwd.travel_time, bwd.travel_time)
        if dt > 1e-6:
            raise PairingError(f"travel time mismatch for ({k},{j}): relative {dt:.3e}")
        hd = polyline_hausdorff(fwd.polyline, bwd.polyline[::-1], interior_radius=0.95 * cfg.r_inf)
        if hd > cfg.match_tol:
            raise PairingError(f"polyline mismatch for ({k},{j}): Hausdorff {hd:.3e}")
        homoclinics.append((k, j, fwd.travel_time))

    n_out = len(landing) + 2 * len(homoclinics)
    if n_out != direction_count(d):
        raise PairingError("separatrix outcomes do not cover all directions")
    return SeparatrixGraph(d, tuple(sorted(homoclinics)), dict(sorted(landing.items())), traces)
