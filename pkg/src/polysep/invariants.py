"""Analytic invariants (alpha, tau) and pseudo-invariants as integrals of 1/P.

Homoclinic times tau are integrals of dz/P along the traced homoclinic plus
the two far-field tail corrections.  Strip invariants alpha integrate along
a concrete transversal path built from the orthogonal flow (the flow of iP):
from a point deep in the access of end e_k, ascend at constant Re(Phi) until
the strip's upper boundary is hit, then close to end e_j along the boundary.
Any path homotopic to the distinguished transversal inside the strip yields
the same integral; a second, independently constructed path guards this.

Frozen curves keep these polylines verbatim so that pseudo-invariants of a
perturbed polynomial integrate 1/P_pert over the *same sets*, per the
definition.  Junctions where a curve touches the pole at infinity are
handled by the asymptotic series, leg by leg.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diskmodel import DiskModel, DistinguishedTransversal
from .errors import HomotopyMismatchError, InvariantError
from .farfield import FarField
from .polynomial import Polynomial
from .tracing import TraceConfig, integrate_flow

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}

DEFAULT_QUAD_TOL = 1e-9


def _gl(n):
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (0.5 * (x + 1.0), 0.5 * w)  # mapped to [0, 1]
    return _GL_CACHE[n]


def integrate_reciprocal_polyline(P: Polynomial, pts: np.ndarray, tol: float = DEFAULT_QUAD_TOL):
    """Adaptive Gauss quadrature of dz/P along a polyline.

    Each segment is integrated with 10- and 20-point Gauss rules; segments
    whose difference exceeds their share of ``tol`` are bisected.  Returns
    (value, error_estimate).
    """
    coeffs = P.full_coefficients()
    x10, w10 = _gl(10)
    x20, w20 = _gl(20)

    a = np.asarray(pts[:-1], dtype=complex)
    b = np.asarray(pts[1:], dtype=complex)
    total_len = float(np.sum(np.abs(b - a))) or 1.0

    def rule(aa, bb, x, w):
        z = aa[:, None] + (bb - aa)[:, None] * x[None, :]
        vals = 1.0 / np.polyval(coeffs, z)
        return (bb - aa) * (vals @ w)

    value = 0.0 + 0.0j
    err = 0.0
    stack = [(a, b, 0)]
    while stack:
        aa, bb, depth = stack.pop()
        i10 = rule(aa, bb, x10, w10)
        i20 = rule(aa, bb, x20, w20)
        diff = np.abs(i20 - i10)
        budget = tol * np.abs(bb - aa) / total_len + 1e-300
        ok = (diff <= budget) | (np.abs(bb - aa) < 1e-14 * total_len)
        if depth >= 40 and not ok.all():
            raise InvariantError("quadrature failed to converge (root too close to the path?)")
        value += i20[ok].sum()
        err += diff[ok].sum()
        bad_a, bad_b = aa[~ok], bb[~ok]
        if len(bad_a):
            mid = 0.5 * (bad_a + bad_b)
            stack.append((bad_a, mid, depth + 1))
            stack.append((mid, bad_b, depth + 1))
    return value, float(err)


@dataclass(frozen=True)
class FrozenCurve:
    """A curve fixed as a set, stored as far-field-to-far-field legs.

    Consecutive legs touch the pole at infinity between them; the integral
    of dz/P over the curve adds the series tail corrections at every leg
    endpoint.  Resampling is forbidden: the definition fixes the sets.
    """

    legs: tuple[np.ndarray, ...]
    kind: str          # "homoclinic" | "transversal"
    label: tuple

    def all_points(self) -> np.ndarray:
        return np.concatenate(self.legs)


def curve_integral(P: Polynomial, curve: FrozenCurve, far: FarField | None = None,
                   tol: float = DEFAULT_QUAD_TOL):
    """Integral of dz/P over a frozen curve including the infinity tails."""
    if far is None:
        far = FarField(P)
    value = 0.0 + 0.0j
    err = 0.0
    for leg in curve.legs:
        q, e = integrate_reciprocal_polyline(P, leg, tol)
        value += far.phi(leg[0]) + q - far.phi(leg[-1])
        err += e
    return value, err


def homoclinic_tau(P: Polynomial, polyline: np.ndarray, tol: float = DEFAULT_QUAD_TOL,
                   far: FarField | None = None) -> float:
    """Travel time of a traced homoclinic: Re of its dz/P integral.

    The imaginary part must vanish (the polyline must be a trajectory of P,
    traversed in flow direction) and the real part must be positive.
    """
    curve = FrozenCurve((np.asarray(polyline, dtype=complex),), "homoclinic", ())
    value, _ = curve_integral(P, curve, far, tol)
    if abs(value.imag) > 1e-6 * (1.0 + abs(value.real)):
        raise InvariantError(
            f"homoclinic integral has imaginary part {value.imag:.3e}; "
            "the polyline is not a trajectory of P"
        )
    if value.real <= 0:
        raise InvariantError(
            f"homoclinic integral is non-positive ({value.real:.3e}); "
            "polyline reversed or mislabelled"
        )
    return value.real


# ---------------------------------------------------------------------------
# transversal construction
# ---------------------------------------------------------------------------

def _segment_crossing(p0, p1, qa, qb):
    """Earliest crossing of segment p0->p1 with any segment (qa[i], qb[i]).

    Returns (t, i) for the crossing parameter on p0->p1, or None.
    """
    d = p1 - p0
    e = qb - qa
    denom = (d.real * e.imag - d.imag * e.real)
    w = qa - p0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (w.real * e.imag - w.imag * e.real) / denom
        u = (w.real * d.imag - w.imag * d.real) / denom
    hit = np.isfinite(t) & np.isfinite(u) & (t >= 0.0) & (t <= 1.0) & (u >= 0.0) & (u <= 1.0)
    if not hit.any():
        return None
    idx = np.flatnonzero(hit)
    best = idx[np.argmin(t[idx])]
    return float(t[best]), int(best)


def _run_pieces(model: DiskModel, run):
    """Boundary pieces of a run plus the end index at each junction.

    pieces[i] is ("land-left" | "hom" | "land-right", stored polyline); the
    stored polylines all have their index-0 point in the far field.  There
    are n+1 junctions for n homoclinics; junction t sits between pieces t
    and t+1 and its end index is ends[t].
    """
    traces = model.graph.traces
    pieces = []
    if run.opening is not None:
        pieces.append(("land-left", traces[run.opening].polyline))
    for k, j in run.homoclinics:
        pieces.append(("hom", traces[k].polyline))
    if run.closing is not None:
        pieces.append(("land-right", traces[run.closing].polyline))
    if run.side == "upper":
        # junction t between h_t (incoming j_t) and h_{t+1} (k = j_t - 1)
        ends = [run.opening] + [j for _, j in run.homoclinics]
    else:
        first = run.homoclinics[0][0] if run.homoclinics else run.closing
        ends = [first] + [(j + 1) % (2 * (model.degree - 1)) for _, j in run.homoclinics]
    return pieces, ends


def _close_along_boundary(pieces, piece_idx, seg_in_piece, z_cross, target_junction):
    """Boundary legs from a crossing point to the target junction.

    Pieces left of the target are walked rightward (stored orientation for
    homoclinics), pieces right of it leftward (reversed).  The partial piece
    containing the crossing is split at the crossing point; all legs start
    and end in the far field.
    """
    legs = []
    kind, line = pieces[piece_idx]
    # each stored polyline starts at its far-field end: for "hom" that is the
    # left (k) end, for "land-left" the right (pole) end, for "land-right"
    # the left (pole) end
    if piece_idx <= target_junction:
        # move rightward toward the junction
        if kind == "land-left":
            partial = np.concatenate(([z_cross], line[seg_in_piece::-1]))
        else:
            partial = np.concatenate(([z_cross], line[seg_in_piece + 1:]))
        legs.append(partial)
        for mid in range(piece_idx + 1, target_junction + 1):
            legs.append(pieces[mid][1])
    else:
        # move leftward
        partial = np.concatenate(([z_cross], line[seg_in_piece::-1]))
        legs.append(partial)
        for mid in range(piece_idx - 1, target_junction, -1):
            legs.append(pieces[mid][1][::-1])
    return legs


def _junction_walk(pieces, junction, target_junction):
    """Boundary legs from one junction to another (after a far-field exit)."""
    legs = []
    if junction < target_junction:
        for mid in range(junction + 1, target_junction + 1):
            legs.append(pieces[mid][1])
    else:
        for mid in range(junction, target_junction, -1):
            legs.append(pieces[mid][1][::-1])
    return legs


def _transversal_path(P, model, T, cfg, from_lower=True, offset=0.5):
    """One concrete crossing path for transversal T, plus its invariant.

    ``from_lower`` ascends with the +iP flow from end e_k to the strip's
    upper boundary and closes leftward to e_j; otherwise the path descends
    with -iP from e_j to the lower boundary, closes rightward to e_k, and
    the integral is negated.  Returns (FrozenCurve, alpha, quadrature error).
    """
    far = cfg.far
    zone = model.zones[T.zone_index]
    run = zone.upper if from_lower else zone.lower
    start_end = T.k if from_lower else T.j
    phase = 1j if from_lower else -1j
    pieces, ends = _run_pieces(model, run)
    target_junction = 0 if from_lower else len(ends) - 1
    theta = (start_end - 1 + offset) * math.pi / (model.degree - 1)
    z0 = cfg.r_inf * complex(math.cos(theta), math.sin(theta))

    seg_a, seg_b, seg_piece = [], [], []
    for pi, (_, line) in enumerate(pieces):
        seg_a.append(line[:-1])
        seg_b.append(line[1:])
        seg_piece.append(np.full(len(line) - 1, pi))
    seg_a = np.concatenate(seg_a)
    seg_b = np.concatenate(seg_b)
    seg_piece = np.concatenate(seg_piece)
    seg_offset = np.concatenate([[0], np.cumsum([len(p[1]) - 1 for p in pieces])])

    state = {}

    def handler(z_prev, z_new, t, nsteps):
        hit = _segment_crossing(z_prev, z_new, seg_a, seg_b)
        if hit is not None:
            tpar, seg_idx = hit
            state["cross"] = z_prev + tpar * (z_new - z_prev)
            state["piece"] = int(seg_piece[seg_idx])
            state["seg_in_piece"] = int(seg_idx - seg_offset[state["piece"]])
            return "crossed"
        if abs(z_new) >= cfg.r_inf and nsteps > 1:
            fz = phase * P(z_new)
            if (z_new.conjugate() * fz).real > 0:
                state["exit"] = z_new
                return "exited"
        return None

    result, ascent, _ = integrate_flow(P, z0, phase, cfg, handler)

    if result == "crossed":
        legs = [np.append(ascent, state["cross"])]
        tail = _close_along_boundary(
            pieces, state["piece"], state["seg_in_piece"], state["cross"], target_junction
        )
        # merge the partial piece into the ascent leg (shared interior point)
        legs[-1] = np.concatenate((legs[-1], tail[0][1:]))
        legs.extend(tail[1:])
    elif result == "exited":
        z_exit = state["exit"]
        end_idx = far.end_index_at(z_exit)
        if end_idx not in ends:
            raise InvariantError(
                f"transversal path escaped the strip through end e_{end_idx}"
            )
        legs = [np.append(ascent, z_exit)]
        legs.extend(_junction_walk(pieces, ends.index(end_idx), target_junction))
    else:  # pragma: no cover
        raise InvariantError("transversal integration terminated abnormally")

    curve = FrozenCurve(tuple(np.asarray(l, dtype=complex) for l in legs),
                        "transversal", (T.k, T.j))
    value, err = curve_integral(P, curve, far, DEFAULT_QUAD_TOL)
    if not from_lower:
        value = -value
    return curve, value, err


def strip_alpha(P: Polynomial, model: DiskModel, T: DistinguishedTransversal,
                cfg: TraceConfig | None = None) -> complex:
    """Invariant alpha of one strip, with the homotopy-independence check.

    Two independently constructed crossing paths (ascending from e_k and
    descending from e_j) must agree to 1e-6; disagreement is escalated, not
    averaged.  The imaginary part (the strip height) must be positive.
    """
    if cfg is None:
        cfg = TraceConfig.for_polynomial(P)
    _, a1, _ = _transversal_path(P, model, T, cfg, from_lower=True)
    _, a2, _ = _transversal_path(P, model, T, cfg, from_lower=False)
    if abs(a1 - a2) > 1e-6 * (1.0 + abs(a1)):
        raise HomotopyMismatchError(
            f"transversal paths disagree: {a1} vs {a2} for T_({T.k},{T.j})"
        )
    if a1.imag <= 0:
        raise InvariantError(f"strip invariant must lie in the upper half-plane: {a1}")
    return a1


# ---------------------------------------------------------------------------
# invariant bundles and pseudo-invariants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Invariants:
    """The tuple (alpha_1..alpha_s, tau_1..tau_h) with its frozen curves."""

    alphas: tuple[complex, ...]
    taus: tuple[float, ...]
    transversal_index: tuple[int, ...]
    homoclinic_index: tuple[int, ...]
    curves: tuple[FrozenCurve, ...]      # transversal curves then homoclinic curves
    quad_errors: tuple[float, ...]

    @property
    def vector(self) -> np.ndarray:
        return np.array(list(self.alphas) + [complex(t) for t in self.taus])


@dataclass(frozen=True)
class PseudoInvariants:
    """Integrals of 1/P_pert over the base field's frozen curves."""

    alphas_tilde: tuple[complex, ...]
    taus_tilde: tuple[complex, ...]

    @property
    def vector(self) -> np.ndarray:
        return np.array(list(self.alphas_tilde) + list(self.taus_tilde))


def invariants(P: Polynomial, model: DiskModel, cfg: TraceConfig | None = None,
               tol: float = DEFAULT_QUAD_TOL) -> Invariants:
    """Compute (alpha, tau) and freeze their curves for later perturbation."""
    if cfg is None:
        cfg = TraceConfig.for_polynomial(P)
    far = cfg.far
    alphas, a_curves, errs = [], [], []
    for ti, T in enumerate(model.transversals):
        c1, a1, e1 = _transversal_path(P, model, T, cfg, from_lower=True)
        _, a2, _ = _transversal_path(P, model, T, cfg, from_lower=False)
        if abs(a1 - a2) > 1e-6 * (1.0 + abs(a1)):
            raise HomotopyMismatchError(f"transversal paths disagree for T_({T.k},{T.j})")
        if a1.imag <= 0:
            raise InvariantError(f"strip invariant not in the upper half-plane: {a1}")
        alphas.append(a1)
        a_curves.append(c1)
        errs.append(e1)
    taus, t_curves = [], []
    for k, j in model.homoclinics:
        line = np.asarray(model.graph.traces[k].polyline, dtype=complex)
        curve = FrozenCurve((line,), "homoclinic", (k, j))
        value, e = curve_integral(P, curve, far, tol)
        if abs(value.imag) > 1e-6 * (1.0 + abs(value.real)) or value.real <= 0:
            raise InvariantError(f"homoclinic ({k},{j}) integral invalid: {value}")
        taus.append(value.real)
        t_curves.append(curve)
        errs.append(e)
    return Invariants(
        alphas=tuple(alphas),
        taus=tuple(taus),
        transversal_index=tuple(range(len(model.transversals))),
        homoclinic_index=tuple(range(len(model.homoclinics))),
        curves=tuple(a_curves + t_curves),
        quad_errors=tuple(errs),
    )


def pseudo(P_pert: Polynomial, base: Invariants, pert_roots=None,
           root_clearance: float | None = None, tol: float = DEFAULT_QUAD_TOL) -> PseudoInvariants:
    """Pseudo-invariants of a perturbed field over the base frozen curves.

    A root of the perturbed polynomial within ``root_clearance`` of any
    frozen curve leaves the trustworthy neighborhood and is an error.
    """
    if pert_roots is None:
        from .polynomial import roots

        pert_roots = [e.location for e in roots(P_pert)]
    pert_roots = np.asarray(pert_roots, dtype=complex)
    if root_clearance is None:
        root_clearance = 1e-4 * (1.0 + float(np.max(np.abs(pert_roots))))
    far = FarField(P_pert)
    n_a = len(base.alphas)
    a_out, t_out = [], []
    for ci, curve in enumerate(base.curves):
        pts = curve.all_points()
        dmin = np.min(np.abs(pts[None, :] - pert_roots[:, None]))
        if dmin < root_clearance:
            raise InvariantError(
                f"perturbed root within {dmin:.2e} of frozen curve {curve.label}"
                f" (clearance {root_clearance:.2e})"
            )
        value, _ = curve_integral(P_pert, curve, far, tol)
        (a_out if ci < n_a else t_out).append(value)
    return PseudoInvariants(tuple(a_out), tuple(t_out))
