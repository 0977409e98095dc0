import numpy as np
import pytest

from polysep.polynomial import (
    CENTER,
    MULTIPLE,
    SINK,
    SOURCE,
    Polynomial,
    classify,
    from_roots,
    roots,
)


def test_z2_plus_1_roots():
    P = Polynomial((1.0,))  # z^2 + 1
    eqs = roots(P)
    locs = sorted((e.location for e in eqs), key=lambda z: z.imag)
    assert locs[0] == pytest.approx(-1j)
    assert locs[1] == pytest.approx(1j)
    assert all(e.multiplicity == 1 for e in eqs)
    # residue 1/(2i) = -i/2 at +i: purely imaginary -> center
    assert all(e.kind == CENTER for e in eqs)


def test_z2_double_root():
    P = Polynomial((0.0,))  # z^2
    eqs = roots(P)
    assert len(eqs) == 1
    assert eqs[0].multiplicity == 2
    assert eqs[0].kind == MULTIPLE
    assert eqs[0].location == pytest.approx(0.0)


def test_z3_minus_z_classification():
    P = Polynomial((0.0, -1.0))  # z^3 - z
    eqs = roots(P)
    by_loc = {round(e.location.real): e for e in eqs}
    # residue = 1/P'(zeta) with P' = 3z^2 - 1, computed by hand
    assert by_loc[0].kind == SINK and by_loc[0].residue == pytest.approx(-1.0)
    assert by_loc[1].kind == SOURCE and by_loc[1].residue == pytest.approx(0.5)
    assert by_loc[-1].kind == SOURCE and by_loc[-1].residue == pytest.approx(0.5)


def test_classify_direct():
    P = Polynomial((1.0,))
    kind, res, _ = classify(1j, 1, P)
    assert kind == CENTER and res == pytest.approx(-0.5j)
    P3 = Polynomial((0.0, -1.0))
    assert classify(0.0, 1, P3)[0] == SINK
    kind, _, _ = classify(0.0, 2, Polynomial((0.0,)))
    assert kind == MULTIPLE


def test_from_roots_examples():
    assert from_roots([(1j, 1), (-1j, 1)]).coefficients == (1 + 0j,)
    assert from_roots([(0, 2)]).coefficients == (0j,)
    P = from_roots([(0, 1), (1, 1), (-1, 1)])
    assert P.coefficients == (0j, -1 + 0j)


def test_from_roots_rejects_uncentered():
    with pytest.raises(ValueError):
        from_roots([(1.0, 1), (1.0, 1)])


def test_roundtrip_random_simple_roots():
    rng = np.random.default_rng(7)
    for _ in range(40):
        d = rng.integers(2, 9)
        while True:
            pts = rng.normal(size=d - 1) + 1j * rng.normal(size=d - 1)
            pts = np.append(pts, -pts.sum())
            if min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:]) > 0.3:
                break
        P = from_roots([(z, 1) for z in pts])
        Q = from_roots([(e.location, e.multiplicity) for e in roots(P)])
        assert np.allclose(P.full_coefficients(), Q.full_coefficients(), atol=1e-9)
        # centering is exact by construction
        assert P.full_coefficients()[1] == 0.0


def test_residue_times_derivative_is_one():
    rng = np.random.default_rng(11)
    for _ in range(20):
        d = int(rng.integers(2, 8))
        pts = rng.normal(size=d - 1) + 1j * rng.normal(size=d - 1)
        pts = np.append(pts, -pts.sum())
        if min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:]) < 0.2:
            continue
        P = from_roots([(z, 1) for z in pts])
        for e in roots(P):
            assert e.residue * P.derivative(e.location) == pytest.approx(1.0, abs=1e-9)


def test_multiple_root_residue():
    # P = (z - 1)^2 (z + 2): Res(1/P, 1) = d/dz[1/(z+2)] at 1 = -1/9
    P = from_roots([(1.0, 2), (-2.0, 1)])
    eqs = roots(P)
    dbl = next(e for e in eqs if e.multiplicity == 2)
    assert dbl.residue == pytest.approx(-1.0 / 9.0, abs=1e-7)


def test_ambiguous_clustering_flag():
    # two roots separated by ~1.5 * cluster_eps: flagged, not merged
    eps = 1e-7
    a = 0.75 * eps
    P = from_roots([(a, 1), (-a, 1), (2.0, 1), (-2.0, 1)])
    eqs = roots(P, cluster_eps=eps)
    assert any("ambiguous-clustering" in e.warnings for e in eqs)
