"""Monic centered polynomials and their equilibrium points.

A degree-d monic centered polynomial P(z) = z^d + a_{d-2} z^{d-2} + ... + a_0
is stored by the free coefficients (a_0, ..., a_{d-2}) only; monicity and the
vanishing z^{d-1} coefficient are structural.  Equilibria of the vector field
z' = P(z) are the zeros of P, classified by the sign of the real part of the
dynamical residue Res(1/P, zeta).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RootSolveError

SINK = "sink"
SOURCE = "source"
CENTER = "center"
MULTIPLE = "multiple"

#: |Re(residue)| below this (relative) threshold classifies a simple zero as
#: a center.  Centers are codimension one in coefficient space, so genuine
#: centers only occur in constructed inputs where Re(residue) is exactly 0.
CENTER_TOL = 1e-9

DEFAULT_CLUSTER_EPS = 1e-7


@dataclass(frozen=True)
class Polynomial:
    """Monic centered polynomial, held by its low coefficients a_0..a_{d-2}."""

    coefficients: tuple[complex, ...]

    def __post_init__(self):
        if len(self.coefficients) < 1:
            raise ValueError("degree must be >= 2 (need at least one free coefficient)")
        object.__setattr__(self, "coefficients", tuple(complex(c) for c in self.coefficients))

    @property
    def degree(self) -> int:
        return len(self.coefficients) + 1

    def full_coefficients(self) -> np.ndarray:
        """Coefficients highest power first, suitable for numpy.roots."""
        d = self.degree
        out = np.zeros(d + 1, dtype=complex)
        out[0] = 1.0
        # out[1] corresponds to z^{d-1} and stays 0 (centered)
        for i, a in enumerate(self.coefficients):  # a_0 .. a_{d-2}
            out[d - i] = a
        return out

    def __call__(self, z: complex) -> complex:
        acc = 1.0 + 0.0j
        d = self.degree
        coeffs = self.coefficients
        for power in range(d - 1, -1, -1):
            a = coeffs[power] if power <= d - 2 else 0.0
            acc = acc * z + a
        return acc

    def derivative(self, z: complex) -> complex:
        acc = complex(self.degree)
        d = self.degree
        coeffs = self.coefficients
        for power in range(d - 1, 0, -1):
            a = coeffs[power] if power <= d - 2 else 0.0
            acc = acc * z + power * a
        return acc

    def eval_many(self, z: np.ndarray) -> np.ndarray:
        return np.polyval(self.full_coefficients(), z)


@dataclass(frozen=True)
class EquilibriumPoint:
    """A zero of P with multiplicity, dynamical residue, and kind."""

    location: complex
    multiplicity: int
    residue: complex
    kind: str
    warnings: tuple[str, ...] = field(default=())


def classify(zeta: complex, m: int, P: Polynomial, center_tol: float = CENTER_TOL):
    """Classify an equilibrium by multiplicity and dynamical residue.

    Returns ``(kind, residue, warnings)``.  For m > 1 the kind is always
    ``multiple``.  For m = 1 the residue is 1/P'(zeta) and the sign of its
    real part decides sink/source/center; a nonzero real part inside the
    center tolerance is flagged as near-degenerate.
    """
    if m > 1:
        return MULTIPLE, _residue_at(zeta, m, P), ()
    dp = P.derivative(zeta)
    if dp == 0:
        raise RootSolveError(f"P'({zeta}) = 0 for a zero reported as simple")
    res = 1.0 / dp
    tol = center_tol * (1.0 + abs(res))
    if abs(res.real) < tol:
        warn = ("near-degenerate-center",) if res.real != 0.0 else ()
        return CENTER, res, warn
    return (SINK if res.real < 0 else SOURCE), res, ()


def _residue_at(zeta: complex, m: int, P: Polynomial, others=None) -> complex:
    """Res(1/P, zeta) at a zero of order m.

    Uses the factored form through the other root clusters: with
    Q(u) = prod_i (zeta - zeta_i + u)^{-m_i} over i != this root, the residue
    is the coefficient of u^{m-1} in the Taylor series of Q, found by the
    logarithmic-derivative recursion.
    """
    if others is None:
        others = _cluster_roots_excluding(P, zeta, m)
    q0 = 1.0 + 0.0j
    for zi, mi in others:
        q0 /= (zeta - zi) ** mi
    if m == 1:
        return q0
    # Taylor coefficients L_t of Q'/Q = -sum_i m_i / (zeta - zeta_i + u)
    L = np.zeros(m, dtype=complex)
    for zi, mi in others:
        dz = zeta - zi
        for t in range(m - 1):
            L[t] += -mi * (-1.0) ** t / dz ** (t + 1)
    q = np.zeros(m, dtype=complex)
    q[0] = q0
    for n in range(m - 1):
        q[n + 1] = sum(L[t] * q[n - t] for t in range(n + 1)) / (n + 1)
    return q[m - 1]


def _cluster_roots_excluding(P, zeta, m):
    eqs = roots(P)
    out = []
    matched = False
    for e in eqs:
        if not matched and abs(e.location - zeta) <= 1e-6 * (1 + abs(zeta)) and e.multiplicity == m:
            matched = True
            continue
        out.append((e.location, e.multiplicity))
    if not matched:
        raise RootSolveError(f"{zeta} (multiplicity {m}) is not a root cluster of P")
    return out


def roots(P: Polynomial, cluster_eps: float = DEFAULT_CLUSTER_EPS) -> list[EquilibriumPoint]:
    """Extract equilibria with multiplicities by clustering numerical roots.

    Numerically coincident roots (within ``cluster_eps``) merge into one
    cluster whose representative is their mean.  Clusters that come within a
    factor two of merging are flagged ``ambiguous-clustering`` rather than
    silently resolved, because multiplicities feed the combinatorics.
    """
    if cluster_eps <= 0:
        raise ValueError("cluster_eps must be positive")
    d = P.degree
    try:
        raw = np.roots(P.full_coefficients())
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RootSolveError(f"companion eigenvalue solve failed: {exc}") from exc
    if len(raw) != d or not np.all(np.isfinite(raw)):
        raise RootSolveError("root solve did not return d finite roots")

    # single-linkage clustering within cluster_eps
    parent = list(range(d))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(d):
        for j in range(i + 1, d):
            if abs(raw[i] - raw[j]) <= cluster_eps:
                parent[find(i)] = find(j)

    groups: dict[int, list[complex]] = {}
    for i in range(d):
        groups.setdefault(find(i), []).append(raw[i])
    reps = [(np.mean(g), len(g)) for g in groups.values()]

    ambiguous = False
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            if abs(reps[i][0] - reps[j][0]) < 2.0 * cluster_eps:
                ambiguous = True

    scale = 1.0 + max(abs(z) for z, _ in reps)
    center_sum = sum(m * z for z, m in reps)
    if abs(center_sum) > 1e-6 * d * scale:
        raise RootSolveError(f"clustered roots violate centering: sum m*zeta = {center_sum}")

    reps.sort(key=lambda t: (t[0].real, t[0].imag))
    out = []
    for idx, (zeta, m) in enumerate(reps):
        zeta = complex(zeta)
        if m == 1:
            kind, res, warns = classify(zeta, 1, P)
        else:
            kind = MULTIPLE
            others = [reps[i] for i in range(len(reps)) if i != idx]
            res = _residue_at(zeta, m, P, others=others)
            warns = ()
        if ambiguous:
            warns = warns + ("ambiguous-clustering",)
        out.append(EquilibriumPoint(zeta, m, complex(res), kind, warns))
    return out


def from_roots(root_mults, centering_tol: float = 1e-9) -> Polynomial:
    """Expand prod (z - zeta)^m into a monic centered Polynomial.

    The z^{d-1} coefficient must vanish within ``centering_tol`` (relative to
    the root scale); it is then zeroed exactly.
    """
    pairs = [(complex(z), int(m)) for z, m in root_mults]
    if not pairs or any(m < 1 for _, m in pairs):
        raise ValueError("need roots with multiplicity >= 1")
    d = sum(m for _, m in pairs)
    if d < 2:
        raise ValueError("total degree must be >= 2")
    scale = 1.0 + max(abs(z) for z, _ in pairs)
    centering = sum(m * z for z, m in pairs)
    if abs(centering) > centering_tol * d * scale:
        raise ValueError(f"roots are not centered: sum m*zeta = {centering}")

    coeffs = np.array([1.0 + 0.0j])
    for z, m in pairs:
        for _ in range(m):
            coeffs = np.convolve(coeffs, [1.0, -z])
    # coeffs is highest-first of length d+1; coeffs[1] is the z^{d-1} term
    coeffs[1] = 0.0
    low = coeffs[2:]  # a_{d-2} .. a_0
    return Polynomial(tuple(low[::-1]))
