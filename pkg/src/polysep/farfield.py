"""Asymptotics of the rectifying coordinate near the pole at infinity.

For |z| larger than every root, 1/P has a convergent expansion
1/P = sum_{n>=0} s_n z^{-d-n}, and its antiderivative

    phi(z) = sum_{n>=0} s_n z^{1-d-n} / (1 - d - n)

satisfies phi(z) -> 0 as z -> infinity (there is no z^{-1} term: the finite
residues of 1/P sum to zero for d >= 2).  This single series provides

* the tail of the travel-time integral between a trace endpoint and infinity,
* the angular offset of a separatrix from its asymptotic ray at finite radius
  (the separatrix is the level curve Im phi = 0 in each far-field sector),
* robust matching of an exit point to its asymptotic direction index.

Asymptotic directions are ell*pi/(d-1) for ell = 0..2d-3; odd ell flow in
from infinity (outgoing separatrices), even ell flow out to infinity.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import TraceError
from .polynomial import Polynomial


def direction_count(degree: int) -> int:
    return 2 * (degree - 1)


def direction_angle(degree: int, ell: int) -> float:
    return ell * math.pi / (degree - 1)


class FarField:
    """Truncated expansion of 1/P and phi around z = infinity."""

    def __init__(self, P: Polynomial, nterms: int = 40):
        self.P = P
        self.degree = P.degree
        d = P.degree
        # P = z^d (1 + sum_{q=2}^{d} b_q z^{-q}) with b_q = a_{d-q}
        b = np.zeros(d + 1, dtype=complex)
        for q in range(2, d + 1):
            b[q] = P.coefficients[d - q]
        s = np.zeros(nterms, dtype=complex)
        s[0] = 1.0
        for n in range(1, nterms):
            acc = 0.0 + 0.0j
            for q in range(2, min(n, d) + 1):
                acc += b[q] * s[n - q]
            s[n] = -acc
        self._s = s
        # phi term exponents 1-d-n and their reciprocals
        n = np.arange(nterms)
        self._phi_pow = 1 - d - n
        self._phi_coef = s / (1.0 - d - n)

    def phi(self, z: complex) -> complex:
        """phi(z) = integral of 1/P from infinity to z within one sector."""
        w = 1.0 / z
        acc = 0.0 + 0.0j
        zp = w ** (self.degree - 1)
        for c in self._phi_coef:
            acc += c * zp
            zp *= w
        return acc

    def separatrix_angle(self, ell: int, radius: float, iterations: int = 4) -> float:
        """Angle at |z| = radius of the separatrix with asymptotic index ell.

        Solves Im phi(radius*e^{i theta}) = 0 near the asymptotic ray by
        Newton iteration; d(Im phi)/d(theta) = Re(z/P(z)) exactly.
        """
        theta = direction_angle(self.degree, ell)
        for _ in range(iterations):
            z = radius * cmath.exp(1j * theta)
            g = self.phi(z).imag
            dg = (z / self.P(z)).real
            if dg == 0.0:
                break
            step = -g / dg
            cap = 0.4 * math.pi / (self.degree - 1)
            step = max(-cap, min(cap, step))
            theta += step
        return theta

    def start_point(self, ell: int, radius: float) -> complex:
        return radius * cmath.exp(1j * self.separatrix_angle(ell, radius))

    def match_direction(self, z: complex, parity: int, angle_tol: float) -> int:
        """Nearest asymptotic index of given parity (0 even, 1 odd) at z.

        Compares arg(z) against the nudged separatrix angles at |z|; raises on
        a mismatch beyond angle_tol, carrying the exit angle for diagnostics.
        """
        d = self.degree
        r = abs(z)
        ang = cmath.phase(z) % (2 * math.pi)
        best, best_err = None, None
        for ell in range(parity, direction_count(d), 2):
            target = self.separatrix_angle(ell, r)
            err = abs((ang - target + math.pi) % (2 * math.pi) - math.pi)
            if best_err is None or err < best_err:
                best, best_err = ell, err
        if best_err is None or best_err > angle_tol:
            raise TraceError(
                f"exit angle {ang:.6f} is {best_err:.3e} rad from the nearest "
                f"parity-{parity} direction (tol {angle_tol:.3e})",
                exit_angle=ang,
            )
        return best

    def tail_time(self, z: complex, incoming: bool) -> float:
        """Travel time between z and infinity along a trajectory tail.

        ``incoming=True`` for a tail traversed from infinity down to z (an
        odd-direction start), ``incoming=False`` for a tail from z out to
        infinity (an even-direction exit).  Both values are positive for
        points on actual trajectory tails.
        """
        v = self.phi(z).real
        return v if incoming else -v

    def end_midpoint(self, end_index: int, radius: float) -> complex:
        """A point deep inside the access of end e_ell, on |z| = radius."""
        theta = (end_index - 0.5) * math.pi / (self.degree - 1)
        return radius * cmath.exp(1j * theta)

    def end_index_at(self, z: complex) -> int:
        """Index of the end whose access contains the far-field point z."""
        d = self.degree
        step = math.pi / (d - 1)
        ang = cmath.phase(z) % (2 * math.pi)
        return int(math.floor(ang / step + 1.0)) % direction_count(d)
