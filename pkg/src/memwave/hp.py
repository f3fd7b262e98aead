"""Extended-precision spectral data and Hermitian solves via mpmath.

The moment Gram couples branch-2/3 exponentials whose time factors grow like
e^{|M| T}, so its natural scale spread exceeds what double precision can
resolve at the residual levels the terminal-state test needs; the synthesis
and the terminal evaluation therefore share one extended-precision spectral
table so that the moments the control satisfies are exactly the moments the
propagator integrates.
"""

from __future__ import annotations

import math

import mpmath as mp

__all__ = ["MpSpectrum", "hermitian_solve", "mp_norm"]


class MpSpectrum:
    """Closed-form frequency table and cubic roots at working precision dps."""

    def __init__(self, s: float, M: float, c: float, N: int, dps: int = 50):
        self.s, self.M, self.c, self.N, self.dps = float(s), float(M), float(c), int(N), int(dps)
        with mp.workdps(dps):
            s_mp, M_mp = mp.mpf(s), mp.mpf(M)
            self.kappa_pos = []
            self.rho_pos = []
            self.mu = []  # list of (mu1, mu2, mu3) per level
            for k in range(1, N + 1):
                kap = k * mp.pi / 2 - (1 - s_mp) * mp.pi / 4
                rho = kap ** (2 * s_mp)
                mu1 = M_mp - M_mp**3 / rho
                for _ in range(60):
                    f = mu1**3 + rho * mu1 - M_mp * rho
                    step = f / (3 * mu1**2 + rho)
                    mu1 -= step
                    if abs(step) < mp.mpf(10) ** (-dps + 2) * max(abs(mu1), mp.mpf(1)):
                        break
                beta = mp.sqrt(3 * (mu1 / 2) ** 2 + rho)
                mu2 = mp.mpc(-mu1 / 2, beta)
                self.kappa_pos.append(kap)
                self.rho_pos.append(rho)
                self.mu.append((mp.mpc(mu1), mu2, mp.conj(mu2)))

    def kappa(self, n: int):
        k = self.kappa_pos[abs(n) - 1]
        return k if n > 0 else -k

    def rho(self, n: int):
        return self.rho_pos[abs(n) - 1]

    def lam(self, n: int, j: int):
        mu = self.mu[abs(n) - 1][j - 1]
        return mu + mp.mpc(0, 1) * (1 if n > 0 else -1) * mp.mpf(self.c) * self.kappa_pos[abs(n) - 1]

    def nu(self, n: int, j: int):
        """Forward exponent mu - i c kappa_n (signed kappa)."""
        mu = self.mu[abs(n) - 1][j - 1]
        return mu - mp.mpc(0, 1) * mp.mpf(self.c) * self.kappa(n)


def hermitian_solve(A: mp.matrix, b: mp.matrix, refine: int = 2):
    """LU solve with iterative refinement; returns (x, max residual)."""
    x = mp.lu_solve(A, b)
    for _ in range(refine):
        r = A * x - b
        dx = mp.lu_solve(A, r)
        x = x - dx
    r = A * x - b
    res = max(abs(r[i]) for i in range(A.rows))
    return x, res


def mp_norm(v) -> float:
    return float(math.sqrt(sum(abs(x) ** 2 for x in v)))
