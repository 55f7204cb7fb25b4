"""Closed-form solution of the face functional equation.

With the factored traction eigenvalues in hand, the half-plane problem
reduces to scalar splits: the spectral crack-opening displacement and
the minus-traction are rational combinations of the plus/minus factors
and the incident traction amplitude.  In the perpendicular case with a
nonzero edge wavenumber the two tangential components stay coupled
through a constant 2-vector fixed by regularity of the apparent poles
at +-i|xi2|; everything else is componentwise.

Evaluators are pure and vectorized over xi1; solutions are immutable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .crackgeom import CrackCase, IncidentWave
from .errors import SingularGSystem
from .material import NondimMaterial
from .wienerhopf import FactorTable

_COMPONENT_TOL = 1e-14


def _solve_rank2(A: np.ndarray, b: np.ndarray, cond_limit: float = 1e8):
    """Solve a stacked (n, 2) system of rank 2 by full-pivot elimination."""
    A = np.array(A, dtype=complex)
    b = np.array(b, dtype=complex)
    n = A.shape[0]
    r1, c1 = np.unravel_index(np.argmax(np.abs(A)), A.shape)
    p1 = A[r1, c1]
    if p1 == 0.0:
        raise SingularGSystem("zero pivot in the constant-vector system")
    c2 = 1 - c1
    rows = [r for r in range(n) if r != r1]
    # eliminate column c1 from the remaining rows
    fac = A[rows, c1] / p1
    A2 = A[rows, c2] - fac * A[r1, c2]
    b2 = b[rows] - fac * b[r1]
    r2 = int(np.argmax(np.abs(A2)))
    p2 = A2[r2]
    if p2 == 0.0 or abs(p1) / abs(p2) > cond_limit:
        raise SingularGSystem(
            f"constant-vector system ill-conditioned (|p1/p2| = "
            f"{abs(p1) / max(abs(p2), 1e-300):.2e})")
    g = np.zeros(2, dtype=complex)
    g[c2] = b2[r2] / p2
    g[c1] = (b[r1] - A[r1, c2] * g[c2]) / p1
    return g


def _needs_kernels(case: CrackCase, t_hat: np.ndarray, xi2: float,
                   q_tol: float) -> bool:
    scale = max(np.max(np.abs(t_hat)), 1e-300)
    present = np.abs(t_hat) > _COMPONENT_TOL * scale
    if case is CrackCase.AXIS_PERP:
        if present[2]:
            return True
        if abs(xi2) > q_tol:
            return bool(present[0] or present[1])
        return bool(present[0])
    return bool(present[1] or present[2])


@dataclass(frozen=True)
class CODSolution:
    """Spectral crack-opening displacement and minus-traction.

    delta_u is analytic above the real axis and O(xi1^{-3/2}) at
    infinity; t_minus is analytic below.  g is the tangential coupling
    constant (perpendicular case with xi2 != 0; otherwise None).
    """

    case: CrackCase
    incident: IncidentWave
    m: NondimMaterial
    table: FactorTable
    g: np.ndarray | None
    eps: float
    q_tol: float

    # -- internals -----------------------------------------------------------

    def _denominator(self, xi1: np.ndarray) -> np.ndarray:
        return xi1 + self.incident.k_in[0] + 1j * self.eps

    def _mu_plus_at_k1(self, i: int) -> complex:
        # the minus factor at -k1_in equals the plus factor at +k1_in
        return complex(self.table.mu_plus(i, self.incident.k_in[0]))

    def _scalar_pair(self, i: int, comp: int, xi1, out_du, out_tm):
        t_i = self.incident.t_hat[comp]
        if abs(t_i) <= _COMPONENT_TOL * max(np.max(np.abs(self.incident.t_hat)), 1e-300):
            return
        d = self._denominator(xi1)
        mk = self._mu_plus_at_k1(i)
        out_du[..., comp] = 1j * t_i / (d * self.table.mu_plus(i, xi1) * mk)
        out_tm[..., comp] = 1j * t_i * (1.0 - self.table.mu_minus(i, xi1) / mk) / d

    def _tangential_coupled(self, xi1, out_du, out_tm):
        q = self.incident.xi2
        k1 = self.incident.k_in[0]
        tt = self.incident.t_hat[:2]
        d = self._denominator(xi1)
        m1k, m2k = self._mu_plus_at_k1(1), self._mu_plus_at_k1(2)
        mu1p = self.table.mu_plus(1, xi1)
        mu2p = self.table.mu_plus(2, xi1)
        mu1m = self.table.mu_minus(1, xi1)
        mu2m = self.table.mu_minus(2, xi1)
        v1 = xi1 * tt[0] + q * tt[1]
        v2 = q * tt[0] - xi1 * tt[1]
        g1, g2 = (self.g if self.g is not None else (0.0, 0.0))
        # opening displacement: -P^{-1} N+ (-i N-(-k1) P t / d + g)
        u1 = -1j * v1 / (m1k * d) + g1
        u2 = -1j * v2 / (m2k * d) + g2
        y1, y2 = u1 / mu1p, u2 / mu2p
        r2 = xi1 * xi1 + q * q
        out_du[..., 0] = -(xi1 * y1 + q * y2) / r2
        out_du[..., 1] = -(q * y1 - xi1 * y2) / r2
        # minus traction: +P^{-1} M- (-i (N-(-k1) - N-(xi)) P t / d + g)
        w1 = -1j * (1.0 / m1k - 1.0 / mu1m) * v1 / d + g1
        w2 = -1j * (1.0 / m2k - 1.0 / mu2m) * v2 / d + g2
        z1, z2 = mu1m * w1, mu2m * w2
        out_tm[..., 0] = (xi1 * z1 + q * z2) / r2
        out_tm[..., 1] = (q * z1 - xi1 * z2) / r2

    def _evaluate(self, xi1):
        xi1 = np.asarray(xi1, dtype=complex)
        du = np.zeros(xi1.shape + (3,), dtype=complex)
        tm = np.zeros(xi1.shape + (3,), dtype=complex)
        if self.case is CrackCase.AXIS_PERP:
            self._scalar_pair(3, 2, xi1, du, tm)
            tt = self.incident.t_hat[:2]
            scale = max(np.max(np.abs(self.incident.t_hat)), 1e-300)
            if np.max(np.abs(tt)) > _COMPONENT_TOL * scale:
                if abs(self.incident.xi2) > self.q_tol:
                    self._tangential_coupled(xi1, du, tm)
                else:
                    self._scalar_pair(1, 0, xi1, du, tm)
                    self._scalar_pair(2, 1, xi1, du, tm)
        else:
            for i, comp in ((1, 0), (2, 1), (3, 2)):
                self._scalar_pair(i, comp, xi1, du, tm)
        return du, tm

    # -- public API ------------------------------------------------------------

    def delta_u(self, xi1) -> np.ndarray:
        """Spectral crack-opening displacement, shape xi1.shape + (3,)."""
        return self._evaluate(xi1)[0]

    def t_minus(self, xi1) -> np.ndarray:
        """Spectral minus-traction on the crack line."""
        return self._evaluate(xi1)[1]


def _g_system(incident: IncidentWave, table: FactorTable, eps: float):
    """Stacked regularity conditions at the apparent poles +-i|xi2|."""
    q = incident.xi2
    k1 = incident.k_in[0]
    tt = incident.t_hat[:2]
    m1k = complex(table.mu_plus(1, k1))
    m2k = complex(table.mu_plus(2, k1))

    def P(z):
        return np.array([[z, q], [q, -z]], dtype=complex)

    zU, zL = 1j * abs(q), -1j * abs(q)
    NU = np.diag([1.0 / complex(table.mu_plus(1, zU)),
                  1.0 / complex(table.mu_plus(2, zU))])
    ML = np.diag([complex(table.mu_minus(1, zL)),
                  complex(table.mu_minus(2, zL))])
    NmL = np.diag([1.0 / complex(table.mu_minus(1, zL)),
                   1.0 / complex(table.mu_minus(2, zL))])
    Nmk = np.diag([1.0 / m1k, 1.0 / m2k])

    E1 = P(zU) @ NU
    rhs1 = 1j * (Nmk @ (P(zU) @ tt)) / (zU + k1 + 1j * eps)
    E2 = P(zL) @ ML
    rhs2 = 1j * ((Nmk - NmL) @ (P(zL) @ tt)) / (zL + k1 + 1j * eps)
    A = np.vstack([E1, E2])
    b = np.concatenate([E1 @ rhs1, E2 @ rhs2])
    return A, b, (E1, rhs1, E2, rhs2)


def solve(case: CrackCase, incident: IncidentWave, m: NondimMaterial,
          table: FactorTable | None = None, n_half: int = 100,
          eps: float = 1e-8, q_tol: float = 1e-12) -> CODSolution:
    """Solve the face functional equation for one incident wave.

    A factor table is built on demand; split kernels are only
    constructed for the components that actually need them, so pure
    horizontally-polarized problems run even at the isotropic point.
    """
    case = CrackCase.parse(case)
    if incident.case is not case:
        raise ValueError("incident wave belongs to a different crack case")
    needs_k = _needs_kernels(case, incident.t_hat, incident.xi2, q_tol)
    if table is None:
        table = FactorTable.build(case, incident.xi2, m, n_half=n_half,
                                  kernels=needs_k)
    else:
        if abs(table.xi2 - incident.xi2) > 1e-12:
            raise ValueError("factor table built for a different xi2")
        if table.moduli_key != m.moduli_key():
            raise ValueError("factor table built for a different material")
        if needs_k and not table.has_kernels:
            raise ValueError("factor table lacks kernels required here")

    g = None
    if case is CrackCase.AXIS_PERP and abs(incident.xi2) > q_tol:
        tt = incident.t_hat[:2]
        scale = max(np.max(np.abs(incident.t_hat)), 1e-300)
        if np.max(np.abs(tt)) > _COMPONENT_TOL * scale:
            A, b, _ = _g_system(incident, table, eps)
            g = _solve_rank2(A, b)
    return CODSolution(case=case, incident=incident, m=m, table=table,
                       g=g, eps=eps, q_tol=q_tol)


def residue_conditions(sol: CODSolution):
    """Residues of the apparent poles at +-i|xi2|; both vanish for the
    solved coupling constant."""
    if sol.case is not CrackCase.AXIS_PERP or abs(sol.incident.xi2) <= sol.q_tol:
        raise ValueError("residue conditions apply to the coupled tangential case")
    A, b, parts = _g_system(sol.incident, sol.table, sol.eps)
    E1, rhs1, E2, rhs2 = parts
    g = sol.g if sol.g is not None else np.zeros(2, dtype=complex)
    r_plus = E1 @ (g - rhs1)
    r_minus = E2 @ (g - rhs2)
    return r_plus, r_minus


def residual_grid(sol: CODSolution, n: int = 400, span: float = 3.0,
                  pad: float = 0.03) -> np.ndarray:
    """Real evaluation grid excluding branch-point, surface-pole and
    incident-pole neighborhoods."""
    bd = sol.table.bd
    scale = bd.kappa_scale()
    grid = np.linspace(-span * scale, span * scale, n)
    excl = [sol.table.rayleigh.kappa_R, -sol.table.rayleigh.kappa_R,
            -sol.incident.k_in[0]]
    for p in bd.branch_point_list():
        if abs(p.imag) < 1e-12:
            excl += [p.real, -p.real]
    keep = np.ones(grid.shape, dtype=bool)
    for e in excl:
        keep &= np.abs(grid - e) > pad * scale
    return grid[keep]


def functional_residual(sol: CODSolution, xi1_grid) -> float:
    """Max norm over the grid of the face functional-equation defect.

    The defect vector is  i t_hat/(xi1 + k1 + i0) - t_minus - tau @ delta_u;
    below 1e-6 for converged factor tables.
    """
    xi1 = np.asarray(xi1_grid, dtype=float)
    du, tm = sol._evaluate(xi1)
    tau = sp.tau_closed(xi1, sol.incident.xi2, sol.case, sol.m, sol.table.bd)
    lhs = (1j * sol.incident.t_hat
           / (xi1 + sol.incident.k_in[0] + 1j * sol.eps)[..., None])
    resid = lhs - tm - np.einsum("...ij,...j->...i", tau, du)
    return float(np.max(np.linalg.norm(resid, axis=-1)))
