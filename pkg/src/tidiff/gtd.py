"""Far-field edge diffraction: cone geometry and vector coefficients.

Each incident mode produces three families of diffracted wave vectors,
parameterized by the polar angle of the in-plane slowness component.
The stationary-phase evaluation of the scattered-field transform gives
the closed-form vector coefficient; it breaks down near shadow
boundaries, cuspidal edges and conical points, which are flagged (and
can be divided out for the latter two).

Angles are degrees at the API surface, matching the common plotting
convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import christoffel as ch
from . import codsolver as cod
from . import spectral as sp
from .crackgeom import CrackCase, IncidentWave, incident_wave
from .errors import EvanescentMode, OnCrackFace
from .material import NondimMaterial

# rho/root family indices: 1 = outer quartic sheet, 2 = inner quartic
# sheet, 3 = horizontally polarized sheet.  Away from fold sectors these
# carry qSV, qP and qSH respectively.
ALPHA_OF_MODE = {ch.MODE_QSV: 1, ch.MODE_QP: 2, ch.MODE_QSH: 3}


@dataclass(frozen=True)
class GTDTolerances:
    """Transition-zone detection thresholds (nondimensional units)."""

    shadow: float = 1e-2   # scaled by the branch-point magnitude
    cusp: float = 1e-3
    cone: float = 1e-3
    on_face: float = 1e-9


@dataclass(frozen=True)
class TransitionFlags:
    near_shadow: bool = False
    near_cusp: bool = False
    near_cone: bool = False

    def any(self) -> bool:
        return self.near_shadow or self.near_cusp or self.near_cone


@dataclass(frozen=True)
class DiffractedWave:
    """Geometry of one diffracted-cone member."""

    alpha: int
    vartheta_deg: float
    rho: float
    k_diff: np.ndarray
    theta_deg: float
    flags: TransitionFlags


@dataclass(frozen=True)
class DiffractionCoefficient:
    """Vector amplitude of the edge-diffracted wave of family alpha for
    an incident wave of mode beta."""

    alpha: int
    beta: str
    wave: DiffractedWave
    D: np.ndarray
    magnitude: float


def _rho_coeffs(vartheta_rad: float, q2: float, cp: sp.CaseParams):
    c, s = math.cos(vartheta_rad), math.sin(vartheta_rad)
    c2, s2 = c * c, s * s
    D1 = cp.B1 * cp.Av * s2 * s2 - cp.B4 * c2 * s2 + cp.Ah * cp.B1 * c2 * c2
    D2 = ((2.0 * cp.Ah * q2 * cp.B1 - cp.B1 - cp.Ah) * c2
          - (cp.B4 * q2 + cp.Av + cp.B1) * s2)
    D3 = (cp.Ah * q2 - 1.0) * (cp.B1 * q2 - 1.0)
    return D1, D2, D3


def rho(alpha: int, vartheta_deg: float, xi2: float, case: CrackCase,
        m: NondimMaterial) -> float:
    """Radial slowness of the diffracted family at wave-vector angle
    vartheta; raises EvanescentMode when it does not propagate."""
    case = CrackCase.parse(case)
    cp = sp.case_params(case, m)
    th = math.radians(vartheta_deg)
    q2 = xi2 * xi2
    if alpha == 3:
        c, s = math.cos(th), math.sin(th)
        if case is CrackCase.AXIS_PERP:
            num = 1.0 - m.B3 * q2
            den = m.B3 * c * c + m.B1 * s * s
        else:
            num = 1.0
            den = m.B1 * c * c + m.B3 * s * s
        if num <= 0.0:
            raise EvanescentMode("horizontal-shear family evanescent here")
        return math.sqrt(num / den)
    if alpha not in (1, 2):
        raise ValueError("alpha must be 1, 2 or 3")
    D1, D2, D3 = _rho_coeffs(th, q2, cp)
    disc = D2 * D2 - 4.0 * D1 * D3
    if disc < 0.0:
        raise EvanescentMode("quartic families complex at this geometry")
    root = math.sqrt(disc)
    r2 = (-D2 + root) / (2.0 * D1) if alpha == 1 else (-D2 - root) / (2.0 * D1)
    if r2 <= 0.0:
        raise EvanescentMode(f"family {alpha} evanescent at this geometry")
    return math.sqrt(r2)


def _poly_partials(alpha: int, x: float, z: float, xi2: float,
                   cp: sp.CaseParams):
    if alpha == 3:
        F, Fx, Fz, *_ = sp._sh_partials(x, z, xi2, cp)
    else:
        F, Fx, Fz, *_ = sp._quartic_partials(x, z, xi2, cp)
    return F, Fx, Fz


def rho_derivative(alpha: int, vartheta_deg: float, xi2: float,
                   case: CrackCase, m: NondimMaterial) -> float:
    """d rho / d vartheta (per radian) by implicit differentiation of
    the dispersion polynomial along the slowness section."""
    case = CrackCase.parse(case)
    cp = sp.case_params(case, m)
    r = rho(alpha, vartheta_deg, xi2, case, m)
    th = math.radians(vartheta_deg)
    c, s = math.cos(th), math.sin(th)
    x, z = r * c, r * s
    _, Fx, Fz = _poly_partials(alpha, x, z, xi2, cp)
    return r * (Fx * s - Fz * c) / (Fx * c + Fz * s)


def ray_angle(alpha: int, vartheta_deg: float, xi2: float, case: CrackCase,
              m: NondimMaterial) -> float:
    """Observation (ray) polar angle of the diffracted family, degrees.

    The wavefront is the polar reciprocal of the slowness section:
    theta = vartheta - atan(rho' / rho).
    """
    r = rho(alpha, vartheta_deg, xi2, case, m)
    dr = rho_derivative(alpha, vartheta_deg, xi2, case, m)
    return (vartheta_deg - math.degrees(math.atan(dr / r))) % 360.0


def _matched_root(alpha: int, k1d: float, xi2: float, case: CrackCase,
                  m: NondimMaterial, bd, z_expected: float):
    """Root-function branch passing through the stationary point.

    In fold sectors both quartic branches are real; the derivative data
    must come from the branch the rho parameterization actually sits on.
    """
    if alpha == 3:
        return sp.xi3_root(3, k1d, xi2, case, m, bd)
    cands = [sp.xi3_root(a, k1d, xi2, case, m, bd) for a in (1, 2)]
    errs = [abs(complex(r.value) - z_expected) for r in cands]
    return cands[int(np.argmin(errs))]


def diffraction_coefficient(alpha: int, incident: IncidentWave,
                            vartheta_deg: float, sol: cod.CODSolution,
                            case: CrackCase | None = None,
                            m: NondimMaterial | None = None,
                            tol: GTDTolerances = GTDTolerances()
                            ) -> DiffractionCoefficient:
    """Closed-form vector diffraction coefficient at one cone angle.

    Transition zones are reported through the flags on the result (the
    value is still computed); observation exactly along a crack face is
    refused, and evanescent families raise EvanescentMode.
    """
    case = CrackCase.parse(case) if case is not None else sol.case
    m = m if m is not None else sol.m
    if incident is not sol.incident and abs(incident.xi2 - sol.incident.xi2) > 1e-12:
        raise ValueError("incident wave does not match the solution")
    bd = sol.table.bd
    q = incident.xi2

    r = rho(alpha, vartheta_deg, q, case, m)
    th = math.radians(vartheta_deg)
    k1d = -r * math.cos(th)
    k_diff = np.array([k1d, q, -r * math.sin(th)])

    theta_deg = ray_angle(alpha, vartheta_deg, q, case, m)
    sin_th = math.sin(math.radians(theta_deg))
    if abs(sin_th) < tol.on_face:
        raise OnCrackFace(f"observation on a crack face (theta={theta_deg:.3f})")
    sgn = 1.0 if sin_th > 0.0 else -1.0

    root = _matched_root(alpha, k1d, q, case, m, bd, r * abs(math.sin(th)))
    d2 = complex(root.d2)
    lam3 = float(sp.lam_xi3_closed(k_diff, alpha, case, m))

    S = sp.s_matrix_array(k_diff.astype(complex), case, m)
    kernel = 1j * sp.residue_dyad(k_diff.astype(complex), alpha, case, m) @ S.T

    du = sol.delta_u(np.float64(k1d))
    core = kernel @ du
    prefac = -sgn / np.sqrt(2j * np.pi * abs(sin_th) * d2)
    D = prefac * core

    scale = bd.kappa_scale()
    flags = TransitionFlags(
        near_shadow=abs(k1d + incident.k_in[0]) < tol.shadow * scale,
        near_cusp=abs(d2) < tol.cusp,
        near_cone=abs(lam3) < tol.cone,
    )
    wave = DiffractedWave(alpha=alpha, vartheta_deg=float(vartheta_deg),
                          rho=r, k_diff=k_diff, theta_deg=theta_deg,
                          flags=flags)
    return DiffractionCoefficient(alpha=alpha, beta=incident.mode, wave=wave,
                                  D=D, magnitude=float(np.linalg.norm(D)))


def regularized_coefficient(level: str, alpha: int, incident: IncidentWave,
                            vartheta_deg: float, sol: cod.CODSolution,
                            tol: GTDTolerances = GTDTolerances()
                            ) -> DiffractionCoefficient:
    """Coefficient with the cusp (and optionally cone) singular factors
    removed: level 'cusp' multiplies by the stationary-curvature root,
    'cusp_and_cone' additionally by the vertical eigenvalue derivative.
    Finite at cuspidal edges / conical points; only shadow boundaries
    remain singular.
    """
    if level not in ("cusp", "cusp_and_cone"):
        raise ValueError("level must be 'cusp' or 'cusp_and_cone'")
    case, m = sol.case, sol.m
    bd = sol.table.bd
    q = incident.xi2
    r = rho(alpha, vartheta_deg, q, case, m)
    th = math.radians(vartheta_deg)
    k1d = -r * math.cos(th)
    k_diff = np.array([k1d, q, -r * math.sin(th)])
    theta_deg = ray_angle(alpha, vartheta_deg, q, case, m)
    sin_th = math.sin(math.radians(theta_deg))
    if abs(sin_th) < tol.on_face:
        raise OnCrackFace(f"observation on a crack face (theta={theta_deg:.3f})")
    sgn = 1.0 if sin_th > 0.0 else -1.0

    S = sp.s_matrix_array(k_diff.astype(complex), case, m)
    kernel = 1j * sp.residue_dyad(k_diff.astype(complex), alpha, case, m) @ S.T
    core = kernel @ sol.delta_u(np.float64(k1d))
    D = -sgn * core
    if level == "cusp_and_cone":
        D = D * float(sp.lam_xi3_closed(k_diff, alpha, case, m))

    root = _matched_root(alpha, k1d, q, case, m, bd, r * abs(math.sin(th)))
    lam3 = float(sp.lam_xi3_closed(k_diff, alpha, case, m))
    flags = TransitionFlags(
        near_shadow=abs(k1d + incident.k_in[0]) < tol.shadow * bd.kappa_scale(),
        near_cusp=abs(complex(root.d2)) < tol.cusp,
        near_cone=abs(lam3) < tol.cone,
    )
    wave = DiffractedWave(alpha=alpha, vartheta_deg=float(vartheta_deg),
                          rho=r, k_diff=k_diff, theta_deg=theta_deg, flags=flags)
    return DiffractionCoefficient(alpha=alpha, beta=incident.mode, wave=wave,
                                  D=D, magnitude=float(np.linalg.norm(D)))


@dataclass(frozen=True)
class SweepRow:
    alpha: int
    beta: str
    vartheta_deg: float
    theta_deg: float | None
    D: np.ndarray | None
    magnitude: float | None
    flags: TransitionFlags
    evanescent: bool
    on_face: bool = False


@dataclass(frozen=True)
class SweepResult:
    rows: tuple

    def magnitudes(self) -> np.ndarray:
        return np.array([r.magnitude if r.magnitude is not None else np.nan
                         for r in self.rows])

    def varthetas(self) -> np.ndarray:
        return np.array([r.vartheta_deg for r in self.rows])


def sweep(alpha: int, beta: str, incident: IncidentWave, vartheta_grid,
          sol: cod.CODSolution, tol: GTDTolerances = GTDTolerances()
          ) -> SweepResult:
    """Coefficient sweep over cone angles; evanescent angles are
    reported as absent rather than zero."""
    if beta != incident.mode:
        raise ValueError("beta label does not match the incident wave")
    rows = []
    for v in np.asarray(vartheta_grid, dtype=float):
        try:
            dc = diffraction_coefficient(alpha, incident, float(v), sol, tol=tol)
        except EvanescentMode:
            rows.append(SweepRow(alpha, beta, float(v), None, None, None,
                                 TransitionFlags(), evanescent=True))
            continue
        except OnCrackFace:
            rows.append(SweepRow(alpha, beta, float(v),
                                 None, None, None, TransitionFlags(),
                                 evanescent=False, on_face=True))
            continue
        rows.append(SweepRow(alpha, beta, float(v), dc.wave.theta_deg, dc.D,
                             dc.magnitude, dc.wave.flags, evanescent=False))
    return SweepResult(rows=tuple(rows))


SWEEP_HEADER = ("alpha,beta,vartheta_deg,theta_deg,reD1,imD1,reD2,imD2,"
                "reD3,imD3,magD,flag_shadow,flag_cusp,flag_cone,evanescent")


def write_sweep_csv(path_or_file, results) -> None:
    """Write one or more SweepResults in the fixed CSV layout."""
    if isinstance(results, SweepResult):
        results = [results]

    def emit(f):
        f.write(SWEEP_HEADER + "\n")
        for res in results:
            for r in res.rows:
                if r.D is None:
                    dfields = [""] * 7
                    theta = "" if r.theta_deg is None else f"{r.theta_deg:.12g}"
                else:
                    dfields = [f"{r.D[0].real:.12g}", f"{r.D[0].imag:.12g}",
                               f"{r.D[1].real:.12g}", f"{r.D[1].imag:.12g}",
                               f"{r.D[2].real:.12g}", f"{r.D[2].imag:.12g}",
                               f"{r.magnitude:.12g}"]
                    theta = f"{r.theta_deg:.12g}"
                f.write(",".join([
                    str(r.alpha), r.beta, f"{r.vartheta_deg:.12g}", theta,
                    *dfields,
                    str(int(r.flags.near_shadow)), str(int(r.flags.near_cusp)),
                    str(int(r.flags.near_cone)), str(int(r.evanescent)),
                ]) + "\n")

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", encoding="utf-8") as f:
            emit(f)


def shadow_boundary_angles(alpha: int, incident: IncidentWave,
                           case: CrackCase, m: NondimMaterial,
                           n_scan: int = 3600) -> list[float]:
    """Cone angles where the stationary point hits the incident pole
    (light-shadow boundaries), found by a sign scan plus refinement."""
    case = CrackCase.parse(case)
    q = incident.xi2
    k1_in = incident.k_in[0]

    def h(v):
        try:
            r = rho(alpha, v, q, case, m)
        except EvanescentMode:
            return np.nan
        return -r * math.cos(math.radians(v)) + k1_in

    vs = np.linspace(0.0, 360.0, n_scan, endpoint=False)
    hs = np.array([h(v) for v in vs])
    out = []
    for i in range(n_scan):
        j = (i + 1) % n_scan
        a, b = hs[i], hs[j]
        if np.isnan(a) or np.isnan(b) or a * b > 0.0:
            continue
        va, vb = vs[i], vs[i] + 360.0 / n_scan
        try:
            out.append(brentq(h, va, vb, xtol=1e-10) % 360.0)
        except ValueError:
            continue
    return sorted(out)


def setup(case: CrackCase, mode: str, phi_in: float, theta_in: float,
          m: NondimMaterial, n_half: int = 100) -> cod.CODSolution:
    """Convenience: incident wave + factor tables + face solution."""
    inc = incident_wave(case, mode, phi_in, theta_in, m)
    return cod.solve(case, inc, m, n_half=n_half)
