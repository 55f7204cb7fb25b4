"""Complex-plane machinery at fixed edge wavenumber xi2.

Everything here lives on the complex xi1 plane for one crack case and
one value of the edge-parallel transform parameter xi2: branch points
of the vertical-wavenumber radicals, the three dispersion roots
xi3(xi1; xi2) with the decaying-branch convention, the Rayleigh pole,
the diagonalizing eigenvalues of the face-traction kernel, and the
residue form of the Green traction tensors.

The in-plane-axis case reuses every formula with the horizontal and
axial quartic moduli exchanging roles and xi2 fixed at zero, so all
kernels are written in terms of the pair (Ah, Av).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import christoffel as ch
from .crackgeom import CrackCase, rotation_matrix
from .errors import (NoRayleighRoot, OrderingViolation, PoleCoalescence,
                     UnsupportedIncidence)
from .material import NondimMaterial

_DEGEN_TOL = 1e-10
NEAR_BRANCH_TOL = 1e-4


@dataclass(frozen=True)
class CaseParams:
    """Quartic moduli in the role they play for a crack case."""

    case: CrackCase
    Ah: float   # multiplies the in-plane (crack-frame horizontal) squares
    Av: float   # multiplies the vertical squares
    A13: float
    B1: float
    B3: float

    @property
    def B4(self) -> float:
        return self.A13**2 + 2.0 * self.A13 * self.B1 - self.Ah * self.Av

    @property
    def l0(self) -> float:
        return self.Ah * self.Av - self.A13**2


def case_params(case: CrackCase, m: NondimMaterial) -> CaseParams:
    case = CrackCase.parse(case)
    if case is CrackCase.AXIS_PERP:
        return CaseParams(case, m.A11, m.A33, m.A13, m.B1, m.B3)
    return CaseParams(case, m.A33, m.A11, m.A13, m.B1, m.B3)


def _check_xi2(case: CrackCase, xi2: float) -> float:
    if CrackCase.parse(case) is CrackCase.AXIS_IN_PLANE and abs(xi2) > 1e-14:
        raise UnsupportedIncidence("axis-in-plane case is solved at xi2 = 0 only")
    return float(xi2)


def _sqrt_maybe_imag(x: float) -> complex:
    """Principal sqrt returning a real or purely imaginary number."""
    if x >= 0.0:
        return complex(np.sqrt(x), 0.0)
    return complex(0.0, np.sqrt(-x))


@dataclass(frozen=True)
class BranchData:
    """Branch points and quartet constants for one (case, xi2).

    Each kappa is real or purely imaginary.  kappa4 is present for the
    perpendicular case only.  When the material sits at the isotropic
    point the quartet constants C0, C3 degenerate (0/0) and
    quartet_degenerate is set; kappa0/kappa3 are then None.
    """

    case: CrackCase
    xi2: float
    kappa0: complex | None
    kappa1: complex
    kappa2: complex
    kappa3: complex | None
    kappa4: complex | None
    C0: float | None
    C3: float | None
    Dconst: float | None
    quartet_degenerate: bool

    def branch_point_list(self) -> list[complex]:
        """All finite branch points in the upper-right representatives."""
        pts = [self.kappa1, self.kappa2]
        if self.kappa3 is not None:
            pts.append(self.kappa3)
        if self.kappa4 is not None:
            pts.append(self.kappa4)
        if self.kappa0 is not None:
            pts.append(1j * self.kappa0)
        return pts

    def kappa_scale(self) -> float:
        vals = [abs(p) for p in self.branch_point_list()]
        return max(vals) if vals else 1.0


def _quartet_constants(cp: CaseParams):
    """(C0, C3, D) of the extra quartet branch points, or Nones at the
    isotropic degeneracy where D -> 0."""
    Ah, Av, A13, B1 = cp.Ah, cp.Av, cp.A13, cp.B1
    d2 = cp.l0 * ((2.0 * B1 + A13) ** 2 - Ah * Av)
    scale = max(1.0, Ah * Av) ** 2
    if abs(d2) < _DEGEN_TOL * scale:
        return None, None, None
    if d2 < 0.0:
        raise OrderingViolation(
            "quartet-constant discriminant negative; closed-form branch "
            "points do not exist for this material")
    D = np.sqrt(d2)
    inner = A13**2 - Ah * Av + B1 * (Ah + 2.0 * A13 + Av)
    if inner < 0.0:
        raise OrderingViolation("quartet-constant inner radicand negative")
    term1 = 2.0 * np.sqrt(Av * B1) * (B1 + A13) * np.sqrt(inner)
    term2 = (A13 * (2.0 * B1 + A13) * (B1 + Av)
             + Av * (2.0 * B1**2 + Ah * B1 - Ah * Av))
    r0, r3 = term1 - term2, term1 + term2
    if r0 < 0.0 or r3 < 0.0:
        raise OrderingViolation("quartet-constant radicand negative")
    return float(np.sqrt(r0) / D), float(np.sqrt(r3) / D), float(D)


def branch_points(case: CrackCase, xi2: float, m: NondimMaterial) -> BranchData:
    """Branch points of the vertical-wavenumber radicals at fixed xi2.

    Validates the ordering assumptions the scalar factorization relies
    on and raises OrderingViolation when they fail.
    """
    case = CrackCase.parse(case)
    xi2 = _check_xi2(case, xi2)
    cp = case_params(case, m)
    q2 = xi2 * xi2

    C0, C3, D = _quartet_constants(cp)
    degenerate = C0 is None

    k1 = _sqrt_maybe_imag(1.0 / cp.Ah - q2)
    k2 = _sqrt_maybe_imag(1.0 / cp.B1 - q2)
    k4 = _sqrt_maybe_imag(1.0 / cp.B3 - q2) if case is CrackCase.AXIS_PERP else None
    if degenerate:
        k0 = k3 = None
    else:
        k0 = complex(np.sqrt(C0**2 + q2), 0.0)
        k3 = _sqrt_maybe_imag(C3**2 - q2)

    bd = BranchData(case=case, xi2=xi2, kappa0=k0, kappa1=k1, kappa2=k2,
                    kappa3=k3, kappa4=k4, C0=C0, C3=C3, Dconst=D,
                    quartet_degenerate=degenerate)
    _validate_ordering(bd)
    if not degenerate:
        _validate_numerator_zeros(bd, cp)
    return bd


def _validate_ordering(bd: BranchData) -> None:
    tol = 1e-12
    if bd.case is CrackCase.AXIS_IN_PLANE:
        ks = (bd.kappa1, bd.kappa2) + ((bd.kappa3,) if bd.kappa3 is not None else ())
        reals = [k.real for k in ks]
        if any(abs(k.imag) > tol for k in ks):
            raise OrderingViolation("in-plane case needs real kappa1..kappa3")
        if not all(reals[i] < reals[i + 1] + tol for i in range(len(reals) - 1)):
            raise OrderingViolation(
                f"in-plane ordering kappa1 < kappa2 < kappa3 fails: {reals}")
        return
    chain = [bd.kappa1, bd.kappa2]
    if bd.kappa3 is not None:
        chain.insert(2, bd.kappa3)
        chain = [bd.kappa1, bd.kappa2, bd.kappa3, bd.kappa4]
    else:
        chain = [bd.kappa1, bd.kappa2, bd.kappa4]
    re = [k.real for k in chain]
    im = [k.imag for k in chain]
    if not all(re[i] <= re[i + 1] + tol for i in range(len(re) - 1)):
        raise OrderingViolation(f"real-part ordering fails: {re}")
    if not all(im[i] >= im[i + 1] - tol for i in range(len(im) - 1)):
        raise OrderingViolation(f"imaginary-part ordering fails: {im}")
    if bd.kappa0 is not None and im[0] > bd.kappa0.real + tol:
        raise OrderingViolation("Im kappa1 exceeds kappa0")


def _validate_numerator_zeros(bd: BranchData, cp: CaseParams) -> None:
    """The quartet constants must kill the root numerators at +-kappa3
    and +-i*kappa0; this catches transcription errors cheaply."""
    q2 = bd.xi2**2
    scale = max(1.0, cp.Ah * cp.Av) * max(1.0, bd.kappa_scale() ** 2)

    def nfun(s, sign):  # s = xi1^2; numerator with gamma1*gamma2 resolved in s
        perp2 = s + q2
        g1g2 = np.sqrt(complex(1.0 / cp.Ah - perp2)) * np.sqrt(complex(1.0 / cp.B1 - perp2))
        return (cp.B4 * perp2 + cp.B1 + cp.Av
                + sign * 2.0 * cp.B1 * np.sqrt(cp.Ah * cp.Av) * g1g2)

    r1 = nfun(complex(bd.kappa3) ** 2, +1.0)
    r2 = nfun(-complex(bd.kappa0) ** 2, -1.0)
    if abs(r1) > 1e-8 * scale or abs(r2) > 1e-8 * scale:
        raise OrderingViolation(
            f"quartet constants inconsistent with root numerators: {r1}, {r2}")


def gamma_ell(xi1, kappa) -> np.ndarray:
    """Radical with branch points +-kappa and the absorbing convention.

    For real kappa this is the principal sqrt(kappa^2 - xi1^2), whose
    on-axis values beyond the branch points sit on the positive
    imaginary side; for purely imaginary kappa the cut joins the branch
    points through infinity and the real axis stays regular.
    """
    xi1 = np.asarray(xi1, dtype=complex)
    kappa = complex(kappa)
    if abs(kappa.imag) <= 1e-14 * max(1.0, abs(kappa)):
        return np.sqrt(kappa.real**2 - xi1 * xi1 + 0j)
    return 1j * np.sqrt(kappa.imag**2 + xi1 * xi1 + 0j)


def gamma_zero(xi1, kappa0: float) -> np.ndarray:
    """Radical with branch points +-i*kappa0 (kappa0 real)."""
    xi1 = np.asarray(xi1, dtype=complex)
    return np.sqrt(kappa0**2 + xi1 * xi1 + 0j)


def gamma(ell: int, xi1, bd: BranchData) -> np.ndarray:
    """gamma_ell(xi1) for ell = 0..4 from precomputed branch data."""
    if ell == 0:
        if bd.kappa0 is None:
            raise OrderingViolation("kappa0 undefined (degenerate quartet)")
        return gamma_zero(xi1, bd.kappa0.real)
    kap = {1: bd.kappa1, 2: bd.kappa2, 3: bd.kappa3, 4: bd.kappa4}[ell]
    if kap is None:
        raise OrderingViolation(f"kappa{ell} undefined for this case/material")
    return gamma_ell(xi1, kap)


def gamma_plus(xi1, branch_point) -> np.ndarray:
    """Half-plane factor (bp + xi1)^(1/2), analytic above the real axis.

    branch_point is kappa_ell (possibly imaginary) or i*kappa0.
    """
    xi1 = np.asarray(xi1, dtype=complex)
    return np.sqrt(complex(branch_point) + xi1)


# ---------------------------------------------------------------------------
# dispersion roots


def _root_halves(xi1, xi2, cp: CaseParams, bd: BranchData):
    """The two building blocks whose sum/difference are the quartic roots."""
    xi1 = np.asarray(xi1, dtype=complex)
    perp2 = xi1 * xi1 + xi2 * xi2
    g1 = gamma_ell(xi1, bd.kappa1)
    g2 = gamma_ell(xi1, bd.kappa2)
    core = cp.B4 * perp2 + cp.B1 + cp.Av
    cross = 2.0 * cp.B1 * np.sqrt(cp.Ah * cp.Av) * g1 * g2
    den = 2.0 * np.sqrt(cp.B1 * cp.Av)
    if bd.quartet_degenerate:
        return np.sqrt(core + cross) / den, np.sqrt(core - cross) / den
    g3 = gamma_ell(xi1, bd.kappa3)
    g0 = gamma_zero(xi1, bd.kappa0.real)
    half1 = g3 * np.sqrt((core + cross) / (g3 * g3)) / den
    half2 = g0 * np.sqrt((core - cross) / (g0 * g0)) / den
    return half1, half2


def _quartic_partials(x, z, xi2, cp: CaseParams):
    """First and second partials of the quartic dispersion polynomial."""
    perp2 = x * x + xi2 * xi2
    w = (cp.A13 + cp.B1) ** 2
    u = cp.Ah * perp2 + cp.B1 * z * z - 1.0
    v = cp.B1 * perp2 + cp.Av * z * z - 1.0
    F = u * v - w * perp2 * z * z
    gx = cp.Ah * v + cp.B1 * u - w * z * z
    gz = cp.B1 * v + cp.Av * u - w * perp2
    Fx = 2.0 * x * gx
    Fz = 2.0 * z * gz
    Fxx = 2.0 * gx + 8.0 * cp.Ah * cp.B1 * x * x
    Fzz = 2.0 * gz + 8.0 * cp.Av * cp.B1 * z * z
    Fxz = -4.0 * x * z * cp.B4
    return F, Fx, Fz, Fxx, Fzz, Fxz


def _sh_partials(x, z, xi2, cp: CaseParams):
    if cp.case is CrackCase.AXIS_PERP:
        perp2 = x * x + xi2 * xi2
        F = cp.B3 * perp2 + cp.B1 * z * z - 1.0
        return F, 2.0 * cp.B3 * x, 2.0 * cp.B1 * z, 2.0 * cp.B3, 2.0 * cp.B1, 0.0
    F = cp.B1 * x * x + cp.B3 * z * z - 1.0
    return F, 2.0 * cp.B1 * x, 2.0 * cp.B3 * z, 2.0 * cp.B1, 2.0 * cp.B3, 0.0


def dispersion_poly(alpha: int, x, z, xi2, case: CrackCase, m: NondimMaterial):
    """Crack-frame dispersion polynomial for root family alpha at (x, z)."""
    cp = case_params(case, m)
    if alpha == 3:
        return _sh_partials(x, z, xi2, cp)[0]
    return _quartic_partials(x, z, xi2, cp)[0]


@dataclass(frozen=True)
class Xi3Root:
    """A vertical-wavenumber root and its first two xi1-derivatives.

    value has nonnegative imaginary part (decaying upward continuation);
    near_branch_point flags evaluation points where the derivatives are
    untrustworthy.
    """

    alpha: int
    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    near_branch_point: np.ndarray


def xi3_root(alpha: int, xi1, xi2: float, case: CrackCase,
             m: NondimMaterial, bd: BranchData | None = None) -> Xi3Root:
    """Root xi3^(alpha)(xi1; xi2) of the dispersion relation, alpha = 1..3.

    Derivatives come from implicit differentiation of the dispersion
    polynomial, which stays accurate where the nested closed form
    cancels badly.
    """
    case = CrackCase.parse(case)
    xi2 = _check_xi2(case, xi2)
    if bd is None:
        bd = branch_points(case, xi2, m)
    cp = case_params(case, m)
    xi1 = np.asarray(xi1, dtype=complex)

    if alpha in (1, 2):
        h1, h2 = _root_halves(xi1, xi2, cp, bd)
        val = h1 + h2 if alpha == 1 else h1 - h2
        _, Fx, Fz, Fxx, Fzz, Fxz = _quartic_partials(xi1, val, xi2, cp)
        bps = [bd.kappa1, bd.kappa2] + ([bd.kappa3] if bd.kappa3 is not None else []) \
            + ([1j * bd.kappa0] if bd.kappa0 is not None else [])
    elif alpha == 3:
        if case is CrackCase.AXIS_PERP:
            val = np.sqrt(cp.B3 / cp.B1) * gamma_ell(xi1, bd.kappa4)
            bps = [bd.kappa4]
        else:
            val = np.sqrt(cp.B1 / cp.B3) * gamma_ell(xi1, bd.kappa2)
            bps = [bd.kappa2]
        _, Fx, Fz, Fxx, Fzz, Fxz = _sh_partials(xi1, val, xi2, cp)
    else:
        raise ValueError("alpha must be 1, 2 or 3")

    with np.errstate(divide="ignore", invalid="ignore"):
        d1 = -Fx / Fz
        d2 = -(Fxx + 2.0 * Fxz * d1 + Fzz * d1 * d1) / Fz
    near = np.zeros(xi1.shape, dtype=bool)
    for bp in bps:
        near |= np.abs(xi1 - bp) < NEAR_BRANCH_TOL
        near |= np.abs(xi1 + bp) < NEAR_BRANCH_TOL
    return Xi3Root(alpha=alpha, value=val, d1=d1, d2=d2, near_branch_point=near)


def write_root_loci(path, case: CrackCase, xi2: float, m: NondimMaterial,
                    xi1_grid) -> None:
    """CSV export of the three root loci: alpha,xi1,re_xi3,im_xi3."""
    bd = branch_points(case, xi2, m)
    with open(path, "w", encoding="utf-8") as f:
        f.write("alpha,xi1,re_xi3,im_xi3\n")
        for alpha in (1, 2, 3):
            val = xi3_root(alpha, np.asarray(xi1_grid, dtype=float), xi2,
                           case, m, bd).value
            for x, v in zip(np.asarray(xi1_grid, dtype=float), val):
                f.write(f"{alpha},{x:.12g},{v.real:.12g},{v.imag:.12g}\n")


# ---------------------------------------------------------------------------
# Rayleigh pole


@dataclass(frozen=True)
class RayleighData:
    """Surface-wave pole at fixed xi2.

    kappa_R is the positive root location; the outgoing wave belongs to
    the pole at -kappa_R (outgoing_pole).  k_R**2 = kappa_R**2 + xi2**2
    is a material constant of the case.
    """

    case: CrackCase
    xi2: float
    kappa_R: float
    k_R: float

    @property
    def outgoing_pole(self) -> float:
        return -self.kappa_R


def rayleigh_function(xi1, xi2: float, case: CrackCase, m: NondimMaterial) -> np.ndarray:
    """The surface-wave secular function on the xi1 plane."""
    cp = case_params(case, m)
    xi1 = np.asarray(xi1, dtype=complex)
    q2 = xi2 * xi2
    g1 = gamma_ell(xi1, _sqrt_maybe_imag(1.0 / cp.Ah - q2))
    g2 = gamma_ell(xi1, _sqrt_maybe_imag(1.0 / cp.B1 - q2))
    return (-cp.l0 * (xi1 * xi1 + q2) + cp.Av
            + np.sqrt(cp.Ah * cp.Av) * g1 / g2)


def _rayleigh_s_form(s, cp: CaseParams) -> float:
    """Secular function in s = squared total wavenumber, s > 1/B1."""
    return float(-cp.l0 * s + cp.Av
                 + np.sqrt(cp.Ah * cp.Av)
                 * np.sqrt(s - 1.0 / cp.Ah) / np.sqrt(s - 1.0 / cp.B1))


def rayleigh_pole(xi2: float, case: CrackCase, m: NondimMaterial,
                  tol: float = 1e-14) -> RayleighData:
    """Locate the surface-wave pole; raises NoRayleighRoot on failure."""
    case = CrackCase.parse(case)
    xi2 = _check_xi2(case, xi2)
    cp = case_params(case, m)
    s_shear = 1.0 / cp.B1
    lo = s_shear * (1.0 + 1e-12)
    while _rayleigh_s_form(lo, cp) < 0.0:
        lo = s_shear * (1.0 + (lo / s_shear - 1.0) * 0.01)
        if lo / s_shear - 1.0 < 1e-300:
            raise NoRayleighRoot("secular function negative at the shear line")
    hi = s_shear * 2.0
    for _ in range(60):
        if _rayleigh_s_form(hi, cp) < 0.0:
            break
        hi *= 2.0
    else:
        raise NoRayleighRoot("no sign change of the secular function")
    s = brentq(_rayleigh_s_form, lo, hi, args=(cp,), xtol=tol, rtol=8.9e-16)
    k_R = float(np.sqrt(s))
    if k_R**2 <= xi2**2:
        raise NoRayleighRoot("edge wavenumber exceeds the surface wavenumber")
    return RayleighData(case=case, xi2=xi2, kappa_R=float(np.sqrt(k_R**2 - xi2**2)),
                        k_R=k_R)


# ---------------------------------------------------------------------------
# traction-kernel eigenvalues and closed-form kernel


def mu_eigenvalues(xi1, xi2: float, case: CrackCase, m: NondimMaterial,
                   bd: BranchData | None = None):
    """Eigenvalues (mu1, mu2, mu3) of the face-traction kernel plus the
    tangential mixing matrix P (perpendicular case; None for in-plane).

    P is symmetric with P @ P = (xi1^2 + xi2^2) I, so P^-1 = P / (xi1^2+xi2^2).
    """
    case = CrackCase.parse(case)
    xi2 = _check_xi2(case, xi2)
    if bd is None:
        bd = branch_points(case, xi2, m)
    cp = case_params(case, m)
    xi1 = np.asarray(xi1, dtype=complex)
    g1 = gamma_ell(xi1, bd.kappa1)
    g2 = gamma_ell(xi1, bd.kappa2)
    R = (-cp.l0 * (xi1 * xi1 + xi2 * xi2) + cp.Av
         + np.sqrt(cp.Ah * cp.Av) * g1 / g2)
    h1, _ = _root_halves(xi1, xi2, cp, bd)
    ratio = np.sqrt(cp.Av / cp.Ah) * g2 / g1
    mu_wh = 1j * R / (4.0 * cp.Av * h1)          # the kernel factorized via splits
    if case is CrackCase.AXIS_PERP:
        mu1 = mu_wh
        mu2 = 0.5j * np.sqrt(m.B1 * m.B3) * gamma_ell(xi1, bd.kappa4)
        mu3 = ratio * mu_wh
        P = np.empty(xi1.shape + (2, 2), dtype=complex)
        P[..., 0, 0] = xi1
        P[..., 0, 1] = xi2
        P[..., 1, 0] = xi2
        P[..., 1, 1] = -xi1
        return mu1, mu2, mu3, P
    mu1 = 0.5j * np.sqrt(m.B1 * m.B3) * gamma_ell(xi1, bd.kappa2)
    mu3 = mu_wh
    mu2 = ratio * mu_wh
    return mu1, mu2, mu3, None


def tau_closed(xi1, xi2: float, case: CrackCase, m: NondimMaterial,
               bd: BranchData | None = None) -> np.ndarray:
    """Closed (diagonalized) form of the face-traction kernel, (..., 3, 3)."""
    case = CrackCase.parse(case)
    mu1, mu2, mu3, P = mu_eigenvalues(xi1, xi2, case, m, bd)
    xi1 = np.asarray(xi1, dtype=complex)
    out = np.zeros(xi1.shape + (3, 3), dtype=complex)
    if case is CrackCase.AXIS_PERP:
        denom = xi1 * xi1 + xi2 * xi2
        out[..., 0, 0] = (xi1 * xi1 * mu1 + xi2 * xi2 * mu2) / denom
        out[..., 1, 1] = (xi2 * xi2 * mu1 + xi1 * xi1 * mu2) / denom
        out[..., 0, 1] = out[..., 1, 0] = xi1 * xi2 * (mu1 - mu2) / denom
        out[..., 2, 2] = mu3
    else:
        out[..., 0, 0] = mu1
        out[..., 1, 1] = mu2
        out[..., 2, 2] = mu3
    return out


# ---------------------------------------------------------------------------
# residue form of the Green traction tensors


def _adjugate3(a: np.ndarray) -> np.ndarray:
    """Adjugate of stacked 3x3 matrices."""
    out = np.empty_like(a)
    out[..., 0, 0] = a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1]
    out[..., 0, 1] = a[..., 0, 2] * a[..., 2, 1] - a[..., 0, 1] * a[..., 2, 2]
    out[..., 0, 2] = a[..., 0, 1] * a[..., 1, 2] - a[..., 0, 2] * a[..., 1, 1]
    out[..., 1, 0] = a[..., 1, 2] * a[..., 2, 0] - a[..., 1, 0] * a[..., 2, 2]
    out[..., 1, 1] = a[..., 0, 0] * a[..., 2, 2] - a[..., 0, 2] * a[..., 2, 0]
    out[..., 1, 2] = a[..., 0, 2] * a[..., 1, 0] - a[..., 0, 0] * a[..., 1, 2]
    out[..., 2, 0] = a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0]
    out[..., 2, 1] = a[..., 0, 1] * a[..., 2, 0] - a[..., 0, 0] * a[..., 2, 1]
    out[..., 2, 2] = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    return out


def s_matrix_array(xi_crack: np.ndarray, case: CrackCase, m: NondimMaterial) -> np.ndarray:
    """Traction operator S(xi'), vectorized: xi_crack (..., 3) -> (..., 3, 3)."""
    case = CrackCase.parse(case)
    Q = rotation_matrix(case)
    xi_m = xi_crack @ Q  # medium components, (Q^T v)_i = v_j Q_ji
    x1, x2, x3 = xi_m[..., 0], xi_m[..., 1], xi_m[..., 2]
    S = np.zeros(xi_m.shape[:-1] + (3, 3), dtype=xi_m.dtype)
    if case is CrackCase.AXIS_PERP:
        S[..., 0, 0] = m.B1 * x3
        S[..., 0, 2] = m.B1 * x1
        S[..., 1, 1] = m.B1 * x3
        S[..., 1, 2] = m.B1 * x2
        S[..., 2, 0] = m.A13 * x1
        S[..., 2, 1] = m.A13 * x2
        S[..., 2, 2] = m.A33 * x3
    else:
        S[..., 0, 0] = m.B3 * x2
        S[..., 0, 1] = m.B3 * x1
        S[..., 1, 0] = m.A12 * x1
        S[..., 1, 1] = m.A11 * x2
        S[..., 1, 2] = m.A13 * x3
        S[..., 2, 1] = m.B1 * x3
        S[..., 2, 2] = m.B1 * x2
    return S


def _det_dz(x, z, xi2, cp: CaseParams):
    """d/dz of the full crack-frame characteristic polynomial at lam = 1."""
    Fq, _, Fqz, *_ = _quartic_partials(x, z, xi2, cp)
    Fs, _, Fsz, *_ = _sh_partials(x, z, xi2, cp)
    return Fq * Fsz + Fs * Fqz


def _family_null_vector(xi_m: np.ndarray, alpha: int, m: NondimMaterial) -> np.ndarray:
    """Unnormalized eigenvector of the acoustic matrix at eigenvalue 1,
    medium components, for the quartic (alpha 1, 2) or horizontal
    (alpha 3) family."""
    x1, x2, x3 = xi_m[..., 0], xi_m[..., 1], xi_m[..., 2]
    V = np.empty_like(xi_m)
    if alpha == 3:
        V[..., 0] = -x2
        V[..., 1] = x1
        V[..., 2] = 0.0
    else:
        V[..., 0] = (m.B1 + m.A13) * x1 * x3
        V[..., 1] = (m.B1 + m.A13) * x2 * x3
        V[..., 2] = 1.0 - m.A11 * (x1 * x1 + x2 * x2) - m.B1 * x3 * x3
    return V


def residue_dyad(xi_crack: np.ndarray, alpha: int, case: CrackCase,
                 m: NondimMaterial) -> np.ndarray:
    """Polarization dyad over the vertical eigenvalue derivative,
    p p^T / lam_xi3, at points xi_crack (..., 3) on sheet alpha.

    Assembled from the adjugate of the acoustic matrix over the
    characteristic-derivative; where the other determinant factor also
    vanishes (sheet crossings, the isotropic limit) it switches to the
    family null vector with the closed-form eigenvalue derivative.
    Raises PoleCoalescence only if both routes degenerate.
    """
    case = CrackCase.parse(case)
    cp = case_params(case, m)
    Q = rotation_matrix(case)
    xi_m = xi_crack @ Q
    x, z = xi_crack[..., 0], xi_crack[..., 2]
    xi2 = xi_crack[..., 1]
    Fq = _quartic_partials(x, z, xi2, cp)[0]
    Fs = _sh_partials(x, z, xi2, cp)[0]
    other = Fs if alpha in (1, 2) else Fq
    scale = (1.0 + np.abs(x) ** 2 + np.abs(z) ** 2 + np.abs(xi2) ** 2) ** 2 \
        * max(1.0, cp.Ah * cp.Av)
    degenerate = np.abs(other) < 1e-6 * scale

    out = np.empty(xi_crack.shape[:-1] + (3, 3), dtype=complex)
    if not np.all(degenerate):
        adj = _adjugate3(ch.christoffel_matrix(xi_m, m) - np.eye(3))
        dF = _det_dz(x, z, xi2, cp)
        safe = np.where(degenerate, 1.0, dF)
        out[...] = adj / safe[..., None, None]
    if np.any(degenerate):
        V = _family_null_vector(xi_m, alpha, m)
        VV = np.einsum("...i,...i->...", V, V)
        lamp = lam_xi3_closed(xi_crack, alpha, case, m)
        bad = degenerate & ((np.abs(VV) < 1e-12 * scale)
                            | (np.abs(lamp) < 1e-12 * np.sqrt(scale)))
        if np.any(bad):
            raise PoleCoalescence(
                "double pole: sheet crossing with degenerate polarization")
        dy = np.einsum("...i,...j->...ij", V, V) \
            / (VV * lamp)[..., None, None]
        out = np.where(degenerate[..., None, None], dy, out)
    return out


def lam_xi3_closed(xi_crack: np.ndarray, alpha: int, case: CrackCase,
                   m: NondimMaterial) -> np.ndarray:
    """Vertical eigenvalue derivative on the slowness sheet (lam = 1)."""
    cp = case_params(case, m)
    x, z = xi_crack[..., 0], xi_crack[..., 2]
    if alpha == 3:
        return 2.0 * (cp.B1 if cp.case is CrackCase.AXIS_PERP else cp.B3) * z
    perp2 = x * x + xi_crack[..., 1] ** 2
    num = cp.B4 * perp2 - 2.0 * cp.B1 * cp.Av * z * z + (cp.B1 + cp.Av)
    den = (cp.B1 + cp.Ah) * perp2 + (cp.B1 + cp.Av) * z * z - 2.0
    return -2.0 * z * num / den


def green_traction_residue(xi1, x3_sign: int, xi2: float, case: CrackCase,
                           m: NondimMaterial, bd: BranchData | None = None):
    """Green displacement- and stress-traction kernels on a crack face.

    Returns (t_mat, tau_mat), each (..., 3, 3), assembled as the residue
    sum over the three vertical-wavenumber poles picked by the limiting
    absorption rule; x3_sign selects the upper (+1) or lower (-1) face.
    """
    case = CrackCase.parse(case)
    xi2 = _check_xi2(case, xi2)
    if bd is None:
        bd = branch_points(case, xi2, m)
    xi1 = np.asarray(xi1, dtype=complex)
    sgn = 1 if x3_sign > 0 else -1
    # the displacement-traction kernel is linear in the traction operator
    # and must carry the true inner normal; the in-plane operator is
    # written with the opposite orientation (benign for the quadratic
    # stress kernel and the coefficients, not for the jump identity)
    s_nu = 1.0 if case is CrackCase.AXIS_PERP else -1.0

    t_mat = np.zeros(xi1.shape + (3, 3), dtype=complex)
    tau_mat = np.zeros(xi1.shape + (3, 3), dtype=complex)
    for alpha in (1, 2, 3):
        z = xi3_root(alpha, xi1, xi2, case, m, bd).value
        z_eval = -z if sgn > 0 else z
        xi_crack = np.stack([xi1, np.full(xi1.shape, xi2, dtype=complex), z_eval],
                            axis=-1)
        S = s_matrix_array(xi_crack, case, m)
        resid = residue_dyad(xi_crack, alpha, case, m) @ np.swapaxes(S, -1, -2)
        t_mat += -sgn * s_nu * resid
        tau_mat += -sgn * 1j * (S @ resid)
    return t_mat, tau_mat
