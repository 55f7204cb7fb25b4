"""Plane-wave eigen-analysis for a TI solid.

Everything here lives in the medium frame (third axis = symmetry axis).
The acoustic matrix L(xi) is the quadratic symbol of the elastodynamic
operator; its eigenvalues lam^(1) >= lam^(2) (quasi P/SV pair) and
lam^(3) (pure SH) are squared phase speeds for |xi| = 1, and the
slowness sheets are the loci lam = 1.  All functions are pure.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirection, OnSlownessSurface
from .material import NondimMaterial

MODE_QP = "qP"
MODE_QSV = "qSV"
MODE_QSH = "qSH"
MODES = (MODE_QP, MODE_QSV, MODE_QSH)


def christoffel_matrix(xi, m: NondimMaterial) -> np.ndarray:
    """Acoustic (Kelvin-Christoffel) matrix L(xi), vectorized over xi.

    xi may be shape (3,) or (..., 3); the result has shape (..., 3, 3).
    """
    xi = np.asarray(xi)
    x1, x2, x3 = xi[..., 0], xi[..., 1], xi[..., 2]
    L = np.zeros(xi.shape[:-1] + (3, 3), dtype=xi.dtype)
    L[..., 0, 0] = m.A11 * x1**2 + m.B3 * x2**2 + m.B1 * x3**2
    L[..., 1, 1] = m.B3 * x1**2 + m.A11 * x2**2 + m.B1 * x3**2
    L[..., 2, 2] = m.B1 * (x1**2 + x2**2) + m.A33 * x3**2
    L[..., 0, 1] = L[..., 1, 0] = (m.A11 - m.B3) * x1 * x2
    L[..., 0, 2] = L[..., 2, 0] = (m.A13 + m.B1) * x1 * x3
    L[..., 1, 2] = L[..., 2, 1] = (m.A13 + m.B1) * x2 * x3
    return L


def char_factors(xi, lam, m: NondimMaterial):
    """The two determinant factors of L(xi) - lam*I.

    Returns (quartic_factor, quadratic_factor); their product equals
    det(L - lam I) identically.
    """
    xi = np.asarray(xi)
    perp2 = xi[..., 0] ** 2 + xi[..., 1] ** 2
    x3sq = xi[..., 2] ** 2
    quart = ((m.A11 * perp2 + m.B1 * x3sq - lam)
             * (m.B1 * perp2 + m.A33 * x3sq - lam)
             - (m.A13 + m.B1) ** 2 * perp2 * x3sq)
    quad = m.B3 * perp2 + m.B1 * x3sq - lam
    return quart, quad


def eigenvalues(xi, m: NondimMaterial) -> np.ndarray:
    """Closed-form eigenvalues (lam1, lam2, lam3) of L(xi), lam1 >= lam2."""
    xi = np.asarray(xi)
    perp2 = xi[..., 0] ** 2 + xi[..., 1] ** 2
    x3sq = xi[..., 2] ** 2
    s = (m.B1 + m.A11) * perp2 + (m.B1 + m.A33) * x3sq
    g = (((m.A11 - m.B1) * perp2 + (m.B1 - m.A33) * x3sq) ** 2
         + 4.0 * (m.B1 + m.A13) ** 2 * perp2 * x3sq)
    root = np.sqrt(g)
    lam = np.empty(xi.shape[:-1] + (3,), dtype=xi.dtype)
    lam[..., 0] = 0.5 * (s + root)
    lam[..., 1] = 0.5 * (s - root)
    lam[..., 2] = m.B3 * perp2 + m.B1 * x3sq
    return lam


def eigenvalue_gradients(xi, m: NondimMaterial) -> np.ndarray:
    """Gradients d lam^(b) / d xi, shape (..., 3, 3): [branch, component]."""
    xi = np.asarray(xi, dtype=float)
    x1, x2, x3 = xi[..., 0], xi[..., 1], xi[..., 2]
    perp2 = x1**2 + x2**2
    x3sq = x3**2
    a = (m.A11 - m.B1) * perp2 + (m.B1 - m.A33) * x3sq
    c2 = 4.0 * (m.B1 + m.A13) ** 2
    g = a**2 + c2 * perp2 * x3sq
    root = np.sqrt(g)
    # dg/dxi
    dg1 = 4.0 * a * (m.A11 - m.B1) * x1 + 2.0 * c2 * x1 * x3sq
    dg2 = 4.0 * a * (m.A11 - m.B1) * x2 + 2.0 * c2 * x2 * x3sq
    dg3 = 4.0 * a * (m.B1 - m.A33) * x3 + 2.0 * c2 * perp2 * x3
    out = np.empty(xi.shape[:-1] + (3, 3), dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        inv = np.where(root > 0.0, 0.25 / np.where(root > 0.0, root, 1.0), 0.0)
    for b, sgn in ((0, 1.0), (1, -1.0)):
        out[..., b, 0] = (m.B1 + m.A11) * x1 + sgn * inv * dg1
        out[..., b, 1] = (m.B1 + m.A11) * x2 + sgn * inv * dg2
        out[..., b, 2] = (m.B1 + m.A33) * x3 + sgn * inv * dg3
    out[..., 2, 0] = 2.0 * m.B3 * x1
    out[..., 2, 1] = 2.0 * m.B3 * x2
    out[..., 2, 2] = 2.0 * m.B1 * x3
    return out


@dataclass(frozen=True)
class Eigensystem:
    """Eigenvalues lam (3,) with lam[0] >= lam[1], and unit eigenvectors
    p (3, 3), one per row, matching the lam ordering."""

    lam: np.ndarray
    p: np.ndarray


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0.0 else v


def eigensystem(xi, m: NondimMaterial, tol: float = 1e-9) -> Eigensystem:
    """Closed-form eigenpairs of L(xi) for a single real xi != 0.

    Where a closed-form eigenvector degenerates (a symmetry direction),
    the missing polarization is completed by orthogonality with the
    other two; on the symmetry axis the shear pair is fixed to the
    in-plane limit (e1, e2).
    """
    xi = np.asarray(xi, dtype=float)
    lam = eigenvalues(xi, m)
    x1, x2, x3 = xi
    perp2 = x1 * x1 + x2 * x2
    scale = float(xi @ xi)
    if scale == 0.0:
        raise ValueError("xi must be nonzero")

    if perp2 <= (tol * scale) ** 2:
        # symmetry axis: quartic pair is (A33, B1)*x3^2, SH is B1*x3^2
        e1, e2, e3 = np.eye(3)
        if m.A33 >= m.B1:
            p = np.vstack([e3, e1, e2])
        else:
            p = np.vstack([e1, e3, e2])
        return Eigensystem(lam=lam, p=p)

    mod = max(m.A11, m.A33, m.B1, abs(m.A13) + m.B1)
    vecs = [None, None, None]
    for b in (0, 1):
        v = np.array([
            (m.B1 + m.A13) * x1 * x3,
            (m.B1 + m.A13) * x2 * x3,
            lam[b] - m.A11 * perp2 - m.B1 * x3 * x3,
        ])
        n = np.linalg.norm(v)
        if n > tol * scale * mod:
            vecs[b] = v / n
    v3 = np.array([-x2, x1, 0.0])
    vecs[2] = v3 / np.linalg.norm(v3)

    missing = [b for b in range(3) if vecs[b] is None]
    if len(missing) == 1:
        j, k = [b for b in range(3) if b not in missing]
        vecs[missing[0]] = np.cross(vecs[j], vecs[k])
    elif missing:
        raise DegenerateDirection(f"cannot resolve polarizations at xi={xi}")

    p = np.vstack([_canonical_sign(v) for v in vecs])
    return Eigensystem(lam=lam, p=p)


def mode_branch(n, mode: str, m: NondimMaterial) -> int:
    """Branch index (0, 1, 2) carrying the given mode label at direction n.

    The SH label always belongs to the quadratic branch (index 2); qP and
    qSV are told apart per direction by the polarization angle to n.
    """
    if mode == MODE_QSH:
        return 2
    if mode not in (MODE_QP, MODE_QSV):
        raise ValueError(f"unknown mode {mode!r}")
    n = np.asarray(n, dtype=float)
    nhat = n / np.linalg.norm(n)
    es = eigensystem(nhat, m)
    dots = [abs(es.p[b] @ nhat) for b in (0, 1)]
    qp = int(np.argmax(dots))
    return qp if mode == MODE_QP else 1 - qp


def transfer_tensor(xi, m: NondimMaterial, tol: float = 1e-9) -> np.ndarray:
    """Fourier-domain free-space response sum p p / (lam - 1).

    Satisfies (L(xi) - I) @ result == I away from the slowness sheets.
    """
    es = eigensystem(xi, m)
    if np.min(np.abs(es.lam - 1.0)) < tol:
        raise OnSlownessSurface(f"lam within {tol} of 1 at xi={xi}")
    out = np.zeros((3, 3))
    for b in range(3):
        out += np.outer(es.p[b], es.p[b]) / (es.lam[b] - 1.0)
    return out


def slowness(n, mode: str, m: NondimMaterial) -> float:
    """Dimensionless wavenumber lam^(-1/2) for a unit direction n."""
    n = np.asarray(n, dtype=float)
    b = mode_branch(n, mode, m)
    lam = eigenvalues(n, m)[b]
    return float(lam ** -0.5)


def _shear_gap(n, m: NondimMaterial) -> float:
    lam = eigenvalues(np.asarray(n, dtype=float), m)
    return abs(lam[1] - lam[2])


def ray_direction(n, mode: str, m: NondimMaterial, tol: float = 1e-9) -> np.ndarray:
    """Group-velocity (ray) vector for the mode at unit direction n.

    Gradient of the degree-1 speed extension c = sqrt(lam); the Euler
    identity n . ray == c(n) holds.  Raises DegenerateDirection where the
    quasi-shear sheets touch with different rays (a genuine conical
    point); a tangential touch with equal rays, as in the isotropic
    limit, is harmless.
    """
    n = np.asarray(n, dtype=float)
    b = mode_branch(n, mode, m)
    lam = eigenvalues(n, m)
    grads = eigenvalue_gradients(n, m)
    if mode in (MODE_QSV, MODE_QSH) and _shear_gap(n, m) < tol * max(lam[0], 1.0):
        g1 = grads[1] / np.linalg.norm(grads[1])
        g2 = grads[2] / np.linalg.norm(grads[2])
        if np.linalg.norm(g1 - g2) > 1e-6:
            raise DegenerateDirection(f"shear sheets touch at n={n}")
    return grads[b] / (2.0 * np.sqrt(lam[b]))


def sample_curves(mode: str, m: NondimMaterial, n_points: int = 720) -> np.ndarray:
    """Slowness- and wave-curve section in the x2 = 0 plane.

    Returns an (n_points, 4) array with columns (xi1, xi3, x1, x3): the
    slowness point n/|c| and the ray (wave-curve) point per direction.
    Directions are offset by half a step so symmetry axes are not hit
    exactly.
    """
    if n_points < 8:
        raise ValueError("n_points must be >= 8")
    out = np.empty((n_points, 4))
    psi = (np.arange(n_points) + 0.5) * (2.0 * np.pi / n_points)
    for i, a in enumerate(psi):
        n = np.array([np.cos(a), 0.0, np.sin(a)])
        k = slowness(n, mode, m)
        ray = ray_direction(n, mode, m)
        out[i] = (k * n[0], k * n[2], ray[0], ray[2])
    return out


def write_curves_csv(path, m: NondimMaterial, modes=MODES, n_points: int = 720) -> None:
    """CSV export of the planar sections: mode,xi1,xi3,x1,x3."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("mode,xi1,xi3,x1,x3\n")
        for mode in modes:
            for row in sample_curves(mode, m, n_points):
                f.write(f"{mode}," + ",".join(f"{v:.12g}" for v in row) + "\n")


def count_inflections(mode: str, m: NondimMaterial, n_points: int = 4001) -> int:
    """Number of curvature sign changes of the slowness-curve section.

    Each inflection of the slowness section maps to a cusp of the wave
    curve, so this counts cusps of the corresponding wavefront.
    """
    pts = sample_curves(mode, m, n_points)[:, :2]
    # periodic central differences on the closed curve
    d1 = 0.5 * (np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0))
    d2 = np.roll(pts, -1, axis=0) - 2.0 * pts + np.roll(pts, 1, axis=0)
    curv = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    sign = np.sign(curv)
    sign = sign[sign != 0.0]
    flips = int(np.sum(sign[1:] * sign[:-1] < 0.0))
    if sign[0] * sign[-1] < 0.0:
        flips += 1
    return flips
