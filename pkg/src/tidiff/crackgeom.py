"""Crack-frame geometry and incident-wave construction.

The crack occupies {x1' >= 0, x3' = 0} in the crack frame: e3' is the
face normal, e2' runs along the edge, e1' points from the edge into the
crack.  Vector COMPONENTS are kept in the medium frame throughout while
vector ARGUMENTS (wave vectors, positions) are given in crack
coordinates; the rotation matrix converts between the two.

Two closed-form configurations are supported: symmetry axis normal to
the crack face (arbitrary incidence), and symmetry axis in the crack
plane normal to the edge (edge-normal incidence only).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import christoffel as ch
from .errors import UnsupportedIncidence
from .material import NondimMaterial


class CrackCase(enum.Enum):
    AXIS_PERP = "axis-perp"          # axis normal to the crack plane
    AXIS_IN_PLANE = "axis-in-plane"  # axis in the crack plane, normal to the edge

    @classmethod
    def parse(cls, text) -> "CrackCase":
        if isinstance(text, cls):
            return text
        for c in cls:
            if c.value == text or c.name == text:
                return c
        raise ValueError(f"unknown crack case {text!r}")


def rotation_matrix_general(theta0_deg: float, phi0_deg: float) -> np.ndarray:
    """Crack-to-medium rotation Q for crack tilt theta0 and swing phi0.

    Medium components of a vector are Q.T @ (crack components).
    """
    t0 = math.radians(theta0_deg)
    p0 = math.radians(phi0_deg)
    return np.array([
        [math.cos(p0), math.sin(p0) * math.cos(t0), math.sin(p0) * math.sin(t0)],
        [-math.sin(p0), math.cos(p0) * math.cos(t0), math.cos(p0) * math.sin(t0)],
        [0.0, -math.sin(t0), math.cos(t0)],
    ])


def rotation_matrix(case: CrackCase) -> np.ndarray:
    """Exact rotation matrix for the two solved configurations."""
    case = CrackCase.parse(case)
    if case is CrackCase.AXIS_PERP:
        return np.eye(3)
    return np.array([[0.0, 0.0, 1.0],
                     [-1.0, 0.0, 0.0],
                     [0.0, -1.0, 0.0]])


def crack_to_medium(v_crack, case: CrackCase) -> np.ndarray:
    return rotation_matrix(case).T @ np.asarray(v_crack)


def medium_to_crack(v_medium, case: CrackCase) -> np.ndarray:
    return rotation_matrix(case) @ np.asarray(v_medium)


def sigma_symbols(xi_medium, m: NondimMaterial) -> np.ndarray:
    """The three stress-symbol matrices, stacked (3, 3, 3): [i, j, k].

    sigma_ij of a plane wave p*exp(i k.x) equals i * Sigma^(i)_{jk}(k) p_k.
    """
    x1, x2, x3 = np.asarray(xi_medium)
    A11, A12, A13, A33, B1, B3 = m.A11, m.A12, m.A13, m.A33, m.B1, m.B3
    s = np.zeros((3, 3, 3), dtype=np.result_type(x1, x2, x3, 1.0))
    s[0] = [[A11 * x1, A12 * x2, A13 * x3],
            [B3 * x2, B3 * x1, 0.0],
            [B1 * x3, 0.0, B1 * x1]]
    s[1] = [[B3 * x2, B3 * x1, 0.0],
            [A12 * x1, A11 * x2, A13 * x3],
            [0.0, B1 * x3, B1 * x2]]
    s[2] = [[B1 * x3, 0.0, B1 * x1],
            [0.0, B1 * x3, B1 * x2],
            [A13 * x1, A13 * x2, A33 * x3]]
    return s


def face_normal_medium(case: CrackCase) -> np.ndarray:
    """Medium-frame normal used to assemble the traction operator.

    For the in-plane case this is -Q.T e3' (the closed-form solution is
    written with that orientation); the overall sign of the operator
    cancels from the diffraction coefficients, which involve it an even
    number of times.
    """
    case = CrackCase.parse(case)
    if case is CrackCase.AXIS_PERP:
        return np.array([0.0, 0.0, 1.0])
    return np.array([0.0, 1.0, 0.0])


def s_operator(xi_crack, case: CrackCase, m: NondimMaterial) -> np.ndarray:
    """Displacement-traction transfer matrix S(xi') in medium components.

    The traction amplitude of a plane wave with polarization p and wave
    vector xi' (crack coordinates) is i * S(xi') @ p.
    """
    case = CrackCase.parse(case)
    xi_m = crack_to_medium(np.asarray(xi_crack), case)
    nu = face_normal_medium(case)
    sig = sigma_symbols(xi_m, m)
    return np.einsum("i,ijk->jk", nu, sig)


@dataclass(frozen=True)
class IncidentWave:
    """Incident plane wave in crack coordinates.

    k_in is the crack-frame wave vector; p_hat and t_hat are the
    polarization and traction amplitude in medium components; xi2 is
    the fixed edge-parallel transform parameter (-k_in[1]).
    """

    case: CrackCase
    mode: str
    phi_in: float      # degrees, polar angle from the edge axis e2'
    theta_in: float    # degrees, azimuth in the (e1', e3') plane
    k_in: np.ndarray
    k_mag: float
    p_hat: np.ndarray
    t_hat: np.ndarray
    xi2: float
    toward_crack: bool


def incident_wave(case: CrackCase, mode: str, phi_in: float, theta_in: float,
                  m: NondimMaterial) -> IncidentWave:
    """Build an incident plane wave from its crack-frame spherical angles.

    phi_in is measured from the crack edge (90 deg = edge-normal
    propagation); theta_in is the polar angle in the plane normal to the
    edge.  The in-plane-axis case only admits phi_in = 90 deg.
    """
    case = CrackCase.parse(case)
    if case is CrackCase.AXIS_IN_PLANE and abs(phi_in - 90.0) > 1e-12:
        raise UnsupportedIncidence(
            "axis-in-plane case requires edge-normal incidence (phi_in = 90)")
    if not 0.0 <= theta_in < 360.0:
        raise ValueError("theta_in must lie in [0, 360)")
    if mode not in ch.MODES:
        raise ValueError(f"unknown mode {mode!r}")

    ph = math.radians(phi_in)
    th = math.radians(theta_in)
    n_crack = np.array([math.sin(ph) * math.cos(th),
                        math.cos(ph),
                        math.sin(ph) * math.sin(th)])
    n_medium = crack_to_medium(n_crack, case)
    b = ch.mode_branch(n_medium, mode, m)
    k_mag = float(ch.eigenvalues(n_medium, m)[b] ** -0.5)
    k_in = k_mag * n_crack
    p_hat = ch.eigensystem(n_medium, m).p[b]
    t_hat = 1j * s_operator(k_in, case, m) @ p_hat
    ray_m = ch.ray_direction(n_medium, mode, m)
    ray_crack3 = float(medium_to_crack(ray_m, case)[2])
    return IncidentWave(
        case=case, mode=mode, phi_in=float(phi_in), theta_in=float(theta_in),
        k_in=k_in, k_mag=k_mag, p_hat=p_hat, t_hat=t_hat,
        xi2=float(-k_in[1]), toward_crack=ray_crack3 < 0.0,
    )
