"""Transversely isotropic materials and their nondimensional form.

The symmetry axis is the third medium axis.  A material is described by
five independent moduli A11, A12, A13, A33, B1 (Pa) plus the density;
the sixth Voigt entry is fixed by B3 = (A11 - A12) / 2.  All downstream
analysis works with the nondimensional moduli obtained by dividing by
rho * c0**2, where c0 is the shear speed along the symmetry axis, so
that B1 == 1 exactly.

Instances are frozen; they can be shared freely between threads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import MaterialFileError, StabilityViolation

_REQUIRED_KEYS = ("name", "rho", "A11", "A12", "A13", "A33", "B1")


def _check_stability(A11, A12, A13, A33, B1, rho):
    """Raise StabilityViolation naming the first failed inequality."""
    checks = [
        (rho > 0.0, "rho > 0"),
        (A11 > 0.0, "A11 > 0"),
        (A33 > 0.0, "A33 > 0"),
        (B1 > 0.0, "B1 > 0"),
        (A11 > abs(A12), "A11 > |A12|"),
        ((A11 - A12) / 2.0 > 0.0, "(A11 - A12)/2 > 0"),
        ((A11 + A12) * A33 > 2.0 * A13**2, "(A11 + A12)*A33 > 2*A13^2"),
    ]
    for ok, label in checks:
        if not ok:
            raise StabilityViolation(f"stability inequality failed: {label}")


@dataclass(frozen=True)
class TIMaterial:
    """Dimensional TI material (moduli in Pa, density in kg/m^3)."""

    A11d: float
    A12d: float
    A13d: float
    A33d: float
    B1d: float
    rho: float
    name: str = ""

    def __post_init__(self):
        _check_stability(self.A11d, self.A12d, self.A13d, self.A33d,
                         self.B1d, self.rho)

    @property
    def B3d(self) -> float:
        return 0.5 * (self.A11d - self.A12d)


@dataclass(frozen=True)
class NondimMaterial:
    """Nondimensional moduli; B1 == 1 by construction.

    c0 is the reference (axial shear) speed in m/s and k0_per_omega its
    inverse, the factor turning an angular frequency into the reference
    wavenumber.
    """

    A11: float
    A12: float
    A13: float
    A33: float
    B1: float
    B3: float
    c0: float
    k0_per_omega: float
    name: str = ""

    def __post_init__(self):
        _check_stability(self.A11, self.A12, self.A13, self.A33,
                         self.B1, 1.0)

    def moduli_key(self) -> tuple:
        """Hashable identity of the elastic constants (cache keys)."""
        return (self.A11, self.A12, self.A13, self.A33, self.B1)


def nondimensionalize(m: TIMaterial) -> NondimMaterial:
    """Divide the moduli by rho*c0^2 with c0 = sqrt(B1d/rho).

    The returned B1 is exactly 1; B3 = (A11 - A12)/2.
    """
    c0 = math.sqrt(m.B1d / m.rho)
    s = 1.0 / (m.rho * c0 * c0)
    A11, A12, A13, A33 = m.A11d * s, m.A12d * s, m.A13d * s, m.A33d * s
    return NondimMaterial(
        A11=A11, A12=A12, A13=A13, A33=A33,
        B1=1.0, B3=0.5 * (A11 - A12),
        c0=c0, k0_per_omega=1.0 / c0, name=m.name,
    )


def voigt_matrix(m: NondimMaterial) -> np.ndarray:
    """6x6 stiffness matrix in Voigt order (11, 22, 33, 23, 31, 12)."""
    c = np.zeros((6, 6))
    c[0, 0] = c[1, 1] = m.A11
    c[2, 2] = m.A33
    c[0, 1] = c[1, 0] = m.A12
    c[0, 2] = c[2, 0] = c[1, 2] = c[2, 1] = m.A13
    c[3, 3] = c[4, 4] = 2.0 * m.B1
    c[5, 5] = 2.0 * m.B3
    return c


def isotropic(lam: float, mu: float, rho: float, name: str = "isotropic") -> TIMaterial:
    """Isotropic solid expressed in the TI parameterization."""
    return TIMaterial(A11d=lam + 2.0 * mu, A12d=lam, A13d=lam,
                      A33d=lam + 2.0 * mu, B1d=mu, rho=rho, name=name)


def load_material(path) -> TIMaterial:
    """Read a material config file (JSON, dimensional SI units)."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise MaterialFileError(f"cannot read material file {path!r}: {e}") from e
    except json.JSONDecodeError as e:
        raise MaterialFileError(f"invalid JSON in {path!r}: {e}") from e
    for key in _REQUIRED_KEYS:
        if key not in data:
            raise MaterialFileError(f"material file {path!r}: missing key {key!r}")
    try:
        return TIMaterial(
            A11d=float(data["A11"]), A12d=float(data["A12"]),
            A13d=float(data["A13"]), A33d=float(data["A33"]),
            B1d=float(data["B1"]), rho=float(data["rho"]),
            name=str(data["name"]),
        )
    except (TypeError, ValueError) as e:
        raise MaterialFileError(f"material file {path!r}: non-numeric value ({e})") from e


def save_material(m: TIMaterial, path) -> None:
    data = {"name": m.name, "rho": m.rho, "A11": m.A11d, "A12": m.A12d,
            "A13": m.A13d, "A33": m.A33d, "B1": m.B1d}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
        f.write("\n")


def bundled_material_path(name: str = "austenitic_steel"):
    """Path of a material file shipped with the package."""
    from importlib.resources import files
    return files("tidiff").joinpath("materials", f"{name}.json")


def load_bundled(name: str = "austenitic_steel") -> TIMaterial:
    return load_material(str(bundled_material_path(name)))
