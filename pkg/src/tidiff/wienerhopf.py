"""Plus/minus factorization of the face-traction eigenvalues.

The two scalar kernels entering the quartic eigenvalue (the
surface-wave-normalized numerator and the root-normalized denominator)
tend to one at infinity, are nowhere zero, and jump only across a
finite path joining the images of the two innermost branch points.
Their plus factors are Cauchy integrals of the jump over that path,
evaluated with a tanh-sinh rule that absorbs the endpoint behavior of
the jump phase; minus factors are plus factors reflected through the
origin.

A FactorTable freezes the quadrature for one (material, case, xi2) and
is immutable afterwards; all evaluations are pure and vectorized.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import spectral as sp
from .crackgeom import CrackCase
from .errors import DegenerateKernel, FactorizationError, OnCut
from .material import NondimMaterial

_TABLE_VERSION = 1

KERNEL_NUM = "K0"   # surface-wave-normalized numerator kernel
KERNEL_DEN = "K1"   # root-normalized denominator kernel


def tanh_sinh_rule(n_half: int):
    """Symmetric tanh-sinh nodes/weights on (-1, 1), 2*n_half + 1 points."""
    # step chosen so the extreme nodes sit ~1e-15 from the endpoints
    h = np.arcsinh(2.0 * 35.0 / np.pi) / n_half
    k = np.arange(-n_half, n_half + 1)
    u = k * h
    sin = np.sinh(u)
    x = np.tanh(0.5 * np.pi * sin)
    w = h * 0.5 * np.pi * np.cosh(u) / np.cosh(0.5 * np.pi * sin) ** 2
    return x, w


def l1_constant(cp: sp.CaseParams) -> float:
    """Infinity limit normalizing the denominator kernel."""
    num = (2.0 * cp.B1 * np.sqrt(cp.Ah * cp.Av)
           - cp.A13**2 - 2.0 * cp.B1 * cp.A13 + cp.Ah * cp.Av)
    return float(np.sqrt(num / (4.0 * cp.B1 * cp.Av)))


def _path_segments(bd: sp.BranchData) -> list[tuple[complex, complex]]:
    """Jump path from the kappa1-image endpoint to the kappa2-image one.

    Both endpoints real: single real segment.  kappa1 imaginary only:
    bent path through the origin.  Both imaginary: single segment on the
    imaginary axis.
    """
    e1, e2 = complex(bd.kappa1), complex(bd.kappa2)
    k1_imag = abs(e1.imag) > 1e-14
    k2_imag = abs(e2.imag) > 1e-14
    if not k1_imag and not k2_imag:
        return [(e1, e2)]
    if k1_imag and not k2_imag:
        return [(e1, 0.0 + 0.0j), (0.0 + 0.0j, e2)]
    return [(e1, e2)]


def _jump_phases(t: np.ndarray, bd: sp.BranchData, cp: sp.CaseParams):
    """Jump of the two kernel logarithms at path points t.

    Both jumps flip the sign of the gamma1*gamma2 combination; on the
    true jump path that combination is purely imaginary against a real
    background, so the jumps are pure phases tracked with atan2 (no
    branch ambiguity as long as the background at the kappa1 endpoint is
    positive, which is guarded at table build).
    """
    g1 = sp.gamma_ell(t, bd.kappa1)
    g2 = sp.gamma_ell(t, bd.kappa2)
    t2 = np.real(t * t)  # t^2 is real on axis-aligned segments
    perp2 = t2 + bd.xi2**2
    rootAA = np.sqrt(cp.Ah * cp.Av)
    a_bg = -cp.l0 * perp2 + cp.Av
    c_bg = cp.B4 * perp2 + cp.B1 + cp.Av
    im_ratio = np.imag(g1 * np.conj(g2))
    im_prod = np.imag(g1 * g2)
    d0 = 2j * np.arctan2(rootAA * np.abs(im_ratio), a_bg * np.abs(g2) ** 2)
    d1 = 1j * np.arctan2(2.0 * cp.B1 * rootAA * np.abs(im_prod), c_bg)
    return d0, d1


@dataclass(frozen=True)
class FactorTable:
    """Frozen split-function quadrature for one (material, case, xi2)."""

    case: CrackCase
    xi2: float
    moduli_key: tuple
    bd: sp.BranchData
    rayleigh: sp.RayleighData
    l0: float
    l1: float
    n_half: int
    segment_signs: tuple
    t_nodes: np.ndarray | None
    w_nodes: np.ndarray | None
    d0_nodes: np.ndarray | None
    d1_nodes: np.ndarray | None
    _m: NondimMaterial = field(repr=False, default=None)

    @property
    def has_kernels(self) -> bool:
        return self.t_nodes is not None

    # -- construction ------------------------------------------------------

    @classmethod
    def build(cls, case: CrackCase, xi2: float, m: NondimMaterial,
              n_half: int = 100, kernels: bool = True) -> "FactorTable":
        """Assemble branch data, the surface pole, and (optionally) the
        split-kernel quadrature.  n_half=100 gives ~200 nodes/segment."""
        case = CrackCase.parse(case)
        bd = sp.branch_points(case, xi2, m)
        cp = sp.case_params(case, m)
        ray = sp.rayleigh_pole(xi2, case, m)
        l1 = l1_constant(cp)
        if not kernels:
            return cls(case=case, xi2=float(xi2), moduli_key=m.moduli_key(),
                       bd=bd, rayleigh=ray, l0=cp.l0, l1=l1, n_half=0,
                       segment_signs=(), t_nodes=None, w_nodes=None,
                       d0_nodes=None, d1_nodes=None, _m=m)
        if bd.quartet_degenerate:
            raise DegenerateKernel(
                "split kernels undefined at the isotropic point "
                "(quartet branch points degenerate)")

        # endpoint positivity guards for the phase tracking
        e1 = complex(bd.kappa1)
        perp2_end = np.real(e1 * e1) + xi2**2
        a_end = -cp.l0 * perp2_end + cp.Av
        c_end = cp.B4 * perp2_end + cp.B1 + cp.Av
        if a_end <= 0.0 or c_end <= 0.0:
            raise FactorizationError(
                "jump-phase background not positive at the inner endpoint; "
                "phase tracking would be ambiguous for this material")

        segs = _path_segments(bd)
        x, w = tanh_sinh_rule(n_half)
        t_parts, w_parts, seg_id = [], [], []
        for i, (a, b) in enumerate(segs):
            if abs(b - a) < 1e-14:
                continue
            mid, hal = 0.5 * (b + a), 0.5 * (b - a)
            t_parts.append(mid + hal * x)
            w_parts.append(np.full(x.shape, hal) * w)
            seg_id.append(np.full(x.shape, i, dtype=int))
        t = np.concatenate(t_parts)
        wts = np.concatenate(w_parts)
        sid = np.concatenate(seg_id)
        d0, d1 = _jump_phases(t, bd, cp)

        table = cls(case=case, xi2=float(xi2), moduli_key=m.moduli_key(),
                    bd=bd, rayleigh=ray, l0=cp.l0, l1=l1, n_half=n_half,
                    segment_signs=(1.0,) * len(segs), t_nodes=t, w_nodes=wts,
                    d0_nodes=d0, d1_nodes=d1, _m=m)
        signs = table._calibrate_signs(sid, len(segs))
        if any(s != 1.0 for s in signs):
            flip = np.array([signs[i] for i in sid])
            table = cls(case=case, xi2=float(xi2), moduli_key=m.moduli_key(),
                        bd=bd, rayleigh=ray, l0=cp.l0, l1=l1, n_half=n_half,
                        segment_signs=tuple(signs), t_nodes=t, w_nodes=wts,
                        d0_nodes=d0 * flip, d1_nodes=d1 * flip, _m=m)
        return table

    def _probe_points(self) -> np.ndarray:
        bd = self.bd
        scale = bd.kappa_scale()
        cands = np.array([0.37, 1.31, 1.83, 2.41, 3.17, 4.53]) * scale
        keep = []
        avoid = [complex(p) for p in bd.branch_point_list()]
        avoid += [complex(-p) for p in bd.branch_point_list()]
        avoid += [complex(self.rayleigh.kappa_R), complex(-self.rayleigh.kappa_R)]
        for p in cands:
            if self._min_cut_distance(np.array([p + 0j]))[0] < 0.05 * scale:
                continue
            if self._min_cut_distance(np.array([-p + 0j]))[0] < 0.05 * scale:
                continue
            if min(abs(p - a) for a in avoid) < 0.05 * scale:
                continue
            keep.append(p)
        if len(keep) < 3:
            raise FactorizationError("could not place calibration probes")
        return np.array(keep)

    def _calibrate_signs(self, sid: np.ndarray, n_seg: int):
        """Per-segment jump orientation fixed by the split identity.

        The jump magnitude is unambiguous; the side bookkeeping of the
        bent path is not worth deriving case by case, so the orientation
        is pinned by requiring K+(x) K+(-x) = K(x) at off-path probes.
        """
        probes = self._probe_points()
        kv0 = self.kernel_value(KERNEL_NUM, probes)
        kv1 = self.kernel_value(KERNEL_DEN, probes)
        best, best_r = None, np.inf
        import itertools
        for combo in itertools.product((1.0, -1.0), repeat=n_seg):
            flip = np.array([combo[i] for i in sid])
            r0 = self._k_plus_raw(self.d0_nodes * flip, probes) \
                * self._k_plus_raw(self.d0_nodes * flip, -probes) / kv0 - 1.0
            r1 = self._k_plus_raw(self.d1_nodes * flip, probes) \
                * self._k_plus_raw(self.d1_nodes * flip, -probes) / kv1 - 1.0
            r = max(np.max(np.abs(r0)), np.max(np.abs(r1)))
            if r < best_r:
                best, best_r = combo, r
        if best_r > 1e-4:
            raise FactorizationError(
                f"split identity unreachable (best residual {best_r:.2e})")
        return best

    # -- kernel values on the real axis -------------------------------------

    def kernel_value(self, which: str, xi1) -> np.ndarray:
        """Unsplit kernel value with the on-axis branch conventions."""
        cp = sp.case_params(self.case, self._m)
        bd = self.bd
        xi1 = np.asarray(xi1, dtype=complex)
        if which == KERNEL_NUM:
            g1 = sp.gamma_ell(xi1, bd.kappa1)
            g2 = sp.gamma_ell(xi1, bd.kappa2)
            R = (-cp.l0 * (xi1 * xi1 + bd.xi2**2) + cp.Av
                 + np.sqrt(cp.Ah * cp.Av) * g1 / g2)
            return R / (self.l0 * (self.rayleigh.kappa_R**2 - xi1 * xi1))
        if which == KERNEL_DEN:
            h1, _ = sp._root_halves(xi1, bd.xi2, cp, bd)
            g3 = sp.gamma_ell(xi1, bd.kappa3)
            return h1 / (self.l1 * g3)
        raise ValueError(f"unknown kernel {which!r}")

    # -- split evaluations ---------------------------------------------------

    def _k_plus_raw(self, density: np.ndarray, xi1: np.ndarray) -> np.ndarray:
        xi1 = np.asarray(xi1, dtype=complex)
        den = self.t_nodes + xi1[..., None]
        acc = np.sum(self.w_nodes * density / den, axis=-1)
        return np.exp(-acc / (2j * np.pi))

    def _min_cut_distance(self, pts: np.ndarray) -> np.ndarray:
        """Distance from each point's reflection to the jump path."""
        z = -np.asarray(pts, dtype=complex)
        dmin = np.full(z.shape, np.inf)
        for a, b in _path_segments(self.bd):
            a, b = complex(a), complex(b)
            u = b - a
            L2 = abs(u) ** 2
            if L2 < 1e-28:
                dmin = np.minimum(dmin, np.abs(z - a))
                continue
            s = np.clip(((z - a) * np.conj(u)).real / L2, 0.0, 1.0)
            dmin = np.minimum(dmin, np.abs(z - (a + s * u)))
        return dmin

    def k_plus(self, which: str, xi1) -> np.ndarray:
        """Upper-half-plane split factor; raises OnCut when the reflected
        argument sits on the jump path (use k_plus_on_cut there)."""
        self._require_kernels()
        xi1 = np.asarray(xi1, dtype=complex)
        if np.any(self._min_cut_distance(np.atleast_1d(xi1)) < 1e-9):
            raise OnCut("argument reflects onto the jump path")
        d = self.d0_nodes if which == KERNEL_NUM else self.d1_nodes
        return self._k_plus_raw(d, xi1)

    def k_plus_on_cut(self, which: str, xi1) -> np.ndarray:
        """Boundary value on the jump path via the reflection identity
        K+(x) = K(x) / K+(-x)."""
        self._require_kernels()
        xi1 = np.asarray(xi1, dtype=complex)
        d = self.d0_nodes if which == KERNEL_NUM else self.d1_nodes
        return self.kernel_value(which, xi1) / self._k_plus_raw(d, -xi1)

    def k_plus_any(self, which: str, xi1) -> np.ndarray:
        """k_plus with automatic on-path dispatch, elementwise."""
        self._require_kernels()
        shape = np.shape(np.asarray(xi1))
        xi1 = np.atleast_1d(np.asarray(xi1, dtype=complex))
        d = self.d0_nodes if which == KERNEL_NUM else self.d1_nodes
        out = np.empty(xi1.shape, dtype=complex)
        oncut = self._min_cut_distance(xi1) < 1e-9
        if np.any(~oncut):
            out[~oncut] = self._k_plus_raw(d, xi1[~oncut])
        if np.any(oncut):
            out[oncut] = self.k_plus_on_cut(which, xi1[oncut])
        return out.reshape(shape)

    def _require_kernels(self):
        if not self.has_kernels:
            raise DegenerateKernel("factor table built without kernels")

    # -- assembled plus factors ---------------------------------------------

    def mu_plus(self, i: int, xi1) -> np.ndarray:
        """Plus factor of traction eigenvalue i (1..3) at xi1.

        Minus factors are mu_plus evaluated at -xi1.  The quartic factor
        carries the split kernels and the surface-pole zero; the
        horizontally-polarized factor is a pure radical.
        """
        xi1 = np.asarray(xi1, dtype=complex)
        bd, cp = self.bd, sp.case_params(self.case, self._m)
        shape = np.broadcast_shapes(xi1.shape, ())

        def quartic_plus():
            pref = np.sqrt(1j * self.l0 / (4.0 * self.l1 * cp.Av))
            num = self.k_plus_any(KERNEL_NUM, xi1)
            den = (sp.gamma_plus(xi1, bd.kappa3)
                   * self.k_plus_any(KERNEL_DEN, xi1))
            return pref * num / den * (self.rayleigh.kappa_R + xi1)

        def shear_ratio():
            return ((cp.Av / cp.Ah) ** 0.25
                    * sp.gamma_plus(xi1, bd.kappa2)
                    / sp.gamma_plus(xi1, bd.kappa1))

        if self.case is CrackCase.AXIS_PERP:
            if i == 1:
                return quartic_plus()
            if i == 2:
                root = (-0.25 * self._m.B1 * self._m.B3 + 0j) ** 0.25
                return root * sp.gamma_plus(xi1, bd.kappa4)
            if i == 3:
                return shear_ratio() * quartic_plus()
        else:
            if i == 1:
                root = (-0.25 * self._m.B1 * self._m.B3 + 0j) ** 0.25
                return root * sp.gamma_plus(xi1, bd.kappa2)
            if i == 3:
                return quartic_plus()
            if i == 2:
                return shear_ratio() * quartic_plus()
        raise ValueError("i must be 1, 2 or 3")

    def mu_minus(self, i: int, xi1) -> np.ndarray:
        return self.mu_plus(i, -np.asarray(xi1, dtype=complex))

    # -- persistence ----------------------------------------------------------

    def save(self, path) -> None:
        """Cache the quadrature; keyed by (moduli, case, xi2, nodes)."""
        np.savez(path,
                 version=_TABLE_VERSION,
                 case=self.case.value,
                 xi2=self.xi2,
                 moduli_key=np.array(self.moduli_key),
                 n_half=self.n_half,
                 segment_signs=np.array(self.segment_signs),
                 t_nodes=self.t_nodes, w_nodes=self.w_nodes,
                 d0_nodes=self.d0_nodes, d1_nodes=self.d1_nodes)

    @classmethod
    def load(cls, path, m: NondimMaterial) -> "FactorTable":
        data = np.load(path, allow_pickle=False)
        if int(data["version"]) != _TABLE_VERSION:
            raise FactorizationError("factor-table cache version mismatch")
        if tuple(data["moduli_key"]) != m.moduli_key():
            raise FactorizationError("factor-table cache is for another material")
        case = CrackCase.parse(str(data["case"]))
        xi2 = float(data["xi2"])
        bd = sp.branch_points(case, xi2, m)
        cp = sp.case_params(case, m)
        ray = sp.rayleigh_pole(xi2, case, m)
        return cls(case=case, xi2=xi2, moduli_key=m.moduli_key(), bd=bd,
                   rayleigh=ray, l0=cp.l0, l1=l1_constant(cp),
                   n_half=int(data["n_half"]),
                   segment_signs=tuple(data["segment_signs"]),
                   t_nodes=data["t_nodes"], w_nodes=data["w_nodes"],
                   d0_nodes=data["d0_nodes"], d1_nodes=data["d1_nodes"], _m=m)


# module-level conveniences mirroring the table methods

def k_plus(which: str, xi1, table: FactorTable) -> np.ndarray:
    return table.k_plus(which, xi1)


def on_cut_k_plus(which: str, xi1, table: FactorTable) -> np.ndarray:
    return table.k_plus_on_cut(which, xi1)


def mu_plus(i: int, xi1, table: FactorTable) -> np.ndarray:
    return table.mu_plus(i, xi1)
