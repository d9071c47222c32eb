"""Explicit hypocoercive decay certificates.

For a generator alpha * i[H,.] + L^D whose dissipator kernel is nontrivial
and not mixed into itself by the Hamiltonian, the certified rate is

    nu = lambda_D / (C1^2 + lambda_D C2^2),      C_T = e^{nu T},

with C1, C2 fully explicit functions of four structural constants: the
dissipation gap lambda_D on the complement of the kernel, the coupling
strength s_H of the Hamiltonian between kernel and complement, and the two
norms ||L^D|| and ||L^H Pi_+||.  The time-window length T is a free knob;
T = 3/s_H gives a closed form, and a scan plus golden-section refinement
locates the best T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lindblad import (
    Lindbladian,
    SpaceSplit,
    dag,
    generator_matrix,
    hermiticity_defect,
    kernel_projection,
)
from .operators import KmsFrame, QuantumState, kms_frame
from .spectral import hamiltonian_superop

ASSUMPTION_DEFECT_FACTOR = 1e-9
INJECTIVITY_TOL = 1e-10


@dataclass
class StructuralConstants:
    lambda_D: float
    s_H: float
    norm_LD: float
    norm_LH_plus: float

    @property
    def norm_sqrt_LD(self) -> float:
        return math.sqrt(self.norm_LD)

    def as_dict(self) -> dict:
        return {
            "lambda_D": self.lambda_D,
            "s_H": self.s_H,
            "norm_LD": self.norm_LD,
            "norm_LH_plus": self.norm_LH_plus,
        }


@dataclass
class RateCertificate:
    T: float
    beta: float
    C1: float
    C2: float
    nu: float
    prefactor: float
    constants: StructuralConstants
    assumption_ok: bool
    assumption_defect: float
    simplified_nu: float | None = None

    def as_dict(self) -> dict:
        out = {
            "method": "hypocoercive",
            "T": self.T,
            "beta": self.beta,
            "C1": self.C1,
            "C2": self.C2,
            "nu": self.nu,
            "C_T": self.prefactor,
            "constants": self.constants.as_dict(),
            "assumption_ok": self.assumption_ok,
            "assumption_defect": self.assumption_defect,
        }
        if self.simplified_nu is not None:
            out["simplified_nu"] = self.simplified_nu
        return out


@dataclass
class CoerciveCertificate:
    """Decay guarantee for a generator that is already coercive.

    The dissipator alone has a positive gap on the whole traceless subspace,
    so the semigroup contracts at rate nu = lambda with prefactor 1; C_T is
    still reported so the same window checks apply.
    """

    nu: float
    T: float
    prefactor: float
    lambda_gap: float
    singular_gap: float

    def as_dict(self) -> dict:
        return {
            "method": "coercive",
            "T": self.T,
            "nu": self.nu,
            "C_T": self.prefactor,
            "lambda_gap": self.lambda_gap,
            "singular_gap": self.singular_gap,
        }


def check_assumption(H, split: SpaceSplit) -> tuple[bool, float]:
    """Nontrivial kernel and no coherent mixing inside it.

    defect = ||Pi0 M_H Pi0||; ok iff dim h0 >= 1 and the defect is below
    1e-9 * ||M_H||.
    """
    MH = hamiltonian_superop(H, split.frame, restricted=True).matrix
    V0 = split.basis0
    if V0.shape[1] == 0:
        return False, 0.0
    block = dag(V0) @ MH @ V0
    defect = float(np.linalg.norm(block, 2))
    scale = max(np.linalg.norm(MH, 2), 1e-30)
    return defect < ASSUMPTION_DEFECT_FACTOR * scale, defect


def structural_constants(H, LD: Lindbladian, state: QuantumState,
                         frame: KmsFrame | None = None,
                         split: SpaceSplit | None = None) -> StructuralConstants:
    """(lambda_D, s_H, ||L^D||, ||L^H Pi_+||) for the certificate formulas."""
    if frame is None:
        frame = kms_frame(state)
    if split is None:
        split = kernel_projection(LD, state, frame)
    if split.dim0 == 0:
        raise ValueError("dissipator kernel is trivial; the model is coercive")
    if split.dim_plus == 0:
        raise ValueError("dissipator vanishes on the traceless subspace")
    MD = generator_matrix(LD, frame, restricted=True).matrix
    MD = (MD + dag(MD)) / 2.0
    MH = hamiltonian_superop(H, frame, restricted=True).matrix
    V0, Vp = split.basis0, split.basis_plus
    lambda_D = float(np.linalg.eigvalsh(dag(Vp) @ (-MD) @ Vp)[0])
    cross = dag(Vp) @ MH @ V0
    if split.dim0 > split.dim_plus:
        s_H = 0.0
    else:
        s_H = float(np.linalg.svd(cross, compute_uv=False)[-1])
    if s_H < INJECTIVITY_TOL:
        raise ValueError(
            "coherent coupling does not move the dissipator kernel "
            f"(s_H = {s_H:.3e}); the model is not primitive under this split")
    norm_LD = float(np.linalg.norm(MD, 2))
    Pp = split.pi_plus.matrix
    norm_LH_plus = float(np.linalg.norm(MH @ Pp, 2))
    return StructuralConstants(lambda_D=lambda_D, s_H=s_H,
                               norm_LD=norm_LD, norm_LH_plus=norm_LH_plus)


def c_constants(sc: StructuralConstants, T: float,
                beta: float = 0.0) -> tuple[float, float]:
    """The two explicit certificate constants at window length T.

    C1 = sqrt2 + 14 + 12 sqrt5/(s_H T) + 24/(s_H T)^2
         + sqrt2 * max{6/(s_H^2 T) + 3/s_H, T/pi} * ||L^H Pi_+||
    C2 = sqrt2 * sqrt(beta + ||L^D||)
         * (max{6/(s_H^2 T) + 3/s_H, T/pi} + max{1/s_H, T/pi})
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    sH = sc.s_H
    m1 = max(6.0 / (sH**2 * T) + 3.0 / sH, T / math.pi)
    m2 = max(1.0 / sH, T / math.pi)
    C1 = (math.sqrt(2.0) + 14.0 + 12.0 * math.sqrt(5.0) / (sH * T)
          + 24.0 / (sH * T) ** 2 + math.sqrt(2.0) * m1 * sc.norm_LH_plus)
    C2 = math.sqrt(2.0) * math.sqrt(beta + sc.norm_LD) * (m1 + m2)
    return float(C1), float(C2)


def c_constants_trivial_kernel(norm_LD: float, norm_LH: float, T: float,
                               beta: float = 0.0) -> tuple[float, float]:
    """Certificate constants when the dissipator kernel is trivial.

    With nothing to couple out of, every 1/s_H term drops (the coupling is
    vacuously infinite) and only the time-Poincare branch T/pi survives:

        C1 = sqrt2 + 14 + sqrt2 * (T/pi) * ||L^H||
        C2 = 2 sqrt2 * sqrt(beta + ||L^D||) * T/pi

    C1 >= 1 covers the state variance directly and C2 >= sqrt(beta) T/pi
    covers the time variance of the mean, so the bound stays valid.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    g = T / math.pi
    C1 = math.sqrt(2.0) + 14.0 + math.sqrt(2.0) * g * norm_LH
    C2 = 2.0 * math.sqrt(2.0) * math.sqrt(beta + norm_LD) * g
    return float(C1), float(C2)


def rate_from_constants(sc: StructuralConstants, T: float) -> float:
    C1, C2 = c_constants(sc, T, 0.0)
    return sc.lambda_D / (C1**2 + sc.lambda_D * C2**2)


def simplified_rate(sc: StructuralConstants) -> float:
    """Closed form at T = 3/s_H using the slightly loosened C1 <= 28 + ..."""
    num = sc.lambda_D * sc.s_H**2
    den = (28.0 * sc.s_H + 5.0 * math.sqrt(2.0) * sc.norm_LH_plus) ** 2 \
        + 72.0 * sc.lambda_D * sc.norm_LD
    return num / den


def certify(H, LD: Lindbladian, state: QuantumState, T: float | None = None,
            frame: KmsFrame | None = None) -> RateCertificate:
    """Emit a decay certificate (nu, T, C_T) for alpha=1 coupling.

    For other couplings pass alpha * H.  Refuses coercive models (use
    certify_coercive) and models whose Hamiltonian mixes the dissipator
    kernel into itself.
    """
    if frame is None:
        frame = kms_frame(state)
    split = kernel_projection(LD, state, frame)
    if split.dim0 == 0:
        raise ValueError(
            "dissipator kernel is trivial (coercive model); "
            "this certificate route does not apply")
    ok, defect = check_assumption(H, split)
    if not ok:
        raise ValueError(
            f"Hamiltonian mixes the dissipator kernel into itself "
            f"(defect {defect:.3e}); certificate refused")
    sc = structural_constants(H, LD, state, frame=frame, split=split)
    if T is None:
        T = 3.0 / sc.s_H
    T = float(T)
    C1, C2 = c_constants(sc, T, 0.0)
    nu = sc.lambda_D / (C1**2 + sc.lambda_D * C2**2)
    simplified = None
    if abs(T - 3.0 / sc.s_H) <= 1e-12 * T:
        simplified = simplified_rate(sc)
    return RateCertificate(T=T, beta=0.0, C1=C1, C2=C2, nu=float(nu),
                           prefactor=float(math.exp(nu * T)), constants=sc,
                           assumption_ok=True, assumption_defect=defect,
                           simplified_nu=simplified)


def certify_coercive(LD: Lindbladian, state: QuantumState,
                     T: float | None = None,
                     frame: KmsFrame | None = None) -> CoerciveCertificate:
    """Decay certificate for a KMS-symmetric generator with trivial kernel.

    nu equals the gap on the traceless subspace; any window length T works,
    the default keeps nu * T = 1/2.
    """
    if frame is None:
        frame = kms_frame(state)
    M = generator_matrix(LD, frame, restricted=True).matrix
    defect = hermiticity_defect(M)
    if defect > 1e-8:
        raise ValueError(
            f"generator is not Hermitian in the weighted frame (defect {defect:.3e})")
    Hm = -(M + dag(M)) / 2.0
    w = np.linalg.eigvalsh(Hm)
    gap = float(w[0])
    scale = max(abs(w[-1]), 1e-30)
    if gap <= 1e-9 * scale:
        raise ValueError("generator has a nontrivial kernel; it is not coercive")
    if T is None:
        T = 1.0 / (2.0 * gap)
    T = float(T)
    s = float(np.linalg.svd(M, compute_uv=False)[-1])
    return CoerciveCertificate(nu=gap, T=T, prefactor=float(math.exp(gap * T)),
                               lambda_gap=gap, singular_gap=s)


def optimize_T(sc: StructuralConstants, grid=None,
               golden_iters: int = 40) -> tuple[float, float]:
    """Best window length: log-grid scan plus golden-section refinement.

    The returned rate is never below the T = 3/s_H value.
    """
    if grid is None:
        lo, hi = 1e-2 / sc.s_H, 1e2 / sc.s_H
        grid = np.logspace(math.log10(lo), math.log10(hi), 60)
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        raise ValueError("empty T grid")
    vals = np.array([rate_from_constants(sc, T) for T in grid])
    i = int(np.argmax(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - phi * (b - a)
    x2 = a + phi * (b - a)
    f1 = rate_from_constants(sc, x1)
    f2 = rate_from_constants(sc, x2)
    for _ in range(golden_iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + phi * (b - a)
            f2 = rate_from_constants(sc, x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - phi * (b - a)
            f1 = rate_from_constants(sc, x1)
    candidates = [(float(grid[i]), float(vals[i])),
                  (float(x1), float(f1)), (float(x2), float(f2))]
    t_ref = 3.0 / sc.s_H
    candidates.append((t_ref, rate_from_constants(sc, t_ref)))
    T_star, nu_star = max(candidates, key=lambda p: p[1])
    return T_star, nu_star


@dataclass
class ScalingReport:
    gamma_star: float
    nu_gamma_star: float
    alpha_limit: float
    alphas: list[float]
    alpha_bounds: list[float]
    gammas: list[float]
    gamma_bounds: list[float]


def alpha_gamma_scaling(sc: StructuralConstants, T: float | None = None,
                        alphas=None, gammas=None) -> ScalingReport:
    """Rate bounds under coupling rescaling.

    Scaling the dissipator by gamma gives nu >= gamma lambda_D /
    (C1^2 + gamma^2 lambda_D C2^2), maximized at gamma* = C1/(sqrt(lambda_D) C2).
    Scaling the Hamiltonian by alpha gives nu >= lambda_D /
    (C1^2 + lambda_D C2^2 / alpha^2), increasing to lambda_D/C1^2.
    """
    if T is None:
        T = 3.0 / sc.s_H
    C1, C2 = c_constants(sc, T, 0.0)
    lam = sc.lambda_D
    gamma_star = C1 / (math.sqrt(lam) * C2)

    def nu_gamma(g: float) -> float:
        return g * lam / (C1**2 + g**2 * lam * C2**2)

    def nu_alpha(a: float) -> float:
        return lam / (C1**2 + lam * C2**2 / a**2)

    if alphas is None:
        alphas = np.logspace(-1, 4, 20)
    if gammas is None:
        gammas = np.logspace(math.log10(gamma_star) - 2,
                             math.log10(gamma_star) + 2, 20)
    alphas = [float(a) for a in alphas]
    gammas = [float(g) for g in gammas]
    return ScalingReport(
        gamma_star=float(gamma_star),
        nu_gamma_star=float(nu_gamma(gamma_star)),
        alpha_limit=float(lam / C1**2),
        alphas=alphas,
        alpha_bounds=[float(nu_alpha(a)) for a in alphas],
        gammas=gammas,
        gamma_bounds=[float(nu_gamma(g)) for g in gammas],
    )


@dataclass
class DmsReport:
    eta: float
    C_M: float
    epsilon: float
    nu_dms: float
    C_dms: float


def dms_compare(sc: StructuralConstants, eta: float | None = None) -> DmsReport:
    """Rate and prefactor of the auxiliary-functional comparison method.

    Uses the bounded-modification constant C_M(eta) <= (||L^H Pi_+|| +
    ||L^D||)/(2 sqrt(eta)); the default eta = s_H^2 balances the two terms.
    """
    if eta is None:
        eta = sc.s_H**2
    if eta <= 0:
        raise ValueError("eta must be positive")
    C_M = (sc.norm_LH_plus + sc.norm_LD) / (2.0 * math.sqrt(eta))
    eps = 0.5 * min(sc.lambda_D * sc.s_H**2 / ((eta + sc.s_H**2) * (1.0 + C_M) ** 2),
                    1.0)
    nu_dms = min(sc.lambda_D / (4.0 * (1.0 + eps)),
                 eps * sc.s_H**2 / (3.0 * (1.0 + eps) * (eta + sc.s_H**2)))
    C_dms = math.sqrt((1.0 + eps) / (1.0 - eps))
    return DmsReport(eta=float(eta), C_M=float(C_M), epsilon=float(eps),
                     nu_dms=float(nu_dms), C_dms=float(C_dms))
