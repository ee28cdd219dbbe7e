"""Fisher-information forms and closed-form Gaussian chi-square divergences.

For both observation models the Fisher information along a one-parameter
subgroup exp(t*xi) exists as a quadratic form in xi, and it equals the
small-t limit of chi2(P_{exp(t xi)}, P_I)/t^2.  The chi-square divergences
are evaluated in closed form (log-domain, expm1/log1p) because verifying
that limit numerically needs 12+ significant digits at t ~ 1e-4; Monte
Carlo estimates of the same divergences live in the test suite as an
independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .linalg import OrthMatrix, SkewMatrix, skew_exp, sym_eig, vech, vech_diag_mask
from .models import CovModel, DenoiseModel


def _check_direction(xi: SkewMatrix, p: int) -> np.ndarray:
    if not isinstance(xi, SkewMatrix):
        xi = SkewMatrix(xi)
    if xi.dim != p:
        raise InvalidInput(f"direction has dim {xi.dim}, expected {p}")
    return xi.a


def fisher_cov(model: CovModel, xi: SkewMatrix) -> float:
    """(n/2) sum_ij xi_ij^2 (lam_i - lam_j)^2 / (lam_i lam_j)."""
    x = _check_direction(xi, model.p)
    lam = model.spectrum.lambdas
    if not lam[-1] > 0:
        raise InvalidInput("covariance Fisher form needs lam_p > 0")
    gaps = lam[:, None] - lam[None, :]
    coef = gaps * gaps / (lam[:, None] * lam[None, :])
    return float(0.5 * model.n * np.sum(x * x * coef))


def fisher_denoise(model: DenoiseModel, xi: SkewMatrix) -> float:
    """(1 / (2 sigma^2)) sum_ij xi_ij^2 (lam_i - lam_j)^2."""
    x = _check_direction(xi, model.p)
    if not model.sigma > 0:
        raise InvalidInput("sigma must be > 0")
    gaps = model.spectrum.lambdas[:, None] - model.spectrum.lambdas[None, :]
    return float(np.sum(x * x * gaps * gaps) / (2.0 * model.sigma**2))


def chi2_gauss_cov(model: CovModel, u: OrthMatrix) -> float:
    """chi-square divergence of the n-sample law at U from the one at I.

    Single-sample value for centered Gaussians N(0, S1) vs N(0, S0):
    with m the eigenvalues of S0^{-1/2} S1 S0^{-1/2},

        1 + chi2_1 = prod_k (m_k (2 - m_k))^{-1/2},

    finite iff every m_k < 2; the n-fold product law gives
    chi2_n = (1 + chi2_1)^n - 1, computed as expm1(n * log1p(chi2_1)).
    Returns +inf when the definiteness condition fails.
    """
    if u.dim != model.p:
        raise InvalidInput(f"dimension mismatch: U is {u.dim}x{u.dim}, p={model.p}")
    lam = model.spectrum.lambdas
    scale = 1.0 / np.sqrt(lam)
    sigma1 = (u.a * lam) @ u.a.T
    if np.array_equal(sigma1, np.diag(lam)):
        return 0.0
    m = scale[:, None] * sigma1 * scale[None, :]
    mvals = sym_eig(m).values
    args = (1.0 - mvals) ** 2
    if np.any(args >= 1.0):
        return float("inf")
    log_one_plus_chi1 = -0.5 * float(np.sum(np.log1p(-args)))
    return float(np.expm1(model.n * log_one_plus_chi1))


def meanshift_quadratic(model: DenoiseModel, u: OrthMatrix) -> float:
    """Quadratic form Delta^T (sigma^2 Sigma_W)^{-1} Delta of the mean shift.

    Delta = vech(U diag(lam) U^T - diag(lam)); Sigma_W is the diagonal
    covariance of the half-vectorized GOE matrix (2 on diagonal positions,
    1 elsewhere).
    """
    if u.dim != model.p:
        raise InvalidInput(f"dimension mismatch: U is {u.dim}x{u.dim}, p={model.p}")
    lam = model.spectrum.lambdas
    delta = vech((u.a * lam) @ u.a.T - np.diag(lam))
    inv_w = np.where(vech_diag_mask(model.p), 0.5, 1.0) / model.sigma**2
    return float(np.sum(inv_w * delta * delta))


def chi2_gauss_meanshift(model: DenoiseModel, u: OrthMatrix) -> float:
    """chi-square divergence for equal-covariance Gaussians: expm1(quadratic)."""
    return float(np.expm1(meanshift_quadratic(model, u)))


@dataclass(frozen=True)
class FisherForm:
    """The Fisher quadratic form of one model, with its matching chi-square."""

    model: CovModel | DenoiseModel

    @property
    def kind(self) -> str:
        return "covariance" if isinstance(self.model, CovModel) else "denoising"

    @property
    def p(self) -> int:
        return self.model.p

    def quad(self, xi: SkewMatrix) -> float:
        if isinstance(self.model, CovModel):
            return fisher_cov(self.model, xi)
        return fisher_denoise(self.model, xi)

    def pair(self, xi: SkewMatrix, eta: SkewMatrix) -> float:
        """Bilinear value by polarization: (Q(xi+eta) - Q(xi-eta)) / 4."""
        xa = _check_direction(xi, self.p)
        ea = _check_direction(eta, self.p)
        plus = self.quad(SkewMatrix(xa + ea))
        minus = self.quad(SkewMatrix(xa - ea))
        return 0.25 * (plus - minus)

    def generator_quad(self, i: int, j: int) -> float:
        """Closed form of the quadratic form on the generator L(i, j)."""
        lam = self.model.spectrum.lambdas
        gap = lam[i] - lam[j]
        if isinstance(self.model, CovModel):
            return float(self.model.n * gap * gap / (lam[i] * lam[j]))
        return float(gap * gap / self.model.sigma**2)

    def chi2(self, u: OrthMatrix) -> float:
        if isinstance(self.model, CovModel):
            return chi2_gauss_cov(self.model, u)
        return chi2_gauss_meanshift(self.model, u)


def extrapolate_to_zero(ts, fs) -> float:
    """Polynomial (Richardson-type) extrapolation of f(t) to t = 0."""
    ts = np.asarray(ts, dtype=np.float64)
    fs = np.asarray(fs, dtype=np.float64)
    total = 0.0
    for i in range(ts.size):
        weight = 1.0
        for j in range(ts.size):
            if j != i:
                weight *= ts[j] / (ts[j] - ts[i])
        total += weight * fs[i]
    return float(total)


DEFAULT_T_GRID = (1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class FisherLimitReport:
    """Comparison of the extrapolated chi2(t)/t^2 limit with the closed form."""

    kind: str
    t_grid: tuple
    ratios: tuple
    extrapolated: float
    closed_form: float
    rel_error: float
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "t_grid": list(self.t_grid),
            "ratios": list(self.ratios),
            "extrapolated": self.extrapolated,
            "closed_form": self.closed_form,
            "rel_error": self.rel_error,
            "status": "PASS" if self.passed else "FAIL",
        }


def verify_fisher_limit(
    form: FisherForm,
    xi: SkewMatrix,
    t_grid=DEFAULT_T_GRID,
    rel_tol: float = 1e-3,
    zero_atol: float = 1e-9,
) -> FisherLimitReport:
    """Check that chi2(exp(t xi))/t^2 converges to the Fisher value.

    Evaluates the ratio on a decreasing grid of t, extrapolates to t = 0,
    and compares with the closed-form quadratic form; PASS when the
    relative error is below rel_tol (absolute zero_atol when the target
    vanishes).
    """
    ts = tuple(float(t) for t in t_grid)
    if not all(t > 0 for t in ts) or any(b >= a for a, b in zip(ts, ts[1:])):
        raise InvalidInput("t_grid must be positive and decreasing")
    target = form.quad(xi)
    ratios = []
    for t in ts:
        value = form.chi2(skew_exp(xi, t))
        ratios.append(value / (t * t))
    if all(np.isfinite(r) for r in ratios):
        extrapolated = extrapolate_to_zero(ts, ratios)
    else:
        extrapolated = float("inf")
    if target == 0.0:
        rel_error = abs(extrapolated)
        passed = rel_error <= zero_atol
    else:
        rel_error = abs(extrapolated - target) / abs(target)
        passed = bool(np.isfinite(extrapolated) and rel_error <= rel_tol)
    return FisherLimitReport(
        kind=form.kind,
        t_grid=ts,
        ratios=tuple(float(r) for r in ratios),
        extrapolated=float(extrapolated),
        closed_form=float(target),
        rel_error=float(rel_error),
        passed=passed,
    )
