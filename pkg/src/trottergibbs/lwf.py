"""Low-weight Fourier approximation of the Boltzmann factor.

The target is f(x) = exp(-beta (x+1)) on [-1+delta, 1-delta].  Starting
from the Taylor coefficients a_k = exp(-beta) (-beta)^k / k!, each monomial
x^k is rewritten through x = (2/pi) arcsin(sin(pi x / 2)):

    x^k = sum_l b_l^k sin^l(pi x / 2),

and sin^l is expanded into exponentials, keeping only frequencies |m| <= M:

    f(x) ~ sum_{m=-M}^{M} c_m exp(i pi m x / 2).

The payoff is the one-norm bound ||c||_1 <= ||a||_1, which certifies the
coefficients as an admissible polynomial target for unitary processing on
the whole unit circle, not just on the approximation window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

LN2 = math.log(2.0)


class ApproximationError(ValueError):
    """Requested accuracy is unattainable; carries the error split."""

    def __init__(self, message: str, split: dict | None = None):
        super().__init__(message)
        self.split = split or {}


@dataclass
class TaylorSeries:
    """Truncated Taylor expansion of exp(-beta (x+1)) around 0."""

    beta: float
    coeffs: np.ndarray  # a_k = exp(-beta) (-beta)^k / k!, k = 0..K

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def one_norm(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    @property
    def tail_bound(self) -> float:
        """l1 mass beyond order K; the full series has one-norm exactly 1."""
        return max(0.0, 1.0 - self.one_norm)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coeffs)


def gibbs_taylor(beta: float, order: int) -> TaylorSeries:
    """Taylor coefficients of exp(-beta (x+1)) up to the given order."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if order < 0:
        raise ValueError("order must be >= 0")
    coeffs = np.empty(order + 1)
    coeffs[0] = math.exp(-beta)
    for k in range(1, order + 1):
        coeffs[k] = coeffs[k - 1] * (-beta) / k
    return TaylorSeries(beta, coeffs)


def taylor_order(beta: float, eps: float) -> int:
    """Smallest K with exp(-beta) beta^(K+1) / (K+1)! < eps / 8.

    The leading-term rule only bounds the tail once the terms are actually
    decaying (K >= beta), so the true l1 tail is required to be under the
    same budget as well.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    k = 0
    term = math.exp(-beta) * beta  # order K=0 bound: term for k=1
    partial = math.exp(-beta)
    while term >= eps / 8.0 or 1.0 - partial >= eps / 8.0:
        k += 1
        partial += term
        term *= beta / (k + 1)
        if k > 10_000:
            raise ApproximationError("Taylor order does not converge")
    return k


def arcsin_series(k: int, order: int) -> np.ndarray:
    """Coefficients b_l of ((2/pi) arcsin(y))^k up to y^order.

    Built by repeated Cauchy products of the arcsin series with itself;
    all coefficients are nonnegative and sum to at most 1.
    """
    if k < 0 or order < 0:
        raise ValueError("k and order must be >= 0")
    base = np.zeros(order + 1)
    for j in range(0, (order - 1) // 2 + 1):
        l = 2 * j + 1
        if l > order:
            break
        log_c = gammaln(2 * j + 1) - 2 * gammaln(j + 1) - j * 2 * LN2 - math.log(2 * j + 1)
        base[l] = (2.0 / math.pi) * math.exp(log_c)
    out = np.zeros(order + 1)
    out[0] = 1.0
    for _ in range(k):
        out = np.convolve(out, base)[: order + 1]
    return out


def lwf_order(one_norm_a: float, delta: float, eps: float) -> int:
    """Fourier cutoff M = max(2 ceil(ln(4 ||a||_1 / eps) / delta), 0)."""
    if not 0 < delta <= 1:
        raise ValueError("delta must be in (0, 1]")
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    if one_norm_a <= 0:
        raise ValueError("one_norm_a must be positive")
    return max(2 * math.ceil(math.log(4.0 * one_norm_a / eps) / delta), 0)


@dataclass
class FourierApprox:
    """Assembled coefficients c_m, m = -M..M, with their error certificate."""

    beta: float
    delta: float
    M: int
    c: np.ndarray  # complex, index m + M
    eps: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def one_norm(self) -> float:
        return float(np.sum(np.abs(self.c)))

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    def reconstruct(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        phases = np.exp(1j * (math.pi / 2.0) * np.outer(x, self.frequencies))
        return phases @ self.c

    def target(self, x: np.ndarray) -> np.ndarray:
        return np.exp(-self.beta * (np.asarray(x, dtype=float) + 1.0))

    def sup_error(self, grid_size: int = 1000) -> float:
        grid = np.linspace(-1.0 + self.delta, 1.0 - self.delta, grid_size)
        return float(np.max(np.abs(self.target(grid) - self.reconstruct(grid))))


def _combined_series(ts: TaylorSeries, order: int) -> np.ndarray:
    """B_l = sum_k a_k b_l^k: the y-series of f pulled through arcsin."""
    base = arcsin_series(1, order)
    acc = np.zeros(order + 1)
    acc[0] = 1.0
    combined = ts.coeffs[0] * acc
    for k in range(1, len(ts.coeffs)):
        acc = np.convolve(acc, base)[: order + 1]
        combined = combined + ts.coeffs[k] * acc
    return combined


def _mapped_tail(ts: TaylorSeries, delta: float, order: int) -> float:
    """l1 mass the arcsin truncation at ``order`` leaves behind on the window."""
    y_max = math.cos(math.pi * delta / 2.0)
    base = arcsin_series(1, order)
    damp = y_max ** np.arange(order + 1)
    acc = np.zeros(order + 1)
    acc[0] = 1.0
    tail = 0.0
    full = 1.0  # ((2/pi) arcsin(y_max))^k = (1 - delta)^k
    for k in range(1, len(ts.coeffs)):
        acc = np.convolve(acc, base)[: order + 1]
        full *= 1.0 - delta
        tail += abs(ts.coeffs[k]) * max(0.0, full - float(np.dot(acc, damp)))
    return tail


def _choose_arcsin_order(ts: TaylorSeries, delta: float, eps: float, start: int = 64, cap: int = 4096) -> int:
    order = start
    while _mapped_tail(ts, delta, order) >= eps / 8.0:
        if order >= cap:
            raise ApproximationError(
                f"arcsin truncation at L={order} cannot reach eps={eps:.3e}",
                split={"arcsin_tail": _mapped_tail(ts, delta, order)},
            )
        order *= 2
    return order


def _assemble(combined: np.ndarray, m_cut: int) -> tuple[np.ndarray, float]:
    """Collapse the triple sum to coefficients c_m, |m| <= m_cut.

    For fixed l the frequency is m = 2j - l with binomial index j, so each
    (l, m) pair contributes B_l i^l (-1)^j binom(l, j) / 2^l.  Contributions
    per frequency are summed in ascending magnitude to control round-off.
    Returns the coefficients and the l1 mass dropped outside the window.
    """
    order = len(combined) - 1
    ls = np.arange(order + 1)
    i_pow = np.array([1, 1j, -1, -1j])  # exact powers of i
    c = np.zeros(2 * m_cut + 1, dtype=complex)
    dropped = 0.0
    log_half = LN2
    for m in range(-m_cut, m_cut + 1):
        lsub = ls[(ls >= abs(m)) & ((ls - m) % 2 == 0)]
        if lsub.size == 0:
            continue
        j = (lsub + m) // 2
        log_pmf = gammaln(lsub + 1) - gammaln(j + 1) - gammaln(lsub - j + 1) - lsub * log_half
        signs = np.where(j % 2 == 0, 1.0, -1.0)
        vals = combined[lsub] * i_pow[lsub % 4] * signs * np.exp(log_pmf)
        vals = vals[np.argsort(np.abs(vals))]
        c[m + m_cut] = np.sum(vals)
    # l1 mass of the dropped binomial tails, for the error report.
    for l in range(m_cut + 1, order + 1):
        j = np.arange(0, (l - m_cut - 1) // 2 + 1)
        log_pmf = gammaln(l + 1) - gammaln(j + 1) - gammaln(l - j + 1) - l * log_half
        dropped += 2.0 * abs(combined[l]) * float(np.sum(np.exp(log_pmf)))
    return c, dropped


def lwf_coefficients(
    ts: TaylorSeries,
    delta: float,
    eps: float,
    grid_size: int = 1000,
) -> FourierApprox:
    """Assemble the Fourier coefficients and verify the error certificate.

    Raises ApproximationError, with the Taylor/arcsin/binomial error split,
    when the requested eps is out of reach for the given Taylor order or
    when the assembled coefficients miss the certificate on the grid.
    """
    m_cut = lwf_order(ts.one_norm, delta, eps)
    taylor_tail = ts.tail_bound
    if taylor_tail >= eps / 4.0:
        raise ApproximationError(
            f"Taylor tail {taylor_tail:.3e} >= eps/4 = {eps / 4.0:.3e}; "
            "increase the Taylor order",
            split={"taylor_tail": taylor_tail, "eps": eps},
        )
    order = _choose_arcsin_order(ts, delta, eps)
    combined = _combined_series(ts, order)
    c, dropped = _assemble(combined, m_cut)
    approx = FourierApprox(ts.beta, delta, m_cut, c, eps)
    sup_err = approx.sup_error(grid_size)
    approx.diagnostics = {
        "taylor_order": ts.order,
        "arcsin_order": order,
        "taylor_tail": taylor_tail,
        "arcsin_tail": _mapped_tail(ts, delta, order),
        "binomial_dropped": dropped,
        "grid_sup_error": sup_err,
    }
    if sup_err > eps:
        raise ApproximationError(
            f"certificate failed: grid error {sup_err:.3e} > eps {eps:.3e}",
            split=approx.diagnostics,
        )
    if approx.one_norm > ts.one_norm + 1e-12:
        raise ApproximationError(
            f"one-norm grew: ||c||_1 = {approx.one_norm:.6f} > ||a||_1 = {ts.one_norm:.6f}"
        )
    return approx


def truncation_scan(
    ts: TaylorSeries,
    delta: float,
    m_list: list[int],
    grid_size: int = 1000,
    floor_eps: float = 1e-12,
) -> list[tuple[int, float]]:
    """Best-achievable sup error for each frequency cutoff in ``m_list``.

    Coefficients are assembled once with a window wide enough for the
    largest requested cutoff, then truncated, so the scan isolates the
    cutoff's contribution from the Taylor and arcsin budgets.
    """
    if not m_list or any(m < 0 for m in m_list):
        raise ValueError("m_list must be non-empty with nonnegative entries")
    m_full = max(m_list)
    order = _choose_arcsin_order(ts, delta, floor_eps)
    combined = _combined_series(ts, order)
    c_full, _ = _assemble(combined, m_full)
    grid = np.linspace(-1.0 + delta, 1.0 - delta, grid_size)
    target = np.exp(-ts.beta * (grid + 1.0))
    out = []
    for m in m_list:
        c = c_full[m_full - m : m_full + m + 1]
        phases = np.exp(1j * (math.pi / 2.0) * np.outer(grid, np.arange(-m, m + 1)))
        err = float(np.max(np.abs(target - phases @ c)))
        out.append((m, err))
    return out


def gibbs_fourier(beta: float, delta: float, eps: float) -> FourierApprox:
    """One-call construction: size the Taylor order, then assemble."""
    ts = gibbs_taylor(beta, taylor_order(beta, eps))
    return lwf_coefficients(ts, delta, eps)
