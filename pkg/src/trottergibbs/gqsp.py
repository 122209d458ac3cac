"""Generalized quantum signal processing on a unitary.

Given a polynomial P with |P(z)| <= 1 on the unit circle, an interleaving
of single-ancilla rotations

    R(theta, phi, lam) = [[exp(i(lam+phi)) cos(theta), exp(i phi) sin(theta)],
                          [exp(i lam) sin(theta),      -cos(theta)]]

with the ancilla-controlled signal operator A = |0><0| x U + |1><1| x I
realizes P(U) in the ancilla-0 block.  Laurent targets (negative powers)
are handled by multiplying through by z^M and undoing the shift with U^-M
afterwards.

The angle synthesis needs a completion Q with |P|^2 + |Q|^2 = 1 on the
circle; it is constructed by FFT-based spectral factorization of
1 - |P|^2, taking the factor whose roots all lie inside the disk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import unitary_power

ADMISSIBLE_SLACK = 1e-9
CIRCLE_SAMPLES = 4096


class CompletionError(ValueError):
    """Spectral factorization is degenerate: |P| = 1 somewhere on the circle."""


class SynthesisError(ValueError):
    """Angle peeling hit an unstable (vanishing leading coefficient) step."""


def _circle_values(coefs: np.ndarray, n: int = CIRCLE_SAMPLES) -> np.ndarray:
    """Polynomial values on n evenly spaced points of the unit circle."""
    return np.fft.fft(coefs, n)


@dataclass
class LaurentPoly:
    """sum_{m=-M}^{M} c_m z^m with |values| <= 1 on the unit circle."""

    M: int
    c: np.ndarray  # complex, index m + M

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=complex)
        if self.c.shape != (2 * self.M + 1,):
            raise ValueError(f"need {2 * self.M + 1} coefficients, got {self.c.shape}")
        worst = float(np.max(np.abs(_circle_values(self.c))))
        if worst > 1.0 + ADMISSIBLE_SLACK:
            raise ValueError(f"not admissible: max |P| on circle = {worst:.12f} > 1")

    def scaled(self, factor: float) -> "LaurentPoly":
        return LaurentPoly(self.M, self.c * factor)


def monomial_shift(p: LaurentPoly) -> tuple[np.ndarray, int]:
    """Coefficients of z^M * P(z) in ascending powers, plus the shift M."""
    return p.c.copy(), p.M


def direct_poly_apply(p: LaurentPoly, u: np.ndarray) -> np.ndarray:
    """sum_m c_m U^m evaluated with explicit matrix powers."""
    dim = u.shape[0]
    out = p.c[p.M] * np.eye(dim, dtype=complex)
    fwd = np.eye(dim, dtype=complex)
    bwd = np.eye(dim, dtype=complex)
    udag = u.conj().T
    for m in range(1, p.M + 1):
        fwd = fwd @ u
        bwd = bwd @ udag
        out += p.c[p.M + m] * fwd + p.c[p.M - m] * bwd
    return out


def rotation(theta: float, phi: float, lam: float = 0.0) -> np.ndarray:
    """The SU(2)-style interleaving rotation used by the synthesis."""
    return np.array(
        [
            [np.exp(1j * (lam + phi)) * math.cos(theta), np.exp(1j * phi) * math.sin(theta)],
            [np.exp(1j * lam) * math.sin(theta), -math.cos(theta)],
        ]
    )


def complete_polynomial(p_coefs: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Complementary Q with |P(z)|^2 + |Q(z)|^2 = 1 on the unit circle.

    Spectral (Fejer-Riesz) factorization of G = 1 - |P|^2 by the cepstral
    route: exponentiating the analytic half of log G on a fine FFT grid
    yields the outer factor, whose conjugate reversal is the factor with
    all roots inside the disk.  That convention keeps Q's leading
    coefficient of order one, which the angle peeling needs.  No
    polynomial root-finding is involved, so the construction stays
    accurate at degrees in the thousands.
    """
    p_coefs = np.asarray(p_coefs, dtype=complex)
    d = len(p_coefs) - 1
    grid = 1 << max(13, (8 * (d + 1) - 1).bit_length())
    g = 1.0 - np.abs(_circle_values(p_coefs, grid)) ** 2
    g_max = float(np.max(g))
    if g_max <= 4.0 * ADMISSIBLE_SLACK:
        # |P| = 1 identically (a pure monomial): Q vanishes.
        return np.zeros(d + 1, dtype=complex)
    if float(np.min(g)) <= 0.0:
        raise CompletionError(
            "|P| reaches 1 on the unit circle; rescale P by (1 - 1e-6) before completing"
        )
    cepstrum = np.fft.ifft(np.log(g))
    analytic = np.zeros(grid, dtype=complex)
    analytic[0] = 0.5 * cepstrum[0]
    analytic[1 : grid // 2] = cepstrum[1 : grid // 2]
    outer_vals = np.exp(np.fft.fft(analytic))
    outer = np.fft.ifft(outer_vals)
    spill = float(np.max(np.abs(outer[d + 1 : grid - d])))
    q_coefs = np.conj(outer[d::-1])
    residual = float(
        np.max(
            np.abs(
                np.abs(_circle_values(p_coefs, grid)) ** 2
                + np.abs(_circle_values(q_coefs, grid)) ** 2
                - 1.0
            )
        )
    )
    if residual > tol:
        raise CompletionError(
            f"factorization residual {residual:.3e} exceeds {tol:.1e} "
            f"(coefficient spill {spill:.3e}); the target grazes the circle"
        )
    return q_coefs


@dataclass
class GqspAngles:
    """Rotation angles realizing a degree-d polynomial of the signal unitary."""

    theta: np.ndarray
    phi: np.ndarray
    lam: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return len(self.theta) - 1


def synthesize_angles(p_coefs: np.ndarray, q_coefs: np.ndarray) -> GqspAngles:
    """Layer-peel (P, Q) into rotation angles.

    Peels the top degree of the coefficient matrix S = [P; Q] one rotation
    at a time: theta from the magnitudes of the leading pair, phi from
    their relative phase, and lam from the final degree-0 remainder.
    """
    p_coefs = np.asarray(p_coefs, dtype=complex)
    q_coefs = np.asarray(q_coefs, dtype=complex)
    if p_coefs.shape != q_coefs.shape:
        raise ValueError("P and Q must share a coefficient length")
    s = np.vstack([p_coefs, q_coefs])
    # Strip exactly-padded top degrees (e.g. a completion of lower degree).
    # Only exact zeros: a tiny leading coefficient still fixes a rotation.
    while s.shape[1] > 1 and np.all(s[:, -1] == 0):
        s = s[:, :-1]
    d = s.shape[1] - 1
    theta = np.zeros(d + 1)
    phi = np.zeros(d + 1)
    lam = 0.0
    for step in range(d, -1, -1):
        a, b = s[0, step], s[1, step]
        mag = math.hypot(abs(a), abs(b))
        if mag == 0.0:
            raise SynthesisError(
                f"peeling unstable at degree {step}: leading coefficients vanish"
            )
        theta[step] = math.atan2(abs(b), abs(a))
        # Relative phase; the completion can leave |b| astronomically small
        # (products of in-disk roots), but its phase is still exact, so no
        # magnitude threshold here.  angle(0) == 0 keeps exact zeros benign.
        phi[step] = float(np.angle(a)) - float(np.angle(b))
        if step == 0:
            lam = float(np.angle(b))
            break
        r = rotation(theta[step], phi[step])
        s = r.conj().T @ s
        s = np.vstack([s[0, 1 : step + 1], s[1, 0:step]])
    return GqspAngles(theta, phi, lam)


def gqsp_apply(angles: GqspAngles, u: np.ndarray) -> np.ndarray:
    """Dense (2 dim x 2 dim) unitary of the interleaved rotation circuit.

    The ancilla is the first tensor factor; A applies U on the ancilla-0
    branch and the identity on the ancilla-1 branch.
    """
    dim = u.shape[0]
    eye = np.eye(dim, dtype=complex)
    signal = np.block(
        [[u, np.zeros((dim, dim))], [np.zeros((dim, dim)), eye]]
    )
    full = np.kron(rotation(angles.theta[0], angles.phi[0], angles.lam), eye)
    for j in range(1, angles.degree + 1):
        full = np.kron(rotation(angles.theta[j], angles.phi[j]), eye) @ signal @ full
    return full


def extract_block(full: np.ndarray) -> np.ndarray:
    """Top-left (ancilla 0 -> 0) block."""
    dim = full.shape[0] // 2
    return full[:dim, :dim]


def synthesize_laurent(p: LaurentPoly) -> GqspAngles:
    """Angles for a Laurent target: shift to plain powers, complete, peel."""
    shifted, shift = monomial_shift(p)
    q_coefs = complete_polynomial(shifted)
    angles = synthesize_angles(shifted, q_coefs)
    angles.diagnostics["shift"] = shift
    angles.diagnostics["completion_residual"] = float(
        np.max(
            np.abs(
                np.abs(_circle_values(shifted)) ** 2
                + np.abs(_circle_values(q_coefs)) ** 2
                - 1.0
            )
        )
    )
    return angles


def verify_block(angles: GqspAngles, u: np.ndarray, p: LaurentPoly) -> float:
    """Max elementwise gap between the circuit block and U^M sum_m c_m U^m."""
    block = extract_block(gqsp_apply(angles, u))
    target = unitary_power(u, p.M) @ direct_poly_apply(p, u)
    return float(np.max(np.abs(block - target)))
