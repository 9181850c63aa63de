"""Complex 2x2 matrix algebra: Pauli basis, decomposition, Dirac-algebra checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

Mat2 = np.ndarray  # 2x2 complex array

ID2 = np.eye(2, dtype=complex)
ZERO2 = np.zeros((2, 2), dtype=complex)
SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# planar Dirac basis: alpha_1 = sigma_1, alpha_2 = sigma_2, beta = sigma_3
ALPHA1 = SIGMA1
ALPHA2 = SIGMA2
BETA = SIGMA3

for _m in (ID2, ZERO2, SIGMA1, SIGMA2, SIGMA3):
    _m.setflags(write=False)


def mat(entries) -> Mat2:
    """Coerce to an immutable 2x2 complex array."""
    m = np.array(entries, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    m.setflags(write=False)
    return m


def dagger(m: Mat2) -> Mat2:
    return m.conj().T


def fro(m: Mat2) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(m))


def commutator(a: Mat2, b: Mat2) -> Mat2:
    return a @ b - b @ a


def anticommutator(a: Mat2, b: Mat2) -> Mat2:
    return a @ b + b @ a


def herm_defect(m: Mat2) -> float:
    """Frobenius distance from m to its conjugate transpose; 0 iff Hermitian."""
    return fro(m - dagger(m))


class PauliCoeffs(NamedTuple):
    """Coefficients of M = c_I*I + c_1*sigma_1 + c_2*sigma_2 + c_3*sigma_3."""

    c_I: complex
    c_1: complex
    c_2: complex
    c_3: complex


def pauli_decompose(m: Mat2) -> PauliCoeffs:
    """Expand a 2x2 matrix on {I, sigma_1, sigma_2, sigma_3} via trace formulas."""
    return PauliCoeffs(
        c_I=complex(np.trace(m)) / 2.0,
        c_1=complex(np.trace(SIGMA1 @ m)) / 2.0,
        c_2=complex(np.trace(SIGMA2 @ m)) / 2.0,
        c_3=complex(np.trace(SIGMA3 @ m)) / 2.0,
    )


def pauli_compose(c: PauliCoeffs) -> Mat2:
    return c.c_I * ID2 + c.c_1 * SIGMA1 + c.c_2 * SIGMA2 + c.c_3 * SIGMA3


@dataclass(frozen=True)
class AlgebraCheck:
    name: str
    deviation: float


@dataclass(frozen=True)
class DiracAlgebraReport:
    checks: tuple[AlgebraCheck, ...]

    @property
    def max_deviation(self) -> float:
        return max(c.deviation for c in self.checks)

    def passed(self, tol: float = 1e-14) -> bool:
        return self.max_deviation <= tol

    def as_dict(self) -> dict:
        return {
            "checks": [{"name": c.name, "deviation": c.deviation} for c in self.checks],
            "max_deviation": self.max_deviation,
        }


def verify_dirac_algebra(
    alpha1: Mat2 = ALPHA1, alpha2: Mat2 = ALPHA2, beta: Mat2 = BETA
) -> DiracAlgebraReport:
    """Check the nine anticommutation identities of the planar Dirac basis.

    {alpha_i, alpha_j} = 2*delta_ij, {alpha_i, beta} = 0, and
    alpha_1^2 = alpha_2^2 = beta^2 = I. Each check records the Frobenius
    deviation; failures are reported, never raised.
    """
    alphas = {"a1": alpha1, "a2": alpha2}
    checks = []
    for ni, ai in alphas.items():
        for nj, aj in alphas.items():
            target = 2.0 * ID2 if ni == nj else ZERO2
            checks.append(
                AlgebraCheck(f"{{{ni},{nj}}}", fro(anticommutator(ai, aj) - target))
            )
    for ni, ai in alphas.items():
        checks.append(AlgebraCheck(f"{{{ni},beta}}", fro(anticommutator(ai, beta))))
    checks.append(AlgebraCheck("a1^2", fro(alpha1 @ alpha1 - ID2)))
    checks.append(AlgebraCheck("a2^2", fro(alpha2 @ alpha2 - ID2)))
    checks.append(AlgebraCheck("beta^2", fro(beta @ beta - ID2)))
    return DiracAlgebraReport(checks=tuple(checks))
