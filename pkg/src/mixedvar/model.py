"""Algebra of VAR coefficient matrices.

Companion forms, eigenvalue-based causal/noncausal classification, assembly
of a matrix from an eigenvector basis and prescribed eigenvalues, and the
causal/noncausal counterpart construction (reciprocating eigenvalues while
keeping eigenvectors).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ComplexSpectrum, SingularBasis, UnitRootAmbiguity

DEFAULT_TOL_UNIT = 1e-6
MAX_BASIS_COND = 1e12


@dataclass(frozen=True)
class VarParams:
    """Coefficient matrices of an n-dimensional VAR(p).

    Parameters
    ----------
    n : int
        Process dimension.
    p : int
        Lag order.
    coefficients : tuple of np.ndarray
        The p lag matrices, each n x n, ordered by lag.
    """

    n: int
    p: int
    coefficients: tuple

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be positive integers")
        coeffs = tuple(np.asarray(c, dtype=float) for c in self.coefficients)
        if len(coeffs) != self.p:
            raise ValueError(f"expected {self.p} coefficient matrices, got {len(coeffs)}")
        for c in coeffs:
            if c.shape != (self.n, self.n):
                raise ValueError(f"coefficient matrix has shape {c.shape}, expected {(self.n, self.n)}")
            if not np.all(np.isfinite(c)):
                raise ValueError("coefficient matrices must be finite")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_matrix(cls, theta) -> "VarParams":
        """Wrap a single n x n matrix as a VAR(1) parameter set."""
        theta = np.asarray(theta, dtype=float)
        if theta.ndim == 0:
            theta = theta.reshape(1, 1)
        return cls(n=theta.shape[0], p=1, coefficients=(theta,))

    @property
    def matrix(self) -> np.ndarray:
        """The single lag matrix; only defined for p = 1."""
        if self.p != 1:
            raise ValueError("params.matrix is only defined for p = 1")
        return self.coefficients[0]

    def to_vector(self) -> np.ndarray:
        """Row-major flattening of (Theta_1, ..., Theta_p).

        This ordering is the package-wide convention: annealing bounds,
        optimizer iterates and histogram exports all index coefficients by it.
        """
        return np.concatenate([c.ravel() for c in self.coefficients])

    @classmethod
    def from_vector(cls, vec, n: int, p: int) -> "VarParams":
        """Inverse of :meth:`to_vector`."""
        vec = np.asarray(vec, dtype=float)
        if vec.size != n * n * p:
            raise ValueError(f"vector length {vec.size} does not match n={n}, p={p}")
        mats = tuple(vec[i * n * n:(i + 1) * n * n].reshape(n, n) for i in range(p))
        return cls(n=n, p=p, coefficients=mats)

    def to_json_dict(self) -> dict:
        """JSON object {"n": ..., "p": ..., "coefficients": [...]} with row-major matrices."""
        return {
            "n": self.n,
            "p": self.p,
            "coefficients": [c.tolist() for c in self.coefficients],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "VarParams":
        return cls(n=int(obj["n"]), p=int(obj["p"]),
                   coefficients=tuple(np.asarray(c, dtype=float) for c in obj["coefficients"]))

    def coefficient_names(self) -> list:
        """Names for the row-major flattened coefficients, e.g. theta1_21."""
        return [
            f"theta{lag + 1}_{i + 1}{j + 1}"
            for lag in range(self.p)
            for i in range(self.n)
            for j in range(self.n)
        ]


@dataclass(frozen=True)
class ModelOrder:
    """Counts of companion eigenvalues inside (n1) and outside (n2) the unit circle."""

    n1: int
    n2: int
    p: int

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("n1 and n2 must be nonnegative")

    @property
    def label(self) -> str:
        return f"VAR({self.n1},{self.n2},{self.p})"

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class SpectralDecomposition:
    """Real eigendecomposition Theta = A J A^-1, causal block first.

    A holds eigenvectors as columns, J is diagonal with eigenvalues sorted
    by ascending modulus, so the leading n1 entries form the causal block J1
    and the trailing n2 entries the noncausal block J2.
    """

    A: np.ndarray
    eigenvalues: np.ndarray
    order: ModelOrder
    permutation: np.ndarray = field(repr=False)

    @property
    def J(self) -> np.ndarray:
        return np.diag(self.eigenvalues)

    @property
    def J1(self) -> np.ndarray:
        return np.diag(self.eigenvalues[:self.order.n1])

    @property
    def J2(self) -> np.ndarray:
        return np.diag(self.eigenvalues[self.order.n1:])

    @property
    def A1(self) -> np.ndarray:
        """Columns of A spanning the causal component."""
        return self.A[:, :self.order.n1]

    @property
    def A2(self) -> np.ndarray:
        """Columns of A spanning the noncausal component."""
        return self.A[:, self.order.n1:]

    @property
    def A_inv(self) -> np.ndarray:
        return np.linalg.inv(self.A)


def companion(params: VarParams) -> np.ndarray:
    """Companion matrix of a VAR(p): top block row [Theta_1 ... Theta_p],
    identity blocks on the subdiagonal, zeros elsewhere.

    For p = 1 this is Theta_1 itself.
    """
    if params.p == 1:
        return params.coefficients[0].copy()
    n, p = params.n, params.p
    C = np.zeros((n * p, n * p))
    C[:n, :] = np.hstack(params.coefficients)
    C[n:, :-n] = np.eye(n * (p - 1))
    return C


def companion_eigenvalues(params: VarParams) -> np.ndarray:
    """Eigenvalues of the companion matrix (complex in general)."""
    return np.linalg.eigvals(companion(params))


def classify_roots(params: VarParams, tol_unit: float = DEFAULT_TOL_UNIT) -> ModelOrder:
    """Classify a parameter set by counting companion eigenvalues inside
    and outside the unit circle.

    Raises
    ------
    UnitRootAmbiguity
        If any eigenvalue modulus falls in [1 - tol_unit, 1 + tol_unit];
        the causal/noncausal split is undefined there.
    """
    moduli = np.abs(companion_eigenvalues(params))
    if np.any((moduli >= 1.0 - tol_unit) & (moduli <= 1.0 + tol_unit)):
        raise UnitRootAmbiguity(
            f"eigenvalue modulus within {tol_unit} of the unit circle: {moduli}"
        )
    n1 = int(np.sum(moduli < 1.0))
    return ModelOrder(n1=n1, n2=moduli.size - n1, p=params.p)


def classify_strict(params: VarParams) -> ModelOrder:
    """Classification with a strict cut at modulus 1 (|lambda| >= 1 counts
    as noncausal). Total on every input; used for estimated matrices so
    identification frequencies partition all replications.
    """
    moduli = np.abs(companion_eigenvalues(params))
    n1 = int(np.sum(moduli < 1.0))
    return ModelOrder(n1=n1, n2=moduli.size - n1, p=params.p)


def _real_eig(theta: np.ndarray, imag_tol: float = 1e-8):
    """Eigendecomposition of a real matrix, rejecting complex spectra."""
    w, V = np.linalg.eig(theta)
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.max(np.abs(w.imag)) > imag_tol * scale:
        raise ComplexSpectrum(f"complex eigenvalue pair found: {w}")
    return w.real.copy(), V.real.copy()


def spectral_decomposition(params: VarParams,
                           tol_unit: float = DEFAULT_TOL_UNIT) -> SpectralDecomposition:
    """Decompose a VAR(1) matrix as Theta = A J A^-1 with real eigenvalues
    sorted by ascending modulus (causal block first).

    Raises
    ------
    ComplexSpectrum
        If eigenvalues are not real.
    UnitRootAmbiguity
        If an eigenvalue modulus falls in the exclusion band.
    SingularBasis
        If the eigenvector matrix is too ill-conditioned to invert, which
        happens for defective (non-diagonalizable) inputs.
    """
    theta = params.matrix
    w, V = _real_eig(theta)
    moduli = np.abs(w)
    if np.any((moduli >= 1.0 - tol_unit) & (moduli <= 1.0 + tol_unit)):
        raise UnitRootAmbiguity(
            f"eigenvalue modulus within {tol_unit} of the unit circle: {w}"
        )
    perm = np.argsort(np.abs(w), kind="stable")
    w = w[perm]
    A = V[:, perm]
    if np.linalg.cond(A) > MAX_BASIS_COND:
        raise SingularBasis("eigenvector basis is numerically singular")
    n1 = int(np.sum(np.abs(w) < 1.0))
    order = ModelOrder(n1=n1, n2=w.size - n1, p=1)
    return SpectralDecomposition(A=A, eigenvalues=w, order=order, permutation=perm)


def assemble_from_jordan(A, eigenvalues) -> VarParams:
    """Build the VAR(1) matrix A diag(eigenvalues) A^-1.

    Raises
    ------
    SingularBasis
        If A is singular or too ill-conditioned.
    """
    A = np.asarray(A, dtype=float)
    eigs = np.asarray(eigenvalues, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be a square matrix")
    if eigs.shape != (A.shape[0],):
        raise ValueError("need exactly one eigenvalue per dimension")
    if np.linalg.cond(A) > MAX_BASIS_COND:
        raise SingularBasis("basis matrix is numerically singular")
    theta = A @ np.diag(eigs) @ np.linalg.inv(A)
    return VarParams.from_matrix(theta)


def counterpart(params: VarParams, mode: str,
                tol_unit: float = DEFAULT_TOL_UNIT) -> VarParams:
    """Causal or noncausal counterpart of a VAR(1) matrix.

    The counterpart keeps the eigenvectors of Theta and replaces eigenvalues
    on the wrong side of the unit circle by their reciprocals:

    - mode="causal": every |lambda| > 1 becomes 1/lambda, so the result
      classifies as purely causal;
    - mode="noncausal": every |lambda| < 1 becomes 1/lambda, so the result
      classifies as purely noncausal.

    A matrix whose linear autocovariance structure matches Theta's can be
    built this way, which is exactly why these matrices show up as local
    minima of covariance-based objectives.
    """
    if mode not in ("causal", "noncausal"):
        raise ValueError(f"mode must be 'causal' or 'noncausal', got {mode!r}")
    dec = spectral_decomposition(params, tol_unit=tol_unit)
    w = dec.eigenvalues.copy()
    if mode == "causal":
        flip = np.abs(w) > 1.0
    else:
        flip = np.abs(w) < 1.0
    if not np.any(flip):
        return params
    w[flip] = 1.0 / w[flip]
    theta = dec.A @ np.diag(w) @ np.linalg.inv(dec.A)
    return VarParams.from_matrix(theta)
