"""Spectra of frozen-graph Laplacian dynamics z+ = A_h z, A_h = ((1-h)I + hW) (x) I_2."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

SINGULAR_TOL = 1e-9
EIG_TOL = 1e-12


def circulant(w) -> np.ndarray:
    """Circulant matrix whose first row is ``w`` (row i is ``w`` shifted right by i)."""
    w = np.asarray(w, dtype=float)
    n = len(w)
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return w[idx]


def circulant_eigs(w) -> np.ndarray:
    """lambda_j = sum_i w_i omega^{ij}, j = 0..n-1, for a symmetric generator."""
    w = np.asarray(w, dtype=float)
    n = len(w)
    if not np.allclose(w[1:], w[1:][::-1], rtol=0, atol=EIG_TOL):
        raise ValueError("generator is not symmetric (w_i != w_{n-i}); eigenvalues would be complex")
    i = np.arange(n)
    omega = np.exp(2j * np.pi * np.outer(i, i) / n)
    lam = omega @ w
    if np.abs(lam.imag).max() > EIG_TOL:
        raise ValueError("imaginary residue above 1e-12 in circulant eigenvalues")
    return lam.real.copy()


def shift_spectrum(lambdas, h: float) -> np.ndarray:
    """sigma_j = 1 - h + h lambda_j."""
    return 1.0 - h + h * np.asarray(lambdas, dtype=float)


def critical_step_sizes(lambdas, tol: float = EIG_TOL) -> list[tuple[int, float]]:
    """(j, 1/(1 - lambda_j)) for every lambda_j in [-1, 0], sorted by step size."""
    out = []
    for j, lam in enumerate(np.asarray(lambdas, dtype=float)):
        if -1.0 - tol <= lam <= tol:
            out.append((j, 1.0 / (1.0 - min(lam, 0.0))))
    out.sort(key=lambda t: (t[1], t[0]))
    return out


def weight_eigenvalues(W) -> np.ndarray:
    """Eigenvalues of W; real unless W is asymmetric with a genuinely complex spectrum."""
    W = np.asarray(W, dtype=float)
    if np.allclose(W, W.T, rtol=0, atol=EIG_TOL):
        return np.linalg.eigvalsh(W)
    lam = np.linalg.eigvals(W)
    # D^-1 A style weights are similar to a symmetric matrix: real up to rounding
    if np.abs(lam.imag).max() <= 1e-10:
        return lam.real.copy()
    return lam


def system_matrix(W, h: float) -> np.ndarray:
    """The n x n factor (1-h)I + hW of A_h."""
    W = np.asarray(W, dtype=float)
    return (1.0 - h) * np.eye(len(W)) + h * W


def is_invertible(W, h: float, tol: float = SINGULAR_TOL) -> bool:
    """True iff every shifted eigenvalue has modulus above ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    sig = 1.0 - h + h * weight_eigenvalues(W)
    return bool(np.abs(sig).min() > tol)


@dataclass
class GatheringDiagnostics:
    valid: bool
    row_sums_ok: bool
    symmetric: bool
    nonnegative: bool
    unit_multiplicity: int
    consensus_eigenvector: bool
    max_other_modulus: float
    marginal: bool
    messages: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.valid


def validate_gathering(W, tol: float = 1e-9) -> GatheringDiagnostics:
    """Check that W describes a gathering protocol.

    Rows must sum to one, the eigenvalue 1 must be simple with the all-ones
    eigenvector, and every other eigenvalue must have modulus below 1 - tol.
    Moduli within tol of 1 are reported as marginal (and invalid).
    """
    W = np.asarray(W, dtype=float)
    n = len(W)
    msgs: list[str] = []
    symmetric = bool(np.allclose(W, W.T, rtol=0, atol=tol))
    if not symmetric:
        msgs.append("W is not symmetric")
    nonneg = bool((W >= -tol).all())
    if not nonneg:
        msgs.append("W has negative entries")
    rows = W.sum(axis=1)
    row_ok = bool(np.abs(rows - 1).max() <= tol)
    if not row_ok:
        msgs.append(f"row sums deviate from 1 by up to {np.abs(rows - 1).max():.3g}")

    if symmetric:
        lam, vec = np.linalg.eigh(W)
    else:
        lam, vec = np.linalg.eig(W)
    unit = np.abs(lam - 1) <= tol
    mult = int(unit.sum())
    if mult != 1:
        msgs.append(f"eigenvalue 1 has multiplicity {mult}")
    ones = np.ones(n) / np.sqrt(n)
    consensus = False
    if mult >= 1:
        basis = vec[:, unit]
        q, _ = np.linalg.qr(basis)
        consensus = bool(np.linalg.norm(ones - q @ (q.conj().T @ ones)) <= np.sqrt(tol))
        if not consensus:
            msgs.append("all-ones vector is not an eigenvector for eigenvalue 1")
    others = np.abs(lam[~unit]) if mult >= 1 else np.abs(lam)
    max_other = float(others.max()) if others.size else 0.0
    marginal = bool(others.size and max_other >= 1 - tol)
    if marginal:
        msgs.append(f"an eigenvalue other than 1 has modulus {max_other:.12g} >= 1 - tol")
    valid = symmetric and nonneg and row_ok and mult == 1 and consensus and not marginal
    return GatheringDiagnostics(valid, row_ok, symmetric, nonneg, mult, consensus, max_other, marginal, msgs)


def kernel_basis(W, h: float, tol: float = SINGULAR_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of ker(A_h) in interleaved R^{2n} coordinates."""
    W = np.asarray(W, dtype=float)
    if not np.allclose(W, W.T, rtol=0, atol=EIG_TOL):
        raise ValueError("kernel analysis needs a symmetric weight matrix")
    n = len(W)
    sig, vec = np.linalg.eigh(system_matrix(W, h))
    null = vec[:, np.abs(sig) <= tol]
    cols = [np.kron(v, e) for v in null.T for e in np.eye(2)]
    if not cols:
        return np.zeros((2 * n, 0))
    return np.array(cols).T


def kernel_decompose(W, h: float, z) -> tuple[np.ndarray, np.ndarray]:
    """Split z = v0 + v with v0 in ker(A_h) and v in its orthogonal complement.

    The complement is A_h-invariant because A_h is symmetric, so A_h z = A_h v.
    Returns both parts as interleaved 2n vectors.
    """
    from .configuration import as_configuration

    vec = as_configuration(z).vector
    K = kernel_basis(W, h)
    v0 = K @ (K.T @ vec) if K.shape[1] else np.zeros_like(vec)
    return v0, vec - v0


def apply_system(W, h: float, v) -> np.ndarray:
    """A_h v for an interleaved 2n vector, without forming the Kronecker product."""
    W = np.asarray(W, dtype=float)
    pts = np.asarray(v, dtype=float).reshape(-1, 2)
    return (system_matrix(W, h) @ pts).reshape(-1)


@dataclass
class SpectralReport:
    lambdas: np.ndarray
    sigmas: np.ndarray
    h: float
    critical_h: list[tuple[int, float]]
    kernel_dim: int
    kernel_basis: np.ndarray

    def to_dict(self) -> dict:
        return {
            "lambdas": [float(x) for x in self.lambdas],
            "sigmas": [float(x) for x in self.sigmas],
            "h": float(self.h),
            "critical_h": [{"j": int(j), "h": float(hj)} for j, hj in self.critical_h],
            "kernel_dim": int(self.kernel_dim),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def spectral_report(W=None, h: float = 0.0, generator=None) -> SpectralReport:
    """Spectrum of A_h from a weight matrix or (circulant path) its generator.

    Circulant eigenvalues keep the enumeration j = 0..n-1 of the root-of-unity
    formula; dense matrices report eigenvalues in ascending order.
    """
    if generator is not None:
        lam = circulant_eigs(generator)
        W = circulant(generator)
    elif W is not None:
        W = np.asarray(W, dtype=float)
        if not np.allclose(W, W.T, rtol=0, atol=EIG_TOL):
            raise ValueError("spectral analysis needs a symmetric weight matrix")
        lam = np.linalg.eigvalsh(W)
    else:
        raise ValueError("pass a weight matrix or a circulant generator")
    K = kernel_basis(W, h)
    return SpectralReport(
        lambdas=lam,
        sigmas=shift_spectrum(lam, h),
        h=float(h),
        critical_h=critical_step_sizes(lam),
        kernel_dim=K.shape[1],
        kernel_basis=K,
    )


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]


def sigma_plot_svg(lambdas, hs, width: int = 480, height: int = 320) -> str:
    """Scatter + polyline of sigma_{j,h} against j, one series per step size."""
    lam = np.asarray(lambdas, dtype=float)
    n = len(lam)
    series = [shift_spectrum(lam, h) for h in hs]
    lo = min(-1.0, *(s.min() for s in series))
    hi = max(1.0, *(s.max() for s in series))
    m = 40

    def px(j):
        return m + (width - 2 * m) * (j / max(n - 1, 1))

    def py(v):
        return height - m - (height - 2 * m) * (v - lo) / (hi - lo)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{m}" y1="{py(0):.2f}" x2="{width - m}" y2="{py(0):.2f}" stroke="black" stroke-width="1"/>',
        f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black" stroke-width="1"/>',
        f'<text x="{width / 2:.0f}" y="{height - 8}" font-size="12" text-anchor="middle">j</text>',
        f'<text x="12" y="{height / 2:.0f}" font-size="12" text-anchor="middle">σ</text>',
        f'<text x="{m - 4}" y="{py(hi) + 4:.2f}" font-size="10" text-anchor="end">{hi:.2g}</text>',
        f'<text x="{m - 4}" y="{py(lo) + 4:.2f}" font-size="10" text-anchor="end">{lo:.2g}</text>',
    ]
    for k, (h, s) in enumerate(zip(hs, series)):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{px(j):.2f},{py(v):.2f}" for j, v in enumerate(s))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1"/>')
        for j, v in enumerate(s):
            out.append(f'<circle cx="{px(j):.2f}" cy="{py(v):.2f}" r="2.5" fill="{color}"/>')
        out.append(
            f'<text x="{width - m + 2}" y="{m + 14 * k}" font-size="10" fill="{color}">h={h:.5g}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
