"""Transmon eigenstructure in the charge basis at arbitrary offset charge.

Energies are linear frequencies in GHz (E/h). The angular conversion (x 2*pi,
rad/ns) happens only inside time propagation, never here.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "TransmonParams",
    "TransmonEigen",
    "build_charge_hamiltonian",
    "diagonalize",
    "ej_for_frequency",
    "charge_dispersion",
    "k_bend",
]

#: Eigenvalue spacing below which levels are reported as degenerate (GHz).
DEGENERACY_TOL = 1e-12


def _wrap_offset_charge(n_g: float) -> float:
    """Wrap to the canonical window [-0.5, 0.5]; all spectra are 1-periodic."""
    return float(n_g - round(n_g))


@dataclass(frozen=True)
class TransmonParams:
    """Circuit parameters of a single transmon.

    Parameters
    ----------
    e_c : float
        Charging energy E_C/h in GHz.
    e_j : float
        Junction energy E_J/h in GHz.
    n_g : float
        Dimensionless offset charge. Wrapped into [-0.5, 0.5] on construction.
    charge_cutoff : int
        Charge basis spans -N..+N.
    level_count : int
        Number of eigenstates kept after diagonalization.
    """

    e_c: float
    e_j: float
    n_g: float = 0.0
    charge_cutoff: int = 30
    level_count: int = 20

    def __post_init__(self):
        if self.e_c <= 0:
            raise ValueError(f"e_c must be positive, got {self.e_c}")
        if self.e_j < 0:
            raise ValueError(f"e_j must be non-negative, got {self.e_j}")
        if self.level_count < 2:
            raise ValueError(f"level_count must be >= 2, got {self.level_count}")
        if self.charge_cutoff < self.level_count:
            raise ValueError(
                f"charge_cutoff ({self.charge_cutoff}) too small for "
                f"level_count ({self.level_count})"
            )
        object.__setattr__(self, "n_g", _wrap_offset_charge(self.n_g))


@dataclass(frozen=True)
class TransmonEigen:
    """Diagonalized level structure.

    ``energies`` are referenced so that ``energies[0] == 0``. ``couplings[k]``
    is the charge matrix element <k|n|k+1> normalized by <0|n|1>, with the
    eigenvector gauge fixed so every element is non-negative.
    """

    energies: np.ndarray
    couplings: np.ndarray
    raw_n01: float
    n_g: float
    provenance: TransmonParams | None = None

    @property
    def level_count(self) -> int:
        return len(self.energies)

    @property
    def qubit_frequency(self) -> float:
        """0-1 transition frequency in GHz."""
        return float(self.energies[1])

    @property
    def anharmonicity(self) -> float:
        """(E1 - E0) - (E2 - E1) in GHz; positive in the transmon regime."""
        e = self.energies
        return float((e[1] - e[0]) - (e[2] - e[1]))


def build_charge_hamiltonian(params: TransmonParams) -> np.ndarray:
    """Charge-basis Hamiltonian 4*E_C*(n - n_g)^2 - E_J/2 on the off-diagonals.

    Returns a real symmetric matrix of dimension 2N+1 in GHz.
    """
    n = np.arange(-params.charge_cutoff, params.charge_cutoff + 1)
    h = np.diag(4.0 * params.e_c * (n - params.n_g) ** 2)
    off = -params.e_j / 2.0 * np.ones(len(n) - 1)
    h += np.diag(off, 1) + np.diag(off, -1)
    return h


def _charge_numbers(params: TransmonParams) -> np.ndarray:
    return np.arange(-params.charge_cutoff, params.charge_cutoff + 1, dtype=float)


def _eigensystem(params: TransmonParams) -> tuple[np.ndarray, np.ndarray]:
    """Raw (unshifted) eigenvalues and eigenvectors of the charge Hamiltonian."""
    h = build_charge_hamiltonian(params)
    try:
        evals, evecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed to converge for {params}") from exc
    return evals, evecs


def diagonalize(params: TransmonParams) -> TransmonEigen:
    """Lowest level_count eigenpairs with gauge-fixed charge couplings.

    The eigenvector signs are fixed sequentially so that <k|n|k+1> >= 0 for
    every adjacent pair; couplings enter the driven model coherently, so a
    deterministic gauge matters.
    """
    k_count = params.level_count
    evals, evecs = _eigensystem(params)
    energies = evals[:k_count] - evals[0]

    gaps = np.diff(evals[:k_count])
    if np.any(gaps < DEGENERACY_TOL):
        idx = int(np.argmax(gaps < DEGENERACY_TOL))
        warnings.warn(
            f"levels {idx} and {idx + 1} degenerate within {DEGENERACY_TOL} GHz; "
            "resolved by index order",
            stacklevel=2,
        )

    n_diag = _charge_numbers(params)
    vecs = evecs[:, :k_count].copy()
    for k in range(k_count - 1):
        if vecs[:, k] @ (n_diag * vecs[:, k + 1]) < 0:
            vecs[:, k + 1] *= -1.0
    elements = np.array(
        [vecs[:, k] @ (n_diag * vecs[:, k + 1]) for k in range(k_count - 1)]
    )

    raw_n01 = float(elements[0])
    if raw_n01 == 0.0:
        raise ValueError(
            "vanishing <0|n|1> matrix element; couplings cannot be normalized "
            f"(params: {params})"
        )
    return TransmonEigen(
        energies=energies,
        couplings=elements / raw_n01,
        raw_n01=raw_n01,
        n_g=params.n_g,
        provenance=params,
    )


def ej_for_frequency(
    e_c: float,
    target_omega_q: float,
    n_g_ref: float = 0.0,
    charge_cutoff: int = 30,
) -> float:
    """Junction energy E_J (GHz) whose 0-1 transition equals the target.

    Solved by bracketed root finding seeded with the transmon-limit estimate
    E_J ~ (target + E_C)^2 / (8 E_C); the 0-1 frequency is monotone in E_J, so
    the root is unique. Converged to better than 1 kHz on the frequency.
    """
    if e_c <= 0:
        raise ValueError(f"e_c must be positive, got {e_c}")
    if target_omega_q <= 0:
        raise ValueError(f"target frequency must be positive, got {target_omega_q}")

    def freq_error(e_j: float) -> float:
        p = TransmonParams(
            e_c=e_c, e_j=e_j, n_g=n_g_ref, charge_cutoff=charge_cutoff, level_count=2
        )
        evals, _ = _eigensystem(p)
        return (evals[1] - evals[0]) - target_omega_q

    seed = (target_omega_q + e_c) ** 2 / (8.0 * e_c)
    lo, hi = 0.5 * seed, 2.0 * seed
    for _ in range(60):
        if freq_error(lo) <= 0:
            break
        lo *= 0.5
    for _ in range(60):
        if freq_error(hi) >= 0:
            break
        hi *= 2.0
    f_lo, f_hi = freq_error(lo), freq_error(hi)
    if f_lo > 0 or f_hi < 0:
        raise ValueError(
            f"target {target_omega_q} GHz not bracketed; achievable range at "
            f"E_J in [{lo:.4g}, {hi:.4g}] GHz is "
            f"[{f_lo + target_omega_q:.6g}, {f_hi + target_omega_q:.6g}] GHz"
        )
    e_j = brentq(freq_error, lo, hi, xtol=1e-10, rtol=8.9e-16)
    residual = abs(freq_error(e_j))
    if residual > 1e-6:
        raise RuntimeError(
            f"root finding left a residual of {residual:.3g} GHz (> 1 kHz)"
        )
    return float(e_j)


def charge_dispersion(
    params: TransmonParams,
    level: int,
    n_g_grid: np.ndarray | None = None,
) -> float:
    """Peak-to-peak offset-charge dispersion of a level in GHz.

    For level >= 1 this is the spread of the transition energy E_k - E_0 over
    the grid; for level 0 the spread of the absolute ground energy (the 0-0
    transition is identically zero). The n_g of ``params`` is ignored.
    """
    if n_g_grid is None:
        n_g_grid = np.linspace(-0.5, 0.5, 21)
    if level >= params.level_count:
        raise ValueError(f"level {level} not kept (level_count={params.level_count})")
    values = np.empty(len(n_g_grid))
    for i, n_g in enumerate(n_g_grid):
        evals, _ = _eigensystem(replace(params, n_g=float(n_g)))
        if level == 0:
            values[i] = evals[0]
        else:
            values[i] = evals[level] - evals[0]
    return float(values.max() - values.min())


def k_bend(omega_q: float, omega_r: float, eta: float) -> int:
    """Level index where the excitation-preserving ladder folds back on itself.

    Rounds (omega_q - omega_r) / eta to the nearest integer.
    """
    if omega_q <= omega_r:
        raise ValueError("requires omega_q > omega_r")
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return int(round((omega_q - omega_r) / eta))
