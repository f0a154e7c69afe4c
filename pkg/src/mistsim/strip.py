"""Semi-classical Hamiltonian of a transmon driven by a classical resonator field.

The model lives in a single excitation-preserving strip: level k sits at
E_k - k*omega_r in the rotating frame, and adjacent levels are coupled by the
field with bond strength Re(sqrt(nbar - k)) * g_{k,k+1}. The sqrt cutoff turns
the interaction off when nbar < k, which makes the strip spectrum coincide
exactly with the full qubit-resonator ladder at fixed total excitation number.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .transmon import TransmonEigen

__all__ = [
    "StripConfig",
    "SpectrumResult",
    "CrossingRecord",
    "effective_hamiltonian",
    "jtc_strip_hamiltonian",
    "fan_diagram",
    "find_avoided_crossings",
    "g_eff_perturbative",
    "bond_amplitudes",
    "match_branches",
]


@dataclass(frozen=True)
class StripConfig:
    """Strip model inputs: transmon eigen data plus resonator/drive frequencies.

    Exactly one of ``g`` (GHz) or ``k_eff`` (dimensionless efficiency) sets the
    coupling; with k_eff the strength is g = k_eff * sqrt(omega_q * omega_r)/2.
    """

    eigen: TransmonEigen
    omega_r: float
    omega_d: float | None = None
    g: float | None = None
    k_eff: float | None = None
    level_count: int | None = None

    def __post_init__(self):
        if (self.g is None) == (self.k_eff is None):
            raise ValueError("specify exactly one of g, k_eff")
        if self.omega_d is None:
            object.__setattr__(self, "omega_d", self.omega_r)
        if self.level_count is None:
            object.__setattr__(self, "level_count", self.eigen.level_count)
        if self.level_count > self.eigen.level_count:
            raise ValueError(
                f"level_count {self.level_count} exceeds available "
                f"{self.eigen.level_count} eigenstates"
            )
        if self.coupling <= 0:
            raise ValueError(f"derived coupling must be positive, got {self.coupling}")

    @property
    def coupling(self) -> float:
        """Qubit-resonator coupling strength g in GHz."""
        if self.g is not None:
            return self.g
        return self.k_eff * np.sqrt(self.eigen.qubit_frequency * self.omega_r) / 2.0

    @property
    def rotating_diagonal(self) -> np.ndarray:
        """Bare rotating-frame energies E_k - k*omega_r (GHz)."""
        k = np.arange(self.level_count)
        return self.eigen.energies[: self.level_count] - k * self.omega_r


@dataclass
class CrossingRecord:
    """An avoided crossing between two tracked branches."""

    branch_a: int
    branch_b: int
    nbar_cross: float
    gap: float
    g_eff: float

    def to_dict(self) -> dict:
        return {
            "branch_a": self.branch_a,
            "branch_b": self.branch_b,
            "nbar_cross": self.nbar_cross,
            "gap": self.gap,
            "g_eff": self.g_eff,
        }


@dataclass
class SpectrumResult:
    """Eigenenergy branches versus photon number (a fan diagram).

    ``branches[j]`` follows the eigenstate anchored to bare level j at nbar=0,
    tracked along the grid by maximal eigenvector overlap. Grid points where
    the best overlap fell below 0.5, or where the greedy assignment was
    ambiguous within 1e-6, are listed in ``flagged_points``.
    """

    nbar_grid: np.ndarray
    branches: np.ndarray
    flagged_points: list[int] = field(default_factory=list)
    crossings: list[CrossingRecord] = field(default_factory=list)

    def to_csv(self, path, header_lines: list[str] | None = None) -> None:
        n_branches = self.branches.shape[0]
        with open(path, "w") as fh:
            for line in header_lines or []:
                fh.write(f"# {line}\n")
            cols = ",".join(f"branch_{j}" for j in range(n_branches))
            fh.write(f"nbar,{cols}\n")
            for i, nb in enumerate(self.nbar_grid):
                row = ",".join(f"{self.branches[j, i]:.12g}" for j in range(n_branches))
                fh.write(f"{nb:.12g},{row}\n")


def bond_amplitudes(config: StripConfig, nbar) -> np.ndarray:
    """Real non-negative bond strengths Re(sqrt(nbar - k)) * g_{k,k+1} in GHz.

    ``nbar`` may be a scalar or an array; the bond axis is last.
    """
    k = np.arange(config.level_count - 1)
    nbar = np.asarray(nbar, float)
    root = np.sqrt(np.maximum(nbar[..., None] - k, 0.0))
    return root * (config.eigen.couplings[: config.level_count - 1] * config.coupling)


def effective_hamiltonian(config: StripConfig, alpha: complex, t: float = 0.0) -> np.ndarray:
    """K x K Hermitian matrix (GHz) of the field-driven strip.

    The off-diagonal carries the field phase (alpha/|alpha|) * exp(i*2*pi*
    (omega_r - omega_d)*t); at alpha = 0 the interaction vanishes identically.
    """
    k_count = config.level_count
    h = np.zeros((k_count, k_count), dtype=complex)
    h[np.diag_indices(k_count)] = config.rotating_diagonal
    mag = abs(alpha)
    if mag > 0.0:
        unit = alpha / mag
        phase = unit * np.exp(2j * np.pi * (config.omega_r - config.omega_d) * t)
        bonds = bond_amplitudes(config, mag**2)
        idx = np.arange(k_count - 1)
        h[idx, idx + 1] = phase * bonds
        h[idx + 1, idx] = np.conj(phase) * bonds
    return h


def jtc_strip_hamiltonian(config: StripConfig, n_total: int) -> np.ndarray:
    """Excitation-number strip of the full qubit-resonator ladder.

    Basis |k, N-k> for k = 0..min(K-1, N) with the constant N*omega_r offset
    removed; eigenvalues equal those of ``effective_hamiltonian`` at
    |alpha|^2 = N, omega_d = omega_r, up to the decoupled bare levels k > N.
    """
    if n_total < 0:
        raise ValueError(f"n_total must be >= 0, got {n_total}")
    dim = min(config.level_count, n_total + 1)
    h = np.diag(config.rotating_diagonal[:dim])
    if dim > 1:
        kb = np.arange(dim - 1)
        bonds = (
            config.eigen.couplings[: dim - 1]
            * config.coupling
            * np.sqrt(n_total - kb)
        )
        h[kb, kb + 1] = bonds
        h[kb + 1, kb] = bonds
    return h


def match_branches(
    prev_vecs: np.ndarray, cur_vecs: np.ndarray, tie_tol: float = 1e-6
) -> tuple[np.ndarray, bool, bool]:
    """Greedy maximal-overlap assignment of current eigenvectors to branches.

    ``prev_vecs`` columns are branch-ordered; ``cur_vecs`` columns are in
    eigenvalue order. Returns (columns, low_overlap, ambiguous) where
    ``columns[branch]`` indexes into cur_vecs, ``low_overlap`` marks a best
    overlap below 0.5 and ``ambiguous`` a greedy tie within ``tie_tol``.
    """
    overlap = np.abs(prev_vecs.conj().T @ cur_vecs)
    n = overlap.shape[0]

    # fast path: per-row argmax already a contention-free assignment
    best_cols = np.argmax(overlap, axis=1)
    if len(np.unique(best_cols)) == n:
        sorted_rows = np.sort(overlap, axis=1)
        top = sorted_rows[:, -1]
        second = sorted_rows[:, -2]
        if np.all(top - second > tie_tol) and np.all(top >= 0.5):
            return best_cols, False, False

    columns = np.full(n, -1, dtype=int)
    work = overlap.copy()
    low_overlap = False
    ambiguous = False
    for _ in range(n):
        m = work.max()
        candidates = np.argwhere(work >= m - tie_tol)
        if len(candidates) > 1:
            ambiguous = True
        row, col = candidates[0]
        columns[row] = col
        if m < 0.5:
            low_overlap = True
        work[row, :] = -1.0
        work[:, col] = -1.0
    return columns, low_overlap, ambiguous


def _anchor_to_bare(vecs: np.ndarray) -> np.ndarray:
    """Column order mapping branch j -> eigenvector of bare level j.

    Valid at nbar = 0, where the Hamiltonian is diagonal and eigenvectors are
    unit vectors up to ordering.
    """
    bare_of_col = np.argmax(np.abs(vecs), axis=0)
    cols = np.empty(len(bare_of_col), dtype=int)
    cols[bare_of_col] = np.arange(len(bare_of_col))
    return cols


def fan_diagram(config: StripConfig, nbar_grid: np.ndarray) -> SpectrumResult:
    """Instantaneous spectrum versus photon number with tracked branches.

    The grid must be sorted ascending and start at 0 so branches can be
    anchored to the bare levels. The field phase is irrelevant for the
    spectrum, so alpha is taken real positive.
    """
    nbar_grid = np.asarray(nbar_grid, float)
    if nbar_grid[0] != 0.0:
        raise ValueError("nbar_grid must start at 0 to anchor branch labels")
    if np.any(np.diff(nbar_grid) <= 0):
        raise ValueError("nbar_grid must be sorted strictly ascending")

    k_count = config.level_count
    diag = config.rotating_diagonal
    bonds = bond_amplitudes(config, nbar_grid)
    h_stack = np.zeros((len(nbar_grid), k_count, k_count))
    rng = np.arange(k_count)
    h_stack[:, rng, rng] = diag
    kb = np.arange(k_count - 1)
    h_stack[:, kb, kb + 1] = bonds
    h_stack[:, kb + 1, kb] = bonds
    evals, evecs = np.linalg.eigh(h_stack)

    branches = np.empty((k_count, len(nbar_grid)))
    flagged = []
    cols = _anchor_to_bare(evecs[0])
    branches[:, 0] = diag  # exact bare energies at nbar = 0
    prev = evecs[0][:, cols]
    for i in range(1, len(nbar_grid)):
        cols, low, ambiguous = match_branches(prev, evecs[i])
        if low or ambiguous:
            flagged.append(i)
        branches[:, i] = evals[i][cols]
        prev = evecs[i][:, cols]
    return SpectrumResult(nbar_grid=nbar_grid, branches=branches, flagged_points=flagged)


def _parabolic_refine(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Vertex of the parabola through three points, clipped to [x[0], x[2]]."""
    coeffs = np.polyfit(x, y, 2)
    a, b, c = coeffs
    if a <= 0:
        return float(x[1]), float(y[1])
    xv = float(np.clip(-b / (2 * a), x[0], x[2]))
    return xv, float(np.polyval(coeffs, xv))


def find_avoided_crossings(
    spectrum: SpectrumResult, min_gap: float = 0.0, max_gap: float = np.inf
) -> list[CrossingRecord]:
    """Local minima of pairwise branch gaps, refined by parabolic interpolation.

    Only interior minima are reported; the refined gap must fall inside
    [min_gap, max_gap]. The half-gap is reported as the effective coupling.
    """
    if len(spectrum.nbar_grid) < 3:
        raise ValueError("need at least 3 grid points to locate crossings")
    records = []
    n_branches = spectrum.branches.shape[0]
    x = spectrum.nbar_grid
    for a in range(n_branches):
        for b in range(a + 1, n_branches):
            gap = np.abs(spectrum.branches[a] - spectrum.branches[b])
            interior = np.arange(1, len(x) - 1)
            # prominence floor keeps rounding noise on near-parallel branches
            # from registering as minima
            noise = 1e-12 + 1e-10 * gap[interior]
            is_min = (gap[interior] < gap[interior - 1] - noise) & (
                gap[interior] <= gap[interior + 1]
            )
            for i in interior[is_min]:
                nbar_c, gap_c = _parabolic_refine(x[i - 1 : i + 2], gap[i - 1 : i + 2])
                if min_gap <= gap_c <= max_gap:
                    records.append(
                        CrossingRecord(
                            branch_a=a,
                            branch_b=b,
                            nbar_cross=nbar_c,
                            gap=gap_c,
                            g_eff=gap_c / 2.0,
                        )
                    )
    return records


def g_eff_perturbative(config: StripConfig, target_level: int, nbar_cross: float) -> float:
    """Perturbative strength of the multi-step coupling from level 0 to m.

    Product of the m bond couplings divided by the m-1 intermediate bare
    detunings, times nbar^(m/2). Returns the magnitude in GHz.
    """
    m = target_level
    if m < 1:
        raise ValueError(f"target_level must be >= 1, got {m}")
    if m > config.level_count - 1:
        raise ValueError(f"target_level {m} not within the kept levels")
    diag = config.rotating_diagonal
    detunings = diag[1:m] - diag[0]
    small = np.abs(detunings) < 1e-12
    if np.any(small):
        k = int(np.argmax(small)) + 1
        raise ValueError(
            f"intermediate level {k} is resonant with level 0; "
            "perturbative estimate diverges"
        )
    numerator = np.prod(config.eigen.couplings[:m] * config.coupling)
    return float(abs(numerator / np.prod(detunings)) * nbar_cross ** (m / 2.0))
