"""Decentralised stability test by vector Lyapunov functions.

Each subsystem ``i`` contributes a quadratic Lyapunov function
``x_i' H_i x_i`` with ``A_i' H_i + H_i A_i = -G_i``. The comparison matrix

    w_ii = -1/2 lambda_min(G_i) / lambda_max(H_i) + ||A_ii||
    w_ij = ||A_ij||                           (spectral norms)

is Metzler. If ``-W`` is a nonsingular M-matrix the interconnection is
asymptotically stable: pick a diagonal ``P > 0`` with ``P W + W' P < 0``
and weight the subsystem functions by ``P_i / lambda_max(H_i)``. The test
is only sufficient, so failing it says nothing about instability.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import as_matrix, eig_extremes_sym, is_hurwitz, solve_lyapunov
from .errors import DimensionMismatch, NotHurwitz

STABLE = "stable"
INDETERMINATE = "indeterminate"
SUBSYSTEM_UNSTABLE = "subsystem_unstable"


@dataclass(frozen=True)
class SubsystemSpec:
    A: np.ndarray
    G: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "A", as_matrix(self.A, "A", square=True))
        if self.G is None:
            object.__setattr__(self, "G", np.eye(self.A.shape[0]))
        else:
            G = as_matrix(self.G, "G", square=True)
            if G.shape != self.A.shape:
                raise DimensionMismatch("G must match A")
            if eig_extremes_sym(G)[0] <= 0:
                raise ValueError("G must be positive definite")
            object.__setattr__(self, "G", G)

    @property
    def n(self):
        return self.A.shape[0]


@dataclass
class StabilityReport:
    W: Optional[np.ndarray]
    verdict: str
    extremes: list = field(default_factory=list)
    H: list = field(default_factory=list)
    row_dominant: bool = False
    minors: list = field(default_factory=list)
    unstable: list = field(default_factory=list)
    oracle_max_real: Optional[float] = None

    def to_dict(self):
        out = {
            "verdict": self.verdict,
            "W": None if self.W is None else self.W.tolist(),
            "leading_minors": self.minors,
            "row_dominant": self.row_dominant,
            "extremes": [{"lambda_min_G": g, "lambda_max_H": h} for g, h in self.extremes],
            "unstable_subsystems": self.unstable,
        }
        if self.oracle_max_real is not None:
            out["oracle_max_real_eig"] = self.oracle_max_real
            out["oracle_hurwitz"] = self.oracle_max_real < 0
        return out


def _couplings(subsystems, couplings):
    sizes = [s.n for s in subsystems]
    out = {}
    for (i, j), M in (couplings or {}).items():
        M = as_matrix(M, f"A_{i}{j}")
        if M.shape != (sizes[i], sizes[j]):
            raise DimensionMismatch(f"A_{i}{j} shape {M.shape} != {(sizes[i], sizes[j])}")
        out[(i, j)] = M
    return out


def _norm2(M):
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def leading_minors(M):
    return [float(np.linalg.det(M[:k, :k])) for k in range(1, M.shape[0] + 1)]


def assess(subsystems, couplings=None, oracle=False) -> StabilityReport:
    """Build ``W`` and classify the interconnection.

    Args:
        subsystems: SubsystemSpec list (or bare matrices, with ``G = I``).
        couplings: mapping ``(i, j) -> A_ij``; ``(i, i)`` is a self term.
        oracle: also compute the full assembled spectrum.
    """
    subs = [s if isinstance(s, SubsystemSpec) else SubsystemSpec(s) for s in subsystems]
    cpl = _couplings(subs, couplings)
    report_oracle = oracle_full_spectrum(subs, cpl) if oracle else None
    unstable = [k for k, s in enumerate(subs) if not is_hurwitz(s.A)]
    if unstable:
        return StabilityReport(None, SUBSYSTEM_UNSTABLE, unstable=unstable,
                               oracle_max_real=report_oracle)
    m = len(subs)
    W = np.zeros((m, m))
    extremes, Hs = [], []
    for i, s in enumerate(subs):
        try:
            H = solve_lyapunov(s.A, s.G)
        except NotHurwitz:
            return StabilityReport(None, SUBSYSTEM_UNSTABLE, unstable=[i], oracle_max_real=report_oracle)
        g_min = eig_extremes_sym(s.G)[0]
        h_max = eig_extremes_sym(H)[1]
        extremes.append((g_min, h_max))
        Hs.append(H)
        W[i, i] = -0.5 * g_min / h_max
    for (i, j), M in cpl.items():
        W[i, j] += _norm2(M)
    minors = leading_minors(-W)
    verdict = STABLE if all(d > 0 for d in minors) else INDETERMINATE
    off = np.sum(W, axis=1) - np.diag(W)
    dominant = bool(np.all(-np.diag(W) > off))
    return StabilityReport(W, verdict, extremes, Hs, dominant, minors, [], report_oracle)


def assemble(subsystems, couplings=None):
    subs = [s if isinstance(s, SubsystemSpec) else SubsystemSpec(s) for s in subsystems]
    cpl = _couplings(subs, couplings)
    offs = np.cumsum([0] + [s.n for s in subs])
    full = np.zeros((offs[-1], offs[-1]))
    for k, s in enumerate(subs):
        full[offs[k]:offs[k + 1], offs[k]:offs[k + 1]] = s.A
    for (i, j), M in cpl.items():
        full[offs[i]:offs[i + 1], offs[j]:offs[j + 1]] += M
    return full


def oracle_full_spectrum(subsystems, couplings=None):
    """Largest real part of the assembled interconnection's eigenvalues."""
    return float(np.max(np.linalg.eigvals(assemble(subsystems, couplings)).real))
