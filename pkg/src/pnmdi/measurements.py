"""Measurements used by the protocol.

Charlie's relay measurement resolves the total photon number c across the
two incoming modes without revealing the split. Each c-sector is spanned by
the discrete-Fourier family

    |phi_c^j> = sum_n w^(n j) |n, c-n> / sqrt(#terms),

with w = exp(2 pi i / #terms). Below the per-party cutoff all c+1 terms
exist and this is the usual construction; above it the sum runs over the
occupations that fit under the cutoff on both modes and the phase root is
adapted to the surviving sector size, which keeps every outcome a rank-1
projector and the whole set an exact resolution of the identity on the
truncated space. Incoming protocol states never populate the dropped
components, so measurement statistics are unaffected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .fock import (
    DensityOperator,
    DomainError,
    FockVector,
    UnsupportedDimensionError,
    outer,
    tensor,
)

__all__ = [
    "CharlieOutcome",
    "CharliePovm",
    "PovmSet",
    "PovmOutcome",
    "MubSet",
    "charlie_povm",
    "pnrd_projector",
    "separable_measurement",
    "diagonal_check_state",
    "check_state_statistics",
    "CheckStateStatistics",
    "mub_bases",
    "prepared_check_states",
]


@dataclass(frozen=True)
class PovmOutcome:
    label: tuple
    operator: np.ndarray


@dataclass(frozen=True)
class PovmSet:
    """Labeled measurement operators over modes of the given dimensions."""

    dims: tuple[int, ...]
    outcomes: tuple[PovmOutcome, ...]

    def __iter__(self) -> Iterator[PovmOutcome]:
        return iter(self.outcomes)

    def __len__(self) -> int:
        return len(self.outcomes)

    def resolution_defect(self) -> float:
        """Entrywise deviation of the outcome sum from the identity."""
        total = sum(o.operator for o in self.outcomes)
        d = total.shape[0]
        return float(np.max(np.abs(total - np.eye(d))))

    def probabilities(self, rho: DensityOperator) -> dict[tuple, float]:
        if rho.dims != self.dims:
            raise DomainError(f"state dims {rho.dims} != POVM dims {self.dims}")
        return {
            o.label: float(np.einsum("ij,ji->", o.operator, rho.mat).real)
            for o in self.outcomes
        }


@dataclass(frozen=True)
class CharlieOutcome:
    """One relay outcome: total count c, phase index j, and its unit ket."""

    c: int
    j: int
    ket: FockVector

    @property
    def projector(self) -> np.ndarray:
        return np.outer(self.ket.amp, self.ket.amp.conj())


@dataclass(frozen=True)
class CharliePovm:
    """The relay's coherent total-photon-number measurement."""

    n_max: int
    outcomes: tuple[CharlieOutcome, ...]

    def __iter__(self) -> Iterator[CharlieOutcome]:
        return iter(self.outcomes)

    @property
    def dims(self) -> tuple[int, int]:
        m = self.n_max + 1
        return (m, m)

    def sector_size(self, c: int) -> int:
        """Number of outcomes announcing total count c."""
        if not 0 <= c <= 2 * self.n_max:
            raise DomainError(f"total count {c} out of range 0..{2 * self.n_max}")
        return min(c, 2 * self.n_max - c) + 1

    def sector(self, c: int) -> tuple[CharlieOutcome, ...]:
        return tuple(o for o in self.outcomes if o.c == c)

    def outcome(self, c: int, j: int = 0) -> CharlieOutcome:
        for o in self.outcomes:
            if o.c == c and o.j == j:
                return o
        raise DomainError(f"no outcome (c={c}, j={j})")

    def as_povm_set(self) -> PovmSet:
        return PovmSet(
            self.dims,
            tuple(PovmOutcome((o.c, o.j), o.projector) for o in self.outcomes),
        )

    def resolution_defect(self) -> float:
        return self.as_povm_set().resolution_defect()


def charlie_povm(n_max: int) -> CharliePovm:
    """All relay outcomes (c, j) for per-party photon cutoff n_max."""
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    m = n_max + 1
    outcomes = []
    for c in range(2 * n_max + 1):
        lo, hi = max(0, c - n_max), min(n_max, c)
        size = hi - lo + 1
        omega = np.exp(2j * np.pi / size)
        for j in range(size):
            amp = np.zeros(m * m, dtype=np.complex128)
            for n in range(lo, hi + 1):
                amp[n * m + (c - n)] = omega ** (n * j) / math.sqrt(size)
            outcomes.append(CharlieOutcome(c, j, FockVector((m, m), amp)))
    return CharliePovm(n_max, tuple(outcomes))


def pnrd_projector(n: int, dim: int) -> np.ndarray:
    """|n><n| on a single truncated mode."""
    if not 0 <= n < dim:
        raise DomainError(f"photon count {n} out of range for dimension {dim}")
    op = np.zeros((dim, dim), dtype=np.complex128)
    op[n, n] = 1.0
    return op


def separable_measurement(n_max: int) -> PovmSet:
    """Independent per-mode photon counting: projectors |n_a n_b><n_a n_b|."""
    m = n_max + 1
    outcomes = []
    for n_a in range(m):
        for n_b in range(m):
            op = np.kron(pnrd_projector(n_a, m), pnrd_projector(n_b, m))
            outcomes.append(PovmOutcome((n_a, n_b), op))
    return PovmSet((m, m), tuple(outcomes))


def diagonal_check_state(n_max: int) -> FockVector:
    """Uniform superposition of |0>..|n_max> on one mode."""
    m = n_max + 1
    return FockVector((m,), np.full(m, 1.0 / math.sqrt(m), dtype=np.complex128))


_CONFIG_TOKENS = ("K", "+")


def _sender_state(token: str, n_max: int) -> DensityOperator:
    m = n_max + 1
    if token == "K":
        # uniform mixture of the key symbols
        return DensityOperator((m,), np.eye(m, dtype=np.complex128) / m)
    if token == "+":
        return outer(diagonal_check_state(n_max))
    raise DomainError(f"unknown sender token {token!r}; use 'K' or '+'")


@dataclass(frozen=True)
class CheckStateStatistics:
    """Exact relay statistics for one (Alice, Bob) sender configuration."""

    n_max: int
    config: str
    joint: dict[tuple[int, int], float]
    separable: dict[tuple[int, int], float]

    def joint_sector(self, c: int) -> dict[int, float]:
        return {j: p for (cc, j), p in self.joint.items() if cc == c}


def check_state_statistics(n_max: int, sender_config: str) -> CheckStateStatistics:
    """Outcome probabilities when each party sends a key mixture ('K') or the
    diagonal check state ('+') straight into the relay (lossless)."""
    config = sender_config.strip()
    if len(config) != 2 or any(t not in _CONFIG_TOKENS for t in config):
        raise DomainError(f"sender config must be two of {{K, +}}, got {config!r}")
    rho = tensor(_sender_state(config[0], n_max), _sender_state(config[1], n_max))
    joint = charlie_povm(n_max).as_povm_set().probabilities(rho)
    sep = separable_measurement(n_max).probabilities(rho)
    return CheckStateStatistics(n_max, config, joint, sep)


@dataclass(frozen=True)
class MubSet:
    """Mutually unbiased bases: cross-basis overlaps are uniformly 1/m."""

    dimension: int
    names: tuple[str, ...]
    bases: tuple[tuple[np.ndarray, ...], ...]

    def basis(self, name: str) -> tuple[np.ndarray, ...]:
        try:
            return self.bases[self.names.index(name)]
        except ValueError:
            raise DomainError(f"no basis named {name!r}") from None

    def max_overlap_deviation(self) -> float:
        target = 1.0 / self.dimension
        worst = 0.0
        for i, bi in enumerate(self.bases):
            for bj in self.bases[i + 1 :]:
                for e in bi:
                    for h in bj:
                        worst = max(worst, abs(abs(np.vdot(e, h)) ** 2 - target))
        return worst


def mub_bases(m: int) -> MubSet:
    """The complete MUB set for a two-dimensional encoding (X, Y, Z bases).

    Higher prime-power dimensions admit complete sets as well but are not
    constructed here.
    """
    if m != 2:
        raise UnsupportedDimensionError(
            f"mutually unbiased bases are only provided for m=2, got m={m}"
        )
    s = 1.0 / math.sqrt(2.0)
    x = (np.array([s, s], dtype=complex), np.array([s, -s], dtype=complex))
    y = (np.array([s, 1j * s], dtype=complex), np.array([s, -1j * s], dtype=complex))
    z = (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex))
    return MubSet(2, ("X", "Y", "Z"), (x, y, z))


def prepared_check_states(eps0: float, eps1: float) -> dict[str, FockVector]:
    """Single-mode states a sender emits when measuring the kept arm in each
    basis: the prepare-and-measure view of the check rounds.

    Keys are '+x', '-x', '+y', '-y', '+z', '-z'.
    """
    if eps0 < 0 or eps1 < 0:
        raise DomainError("coefficients must be nonnegative")
    if abs(eps0 + eps1 - 1.0) > 1e-9:
        raise DomainError(f"coefficients must sum to 1, got {eps0 + eps1!r}")
    r0, r1 = math.sqrt(eps0), math.sqrt(eps1)
    states = {
        "+x": np.array([r0, r1], dtype=complex),
        "-x": np.array([r0, -r1], dtype=complex),
        "+y": np.array([r0, -1j * r1], dtype=complex),
        "-y": np.array([r0, 1j * r1], dtype=complex),
        "+z": np.array([1.0, 0.0], dtype=complex),
        "-z": np.array([0.0, 1.0], dtype=complex),
    }
    return {
        k: FockVector((2,), v / np.linalg.norm(v)) for k, v in states.items()
    }
