"""End-to-end protocol evaluation and benchmark bounds.

The production path keeps the global state pure: both senders' two-mode
states are propagated through purified loss channels (the lost photons stay
in explicit environment modes), the relay outcome is a rank-1 projection on
the two relay modes, and the conditional joint state of the kept modes is a
Gram contraction over the environment indices. A dense mixed-state path
implementing the same conditioning operator-by-operator is retained as an
independent oracle for small cutoffs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .fock import (
    DensityOperator,
    DomainError,
    FockVector,
    IntegrityError,
    apply_measurement,
    key_state,
    outer,
    partial_trace,
    project_onto,
    reduced_density,
    shannon_entropy,
    tensor,
    von_neumann_entropy,
)
from .measurements import CharliePovm, charlie_povm
from .optics import ChannelParams, lossy_channel_kraus, lossy_channel_purified

__all__ = [
    "OutcomeRow",
    "KeyRateBreakdown",
    "BoundCurvePoint",
    "lossy_pure_state",
    "conditional_state",
    "conditional_state_mixed_path",
    "charlie_outcome_probabilities",
    "mutual_information_ab",
    "holevo_eve",
    "key_rate",
    "reverse_coherent_information",
    "plob_bound",
    "single_repeater_bound",
    "bound_curve_point",
    "photon_count_sweep",
]

# Below this probability mass an outcome contributes exactly zero and is not
# normalized, avoiding 0/0 noise in dead branches.
PROBABILITY_FLOOR = 1e-15


@dataclass(frozen=True)
class OutcomeRow:
    """Per-outcome record of the key-rate decomposition."""

    label: str
    p: float
    i_ab: float
    i_e: float
    entropy_a: float
    entropy_ab: float

    @property
    def contribution(self) -> float:
        return self.p * max(0.0, self.i_ab - self.i_e)

    @property
    def rci_term(self) -> float:
        return self.p * max(0.0, self.entropy_a - self.entropy_ab)


@dataclass(frozen=True)
class KeyRateBreakdown:
    rows: tuple[OutcomeRow, ...]

    @property
    def total_probability(self) -> float:
        return sum(r.p for r in self.rows)

    @property
    def total_key_rate(self) -> float:
        return sum(r.contribution for r in self.rows)

    @property
    def rci(self) -> float:
        return sum(r.rci_term for r in self.rows)

    def row(self, label: str) -> OutcomeRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise DomainError(f"no outcome labeled {label!r}")


@dataclass(frozen=True)
class BoundCurvePoint:
    distance_km: float
    tau_total: float
    plob: float
    single_repeater: float


def lossy_pure_state(
    coeffs_a: Sequence[float],
    coeffs_b: Sequence[float],
    channel: ChannelParams,
) -> FockVector:
    """Global pure state after fibre loss, modes (A1, A2, B2, B1, EA, EB).

    A2/B2 travel to the relay; EA/EB hold the photons lost en route and are
    what a wiretapping eavesdropper ends up with.
    """
    if len(coeffs_a) != len(coeffs_b):
        raise DomainError("senders must share one photon cutoff")
    psi = tensor(key_state(coeffs_a), key_state(coeffs_b))
    psi = lossy_channel_purified(psi, channel.tau_a, 1)  # appends EA
    psi = lossy_channel_purified(psi, channel.tau_b, 2)  # appends EB
    return psi


def _conditional_pure(
    global_state: FockVector, outcome_ket: FockVector
) -> FockVector:
    """Project the relay modes; remaining modes are (A1, B1, EA, EB)."""
    return project_onto(global_state, outcome_ket, (1, 2))


def _row_from_conditional(
    label: str, p_total: float, rho_ab: DensityOperator
) -> OutcomeRow:
    i_ab = mutual_information_ab(rho_ab)
    i_e = holevo_eve(rho_ab)
    s_ab = von_neumann_entropy(rho_ab)
    s_a = von_neumann_entropy(partial_trace(rho_ab, (0,)))
    return OutcomeRow(label, p_total, i_ab, i_e, s_a, s_ab)


def _zero_row(label: str, p: float) -> OutcomeRow:
    return OutcomeRow(label, p, 0.0, 0.0, 0.0, 0.0)


def _breakdown(
    coeffs_a: Sequence[float],
    coeffs_b: Sequence[float],
    channel: ChannelParams,
    povm: CharliePovm | None = None,
) -> KeyRateBreakdown:
    n_max = len(coeffs_a) - 1
    if povm is None:
        povm = charlie_povm(n_max)
    elif povm.n_max != n_max:
        raise DomainError("POVM cutoff does not match the coefficients")
    psi = lossy_pure_state(coeffs_a, coeffs_b, channel)
    rows = []
    for c in range(2 * n_max + 1):
        size = povm.sector_size(c)
        chi = _conditional_pure(psi, povm.outcome(c, 0).ket)
        p_j0 = chi.norm2
        p_c = size * p_j0
        if p_j0 < PROBABILITY_FLOOR:
            rows.append(_zero_row(str(c), p_c))
            continue
        rho_ab = reduced_density(chi, (0, 1)).normalized()
        rows.append(_row_from_conditional(str(c), p_c, rho_ab))
    breakdown = KeyRateBreakdown(tuple(rows))
    if abs(breakdown.total_probability - 1.0) > 1e-8:
        raise IntegrityError(
            f"relay outcome probabilities sum to {breakdown.total_probability!r}"
        )
    return breakdown


def key_rate(
    coeffs_a: Sequence[float],
    coeffs_b: Sequence[float],
    channel: ChannelParams,
) -> KeyRateBreakdown:
    """Asymptotic key rate K = sum_c P_c max[0, I_AB|c - I_E|c], in bits per
    protocol use, with the per-outcome decomposition and the RCI."""
    return _breakdown(coeffs_a, coeffs_b, channel)


def conditional_state(
    coeffs_a: Sequence[float],
    coeffs_b: Sequence[float],
    channel: ChannelParams,
    c: int,
    j: int = 0,
) -> tuple[DensityOperator, float]:
    """Joint kept-mode state conditioned on relay outcome (c, j) and the
    total probability P_c of announcing c.

    For dead outcomes (P below the floor) the subnormalized state is returned
    unnormalized together with its (vanishing) probability.
    """
    n_max = len(coeffs_a) - 1
    povm = charlie_povm(n_max)
    psi = lossy_pure_state(coeffs_a, coeffs_b, channel)
    chi = _conditional_pure(psi, povm.outcome(c, j).ket)
    p_j = chi.norm2
    p_c = povm.sector_size(c) * p_j
    rho = reduced_density(chi, (0, 1))
    if p_j < PROBABILITY_FLOOR:
        return rho, p_c
    return rho.normalized(), p_c


def conditional_state_mixed_path(
    coeffs_a: Sequence[float],
    coeffs_b: Sequence[float],
    channel: ChannelParams,
    c: int,
    j: int = 0,
) -> tuple[DensityOperator, float]:
    """Oracle path: dense mixed-state conditioning, operator by operator.

    Builds the two lossy sender states explicitly, applies the relay
    projector on the middle modes and traces them out. Memory scales as the
    square of the purified path, so this is only for small cutoffs.
    """
    n_max = len(coeffs_a) - 1
    povm = charlie_povm(n_max)
    rho_a = lossy_channel_kraus(outer(key_state(coeffs_a)), channel.tau_a, 1)
    rho_b = lossy_channel_kraus(outer(key_state(coeffs_b)), channel.tau_b, 0)
    rho4 = tensor(rho_a, rho_b)  # (A1, CA, CB, B1)
    proj = povm.outcome(c, j).projector
    sub, p_j = apply_measurement(rho4, proj, (1, 2))
    rho_ab = partial_trace(sub, (0, 3))
    p_c = povm.sector_size(c) * p_j
    if p_j < PROBABILITY_FLOOR:
        return rho_ab, p_c
    return rho_ab.normalized(), p_c


def charlie_outcome_probabilities(
    coeffs_a: Sequence[float],
    coeffs_b: Sequence[float],
    channel: ChannelParams,
) -> dict[tuple[int, int], float]:
    """Probability of every relay outcome (c, j)."""
    n_max = len(coeffs_a) - 1
    povm = charlie_povm(n_max)
    psi = lossy_pure_state(coeffs_a, coeffs_b, channel)
    return {
        (o.c, o.j): _conditional_pure(psi, o.ket).norm2 for o in povm.outcomes
    }


def mutual_information_ab(rho_ab: DensityOperator) -> float:
    """Shannon mutual information of the joint photon-count distribution."""
    if abs(rho_ab.trace_norm - 1.0) > 1e-9:
        raise DomainError("mutual information needs a normalized state")
    if rho_ab.n_modes != 2:
        raise DomainError("expected a two-mode joint state")
    p = rho_ab.photon_number_distribution()
    h_a = shannon_entropy(p.sum(axis=1))
    h_b = shannon_entropy(p.sum(axis=0))
    h_ab = shannon_entropy(p)
    return h_a + h_b - h_ab


def holevo_eve(rho_ab: DensityOperator) -> float:
    """Eavesdropper information bound S(rho_AB) - sum_b P_b S(rho_A|b).

    Valid when the global state conditioned on the relay outcome is pure up
    to the eavesdropper's modes, so her entropy equals the joint entropy of
    the kept modes before and after the receiver's photon count b.
    """
    if abs(rho_ab.trace_norm - 1.0) > 1e-9:
        raise DomainError("Holevo bound needs a normalized state")
    if rho_ab.n_modes != 2:
        raise DomainError("expected a two-mode joint state")
    d_a, d_b = rho_ab.dims
    s_ab = von_neumann_entropy(rho_ab)
    blocks = rho_ab.mat.reshape(d_a, d_b, d_a, d_b)
    avg = 0.0
    for b in range(d_b):
        block = blocks[:, b, :, b]
        p_b = float(np.trace(block).real)
        if p_b < PROBABILITY_FLOOR:
            continue
        avg += p_b * von_neumann_entropy(DensityOperator((d_a,), block / p_b))
    return s_ab - avg


def reverse_coherent_information(
    coeffs_a: Sequence[float],
    coeffs_b: Sequence[float],
    channel: ChannelParams,
    mode: Literal["single_repeater", "point_to_point"] = "single_repeater",
) -> float:
    """RCI in bits per use: sum_c P_c max[0, S(rho_A|c) - S(rho_AB|c)] with
    the relay, or the single direct-transmission term without it."""
    if mode == "single_repeater":
        return _breakdown(coeffs_a, coeffs_b, channel).rci
    if mode != "point_to_point":
        raise DomainError(f"unknown RCI mode {mode!r}")
    psi = lossy_channel_purified(key_state(coeffs_a), channel.tau_total, 1)
    rho_ab = reduced_density(psi, (0, 1)).normalized()
    s_ab = von_neumann_entropy(rho_ab)
    s_a = von_neumann_entropy(partial_trace(rho_ab, (0,)))
    return max(0.0, s_a - s_ab)


def plob_bound(tau: float) -> float:
    """Repeaterless secret-key capacity -log2(1 - tau) of the loss channel."""
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"transmissivity must lie in [0, 1], got {tau}")
    if tau == 1.0:
        return math.inf
    return -math.log2(1.0 - tau)


def single_repeater_bound(tau: float) -> float:
    """Capacity -log2(1 - sqrt(tau)) with one ideal middle relay."""
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"transmissivity must lie in [0, 1], got {tau}")
    if tau == 1.0:
        return math.inf
    return -math.log2(1.0 - math.sqrt(tau))


def bound_curve_point(
    distance_km: float, loss_db_per_km: float = 0.2
) -> BoundCurvePoint:
    from .optics import distance_to_transmissivity

    tau = distance_to_transmissivity(distance_km, loss_db_per_km)
    return BoundCurvePoint(distance_km, tau, plob_bound(tau), single_repeater_bound(tau))


def photon_count_sweep(
    n_max_values: Sequence[int],
    distance_km: float,
    seed: int = 0,
    loss_db_per_km: float = 0.2,
) -> dict[int, float]:
    """Key rate at one distance as the per-party photon cutoff varies.

    Coefficients are optimized per cutoff; each optimization is warm-started
    from the previous cutoff's optimum (padded with a zero), so the reported
    rates are nondecreasing in the cutoff up to optimizer tolerance.
    """
    from .classical import optimize_coefficients

    channel = ChannelParams.symmetric_from_distance(distance_km, loss_db_per_km)
    rates: dict[int, float] = {}
    warm: np.ndarray | None = None
    for n_max in n_max_values:
        result = optimize_coefficients(
            n_max, distance_km, seed=seed, warm_start=warm,
            loss_db_per_km=loss_db_per_km,
        )
        rates[n_max] = key_rate(result.coefficients, result.coefficients, channel).total_key_rate
        warm = result.coefficients
    return rates
