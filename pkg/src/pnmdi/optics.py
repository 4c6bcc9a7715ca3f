"""Optical channel primitives: beamsplitters, pure loss, thermal noise.

The beamsplitter convention is exp[theta (a^dag b - a b^dag)] with
theta = arccos(sqrt(tau)), so the first mode is the transmitted port:
|1,0> maps to sqrt(tau)|1,0> - sqrt(1-tau)|0,1>. All reported protocol
quantities are insensitive to this phase choice; it is fixed here so the
purified and Kraus channel forms agree exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .fock import (
    DensityOperator,
    DomainError,
    CutoffTooSmallError,
    FockVector,
    apply_unitary,
    outer,
    partial_trace,
    tensor,
    vacuum_density,
    vacuum_vector,
)

__all__ = [
    "ChannelParams",
    "DetectorParams",
    "beamsplitter_unitary",
    "lossy_channel_kraus",
    "lossy_channel_purified",
    "thermal_state",
    "thermal_weights",
    "thermal_truncation_defect",
    "noisy_detection_transform",
    "distance_to_transmissivity",
]

DEFAULT_LOSS_DB_PER_KM = 0.2


def distance_to_transmissivity(
    distance_km: float, loss_db_per_km: float = DEFAULT_LOSS_DB_PER_KM
) -> float:
    """Fibre transmissivity 10^(-loss*d/10) of a link of the given length."""
    if distance_km < 0:
        raise DomainError("distance must be nonnegative")
    return float(10.0 ** (-loss_db_per_km * distance_km / 10.0))


@dataclass(frozen=True)
class ChannelParams:
    """Transmissivities of the two fibre links meeting at the relay."""

    tau_a: float
    tau_b: float
    distance_km: float = 0.0
    loss_db_per_km: float = DEFAULT_LOSS_DB_PER_KM

    def __post_init__(self):
        for name, tau in (("tau_a", self.tau_a), ("tau_b", self.tau_b)):
            if not 0.0 <= tau <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {tau}")
        if self.distance_km < 0:
            raise DomainError("distance must be nonnegative")

    @classmethod
    def symmetric_from_distance(
        cls, distance_km: float, loss_db_per_km: float = DEFAULT_LOSS_DB_PER_KM
    ) -> "ChannelParams":
        """Relay at the midpoint: each link carries sqrt of the end-to-end
        transmissivity of the full distance."""
        tau_total = distance_to_transmissivity(distance_km, loss_db_per_km)
        tau_link = math.sqrt(tau_total)
        return cls(tau_link, tau_link, distance_km, loss_db_per_km)

    @classmethod
    def lossless(cls) -> "ChannelParams":
        return cls(1.0, 1.0, 0.0)

    @property
    def tau_total(self) -> float:
        return self.tau_a * self.tau_b


@dataclass(frozen=True)
class DetectorParams:
    """Photon-number-resolving detector with efficiency and dark counts.

    ``dark_count`` is the probability of a spurious click on vacuum input,
    (1 - efficiency) * n_bar for the injected thermal occupation n_bar.
    """

    efficiency: float
    dark_count: float = 0.0
    thermal_cutoff: int = 2

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise DomainError(f"efficiency must lie in [0, 1], got {self.efficiency}")
        if self.dark_count < 0.0:
            raise DomainError("dark count must be nonnegative")
        if self.efficiency == 1.0 and self.dark_count > 0.0:
            raise DomainError("a unit-efficiency detector cannot have dark counts")
        if self.thermal_cutoff < 1:
            raise DomainError("thermal cutoff must be >= 1")

    @classmethod
    def ideal(cls) -> "DetectorParams":
        return cls(efficiency=1.0, dark_count=0.0)

    @property
    def n_bar(self) -> float:
        """Mean occupation of the thermal mode mixed in at the detector."""
        if self.dark_count == 0.0:
            return 0.0
        return self.dark_count / (1.0 - self.efficiency)

    @property
    def is_ideal(self) -> bool:
        return self.efficiency == 1.0 and self.dark_count == 0.0


@lru_cache(maxsize=256)
def _beamsplitter_cached(tau: float, dim_a: int, dim_b: int) -> np.ndarray:
    theta = math.acos(math.sqrt(tau))
    dim = dim_a * dim_b
    u = np.zeros((dim, dim), dtype=np.complex128)
    for n_tot in range(dim_a + dim_b - 1):
        ks = np.arange(max(0, n_tot - dim_b + 1), min(dim_a - 1, n_tot) + 1)
        idx = ks * dim_b + (n_tot - ks)
        g = np.zeros((ks.size, ks.size))
        for i, k in enumerate(ks[:-1]):
            # <k+1, n-k-1| a^dag b |k, n-k> = sqrt((k+1)(n-k))
            val = math.sqrt((k + 1) * (n_tot - k))
            g[i + 1, i] = val
            g[i, i + 1] = -val
        u[np.ix_(idx, idx)] = expm(theta * g)
    u.setflags(write=False)
    return u


def beamsplitter_unitary(tau: float, dim_a: int, dim_b: int) -> np.ndarray:
    """Two-mode beamsplitter of transmissivity tau on truncated modes.

    Built by exponentiating the generator blockwise per total photon number,
    so the matrix is exactly unitary and exactly number-conserving on the
    truncated space. Sectors that fit fully under both cutoffs reproduce the
    physical transformation; results are cached per (tau, dims) and returned
    read-only.
    """
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"transmissivity must lie in [0, 1], got {tau}")
    if dim_a < 1 or dim_b < 1:
        raise DomainError("mode dimensions must be >= 1")
    return _beamsplitter_cached(float(tau), int(dim_a), int(dim_b))


def lossy_channel_kraus(
    rho: DensityOperator, tau: float, mode: int
) -> DensityOperator:
    """Pure-loss channel: mix the mode with vacuum, trace the environment."""
    env_dim = rho.dims[mode]
    big = tensor(rho, vacuum_density(env_dim))
    u = beamsplitter_unitary(tau, rho.dims[mode], env_dim)
    big = apply_unitary(big, u, (mode, rho.n_modes))
    return partial_trace(big, range(rho.n_modes))


def lossy_channel_purified(psi: FockVector, tau: float, mode: int) -> FockVector:
    """Pure-loss channel keeping the environment: appends one mode (last)
    holding the lost photons, sized to the mode it couples to."""
    env_dim = psi.dims[mode]
    big = tensor(psi, vacuum_vector(env_dim))
    u = beamsplitter_unitary(tau, psi.dims[mode], env_dim)
    return apply_unitary(big, u, (mode, psi.n_modes))


def thermal_weights(n_bar: float, cutoff: int) -> np.ndarray:
    """Unnormalized Bose-Einstein weights n_bar^n / (1+n_bar)^(n+1)."""
    if n_bar < 0:
        raise DomainError("mean photon number must be nonnegative")
    if cutoff < 0:
        raise DomainError("cutoff must be >= 0")
    if n_bar == 0.0:
        w = np.zeros(cutoff + 1)
        w[0] = 1.0
        return w
    n = np.arange(cutoff + 1, dtype=np.float64)
    return n_bar**n / (1.0 + n_bar) ** (n + 1)


def thermal_truncation_defect(n_bar: float, cutoff: int) -> float:
    """Probability mass above the cutoff: (n_bar/(1+n_bar))^(cutoff+1)."""
    if n_bar == 0.0:
        return 0.0
    return float((n_bar / (1.0 + n_bar)) ** (cutoff + 1))


def thermal_state(
    n_bar: float, cutoff: int, max_defect: float = 1e-9
) -> DensityOperator:
    """Truncated, renormalized thermal state of mean occupation n_bar."""
    defect = thermal_truncation_defect(n_bar, cutoff)
    if defect > max_defect:
        raise CutoffTooSmallError(
            f"thermal truncation at {cutoff} discards {defect:.3e} > {max_defect:.3e}"
        )
    w = thermal_weights(n_bar, cutoff)
    return DensityOperator((cutoff + 1,), np.diag(w / w.sum()).astype(complex))


def noisy_detection_transform(
    rho: DensityOperator, mode: int, det: DetectorParams
) -> DensityOperator:
    """Apply detector loss and dark noise to one mode before PNRD readout.

    The mode is mixed with a thermal state at a beamsplitter of transmissivity
    equal to the detector efficiency and the reflected port is traced out.
    With dark noise present the mode's cutoff grows by the thermal cutoff so
    the injected photons are represented exactly; photon-counting projectors
    applied to the returned mode model the realistic detector.
    """
    d0 = rho.dims[mode]
    t = 0 if det.n_bar == 0.0 else det.thermal_cutoff
    # grow the target mode to hold reflected thermal photons exactly
    if t > 0:
        arr = rho.mat.reshape(rho.dims + rho.dims)
        pad = [(0, 0)] * (2 * rho.n_modes)
        pad[mode] = (0, t)
        pad[mode + rho.n_modes] = (0, t)
        arr = np.pad(arr, pad)
        dims = list(rho.dims)
        dims[mode] = d0 + t
        d = int(np.prod(dims))
        rho = DensityOperator(tuple(dims), arr.reshape(d, d), rho.trace_norm)
    anc_dim = d0 + t
    thermal = thermal_state(det.n_bar, t, max_defect=np.inf)
    if anc_dim > t + 1:
        w = np.zeros(anc_dim, dtype=np.complex128)
        w[: t + 1] = thermal.mat.diagonal()
        thermal = DensityOperator((anc_dim,), np.diag(w))
    big = tensor(rho, thermal)
    u = beamsplitter_unitary(det.efficiency, rho.dims[mode], anc_dim)
    big = apply_unitary(big, u, (mode, rho.n_modes))
    return partial_trace(big, range(rho.n_modes))


def detector_povm(dim: int, det: DetectorParams) -> list[np.ndarray]:
    """Photon-count POVM of a lossy, dark-noisy PNRD on a dimension-``dim`` mode.

    Element k is the Heisenberg dual of the detection channel followed by the
    projector |k><k|: D_k = Tr_anc[(I x sigma) U^dag (|k><k| x I) U] with
    sigma the (renormalized, truncated) thermal state. Counts run up to the
    mode cutoff plus the thermal cutoff and the elements resolve the identity
    on the input space exactly.
    """
    t = 0 if det.n_bar == 0.0 else det.thermal_cutoff
    big = dim + t
    u = beamsplitter_unitary(det.efficiency, big, big)
    w = thermal_weights(det.n_bar, t)
    sigma = np.zeros(big)
    sigma[: t + 1] = w / w.sum()
    u4 = u.reshape(big, big, big, big)
    elements = []
    for k in range(big):
        uk = u4[k]  # uk[o2, i1, i2] = <k, o2|U|i1, i2>
        dk = np.einsum("aib,ajb,b->ij", uk.conj(), uk, sigma)
        elements.append(dk[:dim, :dim])
    return elements
