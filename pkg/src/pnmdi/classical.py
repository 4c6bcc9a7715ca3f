"""Classical surrogate protocol and the coefficient / squeezing optimizers.

High-cutoff joint states are expensive to optimize directly, so the sender
coefficients are chosen against a classical model in which every photon is
a ball dropped with probability tau per link: the relay sees binomially
thinned counts and the eavesdropper keeps the lost ones. In the Fock basis
this reproduces the quantum relay statistics exactly, and the objective is
the average mutual-information advantage of the trusted parties over the
eavesdropper. The low-cutoff (single-photon) case is cheap enough to
optimize against the full quantum key rate instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import comb

from .fock import DomainError, ProbTable, shannon_entropy, tmsv_coefficients
from .optics import ChannelParams, DetectorParams, distance_to_transmissivity

__all__ = [
    "ClassicalModel",
    "OptimizationResult",
    "classical_arrival_prob",
    "classical_charlie_prob",
    "classical_ab_table",
    "classical_abe_table",
    "classical_objective",
    "optimize_coefficients",
    "optimize_gamma",
]

PROBABILITY_FLOOR = 1e-15


@dataclass(frozen=True)
class ClassicalModel:
    """Sender photon-number distributions and the per-link transmissivity."""

    p_a: np.ndarray
    p_b: np.ndarray
    tau_link: float

    def __post_init__(self):
        for name, p in (("p_a", self.p_a), ("p_b", self.p_b)):
            arr = np.asarray(p, dtype=np.float64)
            if arr.ndim != 1 or arr.min() < 0 or abs(arr.sum() - 1.0) > 1e-6:
                raise DomainError(f"{name} must be a probability vector")
            object.__setattr__(self, name, arr)
        if self.p_a.size != self.p_b.size:
            raise DomainError("senders must share one photon cutoff")
        if not 0.0 <= self.tau_link <= 1.0:
            raise DomainError(f"tau_link must lie in [0, 1], got {self.tau_link}")

    @classmethod
    def symmetric_from_distance(
        cls, coeffs, distance_km: float, loss_db_per_km: float = 0.2
    ) -> "ClassicalModel":
        """Relay at the midpoint of the given total distance: each link
        carries the square root of the end-to-end transmissivity."""
        p = np.asarray(coeffs, dtype=np.float64)
        tau_link = np.sqrt(distance_to_transmissivity(distance_km, loss_db_per_km))
        return cls(p, p, float(tau_link))

    @property
    def n_max(self) -> int:
        return self.p_a.size - 1


def classical_arrival_prob(p_n: np.ndarray, tau_link: float) -> np.ndarray:
    """Binomial thinning of a sender's photon-number distribution: the
    distribution of the count arriving at the relay on that link."""
    p = np.asarray(p_n, dtype=np.float64)
    n = np.arange(p.size)
    # thin[k, n] = C(n, k) tau^k (1-tau)^(n-k); comb() vanishes for k > n
    thin = (
        comb(n[None, :], n[:, None])
        * tau_link ** n[:, None]
        * np.power(1.0 - tau_link, np.maximum(n[None, :] - n[:, None], 0))
    )
    return thin @ p


def classical_charlie_prob(model: ClassicalModel) -> np.ndarray:
    """Distribution of the relay's total count: the convolution of the two
    arrival distributions."""
    pa = classical_arrival_prob(model.p_a, model.tau_link)
    pb = classical_arrival_prob(model.p_b, model.tau_link)
    return np.convolve(pa, pb)


def classical_ab_table(model: ClassicalModel, n_c: int) -> ProbTable:
    """Joint sender-count table conditioned on the relay announcing n_c."""
    p_c = classical_charlie_prob(model)
    if n_c < 0 or n_c >= p_c.size or p_c[n_c] < PROBABILITY_FLOOR:
        raise DomainError(f"cannot condition on zero-probability count {n_c}")
    m = model.n_max + 1
    na, nb = np.indices((m, m))
    tot = na + nb
    tau = model.tau_link
    val = (
        comb(tot, n_c)
        * tau**n_c
        * np.power(1.0 - tau, np.maximum(tot - n_c, 0))
        * model.p_a[na]
        * model.p_b[nb]
    )
    val[tot < n_c] = 0.0
    return ProbTable((("n_a", m), ("n_b", m)), val / p_c[n_c])


def classical_abe_table(model: ClassicalModel, n_c: int) -> ProbTable:
    """Joint table of sender counts and per-link eavesdropped counts,
    conditioned on the relay count; supported on
    n_a + n_b - (n_ea + n_eb) = n_c."""
    p_c = classical_charlie_prob(model)
    if n_c < 0 or n_c >= p_c.size or p_c[n_c] < PROBABILITY_FLOOR:
        raise DomainError(f"cannot condition on zero-probability count {n_c}")
    m = model.n_max + 1
    na, nb, ea, eb = np.indices((m, m, m, m))
    tau = model.tau_link
    val = (
        comb(na, ea)
        * comb(nb, eb)
        * tau**n_c
        * np.power(1.0 - tau, ea + eb)
        * model.p_a[na]
        * model.p_b[nb]
    )
    support = (ea <= na) & (eb <= nb) & (na + nb - ea - eb == n_c)
    val[~support] = 0.0
    axes = (("n_a", m), ("n_b", m), ("n_ea", m), ("n_eb", m))
    return ProbTable(axes, val / p_c[n_c])


def classical_objective(model: ClassicalModel) -> float:
    """Average mutual-information advantage over the eavesdropper, in bits:
    sum_c P_c (I_AB|c - I_AE|c), without per-term clamping."""
    p_c = classical_charlie_prob(model)
    total = 0.0
    for n_c, p in enumerate(p_c):
        if p < PROBABILITY_FLOOR:
            continue
        ab = classical_ab_table(model, n_c).p
        i_ab = (
            shannon_entropy(ab.sum(axis=1))
            + shannon_entropy(ab.sum(axis=0))
            - shannon_entropy(ab)
        )
        abe = classical_abe_table(model, n_c).p
        a_e = abe.sum(axis=1)  # (n_a, n_ea, n_eb)
        i_ae = (
            shannon_entropy(a_e.sum(axis=(1, 2)))
            + shannon_entropy(a_e.sum(axis=0))
            - shannon_entropy(a_e)
        )
        total += p * (i_ab - i_ae)
    return float(total)


@dataclass(frozen=True)
class OptimizationResult:
    """Best point found by a derivative-free search."""

    objective_value: float
    iterations: int
    converged: bool
    restarts_used: int
    coefficients: np.ndarray | None = None
    gamma: float | None = None


def _softmax(z: np.ndarray) -> np.ndarray:
    x = np.concatenate(([0.0], z))
    x = x - x.max()
    e = np.exp(x)
    return e / e.sum()


def _to_softmax_coords(a: np.ndarray) -> np.ndarray:
    safe = np.clip(np.asarray(a, dtype=np.float64), 1e-12, None)
    x = np.log(safe)
    return x[1:] - x[0]


def _nelder_mead_restarts(fun, n_dim, seed, restarts, warm_start=None):
    """Maximize over the simplex in softmax coordinates with seeded restarts.

    Restart 0 starts from the uniform point (or the warm start); later
    restarts draw Gaussian softmax coordinates. The best result wins, ties
    broken by the lowest restart index.
    """
    rng = np.random.default_rng(seed)
    starts = [np.zeros(n_dim) if warm_start is None else _to_softmax_coords(warm_start)]
    starts += [rng.normal(0.0, 2.0, size=n_dim) for _ in range(restarts - 1)]
    best = None
    iterations = 0
    for idx, z0 in enumerate(starts):
        res = optimize.minimize(
            lambda z: -fun(_softmax(z)),
            z0,
            method="Nelder-Mead",
            options={"maxiter": 2000, "xatol": 1e-8, "fatol": 1e-9},
        )
        iterations += int(res.nit)
        if best is None or res.fun < best[0] - 1e-15:
            best = (res.fun, idx, res)
    value, _, res = best
    return _softmax(res.x), -value, iterations, bool(res.success)


def optimize_coefficients(
    n_max: int,
    distance_km: float,
    detector: DetectorParams | None = None,
    objective: str = "auto",
    seed: int = 0,
    restarts: int = 8,
    warm_start: np.ndarray | None = None,
    loss_db_per_km: float = 0.2,
) -> OptimizationResult:
    """Choose sender coefficients for one total distance.

    ``objective`` is ``"classical"`` (surrogate model), ``"quantum"`` (full
    key rate; detector noise included when ``detector`` is given), or
    ``"auto"``: quantum for the single-photon encoding where the search is
    one-dimensional, classical otherwise.
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    if objective == "auto":
        objective = "quantum" if n_max == 1 else "classical"
    if detector is not None and objective != "quantum":
        raise DomainError("detector noise enters the quantum objective only")
    if detector is not None and n_max != 1:
        raise DomainError("the realistic detector model is single-photon only")

    if objective == "classical":
        def fun(a: np.ndarray) -> float:
            model = ClassicalModel.symmetric_from_distance(
                a, distance_km, loss_db_per_km
            )
            return classical_objective(model)

        coeffs, value, iters, ok = _nelder_mead_restarts(
            fun, n_max, seed, restarts, warm_start
        )
        return OptimizationResult(value, iters, ok, restarts, coefficients=coeffs)

    if objective != "quantum":
        raise DomainError(f"unknown objective {objective!r}")

    channel = ChannelParams.symmetric_from_distance(distance_km, loss_db_per_km)

    if n_max == 1:
        if detector is None:
            from .protocol import key_rate

            def rate(a0: float) -> float:
                return key_rate((a0, 1.0 - a0), (a0, 1.0 - a0), channel).total_key_rate
        else:
            from .noisy import realistic_key_rate

            def rate(a0: float) -> float:
                coeffs = (a0, 1.0 - a0)
                return realistic_key_rate(coeffs, coeffs, channel, detector).total_key_rate

        res = optimize.minimize_scalar(
            lambda a0: -rate(a0),
            bounds=(1e-9, 1.0 - 1e-9),
            method="bounded",
            options={"xatol": 1e-9},
        )
        coeffs = np.array([res.x, 1.0 - res.x])
        return OptimizationResult(
            -float(res.fun), int(res.nfev), bool(res.success), 1, coefficients=coeffs
        )

    from .protocol import key_rate

    def fun(a: np.ndarray) -> float:
        return key_rate(a, a, channel).total_key_rate

    coeffs, value, iters, ok = _nelder_mead_restarts(
        fun, n_max, seed, restarts, warm_start
    )
    return OptimizationResult(value, iters, ok, restarts, coefficients=coeffs)


def optimize_gamma(
    n_max: int,
    distance_km: float,
    loss_db_per_km: float = 0.2,
    gamma_max: float = 0.999,
) -> OptimizationResult:
    """Maximize the key rate over the squeezing parameter of the truncated
    two-mode squeezed states (a one-dimensional search)."""
    from .protocol import key_rate

    channel = ChannelParams.symmetric_from_distance(distance_km, loss_db_per_km)

    def rate(gamma: float) -> float:
        coeffs = tmsv_coefficients(gamma, n_max)
        return key_rate(coeffs, coeffs, channel).total_key_rate

    res = optimize.minimize_scalar(
        lambda g: -rate(g),
        bounds=(0.0, gamma_max),
        method="bounded",
        options={"xatol": 5e-4},
    )
    return OptimizationResult(
        -float(res.fun), int(res.nfev), bool(res.success), 1, gamma=float(res.x)
    )
