"""Dense linear algebra on truncated multi-mode Fock spaces.

States are stored flat in mixed-radix order: for per-mode dimensions
``(d0, d1, ...)`` the basis state ``|n0, n1, ...>`` sits at index
``n0*d1*d2*... + n1*d2*... + ...`` (mode 0 most significant), which is
exactly numpy's C-order ``ravel`` of an array of shape ``dims``.

Everything here is a pure function of immutable inputs; nothing keeps
global state, so all operations are safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FockError",
    "DomainError",
    "DimensionMismatchError",
    "CutoffExceededError",
    "CutoffTooSmallError",
    "UnsupportedDimensionError",
    "IntegrityError",
    "ModeDims",
    "as_dims",
    "FockVector",
    "DensityOperator",
    "ProbTable",
    "fock_basis_vector",
    "vacuum_vector",
    "vacuum_density",
    "key_state",
    "tmsv_truncated",
    "tmsv_coefficients",
    "tensor",
    "outer",
    "pad_mode",
    "partial_trace",
    "reduced_density",
    "apply_unitary",
    "apply_measurement",
    "project_onto",
    "von_neumann_entropy",
    "shannon_entropy",
]

# Tolerances used by validation helpers; key rates are in bits throughout.
HERMITICITY_ATOL = 1e-10
EIGENVALUE_FLOOR = -1e-10
ENTROPY_CLAMP = 1e-12
NORM_ATOL = 1e-12


class FockError(Exception):
    """Base class for errors raised by this package."""


class DomainError(FockError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DimensionMismatchError(FockError, ValueError):
    """Mode dimensions of the operands are incompatible."""


class CutoffExceededError(DomainError):
    """A requested occupation does not fit under the mode's photon cutoff."""


class CutoffTooSmallError(DomainError):
    """A truncation discards more weight than the caller allows."""


class UnsupportedDimensionError(DomainError):
    """The operation is only defined for specific Hilbert-space dimensions."""


class IntegrityError(FockError):
    """A numerical invariant that should hold at runtime was violated."""


ModeDims = tuple[int, ...]


def as_dims(dims: Iterable[int]) -> ModeDims:
    """Validate per-mode dimensions (each >= 1) and return them as a tuple."""
    out = tuple(int(d) for d in dims)
    if not out:
        raise DomainError("need at least one mode")
    if any(d < 1 for d in out):
        raise DomainError(f"every mode dimension must be >= 1, got {out}")
    return out


def total_dim(dims: Iterable[int]) -> int:
    return int(np.prod(list(dims), dtype=np.int64))


def basis_index(dims: ModeDims, occupations: Sequence[int]) -> int:
    """Mixed-radix index of the occupation tuple, mode 0 most significant."""
    if len(occupations) != len(dims):
        raise DimensionMismatchError(
            f"{len(occupations)} occupations for {len(dims)} modes"
        )
    for n, d in zip(occupations, dims):
        if not 0 <= int(n) < d:
            raise CutoffExceededError(
                f"occupation {n} does not fit in a dimension-{d} mode"
            )
    return int(np.ravel_multi_index(tuple(int(n) for n in occupations), dims))


@dataclass(frozen=True)
class FockVector:
    """Pure multi-mode state: complex amplitudes over the mixed-radix basis.

    ``amp`` may be subnormalized (for conditioned states); ``norm2`` then
    carries the squared norm explicitly.
    """

    dims: ModeDims
    amp: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dims", as_dims(self.dims))
        amp = np.asarray(self.amp, dtype=np.complex128)
        if amp.ndim != 1 or amp.size != total_dim(self.dims):
            raise DimensionMismatchError(
                f"amplitude length {amp.size} does not match dims {self.dims}"
            )
        object.__setattr__(self, "amp", amp)

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amp, self.amp).real)

    def is_normalized(self, atol: float = NORM_ATOL) -> bool:
        return abs(self.norm2 - 1.0) <= atol

    def normalized(self) -> "FockVector":
        n2 = self.norm2
        if n2 <= 0.0:
            raise DomainError("cannot normalize a zero vector")
        return FockVector(self.dims, self.amp / np.sqrt(n2))

    def reshaped(self) -> np.ndarray:
        """Amplitudes as an n_modes-dimensional array (a view when possible)."""
        return self.amp.reshape(self.dims)

    def amplitude(self, occupations: Sequence[int]) -> complex:
        return complex(self.amp[basis_index(self.dims, occupations)])


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian PSD operator with an explicit trace bookkeeping field.

    ``trace_norm`` is 1 for a proper state and the heralding probability for
    subnormalized post-measurement states, making normalization bugs visible.
    """

    dims: ModeDims
    mat: np.ndarray
    trace_norm: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "dims", as_dims(self.dims))
        mat = np.asarray(self.mat, dtype=np.complex128)
        d = total_dim(self.dims)
        if mat.shape != (d, d):
            raise DimensionMismatchError(
                f"matrix shape {mat.shape} does not match dims {self.dims}"
            )
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "trace_norm", float(self.trace_norm))

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    @property
    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def normalized(self) -> "DensityOperator":
        t = self.trace
        if t <= 0.0:
            raise DomainError("cannot normalize an operator with trace <= 0")
        return DensityOperator(self.dims, self.mat / t, 1.0)

    def validate(
        self,
        hermiticity_atol: float = HERMITICITY_ATOL,
        eigenvalue_floor: float = EIGENVALUE_FLOOR,
        trace_atol: float = HERMITICITY_ATOL,
    ) -> "DensityOperator":
        """Check Hermiticity, positivity and trace bookkeeping; return self."""
        dev = np.max(np.abs(self.mat - self.mat.conj().T))
        if dev > hermiticity_atol:
            raise IntegrityError(f"operator not Hermitian: max deviation {dev:.3e}")
        lo = float(np.linalg.eigvalsh(self.mat).min())
        if lo < eigenvalue_floor:
            raise IntegrityError(f"operator not PSD: min eigenvalue {lo:.3e}")
        if abs(self.trace - self.trace_norm) > trace_atol:
            raise IntegrityError(
                f"trace {self.trace:.3e} does not match trace_norm {self.trace_norm:.3e}"
            )
        return self

    def photon_number_distribution(self) -> np.ndarray:
        """Diagonal in the Fock basis, reshaped to ``dims`` (clipped at 0)."""
        p = self.mat.diagonal().real.copy()
        np.clip(p, 0.0, None, out=p)
        return p.reshape(self.dims)


@dataclass(frozen=True)
class ProbTable:
    """Nonnegative array of probabilities with labeled axes."""

    axes: tuple[tuple[str, int], ...]
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        shape = tuple(card for _, card in self.axes)
        if p.shape != shape:
            raise DimensionMismatchError(f"table shape {p.shape} != axes {shape}")
        if p.min() < -1e-12:
            raise DomainError(f"negative probability {p.min():.3e}")
        object.__setattr__(self, "p", np.clip(p, 0.0, None))

    @property
    def total(self) -> float:
        return float(self.p.sum())

    def marginal(self, axis_label: str) -> np.ndarray:
        labels = [lbl for lbl, _ in self.axes]
        if axis_label not in labels:
            raise DomainError(f"no axis labeled {axis_label!r}")
        keep = labels.index(axis_label)
        other = tuple(i for i in range(len(labels)) if i != keep)
        return self.p.sum(axis=other)


# ---------------------------------------------------------------------------
# constructors


def fock_basis_vector(dims: Iterable[int], occupations: Sequence[int]) -> FockVector:
    """Unit vector |n0, n1, ...> on the given truncated modes."""
    dims = as_dims(dims)
    amp = np.zeros(total_dim(dims), dtype=np.complex128)
    amp[basis_index(dims, occupations)] = 1.0
    return FockVector(dims, amp)


def vacuum_vector(dim: int) -> FockVector:
    return fock_basis_vector((dim,), (0,))


def vacuum_density(dim: int) -> DensityOperator:
    return outer(vacuum_vector(dim))


def key_state(coeffs: Sequence[float], simplex_atol: float = 1e-6) -> FockVector:
    """Two-mode state sum_n sqrt(a_n)|nn> from probability weights a_n."""
    a = np.asarray(coeffs, dtype=np.float64)
    if a.ndim != 1 or a.size < 1:
        raise DomainError("coefficients must be a nonempty 1-d sequence")
    if a.min() < 0.0:
        raise DomainError(f"negative coefficient {a.min():.3e}")
    if abs(a.sum() - 1.0) > simplex_atol:
        raise DomainError(f"coefficients sum to {a.sum():.12g}, not 1")
    m = a.size
    amp = np.zeros((m, m), dtype=np.complex128)
    amp[np.arange(m), np.arange(m)] = np.sqrt(a)
    vec = FockVector((m, m), amp.ravel())
    return vec.normalized()


def tmsv_coefficients(gamma: float, n_max: int) -> np.ndarray:
    """Photon-number weights (1-gamma^2) gamma^(2n) / N of the truncated
    two-mode squeezed state, normalized over n = 0..n_max."""
    if not 0.0 <= gamma < 1.0:
        raise DomainError(f"squeezing parameter must lie in [0, 1), got {gamma}")
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    w = (1.0 - gamma**2) * gamma ** (2 * np.arange(n_max + 1, dtype=np.float64))
    return w / w.sum()


def tmsv_truncated(gamma: float, n_max: int) -> FockVector:
    return key_state(tmsv_coefficients(gamma, n_max))


# ---------------------------------------------------------------------------
# composition and reduction


def tensor(x, y):
    """Kronecker product of two vectors or two operators; dims concatenate."""
    if isinstance(x, FockVector) and isinstance(y, FockVector):
        return FockVector(x.dims + y.dims, np.kron(x.amp, y.amp))
    if isinstance(x, DensityOperator) and isinstance(y, DensityOperator):
        return DensityOperator(
            x.dims + y.dims, np.kron(x.mat, y.mat), x.trace_norm * y.trace_norm
        )
    raise DomainError("tensor operands must be two vectors or two operators")


def outer(psi: FockVector) -> DensityOperator:
    return DensityOperator(psi.dims, np.outer(psi.amp, psi.amp.conj()), psi.norm2)


def pad_mode(psi: FockVector, mode: int, new_dim: int) -> FockVector:
    """Grow one mode's cutoff; added basis states carry zero amplitude."""
    _check_mode(psi.dims, mode)
    if new_dim < psi.dims[mode]:
        raise DomainError("pad_mode cannot shrink a mode")
    if new_dim == psi.dims[mode]:
        return psi
    pad = [(0, 0)] * psi.n_modes
    pad[mode] = (0, new_dim - psi.dims[mode])
    arr = np.pad(psi.reshaped(), pad)
    dims = list(psi.dims)
    dims[mode] = new_dim
    return FockVector(tuple(dims), arr.ravel())


def _check_mode(dims: ModeDims, mode: int) -> None:
    if not 0 <= mode < len(dims):
        raise DomainError(f"mode {mode} out of range for {len(dims)} modes")


def _check_keep(dims: ModeDims, keep: Sequence[int]) -> tuple[int, ...]:
    keep = tuple(sorted(set(int(k) for k in keep)))
    if not keep:
        raise DomainError("keep set must be nonempty")
    for k in keep:
        _check_mode(dims, k)
    return keep


def partial_trace(rho: DensityOperator, keep: Sequence[int]) -> DensityOperator:
    """Trace out all modes not in ``keep``; kept modes stay in original order."""
    keep = _check_keep(rho.dims, keep)
    n = rho.n_modes
    arr = rho.mat.reshape(rho.dims + rho.dims)
    # einsum subscripts: traced modes share a row/col index, kept ones stay free
    row = list(range(n))
    col = [i if i not in keep else i + n for i in range(n)]
    out = [i for i in keep] + [i + n for i in keep]
    reduced = np.einsum(arr, row + col, out)
    new_dims = tuple(rho.dims[k] for k in keep)
    d = total_dim(new_dims)
    return DensityOperator(new_dims, reduced.reshape(d, d), rho.trace_norm)


def reduced_density(psi: FockVector, keep: Sequence[int]) -> DensityOperator:
    """Partial trace of |psi><psi| over the discarded modes (Gram contraction).

    Never materializes the full outer product, so it is the cheap path for
    reducing large pure states.
    """
    keep = _check_keep(psi.dims, keep)
    arr = np.moveaxis(psi.reshaped(), keep, range(len(keep)))
    new_dims = tuple(psi.dims[k] for k in keep)
    m = arr.reshape(total_dim(new_dims), -1)
    return DensityOperator(new_dims, m @ m.conj().T, psi.norm2)


def _apply_matrix_vec(
    amp: np.ndarray, dims: ModeDims, op: np.ndarray, modes: Sequence[int]
) -> np.ndarray:
    """Apply ``op`` to the listed modes of a flat amplitude array."""
    arr = np.moveaxis(amp.reshape(dims), modes, range(len(modes)))
    lead = total_dim(tuple(dims[m] for m in modes))
    shape = arr.shape
    out = (op @ arr.reshape(lead, -1)).reshape(shape)
    return np.moveaxis(out, range(len(modes)), modes).ravel()


def _check_op_on_modes(dims: ModeDims, op: np.ndarray, modes: Sequence[int]) -> None:
    if len(set(modes)) != len(modes):
        raise DomainError(f"duplicate target modes {tuple(modes)}")
    for m in modes:
        _check_mode(dims, m)
    d = total_dim(tuple(dims[m] for m in modes))
    if op.shape != (d, d):
        raise DimensionMismatchError(
            f"operator shape {op.shape} does not act on modes {tuple(modes)} "
            f"of dims {dims}"
        )


def apply_unitary(x, u: np.ndarray, modes: Sequence[int]):
    """Conjugate the state by a unitary acting on the listed modes."""
    u = np.asarray(u, dtype=np.complex128)
    modes = [int(m) for m in modes]
    _check_op_on_modes(x.dims, u, modes)
    if isinstance(x, FockVector):
        return FockVector(x.dims, _apply_matrix_vec(x.amp, x.dims, u, modes))
    if isinstance(x, DensityOperator):
        n = x.n_modes
        flat = x.mat.reshape(x.dims + x.dims).ravel()
        dd = x.dims + x.dims
        flat = _apply_matrix_vec(flat, dd, u, modes)
        flat = _apply_matrix_vec(flat, dd, u.conj(), [m + n for m in modes])
        d = total_dim(x.dims)
        return DensityOperator(x.dims, flat.reshape(d, d), x.trace_norm)
    raise DomainError("apply_unitary expects a FockVector or DensityOperator")


def apply_measurement(
    state: DensityOperator, op: np.ndarray, modes: Sequence[int]
) -> tuple[DensityOperator, float]:
    """Return the subnormalized state (Pi x I) rho (Pi x I)^dagger and its trace.

    The caller decides whether and how to renormalize; ``trace_norm`` of the
    returned operator records the outcome probability mass.
    """
    op = np.asarray(op, dtype=np.complex128)
    modes = [int(m) for m in modes]
    _check_op_on_modes(state.dims, op, modes)
    n = state.n_modes
    dd = state.dims + state.dims
    flat = state.mat.reshape(dd).ravel()
    flat = _apply_matrix_vec(flat, dd, op, modes)
    flat = _apply_matrix_vec(flat, dd, op.conj(), [m + n for m in modes])
    d = total_dim(state.dims)
    mat = flat.reshape(d, d)
    prob = float(np.trace(mat).real)
    return DensityOperator(state.dims, mat, prob), prob


def project_onto(
    psi: FockVector, phi: FockVector, modes: Sequence[int]
) -> FockVector:
    """Contract <phi| against the listed modes of |psi|.

    Returns the (generally subnormalized) vector on the remaining modes, in
    their original relative order; its squared norm is the outcome probability
    when ``phi`` is a unit vector.
    """
    modes = [int(m) for m in modes]
    if len(set(modes)) != len(modes):
        raise DomainError(f"duplicate target modes {tuple(modes)}")
    for m in modes:
        _check_mode(psi.dims, m)
    target = tuple(psi.dims[m] for m in modes)
    if phi.dims != target:
        raise DimensionMismatchError(
            f"projector dims {phi.dims} do not match target modes {target}"
        )
    arr = np.moveaxis(psi.reshaped(), modes, range(len(modes)))
    rest_dims = tuple(
        psi.dims[i] for i in range(psi.n_modes) if i not in set(modes)
    )
    flat = arr.reshape(total_dim(phi.dims), -1)
    out = phi.amp.conj() @ flat
    if not rest_dims:
        raise DomainError("projection must leave at least one mode")
    return FockVector(rest_dims, out)


# ---------------------------------------------------------------------------
# entropies (base-2 throughout: key rates are in bits)


def von_neumann_entropy(rho: DensityOperator, norm_atol: float = 1e-9) -> float:
    """-sum lambda log2 lambda over the spectrum, with 0 log 0 := 0.

    Eigenvalues below the clamp threshold are treated as exact zeros, which
    absorbs the small negative values dense Hermitian solvers produce.
    """
    if abs(rho.trace_norm - 1.0) > norm_atol:
        raise DomainError(
            f"entropy needs a normalized state, trace_norm={rho.trace_norm!r}"
        )
    lam = np.linalg.eigvalsh(rho.mat)
    if lam.min() < EIGENVALUE_FLOOR:
        raise IntegrityError(f"negative eigenvalue {lam.min():.3e} beyond tolerance")
    lam = lam[lam > ENTROPY_CLAMP]
    if lam.size == 0:
        return 0.0
    return float(-(lam @ np.log2(lam)))


def shannon_entropy(p, sum_atol: float = 1e-8) -> float:
    """-sum p log2 p for a normalized probability array, with 0 log 0 := 0."""
    arr = p.p if isinstance(p, ProbTable) else np.asarray(p, dtype=np.float64)
    arr = arr.ravel()
    if arr.min() < -1e-12:
        raise DomainError(f"negative probability {arr.min():.3e}")
    total = arr.sum()
    if abs(total - 1.0) > sum_atol:
        raise DomainError(f"probabilities sum to {total:.12g}, not 1")
    arr = arr[arr > ENTROPY_CLAMP]
    if arr.size == 0:
        return 0.0
    return float(-(arr @ np.log2(arr)))
