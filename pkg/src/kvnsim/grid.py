"""Spectral grid backend: multi-qumode wavefunctions on a uniform
position grid.

Each qumode carries one coordinate axis sampled at N points (power of
two) spanning [-half_extent, +half_extent). Gates diagonal in position
act by pointwise phase multiplication; anything involving a momentum
quadrature goes through the unitary FFT of the target axis, with
momentum values 2*pi*fftfreq(N, dx), so operations diagonal in (x, p)
are exact for the continuum generator up to periodic wrap-around.

The rotation gate uses the exact shear split

    R(theta) = exp(i tan(theta/2) X^2/2) exp(i sin(theta) P^2/2)
               exp(i tan(theta/2) X^2/2),

applied with |theta| <= pi/2 (larger angles split into halves, which also
covers the tan singularity at theta = pi). The Fourier gate is R(pi/2) up
to the constant metaplectic phase; this keeps the quadrature exchange
relations X -> P -> -X faithful on any adequate grid, independent of the
dx/dp ratio. The middle shear spreads the state spatially by its momentum
extent, so a rotated or Fourier-transformed mode needs the box to contain
the supports of both its quadratures, with margin.

The grid is an emulation device: extent and resolution are engineering
choices, not part of the compiled circuits.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.fft as sfft

from .kvn import KvNTerm
from .phasepoly import PhasePolynomial
from .synth import Gate, GateKind, GateSequence

DEFAULT_MEMORY_CAP = 2 * 1024 ** 3
MAX_MODES = 4


class CoverageError(ValueError):
    """The grid cannot contain the requested state."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform multi-qumode position grid."""

    num_modes: int
    points_per_mode: int = 128
    half_extent: float = 8.0
    memory_cap_bytes: int = DEFAULT_MEMORY_CAP

    def __post_init__(self):
        if not 1 <= self.num_modes <= MAX_MODES:
            raise ValueError(
                f"num_modes must be between 1 and {MAX_MODES}, got {self.num_modes}"
            )
        n = self.points_per_mode
        if n < 16 or n & (n - 1):
            raise ValueError(
                f"points_per_mode must be a power of two >= 16, got {n}"
            )
        if not self.half_extent > 0:
            raise ValueError("half_extent must be positive")
        state_bytes = 16 * n ** self.num_modes
        if state_bytes > self.memory_cap_bytes:
            raise ValueError(
                f"state of {state_bytes} bytes exceeds the memory cap of "
                f"{self.memory_cap_bytes} bytes"
            )

    @property
    def dx(self) -> float:
        return 2.0 * self.half_extent / self.points_per_mode

    @property
    def dp(self) -> float:
        return 2.0 * np.pi / (self.points_per_mode * self.dx)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_mode,) * self.num_modes

    @property
    def cell_volume(self) -> float:
        return self.dx ** self.num_modes

    def positions(self) -> np.ndarray:
        n = self.points_per_mode
        return (np.arange(n) - n // 2) * self.dx

    def momenta_fft_order(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.points_per_mode, d=self.dx)

    def axis_view(self, values: np.ndarray, axis: int) -> np.ndarray:
        """Reshape a 1-D per-axis array for broadcasting over the grid."""
        shape = [1] * self.num_modes
        shape[axis] = self.points_per_mode
        return values.reshape(shape)


@dataclass
class GridState:
    """Complex amplitudes on the grid, L2-normalized with weight dx^d."""

    spec: GridSpec
    psi: np.ndarray

    def __post_init__(self):
        if self.psi.shape != self.spec.shape:
            raise ValueError(
                f"amplitude shape {self.psi.shape} does not match grid {self.spec.shape}"
            )

    def norm(self) -> float:
        return float(
            np.sqrt(np.sum(np.abs(self.psi) ** 2) * self.spec.cell_volume)
        )

    def copy(self) -> "GridState":
        return GridState(self.spec, self.psi.copy())


@dataclass
class DensityGrid:
    """Real nonnegative values sampled at the grid cell centers."""

    spec: GridSpec
    values: np.ndarray

    def total(self) -> float:
        return float(np.sum(self.values) * self.spec.cell_volume)


def prepare_gaussian(
    spec: GridSpec, mean: Sequence[float], cov: np.ndarray
) -> GridState:
    """Discretize the Gaussian wavefunction with |psi|^2 = N(mean, cov).

    psi(x) is proportional to exp(-(x-mean)^T cov^-1 (x-mean) / 4), sampled
    at cell centers and renormalized on the grid. Raises CoverageError when
    the grid cannot hold the 2-sigma ellipsoid; warns when 5 sigma spills.
    """
    d = spec.num_modes
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if mean.shape != (d,) or cov.shape != (d, d):
        raise ValueError(f"mean/covariance must have dimension {d}")
    if not np.allclose(cov, cov.T, atol=1e-12):
        raise ValueError("covariance must be symmetric")
    eigvals = np.linalg.eigvalsh(cov)
    if eigvals.min() <= 0:
        raise ValueError("covariance must be positive definite")
    sigma = np.sqrt(np.diag(cov))
    l = spec.half_extent
    if np.any(np.abs(mean) + 2 * sigma > l):
        raise CoverageError(
            "grid does not contain the 2-sigma box of the requested Gaussian"
        )
    if np.any(np.abs(mean) + 5 * sigma > l):
        warnings.warn(
            "grid covers less than 5 sigma of the requested Gaussian; "
            "expect boundary artifacts",
            stacklevel=2,
        )
    prec = np.linalg.inv(cov)
    xs = spec.positions()
    quad = np.zeros(spec.shape, dtype=float)
    for i in range(d):
        di = spec.axis_view(xs - mean[i], i)
        for j in range(d):
            dj = spec.axis_view(xs - mean[j], j)
            quad = quad + prec[i, j] * di * dj
    psi = np.exp(-0.25 * quad).astype(np.complex128)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * spec.cell_volume)
    return GridState(spec, psi)


# -- gate application --------------------------------------------------------


def _fft(psi: np.ndarray, axis: int) -> np.ndarray:
    return sfft.fft(psi, axis=axis, norm="ortho", workers=-1, overwrite_x=True)


def _ifft(psi: np.ndarray, axis: int) -> np.ndarray:
    return sfft.ifft(psi, axis=axis, norm="ortho", workers=-1, overwrite_x=True)


def _momentum_phase(psi: np.ndarray, spec: GridSpec, axis: int, chirp: np.ndarray) -> np.ndarray:
    """Multiply a phase diagonal in the momentum of one axis."""
    psi = _fft(psi, axis)
    psi *= chirp
    return _ifft(psi, axis)


def _rotate(psi: np.ndarray, spec: GridSpec, axis: int, theta: float) -> np.ndarray:
    theta = float(np.arctan2(np.sin(theta), np.cos(theta)))  # wrap to (-pi, pi]
    if abs(theta) < 1e-300:
        return psi
    if abs(theta) > np.pi / 2 + 1e-12:
        psi = _rotate(psi, spec, axis, theta / 2)
        return _rotate(psi, spec, axis, theta / 2)
    x = spec.axis_view(spec.positions(), axis)
    p = spec.axis_view(spec.momenta_fft_order(), axis)
    shear = np.exp(0.5j * np.tan(theta / 2) * x * x)
    psi *= shear
    psi = _momentum_phase(psi, spec, axis, np.exp(0.5j * np.sin(theta) * p * p))
    psi *= shear
    return psi


def _apply_gate_inplace(psi: np.ndarray, spec: GridSpec, gate: Gate) -> np.ndarray:
    xs = spec.positions()
    kind = gate.kind
    if kind is GateKind.MOMENTUM_DISPLACEMENT:
        x = spec.axis_view(xs, gate.modes[0])
        psi *= np.exp(1j * gate.param * x)
    elif kind is GateKind.QUADRATIC_PHASE:
        x = spec.axis_view(xs, gate.modes[0])
        psi *= np.exp(0.5j * gate.param * x * x)
    elif kind is GateKind.CUBIC_PHASE:
        x = spec.axis_view(xs, gate.modes[0])
        psi *= np.exp((1j / 3.0) * gate.param * x ** 3)
    elif kind is GateKind.QUARTIC_PHASE:
        x = spec.axis_view(xs, gate.modes[0])
        psi *= np.exp(1j * gate.param * x ** 4)
    elif kind is GateKind.CONTROLLED_Z:
        j, k = gate.modes
        phase = spec.axis_view(xs, j) * spec.axis_view(xs, k)
        psi *= np.exp(1j * gate.param * phase)
    elif kind is GateKind.CONTROLLED_X:
        j, k = gate.modes
        chirp = np.exp(
            -1j * gate.param * spec.axis_view(xs, j) * spec.axis_view(spec.momenta_fft_order(), k)
        )
        psi = _momentum_phase(psi, spec, k, chirp)
    elif kind is GateKind.FOURIER:
        # The quarter rotation equals the Fourier-transform unitary only up
        # to the constant metaplectic phase; absorbing it here makes F^4 the
        # exact identity and F fix the vacuum, the usual DFT convention.
        psi = _rotate(psi, spec, gate.modes[0], np.pi / 2)
        psi *= np.exp(-0.25j * np.pi)
    elif kind is GateKind.FOURIER_INVERSE:
        psi = _rotate(psi, spec, gate.modes[0], -np.pi / 2)
        psi *= np.exp(0.25j * np.pi)
    elif kind is GateKind.ROTATION:
        psi = _rotate(psi, spec, gate.modes[0], gate.param)
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unknown gate kind {kind}")
    return psi


def apply_gate(state: GridState, gate: Gate) -> GridState:
    """Apply one gate; returns a new state, norm preserved to roundoff."""
    if max(gate.modes) >= state.spec.num_modes:
        raise ValueError(
            f"gate modes {gate.modes} out of range for {state.spec.num_modes} qumodes"
        )
    psi = _apply_gate_inplace(state.psi.copy(), state.spec, gate)
    return GridState(state.spec, psi)


def apply_sequence(state: GridState, seq: GateSequence) -> GridState:
    """Apply a gate sequence (leftmost first); returns a new state."""
    if seq.num_modes != state.spec.num_modes:
        raise ValueError(
            f"sequence over {seq.num_modes} modes applied to a "
            f"{state.spec.num_modes}-mode state"
        )
    psi = state.psi.copy()
    for gate in seq:
        psi = _apply_gate_inplace(psi, state.spec, gate)
    return GridState(state.spec, psi)


def _factor_on_grid(spec: GridSpec, poly: PhasePolynomial) -> np.ndarray:
    """Evaluate a position polynomial on the grid, broadcast-shaped."""
    xs = spec.positions()
    total = np.zeros((1,) * spec.num_modes, dtype=float)
    for expo, coeff in poly.terms.items():
        term = np.full((1,) * spec.num_modes, float(coeff))
        for i, e in enumerate(expo):
            if e:
                term = term * spec.axis_view(xs, i) ** e
        total = total + term
    return total


def exact_controlled_shift(state: GridState, term: KvNTerm, s: float) -> GridState:
    """Reference action of exp(-i s sign factor(X) P_mode).

    Implemented per momentum fiber of the target axis, so coordinate
    ``mode`` is translated by s * sign * factor(x_rest) exactly (up to
    periodic wrap-around). Serves as the synthesis-correctness oracle.
    """
    spec = state.spec
    if term.num_modes != spec.num_modes:
        raise ValueError(
            f"term over {term.num_modes} modes applied to a "
            f"{spec.num_modes}-mode state"
        )
    g = term.sign * _factor_on_grid(spec, term.factor)
    p = spec.axis_view(spec.momenta_fft_order(), term.mode)
    psi = _fft(state.psi.copy(), term.mode)
    psi *= np.exp(-1j * s * g * p)
    psi = _ifft(psi, term.mode)
    return GridState(spec, psi)


# -- measurements and exports ------------------------------------------------


def born_density(state: GridState) -> DensityGrid:
    """|psi|^2 on the grid; integrates to 1 for a normalized state."""
    return DensityGrid(state.spec, np.abs(state.psi) ** 2)


def position_expectation(state: GridState, mode: int) -> float:
    rho = np.abs(state.psi) ** 2
    x = state.spec.axis_view(state.spec.positions(), mode)
    return float(np.sum(rho * x) * state.spec.cell_volume)


def momentum_expectation(state: GridState, mode: int) -> float:
    phi = _fft(state.psi.copy(), mode)
    rho = np.abs(phi) ** 2
    p = state.spec.axis_view(state.spec.momenta_fft_order(), mode)
    return float(np.sum(rho * p) * state.spec.cell_volume)


def position_moments(density: DensityGrid) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and covariance matrix of a grid density."""
    spec = density.spec
    d = spec.num_modes
    xs = spec.positions()
    w = density.values * spec.cell_volume
    total = float(np.sum(w))
    mean = np.empty(d)
    for i in range(d):
        mean[i] = np.sum(w * spec.axis_view(xs, i)) / total
    cov = np.empty((d, d))
    for i in range(d):
        di = spec.axis_view(xs - mean[i], i)
        for j in range(i, d):
            dj = spec.axis_view(xs - mean[j], j)
            cov[i, j] = cov[j, i] = np.sum(w * di * dj) / total
    return mean, cov


def boundary_mass(state: GridState, cells: int = 2) -> float:
    """Probability mass within ``cells`` cells of any grid face."""
    rho = np.abs(state.psi) ** 2 * state.spec.cell_volume
    interior = rho[tuple(slice(cells, -cells) for _ in range(state.spec.num_modes))]
    return float(np.sum(rho) - np.sum(interior))


def measure_positions(state: GridState, num_samples: int, seed: int) -> np.ndarray:
    """Draw position-basis samples by inverse CDF over the flattened grid.

    Deterministic for a fixed seed; returns an array of cell-center
    coordinates with shape (num_samples, num_modes).
    """
    if num_samples < 1:
        raise ValueError(f"num_samples must be positive, got {num_samples}")
    spec = state.spec
    probs = (np.abs(state.psi) ** 2).ravel() * spec.cell_volume
    probs = np.maximum(probs, 0.0)
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    rng = np.random.default_rng(seed)
    u = rng.random(num_samples)
    flat = np.searchsorted(cdf, u, side="right")
    flat = np.minimum(flat, probs.size - 1)
    idx = np.unravel_index(flat, spec.shape)
    xs = spec.positions()
    return np.stack([xs[i] for i in idx], axis=-1)


def density_to_csv(density: DensityGrid) -> str:
    """One row per grid cell: coordinates then the density value."""
    spec = density.spec
    d = spec.num_modes
    header = ",".join(f"x{i + 1}" for i in range(d)) + ",density"
    xs = spec.positions()
    lines = [header]
    for idx in np.ndindex(spec.shape):
        coords = ",".join(repr(float(xs[k])) for k in idx)
        lines.append(f"{coords},{float(density.values[idx])!r}")
    return "\n".join(lines) + "\n"


def moments_to_csv(
    mean: np.ndarray, cov: np.ndarray, metrics: dict[str, float] | None = None
) -> str:
    """Rows: kind,label1,label2,value for means, covariances and metrics."""
    d = len(mean)
    lines = ["kind,label1,label2,value"]
    for i in range(d):
        lines.append(f"mean,x{i + 1},,{float(mean[i])!r}")
    for i in range(d):
        for j in range(d):
            lines.append(f"cov,x{i + 1},x{j + 1},{float(cov[i, j])!r}")
    for key, value in (metrics or {}).items():
        lines.append(f"metric,{key},,{float(value)!r}")
    return "\n".join(lines) + "\n"


def samples_to_csv(samples: np.ndarray) -> str:
    d = samples.shape[1]
    header = ",".join(f"x{i + 1}" for i in range(d))
    lines = [header]
    for row in samples:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
