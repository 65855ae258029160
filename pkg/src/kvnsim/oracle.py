"""Classical reference dynamics: Hamiltonian flow, Liouville densities by
the method of characteristics, Monte Carlo ensembles and density metrics.

Everything here stays on the classical side (ordinary differential
equations and pushforwards of probability densities); it shares no code
with the quantum backend beyond the grid geometry, which is what makes it
a usable correctness oracle for the emulator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import DensityGrid, GridSpec
from .kvn import ClassicalHamiltonian
from .phasepoly import PhasePolynomial

INTEGRATORS = ("leapfrog", "rk4")


class BlowUpError(RuntimeError):
    """The integration produced a non-finite state."""


@dataclass
class FlowMap:
    """Numerical flow of Hamilton's equations for a separable Hamiltonian.

    leapfrog alternates the exact kick (momentum update from grad V) and
    drift (position update from grad T) flows and is symplectic; rk4 is the
    generic fourth-order scheme on dx/dt = J grad H, kept as a cross-check.
    """

    hamiltonian: ClassicalHamiltonian
    integrator: str = "leapfrog"
    dt: float = 1e-3
    _grad_v: list[PhasePolynomial] = field(init=False, repr=False)
    _grad_t: list[PhasePolynomial] = field(init=False, repr=False)

    def __post_init__(self):
        if self.integrator not in INTEGRATORS:
            raise ValueError(
                f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}"
            )
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        h = self.hamiltonian
        self._grad_v = [h.V.partial_derivative(j) for j in range(h.n)]
        self._grad_t = [h.T.partial_derivative(h.n + j) for j in range(h.n)]

    # -- single steps, vectorized over leading axes -------------------------

    def _kick(self, x: np.ndarray, dt: float) -> None:
        for j, grad in enumerate(self._grad_v):
            x[..., self.hamiltonian.n + j] -= dt * grad.evaluate_array(x)

    def _drift(self, x: np.ndarray, dt: float) -> None:
        drifts = [grad.evaluate_array(x) for grad in self._grad_t]
        for j, d in enumerate(drifts):
            x[..., j] += dt * d

    def _leapfrog_step(self, x: np.ndarray, dt: float) -> None:
        self._kick(x, dt / 2.0)
        self._drift(x, dt)
        self._kick(x, dt / 2.0)

    def _vector_field(self, x: np.ndarray) -> np.ndarray:
        n = self.hamiltonian.n
        out = np.empty_like(x)
        total = self.hamiltonian.total()
        for j in range(n):
            out[..., j] = total.partial_derivative(n + j).evaluate_array(x)
            out[..., n + j] = -total.partial_derivative(j).evaluate_array(x)
        return out

    def _rk4_step(self, x: np.ndarray, dt: float) -> None:
        k1 = self._vector_field(x)
        k2 = self._vector_field(x + 0.5 * dt * k1)
        k3 = self._vector_field(x + 0.5 * dt * k2)
        k4 = self._vector_field(x + dt * k3)
        x += (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    # -- public flow ---------------------------------------------------------

    def flow_array(self, points: np.ndarray, t: float) -> np.ndarray:
        """Advance an array of phase-space points (shape (..., 2n)) by t.

        Negative t integrates backward. The final step is shortened so the
        trajectory lands on t exactly.
        """
        dim = 2 * self.hamiltonian.n
        x = np.array(points, copy=True)
        if not np.issubdtype(x.dtype, np.complexfloating):
            x = x.astype(float)
        if x.shape[-1] != dim:
            raise ValueError(f"points must have last axis {dim}")
        if t == 0.0:
            return x
        direction = 1.0 if t > 0 else -1.0
        remaining = abs(t)
        step = self._leapfrog_step if self.integrator == "leapfrog" else self._rk4_step
        while remaining > 0.0:
            dt = min(self.dt, remaining)
            step(x, direction * dt)
            remaining -= dt
        if not np.all(np.isfinite(x)):
            bad = np.argwhere(~np.isfinite(x).all(axis=-1))
            raise BlowUpError(
                f"flow produced non-finite values at sample indices {bad[:10].tolist()}"
            )
        return x

    def flow(self, x0, t: float) -> np.ndarray:
        """Advance a single phase-space point by time t."""
        return self.flow_array(np.asarray(x0, dtype=float), t)

    def energy(self, points: np.ndarray) -> np.ndarray:
        return self.hamiltonian.total().evaluate_array(np.asarray(points, dtype=float))


def energy_drift(map: FlowMap, x0, t: float, n_checks: int = 20) -> float:
    """Largest relative energy error along the trajectory from x0 to t."""
    x0 = np.asarray(x0, dtype=float)
    e0 = float(map.energy(x0))
    scale = max(abs(e0), 1e-30)
    worst = 0.0
    for k in range(1, n_checks + 1):
        xk = map.flow(x0, t * k / n_checks)
        worst = max(worst, abs(float(map.energy(xk)) - e0) / scale)
    return worst


@dataclass
class ClassicalEnsemble:
    """Uniformly weighted phase-space samples, shape (count, 2n)."""

    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2 or self.samples.shape[0] < 1:
            raise ValueError("ensemble needs at least one sample of shape (2n,)")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("ensemble contains non-finite samples")

    @classmethod
    def gaussian(
        cls, mean, cov, count: int, seed: int
    ) -> "ClassicalEnsemble":
        rng = np.random.default_rng(seed)
        return cls(rng.multivariate_normal(np.asarray(mean), np.asarray(cov), size=count))

    def mean(self) -> np.ndarray:
        return self.samples.mean(axis=0)

    def cov(self) -> np.ndarray:
        return np.cov(self.samples.T, bias=True)


def ensemble_evolve(map: FlowMap, ensemble: ClassicalEnsemble, t: float) -> ClassicalEnsemble:
    """Transport every sample along the flow; the count is preserved."""
    return ClassicalEnsemble(map.flow_array(ensemble.samples, t))


def liouville_density(
    map: FlowMap, rho0: Callable[[np.ndarray], np.ndarray], t: float, x
) -> float:
    """Liouville solution by characteristics: rho(x, t) = rho0(flow(x, -t)).

    Valid because the Hamiltonian flow preserves phase-space volume, so the
    density is constant along trajectories.
    """
    origin = map.flow_array(np.asarray(x, dtype=float), -t)
    return float(rho0(origin))


def liouville_density_grid(
    map: FlowMap, rho0: Callable[[np.ndarray], np.ndarray], t: float, spec: GridSpec
) -> DensityGrid:
    """Evaluate the characteristics solution at every grid cell center."""
    dim = 2 * map.hamiltonian.n
    if spec.num_modes != dim:
        raise ValueError(
            f"grid has {spec.num_modes} axes but phase space has dimension {dim}"
        )
    xs = spec.positions()
    mesh = np.meshgrid(*([xs] * dim), indexing="ij")
    points = np.stack(mesh, axis=-1).reshape(-1, dim)
    origins = map.flow_array(points, -t)
    values = np.asarray(rho0(origins), dtype=float).reshape(spec.shape)
    return DensityGrid(spec, values)


def gaussian_density(mean, cov) -> Callable[[np.ndarray], np.ndarray]:
    """Multivariate normal density as a vectorized callable on (..., d)."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    d = len(mean)
    prec = np.linalg.inv(cov)
    norm = 1.0 / np.sqrt((2 * np.pi) ** d * np.linalg.det(cov))

    def density(points: np.ndarray) -> np.ndarray:
        diff = np.asarray(points, dtype=float) - mean
        quad = np.einsum("...i,ij,...j->...", diff, prec, diff)
        return norm * np.exp(-0.5 * quad)

    return density


@dataclass(frozen=True)
class DensityComparison:
    """Total-variation distance plus first/second moment discrepancies."""

    total_variation: float
    first_moment_error: np.ndarray
    second_moment_error_norm: float


def compare_densities(a: DensityGrid, b: DensityGrid) -> DensityComparison:
    """Compare two densities sampled on the same grid."""
    if a.spec != b.spec:
        raise ValueError("densities live on different grids")
    from .grid import position_moments

    tv = 0.5 * float(np.sum(np.abs(a.values - b.values)) * a.spec.cell_volume)
    mean_a, cov_a = position_moments(a)
    mean_b, cov_b = position_moments(b)
    second_a = cov_a + np.outer(mean_a, mean_a)
    second_b = cov_b + np.outer(mean_b, mean_b)
    return DensityComparison(
        total_variation=tv,
        first_moment_error=mean_a - mean_b,
        second_moment_error_norm=float(np.linalg.norm(second_a - second_b)),
    )
