"""Toric Kaehler charts and the R-matrix Poisson flow on them.

Everything runs in a single linearized chart C^d with real coordinates
ordered (x_1, y_1, ..., x_d, y_d).  A chart carries its Kaehler potential,
the closed-form moment map and complex Hessian, and the integer weight
matrix of the torus action; from those the module builds

* the holomorphic frame V_j = sum_k w_{jk} z_k d/dz_k and the real frame
  X_j = -2 Im V_j (rotations), IX_j = -2 Re V_j (radial),
* the Kaehler form as a real 2d x 2d matrix,
* the deformation vector field W and its flow, the time-averaged moment,
  the iterated phase integral R_n, the averaged 2-form F_t, and the
  bivectors sigma_C and Q,

plus verifiers for the identities tying them together (R-additivity,
moment-image containment, the space-filling brane equation and the
Courant symmetry of W).

Sign conventions are pinned by two checkable identities rather than by
fiat: the Hamiltonian anchor  iota_{X_a} omega = -d<mu, a>  and the
Courant identity  L_W(I) = Q omega.  Both are exercised in the test
suite; W below is the unique sign for which they hold.

Unit normalization: omega = i ddbar K with K the standard projective
potential, so the chart moment map fills the catalog polytope exactly
(mu_j = |z_j|^2 / (1 + sum |z|^2) on the projective-space chart).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .polytope import DelzantPolytope, standard
from .rmatrix import RMatrix, contract, decompose, pair

__all__ = [
    "ToricKahlerChart",
    "FlowConfig",
    "Trajectory",
    "ChartEscapeError",
    "standard_chart",
    "frame",
    "omega_matrix",
    "complex_structure_matrix",
    "w_field",
    "w_jacobian",
    "w_jacobian_fd",
    "flow",
    "averaged_moment",
    "r_integral",
    "f_matrix",
    "f_integral",
    "flow_jacobian",
    "poisson_tensors",
    "verify_r_additivity",
    "verify_polytope_image",
    "verify_star_equation",
    "verify_courant_symmetry",
]


# ---------------------------------------------------------------------------
# Charts


@dataclass(frozen=True)
class ToricKahlerChart:
    """Linearized toric chart with analytic Kaehler data.

    ``potential``    K(z) -> float
    ``dpotential``   (dK/dz_j)_j -> complex d-vector
    ``hessian``      (d^2 K / dz_j dzbar_k) -> complex (d, d), Hermitian
    ``moment``       mu(z) -> real d-vector (offset included)
    ``moment_jac``   d mu / d(x_1, y_1, ...) -> real (d, 2d)
    ``weights``      integer (d, d); entry [i, j] is the weight of e_i on z_j
    """

    name: str
    dim: int
    potential: Callable[[np.ndarray], float]
    dpotential: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    moment: Callable[[np.ndarray], np.ndarray]
    moment_jac: Callable[[np.ndarray], np.ndarray]
    weights: np.ndarray
    moment_offset: np.ndarray
    polytope: DelzantPolytope


def _fubini_study_chart(d: int, name: str) -> ToricKahlerChart:
    """Chart of d-dimensional projective space: K = log(1 + sum |z_j|^2)."""

    def potential(z):
        return float(np.log1p(np.sum(np.abs(z) ** 2)))

    def dpotential(z):
        return np.conj(z) / (1.0 + np.sum(np.abs(z) ** 2))

    def hessian(z):
        D = 1.0 + np.sum(np.abs(z) ** 2)
        return np.eye(d, dtype=complex) / D - np.outer(np.conj(z), z) / D**2

    def moment(z):
        D = 1.0 + np.sum(np.abs(z) ** 2)
        return np.abs(z) ** 2 / D

    def moment_jac(z):
        D = 1.0 + np.sum(np.abs(z) ** 2)
        dmu_dz = np.diag(np.conj(z)) / D - np.outer(np.abs(z) ** 2, np.conj(z)) / D**2
        return _complex_to_real_jacobian(dmu_dz)

    if d == 1:
        poly = standard("cp1")
    elif d == 2:
        poly = standard("cp2")
    else:
        poly = standard("simplex", d)
    return ToricKahlerChart(
        name=name,
        dim=d,
        potential=potential,
        dpotential=dpotential,
        hessian=hessian,
        moment=moment,
        moment_jac=moment_jac,
        weights=np.eye(d, dtype=int),
        moment_offset=np.zeros(d),
        polytope=poly,
    )


def _product_line_chart() -> ToricKahlerChart:
    """Chart of P^1 x P^1: K = sum_j log(1 + |z_j|^2)."""
    d = 2

    def potential(z):
        return float(np.sum(np.log1p(np.abs(z) ** 2)))

    def dpotential(z):
        return np.conj(z) / (1.0 + np.abs(z) ** 2)

    def hessian(z):
        return np.diag(1.0 / (1.0 + np.abs(z) ** 2) ** 2).astype(complex)

    def moment(z):
        return np.abs(z) ** 2 / (1.0 + np.abs(z) ** 2)

    def moment_jac(z):
        dmu_dz = np.diag(np.conj(z) / (1.0 + np.abs(z) ** 2) ** 2)
        return _complex_to_real_jacobian(dmu_dz)

    return ToricKahlerChart(
        name="cp1xcp1",
        dim=d,
        potential=potential,
        dpotential=dpotential,
        hessian=hessian,
        moment=moment,
        moment_jac=moment_jac,
        weights=np.eye(d, dtype=int),
        moment_offset=np.zeros(d),
        polytope=standard("cp1xcp1"),
    )


def _complex_to_real_jacobian(dmu_dz: np.ndarray) -> np.ndarray:
    """Real (d, 2d) Jacobian of a real function from its d/dz derivatives.

    For real-valued mu, d mu/dx_k = 2 Re(d mu/dz_k) and
    d mu/dy_k = -2 Im(d mu/dz_k).
    """
    d = dmu_dz.shape[0]
    jac = np.empty((d, 2 * d))
    jac[:, 0::2] = 2.0 * dmu_dz.real
    jac[:, 1::2] = -2.0 * dmu_dz.imag
    return jac


_CHARTS: dict[str, Callable[[], ToricKahlerChart]] = {
    "cp1": lambda: _fubini_study_chart(1, "cp1"),
    "cp2": lambda: _fubini_study_chart(2, "cp2"),
    "cp1xcp1": _product_line_chart,
}


def standard_chart(name: str) -> ToricKahlerChart:
    try:
        factory = _CHARTS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown chart {name!r}; available: {sorted(_CHARTS)}") from None
    return factory()


# ---------------------------------------------------------------------------
# Frames and tensors


def _as_z(z: Sequence[complex]) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.ndim != 1:
        raise ValueError("chart point must be a complex vector")
    return z


def real_to_complex(u: np.ndarray) -> np.ndarray:
    """View a real 2d tangent vector as a complex d-vector (x_k + i y_k slots)."""
    u = np.asarray(u, dtype=complex)
    return u[0::2] + 1j * u[1::2]


def complex_to_real(zc: np.ndarray) -> np.ndarray:
    out = np.empty(2 * zc.shape[0])
    out[0::2] = np.real(zc)
    out[1::2] = np.imag(zc)
    return out


def frame(chart: ToricKahlerChart, z: Sequence[complex]):
    """Holomorphic and real frames of the torus action at z.

    Returns (V, X, IX): V[j] is the complex tangent vector of
    sum_k w_{jk} z_k d/dz_k in the real basis; X[j] = -2 Im V[j] generates
    the compact rotation (period 2 pi), IX[j] = -2 Re V[j] is its I-image.
    All vanish where the corresponding z_k do (torus fixed points).
    """
    z = _as_z(z)
    d = chart.dim
    V = np.zeros((d, 2 * d), dtype=complex)
    for j in range(d):
        coeff = chart.weights[j].astype(complex) * z  # entries w_{jk} z_k
        V[j, 0::2] = 0.5 * coeff
        V[j, 1::2] = -0.5j * coeff
    X = -2.0 * V.imag
    IX = -2.0 * V.real
    return V, X, IX


def omega_matrix(chart: ToricKahlerChart, z: Sequence[complex]) -> np.ndarray:
    """Kaehler form omega = i ddbar K as a real antisymmetric 2d x 2d matrix."""
    z = _as_z(z)
    d = chart.dim
    H = chart.hessian(z)
    cols = np.zeros((d, 2 * d), dtype=complex)
    for k in range(d):
        cols[k, 2 * k] = 1.0
        cols[k, 2 * k + 1] = 1.0j
    M = cols.T @ H @ np.conj(cols)
    omega = 1j * (M - M.T)
    assert np.max(np.abs(omega.imag)) < 1e-12, "Kaehler form failed to be real"
    return omega.real


def complex_structure_matrix(d: int) -> np.ndarray:
    """Standard complex structure: d/dx_j -> d/dy_j, d/dy_j -> -d/dx_j."""
    I = np.zeros((2 * d, 2 * d))
    for j in range(d):
        I[2 * j + 1, 2 * j] = 1.0
        I[2 * j, 2 * j + 1] = -1.0
    return I


def w_field(C: RMatrix, chart: ToricKahlerChart, z: Sequence[complex]) -> np.ndarray:
    """Deformation vector field W at z, as a real 2d tangent vector.

    Computed two ways and cross-checked on every call:

    * as 2 Im of the holomorphic frame applied to the Lie-algebra element
      obtained by contracting the R-matrix with mu(z) on the covector side
      (equivalently -contract(C, mu), since C is antisymmetric), and
    * from the real/imaginary split C = A + iB as
      - sum_ij mu_i (B_ij IX_j + A_ij X_j).

    The sign is the one for which L_W(I) = Q omega holds; the covector-side
    contraction is forced by that identity.
    """
    z = _as_z(z)
    mu = chart.moment(z)
    V, X, IX = frame(chart, z)

    u = -contract(C, mu)
    W_frame = 2.0 * np.imag(u @ V)

    parts = decompose(C)
    W_split = -(mu @ parts.B) @ IX - (mu @ parts.A) @ X

    scale = max(1.0, float(np.max(np.abs(W_split))))
    assert np.max(np.abs(W_frame - W_split)) < 1e-12 * scale, (
        "w_field route disagreement; contraction convention broken"
    )
    return W_split


def w_jacobian(C: RMatrix, chart: ToricKahlerChart, z: Sequence[complex]) -> np.ndarray:
    """Analytic Jacobian dW/d(x, y) used by the variational flow."""
    z = _as_z(z)
    d = chart.dim
    mu = chart.moment(z)
    jac_mu = chart.moment_jac(z)
    _, X, IX = frame(chart, z)
    parts = decompose(C)

    # coefficients: W = sum_j [a_j X_j + b_j IX_j], a = -A^T mu, b = -B^T mu
    a = -(mu @ parts.A)
    b = -(mu @ parts.B)
    da = -(jac_mu.T @ parts.A).T  # (d, 2d): row j is grad a_j
    db = -(jac_mu.T @ parts.B).T

    jac = np.zeros((2 * d, 2 * d))
    jac += X.T @ da + IX.T @ db
    for j in range(d):
        jx, jix = _frame_jacobians(chart, j)
        jac += a[j] * jx + b[j] * jix
    return jac


def _frame_jacobians(chart: ToricKahlerChart, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Constant Jacobians of the linear fields X_j and IX_j."""
    d = chart.dim
    jx = np.zeros((2 * d, 2 * d))
    jix = np.zeros((2 * d, 2 * d))
    for k in range(d):
        wjk = float(chart.weights[j, k])
        # X_j = (-w y_k, w x_k) in slot k; IX_j = (-w x_k, -w y_k).
        jx[2 * k, 2 * k + 1] = -wjk
        jx[2 * k + 1, 2 * k] = wjk
        jix[2 * k, 2 * k] = -wjk
        jix[2 * k + 1, 2 * k + 1] = -wjk
    return jx, jix


def w_jacobian_fd(C: RMatrix, chart: ToricKahlerChart, z: Sequence[complex],
                  h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of W; the independent oracle for w_jacobian."""
    z = _as_z(z)
    d = chart.dim
    x0 = complex_to_real(z)
    jac = np.zeros((2 * d, 2 * d))
    for b in range(2 * d):
        xp, xm = x0.copy(), x0.copy()
        xp[b] += h
        xm[b] -= h
        jac[:, b] = (
            w_field(C, chart, real_to_complex(xp)) - w_field(C, chart, real_to_complex(xm))
        ) / (2 * h)
    return jac


def poisson_tensors(C: RMatrix, chart: ToricKahlerChart, z: Sequence[complex]):
    """(sigma, Q) at z as bivector matrices; asserts Q = -4 Im(sigma).

    sigma = (1/2) sum C_ij V_i wedge V_j (complex), and Q from the split
    C = A + iB as (1/2) sum (B_ij X_i^X_j - 2 A_ij IX_i^X_j - B_ij IX_i^IX_j).
    """
    z = _as_z(z)
    V, X, IX = frame(chart, z)
    parts = decompose(C)

    VC = C.entries @ V  # row i: sum_j C_ij V_j
    sigma = 0.5 * (V.T @ VC - VC.T @ V)

    BX = parts.B @ X
    AX = parts.A @ X
    BIX = parts.B @ IX
    Q = 0.5 * (
        (X.T @ BX - BX.T @ X)
        - 2.0 * (IX.T @ AX - AX.T @ IX)
        - (IX.T @ BIX - BIX.T @ IX)
    )

    residual = np.max(np.abs(Q + 4.0 * sigma.imag))
    assert residual < 1e-12 * max(1.0, np.max(np.abs(Q))), (
        "Q != -4 Im(sigma); frame conventions broken"
    )
    return sigma, Q


# ---------------------------------------------------------------------------
# Flow integration


@dataclass(frozen=True)
class FlowConfig:
    """Integrator knobs: RK4 step, Gauss-Legendre nodes per unit time, escape guard."""

    step: float = 1e-3
    quad_points: int = 12
    escape_radius: float = 1e3

    def __post_init__(self):
        if self.step <= 0 or self.quad_points < 1 or self.escape_radius <= 0:
            raise ValueError("step, quad_points and escape_radius must be positive")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    points: np.ndarray  # (len(times), d) complex
    escaped: bool
    escape_time: float | None
    convergence_estimate: float | None = None

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]


class ChartEscapeError(RuntimeError):
    """Trajectory left the chart before the requested time."""

    def __init__(self, trajectory: Trajectory, requested_time: float):
        self.trajectory = trajectory
        self.requested_time = requested_time
        super().__init__(
            f"flow escaped the chart at t = {trajectory.escape_time:.6g} "
            f"before reaching t = {requested_time:.6g}"
        )


def _rk4_step(f, state: np.ndarray, h: float) -> np.ndarray:
    k1 = f(state)
    k2 = f(state + 0.5 * h * k1)
    k3 = f(state + 0.5 * h * k2)
    k4 = f(state + h * k3)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _march(f, state0: np.ndarray, t_grid: Sequence[float], step: float,
           escape_check=None):
    """March an ODE through the monotone time grid with RK4 substeps of size <= step.

    Yields (t, state) at every grid time.  When ``escape_check(state)``
    trips, a final sentinel (None, t_escape) is yielded and the march stops.
    """
    state = state0
    t = t_grid[0]
    yield t, state
    for t_next in t_grid[1:]:
        span = t_next - t
        nsub = max(1, math.ceil(abs(span) / step - 1e-12))
        h = span / nsub
        for i in range(nsub):
            state = _rk4_step(f, state, h)
            if escape_check is not None and escape_check(state):
                yield None, t + (i + 1) * h
                return
        t = t_next
        yield t, state


def flow(C: RMatrix, chart: ToricKahlerChart, z0: Sequence[complex], t: float,
         cfg: FlowConfig = FlowConfig(), with_convergence_estimate: bool = False) -> Trajectory:
    """Integrate dz/dt = W(z) from z0 to time t with fixed-step RK4.

    Escape past cfg.escape_radius is flagged on the trajectory, never
    extrapolated.  With ``with_convergence_estimate`` the endpoint is
    recomputed at half the step and the deviation recorded.
    """
    z0 = _as_z(z0)
    if not math.isfinite(t):
        raise ValueError("flow time must be finite")

    def rhs(x):
        return w_field(C, chart, real_to_complex(x))

    def escaped(x):
        return np.max(np.abs(real_to_complex(x))) > cfg.escape_radius

    if t == 0:
        t_grid = [0.0]
    else:
        nsteps = max(1, math.ceil(abs(t) / cfg.step - 1e-12))
        t_grid = [0.0] + [t * (k + 1) / nsteps for k in range(nsteps)]

    times, points = [], []
    hit_escape = False
    escape_time = None
    for tk, state in _march(rhs, complex_to_real(z0), t_grid, cfg.step, escaped):
        if tk is None:
            hit_escape = True
            escape_time = state  # the sentinel's second slot is the escape time
            break
        times.append(tk)
        points.append(real_to_complex(state))

    est = None
    if with_convergence_estimate and not hit_escape and t != 0:
        half = replace(cfg, step=cfg.step / 2)
        end_half = flow(C, chart, z0, t, half).endpoint
        est = float(np.max(np.abs(points[-1] - end_half)))

    return Trajectory(
        times=np.asarray(times),
        points=np.asarray(points),
        escaped=hit_escape,
        escape_time=float(escape_time) if hit_escape else None,
        convergence_estimate=est,
    )


def _gauss_legendre_panels(n: float, per_unit: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite GL nodes/weights on [0, n] with unit panels (last one partial)."""
    nodes01, weights01 = np.polynomial.legendre.leggauss(per_unit)
    all_nodes, all_weights = [], []
    a = 0.0
    while a < n - 1e-15:
        b = min(a + 1.0, n)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        all_nodes.append(mid + half * nodes01)
        all_weights.append(half * weights01)
        a = b
    if not all_nodes:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(all_nodes), np.concatenate(all_weights)


def _values_along_flow(C: RMatrix, chart: ToricKahlerChart, z0: np.ndarray,
                       times: np.ndarray, cfg: FlowConfig, value):
    """Evaluate ``value(z)`` at the flow points for the given increasing times."""

    def rhs(x):
        return w_field(C, chart, real_to_complex(x))

    def escaped(x):
        return np.max(np.abs(real_to_complex(x))) > cfg.escape_radius

    grid = np.concatenate(([0.0], times))
    out = []
    marcher = _march(rhs, complex_to_real(z0), grid, cfg.step, escaped)
    for tk, state in marcher:
        if tk is None:
            traj = Trajectory(np.asarray([0.0]), np.asarray([z0]), True, float(state))
            raise ChartEscapeError(traj, float(times[-1]) if len(times) else 0.0)
        out.append(value(real_to_complex(state)))
    return out[1:]  # drop the t = 0 entry


def averaged_moment(C: RMatrix, chart: ToricKahlerChart, z0: Sequence[complex],
                    n: float, cfg: FlowConfig = FlowConfig()) -> np.ndarray:
    """Time-averaged moment integral int_0^n mu(phi_t(z0)) dt (real d-vector).

    Composite Gauss-Legendre along the flow; ``averaged_moment_error``
    exposes the node-doubling estimate.
    """
    value, _ = _averaged_moment_impl(C, chart, z0, n, cfg, with_error=False)
    return value


def averaged_moment_error(C: RMatrix, chart: ToricKahlerChart, z0: Sequence[complex],
                          n: float, cfg: FlowConfig = FlowConfig()) -> tuple[np.ndarray, float]:
    return _averaged_moment_impl(C, chart, z0, n, cfg, with_error=True)


def _averaged_moment_impl(C, chart, z0, n, cfg, with_error):
    z0 = _as_z(z0)
    if n < 0:
        raise ValueError("averaging time must be nonnegative")
    if n == 0:
        zero = np.zeros(chart.dim)
        return (zero, 0.0) if with_error else (zero, None)
    nodes, weights = _gauss_legendre_panels(n, cfg.quad_points)
    mus = _values_along_flow(C, chart, z0, nodes, cfg, chart.moment)
    value = np.sum(weights[:, None] * np.asarray(mus), axis=0)
    if not with_error:
        return value, None
    nodes2, weights2 = _gauss_legendre_panels(n, 2 * cfg.quad_points)
    mus2 = _values_along_flow(C, chart, z0, nodes2, cfg, chart.moment)
    value2 = np.sum(weights2[:, None] * np.asarray(mus2), axis=0)
    return value, float(np.max(np.abs(value - value2)))


def r_integral(C: RMatrix, chart: ToricKahlerChart, z0: Sequence[complex],
               n: float, cfg: FlowConfig = FlowConfig()) -> complex:
    """Iterated phase integral i pi int_0^n int_0^t C(mu_t, mu_s) ds dt.

    The inner integral is carried as an extra ODE component G(t) =
    int_0^t mu ds alongside the flow, so the integrand of the outer
    Gauss-Legendre sum is i pi C(mu(t), G(t)).  Vanishes identically for
    real C (antisymmetry) and for n = 0.
    """
    z0 = _as_z(z0)
    if n < 0:
        raise ValueError("integration time must be nonnegative")
    if n == 0:
        return 0j
    d = chart.dim

    def rhs(state):
        z = real_to_complex(state[: 2 * d])
        return np.concatenate((w_field(C, chart, z), chart.moment(z)))

    def escaped(state):
        return np.max(np.abs(real_to_complex(state[: 2 * d]))) > cfg.escape_radius

    nodes, weights = _gauss_legendre_panels(n, cfg.quad_points)
    grid = np.concatenate(([0.0], nodes))
    state0 = np.concatenate((complex_to_real(z0), np.zeros(d)))
    total = 0j
    idx = -1
    for tk, state in _march(rhs, state0, grid, cfg.step, escaped):
        if tk is None:
            traj = Trajectory(np.asarray([0.0]), np.asarray([z0]), True, float(state))
            raise ChartEscapeError(traj, n)
        if idx >= 0:
            z = real_to_complex(state[: 2 * d])
            G = state[2 * d :]
            total += weights[idx] * pair(C, chart.moment(z), G)
        idx += 1
    return 1j * math.pi * total


def f_matrix(C: RMatrix, chart: ToricKahlerChart, z0: Sequence[complex], t: float,
             cfg: FlowConfig = FlowConfig(), jacobian_bound: float = 1e6) -> np.ndarray:
    """Averaged 2-form F_t = int_0^t phi_s^* omega ds at z0, as a 2d x 2d matrix.

    The differential of the flow is integrated alongside it (variational
    equation dY/ds = DW(phi_s) Y), and the pullback at each quadrature node
    is Y^T omega(phi_s) Y.
    """
    z0 = _as_z(z0)
    if t < 0:
        raise ValueError("averaging time must be nonnegative")
    d = chart.dim
    n2 = 2 * d
    if t == 0:
        return np.zeros((n2, n2))

    def rhs(state):
        z = real_to_complex(state[:n2])
        Y = state[n2:].reshape(n2, n2)
        return np.concatenate((
            w_field(C, chart, z),
            (w_jacobian(C, chart, z) @ Y).ravel(),
        ))

    def escaped(state):
        return np.max(np.abs(real_to_complex(state[:n2]))) > cfg.escape_radius

    nodes, weights = _gauss_legendre_panels(t, cfg.quad_points)
    grid = np.concatenate(([0.0], nodes))
    state0 = np.concatenate((complex_to_real(z0), np.eye(n2).ravel()))
    F = np.zeros((n2, n2))
    idx = -1
    warned = False
    for tk, state in _march(rhs, state0, grid, cfg.step, escaped):
        if tk is None:
            traj = Trajectory(np.asarray([0.0]), np.asarray([z0]), True, float(state))
            raise ChartEscapeError(traj, t)
        if idx >= 0:
            z = real_to_complex(state[:n2])
            Y = state[n2:].reshape(n2, n2)
            if not warned and np.linalg.norm(Y, 2) > jacobian_bound:
                warnings.warn(
                    f"flow Jacobian norm exceeds {jacobian_bound:.1e}; "
                    "averaged-form quadrature may be ill-conditioned",
                    RuntimeWarning,
                    stacklevel=2,
                )
                warned = True
            F += weights[idx] * (Y.T @ omega_matrix(chart, z) @ Y)
        idx += 1
    return F


def f_integral(C: RMatrix, chart: ToricKahlerChart, z0: Sequence[complex], t: float,
               u: Sequence[float], v: Sequence[float],
               cfg: FlowConfig = FlowConfig()) -> float:
    """int_0^t (phi_s^* omega)(u, v) ds at z0 for real tangent vectors u, v."""
    F = f_matrix(C, chart, z0, t, cfg)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(u @ F @ v)


def flow_jacobian(C: RMatrix, chart: ToricKahlerChart, z0: Sequence[complex], t: float,
                  cfg: FlowConfig = FlowConfig()) -> tuple[np.ndarray, np.ndarray]:
    """Endpoint and differential of the time-t flow: (phi_t(z0), d phi_t at z0).

    Used to transport tensors along the flow, e.g. for checking that the
    flow is Poisson for Q (pushforward Y Q Y^T matches Q at the endpoint).
    """
    z0 = _as_z(z0)
    d = chart.dim
    n2 = 2 * d

    def rhs(state):
        z = real_to_complex(state[:n2])
        Y = state[n2:].reshape(n2, n2)
        return np.concatenate((
            w_field(C, chart, z),
            (w_jacobian(C, chart, z) @ Y).ravel(),
        ))

    def escaped(state):
        return np.max(np.abs(real_to_complex(state[:n2]))) > cfg.escape_radius

    state0 = np.concatenate((complex_to_real(z0), np.eye(n2).ravel()))
    final = state0
    for tk, state in _march(rhs, state0, [0.0, t] if t != 0 else [0.0], cfg.step, escaped):
        if tk is None:
            traj = Trajectory(np.asarray([0.0]), np.asarray([z0]), True, float(state))
            raise ChartEscapeError(traj, t)
        final = state
    return real_to_complex(final[:n2]), final[n2:].reshape(n2, n2)


# ---------------------------------------------------------------------------
# Identity verifiers


def verify_r_additivity(C: RMatrix, chart: ToricKahlerChart, z0: Sequence[complex],
                        ti: float, tj: float, cfg: FlowConfig = FlowConfig()) -> float:
    """Residual of the additivity of the iterated phase integral under flow shift.

    The integral over time i+j splits into the two sub-integrals plus a
    cross pairing of time-averaged moments:

        R_{i+j}(x) = R_i(phi_j(x)) + R_j(x)
                     + i pi C( int_0^i mu(phi_{t+j} x) dt, int_0^j mu(phi_s x) ds ).

    Exact in exact arithmetic; the residual measures integrator error and
    shrinks as O(step^4) plus quadrature error.
    """
    z0 = _as_z(z0)
    r_total = r_integral(C, chart, z0, ti + tj, cfg)
    zj = flow(C, chart, z0, tj, cfg).endpoint
    r_i_shift = r_integral(C, chart, zj, ti, cfg)
    r_j = r_integral(C, chart, z0, tj, cfg)
    m_i = averaged_moment(C, chart, zj, ti, cfg)
    m_j = averaged_moment(C, chart, z0, tj, cfg)
    bracket = 1j * math.pi * pair(C, m_i, m_j)
    return abs(r_total - r_i_shift - r_j - bracket)


def verify_polytope_image(C: RMatrix, chart: ToricKahlerChart, z0: Sequence[complex],
                          n: float, cfg: FlowConfig = FlowConfig(),
                          P: DelzantPolytope | None = None) -> float:
    """Worst facet slack of the averaged moment against the n-th dilate.

    Nonnegative (up to quadrature error) because every mu(phi_t(z0)) lies
    in the polytope and the average over time n is a point of n * Delta.
    """
    P = P or chart.polytope
    value = averaged_moment(C, chart, z0, n, cfg)
    return float(min(P.facet_values(value, n)))


def verify_star_equation(C: RMatrix, chart: ToricKahlerChart, z0: Sequence[complex],
                         t: float, cfg: FlowConfig = FlowConfig()) -> float:
    """Operator-norm residual of F I + I* F + F Q F = 0 for F = F_t at z0.

    The index convention (forms as T -> T* matrices, I* as transpose) is
    pinned by the t -> 0 reduction F ~ t omega, whose first-order term is
    the Kaehler (1,1) condition omega I + I^T omega = 0; that reduction is
    asserted on every call before the full residual is formed.
    """
    z0 = _as_z(z0)
    I = complex_structure_matrix(chart.dim)
    omega = omega_matrix(chart, z0)
    kahler_residual = np.linalg.norm(omega @ I + I.T @ omega, 2)
    assert kahler_residual < 1e-8, "Kaehler (1,1) anchor failed; omega/I conventions broken"
    F = f_matrix(C, chart, z0, t, cfg)
    _, Q = poisson_tensors(C, chart, z0)
    return float(np.linalg.norm(F @ I + I.T @ F + F @ Q @ F, 2))


def verify_courant_symmetry(C: RMatrix, chart: ToricKahlerChart,
                            z0: Sequence[complex], h: float = 1e-5) -> float:
    """Residual of L_W(I) = Q omega at z0, with the Lie derivative from finite differences.

    The chart complex structure is constant, so L_W(I) = I DW - DW I with
    DW the W-Jacobian; DW is central-differenced here to stay independent
    of the analytic Jacobian used by the flow integrators.
    """
    z0 = _as_z(z0)
    I = complex_structure_matrix(chart.dim)
    DW = w_jacobian_fd(C, chart, z0, h)
    lie = I @ DW - DW @ I
    _, Q = poisson_tensors(C, chart, z0)
    rhs = Q @ omega_matrix(chart, z0)
    return float(np.linalg.norm(lie - rhs, 2))
