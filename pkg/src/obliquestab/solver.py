"""Periodic 2-D method-of-lines simulator.

Spatial discretization: componentwise fifth-order finite-difference WENO
convection with Lax-Friedrichs flux splitting (characteristic-wise
reconstruction available as a nonlinear-mode option) and sixth-order central
diffusion.  Time stepping: three-stage strong-stability-preserving
Runge-Kutta in Shu-Osher form, fully explicit, with the step size bounded by
both the convective CFL limit and the diffusion limit.

Everything is single-threaded and deterministic: a run is a pure function of
its configuration.  Unbounded growth in the unstable linear regime ends the
run through the overflow guard with partial results preserved, rather than
as NaN noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _stencils, swe
from .swe import DepthFloorError, SweParams

LOW_CONFIDENCE_FRACTION = 0.01
_EVENT_TOL = 1e-9


class BlowUpError(RuntimeError):
    """NaN or Inf appeared during a Runge-Kutta stage."""

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid; node i sits at x_min + i*dx."""

    nx: int
    ny: int
    x_min: float = -30.0
    x_max: float = 30.0
    y_min: float = -30.0
    y_max: float = 30.0

    def __post_init__(self):
        if self.nx < 7 or self.ny < 7:
            raise ValueError("grid must be at least 7 points per axis (stencil width)")
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError("grid bounds must be ordered")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / self.ny

    def x_nodes(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.nx)

    def y_nodes(self) -> np.ndarray:
        return self.y_min + self.dy * np.arange(self.ny)

    def mesh(self):
        return np.meshgrid(self.x_nodes(), self.y_nodes(), indexing="xy")


@dataclass
class FieldSet:
    """The three conserved fields stacked as u[(h, q, p), y, x] plus a time stamp."""

    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.u = np.ascontiguousarray(self.u, dtype=np.float64)
        if self.u.ndim != 3 or self.u.shape[0] != 3:
            raise ValueError(f"fields must have shape (3, ny, nx), got {self.u.shape}")

    @property
    def h(self) -> np.ndarray:
        return self.u[0]

    @property
    def q(self) -> np.ndarray:
        return self.u[1]

    @property
    def p(self) -> np.ndarray:
        return self.u[2]

    def copy(self) -> "FieldSet":
        return FieldSet(u=self.u.copy(), t=self.t)


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: SweParams
    grid: Grid2D
    t_final: float
    cfl_number: float = 0.4
    snapshot_times: tuple = ()
    diag_interval: float = 0.5
    snapshot_format: str = "csv"
    characteristic_reconstruction: bool = False
    h_floor: float = swe.H_FLOOR
    overflow_guard: float = 1e100

    def __post_init__(self):
        if self.mode not in ("linear", "nonlinear"):
            raise ValueError(f"mode must be linear or nonlinear, got {self.mode!r}")
        if self.t_final <= 0:
            raise ValueError("t_final must be positive")
        if not 0.0 < self.cfl_number < 1.0:
            raise ValueError("cfl_number must lie in (0, 1)")
        if self.snapshot_format not in ("csv", "bin"):
            raise ValueError("snapshot_format must be csv or bin")
        if self.diag_interval <= 0:
            raise ValueError("diag_interval must be positive")
        object.__setattr__(self, "snapshot_times", tuple(float(s) for s in self.snapshot_times))
        for s in self.snapshot_times:
            if s < 0 or s > self.t_final + _EVENT_TOL:
                raise ValueError(f"snapshot time {s} outside [0, t_final]")

    def reference_depth(self) -> float:
        """Uniform steady background the diagnostics measure perturbations against."""
        return 1e-2 if self.mode == "linear" else 1.0


@dataclass
class Diagnostics:
    """Time series of perturbation norms, depth extrema, and the dominant mode."""

    t: list = field(default_factory=list)
    linf: list = field(default_factory=list)
    l2: list = field(default_factory=list)
    hmax: list = field(default_factory=list)
    hmin: list = field(default_factory=list)
    kx_dom: list = field(default_factory=list)
    ky_dom: list = field(default_factory=list)
    mode_energy: list = field(default_factory=list)

    def record(self, fields: FieldSet, config: RunConfig):
        if self.t and fields.t <= self.t[-1]:
            return
        ref = config.reference_depth()
        pert = fields.u.copy()
        pert[0] -= ref
        self.t.append(fields.t)
        self.linf.append(float(np.abs(pert).max()))
        cell = config.grid.dx * config.grid.dy
        self.l2.append(float(np.sqrt((pert**2).sum() * cell)))
        self.hmax.append(float(fields.h.max()))
        self.hmin.append(float(fields.h.min()))
        hp = pert[0]
        if np.any(hp != hp.mean()):
            mode = dominant_mode(hp)
            self.kx_dom.append(mode.kx)
            self.ky_dom.append(mode.ky)
            self.mode_energy.append(mode.energy_fraction)
        else:
            self.kx_dom.append(0)
            self.ky_dom.append(0)
            self.mode_energy.append(0.0)

    def as_arrays(self) -> dict:
        return {name: np.asarray(getattr(self, name)) for name in
                ("t", "linf", "l2", "hmax", "hmin", "kx_dom", "ky_dom", "mode_energy")}


@dataclass
class RunResult:
    snapshots: list
    diagnostics: Diagnostics
    termination: str  # completed | overflow | nan | depth_floor
    dt_summary: dict
    final: FieldSet
    config: RunConfig


@dataclass(frozen=True)
class DominantMode:
    kx: int
    ky: int
    energy_fraction: float
    low_confidence: bool


def weno5_derivative(flux, state, alpha: float, dx: float) -> np.ndarray:
    """d(flux)/dx on a 1-D periodic line, WENO5 with LF splitting bound alpha."""
    f = np.ascontiguousarray(flux, dtype=np.float64)
    u = np.ascontiguousarray(state, dtype=np.float64)
    if f.ndim != 1 or f.shape != u.shape:
        raise ValueError("flux and state must be 1-D arrays of equal length")
    if f.size < 7:
        raise ValueError("line must have at least 7 points")
    if alpha < 0:
        raise ValueError("wavespeed bound alpha must be nonnegative")
    return _stencils.weno5_derivative_kernel(f, u, float(alpha), float(dx))


def diffusion6(line, dx: float) -> np.ndarray:
    """Second derivative of a 1-D periodic line, sixth-order 7-point stencil."""
    u = np.ascontiguousarray(line, dtype=np.float64)
    if u.ndim != 1 or u.size < 7:
        raise ValueError("line must be 1-D with at least 7 points")
    return _stencils.diffusion6_kernel(u, float(dx))


def initial_fields(config: RunConfig) -> FieldSet:
    """Evaluate the configured initial condition on the grid nodes."""
    x, y = config.grid.mesh()
    ic = swe.initial_linear if config.mode == "linear" else swe.initial_nonlinear
    state = ic(x, y)
    return FieldSet(u=np.stack([state.h, state.q, state.p]), t=0.0)


def _rhs_into(u: np.ndarray, config: RunConfig, out: np.ndarray):
    p = config.params
    grid = config.grid
    c_mat, d_mat = swe.viscosity_matrices(p)
    if config.mode == "linear":
        a_mat, b_mat = swe.advection_matrices(p)
        alpha = np.sqrt(p.g * p.h0)
        _stencils.rhs_linear_kernel(
            u, a_mat, b_mat, c_mat, d_mat, alpha, alpha, grid.dx, grid.dy, out
        )
    else:
        status = _stencils.rhs_nonlinear_kernel(
            u, p.g, c_mat, d_mat, config.h_floor,
            grid.dx, grid.dy, config.characteristic_reconstruction, out,
        )
        if status != 0:
            raise DepthFloorError(
                f"depth reached the floor {config.h_floor:g} during an RHS evaluation"
            )


def rhs(fields: FieldSet, config: RunConfig) -> FieldSet:
    """Semi-discrete time derivative of the fields."""
    if not np.isfinite(fields.u).all():
        raise BlowUpError("non-finite fields passed to rhs", time=fields.t)
    out = np.empty_like(fields.u)
    _rhs_into(fields.u, config, out)
    return FieldSet(u=out, t=fields.t)


def step_size(fields: FieldSet, config: RunConfig) -> float:
    """dt = cfl / (|lam_x|/dx + |lam_y|/dy + 2 rho_visc (1/dx^2 + 1/dy^2)).

    lam are the largest characteristic speeds (sqrt(g h0) at lake-at-rest,
    local |velocity| + sqrt(g h) in nonlinear mode); rho_visc is the largest
    operator 2-norm of the viscosity matrices, which unlike their spectral
    radius sees the off-diagonal coupling.
    """
    p = config.params
    grid = config.grid
    if config.mode == "linear":
        lam_x = lam_y = np.sqrt(p.g * p.h0)
    else:
        if fields.h.min() <= config.h_floor:
            raise DepthFloorError("depth at or below floor in step_size")
        lam_x, lam_y = _stencils.max_wave_speeds(fields.u, p.g)
    c_mat, d_mat = swe.viscosity_matrices(p)
    rho = max(np.linalg.norm(c_mat, 2), np.linalg.norm(d_mat, 2))
    denom = lam_x / grid.dx + lam_y / grid.dy + 2.0 * rho * (1.0 / grid.dx**2 + 1.0 / grid.dy**2)
    dt = config.cfl_number / denom
    if not np.isfinite(dt) or dt <= 0:
        raise ValueError(f"non-positive step size {dt}")
    return float(dt)


def _ssprk3(fields: FieldSet, dt: float, config: RunConfig, work=None):
    """One Shu-Osher SSP-RK3 step; returns (new fields, max |u|)."""
    u = fields.u
    if work is None:
        work = [np.empty_like(u) for _ in range(3)]
    rhs_buf, tmp, unew = work
    t = fields.t

    def rhs_guarded(state):
        # fastmath kernels may turn NaN arithmetic into spurious zero
        # divisions; fold that into the blow-up signal
        try:
            _rhs_into(state, config, rhs_buf)
        except ZeroDivisionError:
            raise BlowUpError("non-finite values inside an RHS evaluation", time=t) from None

    rhs_guarded(u)
    finite, _ = _stencils.stage_combine(tmp, u, 0.0, u, dt, rhs_buf)
    if not finite:
        raise BlowUpError("non-finite values after stage 1", time=t)
    rhs_guarded(tmp)
    finite, _ = _stencils.stage_combine(tmp, u, 0.25, tmp, 0.25 * dt, rhs_buf)
    if not finite:
        raise BlowUpError("non-finite values after stage 2", time=t)
    rhs_guarded(tmp)
    finite, biggest = _stencils.stage_combine(
        unew, u, 2.0 / 3.0, tmp, 2.0 / 3.0 * dt, rhs_buf
    )
    if not finite:
        raise BlowUpError("non-finite values after stage 3", time=t)
    return FieldSet(u=unew.copy(), t=t + dt), biggest


def ssprk3_step(fields: FieldSet, dt: float, config: RunConfig) -> FieldSet:
    """Advance one step of the three-stage SSP Runge-Kutta scheme."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not np.isfinite(fields.u).all():
        raise BlowUpError("non-finite input fields", time=fields.t)
    new, _ = _ssprk3(fields, dt, config)
    return new


def _event_times(config: RunConfig) -> list:
    times = {round(config.t_final, 12)}
    k = 1
    while k * config.diag_interval < config.t_final - _EVENT_TOL:
        times.add(round(k * config.diag_interval, 12))
        k += 1
    for s in config.snapshot_times:
        if s > _EVENT_TOL:
            times.add(round(s, 12))
    return sorted(times)


def run(config: RunConfig, initial: FieldSet | None = None) -> RunResult:
    """March the configured initial condition to t_final.

    Snapshot times are hit exactly by clipping dt.  Blow-up (NaN/Inf), the
    1e100 overflow guard, and depth-floor violations end the run early with
    a structured termination record and whatever diagnostics and snapshots
    were already collected; the unstable linear regime is expected to
    terminate through the overflow guard on long horizons.
    """
    fields = initial.copy() if initial is not None else initial_fields(config)
    diagnostics = Diagnostics()
    diagnostics.record(fields, config)
    snapshots = []
    if any(abs(s - fields.t) <= _EVENT_TOL for s in config.snapshot_times):
        snapshots.append(fields.copy())

    work = [np.empty_like(fields.u) for _ in range(3)]
    events = [e for e in _event_times(config) if e > fields.t + _EVENT_TOL]
    snapshot_set = {round(s, 12) for s in config.snapshot_times}
    linear_dt = step_size(fields, config) if config.mode == "linear" else None

    termination = "completed"
    n_steps = 0
    dt_min, dt_max, dt_sum = np.inf, 0.0, 0.0
    for target in events:
        while fields.t < target - _EVENT_TOL:
            try:
                dt = linear_dt if linear_dt is not None else step_size(fields, config)
            except DepthFloorError:
                termination = "depth_floor"
                break
            clipped = min(dt, target - fields.t)
            try:
                fields, biggest = _ssprk3(fields, clipped, config, work)
            except BlowUpError:
                termination = "nan"
                break
            except DepthFloorError:
                termination = "depth_floor"
                break
            n_steps += 1
            dt_min = min(dt_min, clipped)
            dt_max = max(dt_max, clipped)
            dt_sum += clipped
            if biggest > config.overflow_guard:
                termination = "overflow"
                break
        if termination != "completed":
            break
        fields.t = target  # land exactly on the event time
        diagnostics.record(fields, config)
        if round(target, 12) in snapshot_set:
            snapshots.append(fields.copy())

    if termination != "completed":
        diagnostics.record(fields, config)
    dt_summary = {
        "n_steps": n_steps,
        "dt_min": None if n_steps == 0 else float(dt_min),
        "dt_max": None if n_steps == 0 else float(dt_max),
        "dt_mean": None if n_steps == 0 else float(dt_sum / n_steps),
    }
    return RunResult(
        snapshots=snapshots,
        diagnostics=diagnostics,
        termination=termination,
        dt_summary=dt_summary,
        final=fields,
        config=config,
    )


def dominant_mode(field) -> DominantMode:
    """Wavevector (index units) of the largest Fourier coefficient.

    The field is mean-subtracted first; conjugate pairs are folded onto the
    representative with ky > 0 (ky = 0: kx > 0), and the energy fraction is
    the pair's share of the total non-mean spectral energy.  Ties go to the
    smallest |k|, then lexicographic (kx, ky).
    """
    f = np.asarray(field, dtype=np.float64)
    if f.ndim != 2:
        raise ValueError("field must be 2-D")
    f = f - f.mean()
    if not np.any(f):
        raise ValueError("constant field has no dominant mode")
    ny, nx = f.shape
    mag2 = np.abs(np.fft.fft2(f)) ** 2
    mag2[0, 0] = 0.0
    total = mag2.sum()

    pair = np.roll(mag2[::-1, ::-1], (1, 1), axis=(0, 1))  # energy at -k
    energy = mag2 + pair
    kx = np.fft.fftfreq(nx, 1.0 / nx).astype(np.int64)
    ky = np.fft.fftfreq(ny, 1.0 / ny).astype(np.int64)
    kxg, kyg = np.meshgrid(kx, ky)
    self_paired = (np.arange(ny)[:, None] == (ny - np.arange(ny)[:, None]) % ny) & (
        np.arange(nx)[None, :] == (nx - np.arange(nx)[None, :]) % nx
    )
    energy[self_paired] = mag2[self_paired]

    mask = (kyg > 0) | ((kyg == 0) & (kxg > 0))
    if ny % 2 == 0:
        mask |= (kyg == -(ny // 2)) & (kxg >= 0)
    if nx % 2 == 0:
        mask |= (kyg == 0) & (kxg == -(nx // 2))
    energy = np.where(mask, energy, -1.0)

    flat_e = energy.ravel()
    flat_k2 = (kxg**2 + kyg**2).ravel()
    order = np.lexsort((kyg.ravel(), kxg.ravel(), flat_k2, -flat_e))
    best = order[0]
    fraction = float(flat_e[best] / total)
    return DominantMode(
        kx=int(kxg.ravel()[best]),
        ky=int(kyg.ravel()[best]),
        energy_fraction=fraction,
        low_confidence=fraction < LOW_CONFIDENCE_FRACTION,
    )
