"""Periodic 1D Galerkin semi-discretizations of conservation-law systems.

Three discretizations of U_t + F(U, U_x)_x = S on the periodic unit interval:

* conservation variables (ConservedSystem), a plain residual system;
* nonconservation variables V with the temporal term
  (dU/dV)(V_{n+af}) V̇_{n+am} (NonconservativeSystem), also a plain residual
  system but one whose fully-discrete totals drift;
* the modified scheme (ModifiedNonconservativeSystem) whose temporal term is
  the difference quotient of shifted conserved states
  Û± = U(V) + (af - 1/2)*dt*(dU/dV)(V)*V̇, restoring the discrete balance
  law.  It advances through `step_modified`, not the generic stepper.

Linear nodal basis, 3-point Gauss quadrature per element everywhere, so the
balance totals are identities of the same discrete integrals the residual
uses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AdmissibilityError, ConfigurationError, NewtonConvergenceError
from .integrator import GenAlphaParams, NewtonSettings, StatePair, _newton

# 3-point Gauss rule on the reference element [0, 1]
_QP = (0.5 - 0.5 * np.sqrt(0.6), 0.5, 0.5 + 0.5 * np.sqrt(0.6))
_QW = (5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0)


@dataclass(frozen=True)
class PeriodicFemSpace:
    """Periodic linear nodal basis on a uniform mesh of (0, 1)."""

    n_elements: int

    def __post_init__(self):
        if self.n_elements < 2:
            raise ValueError("need at least 2 elements for a periodic mesh")

    @property
    def dx(self) -> float:
        return 1.0 / self.n_elements

    def quad_points(self) -> np.ndarray:
        """Global quadrature coordinates, shape (n_elements, 3)."""
        left = np.arange(self.n_elements) * self.dx
        return left[:, None] + self.dx * np.asarray(_QP)[None, :]


class Burgers1D:
    """Viscous Burgers flux u^2/2 - kappa_visc * u_x, optional source s(x, t)."""

    p = 1

    def __init__(self, kappa_visc: float = 0.0, s: Callable | None = None):
        if kappa_visc < 0.0:
            raise ValueError("kappa_visc must be nonnegative")
        self.kappa_visc = kappa_visc
        self.s = s

    def flux(self, u, du_dx, x, t):
        return np.array([0.5 * u[0] ** 2 - self.kappa_visc * du_dx[0]])

    def flux_jacobian(self, u, du_dx, x, t):
        return np.array([[u[0]]]), np.array([[-self.kappa_visc]])

    def source(self, u, du_dx, x, t):
        if self.s is None:
            return np.zeros(1)
        return np.array([self.s(x, t)])

    def source_jacobian(self, u, du_dx, x, t):
        return np.zeros((1, 1)), np.zeros((1, 1))


class Euler1D:
    """Compressible Euler in conserved variables (rho, rho*u, E), ideal gas."""

    p = 3

    def __init__(self, gamma_gas: float = 1.4):
        if gamma_gas <= 1.0:
            raise ValueError("gamma_gas must exceed 1")
        self.gamma_gas = gamma_gas

    def pressure(self, u, x=None):
        rho, mom, energy = u
        if rho <= 0.0:
            raise AdmissibilityError(f"nonpositive density {rho} at x={x}")
        pres = (self.gamma_gas - 1.0) * (energy - 0.5 * mom ** 2 / rho)
        if pres <= 0.0:
            raise AdmissibilityError(f"nonpositive pressure {pres} at x={x}")
        return pres

    def flux(self, u, du_dx, x, t):
        rho, mom, energy = u
        pres = self.pressure(u, x)
        vel = mom / rho
        return np.array([mom, mom * vel + pres, vel * (energy + pres)])

    def flux_jacobian(self, u, du_dx, x, t):
        rho, mom, energy = u
        pres = self.pressure(u, x)
        g = self.gamma_gas
        vel = mom / rho
        enthalpy = (energy + pres) / rho
        a_u = np.array([
            [0.0, 1.0, 0.0],
            [0.5 * (g - 3.0) * vel ** 2, (3.0 - g) * vel, g - 1.0],
            [0.5 * (g - 1.0) * vel ** 3 - vel * enthalpy,
             enthalpy - (g - 1.0) * vel ** 2, g * vel],
        ])
        return a_u, np.zeros((3, 3))

    def source(self, u, du_dx, x, t):
        return np.zeros(3)

    def source_jacobian(self, u, du_dx, x, t):
        return np.zeros((3, 3)), np.zeros((3, 3))


class PressurePrimitiveMap:
    """Map V = (p, u, T) to conserved U = (rho, rho*u, E) for an ideal gas.

    rho = p/(R*T), E = p/(gamma-1) + rho*u^2/2.  Provides the analytic
    Jacobian dU/dV and its derivative (the Hessian of U), which the modified
    scheme's Newton linearization consumes.
    """

    p = 3

    def __init__(self, gamma_gas: float, r_gas: float):
        if gamma_gas <= 1.0 or r_gas <= 0.0:
            raise ValueError("require gamma_gas > 1 and r_gas > 0")
        self.gamma_gas = gamma_gas
        self.r_gas = r_gas

    def _check(self, v):
        pres, _, temp = v
        if pres <= 0.0 or temp <= 0.0:
            raise AdmissibilityError(
                f"nonpositive pressure or temperature in V={tuple(v)}")

    def to_conserved(self, v):
        self._check(v)
        pres, vel, temp = v
        rho = pres / (self.r_gas * temp)
        return np.array([rho, rho * vel,
                         pres / (self.gamma_gas - 1.0) + 0.5 * rho * vel ** 2])

    def jacobian(self, v):
        self._check(v)
        pres, vel, temp = v
        rt = self.r_gas * temp
        rho = pres / rt
        return np.array([
            [1.0 / rt, 0.0, -rho / temp],
            [vel / rt, rho, -rho * vel / temp],
            [1.0 / (self.gamma_gas - 1.0) + 0.5 * vel ** 2 / rt, rho * vel,
             -0.5 * rho * vel ** 2 / temp],
        ])

    def hessian(self, v):
        """Second derivatives H[j, k, l] = d^2 U_j / dV_k dV_l."""
        self._check(v)
        pres, vel, temp = v
        rt = self.r_gas * temp
        h = np.zeros((3, 3, 3))
        # U_0 = p/(R T)
        h[0, 0, 2] = h[0, 2, 0] = -1.0 / (rt * temp)
        h[0, 2, 2] = 2.0 * pres / (rt * temp ** 2)
        # U_1 = p u/(R T)
        h[1, 0, 1] = h[1, 1, 0] = 1.0 / rt
        h[1, 0, 2] = h[1, 2, 0] = -vel / (rt * temp)
        h[1, 1, 2] = h[1, 2, 1] = -pres / (rt * temp)
        h[1, 2, 2] = 2.0 * pres * vel / (rt * temp ** 2)
        # U_2 = p/(g-1) + p u^2/(2 R T)
        h[2, 0, 1] = h[2, 1, 0] = vel / rt
        h[2, 0, 2] = h[2, 2, 0] = -0.5 * vel ** 2 / (rt * temp)
        h[2, 1, 1] = pres / rt
        h[2, 1, 2] = h[2, 2, 1] = -pres * vel / (rt * temp)
        h[2, 2, 2] = pres * vel ** 2 / (rt * temp ** 2)
        return h


def pressure_primitive_map(gamma_gas: float, r_gas: float) -> PressurePrimitiveMap:
    """Pressure-primitive variable map V = (p, u, T) for the ideal gas."""
    return PressurePrimitiveMap(gamma_gas, r_gas)


def _field_values(space: PeriodicFemSpace, coeffs: np.ndarray, p: int):
    """FE values and x-derivatives at quadrature points: (n_el, nq, p) each."""
    c = np.asarray(coeffs, dtype=float).reshape(space.n_elements, p)
    c_left, c_right = c, np.roll(c, -1, axis=0)
    xi = np.asarray(_QP)
    vals = (1.0 - xi)[None, :, None] * c_left[:, None, :] \
        + xi[None, :, None] * c_right[:, None, :]
    derivs = np.broadcast_to(((c_right - c_left) / space.dx)[:, None, :],
                             vals.shape).copy()
    return vals, derivs


def project_periodic(space: PeriodicFemSpace, fn: Callable, p: int) -> np.ndarray:
    """Componentwise L2 projection of fn(x) -> p-vector onto the periodic basis."""
    n, dx = space.n_elements, space.dx
    mass = np.zeros((n, n))
    rhs = np.zeros((n, p))
    x_quad = space.quad_points()
    for e in range(n):
        left, right = e, (e + 1) % n
        for xi, w, xq in zip(_QP, _QW, x_quad[e]):
            phi = (1.0 - xi, xi)
            val = np.asarray(fn(xq), dtype=float).reshape(p)
            for loc_a, node_a in ((0, left), (1, right)):
                rhs[node_a] += dx * w * val * phi[loc_a]
                for loc_b, node_b in ((0, left), (1, right)):
                    mass[node_a, node_b] += dx * w * phi[loc_a] * phi[loc_b]
    return np.linalg.solve(mass, rhs).reshape(n * p)


class _PeriodicGalerkinBase:
    """Shared geometry, quadrature, and audit plumbing for the three systems."""

    def __init__(self, space: PeriodicFemSpace, p: int):
        self.space = space
        self.p = p
        self.m = space.n_elements * p
        self.x_quad = space.quad_points()

    def dimension(self) -> int:
        return self.m

    @property
    def n_balance_components(self) -> int:
        return self.p

    def project(self, fn: Callable) -> np.ndarray:
        return project_periodic(self.space, fn, self.p)

    def _integrate_pointwise(self, point_fn) -> np.ndarray:
        """Quadrature sum of point_fn(e, q, x) -> p-vector over the domain."""
        total = np.zeros(self.p)
        dx = self.space.dx
        for e in range(self.space.n_elements):
            for q, w in enumerate(_QW):
                total += dx * w * point_fn(e, q, self.x_quad[e, q])
        return total

    def balance_outflow(self, u_alpha_f, t_alpha_f: float) -> float:
        return 0.0  # periodic domain has no boundary flux


class ConservedSystem(_PeriodicGalerkinBase):
    """Galerkin residual in conservation variables, R(U̇, U, t).

    R rows are int(U̇ W) - int(F W') - int(S W) plus the optional
    componentwise gradient-penalty stabilization (a fixed-coefficient
    streamline operator; it vanishes against constant test functions).
    """

    admits_balance_law = True

    def __init__(self, space: PeriodicFemSpace, model, stabilization: str = "none",
                 stab_coefficient: float | None = None):
        super().__init__(space, model.p)
        if stabilization not in ("none", "supg-like"):
            raise ValueError(f"unknown stabilization {stabilization!r}")
        self.model = model
        self.stab = 0.0
        if stabilization == "supg-like":
            self.stab = (0.5 * space.dx if stab_coefficient is None
                         else float(stab_coefficient))

    def residual(self, u_dot, u, t):
        n, p, dx = self.space.n_elements, self.p, self.space.dx
        vals, derivs = _field_values(self.space, u, p)
        dot_vals, _ = _field_values(self.space, u_dot, p)
        res = np.zeros((n, p))
        for e in range(n):
            left, right = e, (e + 1) % n
            for q, (xi, w) in enumerate(zip(_QP, _QW)):
                x = self.x_quad[e, q]
                f = self.model.flux(vals[e, q], derivs[e, q], x, t)
                s = self.model.source(vals[e, q], derivs[e, q], x, t)
                grad = dot_vals[e, q] - s
                if self.stab != 0.0:
                    # dphi * dx cancels; sign folded into the ±w term below
                    f = f - self.stab * derivs[e, q]
                res[left] += dx * w * grad * (1.0 - xi) + w * f
                res[right] += dx * w * grad * xi - w * f
        return res.reshape(self.m)

    def iteration_matrix(self, c_dot, c_u, u_dot, u, t):
        n, p, dx = self.space.n_elements, self.p, self.space.dx
        vals, derivs = _field_values(self.space, u, p)
        out = np.zeros((self.m, self.m))
        eye = np.eye(p)
        for e in range(n):
            nodes = (e, (e + 1) % n)
            for q, (xi, w) in enumerate(zip(_QP, _QW)):
                x = self.x_quad[e, q]
                a_u, a_ux = self.model.flux_jacobian(vals[e, q], derivs[e, q], x, t)
                s_u, s_ux = self.model.source_jacobian(vals[e, q], derivs[e, q], x, t)
                phi = (1.0 - xi, xi)
                dphi = (-1.0 / dx, 1.0 / dx)
                for la, node_a in enumerate(nodes):
                    rows = slice(node_a * p, node_a * p + p)
                    for lb, node_b in enumerate(nodes):
                        cols = slice(node_b * p, node_b * p + p)
                        block = c_dot * phi[la] * phi[lb] * eye
                        dflux = a_u * phi[lb] + a_ux * dphi[lb]
                        if self.stab != 0.0:
                            dflux = dflux - self.stab * dphi[lb] * eye
                        block = block + c_u * (
                            -dphi[la] * dflux
                            - phi[la] * (s_u * phi[lb] + s_ux * dphi[lb]))
                        out[rows, cols] += dx * w * block
        return out

    def iteration_matrix_action(self, c_dot, c_u, u_dot, u, t, direction):
        return self.iteration_matrix(c_dot, c_u, u_dot, u, t) @ direction

    def total(self, coeffs) -> np.ndarray:
        vals, _ = _field_values(self.space, coeffs, self.p)
        return self._integrate_pointwise(lambda e, q, x: vals[e, q])

    def shifted_balance_total(self, state: StatePair, dt: float,
                              alpha_f: float) -> np.ndarray:
        return self.total(state.u + (alpha_f - 0.5) * dt * state.u_dot)

    def balance_source(self, u_alpha_f, t_alpha_f: float) -> np.ndarray:
        vals, derivs = _field_values(self.space, u_alpha_f, self.p)
        return self._integrate_pointwise(
            lambda e, q, x: self.model.source(vals[e, q], derivs[e, q], x, t_alpha_f))


def build_conslaw_system(space: PeriodicFemSpace, model, stabilization: str = "none",
                         stab_coefficient: float | None = None) -> ConservedSystem:
    """Conservation-variable Galerkin semi-discretization as a residual system."""
    return ConservedSystem(space, model, stabilization, stab_coefficient)


def stabilization_form(system: ConservedSystem, v, w) -> float:
    """Componentwise gradient-penalty form S(v, w); zero when w is constant."""
    if system.stab == 0.0:
        return 0.0
    _, dv = _field_values(system.space, v, system.p)
    _, dw = _field_values(system.space, w, system.p)
    dx = system.space.dx
    total = 0.0
    for q, weight in enumerate(_QW):
        total += dx * weight * float(np.sum(system.stab * dv[:, q, :] * dw[:, q, :]))
    return total


class _NonconservativeBase(_PeriodicGalerkinBase):
    """Common machinery for the V-variable discretizations of Euler-type models."""

    def __init__(self, space: PeriodicFemSpace, model, varmap):
        if model.p != varmap.p:
            raise ValueError("model and variable map disagree on p")
        super().__init__(space, model.p)
        self.model = model
        self.varmap = varmap

    def _flux_blocks(self, v, dv, x, t):
        """Flux value and its V-derivative at a point, via the chain rule."""
        a0 = self.varmap.jacobian(v)
        u = self.varmap.to_conserved(v)
        du = a0 @ dv
        f = self.model.flux(u, du, x, t)
        a_u, a_ux = self.model.flux_jacobian(u, du, x, t)
        h = self.varmap.hessian(v)
        # d(du)/dV = (H : dv) + A0 * d/dx, split into value/derivative parts
        h_dv = np.einsum("jkl,k->jl", h, dv)
        df_dv_val = a_u @ a0 + a_ux @ h_dv
        df_dv_der = a_ux @ a0
        return f, df_dv_val, df_dv_der

    def total(self, coeffs) -> np.ndarray:
        """Integral of the pointwise conserved field U(V^h)."""
        vals, _ = _field_values(self.space, coeffs, self.p)
        return self._integrate_pointwise(
            lambda e, q, x: self.varmap.to_conserved(vals[e, q]))

    def shifted_balance_total(self, state: StatePair, dt: float,
                              alpha_f: float) -> np.ndarray:
        """Integral of Û = U(V^h) + (alpha_f - 1/2)*dt*(dU/dV)(V^h) V̇^h."""
        shift = (alpha_f - 0.5) * dt
        vals, _ = _field_values(self.space, state.u, self.p)
        dot_vals, _ = _field_values(self.space, state.u_dot, self.p)

        def point(e, q, x):
            v = vals[e, q]
            return self.varmap.to_conserved(v) \
                + shift * (self.varmap.jacobian(v) @ dot_vals[e, q])

        return self._integrate_pointwise(point)

    def balance_source(self, u_alpha_f, t_alpha_f: float) -> np.ndarray:
        vals, derivs = _field_values(self.space, u_alpha_f, self.p)

        def point(e, q, x):
            v = vals[e, q]
            a0 = self.varmap.jacobian(v)
            return self.model.source(self.varmap.to_conserved(v),
                                     a0 @ derivs[e, q], x, t_alpha_f)

        return self._integrate_pointwise(point)


class NonconservativeSystem(_NonconservativeBase):
    """Standard V-variable discretization: temporal term (dU/dV)(V_af) V̇_am.

    A plain residual system for the generic stepper.  Its fully-discrete
    conserved totals drift even for second-order parameters on a uniform
    mesh; the audit records that drift.
    """

    admits_balance_law = False

    def residual(self, v_dot, v, t):
        n, p, dx = self.space.n_elements, self.p, self.space.dx
        vals, derivs = _field_values(self.space, v, p)
        dot_vals, _ = _field_values(self.space, v_dot, p)
        res = np.zeros((n, p))
        for e in range(n):
            left, right = e, (e + 1) % n
            for q, (xi, w) in enumerate(zip(_QP, _QW)):
                x = self.x_quad[e, q]
                vq, dvq = vals[e, q], derivs[e, q]
                a0 = self.varmap.jacobian(vq)
                u = self.varmap.to_conserved(vq)
                f = self.model.flux(u, a0 @ dvq, x, t)
                s = self.model.source(u, a0 @ dvq, x, t)
                grad = a0 @ dot_vals[e, q] - s
                res[left] += dx * w * grad * (1.0 - xi) + w * f
                res[right] += dx * w * grad * xi - w * f
        return res.reshape(self.m)

    def iteration_matrix(self, c_dot, c_u, v_dot, v, t):
        n, p, dx = self.space.n_elements, self.p, self.space.dx
        vals, derivs = _field_values(self.space, v, p)
        dot_vals, _ = _field_values(self.space, v_dot, p)
        out = np.zeros((self.m, self.m))
        for e in range(n):
            nodes = (e, (e + 1) % n)
            for q, (xi, w) in enumerate(zip(_QP, _QW)):
                x = self.x_quad[e, q]
                vq, dvq = vals[e, q], derivs[e, q]
                a0 = self.varmap.jacobian(vq)
                h_vdot = np.einsum("jkl,k->jl", self.varmap.hessian(vq),
                                   dot_vals[e, q])
                _, df_val, df_der = self._flux_blocks(vq, dvq, x, t)
                phi = (1.0 - xi, xi)
                dphi = (-1.0 / dx, 1.0 / dx)
                for la, node_a in enumerate(nodes):
                    rows = slice(node_a * p, node_a * p + p)
                    for lb, node_b in enumerate(nodes):
                        cols = slice(node_b * p, node_b * p + p)
                        block = c_dot * phi[la] * phi[lb] * a0 \
                            + c_u * phi[la] * phi[lb] * h_vdot \
                            - c_u * dphi[la] * (df_val * phi[lb] + df_der * dphi[lb])
                        out[rows, cols] += dx * w * block
        return out

    def iteration_matrix_action(self, c_dot, c_u, v_dot, v, t, direction):
        return self.iteration_matrix(c_dot, c_u, v_dot, v, t) @ direction


class ModifiedNonconservativeSystem(_NonconservativeBase):
    """V-variable discretization with the conservative shifted-state temporal term.

    The temporal term is (Û+_{n+af+1/2} - Û-_{n+af-1/2})/dt tested against
    W, which requires the whole step context; use `step_modified` rather
    than the generic stepper.
    """

    admits_balance_law = True

    def step_residual(self, w_unknown, state_n: StatePair, dt: float,
                      params: GenAlphaParams):
        """Residual of the modified scheme as a function of V̇_{n+1}."""
        af, g = params.alpha_f, params.gamma
        shift = (af - 0.5) * dt
        t_af = state_n.t + af * dt
        n, p, dx = self.space.n_elements, self.p, self.space.dx
        v_np1 = state_n.u + dt * (1.0 - g) * state_n.u_dot + dt * g * w_unknown
        v_af = (1.0 - af) * state_n.u + af * v_np1

        vn_vals, _ = _field_values(self.space, state_n.u, p)
        vdn_vals, _ = _field_values(self.space, state_n.u_dot, p)
        vp_vals, _ = _field_values(self.space, v_np1, p)
        w_vals, _ = _field_values(self.space, w_unknown, p)
        vaf_vals, vaf_derivs = _field_values(self.space, v_af, p)

        res = np.zeros((n, p))
        for e in range(n):
            left, right = e, (e + 1) % n
            for q, (xi, w) in enumerate(zip(_QP, _QW)):
                x = self.x_quad[e, q]
                v_minus, v_plus = vn_vals[e, q], vp_vals[e, q]
                uhat_minus = self.varmap.to_conserved(v_minus) \
                    + shift * (self.varmap.jacobian(v_minus) @ vdn_vals[e, q])
                uhat_plus = self.varmap.to_conserved(v_plus) \
                    + shift * (self.varmap.jacobian(v_plus) @ w_vals[e, q])
                vq, dvq = vaf_vals[e, q], vaf_derivs[e, q]
                a0 = self.varmap.jacobian(vq)
                u = self.varmap.to_conserved(vq)
                f = self.model.flux(u, a0 @ dvq, x, t_af)
                s = self.model.source(u, a0 @ dvq, x, t_af)
                grad = (uhat_plus - uhat_minus) / dt - s
                res[left] += dx * w * grad * (1.0 - xi) + w * f
                res[right] += dx * w * grad * xi - w * f
        return res.reshape(self.m)

    def step_jacobian(self, w_unknown, state_n: StatePair, dt: float,
                      params: GenAlphaParams):
        """Exact derivative of `step_residual` in V̇_{n+1} (chain rule incl. H)."""
        af, g = params.alpha_f, params.gamma
        shift = af - 0.5
        t_af = state_n.t + af * dt
        n, p, dx = self.space.n_elements, self.p, self.space.dx
        v_np1 = state_n.u + dt * (1.0 - g) * state_n.u_dot + dt * g * w_unknown
        v_af = (1.0 - af) * state_n.u + af * v_np1

        vp_vals, _ = _field_values(self.space, v_np1, p)
        w_vals, _ = _field_values(self.space, w_unknown, p)
        vaf_vals, vaf_derivs = _field_values(self.space, v_af, p)

        out = np.zeros((self.m, self.m))
        c_u = af * g * dt  # dV_af/dW
        for e in range(n):
            nodes = (e, (e + 1) % n)
            for q, (xi, w) in enumerate(zip(_QP, _QW)):
                x = self.x_quad[e, q]
                v_plus = vp_vals[e, q]
                a0_plus = self.varmap.jacobian(v_plus)
                h_w = np.einsum("jkl,k->jl", self.varmap.hessian(v_plus),
                                w_vals[e, q])
                temporal = (g + shift) * a0_plus + shift * g * dt * h_w
                _, df_val, df_der = self._flux_blocks(vaf_vals[e, q],
                                                      vaf_derivs[e, q], x, t_af)
                phi = (1.0 - xi, xi)
                dphi = (-1.0 / dx, 1.0 / dx)
                for la, node_a in enumerate(nodes):
                    rows = slice(node_a * p, node_a * p + p)
                    for lb, node_b in enumerate(nodes):
                        cols = slice(node_b * p, node_b * p + p)
                        block = phi[la] * phi[lb] * temporal \
                            - c_u * dphi[la] * (df_val * phi[lb] + df_der * dphi[lb])
                        out[rows, cols] += dx * w * block
        return out


def build_nonconservative_system(space: PeriodicFemSpace, model, varmap,
                                 mode: str = "standard"):
    """V-variable semi-discretization; mode selects the temporal treatment."""
    if mode == "standard":
        return NonconservativeSystem(space, model, varmap)
    if mode == "modified":
        return ModifiedNonconservativeSystem(space, model, varmap)
    raise ConfigurationError(f"unknown nonconservative mode {mode!r}")


def step_modified(system: ModifiedNonconservativeSystem, state_n: StatePair,
                  dt: float, params: GenAlphaParams,
                  newton: NewtonSettings = NewtonSettings()) -> StatePair:
    """One step of the modified scheme; Newton unknown is V̇_{n+1}.

    Refuses parameters that are not second-order accurate: the shifted-state
    temporal term represents the rate only under gamma = 1/2 + am - af.
    """
    if not isinstance(system, ModifiedNonconservativeSystem):
        raise ConfigurationError("step_modified requires a modified-mode system")
    if not params.is_second_order():
        raise ConfigurationError(
            "the modified scheme requires second-order parameters "
            f"(gamma = 1/2 + alpha_m - alpha_f); got {params}")
    if not (dt > 0.0):
        raise ValueError(f"dt must be positive, got {dt}")
    g = params.gamma
    v_n, vd_n = state_n.u, state_n.u_dot

    w0 = ((g - 1.0) / g) * vd_n
    w_star, _ = _newton(
        lambda w: system.step_residual(w, state_n, dt, params),
        lambda w: system.step_jacobian(w, state_n, dt, params),
        w0, newton)
    v_np1 = v_n + dt * ((1.0 - g) * vd_n + g * w_star)
    return StatePair(v_np1, w_star, state_n.t + dt)


def run_modified(system: ModifiedNonconservativeSystem, state0: StatePair,
                 dts, params: GenAlphaParams,
                 newton: NewtonSettings = NewtonSettings()) -> list[StatePair]:
    """Advance the modified scheme over a dt schedule; refuses nonuniform dt."""
    dts = [float(dt) for dt in dts]
    if dts and any(abs(dt - dts[0]) > 1e-14 * abs(dts[0]) for dt in dts):
        raise ConfigurationError(
            "the modified scheme is only conservative on a uniform time mesh; "
            "got a nonuniform dt schedule")
    states = [state0]
    for dt in dts:
        states.append(step_modified(system, states[-1], dt, params, newton))
    return states


def total_conserved(space: PeriodicFemSpace, model, coefficients,
                    varmap=None) -> np.ndarray:
    """Componentwise integral of the conserved field over the domain.

    With `varmap` given, `coefficients` are nonconservation variables and
    U(V^h) is integrated pointwise at the quadrature points; otherwise the
    coefficients are conserved-variable DOFs.
    """
    vals, _ = _field_values(space, coefficients, model.p)
    total = np.zeros(model.p)
    dx = space.dx
    for e in range(space.n_elements):
        for q, w in enumerate(_QW):
            u = vals[e, q] if varmap is None else varmap.to_conserved(vals[e, q])
            total += dx * w * u
    return total
