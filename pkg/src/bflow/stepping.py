"""Classical fourth-order Runge-Kutta for autonomous or forced ODE systems."""


def rk4(rhs, y, t, dt):
    """One RK4 step of ``y' = rhs(t, y)``; ``y`` is any array-like supporting + and *."""
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + (0.5 * dt) * k1)
    k3 = rhs(t + 0.5 * dt, y + (0.5 * dt) * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
