"""Independent numpy reference for the values frozen in the solver tests."""
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


def burgers_exact(x, t, nu=0.01):
    e = np.exp(-np.pi**2 * nu * (t - 5.0))
    return 2 * nu * np.pi * e * np.sin(np.pi * x) / (2 + e * np.cos(np.pi * x))


def stepper(N, L, dt, lin):
    k = 2 * np.pi * np.fft.rfftfreq(N, d=L / N)
    ik = 1j * k
    ik[-1] = 0.0
    mask = (3 * np.arange(N // 2 + 1) <= N).astype(float)
    A = 1.0 / lin(k)
    def step(u, f=None):
        uh = np.fft.rfft(u)
        ux = np.fft.irfft(ik * uh, n=N)
        nh = mask * np.fft.rfft(u * ux)
        rhs = uh - dt * nh
        if f is not None:
            rhs = rhs + dt * np.fft.rfft(f)
        return np.fft.irfft(A * rhs, n=N)
    return step


def burgers_error(N=256, dt=1e-3, T=5.0):
    L, nu = 4.0, 0.01
    x = np.arange(N) * L / N
    step = stepper(N, L, dt, lambda k: 1 + dt * nu * k**2)
    u = burgers_exact(x, 0.0)
    for _ in range(int(round(T / dt))):
        u = step(u)
    ue = burgers_exact(x, T)
    return np.linalg.norm(u - ue) / np.linalg.norm(ue)


def ks_cost(N=128, dt=1e-3, T=10.0, sigma=1.0, f=None):
    L = 50.0
    x = np.arange(N) * L / N
    h = L / N
    step = stepper(N, L, dt, lambda k: 1 - dt * k**2 + dt * k**4)
    u = np.cos(2 * np.pi * x / 10) + 1 / np.cosh((x - 25) / 5)
    n = int(round(T / dt))
    J = 0.5 * (dt / 2) * h * np.sum(u**2)
    for i in range(n):
        u = step(u)
        w = dt / 2 if i == n - 1 else dt
        J += 0.5 * w * h * np.sum(u**2)
    return J, u


def laplace_flux_cost(n=40):
    h = 1.0 / n
    x = np.arange(n) * h
    k = 2 * np.pi
    g = np.sin(k * x)
    f = np.sin(k * x) / np.cosh(k) + np.tanh(k) / k * np.cos(k * x)
    q = np.cos(k * x)
    m = n - 1
    idx = lambda i, j: (j - 1) * n + (i % n)
    A = sp.lil_matrix((n * m, n * m))
    b = np.zeros(n * m)
    for j in range(1, n):
        for i in range(n):
            r = idx(i, j)
            A[r, r] = 4 / h**2
            A[r, idx(i - 1, j)] = -1 / h**2
            A[r, idx(i + 1, j)] = -1 / h**2
            if j > 1:
                A[r, idx(i, j - 1)] = -1 / h**2
            else:
                b[r] += g[i] / h**2
            if j < n - 1:
                A[r, idx(i, j + 1)] = -1 / h**2
            else:
                b[r] += f[i] / h**2
    u = spla.spsolve(A.tocsc(), b).reshape(m, n)
    flux = (3 * f - 4 * u[-1] + u[-2]) / (2 * h)
    return h * np.sum((flux - q) ** 2), flux


if __name__ == "__main__":
    print("burgers rel L2 N=256 dt=1e-3:", repr(burgers_error()))
    print("burgers rel L2 N=256 dt=5e-4:", repr(burgers_error(dt=5e-4)))
    J, u = ks_cost()
    print("ks unforced J N=128 dt=1e-3:", repr(J), "u(T)[0]:", repr(u[0]))
    Jl, flux = laplace_flux_cost()
    print("laplace J(f*) n=40:", repr(Jl), "flux[0]:", repr(flux[0]), "flux[10]:", repr(flux[10]))
    k = 2 * np.pi
    for x in (0.0, 0.25, 0.5):
        print("f*(%g):" % x, repr(np.sin(k * x) / np.cosh(k) + np.tanh(k) / k * np.cos(k * x)))
