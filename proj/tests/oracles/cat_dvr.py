"""Two-packet superposition of two uncoupled oscillators, evolved on a sinc-DVR grid.

psi_pm(x) ~ exp(-(x -+ L0)^2 / 2 delta^2 +- i P0 x), the state is
sum_i s_i phi_a(x1) phi_b(x2) over (a, b) in (+,+), (+,-), (-,+), (-,-).
hbar = 1.
"""

import numpy as np

from common import fmt, out_dir, write_json

SIGNS = [(1, 1), (1, -1), (-1, 1), (-1, -1)]


def dvr_hamiltonian(x, mass, omega):
    h = x[1] - x[0]
    n = len(x)
    i = np.arange(n)
    d = i[:, None] - i[None, :]
    with np.errstate(divide="ignore"):
        T = np.where(d == 0, np.pi**2 / 3, 2.0 / d.astype(float) ** 2)
    T = T * (-1.0) ** np.abs(d) / (2 * mass * h * h)
    return T + np.diag(0.5 * mass * omega**2 * x**2)


def evolve(H, psi, t):
    E, V = np.linalg.eigh(H)
    return V @ (np.exp(-1j * E * t) * (V.conj().T @ psi))


def main():
    out = out_dir()
    p = {"mass": 1.0, "omega": 1.0, "L0": 0.75, "P0": 3.0, "delta": 0.5,
         "s": [1.0, 0.0, 0.0, 1.0], "t": 0.5}

    x = np.linspace(-12.0, 12.0, 481)   # step 0.05
    h = x[1] - x[0]
    H = dvr_hamiltonian(x, p["mass"], p["omega"])
    packets = {}
    for sign in (1, -1):
        psi0 = np.exp(-(x - sign * p["L0"]) ** 2 / (2 * p["delta"] ** 2) + 1j * sign * p["P0"] * x)
        packets[sign] = evolve(H, psi0, p["t"])

    psi = sum(s * np.outer(packets[a], packets[b]) for s, (a, b) in zip(p["s"], SIGNS))
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * h * h)

    # Diagonal x1 = x2 = x on [-4, 4].
    sel = np.where(np.abs(x) <= 4.0 + 1e-9)[0]
    diag = np.array([abs(psi[k, k]) ** 2 for k in sel])
    lines = ["x,density"] + [f"{fmt(x[k])},{fmt(v)}" for k, v in zip(sel, diag)]
    (out / "cat_zero_coupling_diagonal.csv").write_text("\n".join(lines) + "\n")

    window = np.abs(x[sel]) <= p["L0"] / 2 + 1e-12
    w = diag[window]
    visibility = (w.max() - w.min()) / (w.max() + w.min())

    def grid_index(v):
        return int(round((v - x[0]) / h))

    points = [(0.5, -0.25, 0.3, 0.75), (-1.0, 0.0, 0.5, -0.5), (0.2, 0.2, -0.2, -0.2)]
    values = []
    for q in points:
        i1, i2, j1, j2 = (grid_index(v) for v in q)
        rho = psi[i1, i2] * np.conj(psi[j1, j2])
        values.append({"point": list(q), "re": rho.real, "im": rho.imag})

    write_json(out / "cat_zero_coupling.json", {
        "params": p,
        "visibility_window": [-p["L0"] / 2, p["L0"] / 2],
        "visibility": visibility,
        "density_points": values,
    })


if __name__ == "__main__":
    main()
