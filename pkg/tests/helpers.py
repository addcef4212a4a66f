import numpy as np

from entangledyn.multimode import ModeSet


def random_modeset(rng: np.random.Generator, M: int | None = None, spread: float = 3.0) -> ModeSet:
    """Random finite-mode system in units of g."""
    if M is None:
        M = int(rng.integers(1, 6))
    deltas = rng.uniform(-spread, spread, M)
    couplings = rng.uniform(0.1, 1.5, M)
    return ModeSet(1.0e3, deltas, couplings)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def coexistence_window(lam: float, n: int = 3, eps_omega0: float = 1e-3):
    """Scan ``L Omega_inf / pi = n + s lam^2/pi^2`` for the stretch where two poles coexist.

    Returns the list of ``(resonance, poles)`` pairs with two poles.
    """
    from entangledyn import cavity
    from entangledyn.errors import SinglePoleError

    kappa = lam * lam / np.pi**2
    hits = []
    for s in np.arange(2.0, 7.0, 0.1):
        r = n + s * kappa
        cp = cavity.CavityParams.from_ratios(lam, eps_omega0, r)
        try:
            hits.append((r, cavity.near_resonance_poles(cp)))
        except SinglePoleError:
            if hits:
                break
    return hits


def local_minima(y: np.ndarray) -> np.ndarray:
    """Indices of strict interior local minima."""
    i = np.arange(1, len(y) - 1)
    return i[(y[i] < y[i - 1]) & (y[i] < y[i + 1])]


def local_maxima(y: np.ndarray) -> np.ndarray:
    """Indices of strict interior local maxima."""
    i = np.arange(1, len(y) - 1)
    return i[(y[i] > y[i - 1]) & (y[i] > y[i + 1])]


def scenario_curves(path):
    """Scenario and its measure table per sweep value (``None`` without a sweep)."""
    from entangledyn.scenario import evaluate_series, load_scenario

    sc = load_scenario(path)
    if sc.sweep_parameter is None:
        return sc, {None: evaluate_series(sc)}
    return sc, {v: evaluate_series(sc.with_value(v)) for v in sc.sweep_values}
