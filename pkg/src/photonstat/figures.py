"""Sweep orchestration and figure-data pipelines.

Each public ``run_*`` function maps a scenario config onto a
:class:`~photonstat.config.ResultTable`.  Grid points and disorder
realizations are independent tasks: the realization RNG is keyed by
(seed, index), results are merged by index, so output is identical for any
worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .classical import (
    classical_exact_G,
    classical_forward_g,
    classical_forward_g_unequal,
    classical_intensity,
    classical_intensity_at,
    classical_mc_G,
)
from .config import ResultTable, ScenarioConfig
from .ensemble import (
    Ensemble,
    ensemble_from_config,
    equal_directions,
    off_axis_direction,
    random_cloud,
)
from .errors import ConfigError, ZeroIntensityError
from .gmt import (
    check_conditions,
    crossover_ratio,
    deviation,
    deviation_coh_equal_directions,
    leading_unequal,
)
from .quantum import (
    CorrelationOrder,
    correlate,
    deviation_coh_forward_ratio,
    forward_g_equal_ratio,
    forward_g_unequal_ratio_abs,
    intensity,
    normalize,
    oracle_G,
)
from .states import (
    ClassicalEmitterModel,
    classical_model_from_config,
    classical_model_for_ratio,
    driven_steady_state,
    pulse_area_for_ratio,
    pulse_state,
    state_from_config,
)

ORACLE_VALIDATE_GUARD = 10**6
_FIG_N_DEFAULT = 10_000


def _parallel_map(fn, items, threads: int = 1) -> list:
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _angle_rng(seed: int, realization: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(realization, 1))
    return np.random.Generator(np.random.Philox(ss))


def _resolve_directions(cfg: ScenarioConfig, realization: int) -> tuple[np.ndarray, str]:
    total = cfg.order.total
    if "vectors" in cfg.directions:
        return np.asarray(cfg.directions["vectors"], dtype=float), "explicit"
    preset = cfg.directions.get("preset", "forward")
    if preset == "forward":
        return np.zeros((total, 3)), "forward"
    angle = cfg.directions.get("angle")
    if angle is None:
        angle = _angle_rng(cfg.seed, realization).uniform(0.0, 2.0 * math.pi)
    return equal_directions(off_axis_direction(float(angle)), total), "off-axis"


def _resolve_ensemble(cfg: ScenarioConfig, nat: int, realization: int) -> Ensemble:
    if "positions" in cfg.ensemble:
        return ensemble_from_config(cfg.ensemble)
    distribution = cfg.ensemble.get("distribution", "uniform-cube")
    return random_cloud(nat, cfg.seed, distribution, realization=realization)


def _state_points(cfg: ScenarioConfig) -> list[tuple[str, float | None]]:
    """Sweep points along the state axis as (axis_name, value) pairs."""
    if "theta_grid" in cfg.sweep:
        return [("theta", v) for v in cfg.sweep["theta_grid"]]
    if "s_grid" in cfg.sweep:
        return [("s", v) for v in cfg.sweep["s_grid"]]
    if "r_grid" in cfg.sweep:
        return [("r", v) for v in cfg.sweep["r_grid"]]
    return [("none", None)]


def _quantum_state_at(cfg: ScenarioConfig, axis: str, value):
    if axis == "none":
        return state_from_config(cfg.state)
    if axis == "theta":
        return pulse_state(value)
    if axis == "s":
        return driven_steady_state(value)
    if cfg.state.get("kind") == "driven":
        if value <= 0.0:
            raise ConfigError("sweep.r_grid", "driven states need R > 0")
        return driven_steady_state(1.0 / value)
    return pulse_state(pulse_area_for_ratio(value))


def _n_grid(cfg: ScenarioConfig) -> list[int]:
    if "n_grid" in cfg.sweep:
        return [int(v) for v in cfg.sweep["n_grid"]]
    if "positions" in cfg.ensemble:
        return [len(cfg.ensemble["positions"])]
    return [int(cfg.ensemble["n"])]


CORRELATE_COLUMNS = [
    "n_atoms", "m", "n", "state_kind", "state_param", "ratio", "preset",
    "method", "seed", "realization", "status", "g_re", "g_im", "g_abs",
    "oracle_re", "oracle_im", "rel_discrepancy",
]


def run_correlate(cfg: ScenarioConfig, validate: bool = False, threads: int = 1):
    """g^(m,n) over the grid via the cheapest exact path.

    Returns (table, summary); with ``validate`` the oracle is run alongside
    wherever its tuple guard allows and the summary carries the maximum
    relative discrepancy.
    """
    table = ResultTable(columns=list(CORRELATE_COLUMNS))
    order = cfg.order
    tasks = []
    for nat in _n_grid(cfg):
        for axis, value in _state_points(cfg):
            for real in range(cfg.realizations):
                tasks.append((nat, axis, value, real))

    def evaluate(task):
        nat, axis, value, real = task
        ensemble = _resolve_ensemble(cfg, nat, real)
        dirs, preset = _resolve_directions(cfg, real)
        state = _quantum_state_at(cfg, axis, value)
        if axis == "theta":
            kind = "pulse"
        elif axis == "s":
            kind = "driven"
        else:
            kind = cfg.state.get("kind", "pulse")
        cells = {
            "n_atoms": nat, "m": order.m, "n": order.n,
            "state_kind": kind,
            "state_param": value if axis != "none" else cfg.state.get("theta", cfg.state.get("s")),
            "ratio": state.ratio, "preset": preset, "seed": cfg.seed,
            "realization": real,
        }
        try:
            result = correlate(state, ensemble, order, dirs)
        except ZeroIntensityError:
            cells.update(status="dark-state", method="")
            return cells
        cells.update(
            status="ok", method=result.method,
            g_re=result.value.real, g_im=result.value.imag, g_abs=abs(result.value),
        )
        if validate and ensemble.n**order.total <= ORACLE_VALIDATE_GUARD:
            reference = oracle_G(state, ensemble, order, dirs)
            ints = [intensity(state, ensemble, k) for k in dirs]
            oracle_value = normalize(reference, ints)
            denom = max(abs(oracle_value), abs(result.value), 1e-300)
            cells.update(
                oracle_re=oracle_value.real,
                oracle_im=oracle_value.imag,
                rel_discrepancy=abs(oracle_value - result.value) / denom,
            )
        return cells

    for cells in _parallel_map(evaluate, tasks, threads):
        table.append(**cells)
    discrepancies = [v for v in table.column("rel_discrepancy") if v is not None]
    summary = {"max_rel_discrepancy": max(discrepancies) if discrepancies else None}
    return table, summary


CLASSICAL_COLUMNS = [
    "n_atoms", "m", "n", "e_coh_re", "e_coh_im", "e_incoh", "ratio", "preset",
    "method", "seed", "realization", "g_re", "g_im", "g_abs",
    "mc_re", "mc_im", "mc_se", "samples", "batches",
]


def _classical_model_at(cfg: ScenarioConfig, axis: str, value) -> ClassicalEmitterModel:
    base = (
        classical_model_from_config(cfg.state)
        if cfg.state.get("kind") == "classical"
        else ClassicalEmitterModel(e_coh=0.0, e_incoh=1.0)
    )
    if axis == "none":
        return base
    if axis != "r":
        raise ConfigError(f"sweep.{axis}_grid", "classical sweeps use r_grid")
    return classical_model_for_ratio(value, e_incoh=base.e_incoh or 1.0)


def run_classical(cfg: ScenarioConfig, threads: int = 1):
    """Classical g^(m,n) over the grid, with optional phase-sampling MC."""
    table = ResultTable(columns=list(CLASSICAL_COLUMNS))
    order = cfg.order
    tasks = []
    for nat in _n_grid(cfg):
        for axis, value in _state_points(cfg):
            for real in range(cfg.realizations):
                tasks.append((nat, axis, value, real))

    def evaluate(task):
        nat, axis, value, real = task
        model = _classical_model_at(cfg, axis, value)
        ensemble = _resolve_ensemble(cfg, nat, real)
        dirs, preset = _resolve_directions(cfg, real)
        forward = not np.any(dirs)
        if forward:
            if order.equal_order:
                g = complex(classical_forward_g(model, nat, order.m))
            elif order.m > order.n:
                g = classical_forward_g_unequal(model, nat, order.m, order.n)
            else:
                g = classical_forward_g_unequal(model, nat, order.n, order.m).conjugate()
            method = "classical-forward"
        else:
            raw = classical_exact_G(model, ensemble, order, dirs)
            ints = [classical_intensity_at(model, ensemble, k) for k in dirs]
            g = normalize(raw, ints)
            method = "classical-exact"
        cells = {
            "n_atoms": nat, "m": order.m, "n": order.n,
            "e_coh_re": model.e_coh.real, "e_coh_im": model.e_coh.imag,
            "e_incoh": model.e_incoh, "ratio": model.ratio, "preset": preset,
            "method": method, "seed": cfg.seed, "realization": real,
            "g_re": g.real, "g_im": g.imag, "g_abs": abs(g),
        }
        if cfg.samples:
            mc = classical_mc_G(
                model, ensemble, order, dirs, samples=cfg.samples, seed=cfg.seed
            )
            norm = (
                classical_intensity(model, nat) ** (0.5 * order.total)
                if forward
                else math.prod(
                    math.sqrt(classical_intensity_at(model, ensemble, k)) for k in dirs
                )
            )
            cells.update(
                mc_re=mc.estimate.real / norm, mc_im=mc.estimate.imag / norm,
                mc_se=mc.std_error / norm, samples=mc.samples, batches=mc.batches,
            )
        return cells

    for cells in _parallel_map(evaluate, tasks, threads):
        table.append(**cells)
    return table, {}


DEVIATION_COLUMNS = [
    "n_atoms", "m", "n", "state_kind", "state_param", "ratio", "preset", "seed",
    "realization", "g_exact_re", "g_exact_im", "g_gmt_re", "g_gmt_im",
    "delta_total_re", "delta_total_im", "delta_n_re", "delta_n_im",
    "delta_coh_re", "delta_coh_im", "epsilon",
    "finite_n_ratio", "spin_quadratic_ratio", "spin_linear_ratio",
    "spin_sqrt_ratio", "flagged",
]


def run_deviation(cfg: ScenarioConfig, threads: int = 1):
    """Deviation decomposition over the grid."""
    table = ResultTable(columns=list(DEVIATION_COLUMNS))
    order = cfg.order
    tasks = []
    for nat in _n_grid(cfg):
        for axis, value in _state_points(cfg):
            for real in range(cfg.realizations):
                tasks.append((nat, axis, value, real))

    def evaluate(task):
        nat, axis, value, real = task
        ensemble = _resolve_ensemble(cfg, nat, real)
        dirs, preset = _resolve_directions(cfg, real)
        state = _quantum_state_at(cfg, axis, value)
        report = deviation(state, ensemble, order, dirs)
        margins = {m.name: m.ratio for m in report.conditions.margins}
        return {
            "n_atoms": nat, "m": order.m, "n": order.n,
            "state_kind": cfg.state.get("kind", "pulse"),
            "state_param": value, "ratio": state.ratio, "preset": preset,
            "seed": cfg.seed, "realization": real,
            "g_exact_re": report.g_exact.real, "g_exact_im": report.g_exact.imag,
            "g_gmt_re": report.g_gmt.real, "g_gmt_im": report.g_gmt.imag,
            "delta_total_re": report.delta_total.real,
            "delta_total_im": report.delta_total.imag,
            "delta_n_re": report.delta_n.real, "delta_n_im": report.delta_n.imag,
            "delta_coh_re": report.delta_coh.real, "delta_coh_im": report.delta_coh.imag,
            "epsilon": report.epsilon,
            "finite_n_ratio": margins.get("finite_n"),
            "spin_quadratic_ratio": margins.get("spin_coherence_quadratic"),
            "spin_linear_ratio": margins.get("spin_coherence_linear"),
            "spin_sqrt_ratio": margins.get("spin_coherence_sqrt"),
            "flagged": report.conditions.flagged(),
        }

    for cells in _parallel_map(evaluate, tasks, threads):
        table.append(**cells)
    return table, {}


CONDITIONS_COLUMNS = [
    "n_atoms", "m", "n", "ratio",
    "finite_n_lhs", "finite_n_rhs", "finite_n_ratio",
    "spin_quadratic_lhs", "spin_quadratic_rhs", "spin_quadratic_ratio",
    "spin_linear_lhs", "spin_linear_rhs", "spin_linear_ratio",
    "spin_sqrt_lhs", "spin_sqrt_rhs", "spin_sqrt_ratio",
    "flagged", "note",
]


def run_conditions(cfg: ScenarioConfig, threads: int = 1):
    """Admissibility-condition margins over the sweep."""
    table = ResultTable(columns=list(CONDITIONS_COLUMNS))
    order = cfg.order
    for nat in _n_grid(cfg):
        for axis, value in _state_points(cfg):
            if axis == "r":
                ratio = float(value)
            else:
                ratio = _quantum_state_at(cfg, axis, value).ratio
            report = check_conditions(ratio, nat, order)
            cells = {
                "n_atoms": nat, "m": order.m, "n": order.n, "ratio": ratio,
                "flagged": report.flagged(),
                "note": "g=0 short-circuit: m > N" if order.x > nat else "",
            }
            for margin in report.margins:
                key = margin.name.replace("spin_coherence", "spin")
                cells[f"{key}_lhs"] = margin.lhs
                cells[f"{key}_rhs"] = margin.rhs
                cells[f"{key}_ratio"] = margin.ratio
            table.append(**cells)
    return table, {}


def fig3_deviation_matrix(
    nat: int,
    m_values: tuple[int, ...],
    r_values,
    realizations: int,
    seed: int,
    distribution="uniform-cube",
    state_kind: str = "pulse",
    threads: int = 1,
    directions_per_realization: int = 1,
):
    """Disorder-averaged off-axis spin-coherence deviations.

    Each realization draws a fresh cloud plus random transverse observation
    directions; the deviation is evaluated at every (m, R) on the same cloud
    and averaged over the realization's directions.  More directions per
    cloud reduce the estimator variance without changing the estimand (the
    speckle variate decorrelates between well-separated directions).
    Returns (means, sems) of shape (len(m), len(R)): the complex mean over
    realizations and its standard error.
    """
    r_values = list(r_values)

    def one_realization(real: int) -> np.ndarray:
        cloud = random_cloud(nat, seed, distribution, realization=real)
        angles = _angle_rng(seed, real).uniform(
            0.0, 2.0 * math.pi, size=directions_per_realization
        )
        out = np.zeros((len(m_values), len(r_values)), dtype=complex)
        for angle in angles:
            k = off_axis_direction(angle)
            for i, m in enumerate(m_values):
                order = CorrelationOrder.equal(m)
                for j, r in enumerate(r_values):
                    state = (
                        driven_steady_state(1.0 / r)
                        if state_kind == "driven"
                        else pulse_state(pulse_area_for_ratio(r))
                    )
                    out[i, j] += deviation_coh_equal_directions(state, cloud, order, k)
        return out / directions_per_realization

    stacked = np.stack(_parallel_map(one_realization, range(realizations), threads))
    means = stacked.mean(axis=0)
    if realizations > 1:
        var = stacked.real.var(axis=0, ddof=1) + stacked.imag.var(axis=0, ddof=1)
        sems = np.sqrt(var / realizations)
    else:
        sems = np.zeros_like(means, dtype=float)
    return means, sems


FIGURE_DEFAULTS = {
    "fig1": {
        "n_grid": [int(v) for v in np.geomspace(10, 1e5, 17).round()],
        "r_inv_grid": list(np.geomspace(1e-2, 1e8, 21)),
    },
    "fig2": {
        "n": _FIG_N_DEFAULT,
        "m_values": (2, 3),
        "r_inv_grid": list(np.geomspace(1.0, 1e12, 121)),
    },
    "fig3": {
        "n": _FIG_N_DEFAULT,
        "m_values": (2, 3),
        "r_inv_grid": list(np.geomspace(1e2, 1e8, 25)),
        "realizations": 1000,
    },
    "fig4": {
        "n": _FIG_N_DEFAULT,
        "orders": ((2, 1), (3, 1), (3, 2)),
        "r_inv_grid": list(np.geomspace(1e4, 1e12, 81)),
    },
}


def run_figure(
    figure_id: str,
    overrides: dict | None = None,
    seed: int = 7,
    realizations: int | None = None,
    threads: int = 1,
):
    """Figure-data tables at desk scale; overrides merge over the defaults."""
    if figure_id not in FIGURE_DEFAULTS:
        raise ConfigError("figure", f"unknown figure id {figure_id!r}")
    params = dict(FIGURE_DEFAULTS[figure_id])
    params.update(overrides or {})
    if realizations is not None:
        params["realizations"] = realizations

    if figure_id == "fig1":
        table = ResultTable(
            columns=["n_atoms", "r_inv", "ratio", "g2", "nr_squared", "method"]
        )
        for nat in params["n_grid"]:
            for r_inv in params["r_inv_grid"]:
                r = 1.0 / r_inv
                table.append(
                    n_atoms=nat, r_inv=r_inv, ratio=r,
                    g2=forward_g_equal_ratio(nat, 2, r),
                    nr_squared=(nat * r) ** 2, method="forward-closed-form",
                )
        return table, {"figure": figure_id}

    if figure_id == "fig2":
        nat = int(params["n"])
        table = ResultTable(
            columns=[
                "m", "n_atoms", "r_inv", "ratio", "delta_coh_abs",
                "linear_term", "quadratic_term", "crossover_ratio", "method",
            ]
        )
        for m in params["m_values"]:
            fact = math.factorial(m) * m * (m - 1)
            for r_inv in params["r_inv_grid"]:
                r = 1.0 / r_inv
                table.append(
                    m=m, n_atoms=nat, r_inv=r_inv, ratio=r,
                    delta_coh_abs=abs(deviation_coh_forward_ratio(nat, m, r)),
                    linear_term=fact * r,
                    quadratic_term=0.25 * fact * nat**2 * r**2,
                    crossover_ratio=crossover_ratio(nat),
                    method="forward-closed-form",
                )
        return table, {"figure": figure_id}

    if figure_id == "fig3":
        nat = int(params["n"])
        m_values = tuple(params["m_values"])
        r_values = [1.0 / r_inv for r_inv in params["r_inv_grid"]]
        reals = int(params["realizations"])
        means, sems = fig3_deviation_matrix(
            nat, m_values, r_values, reals, seed,
            distribution=params.get("distribution", "uniform-cube"),
            state_kind=params.get("state_kind", "pulse"),
            threads=threads,
        )
        table = ResultTable(
            columns=[
                "m", "n_atoms", "r_inv", "ratio", "realizations",
                "mean_delta_coh_re", "mean_delta_coh_im", "mean_delta_coh_abs",
                "sem", "seed", "method",
            ]
        )
        for i, m in enumerate(m_values):
            for j, r_inv in enumerate(params["r_inv_grid"]):
                table.append(
                    m=m, n_atoms=nat, r_inv=r_inv, ratio=r_values[j],
                    realizations=reals,
                    mean_delta_coh_re=means[i, j].real,
                    mean_delta_coh_im=means[i, j].imag,
                    mean_delta_coh_abs=abs(means[i, j]),
                    sem=float(sems[i, j]), seed=seed, method="multilinear",
                )
        return table, {"figure": figure_id}

    # fig4
    nat = int(params["n"])
    table = ResultTable(
        columns=[
            "m", "n", "n_atoms", "r_inv", "ratio", "g_abs",
            "leading_pred", "sqrt_r", "r", "method",
        ]
    )
    for m, n in params["orders"]:
        order = CorrelationOrder(m, n)
        for r_inv in params["r_inv_grid"]:
            r = 1.0 / r_inv
            table.append(
                m=m, n=n, n_atoms=nat, r_inv=r_inv, ratio=r,
                g_abs=forward_g_unequal_ratio_abs(nat, m, n, r),
                leading_pred=leading_unequal(nat, r, order),
                sqrt_r=math.sqrt(r), r=r, method="forward-closed-form",
            )
    return table, {"figure": figure_id}
