"""Experiment runners: parameter sweeps with analytic overlays and fits.

Each runner takes an ``ExperimentConfig`` and returns ``(fieldnames, rows)``
ready for CSV output.  Every point row carries both the numeric measure and
the analytic prediction (linear and logarithmic parts separately); fit rows
summarize the single constant offset between them, which is the only fitted
parameter anywhere.  Sweep points are independent pure computations executed
by a bounded worker pool and gathered in input order, so output is
deterministic for a fixed config.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import asymptotics as asy
from .config import ExperimentConfig
from .correlation import (
    CorrelationBuilder,
    CorrelationMatrix,
    FarLimitBuilder,
    SubsystemGeometry,
    correlation_matrix_far,
    correlation_matrix_finite,
    ENTRY_SPEC,
)
from .entanglement import entropy_from_spectrum, fermionic_negativity, occupation_spectrum
from .numerics import QuadratureSpec
from .scattering import BiasState, ScatteringModel

__all__ = [
    "LengthMismatch",
    "FitResult",
    "fit_constant",
    "friedel_window",
    "run_sweep_length",
    "run_sweep_position",
    "run_sweep_bias",
    "run_sweep_distance",
    "run_eval_asymptotics",
    "run_scenario",
]


class LengthMismatch(ValueError):
    """Series of unequal or insufficient length passed to fit_constant."""


@dataclass(frozen=True)
class FitResult:
    """Constant-offset fit of a numeric series against its prediction."""

    offset: float
    residual_max: float
    residual_rms: float
    slope_fitted: float | None = None
    slope_predicted: float | None = None
    slope_rel_err: float | None = None


def fit_constant(numeric, analytic, driver=None, predicted_slope=None) -> FitResult:
    """Mean offset between the series, plus residuals of the adjusted fit.

    With ``driver`` given (the linear driver of the prediction, for example
    the mirror overlap per point), the numeric series is also regressed
    against it and the fitted slope compared with ``predicted_slope``.
    """
    num = np.asarray(numeric, dtype=float)
    ana = np.asarray(analytic, dtype=float)
    if num.shape != ana.shape or num.ndim != 1 or num.size < 3:
        raise LengthMismatch("fit_constant needs two equal-length series of at least 3 points")
    offset = float(np.mean(num - ana))
    resid = num - ana - offset
    result = FitResult(
        offset=offset,
        residual_max=float(np.abs(resid).max()),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
    )
    if driver is not None:
        drv = np.asarray(driver, dtype=float)
        if drv.shape != num.shape:
            raise LengthMismatch("driver series must match the numeric series")
        slope, _ = np.polyfit(drv, num, 1)
        rel = None
        if predicted_slope is not None and predicted_slope != 0:
            rel = abs(slope - predicted_slope) / abs(predicted_slope)
        result = FitResult(
            offset=result.offset,
            residual_max=result.residual_max,
            residual_rms=result.residual_rms,
            slope_fitted=float(slope),
            slope_predicted=predicted_slope,
            slope_rel_err=rel,
        )
    return result


def _map_ordered(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _entry_spec(config: ExperimentConfig) -> QuadratureSpec:
    return QuadratureSpec(
        abs_tol=config.abs_tol if config.abs_tol is not None else ENTRY_SPEC.abs_tol,
        rel_tol=config.rel_tol if config.rel_tol is not None else ENTRY_SPEC.rel_tol,
        max_panels=config.max_panels if config.max_panels is not None else ENTRY_SPEC.max_panels,
        nodes_per_panel=(
            config.nodes_per_panel if config.nodes_per_panel is not None else ENTRY_SPEC.nodes_per_panel
        ),
    )


def _order_label(order) -> str:
    return "vn" if order in ("vn", 1) else format(float(order), "g")


def _measure_point_rows(
    model: ScatteringModel,
    bias: BiasState,
    geom: SubsystemGeometry,
    cmat: CorrelationMatrix,
    config: ExperimentConfig,
    base: dict,
) -> list[dict]:
    """Numeric + analytic values of every requested measure on one matrix."""
    nu_a, _ = occupation_spectrum(cmat)
    nu_l, _ = occupation_spectrum(cmat.block_left())
    nu_r, _ = occupation_spectrum(cmat.block_right())
    rows: list[dict] = []

    def point(measure, order_label, numeric, pred: asy.AsymptoticPrediction | None):
        row = dict(base)
        row.update(
            row_type="point",
            measure=measure,
            order=order_label,
            numeric=numeric,
            analytic_linear=pred.linear_term if pred else None,
            analytic_log=pred.log_term if pred else None,
            analytic=pred.total_minus_constant if pred else None,
        )
        rows.append(row)

    for measure in config.measures:
        if measure == "mi":
            for order in config.renyi_orders:
                s_al = entropy_from_spectrum(nu_l, order)
                s_ar = entropy_from_spectrum(nu_r, order)
                s_a = entropy_from_spectrum(nu_a, order)
                point("mi", _order_label(order), s_al + s_ar - s_a, asy.mi_prediction(model, bias, geom, order))
        elif measure == "ci":
            s_ar = entropy_from_spectrum(nu_r, "vn")
            s_a = entropy_from_spectrum(nu_a, "vn")
            point("ci", "vn", s_ar - s_a, asy.ci_prediction(model, bias, geom))
        elif measure == "negativity":
            value = fermionic_negativity(cmat, 1)
            point("negativity", "1", value, asy.negativity_prediction(model, bias, geom))
        elif measure == "entropy":
            for order in config.renyi_orders:
                label = _order_label(order)
                point(
                    "entropy_al",
                    label,
                    entropy_from_spectrum(nu_l, order),
                    asy.contiguous_entropy_prediction(model, bias, geom.ell_l, "L", order),
                )
                point(
                    "entropy_ar",
                    label,
                    entropy_from_spectrum(nu_r, order),
                    asy.contiguous_entropy_prediction(model, bias, geom.ell_r, "R", order),
                )
                if geom.is_symmetric:
                    coeff = asy.disjoint_symmetric_log_coefficient(order)
                    pred = asy.AsymptoticPrediction(0.0, coeff * np.log(geom.ell_l))
                else:
                    pred = None
                point("entropy_a", label, entropy_from_spectrum(nu_a, order), pred)
    return rows


_SWEEP_FIELDS = [
    "row_type", "ell", "ell_mirror", "delta", "dk", "regime", "measure", "order",
    "numeric", "analytic_linear", "analytic_log", "analytic",
    "offset", "residual_max", "residual_rms",
    "offset_first_half", "offset_second_half",
    "slope_fitted", "slope_predicted", "slope_rel_err",
]


def _fit_rows(points: list[dict], group_keys: tuple[str, ...], driver_key: str | None) -> list[dict]:
    """One constant-offset fit row per (measure, order, *group_keys) series."""
    groups: dict[tuple, list[dict]] = {}
    for row in points:
        key = (row["measure"], row["order"]) + tuple(row.get(k) for k in group_keys)
        groups.setdefault(key, []).append(row)
    fits = []
    for key, rows in groups.items():
        if len(rows) < 3 or any(r["analytic"] is None for r in rows):
            continue
        numeric = [r["numeric"] for r in rows]
        analytic = [r["analytic"] for r in rows]
        driver = [r[driver_key] for r in rows] if driver_key else None
        predicted = None
        slope_source = numeric
        if driver is not None:
            drv = np.asarray(driver, float)
            lin = np.asarray([r["analytic_linear"] for r in rows], float)
            if np.ptp(drv) > 0:
                predicted = float(np.polyfit(drv, lin, 1)[0])
            # the volume-law slope is read off after removing the exactly
            # known logarithmic part, which would otherwise bias it
            slope_source = np.asarray(numeric) - np.asarray([r["analytic_log"] for r in rows], float)
        fit = fit_constant(numeric, analytic, driver, predicted)
        if driver is not None:
            slope_fit = fit_constant(slope_source, analytic, driver, predicted)
            fit = FitResult(
                offset=fit.offset,
                residual_max=fit.residual_max,
                residual_rms=fit.residual_rms,
                slope_fitted=slope_fit.slope_fitted,
                slope_predicted=slope_fit.slope_predicted,
                slope_rel_err=slope_fit.slope_rel_err,
            )
        half = len(rows) // 2
        first = fit_constant(numeric[:half], analytic[:half]) if half >= 3 else None
        second = fit_constant(numeric[half:], analytic[half:]) if len(rows) - half >= 3 else None
        row = dict(rows[0])
        row.update(
            row_type="fit",
            numeric=None, analytic=None, analytic_linear=None, analytic_log=None,
            offset=fit.offset,
            residual_max=fit.residual_max,
            residual_rms=fit.residual_rms,
            offset_first_half=first.offset if first else None,
            offset_second_half=second.offset if second else None,
            slope_fitted=fit.slope_fitted,
            slope_predicted=fit.slope_predicted,
            slope_rel_err=fit.slope_rel_err,
        )
        for drop in ("ell", "ell_mirror", "delta", "regime"):
            if drop not in group_keys:
                row[drop] = None
        fits.append(row)
    return fits


def run_sweep_length(config: ExperimentConfig) -> tuple[list[str], list[dict]]:
    """Symmetric far-limit sweep over the interval length (Fig. 2 layout)."""
    model = config.build_model()
    bias = config.build_bias()
    spec = _entry_spec(config)
    builder = FarLimitBuilder(model, bias, spec)
    ells = list(range(config.ell_min, config.ell_max + 1, config.ell_step))

    def compute(ell: int) -> list[dict]:
        geom = SubsystemGeometry(model.m0, 0, ell, 0, ell)
        cmat = correlation_matrix_far(model, bias, geom, "A", spec, builder)
        base = {"ell": ell, "ell_mirror": geom.ell_mirror}
        return _measure_point_rows(model, bias, geom, cmat, config, base)

    # warm the shared Toeplitz kernels serially, then fan out
    compute(ells[-1])
    points = [row for rows in _map_ordered(compute, ells, config.threads) for row in rows]
    fits = _fit_rows(points, (), "ell_mirror")
    return _SWEEP_FIELDS, points + fits


def _position_regime(geom: SubsystemGeometry) -> str:
    if geom.ell_mirror == 0:
        return "no-overlap"
    if geom.ell_mirror == min(geom.ell_l, geom.ell_r):
        return "contained"
    return "partial"


def run_sweep_position(config: ExperimentConfig) -> tuple[list[str], list[dict]]:
    """Far-limit sweep over d_l - d_r at fixed lengths (Fig. 3 layout)."""
    model = config.build_model()
    bias = config.build_bias()
    spec = _entry_spec(config)
    builder = FarLimitBuilder(model, bias, spec)
    deltas = list(range(config.delta_min, config.delta_max + 1, config.delta_step))
    shift = max(0, -min(deltas))

    def compute(delta: int) -> list[dict]:
        geom = SubsystemGeometry(model.m0, shift + delta, config.ell_l, shift, config.ell_r)
        cmat = correlation_matrix_far(model, bias, geom, "A", spec, builder)
        base = {"delta": delta, "ell_mirror": geom.ell_mirror, "regime": _position_regime(geom)}
        return _measure_point_rows(model, bias, geom, cmat, config, base)

    compute(deltas[-1])
    points = [row for rows in _map_ordered(compute, deltas, config.threads) for row in rows]
    fits = _fit_rows(points, (), None)
    return _SWEEP_FIELDS, points + fits


def run_sweep_bias(config: ExperimentConfig) -> tuple[list[str], list[dict]]:
    """Length sweeps repeated for several voltage windows above a fixed k_fr."""
    if not config.dk_list:
        raise LengthMismatch("sweep-bias needs a non-empty dk_list")
    all_rows: list[dict] = []
    for dk in config.dk_list:
        sub = ExperimentConfig(**{**config.__dict__, "k_fl": config.k_fr + dk, "raw": {}})
        _, rows = run_sweep_length(sub)
        for row in rows:
            row["dk"] = dk
        all_rows.extend(rows)
    return _SWEEP_FIELDS, all_rows


def friedel_window(k_fl: float, k_fr: float, requested="auto", max_window: int = 48) -> int:
    """Averaging window, in consecutive integer distances, for the density
    oscillations away from the scatterer.

    The oscillation frequencies in the distance are 2 k_fl, 2 k_fr and their
    sum; on the integer sampling lattice these alias, so the window is chosen
    as the smallest span over which all three advance by nearly whole turns.
    Rounding the bare period 2 pi / (k_fl + k_fr) to one or two samples would
    leave the aliased beats unsuppressed.
    """
    if requested != "auto":
        w = int(requested)
        if w < 2:
            raise ValueError("window must span at least 2 samples")
        return w
    freqs = np.array([2.0 * k_fl, 2.0 * k_fr, k_fl + k_fr]) / (2.0 * np.pi)
    best_w, best_defect = 2, np.inf
    for w in range(2, max_window + 1):
        defect = float(np.max(np.abs(w * freqs - np.round(w * freqs))))
        if defect < best_defect - 1e-12:
            best_w, best_defect = w, defect
        if defect < 0.02:
            return w
    return best_w


_DISTANCE_FIELDS = [
    "row_type", "measure", "d", "center_d", "value", "far_value",
    "window_mean", "avg_deviation", "amplitude",
    "quantity", "exponent", "n_points",
]


def run_sweep_distance(config: ExperimentConfig) -> tuple[list[str], list[dict]]:
    """Finite-distance convergence toward the far limit (Fig. S2 layout).

    Distances are sampled in clusters of ``window`` consecutive integers
    around logarithmically spaced centers; the cluster mean removes the
    aliased Friedel oscillation, the spread around it gives the amplitude.
    """
    model = config.build_model()
    bias = config.build_bias()
    spec = _entry_spec(config)
    ell = config.ell
    window = friedel_window(bias.k_fl, bias.k_fr, config.window)
    d_min = int(round(config.d_over_ell_min * ell))
    d_max = int(round(config.d_over_ell_max * ell))
    centers = np.unique(
        np.round(np.geomspace(d_min, max(d_min + 1, d_max - window + 1), config.n_centers)).astype(int)
    )

    far_geom = SubsystemGeometry(model.m0, 0, ell, 0, ell)
    far_cmat = correlation_matrix_far(model, bias, far_geom, "A", spec)
    nu_far, _ = occupation_spectrum(far_cmat)
    far_mi = (
        entropy_from_spectrum(occupation_spectrum(far_cmat.block_left())[0], "vn")
        + entropy_from_spectrum(occupation_spectrum(far_cmat.block_right())[0], "vn")
        - entropy_from_spectrum(nu_far, "vn")
    )
    far_neg = fermionic_negativity(far_cmat, 1)
    far_vals = {"mi": far_mi, "negativity": far_neg}
    wanted = [m for m in ("mi", "negativity") if m in config.measures] or ["mi"]

    builder = CorrelationBuilder(model, bias, spec)

    def one_distance(d: int) -> dict[str, float]:
        geom = SubsystemGeometry(model.m0, d, ell, d, ell)
        cmat = correlation_matrix_finite(model, bias, geom, "A", spec, builder)
        out: dict[str, float] = {}
        if "mi" in wanted:
            out["mi"] = (
                entropy_from_spectrum(occupation_spectrum(cmat.block_left())[0], "vn")
                + entropy_from_spectrum(occupation_spectrum(cmat.block_right())[0], "vn")
                - entropy_from_spectrum(occupation_spectrum(cmat)[0], "vn")
            )
        if "negativity" in wanted:
            out["negativity"] = fermionic_negativity(cmat, 1)
        return out

    rows: list[dict] = []
    series: dict[str, list[tuple[float, float, float]]] = {m: [] for m in wanted}
    for center in centers:
        ds = list(range(center, center + window))
        values = _map_ordered(one_distance, ds, config.threads)
        for measure in wanted:
            vals = np.array([v[measure] for v in values])
            mean = float(vals.mean())
            center_d = float(np.mean(ds))
            avg_dev = abs(mean - far_vals[measure])
            # the 1/d^2 trend drifts across the window; remove a local linear
            # fit before reading off the oscillation amplitude, otherwise the
            # drift buries the oscillation of weakly oscillating measures
            trend = np.polyval(np.polyfit(ds, vals, 1), ds)
            amplitude = float(np.abs(vals - trend).max())
            for d, v in zip(ds, vals):
                rows.append(
                    {"row_type": "point", "measure": measure, "d": d, "center_d": center_d,
                     "value": float(v), "far_value": far_vals[measure]}
                )
            rows.append(
                {"row_type": "center", "measure": measure, "center_d": center_d,
                 "far_value": far_vals[measure], "window_mean": mean,
                 "avg_deviation": avg_dev, "amplitude": amplitude}
            )
            series[measure].append((center_d, avg_dev, amplitude))

    for measure in wanted:
        data = np.array(series[measure])
        keep = data[:, 0] >= config.fit_min_d_over_ell * ell
        for column, name in ((1, "avg_deviation"), (2, "amplitude")):
            sel = data[keep]
            sel = sel[sel[:, column] > 0.0]
            if len(sel) >= 3:
                exponent = float(np.polyfit(np.log(sel[:, 0]), np.log(sel[:, column]), 1)[0])
                rows.append(
                    {"row_type": "fit", "measure": measure, "quantity": name,
                     "exponent": exponent, "n_points": int(len(sel))}
                )
    return _DISTANCE_FIELDS, rows


_EVAL_FIELDS = [
    "measure", "order", "ell_mirror", "linear", "log", "total", "kernels",
]


def run_eval_asymptotics(config: ExperimentConfig) -> tuple[list[str], list[dict]]:
    """Closed-form predictions for one geometry, no numerics."""
    model = config.build_model()
    bias = config.build_bias()
    geom = SubsystemGeometry(model.m0, config.d_l, config.ell_l, config.d_r, config.ell_r)
    rows: list[dict] = []

    def add(measure: str, order_label: str, pred: asy.AsymptoticPrediction):
        kernels = ";".join(f"{k}={format(v, '.12g')}" for k, v in sorted(pred.kernel_values.items()))
        rows.append(
            {"measure": measure, "order": order_label, "ell_mirror": geom.ell_mirror,
             "linear": pred.linear_term, "log": pred.log_term,
             "total": pred.total_minus_constant, "kernels": kernels}
        )

    for measure in config.measures:
        if measure == "mi":
            for order in config.renyi_orders:
                add("mi", _order_label(order), asy.mi_prediction(model, bias, geom, order))
        elif measure == "ci":
            add("ci", "vn", asy.ci_prediction(model, bias, geom))
        elif measure == "negativity":
            add("negativity", "1", asy.negativity_prediction(model, bias, geom))
        elif measure == "entropy":
            for order in config.renyi_orders:
                label = _order_label(order)
                add("entropy_al", label, asy.contiguous_entropy_prediction(model, bias, geom.ell_l, "L", order))
                add("entropy_ar", label, asy.contiguous_entropy_prediction(model, bias, geom.ell_r, "R", order))
    return _EVAL_FIELDS, rows


def run_scenario(config: ExperimentConfig) -> tuple[list[str], list[dict]]:
    runner = {
        "sweep-length": run_sweep_length,
        "sweep-position": run_sweep_position,
        "sweep-bias": run_sweep_bias,
        "sweep-distance": run_sweep_distance,
        "eval-asymptotics": run_eval_asymptotics,
    }.get(config.scenario)
    if runner is None:
        raise ValueError(f"scenario {config.scenario!r} has no runner")
    return runner(config)
