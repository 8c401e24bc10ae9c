"""Monte Carlo sweeps and metric estimation with CSV persistence.

Per-trial generators derive from (master seed, trial index) only, so every
row of a sweep sees the same random placements (common random numbers) and
results do not depend on worker count or execution order.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import access as ac
from . import training as tr
from .channel import response_matrix, sample_ue_placements
from .config import ConfigError, ScenarioConfig
from .protocol import CompiledScenario, FrameOutcome, compile_scenario, run_frame

CSV_HEADER = ("preset,kappa,policy,ack_mode,t_sw,se_target,n_tr,n_ac,trials,"
              "p_access_mean,p_access_ci95,throughput_mean,throughput_ci95,"
              "se_mean,seed")

STAGE_OF_ACK_MODE = {"none": "ac", "prec": "prec", "tdma": "tdma"}


@dataclass(frozen=True)
class MetricsRow:
    """Aggregated Monte Carlo estimates for one sweep point."""

    preset: str
    kappa: float
    policy: str
    ack_mode: str
    t_sw: float
    se_target: float
    n_tr: int
    n_ac: int
    trials: int
    p_access_mean: float
    p_access_ci95: float
    throughput_mean: float
    throughput_ci95: float
    se_mean: float
    seed: int


def _mean_ci(values: np.ndarray) -> tuple[float, float]:
    if values.size == 0:
        return float("nan"), float("nan")
    mean = float(np.mean(values))
    if values.size == 1:
        return mean, 0.0
    ci = 1.96 * float(np.std(values, ddof=1)) / math.sqrt(values.size)
    return mean, ci


def estimate_metrics(outcomes: Sequence[FrameOutcome], stage: str) -> dict:
    """Access probability and throughput at a protocol stage.

    Frames with no contenders are excluded from the access probability
    (the conditional is vacuous) but count zero packets in throughput.
    The per-frame duration already reflects the stage: no-ACK frames carry
    T_ack = 0 and the repetition baseline carries T_tr = 0.
    """
    if not outcomes:
        raise ValueError("no outcomes")
    if stage not in ("ac", "prec", "tdma"):
        raise ValueError(f"unknown stage {stage!r}")
    p_frames = np.array([
        o.success_count(stage) / o.k for o in outcomes if o.k > 0
    ])
    th_frames = np.array([
        o.success_count(stage) / o.timing.total for o in outcomes
    ])
    se_samples = np.array([o.se_sample for o in outcomes if not math.isnan(o.se_sample)])
    p_mean, p_ci = _mean_ci(p_frames)
    th_mean, th_ci = _mean_ci(th_frames)
    return {
        "p_access_mean": p_mean,
        "p_access_ci95": p_ci,
        "throughput_mean": th_mean,
        "throughput_ci95": th_ci,
        "se_mean": float(np.mean(se_samples)) if se_samples.size else float("nan"),
    }


def run_trials(scenario: CompiledScenario | ScenarioConfig, trials: int,
               seed: int, threads: int = 1) -> list[FrameOutcome]:
    """Independent frames with per-trial generators; order-stable output."""
    sc = scenario if isinstance(scenario, CompiledScenario) else compile_scenario(scenario)

    def one(trial: int) -> FrameOutcome:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))
        return run_frame(sc, rng)

    if threads <= 1:
        return [one(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(trials)))


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

SWEEP_AXES = ("kappa", "se_target", "t_sw")


@dataclass(frozen=True)
class SweepSpec:
    """Shape of one figure-style experiment."""

    name: str
    base: ScenarioConfig
    axis: str
    values: tuple
    policies: tuple
    ack_modes: tuple
    n_tr_grid: tuple = ()   # reconstruction-only sweeps iterate codebook sizes


def sweep(base: ScenarioConfig, axis: str, values: Iterable, trials: int,
          seed: int, policies: Sequence[str] | None = None,
          ack_modes: Sequence[str] | None = None, threads: int = 1,
          preset_name: str = "custom") -> list[MetricsRow]:
    """One MetricsRow per (axis value x policy x ack mode)."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; use one of {SWEEP_AXES}")
    policies = tuple(policies or (base.policy,))
    ack_modes = tuple(ack_modes or (base.ack_mode,))
    rows = []
    for value in values:
        for policy in policies:
            for ack_mode in ack_modes:
                cfg = dataclasses.replace(
                    base, policy=policy, ack_mode=ack_mode, trials=trials,
                    seed=seed, **{axis: value},
                ).validate()
                sc = compile_scenario(cfg)
                outcomes = run_trials(sc, trials, seed, threads)
                metrics = estimate_metrics(outcomes, STAGE_OF_ACK_MODE[ack_mode])
                rows.append(MetricsRow(
                    preset=preset_name,
                    kappa=cfg.kappa,
                    policy=policy,
                    ack_mode=ack_mode,
                    t_sw=cfg.t_sw,
                    se_target=cfg.se_target,
                    n_tr=sc.n_tr if policy != ac.POLICY_RRS else 0,
                    n_ac=sc.n_ac,
                    trials=trials,
                    seed=seed,
                    **metrics,
                ))
    return rows


# ---------------------------------------------------------------------------
# Reconstruction-error measurement (training-phase evaluation)
# ---------------------------------------------------------------------------

def measure_reconstruction_se(base: ScenarioConfig, n_tr: int, se_target: float,
                              trials: int, seed: int, kernel: str = tr.SPLINE,
                              grid_points: int = 512) -> float:
    """Normalized expected squared reconstruction error over random UEs.

    Per trial: place a UE, estimate the sweep samples at the configured
    tolerance, interpolate, and compare against the true response on a dense
    angle grid. Normalization is the ensemble mean |channel|^2.
    """
    cfg = dataclasses.replace(base, n_tr_mode=str(n_tr), se_target=se_target).validate()
    sc = compile_scenario(cfg)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0xE5,)))
    grid = np.linspace(0.0, np.pi / 2, grid_points)
    err = 0.0
    power = 0.0
    for _ in range(trials):
        ds, thetas = sample_ue_placements(rng, 1, cfg.d_min_m, cfg.d_max_m)
        truth = response_matrix(sc.geom, sc.radio, sc.ap, ds, thetas,
                                cfg.gain_ue, grid, direction="dl")[0]
        samples = response_matrix(sc.geom, sc.radio, sc.ap, ds, thetas, cfg.gain_ue,
                                  sc.training.codebook.angles, direction="dl")[0]
        if sc.delta_tol > 0:
            rx = tr.simulate_training_rx(rng, samples, sc.training, cfg.rho_ap,
                                         sc.sigma_training)
            samples = tr.mvu_estimate(rx, sc.training, cfg.rho_ap)
        model = tr.reconstruct(samples, sc.training.sample_period, kernel)
        predicted = model.query(grid)
        err += float(np.mean(np.abs(predicted - truth) ** 2))
        power += float(np.mean(np.abs(truth) ** 2))
    return err / power


def reconstruction_rows(spec: SweepSpec, trials: int, seed: int) -> list[MetricsRow]:
    """Rows for the reconstruction-error figure: SE vs codebook size."""
    rows = []
    for se_target in spec.values:
        for n_tr in spec.n_tr_grid:
            se = measure_reconstruction_se(spec.base, n_tr, se_target, trials, seed)
            rows.append(MetricsRow(
                preset=spec.name, kappa=0.0, policy="none", ack_mode="none",
                t_sw=spec.base.t_sw, se_target=se_target, n_tr=n_tr, n_ac=0,
                trials=trials, p_access_mean=float("nan"), p_access_ci95=float("nan"),
                throughput_mean=float("nan"), throughput_ci95=float("nan"),
                se_mean=se, seed=seed,
            ))
    return rows


# ---------------------------------------------------------------------------
# Figure presets
# ---------------------------------------------------------------------------

def _fig_base(**kw) -> ScenarioConfig:
    # reference parameter set; training size pinned to the median bound of
    # the sizing analysis (46) as in the reference evaluation. The UE power
    # sits between the reference 10 dBm and the coverage-policy minimum so
    # the decode threshold separates main-lobe from off-lobe transmissions,
    # the regime in which the reference access comparison is reproducible
    # (see README on reproduction choices).
    return ScenarioConfig(**{"n_tr_mode": "46", "t_sw": 0.0,
                             "rho_ue_dbm": -10.0, **kw})


SWEEP_PRESETS: dict[str, SweepSpec] = {
    # reconstruction error vs estimation tolerance across the candidate
    # codebook sizes from the sizing analysis
    "fig5a": SweepSpec(
        name="fig5a",
        base=_fig_base(),
        axis="se_target",
        values=(0.0, 1e-3, 1e-2),
        policies=("none",),
        ack_modes=("none",),
        n_tr_grid=(16, 46, 142, 150),
    ),
    # access probability without ACK vs channel load per oracle policy
    "fig5b": SweepSpec(
        name="fig5b",
        base=_fig_base(),
        axis="kappa",
        values=(10.0, 50.0, 100.0),
        policies=(ac.POLICY_CARAP, ac.POLICY_GSCAP, ac.POLICY_SMAP),
        ack_modes=("none",),
    ),
    # end-to-end throughput vs channel load, all policies and stages
    "fig6": SweepSpec(
        name="fig6",
        base=_fig_base(),
        axis="kappa",
        values=(10.0, 50.0, 100.0, 150.0, 200.0),
        policies=(ac.POLICY_RRS, ac.POLICY_CARAP, ac.POLICY_GSCAP, ac.POLICY_SMAP),
        ack_modes=("none", "prec", "tdma"),
    ),
    # throughput sensitivity to the switching time at fixed load
    "fig7": SweepSpec(
        name="fig7",
        base=_fig_base(kappa=150.0),
        axis="t_sw",
        values=(0.0, 1.0, 5.0),
        policies=(ac.POLICY_GSCAP,),
        ack_modes=("prec", "tdma"),
    ),
}


_FIG5B_SE_GRID = (0.0, 1e-3, 1e-2)


def run_preset(name: str, trials: int, seed: int, threads: int = 1,
               policies: Sequence[str] | None = None,
               ack_modes: Sequence[str] | None = None,
               values: Sequence | None = None) -> list[MetricsRow]:
    try:
        spec = SWEEP_PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown sweep preset {name!r}; choose from {sorted(SWEEP_PRESETS)}"
        ) from None
    if name == "fig5a":
        return reconstruction_rows(spec, trials, seed)
    rows = []
    if name == "fig5b":
        # one family of curves per reconstruction-error target
        for se_target in _FIG5B_SE_GRID:
            base = dataclasses.replace(spec.base, se_target=se_target)
            rows.extend(sweep(base, spec.axis, values or spec.values, trials, seed,
                              policies or spec.policies, ack_modes or spec.ack_modes,
                              threads, preset_name=name))
        return rows
    return sweep(spec.base, spec.axis, values or spec.values, trials, seed,
                 policies or spec.policies, ack_modes or spec.ack_modes, threads,
                 preset_name=name)


# ---------------------------------------------------------------------------
# CSV persistence
# ---------------------------------------------------------------------------

_FLOAT_FIELDS = ("kappa", "t_sw", "se_target", "p_access_mean", "p_access_ci95",
                 "throughput_mean", "throughput_ci95", "se_mean")
_INT_FIELDS = ("n_tr", "n_ac", "trials", "seed")


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.9g}"


def format_row(row: MetricsRow) -> str:
    return ",".join(_fmt(getattr(row, name)) for name in CSV_HEADER.split(","))


def write_csv(rows: Sequence[MetricsRow], path: str, comments: Sequence[str] = ()) -> None:
    """Emit the canonical schema; `comments` become self-description lines."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(format_row(row) + "\n")


def read_csv(path: str) -> list[MetricsRow]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = None
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if header is None:
                if line != CSV_HEADER:
                    raise ConfigError(f"unexpected CSV header in {path}")
                header = line
                continue
            parts = line.split(",")
            names = CSV_HEADER.split(",")
            kw = {}
            for name, part in zip(names, parts):
                if name in _FLOAT_FIELDS:
                    kw[name] = float(part)
                elif name in _INT_FIELDS:
                    kw[name] = int(part)
                else:
                    kw[name] = part
            rows.append(MetricsRow(**kw))
    if header is None:
        raise ConfigError(f"{path} has no header row")
    return rows
