"""Command-line front end: certify, oracle, simulate, and regret runs.

Configuration is a single JSON document; outputs are CSV (and optionally
SVG) files with shortest round-trip float formatting and deterministic
bytes for a fixed config and seed.  Exit codes separate failure classes:
2 config parse, 3 schedule/hypothesis validation, 4 oracle disagreement,
5 soundness violation, 6 regret domination failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import certify, regret, sdp_oracle, simulate
from .errors import TrackboundError, ValidateFailed
from .schedule import Analysis, AnalysisKind, ParamTrack, validate

EXIT_CONFIG = 2
EXIT_VALIDATE = 3
EXIT_ORACLE_GAP = 4
EXIT_SOUNDNESS = 5
EXIT_REGRET = 6

ORACLE_GAP_TOL = 1e-4

_SCHEDULE_KEYS = {"horizon", "m", "L", "alpha", "sigma", "c", "delta", "G",
                  "Lg", "U0"}
_TOP_KEYS = {"analysis", "schedule", "seed", "trials", "oracle", "out", "svg",
             "dimension", "drift", "components",
             # negative-control hooks for exercising failure exit codes
             "_corrupt_closed_form", "_corrupt_bound"}


class ConfigError(Exception):
    """Raised when the JSON configuration is malformed."""


@dataclass(frozen=True)
class RunConfig:
    """Parsed run configuration."""

    kind: AnalysisKind
    track: ParamTrack
    seed: int
    trials: int
    oracle: str
    out: Optional[str]
    svg: Optional[str]
    dimension: int
    drift: simulate.Drift
    components: int
    corrupt_closed_form: bool
    corrupt_bound: bool


def parse_config(doc: dict, overrides: Optional[dict] = None) -> RunConfig:
    """Validate and convert a JSON document (plus CLI overrides)."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    overrides = overrides or {}
    try:
        kind = AnalysisKind.parse(doc["analysis"])
    except KeyError:
        raise ConfigError("missing 'analysis'")
    except (ValueError, TrackboundError) as exc:
        raise ConfigError(f"bad 'analysis': {exc}")
    sched = doc.get("schedule")
    if not isinstance(sched, dict):
        raise ConfigError("missing or non-object 'schedule'")
    unknown = set(sched) - _SCHEDULE_KEYS
    if unknown:
        raise ConfigError(f"unknown schedule keys: {sorted(unknown)}")
    try:
        track = ParamTrack(**sched)
    except (TypeError, ValueError, TrackboundError) as exc:
        raise ConfigError(f"bad schedule: {exc}")
    seed = overrides.get("seed", doc.get("seed", 0))
    trials = overrides.get("trials", doc.get("trials", 1))
    oracle = doc.get("oracle", "both")
    if oracle not in ("off", "reduced", "generic", "both"):
        raise ConfigError(f"bad 'oracle': {oracle!r}")
    if not (isinstance(seed, int) and 0 <= seed < 2 ** 64):
        raise ConfigError("'seed' must be a 64-bit unsigned integer")
    if not (isinstance(trials, int) and trials >= 1):
        raise ConfigError("'trials' must be a positive integer")
    drift_name = doc.get("drift", "aligned_away")
    try:
        drift = simulate.Drift(drift_name)
    except ValueError:
        raise ConfigError(f"bad 'drift': {drift_name!r}")
    dimension = doc.get("dimension", 10)
    components = doc.get("components", 4)
    if not (isinstance(dimension, int) and dimension >= 1):
        raise ConfigError("'dimension' must be a positive integer")
    if not (isinstance(components, int) and components >= 1):
        raise ConfigError("'components' must be a positive integer")
    return RunConfig(
        kind=kind, track=track, seed=seed, trials=trials, oracle=oracle,
        out=overrides.get("out", doc.get("out")),
        svg=overrides.get("svg", doc.get("svg")),
        dimension=dimension, drift=drift, components=components,
        corrupt_closed_form=bool(doc.get("_corrupt_closed_form", False)),
        corrupt_bound=bool(doc.get("_corrupt_bound", False)),
    )


def _fmt(x) -> str:
    """Shortest round-trip decimal for floats; empty for None."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Optional[str], header: Sequence[str],
               rows: Sequence[Sequence]) -> None:
    text = ",".join(header) + "\n" + "".join(
        ",".join(_fmt(v) for v in row) + "\n" for row in rows)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _plot_svg(path: str, sqrt_bound: np.ndarray, measured: np.ndarray) -> None:
    """Two polylines (certified sqrt-bound, measured error) on a log-y axis."""
    width, height, pad = 800, 500, 50
    n = len(sqrt_bound)
    data = np.concatenate([sqrt_bound, measured])
    positive = data[data > 0]
    lo = float(positive.min()) if positive.size else 1e-12
    hi = float(positive.max()) if positive.size else 1.0
    lo, hi = min(lo, hi / 10.0), max(hi, lo * 10.0)
    lg_lo, lg_hi = math.log10(lo), math.log10(hi)

    def sx(t):
        return pad + (width - 2 * pad) * (t / max(n - 1, 1))

    def sy(v):
        v = max(float(v), lo)
        frac = (math.log10(v) - lg_lo) / (lg_hi - lg_lo)
        return height - pad - (height - 2 * pad) * frac

    def poly(vals):
        return " ".join(f"{sx(t):.3f},{sy(v):.3f}" for t, v in enumerate(vals))

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>\n',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>\n',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" '
        f'y2="{height - pad}" stroke="black"/>\n',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" '
        f'stroke="black"/>\n',
        f'<polyline fill="none" stroke="#1f77b4" stroke-width="2" '
        f'points="{poly(sqrt_bound)}"/>\n',
        f'<polyline fill="none" stroke="#d62728" stroke-width="2" '
        f'points="{poly(measured)}"/>\n',
        f'<text x="{pad + 10}" y="{pad - 10}" font-family="monospace" '
        f'font-size="14" fill="#1f77b4">certified sqrt-bound</text>\n',
        f'<text x="{pad + 220}" y="{pad - 10}" font-family="monospace" '
        f'font-size="14" fill="#d62728">measured error</text>\n',
        '</svg>\n',
    ]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("".join(parts))


def _build_instance(cfg: RunConfig):
    """Deterministic problem instance matching the schedule parameters."""
    rng = simulate.rng_for(cfg.seed, trial=2 ** 32 - 1)
    p0 = cfg.track.at(0)
    tag = cfg.kind.tag
    if tag is Analysis.VI_OGD:
        b = math.sqrt(max(p0.L ** 2 - p0.m ** 2, 0.0))
        return simulate.MonotoneField(m=p0.m, b=b,
                                      blocks=max(cfg.dimension // 2, 1),
                                      drift=cfg.drift)
    if tag is Analysis.FINITE_SUM:
        anchors = rng.normal(size=(cfg.components, cfg.dimension))
        H = simulate.random_spd_matrix(cfg.dimension, p0.m, p0.L, rng)
        prob = simulate.FiniteSumQuadratic(H=H, anchors=anchors, m=p0.m,
                                           L=p0.L, drift=cfg.drift)
        disp = prob.dispersion(prob.anchors)
        if p0.G == 0.0:
            anchors = np.repeat(anchors.mean(axis=0, keepdims=True),
                                cfg.components, axis=0)
        elif disp > 0:
            mean = anchors.mean(axis=0)
            anchors = mean + (p0.G / disp) * (anchors - mean)
        return simulate.FiniteSumQuadratic(H=H, anchors=anchors, m=p0.m,
                                           L=p0.L, drift=cfg.drift)
    if tag is Analysis.IP_OGD:
        h = rng.uniform(p0.m, p0.L, cfg.dimension)
        h[0] = p0.L
        if cfg.dimension > 1:
            h[-1] = p0.m
        lam1 = p0.Lg / math.sqrt(cfg.dimension)
        return simulate.DiagonalComposite(h=h, lam1=lam1, m=p0.m, L=p0.L,
                                          drift=cfg.drift)
    H = simulate.random_spd_matrix(cfg.dimension, p0.m, p0.L, rng)
    return simulate.DriftingQuadratic(H=H, m=p0.m, L=p0.L, drift=cfg.drift)


def _error_policy(tag: Analysis) -> simulate.ErrorPolicy:
    if tag in (Analysis.INEXACT_OGD_ABS, Analysis.IP_OGD):
        return simulate.AbsoluteWorstCase()
    if tag is Analysis.INEXACT_OGD_REL:
        return simulate.RelativeWorstCase()
    if tag is Analysis.STOCH_OGD_IID:
        return simulate.IidGaussian()
    return simulate.NoError()


def _run_one(cfg: RunConfig, problem, trial: int) -> simulate.Trajectory:
    tag = cfg.kind.tag
    if tag is Analysis.VI_OGD:
        return simulate.run_vi_ogd(problem, cfg.track, worst=True,
                                   seed=cfg.seed, trial=trial)
    if tag is Analysis.FINITE_SUM:
        return simulate.run_stoch_finite_sum(problem, cfg.track,
                                             seed=cfg.seed, trial=trial)
    if tag is Analysis.IP_OGD:
        return simulate.run_ipogd(problem, cfg.track, _error_policy(tag),
                                  seed=cfg.seed, trial=trial)
    return simulate.run_inexact_ogd(problem, cfg.track, _error_policy(tag),
                                    seed=cfg.seed, trial=trial)


def cmd_certify(cfg: RunConfig) -> int:
    report = validate(cfg.kind, cfg.track)
    T = cfg.track.horizon
    U = [float(cfg.track.U0)]
    factors: List[Optional[float]] = []
    for t in range(T):
        try:
            p = cfg.track.at(t)
            factors.append(certify.contraction_factor(cfg.kind, p))
            U.append(certify.step(cfg.kind, U[-1], p))
        except TrackboundError:
            factors.append(None)
            U.append(None)
    rows = []
    for t in range(T + 1):
        u = U[t]
        ok = (report.reasons[t] is None if t < T and report.reasons
              else bool(report))
        rows.append([t, u, None if u is None else math.sqrt(max(u, 0.0)),
                     factors[t] if t < T else None, ok])
    _write_csv(cfg.out, ["t", "U_hat", "sqrt_U_hat", "factor", "valid"], rows)
    return 0 if report else EXIT_VALIDATE


def cmd_oracle(cfg: RunConfig) -> int:
    if cfg.oracle == "off":
        raise ConfigError("oracle command requires oracle != off")
    bt = certify.run(cfg.kind, cfg.track)
    rows = []
    worst = 0.0
    for t in range(cfg.track.horizon):
        p = cfg.track.at(t)
        U_t = bt.U[t]
        U_closed = bt.U[t + 1]
        if cfg.corrupt_closed_form:
            U_closed *= 0.5  # negative-control hook
        U_red = U_gen = None
        resid = None
        gap = 0.0
        if cfg.oracle in ("reduced", "both"):
            red = sdp_oracle.solve_step_reduced(cfg.kind, U_t, p)
            if red is not None:
                U_red = red.U_next
                gap = max(gap, abs(U_red - U_closed) / max(1.0, U_closed))
                if red.cert is not None and math.isfinite(
                        red.feasibility_residual):
                    resid = red.feasibility_residual
        if cfg.oracle in ("generic", "both"):
            gen = sdp_oracle.solve_step_generic(cfg.kind, U_t, p,
                                                seed=cfg.seed)
            U_gen = gen.U_next
            gap = max(gap, abs(U_gen - U_closed) / max(1.0, U_closed))
            resid = gen.feasibility_residual
        worst = max(worst, gap)
        rows.append([t, U_closed, U_red, U_gen, gap, resid])
    _write_csv(cfg.out, ["t", "U_closed", "U_reduced", "U_generic",
                         "rel_gap", "feas_residual"], rows)
    return 0 if worst <= ORACLE_GAP_TOL else EXIT_ORACLE_GAP


def cmd_simulate(cfg: RunConfig) -> int:
    bt = certify.run(cfg.kind, cfg.track)
    problem = _build_instance(cfg)
    mean, peak = simulate.trial_mean_errors(
        lambda trial: _run_one(cfg, problem, trial), cfg.trials)
    U = np.array(bt.U)
    if cfg.corrupt_bound:
        U = 0.25 * U  # negative-control hook
    stochastic = cfg.kind.tag in (Analysis.STOCH_OGD_IID, Analysis.FINITE_SUM)
    if stochastic:
        rep = simulate.check_soundness(mean, U, mode="mean-square",
                                       trials=cfg.trials)
    else:
        rep = simulate.check_soundness(peak, U, mode="deterministic")
    rows = [[t, U[t], mean[t], peak[t], cfg.trials]
            for t in range(len(U))]
    _write_csv(cfg.out, ["t", "U_hat", "err_mean", "err_max", "trials"], rows)
    if cfg.svg:
        _plot_svg(cfg.svg, np.sqrt(np.maximum(U, 0.0)),
                  np.sqrt(np.maximum(mean if stochastic else peak, 0.0)))
    return 0 if rep.ok else EXIT_SOUNDNESS


def cmd_regret(cfg: RunConfig) -> int:
    report = regret.regret_bound_for(cfg.kind, cfg.track)
    problem = _build_instance(cfg)
    trajs = [_run_one(cfg, problem, trial) for trial in range(cfg.trials)]
    empirical = regret.empirical_regret(trajs if len(trajs) > 1 else trajs[0])
    allowed = report.bound
    if report.in_expectation:
        allowed *= 1.0 + 5.0 / math.sqrt(cfg.trials)
    margin = report.bound - empirical
    _write_csv(cfg.out, ["T", "gamma", "bound", "empirical", "margin"],
               [[report.horizon, report.gamma, report.bound, empirical,
                 margin]])
    return 0 if empirical <= allowed else EXIT_REGRET


_COMMANDS = {
    "certify": cmd_certify,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
    "regret": cmd_regret,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="trackbound",
        description="Certified tracking-error and dynamic-regret bounds "
                    "for inexact online optimization methods.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out")
        sp.add_argument("--svg")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--trials", type=int)
    args = parser.parse_args(argv)
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    overrides = {k: v for k, v in (("out", args.out), ("svg", args.svg),
                                   ("seed", args.seed),
                                   ("trials", args.trials))
                 if v is not None}
    try:
        cfg = parse_config(doc, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrackboundError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
