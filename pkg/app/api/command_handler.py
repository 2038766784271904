from pathlib import Path

import logging
import numpy as np

from app.api.schema import (CommandOutcome, DecompositionSummary, Prop22Summary, RunConfig, SweepRow)
from app.core.errors import ConfigurationError
from app.services.afree import build_test_space
from app.services.densities import resolve_density
from app.services.envelope import BiconjugateOracle, EnvelopeOptions, envelope_handler
from app.services.pseudodiff import (ENSEMBLE_LABELS, DecompositionOptions, concentration_ensemble,
                                     decompose_equiintegrable, oscillation_ensemble, resolve_eta, verify_prop22)
from app.services.relaxation import RecoveryOptions, RelaxationQuery, relaxation_handler, resolve_field_source
from app.services.reporting import ArtifactWriter, EnvelopeCache, cache_key
from app.services.symbols import rank_handler, resolve_operator
from app.services.torus import TorusGrid

CACHE_FILE = "envelope_cache.json"


def _envelope_options(config: RunConfig) -> EnvelopeOptions:
    return EnvelopeOptions(ladder=config.grid.ladder, seed=config.seed, **config.envelope.model_dump())


def _labels(config: RunConfig):
    operator = config.operator.label + (f"{config.operator.params}" if config.operator.params else "")
    density = config.density.label + (f"{config.density.params}" if config.density.params else "")
    return operator, density


def _cached_summary(config: RunConfig, cache: EnvelopeCache, coeffs, density, x0, u0, xi):
    options = _envelope_options(config)
    key = cache_key(*_labels(config), x0, u0, xi, options)
    return cache.get_or_compute(key, lambda: envelope_handler(density, coeffs, x0, u0, xi, options).summary())


def check_rank(config: RunConfig, writer: ArtifactWriter) -> str:
    coeffs = resolve_operator(config.operator.label, config.operator.params)
    rng = np.random.default_rng(config.seed)
    x = np.vstack([np.zeros((1, coeffs.N)), rng.uniform(-0.5, 0.5, size=(config.rank.x_samples, coeffs.N))])
    certificate = rank_handler(coeffs, x, config.rank.sample_count, config.seed, config.rank.gap_threshold)
    writer.report("rank_certificate.txt", certificate)
    return certificate.verdict


def envelope_sweep(config: RunConfig, writer: ArtifactWriter, cache: EnvelopeCache) -> str:
    coeffs = resolve_operator(config.operator.label, config.operator.params)
    density = resolve_density(config.density.label, config.density.params)
    sweep = config.sweep
    center = np.zeros(coeffs.d) if not sweep.center else np.asarray(sweep.center, dtype=float)
    direction = np.eye(coeffs.d)[0] if not sweep.direction else np.asarray(sweep.direction, dtype=float)
    if center.shape != (coeffs.d,) or direction.shape != (coeffs.d,):
        raise ConfigurationError(f"Sweep center and direction need {coeffs.d} components")

    rows = []
    for t in np.linspace(sweep.t_min, sweep.t_max, sweep.points):
        xi = center + t * direction
        summary = _cached_summary(config, cache, coeffs, density, sweep.x0, sweep.u0, xi)
        rows.append(SweepRow(t=float(t), xi=xi.tolist(), value=summary.value, f_value=summary.f_value,
                             laminate_bound=summary.laminate_bound, biconjugate_bound=summary.biconjugate_bound,
                             converged=summary.converged))
    writer.csv("envelope_sweep.csv", ["t"] + [f"xi_{i + 1}" for i in range(coeffs.d)] +
               ["value", "f_value", "laminate_bound", "biconjugate_bound", "converged"],
               [[r.t, *r.xi, r.value, r.f_value, r.laminate_bound, r.biconjugate_bound, r.converged] for r in rows])
    passed = all(np.isfinite(r.value) and r.value <= r.f_value + 1e-12 for r in rows)
    return "pass" if passed else "fail"


def oracle_compare(config: RunConfig, writer: ArtifactWriter, cache: EnvelopeCache) -> str:
    coeffs = resolve_operator(config.operator.label, config.operator.params)
    density = resolve_density(config.density.label, config.density.params)
    oracle_cfg = config.oracle
    d = coeffs.d
    axis = np.linspace(oracle_cfg.oracle_min, oracle_cfg.oracle_max, oracle_cfg.oracle_points)
    mesh = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1)
    samples = density.eval(np.asarray(oracle_cfg.x0, dtype=float), np.asarray(oracle_cfg.u0, dtype=float), mesh)
    oracle = BiconjugateOracle([axis] * d, samples)

    xi_axis = np.linspace(oracle_cfg.xi_min, oracle_cfg.xi_max, oracle_cfg.xi_points)
    xis = np.stack(np.meshgrid(*([xi_axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    rows, passed = [], True
    for xi in xis:
        summary = _cached_summary(config, cache, coeffs, density, oracle_cfg.x0, oracle_cfg.u0, xi)
        lower = float(oracle(xi))
        upper = min(summary.f_value, summary.laminate_bound if summary.laminate_bound is not None else np.inf)
        ok = lower - oracle_cfg.tolerance_oracle <= summary.value <= upper + oracle_cfg.tolerance_upper
        passed = passed and ok
        rows.append([*xi.tolist(), lower, summary.value, summary.f_value, summary.laminate_bound, ok])
    writer.csv("oracle_compare.csv", [f"xi_{i + 1}" for i in range(d)] +
               ["biconjugate", "value", "f_value", "laminate_bound", "sandwich"], rows)
    return "pass" if passed else "fail"


def relax(config: RunConfig, writer: ArtifactWriter) -> str:
    coeffs = resolve_operator(config.operator.label, config.operator.params)
    density = resolve_density(config.density.label, config.density.params)
    options = RecoveryOptions(**config.relax.model_dump(exclude={"u", "v"}))
    query = RelaxationQuery(density=density, coeffs=coeffs,
                            u=resolve_field_source(config.relax.u, 1),
                            v=resolve_field_source(config.relax.v, coeffs.d),
                            envelope=_envelope_options(config), recovery=options)
    report = relaxation_handler(query)
    writer.report("relaxation_report.txt", report)
    writer.csv("rhs_points.csv", [f"x_{i + 1}" for i in range(coeffs.N)] + ["weight", "value", "f_value", "converged"],
               [[*p.x, p.weight, p.value, p.f_value, p.converged] for p in report.rhs.points])
    writer.csv("lhs_ladder.csv", ["r", "m", "G", "energy", "residual", "shell_measure"],
               [[e.r, e.m, e.G, e.energy, e.residual, e.shell_measure] for e in report.lhs.entries])
    writer.csv("defect_ladder.csv", ["r", "m", "defect"], [[e.r, e.m, e.defect] for e in report.defects])
    return report.verdict


def prop22(config: RunConfig, writer: ArtifactWriter) -> str:
    coeffs = resolve_operator(config.operator.label, config.operator.params)
    section = config.prop22
    tables = [verify_prop22(coeffs, resolve_eta(eta), q, section.ensemble_size, section.grids, eta_label=eta,
                            seed=config.seed)
              for eta in section.etas for q in section.qs]
    verdict = "pass" if all(t.verdict == "pass" for t in tables) else "fail"
    writer.csv("prop22.csv", ["operator", "eta", "q", "G", "inequality", "max_ratio", "mean_ratio"],
               [[t.operator, t.eta, t.q, r.G, r.inequality, r.max_ratio, r.mean_ratio] for t in tables for r in t.rows])
    writer.report("prop22_report.txt", Prop22Summary(operator=coeffs.label, tables=tables, verdict=verdict))
    return verdict


def decompose(config: RunConfig, writer: ArtifactWriter) -> str:
    coeffs = resolve_operator(config.operator.label, config.operator.params)
    section = config.decompose
    space = build_test_space(coeffs, np.zeros(coeffs.N), TorusGrid(coeffs.N, section.G))
    if section.ensemble == "concentration":
        ensemble = concentration_ensemble(space, section.ns, section.q)
    elif section.ensemble == "oscillation":
        ensemble = oscillation_ensemble(space, section.ns)
    else:
        raise ConfigurationError(f"Unknown ensemble '{section.ensemble}' (known: {', '.join(ENSEMBLE_LABELS)})")
    options = DecompositionOptions(quantile=section.quantile, scale=section.scale, growth=section.growth,
                                   m_factors=section.m_factors)
    _, report = decompose_equiintegrable(coeffs, ensemble, section.q, ensemble[0].mean(), section.ns,
                                         resolve_eta(section.eta), options)

    if section.tail_factor not in section.m_factors:
        raise ConfigurationError(f"tail_factor {section.tail_factor} is not one of m_factors")
    tail_ratio = report.tail_ratio(section.m_factors.index(section.tail_factor))
    bounded = all(m.output_residual <= section.residual_factor * m.truncation_residual + 1e-12
                  for m in report.members)
    passed = (tail_ratio <= 1.0 / section.tail_shrink and bounded and report.max_mean_error <= 1e-12
              and report.distance_slope is not None and report.distance_slope < 0.0)
    verdict = "pass" if passed else "fail"
    writer.csv("decomposition.csv", ["n", "level", "distance_s", "distance_q", "input_residual",
                                     "truncation_residual", "output_residual", "mean_error"],
               [[m.n, m.level, m.distance_s, m.distance_q, m.input_residual, m.truncation_residual,
                 m.output_residual, m.mean_error] for m in report.members])
    writer.report("decomposition_report.txt", DecompositionSummary(
        ensemble=section.ensemble, report=report, tail_ratio=tail_ratio, residuals_bounded=bounded, verdict=verdict))
    return verdict


def handle_command(config: RunConfig, output_dir: Path) -> CommandOutcome:
    writer = ArtifactWriter(output_dir, config.model_dump(mode="json"))
    cache = EnvelopeCache(Path(output_dir) / CACHE_FILE)
    command = config.command
    logging.info(f"Running '{command}' with seed {config.seed}")

    if command == "check-rank":
        verdict = check_rank(config, writer)
    elif command == "envelope":
        verdict = envelope_sweep(config, writer, cache)
    elif command == "oracle-compare":
        verdict = oracle_compare(config, writer, cache)
    elif command == "relax":
        verdict = relax(config, writer)
    elif command == "verify-prop22":
        verdict = prop22(config, writer)
    elif command == "decompose":
        verdict = decompose(config, writer)
    else:
        raise ConfigurationError(f"Unknown command '{command}'")

    if len(cache):
        cache.save()
    return CommandOutcome(command=command, verdict=verdict, artifacts=[str(p) for p in writer.written],
                          message=f"{command}: {verdict}")
