"""Request handlers. The FastAPI routes and the CLI both call these, so the
CLI in local mode and a remote service produce identical payloads."""

from __future__ import annotations

from .. import __version__, allocation, analytic, core, simulator
from . import schemas


def handle_health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


def handle_optimize(req: schemas.OptimizeRequest) -> schemas.OptimizeResponse:
    params = req.pool_params()
    solo_utility = analytic.pplns_steady_state_utility(params, req.alpha, 1)
    opt = analytic.optimal_pplns_n(params, req.alpha)

    if req.alpha < 1.0:
        geo_rule: allocation.AllocationRule = analytic.geometric_optimal_rule(
            req.alpha, req.delta
        )
        geo_utility = analytic.geometric_steady_state_utility(params, req.alpha)
    else:
        # risk neutral: the geometric family degenerates to keeping everything
        geo_rule = allocation.Solo()
        geo_utility = solo_utility

    return schemas.OptimizeResponse(
        version=__version__,
        inputs=req,
        solo=schemas.SoloSection(
            rule=schemas.rule_to_spec(allocation.Solo()), utility=solo_utility
        ),
        pplns=schemas.PplnsSection(
            rule=schemas.rule_to_spec(allocation.Pplns(n=opt.n_int)),
            n_real=opt.n_real,
            n_int=opt.n_int,
            utility=opt.utility_at_n_int,
        ),
        geometric=schemas.GeometricSection(
            rule=schemas.rule_to_spec(geo_rule), utility=geo_utility
        ),
    )


def handle_evaluate(req: schemas.EvaluateRequest) -> schemas.EvaluateResponse:
    params = req.pool_params()
    rule = schemas.rule_from_spec(req.rule)
    u = schemas.utility_from_spec(req.utility)
    return schemas.EvaluateResponse(
        version=__version__,
        inputs=req,
        mass=rule.mass(),
        truncation_depth=allocation.truncation_depth(rule, params, u, req.eps),
        utility=analytic.fixed_rule_steady_state_utility(params, u, rule, req.eps),
    )


def handle_simulate(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
    params = req.pool_params()
    u = schemas.utility_from_spec(req.utility)
    proportional = isinstance(req.rule, schemas.ProportionalSpec)
    cfg = simulator.SimConfig(
        params=params,
        utility=u,
        rule=None if proportional else schemas.rule_from_spec(req.rule),
        num_shares=req.num_shares,
        trials=req.trials,
        seed=req.seed,
        report_k=req.report_k,
        steady_window=req.steady_window,
    )
    est = (
        simulator.simulate_proportional(cfg)
        if proportional
        else simulator.simulate_fixed_rule(cfg)
    )
    report = simulator.convergence_report(est)
    return schemas.SimulateResponse(
        version=__version__,
        inputs=req,
        seed=req.seed,
        per_k=[
            schemas.PerKRow(k=k, mean=float(m), se=float(s))
            for k, (m, s) in enumerate(zip(est.per_k_mean, est.per_k_se))
        ],
        steady_mean=est.steady_mean,
        steady_se=est.steady_se,
        shares_counted=est.shares_counted,
        report=schemas.ConvergenceModel(
            converged=report.converged,
            steady_state_utility=report.steady_state_utility,
            drift=report.drift,
            drift_se=report.drift_se,
            half_gap=report.half_gap,
            mean_reward_per_share=report.mean_reward_per_share,
            balance_ok=report.balance_ok,
        ),
    )


def _sweep_schemes(params: core.PoolParams, alpha: float):
    """Yield (scheme, param string, analytic value, rule or None)."""
    solo_val = analytic.pplns_steady_state_utility(params, alpha, 1)
    yield "solo", "", solo_val, allocation.Solo()

    opt = analytic.optimal_pplns_n(params, alpha)
    yield "pplns_opt", f"n={opt.n_int}", opt.utility_at_n_int, allocation.Pplns(n=opt.n_int)

    if alpha < 1.0:
        rule = analytic.geometric_optimal_rule(alpha, params.delta)
        val = analytic.geometric_steady_state_utility(params, alpha)
        yield "geometric_opt", f"c={rule.c!r};r={rule.r!r}", val, rule
    else:
        yield "geometric_opt", "solo", solo_val, allocation.Solo()

    prop_val = analytic.proportional_pay_expected_utility(
        params, core.PowerUtility(alpha=alpha)
    )
    yield "proportional", "", prop_val, None


def handle_sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
    params = req.pool_params()
    rows: list[schemas.SweepRow] = []
    for alpha in req.alphas:
        if not (0.0 < alpha <= 1.0):
            raise core.ParameterError(f"alphas entries must be in (0, 1], got {alpha}")
        for scheme, param, value, rule in _sweep_schemes(params, alpha):
            sim_mean = sim_se = None
            if req.simulate:
                cfg = simulator.SimConfig(
                    params=params,
                    utility=core.PowerUtility(alpha=alpha),
                    rule=rule,
                    num_shares=req.num_shares,
                    trials=req.trials,
                    seed=req.seed,
                )
                est = (
                    simulator.simulate_proportional(cfg)
                    if rule is None
                    else simulator.simulate_fixed_rule(cfg)
                )
                sim_mean, sim_se = est.steady_mean, est.steady_se
            rows.append(
                schemas.SweepRow(
                    alpha=alpha,
                    scheme=scheme,
                    param=param,
                    analytic_utility=value,
                    sim_utility=sim_mean,
                    sim_se=sim_se,
                )
            )
    return schemas.SweepResponse(
        version=__version__, inputs=req, seed=req.seed, rows=rows
    )


def handle_payoff(req: schemas.PayoffRequest) -> schemas.PayoffResponse:
    params = req.pool_params()
    rule = analytic.geometric_optimal_rule(req.alpha, req.delta)
    n = req.n if req.n is not None else analytic.optimal_pplns_n(params, req.alpha).n_int
    pplns = allocation.Pplns(n=n)
    rows = [
        schemas.PayoffRow(
            offset=i,
            geometric_weight=rule.weight(i),
            pplns_weight=pplns.weight(i),
        )
        for i in range(req.max_offset)
    ]
    return schemas.PayoffResponse(
        version=__version__,
        inputs=req,
        n=n,
        geometric_rule=schemas.rule_to_spec(rule),
        rows=rows,
    )


def handle_check(req: schemas.CheckRequest) -> schemas.CheckResponse:
    params = req.pool_params()
    u = schemas.utility_from_spec(req.utility)
    rule = schemas.rule_from_spec(req.rule)  # Ponzi profiles raise here
    checks: list[schemas.CheckItem] = []

    mass = rule.mass()
    checks.append(
        schemas.CheckItem(
            name="mass_within_budget",
            ok=mass <= 1.0 + allocation.MASS_TOL,
            detail=f"mass={mass!r}",
        )
    )

    window = rule.window()
    probe = range(min(window, 1000)) if window is not None else range(1000)
    nonneg = all(rule.weight(i) >= 0.0 for i in probe)
    checks.append(
        schemas.CheckItem(
            name="weights_nonnegative",
            ok=nonneg,
            detail=f"sampled {len(list(probe))} leading offsets",
        )
    )

    depth = allocation.truncation_depth(rule, params, u, req.eps)
    checks.append(
        schemas.CheckItem(
            name="truncation_depth_finite",
            ok=depth >= 1,
            detail=f"depth={depth} at eps={req.eps!r}",
        )
    )

    coarse = analytic.fixed_rule_steady_state_utility(params, u, rule, req.eps)
    fine = analytic.fixed_rule_steady_state_utility(params, u, rule, req.eps * 1e-4)
    checks.append(
        schemas.CheckItem(
            name="truncation_tail_within_eps",
            ok=abs(coarse - fine) <= req.eps,
            detail=f"|{coarse!r} - {fine!r}| = {abs(coarse - fine):.3e}",
        )
    )

    roundtrip = allocation.rule_from_dict(rule.to_dict())
    checks.append(
        schemas.CheckItem(
            name="serialization_roundtrip",
            ok=roundtrip == rule,
            detail=str(rule.to_dict()),
        )
    )

    return schemas.CheckResponse(
        version=__version__,
        inputs=req,
        ok=all(c.ok for c in checks),
        checks=checks,
    )
