"""Command line client for the service.

Every subcommand builds a request model, dispatches it (in process by
default, over HTTP when --server is given), and renders the response. No
math lives here. Exit codes: 0 success, 2 bad input, 3 invalid rule.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path
from typing import IO, Callable

import click
import httpx
from pydantic import BaseModel, ValidationError

from .core import ParameterError, PonziRuleError
from .service import handlers, schemas

EXIT_BAD_INPUT = 2
EXIT_INVALID_RULE = 3

_ROUTES: dict[str, tuple[Callable, type[BaseModel]]] = {
    "/optimize": (handlers.handle_optimize, schemas.OptimizeResponse),
    "/evaluate": (handlers.handle_evaluate, schemas.EvaluateResponse),
    "/simulate": (handlers.handle_simulate, schemas.SimulateResponse),
    "/sweep": (handlers.handle_sweep, schemas.SweepResponse),
    "/payoff": (handlers.handle_payoff, schemas.PayoffResponse),
    "/check": (handlers.handle_check, schemas.CheckResponse),
}


class RemoteError(Exception):
    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code


def _dispatch(server: str | None, path: str, req: BaseModel) -> BaseModel:
    handler, response_model = _ROUTES[path]
    if server is None:
        return handler(req)
    with httpx.Client(base_url=server, timeout=3600.0) as client:
        resp = client.post(path, json=req.model_dump(mode="json"))
    if resp.status_code >= 400:
        try:
            body = resp.json()
        except ValueError:
            body = {}
        if isinstance(body, dict) and "error" in body:
            raise RemoteError(body["error"], body.get("message", resp.text))
        raise RemoteError("bad_input", resp.text)
    return response_model.model_validate(resp.json())


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn: Callable[[], None]) -> None:
    try:
        fn()
    except PonziRuleError as exc:
        _fail(EXIT_INVALID_RULE, str(exc))
    except RemoteError as exc:
        _fail(
            EXIT_INVALID_RULE if exc.code == "invalid_rule" else EXIT_BAD_INPUT,
            str(exc),
        )
    except (ParameterError, ValidationError) as exc:
        _fail(EXIT_BAD_INPUT, str(exc))
    except (OSError, json.JSONDecodeError) as exc:
        _fail(EXIT_BAD_INPUT, str(exc))
    except httpx.HTTPError as exc:
        _fail(EXIT_BAD_INPUT, f"server unreachable: {exc}")


def _parse_json_arg(text: str, what: str) -> dict:
    """Inline JSON, or @path to read it from a file."""
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    value = json.loads(text)
    if not isinstance(value, dict):
        raise ParameterError(f"{what} must be a JSON object, got {value!r}")
    return value


def _utility_payload(alpha: float | None, utility: str | None) -> dict:
    if (alpha is None) == (utility is None):
        raise ParameterError("give exactly one of --alpha or --utility")
    if alpha is not None:
        return {"kind": "power", "alpha": alpha}
    return _parse_json_arg(utility, "utility")


def _echo_model(model: BaseModel) -> None:
    click.echo(json.dumps(model.model_dump(mode="json"), indent=2))


def _write_csv(target: str | None, header: list[str], rows: list[list]) -> None:
    def emit(fp: IO[str]) -> None:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)

    if target is None:
        emit(sys.stdout)
    else:
        with open(target, "w", newline="") as fp:
            emit(fp)


def _num(value: float | None) -> str:
    return "" if value is None else repr(value)


_server_option = click.option(
    "--server", default=None, metavar="URL", help="POST to a running service instead of computing in process."
)
_env_options = [
    click.option("--delta", default=0.999, show_default=True, help="Per-share discount factor."),
    click.option("--block-reward", default=1000.0, show_default=True, help="Reward per block."),
    click.option("--share-prob", default=0.001, show_default=True, help="Per-share block probability."),
]


def _with(options: list) -> Callable:
    def wrap(fn: Callable) -> Callable:
        for opt in reversed(options):
            fn = opt(fn)
        return fn

    return wrap


@click.group()
@click.version_option()
def main() -> None:
    """Pool reward schedules: optimal rules, evaluation, simulation."""


@main.command()
@click.option("--alpha", required=True, type=float, help="Risk aversion exponent in (0, 1].")
@_with(_env_options)
@_server_option
def optimize(alpha: float, delta: float, block_reward: float, share_prob: float, server: str | None) -> None:
    """Closed-form optimal PPLNS window and geometric rule."""

    def run() -> None:
        req = schemas.OptimizeRequest(
            alpha=alpha, delta=delta, block_reward=block_reward, share_prob=share_prob
        )
        _echo_model(_dispatch(server, "/optimize", req))

    _guarded(run)


@main.command()
@click.option("--rule", required=True, help="Rule JSON, or @path to a JSON file.")
@click.option("--alpha", type=float, default=None, help="Power utility exponent.")
@click.option("--utility", default=None, help="Utility JSON, e.g. '{\"kind\": \"log_shifted\"}'.")
@click.option("--eps", default=1e-12, show_default=True, help="Truncation tolerance.")
@_with(_env_options)
@_server_option
def evaluate(rule: str, alpha: float | None, utility: str | None, eps: float,
             delta: float, block_reward: float, share_prob: float, server: str | None) -> None:
    """Steady-state utility, mass, and truncation depth of a rule."""

    def run() -> None:
        req = schemas.EvaluateRequest.model_validate(
            {
                "rule": _parse_json_arg(rule, "rule"),
                "utility": _utility_payload(alpha, utility),
                "delta": delta,
                "block_reward": block_reward,
                "share_prob": share_prob,
                "eps": eps,
            }
        )
        _echo_model(_dispatch(server, "/evaluate", req))

    _guarded(run)


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON file of request fields; flags override it.")
@click.option("--rule", default=None, help="Rule JSON, @path, or '{\"kind\": \"proportional\"}'.")
@click.option("--alpha", type=float, default=None, help="Power utility exponent.")
@click.option("--utility", default=None, help="Utility JSON.")
@click.option("--delta", type=float, default=None)
@click.option("--block-reward", type=float, default=None)
@click.option("--share-prob", type=float, default=None)
@click.option("--num-shares", type=int, default=None)
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--report-k", type=int, default=None)
@click.option("--steady-window", type=float, default=None)
@click.option("--per-k-out", type=click.Path(), default=None, help="Write the per-share CSV here.")
@click.option("--report-out", type=click.Path(), default=None, help="Write the JSON report here.")
@_server_option
def simulate(config_path: str | None, rule: str | None, alpha: float | None, utility: str | None,
             delta: float | None, block_reward: float | None, share_prob: float | None,
             num_shares: int | None, trials: int | None, seed: int | None,
             report_k: int | None, steady_window: float | None,
             per_k_out: str | None, report_out: str | None, server: str | None) -> None:
    """Monte Carlo estimate of per-share value for a rule or proportional pay."""

    def run() -> None:
        payload: dict = {}
        if config_path is not None:
            payload.update(_parse_json_arg("@" + config_path, "config"))
        if rule is not None:
            payload["rule"] = _parse_json_arg(rule, "rule")
        if alpha is not None or utility is not None:
            payload["utility"] = _utility_payload(alpha, utility)
        overrides = {
            "delta": delta,
            "block_reward": block_reward,
            "share_prob": share_prob,
            "num_shares": num_shares,
            "trials": trials,
            "seed": seed,
            "report_k": report_k,
            "steady_window": steady_window,
        }
        payload.update({k: v for k, v in overrides.items() if v is not None})
        req = schemas.SimulateRequest.model_validate(payload)
        resp = _dispatch(server, "/simulate", req)
        if per_k_out is not None:
            _write_csv(
                per_k_out,
                ["k", "mean", "se"],
                [[row.k, repr(row.mean), repr(row.se)] for row in resp.per_k],
            )
        if report_out is not None:
            Path(report_out).write_text(
                json.dumps(resp.model_dump(mode="json"), indent=2) + "\n"
            )
        _echo_model(resp)

    _guarded(run)


@main.command()
@click.option("--alphas", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9",
              show_default=True, help="Comma-separated risk exponents.")
@click.option("--simulate", "do_simulate", is_flag=True, default=False,
              help="Add simulated columns (slower).")
@click.option("--num-shares", default=120_000, show_default=True)
@click.option("--trials", default=4, show_default=True)
@click.option("--seed", default=12345, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="CSV destination; stdout if omitted.")
@_with(_env_options)
@_server_option
def sweep(alphas: str, do_simulate: bool, num_shares: int, trials: int, seed: int,
          out: str | None, delta: float, block_reward: float, share_prob: float,
          server: str | None) -> None:
    """Analytic (and optionally simulated) utilities per scheme across alphas."""

    def run() -> None:
        try:
            alpha_list = [float(tok) for tok in alphas.split(",") if tok.strip()]
        except ValueError as exc:
            raise ParameterError(f"bad --alphas value: {exc}") from None
        req = schemas.SweepRequest(
            alphas=alpha_list,
            delta=delta,
            block_reward=block_reward,
            share_prob=share_prob,
            simulate=do_simulate,
            num_shares=num_shares,
            trials=trials,
            seed=seed,
        )
        resp = _dispatch(server, "/sweep", req)
        _write_csv(
            out,
            ["alpha", "scheme", "param", "analytic_utility", "sim_utility", "sim_se"],
            [
                [repr(r.alpha), r.scheme, r.param, repr(r.analytic_utility),
                 _num(r.sim_utility), _num(r.sim_se)]
                for r in resp.rows
            ],
        )
        if out is not None:
            meta = {"version": resp.version, "seed": resp.seed, "rows": len(resp.rows), "out": out}
            click.echo(json.dumps(meta, indent=2))

    _guarded(run)


@main.command()
@click.option("--alpha", required=True, type=float, help="Risk aversion exponent in (0, 1).")
@click.option("--n", type=int, default=None, help="PPLNS window; optimal when omitted.")
@click.option("--max-offset", default=32, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="CSV destination; stdout if omitted.")
@_with(_env_options)
@_server_option
def payoff(alpha: float, n: int | None, max_offset: int, out: str | None,
           delta: float, block_reward: float, share_prob: float, server: str | None) -> None:
    """Side-by-side geometric vs PPLNS payout weights per offset."""

    def run() -> None:
        req = schemas.PayoffRequest(
            alpha=alpha, n=n, max_offset=max_offset,
            delta=delta, block_reward=block_reward, share_prob=share_prob,
        )
        resp = _dispatch(server, "/payoff", req)
        _write_csv(
            out,
            ["offset", "geometric_weight", "pplns_weight"],
            [[r.offset, repr(r.geometric_weight), repr(r.pplns_weight)] for r in resp.rows],
        )
        if out is not None:
            meta = {"version": resp.version, "n": resp.n, "rows": len(resp.rows), "out": out}
            click.echo(json.dumps(meta, indent=2))

    _guarded(run)


@main.command()
@click.option("--rule", required=True, help="Rule JSON, or @path to a JSON file.")
@click.option("--alpha", type=float, default=None, help="Power utility exponent.")
@click.option("--utility", default=None, help="Utility JSON.")
@click.option("--eps", default=1e-6, show_default=True, help="Tolerance for the tail check.")
@_with(_env_options)
@_server_option
def check(rule: str, alpha: float | None, utility: str | None, eps: float,
          delta: float, block_reward: float, share_prob: float, server: str | None) -> None:
    """Run the invariant suite against a rule; exit 3 if it fails."""

    def run() -> None:
        payload: dict = {
            "rule": _parse_json_arg(rule, "rule"),
            "delta": delta,
            "block_reward": block_reward,
            "share_prob": share_prob,
            "eps": eps,
        }
        if alpha is not None or utility is not None:
            payload["utility"] = _utility_payload(alpha, utility)
        req = schemas.CheckRequest.model_validate(payload)
        resp = _dispatch(server, "/check", req)
        _echo_model(resp)
        if not resp.ok:
            sys.exit(EXIT_INVALID_RULE)

    _guarded(run)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
