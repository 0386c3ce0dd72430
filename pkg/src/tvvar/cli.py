"""Command-line client for the estimation service.

Each subcommand posts to the HTTP API (an external server via ``--server``,
or an in-process instance by default) and writes plot-ready artifacts:
long-format CSVs for surfaces, JSON for reports. Every emitted file embeds
the request's config hash and seed, so identical configurations produce
byte-identical outputs.

Exit codes: 0 success, 2 data/usage error, 3 numerical failure.
"""

import json
import sys

import click

from .data import dump_json, load_csv

EXIT_DATA = 2
EXIT_NUMERICAL = 3


def _request(server, path, payload):
    import httpx

    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.post(path, json=payload)

    import asyncio

    from .service import app

    async def _call():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://service", timeout=None
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(_call())


def _post(ctx, path, payload):
    """POST and return the parsed body, translating errors to exit codes."""
    resp = _request(ctx.obj.get("server"), path, payload)
    if resp.status_code == 200:
        return resp.json()
    try:
        body = resp.json()
    except ValueError:
        body = {"error": resp.text, "kind": "HTTPError"}
    kind = body.get("kind", "")
    message = body.get("error") or json.dumps(body.get("detail", body))
    click.echo(f"error ({kind or resp.status_code}): {message}", err=True)
    if resp.status_code == 422 and kind:
        sys.exit(EXIT_NUMERICAL)
    sys.exit(EXIT_DATA)


def _load_panel(path, presample):
    try:
        panel, _ = load_csv(path, presample=presample)
    except Exception as exc:
        click.echo(f"error ({type(exc).__name__}): {exc}", err=True)
        sys.exit(EXIT_DATA)
    return {
        "rows": panel.data.tolist(),
        "columns": list(panel.labels) if panel.labels else None,
        "presample": presample,
    }


def _parse_h(value):
    if value is None or value == "cv":
        return None
    try:
        return float(value)
    except ValueError:
        raise click.BadParameter("bandwidth must be a positive number or 'cv'")


def _write_csv(path, records, fieldnames, provenance):
    """Long-format CSV with a leading provenance comment."""
    import csv as _csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# " + " ".join(f"{k}={v}" for k, v in sorted(provenance.items())) + "\n")
        writer = _csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for rec in records:
            writer.writerow({k: rec.get(k) for k in fieldnames})
    click.echo(f"wrote {path}", err=True)


def _write_json(path, obj):
    dump_json(obj, path)
    click.echo(f"wrote {path}", err=True)


def _config_file_defaults(ctx, param, value):
    """Seed option defaults from a JSON config file, CLI flags win.

    The file maps subcommand names to option defaults, e.g.
    ``{"fit": {"input_path": "data.csv", "p": 2}}``.
    """
    if value is None:
        return None
    with open(value, encoding="utf-8") as fh:
        config = json.load(fh)
    ctx.default_map = dict(config)
    return value


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; defaults to in-process.")
@click.option("--config", default=None, metavar="FILE", callback=_config_file_defaults,
              is_eager=True, expose_value=False,
              help="JSON file of option defaults for the subcommand.")
@click.pass_context
def main(ctx, server):
    """Time-varying VAR estimation, impulse responses, and stability tests."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command("select-lag")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--presample", default=0, show_default=True)
@click.option("--max-lag", default=6, show_default=True)
@click.option("--output", default=None, type=click.Path(), help="JSON report path.")
@click.pass_context
def select_lag_cmd(ctx, input_path, presample, max_lag, output):
    """Choose the lag order by the information criterion."""
    panel = _load_panel(input_path, presample)
    body = _post(ctx, "/select-lag", {"panel": panel, "max_lag": max_lag})
    click.echo(f"chosen lag order: {body['chosen']}")
    if output:
        _write_json(output, body)


@main.command("bandwidth")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--presample", default=0, show_default=True)
@click.option("--p", "p", required=True, type=int, help="Lag order.")
@click.option("--h-grid", default=None, help="Comma-separated candidate bandwidths.")
@click.option("--output", default=None, type=click.Path(), help="JSON report path.")
@click.pass_context
def bandwidth_cmd(ctx, input_path, presample, p, h_grid, output):
    """Select the bandwidth by leave-one-out cross-validation."""
    panel = _load_panel(input_path, presample)
    payload = {"panel": panel, "p": p}
    if h_grid:
        payload["h_grid"] = [float(v) for v in h_grid.split(",")]
    body = _post(ctx, "/bandwidth", payload)
    click.echo(f"chosen bandwidth: {body['chosen']:.6g}")
    if output:
        _write_json(output, body)


@main.command("fit")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--presample", default=0, show_default=True)
@click.option("--p", "p", required=True, type=int, help="Lag order.")
@click.option("--h", default="cv", show_default=True,
              help="Bandwidth in (0,1], or 'cv' for cross-validation.")
@click.option("--grid-size", default=None, type=int,
              help="Evaluate on a uniform grid instead of the sample points.")
@click.option("--level", default=0.95, show_default=True)
@click.option("--no-se", is_flag=True, help="Skip standard errors.")
@click.option("--output", default="fit_estimates.csv", show_default=True,
              type=click.Path(), help="Long-format estimates CSV.")
@click.option("--summary", default=None, type=click.Path(), help="JSON summary path.")
@click.pass_context
def fit_cmd(ctx, input_path, presample, p, h, grid_size, level, no_se, output, summary):
    """Estimate the time-varying coefficient and covariance paths."""
    panel = _load_panel(input_path, presample)
    payload = {
        "panel": panel, "p": p, "h": _parse_h(h), "grid_size": grid_size,
        "level": level, "with_se": not no_se,
    }
    body = _post(ctx, "/fit", payload)
    click.echo(
        f"fitted p={body['p']} h={body['h']:.6g}"
        f"{' (cv)' if body['h_was_cv'] else ''} rss={body['rss']:.6g}"
    )
    provenance = {"config_hash": body["config_hash"], "seed": "n/a"}
    _write_csv(output, body["estimates"],
               ["tau", "quantity", "row", "col", "value", "se"], provenance)
    if summary:
        _write_json(summary, {k: v for k, v in body.items() if k != "estimates"})


@main.command("irf")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--presample", default=0, show_default=True)
@click.option("--p", "p", required=True, type=int, help="Lag order.")
@click.option("--h", default="cv", show_default=True)
@click.option("--scheme", default="short_run", show_default=True,
              type=click.Choice(["short_run", "long_run"]))
@click.option("--horizons", default=20, show_default=True)
@click.option("--grid-size", default=None, type=int)
@click.option("--cumulative", is_flag=True)
@click.option("--no-se", is_flag=True)
@click.option("--output", default="irf_surface.csv", show_default=True, type=click.Path())
@click.option("--summary", default=None, type=click.Path())
@click.pass_context
def irf_cmd(ctx, input_path, presample, p, h, scheme, horizons, grid_size,
            cumulative, no_se, output, summary):
    """Structural impulse responses with delta-method standard errors."""
    panel = _load_panel(input_path, presample)
    payload = {
        "panel": panel, "p": p, "h": _parse_h(h), "scheme": scheme,
        "horizons": horizons, "grid_size": grid_size,
        "with_se": not no_se, "cumulative": cumulative,
    }
    body = _post(ctx, "/irf", payload)
    click.echo(f"irf scheme={scheme} p={body['p']} h={body['h']:.6g} J={horizons}")
    provenance = {"config_hash": body["config_hash"], "seed": "n/a"}
    fields = ["tau", "horizon", "row", "col", "value", "se"]
    _write_csv(output, body["responses"], fields, provenance)
    if cumulative and body.get("cumulative"):
        cum_path = output.replace(".csv", "_cumulative.csv")
        _write_csv(cum_path, body["cumulative"], fields, provenance)
    if summary:
        _write_json(summary, {k: v for k, v in body.items()
                              if k not in ("responses", "cumulative")})


@main.command("test-stability")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--presample", default=0, show_default=True)
@click.option("--p", "p", required=True, type=int, help="Lag order.")
@click.option("--h", default="cv", show_default=True)
@click.option("--block", default="all", show_default=True,
              help="'all', 'intercept', 'lags', or 'A1'..'Ap'.")
@click.option("--B", "n_boot", default=199, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--output", default=None, type=click.Path(), help="JSON report path.")
@click.pass_context
def stability_cmd(ctx, input_path, presample, p, h, block, n_boot, seed, output):
    """Bootstrap-calibrated test of parameter constancy."""
    panel = _load_panel(input_path, presample)
    payload = {
        "panel": panel, "p": p, "h": _parse_h(h), "block": block,
        "B": n_boot, "seed": seed,
    }
    body = _post(ctx, "/test-stability", payload)
    click.echo(
        f"block={block} q_hat={body['q_hat']:.6g} "
        f"q_star={body['q_star']:.6g} p_value={body['p_value']:.4g}"
    )
    if output:
        _write_json(output, body)


@main.command("simulate")
@click.option("--table", default=None, type=click.IntRange(1, 3),
              help="Run a Monte Carlo table instead of emitting one panel.")
@click.option("--reps", default=200, show_default=True)
@click.option("--dgp", default="smooth", show_default=True,
              type=click.Choice(["smooth", "local"]))
@click.option("--T", "n_obs", default=400, show_default=True)
@click.option("--b", "b_scale", default=0.0, show_default=True,
              help="Deviation scale for the 'local' design.")
@click.option("--seed", default=0, show_default=True)
@click.option("--B", "n_boot", default=199, show_default=True,
              help="Bootstrap replicates (table 3 only).")
@click.option("--workers", default=None, type=int)
@click.option("--output", default="simulated.csv", show_default=True, type=click.Path())
@click.pass_context
def simulate_cmd(ctx, table, reps, dgp, n_obs, b_scale, seed, n_boot, workers, output):
    """Simulate a panel, or reproduce a Monte Carlo summary table."""
    if table is not None:
        from .data import config_hash
        from .simulation import run_table1, run_table2, run_table3

        click.echo(f"running table {table} with {reps} replications...", err=True)
        if table == 1:
            result = run_table1(reps=reps, seed=seed, workers=workers)
        elif table == 2:
            result = run_table2(reps=reps, seed=seed, workers=workers)
        else:
            result = run_table3(reps=reps, seed=seed, B=n_boot, workers=workers)
        provenance = {
            "config_hash": config_hash({"table": table, "reps": reps,
                                        "seed": seed, "B": n_boot}),
            "seed": seed,
        }
        _write_csv(output, result.table.to_dict("records"),
                   list(result.table.columns), provenance)
        click.echo(result.table.to_string(index=False))
        return

    payload = {"dgp": dgp, "T": n_obs, "seed": seed, "b": b_scale}
    body = _post(ctx, "/simulate", payload)
    rows = [dict(zip(body["columns"], row)) for row in body["rows"]]
    provenance = {"config_hash": body["config_hash"], "seed": seed,
                  "presample": body["presample"]}
    _write_csv(output, rows, body["columns"], provenance)


@main.command("diagnose")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--presample", default=0, show_default=True)
@click.option("--p", "p", required=True, type=int, help="Lag order.")
@click.option("--h", default="cv", show_default=True)
@click.option("--order", default=1, show_default=True)
@click.option("--output", default=None, type=click.Path())
@click.pass_context
def diagnose_cmd(ctx, input_path, presample, p, h, order, output):
    """Serial-correlation check on standardized innovations."""
    panel = _load_panel(input_path, presample)
    payload = {"panel": panel, "p": p, "h": _parse_h(h), "order": order}
    body = _post(ctx, "/diagnostics", payload)
    click.echo(f"LM statistic={body['statistic']:.6g} df={body['df']} "
               f"p_value={body['p_value']:.4g}")
    if output:
        _write_json(output, body)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve_cmd(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
