"""Command-line interface.

    agprice tfp     --panel panel.csv --out indices.csv
    agprice fit     --obs costs.csv --numeraire machine --out coeffs.json
    agprice elast   --coeffs coeffs.json --shares mean --out elasticities.csv
    agprice policy  --scenario jowar.toml --out jowar.json
    agprice report  --config crops.toml --out reports/

Exit codes: 0 success, 1 validation or parse error, 2 computation error,
3 I/O error. Failures print one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from agprice import __version__
from agprice.data_model import CostObservation, PriceQuantityPanel, ShareVector
from agprice.elasticities import ElasticityReport, full_report, mean_shares, report_at_point
from agprice.errors import AgPriceError, ComputationError, ParseError, ValidationError
from agprice.fileio import (
    atomic_write,
    dumps_json,
    file_digest,
    format_number,
    parse_number,
    read_metadata,
    read_observations,
    read_panel,
    read_scenario,
    read_toml,
    sidecar_for,
)
from agprice.index_numbers import average_annual_growth, growth_links, tfp_indices
from agprice.policy import PolicyScenario, SspResult, evaluate_scenario, format_table
from agprice.translog import EstimationOptions, Estimator, TranslogCoefficients, fit

FORMAT_ENV = "AGPRICE_FORMAT"
TFP_HEADER = ("year", "input_index", "output_index", "tfp_index")

EXIT_OK, EXIT_VALIDATION, EXIT_COMPUTATION, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    command: str
    input_paths: dict[str, Path]
    output_path: str
    format: str
    options: dict = field(default_factory=dict)

    def check_inputs(self) -> None:
        for role, path in self.input_paths.items():
            if not path.is_file():
                raise FileNotFoundError(f"{role} file not found: {path}")


# -- stage computations ------------------------------------------------------

def tfp_table(panel: PriceQuantityPanel, mode: str = "chain", series: str = "links", base_year: int | None = None) -> dict:
    """Year rows of input/output/TFP values plus their column means.

    ``series="links"`` lists year-on-year growth (1 in the first year);
    ``series="index"`` lists the cumulative index rebased to ``base_year``.
    """
    inp, out, tfp = tfp_indices(panel, mode)
    if series == "links":
        if mode == "chain":
            links = growth_links(panel)
            cols = [
                [1.0] + [g.input_growth for g in links],
                [1.0] + [g.output_growth for g in links],
                [1.0] + [g.tfp_growth for g in links],
            ]
        else:
            cols = [[1.0] + (s.values[1:] / s.values[:-1]).tolist() for s in (inp, out, tfp)]
    elif series == "index":
        base = panel.years[0] if base_year is None else base_year
        if base not in panel.years:
            raise ValidationError(f"base year {base} not among panel years {panel.years}")
        cols = [(s.values / s[base]).tolist() for s in (inp, out, tfp)]
    else:
        raise ValidationError(f"unknown series {series!r}; use 'links' or 'index'")
    rows = [
        {"year": y, "input_index": a, "output_index": b, "tfp_index": c}
        for y, a, b, c in zip(panel.years, *cols)
    ]
    means = {name: average_annual_growth(col) for name, col in zip(TFP_HEADER[1:], cols)}
    return {"mode": mode, "series": series, "rows": rows, "mean": means}


def tfp_csv(table: dict, precision: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TFP_HEADER)
    for r in table["rows"]:
        w.writerow([r["year"]] + [format_number(r[c], precision) for c in TFP_HEADER[1:]])
    w.writerow(["mean"] + [format_number(table["mean"][c], precision) for c in TFP_HEADER[1:]])
    return buf.getvalue()


def _geometric_mean(values) -> float:
    return float(np.exp(np.mean(np.log(values))))


def fit_document(obs, report) -> dict:
    """JSON document for a fitted system, with a default evaluation point."""
    coeffs = report.coefficients
    return {
        "numeraire": coeffs.numeraire,
        "dropped_share_equation": report.dropped_share_equation,
        "estimator": report.estimator.value,
        "converged": report.converged,
        "iterations_used": report.iterations_used,
        "sample_size": report.sample_size,
        "residual_variance_per_equation": report.residual_variance_per_equation,
        "coefficients": coeffs.to_dict(),
        "evaluation_point": {
            "shares": mean_shares(obs).as_dict(),
            "prices": dict(zip(coeffs.inputs, [_geometric_mean([o.input_prices[i] for o in obs]) for i in range(len(coeffs.inputs))])),
            "output_level": _geometric_mean([o.output_level for o in obs]),
        },
    }


def _parse_assignments(spec: str, label: str) -> dict[str, float]:
    out = {}
    for part in spec.split(","):
        if "=" not in part:
            raise ValidationError(f"{label}: expected name=value pairs, got {part!r}")
        key, value = (s.strip() for s in part.split("=", 1))
        out[key] = parse_number(value, f"--{label}", None, key)
    return out


def load_coefficient_document(path) -> tuple[TranslogCoefficients, dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None
    coeffs = TranslogCoefficients.from_dict(doc["coefficients"] if "coefficients" in doc else doc)
    return coeffs, doc.get("evaluation_point", {})


def elasticity_report(
    coeffs: TranslogCoefficients,
    point: dict,
    shares: str = "mean",
    prices: str | None = None,
    output_level: float | None = None,
) -> ElasticityReport:
    """Resolve an evaluation point and compute elasticities there.

    ``shares`` is ``"mean"`` (stored sample means), ``"predicted"`` (shares
    the cost function implies at the evaluation prices and output) or an
    explicit ``name=value,...`` list.
    """
    if prices is not None:
        price_map = _parse_assignments(prices, "prices")
    else:
        price_map = point.get("prices") or {i: 1.0 for i in coeffs.inputs}
    y = output_level if output_level is not None else point.get("output_level", 1.0)
    try:
        w = np.array([float(price_map[i]) for i in coeffs.inputs])
    except KeyError as exc:
        raise ValidationError(f"no evaluation price for input {exc}") from None
    if shares == "predicted":
        return report_at_point(coeffs, w, y)
    if shares == "mean":
        if "shares" not in point:
            raise ValidationError("coefficient file has no stored mean shares; pass --shares explicitly")
        share_map = point["shares"]
    else:
        share_map = _parse_assignments(shares, "shares")
    try:
        sv = ShareVector(coeffs.inputs, np.array([float(share_map[i]) for i in coeffs.inputs]))
    except KeyError as exc:
        raise ValidationError(f"no evaluation share for input {exc}") from None
    return full_report(coeffs, sv, y, w)


def elasticity_csv(report: ElasticityReport, precision: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["matrix", "factor", *report.inputs, "output"])
    for i, name in enumerate(report.inputs):
        w.writerow(["allen", name, *(format_number(v, precision) for v in report.allen[i]), ""])
    for i, name in enumerate(report.inputs):
        w.writerow(
            ["price", name, *(format_number(v, precision) for v in report.price[i]),
             format_number(report.output_elasticity[i], precision)]
        )
    return buf.getvalue()


def policy_csv(result: SspResult, scenario: PolicyScenario, precision: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["item", "base_price", "terminal_price", "growth", "elasticity", "contribution"])
    for c in scenario.changes:
        n = c.item.name
        w.writerow([
            n, format_number(c.base_price, precision), format_number(c.terminal_price, precision),
            format_number(c.growth, precision), format_number(scenario.elasticities[n], precision),
            format_number(result.contributions[n], precision),
        ])
    w.writerow(["net_effect", "", "", "", "", format_number(result.net_effect_raw, precision)])
    w.writerow(["net_effect_applied", "", "", "", "", format_number(result.net_effect_applied, precision)])
    w.writerow(["was_clamped", "", "", "", "", str(result.was_clamped).lower()])
    w.writerow(["ssp", "", "", "", "", str(result.ssp)])
    return buf.getvalue()


# -- commands ----------------------------------------------------------------

def _emit(config: RunConfig, text: str) -> None:
    if config.output_path == "-":
        sys.stdout.write(text)
    else:
        atomic_write(config.output_path, text)


def _panel_and_meta(path: Path) -> tuple[PriceQuantityPanel, dict]:
    panel = read_panel(path)
    side = sidecar_for(path)
    return panel, (read_metadata(side) if side else {})


def cmd_tfp(config: RunConfig) -> None:
    panel, meta = _panel_and_meta(config.input_paths["panel"])
    base = int(meta["base_year"]) if "base_year" in meta else None
    table = tfp_table(panel, config.options["mode"], config.options["series"], base)
    if config.format == "json":
        _emit(config, dumps_json(table))
    else:
        _emit(config, tfp_csv(table, config.options["precision"]))


def cmd_fit(config: RunConfig) -> None:
    obs = read_observations(config.input_paths["obs"])
    order = config.options.get("inputs")
    if order:
        if sorted(order) != sorted(obs[0].inputs):
            raise ValidationError(f"--inputs {order} does not match file inputs {list(obs[0].inputs)}")
        idx = [obs[0].inputs.index(n) for n in order]
        obs = [
            CostObservation(
                o.total_cost, tuple(order), o.input_prices[idx], o.output_level,
                ShareVector(tuple(order), o.cost_shares.values[idx]), o.obs_id,
            )
            for o in obs
        ]
    options = EstimationOptions(
        max_iterations=config.options["max_iterations"],
        convergence_tol=config.options["tol"],
        numeraire=config.options.get("numeraire"),
        dropped_share_equation=config.options.get("dropped"),
        estimator=config.options["estimator"],
    )
    report = fit(obs, options)
    _emit(config, dumps_json(fit_document(obs, report)))


def cmd_elast(config: RunConfig) -> None:
    coeffs, point = load_coefficient_document(config.input_paths["coeffs"])
    report = elasticity_report(
        coeffs, point, config.options["shares"], config.options.get("prices"), config.options.get("output_level")
    )
    if config.format == "json":
        _emit(config, dumps_json(report.to_dict()))
    else:
        _emit(config, elasticity_csv(report, config.options["precision"]))


def cmd_policy(config: RunConfig) -> None:
    scenario = read_scenario(config.input_paths["scenario"])
    if config.options.get("bounds"):
        lo, hi = (parse_number(v, "--bounds", None, "bounds") for v in config.options["bounds"].split(","))
        d = scenario.to_dict()
        d["bounds"] = [lo, hi]
        scenario = PolicyScenario.from_dict(d)
    result = evaluate_scenario(scenario)
    if config.format == "csv":
        _emit(config, policy_csv(result, scenario, config.options["precision"]))
    else:
        _emit(config, dumps_json(result.to_dict()))
    table = format_table([result])
    if config.options.get("table"):
        atomic_write(config.options["table"], table)
    elif config.output_path != "-":
        sys.stdout.write(table)


@dataclass
class CropPlan:
    name: str
    scenario: PolicyScenario
    panel: PriceQuantityPanel | None = None
    panel_meta: dict = field(default_factory=dict)
    coeffs: TranslogCoefficients | None = None
    point: dict = field(default_factory=dict)
    shares: str = "mean"
    files: list = field(default_factory=list)


def load_report_plan(config_path: Path) -> tuple[list[CropPlan], dict]:
    """Parse and validate every file a report references before computing anything."""
    cfg = read_toml(config_path)
    root = config_path.parent
    crops = cfg.get("crops", [])
    if not crops:
        raise ValidationError(f"{config_path}: report configuration lists no crops")
    options = {"index_mode": "chain", "index_series": "links", **cfg.get("options", {})}
    plans = []
    for entry in crops:
        if "name" not in entry or "scenario" not in entry:
            raise ValidationError(f"{config_path}: every crop needs 'name' and 'scenario'")
        files = []

        def resolve(role, key):
            p = root / entry[key]
            if not p.is_file():
                raise FileNotFoundError(f"{role} file for crop {entry['name']!r} not found: {p}")
            files.append((role, p))
            return p

        plan = CropPlan(entry["name"], read_scenario(resolve("scenario", "scenario")), shares=entry.get("shares", "mean"))
        if "panel" in entry:
            plan.panel, plan.panel_meta = _panel_and_meta(resolve("panel", "panel"))
        if "coeffs" in entry:
            plan.coeffs, plan.point = load_coefficient_document(resolve("coeffs", "coeffs"))
        plan.files = files
        plans.append(plan)
    names = [p.name for p in plans]
    if len(set(names)) != len(names):
        raise ValidationError(f"{config_path}: duplicate crop names {names}")
    plans.sort(key=lambda p: p.name)
    return plans, options


def build_report(config_path: Path) -> tuple[dict, str]:
    plans, options = load_report_plan(config_path)
    inputs = [{"crop": "*", "role": "config", "file": config_path.name, "sha256": file_digest(config_path)}]
    blocks, results = [], []
    for plan in plans:
        inputs += [{"crop": plan.name, "role": r, "file": p.name, "sha256": file_digest(p)} for r, p in plan.files]
        block: dict = {"crop": plan.name}
        try:
            if plan.panel is not None:
                base = plan.panel_meta.get("base_year")
                block["tfp"] = tfp_table(
                    plan.panel, options["index_mode"], options["index_series"], int(base) if base else None
                )
            if plan.coeffs is not None:
                rep = elasticity_report(plan.coeffs, plan.point, plan.shares)
                block["elasticities"] = {**rep.to_dict(), "table": rep.table()}
            res = evaluate_scenario(plan.scenario)
        except ComputationError as exc:
            raise type(exc)(f"crop {plan.name!r}: {exc}") from exc
        block["policy"] = res.to_dict()
        results.append(res)
        blocks.append(block)
    bundle = {
        "provenance": {"tool": "agprice", "version": __version__, "options": options, "inputs": inputs},
        "crops": blocks,
    }
    return bundle, format_table(results)


def cmd_report(config: RunConfig) -> None:
    bundle, table = build_report(config.input_paths["config"])
    out = Path(config.output_path)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write(out / "report.json", dumps_json(bundle))
    atomic_write(out / "ssp_table.txt", table)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["crop", "msp_cacp", "swaminathan_price", "gap_cacp_vs_swaminathan_pct", "net_effect", "ssp", "gap_cacp_vs_ssp_pct", "was_clamped"])
    for b in bundle["crops"]:
        p = b["policy"]
        w.writerow([
            p["crop"], format_number(p["msp_cacp"], "0"), p["swaminathan_price"],
            format_number(p["gap_cacp_vs_swaminathan_pct"], "2"), format_number(p["net_effect_applied"], "2"),
            p["ssp"], format_number(p["gap_cacp_vs_ssp_pct"], "2"), str(p["was_clamped"]).lower(),
        ])
    atomic_write(out / "report.csv", buf.getvalue())


COMMANDS = {"tfp": cmd_tfp, "fit": cmd_fit, "elast": cmd_elast, "policy": cmd_policy, "report": cmd_report}


def build_parser() -> argparse.ArgumentParser:
    default_format = os.environ.get(FORMAT_ENV)
    parser = _Parser(prog="agprice", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"agprice {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, default_fmt):
        p.add_argument("--out", default="-", help="output path ('-' for stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=default_format or default_fmt)
        p.add_argument("--precision", default="2", help="decimals in CSV output, or 'full'")

    p = sub.add_parser("tfp", help="Tornqvist-Theil input, output and TFP indices")
    p.add_argument("--panel", required=True, type=Path)
    p.add_argument("--mode", choices=("chain", "fixed"), default="chain")
    p.add_argument("--series", choices=("links", "index"), default="links")
    common(p, "csv")

    p = sub.add_parser("fit", help="estimate a translog cost system")
    p.add_argument("--obs", required=True, type=Path)
    p.add_argument("--numeraire")
    p.add_argument("--inputs", help="comma-separated input order")
    p.add_argument("--dropped", help="share equation to drop (default: numeraire)")
    p.add_argument("--estimator", choices=[e.value for e in Estimator], default=Estimator.ITERATED_FGLS.value)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-8)
    common(p, "json")

    p = sub.add_parser("elast", help="Allen and price elasticities from fitted coefficients")
    p.add_argument("--coeffs", required=True, type=Path)
    p.add_argument("--shares", default="mean", help="'mean', 'predicted' or name=value,...")
    p.add_argument("--prices", help="evaluation prices as name=value,...")
    p.add_argument("--output-level", type=float)
    common(p, "csv")

    p = sub.add_parser("policy", help="net effect and strategic support price for one crop")
    p.add_argument("--scenario", required=True, type=Path)
    p.add_argument("--bounds", help="net-effect bounds 'lower,upper' (write as --bounds=-2,0.8)")
    p.add_argument("--table", help="also write the comparison table to this path")
    common(p, "json")

    p = sub.add_parser("report", help="combined multi-crop report")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", required=True)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    inputs = {
        "tfp": lambda: {"panel": args.panel},
        "fit": lambda: {"obs": args.obs},
        "elast": lambda: {"coeffs": args.coeffs},
        "policy": lambda: {"scenario": args.scenario},
        "report": lambda: {"config": args.config},
    }[args.command]()
    opts = {k: v for k, v in vars(args).items() if k not in ("command", "out", "format") and v is not None}
    if args.command == "fit":
        opts["max_iterations"] = opts.pop("max_iter")
        if args.inputs:
            opts["inputs"] = [s.strip() for s in args.inputs.split(",")]
    precision = opts.get("precision", "2")
    if precision != "full" and not str(precision).isdigit():
        raise ValidationError(f"--precision must be a number of decimals or 'full', got {precision!r}")
    return RunConfig(args.command, inputs, args.out, getattr(args, "format", "json"), opts)


def _error_line(command: str | None, category: str, exc: BaseException) -> str:
    return json.dumps(
        {"status": "error", "category": category, "error": type(exc).__name__, "command": command, "message": str(exc)}
    )


def run(config: RunConfig) -> int:
    try:
        config.check_inputs()
        COMMANDS[config.command](config)
    except ValidationError as exc:
        print(_error_line(config.command, "validation", exc), file=sys.stderr)
        return EXIT_VALIDATION
    except (ComputationError, AgPriceError) as exc:
        print(_error_line(config.command, "computation", exc), file=sys.stderr)
        return EXIT_COMPUTATION
    except OSError as exc:
        print(_error_line(config.command, "io", exc), file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = config_from_args(args)
    except ValidationError as exc:
        print(_error_line(None, "validation", exc), file=sys.stderr)
        return EXIT_VALIDATION
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
