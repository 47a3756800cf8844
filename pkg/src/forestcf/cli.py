"""Command-line interface.

Subcommands cover the whole pipeline: data-summary, train, predict,
export-cnf, sat, explain, attribute, stability, report and serve. Every
command that emits JSON uses the same serializers as the HTTP service, so
payloads match byte for byte.
"""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from . import attribution as attr_mod
from . import counterfactual as cf_mod
from . import data as data_mod
from . import encoding as enc_mod
from . import forest as forest_mod
from . import report as report_mod
from . import sat as sat_mod
from . import train as train_mod
from .jsonutil import to_json


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _load_instance(path: str, n_features: int) -> np.ndarray:
    with open(path) as fh:
        doc = json.load(fh)
    values = doc["values"] if isinstance(doc, dict) else doc
    return forest_mod.check_instance(values, n_features)


def _parse_frozen(spec: str | None, forest: forest_mod.Forest) -> frozenset:
    """Comma-separated feature indices or names."""
    if not spec:
        return frozenset()
    out = set()
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        if item.lstrip("-").isdigit():
            out.add(int(item))
        elif item in forest.feature_names:
            out.add(forest.feature_names.index(item))
        else:
            raise click.BadParameter(f"unknown feature {item!r}")
    return frozenset(out)


@click.group()
def main() -> None:
    """SAT-backed counterfactual explanations for random forests."""


@main.command("data-summary")
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--label", "label_column", required=True)
def data_summary(data_path: str, label_column: str) -> None:
    """Print a JSON overview of a CSV dataset."""
    d = data_mod.load_csv(data_path, label_column)
    _write(to_json(data_mod.summarize(d)), None)


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--label", "label_column", required=True)
@click.option("--out", "model_out", required=True, type=click.Path())
@click.option("--trees", default=10, show_default=True)
@click.option("--depth", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--split-fraction", default=0.5, show_default=True)
@click.option("--bootstrap/--no-bootstrap", default=True, show_default=True)
@click.option("--features-per-split", default=None, type=int)
@click.option("--min-samples-leaf", default=1, show_default=True)
@click.option("--train-out", default=None, type=click.Path(),
              help="Write the standardized training partition as CSV.")
@click.option("--test-out", default=None, type=click.Path(),
              help="Write the standardized test partition as CSV.")
def train(data_path: str, label_column: str, model_out: str, trees: int, depth: int,
          seed: int, split_fraction: float, bootstrap: bool,
          features_per_split: int | None, min_samples_leaf: int,
          train_out: str | None, test_out: str | None) -> None:
    """Train a forest on a CSV and save the model JSON."""
    raw = data_mod.load_csv(data_path, label_column)
    train_d, test_d = data_mod.split(raw, split_fraction, seed)
    cfg = train_mod.TrainConfig(n_trees=trees, max_depth=depth, bootstrap=bootstrap,
                                features_per_split=features_per_split, seed=seed,
                                min_samples_leaf=min_samples_leaf)
    forest = train_mod.train_forest(train_d, cfg)
    forest_mod.save_model(forest, model_out)
    if train_out:
        data_mod.save_csv(train_d, train_out, label_column, as_class_indices=True)
    if test_out:
        data_mod.save_csv(test_d, test_out, label_column, as_class_indices=True)
    summary = {
        "model": model_out,
        "n_trees": forest.n_trees,
        "max_depth": depth,
        "seed": seed,
        "class_order": list(raw.label_names),
        "train_rows": train_d.n_samples,
        "test_rows": test_d.n_samples,
        "train_accuracy": train_mod.accuracy(forest, train_d),
        "test_accuracy": train_mod.accuracy(forest, test_d),
    }
    _write(to_json(summary), None)


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True))
def predict(model_path: str, instance_path: str) -> None:
    """Predict one instance (JSON file with a \"values\" array)."""
    forest = forest_mod.load_model(model_path)
    x = _load_instance(instance_path, forest.n_features)
    payload = {
        "prediction": forest_mod.predict_forest(forest, x),
        "votes": forest_mod.vote_counts(forest, x),
    }
    _write(to_json(payload), None)


@main.command("export-cnf")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True))
@click.option("--delta", default=0.05, show_default=True)
@click.option("--freeze", default=None, help="Comma-separated feature indices or names.")
@click.option("--extrapolate", is_flag=True,
              help="Let the box exceed the training feature ranges.")
@click.option("--out", default=None, type=click.Path())
def export_cnf(model_path: str, instance_path: str, delta: float, freeze: str | None,
               extrapolate: bool, out: str | None) -> None:
    """Encode a flip query as DIMACS CNF."""
    forest = forest_mod.load_model(model_path)
    x = _load_instance(instance_path, forest.n_features)
    tmap = enc_mod.extract_thresholds(forest)
    box = enc_mod.make_box(x, delta, forest, frozen=_parse_frozen(freeze, forest),
                           clip=not extrapolate)
    formula = enc_mod.encode(forest, tmap, box,
                             forbidden_class=forest_mod.predict_forest(forest, x))
    _write(enc_mod.to_dimacs(formula), out)


@main.command()
@click.option("--cnf", "cnf_path", required=True, type=click.Path(exists=True))
@click.option("--max-conflicts", default=None, type=int)
def sat(cnf_path: str, max_conflicts: int | None) -> None:
    """Solve a DIMACS file; print SAT/UNSAT and the satisfying assignment."""
    with open(cnf_path) as fh:
        formula = enc_mod.parse_dimacs(fh.read())
    try:
        result = sat_mod.solve(formula, max_conflicts=max_conflicts)
    except sat_mod.BudgetExhausted as exc:
        click.echo(f"UNKNOWN (budget exhausted after {exc.stats.conflicts} conflicts)")
        raise SystemExit(2)
    if result.sat:
        click.echo("SAT")
        lits = [v if result.assignment[v - 1] else -v for v in range(1, formula.n_vars + 1)]
        click.echo("v " + " ".join(str(l) for l in lits) + " 0")
    else:
        click.echo("UNSAT")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True))
@click.option("--delta0", default=0.01, show_default=True)
@click.option("--growth", default=1.01, show_default=True)
@click.option("--freeze", default=None, help="Comma-separated feature indices or names.")
@click.option("--epsilon", default=1e-6, show_default=True)
@click.option("--max-delta", default=1.0, show_default=True)
@click.option("--extrapolate", is_flag=True)
@click.option("--out", default=None, type=click.Path())
def explain(model_path: str, instance_path: str, delta0: float, growth: float,
            freeze: str | None, epsilon: float, max_delta: float,
            extrapolate: bool, out: str | None) -> None:
    """Find the minimal-distance counterfactual for one instance."""
    forest = forest_mod.load_model(model_path)
    x = _load_instance(instance_path, forest.n_features)
    query = cf_mod.CounterfactualQuery(
        instance=tuple(x), delta0=delta0, growth=growth,
        frozen_features=_parse_frozen(freeze, forest),
        epsilon_fraction=epsilon, max_delta=max_delta,
        clip_to_ranges=not extrapolate)
    try:
        result = cf_mod.find_min_counterfactual(forest, query)
    except cf_mod.Unreachable as exc:
        raise click.ClickException(str(exc))
    _write(to_json(cf_mod.result_to_dict(result)), out)


def attribute_instance(forest: forest_mod.Forest, x, method: str, seed: int,
                       background: np.ndarray, n_permutations: int,
                       n_samples: int, kernel_width: float | None) -> dict:
    """Single-instance attribution shared by the CLI and the service."""
    if method == "shapley-exact":
        result = attr_mod.shapley_exact(forest, x, background)
    elif method == "shapley-mc":
        result = attr_mod.shapley_mc(forest, x, background, n_permutations, seed)
    elif method == "lime":
        feature_std = background.std(axis=0, ddof=0)
        result = attr_mod.lime_lite(forest, x, n_samples, kernel_width, seed,
                                    feature_std)
    else:
        raise ValueError(f"unknown method {method!r}")
    return attr_mod.result_to_dict(result)


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--data", "data_path", default=None, type=click.Path(exists=True),
              help="CSV of instances to explain (model units).")
@click.option("--instance", "instance_path", default=None, type=click.Path(exists=True),
              help="Single instance JSON instead of --data.")
@click.option("--label", "label_column", default="label", show_default=True)
@click.option("--method", default="shapley-mc", show_default=True,
              type=click.Choice(["shapley-exact", "shapley-mc", "lime"]))
@click.option("--background", "background_path", default=None, type=click.Path(exists=True),
              help="CSV supplying the background distribution (defaults to --data).")
@click.option("--seed", default=0, show_default=True)
@click.option("--n-permutations", default=200, show_default=True)
@click.option("--n-samples", default=1000, show_default=True)
@click.option("--kernel-width", default=None, type=float)
@click.option("--out", default=None, type=click.Path())
def attribute(model_path: str, data_path: str | None, instance_path: str | None,
              label_column: str, method: str, background_path: str | None,
              seed: int, n_permutations: int, n_samples: int,
              kernel_width: float | None, out: str | None) -> None:
    """Attribute predictions to features (Shapley or local surrogate)."""
    if (data_path is None) == (instance_path is None):
        raise click.UsageError("give exactly one of --data or --instance")
    forest = forest_mod.load_model(model_path)

    if background_path is not None:
        background = data_mod.load_csv(background_path, label_column).features
    elif data_path is not None:
        background = data_mod.load_csv(data_path, label_column).features
    else:
        raise click.UsageError("--instance mode needs --background")

    if instance_path is not None:
        x = _load_instance(instance_path, forest.n_features)
        payload = attribute_instance(forest, x, method, seed, background,
                                     n_permutations, n_samples, kernel_width)
        _write(to_json(payload), out)
        return

    d = data_mod.load_csv(data_path, label_column)
    points = []
    for i in range(d.n_samples):
        points.append({
            "index": i,
            **attribute_instance(forest, d.features[i], method,
                                 _point_seed(seed, i), background,
                                 n_permutations, n_samples, kernel_width),
        })
    payload = {"method": method, "n_features": forest.n_features,
               "seed": seed, "points": points}
    _write(to_json(payload), out)


def _point_seed(seed: int, index: int) -> int:
    """Per-point stream so batch attribution is order-independent."""
    from .rng import mix64

    return mix64((seed << 20) + index)


@main.command()
@click.option("--attributions", "attr_path", required=True, type=click.Path(exists=True))
@click.option("--out", default=None, type=click.Path())
def stability(attr_path: str, out: str | None) -> None:
    """Rank-stability curves (CSV: feature, n, probability) from attribute output."""
    with open(attr_path) as fh:
        doc = json.load(fh)
    n_features = doc["n_features"]
    results = [
        attr_mod.AttributionResult(method=doc["method"], phi=tuple(p["phi"]),
                                   baseline=p["baseline"], ranking=tuple(p["ranking"]))
        for p in doc["points"]
    ]
    curves = attr_mod.stability_curves(results, n_features)
    lines = ["feature,n,probability"]
    for f in range(n_features):
        for n in range(1, n_features + 1):
            lines.append(f"{f},{n},{float(curves[f, n - 1])!r}")
    _write("\n".join(lines) + "\n", out)


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--label", "label_column", default="label", show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.option("--csv", "csv_path", default=None, type=click.Path())
@click.option("--method", default="lime", show_default=True,
              type=click.Choice(["shapley-mc", "lime", "none"]))
@click.option("--seed", default=0, show_default=True)
@click.option("--delta0", default=0.01, show_default=True)
@click.option("--growth", default=1.01, show_default=True)
def report(model_path: str, data_path: str, label_column: str, out: str | None,
           csv_path: str | None, method: str, seed: int, delta0: float,
           growth: float) -> None:
    """Counterfactual + attribution report over a whole test CSV."""
    forest = forest_mod.load_model(model_path)
    d = data_mod.relabel_to_class_indices(data_mod.load_csv(data_path, label_column))
    cf_results = []
    for i in range(d.n_samples):
        query = cf_mod.CounterfactualQuery(instance=tuple(d.features[i]),
                                           delta0=delta0, growth=growth)
        cf_results.append(cf_mod.find_min_counterfactual(forest, query))
    attributions = None
    if method != "none":
        attributions = []
        for i in range(d.n_samples):
            payload = attribute_instance(forest, d.features[i], method,
                                         _point_seed(seed, i), d.features,
                                         n_permutations=50, n_samples=500,
                                         kernel_width=None)
            attributions.append(attr_mod.AttributionResult(
                method=payload["method"], phi=tuple(payload["phi"]),
                baseline=payload["baseline"], ranking=tuple(payload["ranking"]),
                stderr=tuple(payload["stderr"]) if payload["stderr"] else None))
    doc = report_mod.build_report(forest, d, cf_results, attributions)
    _write(report_mod.report_to_json(doc), out)
    if csv_path:
        report_mod.write_samples_csv(doc, csv_path)


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--data", "data_path", default=None, type=click.Path(exists=True))
@click.option("--background", "background_path", default=None, type=click.Path(exists=True))
@click.option("--label", "label_column", default="label", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--timeout", default=30.0, show_default=True)
@click.option("--max-solves", default=4, show_default=True)
def serve(model_path: str, data_path: str | None, background_path: str | None,
          label_column: str, host: str, port: int, timeout: float,
          max_solves: int) -> None:
    """Run the HTTP service."""
    from .service import ServiceConfig, run

    config = ServiceConfig(model_path=model_path, dataset_path=data_path,
                           background_path=background_path,
                           label_column=label_column, host=host, port=port,
                           timeout_seconds=timeout, max_concurrent_solves=max_solves)
    run(config)


if __name__ == "__main__":
    main()
