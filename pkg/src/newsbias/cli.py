"""Command-line pipeline: ingest -> fit -> bias -> engagement -> network -> report.

Every command reads and writes artifacts in one output directory, resolves
its options from defaults < config file < flags, and records the resolved
configuration plus input-file digests in run_manifest.json. Identical inputs
and seed produce byte-identical outputs.

Exit codes: 0 success, 2 input error, 3 missing upstream artifact, 1 internal.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import logging
import math
import sys
from pathlib import Path

from . import corpus, latent, metrics, network, synth
from .corpus import EVENT_ORDER, EventType

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_MISSING_STAGE = 3


class InputError(Exception):
    """Bad or missing user-supplied input."""


class MissingStageError(Exception):
    """A required artifact from an earlier pipeline stage is absent."""


def _onoff(value: str) -> bool:
    if value == "on":
        return True
    if value == "off":
        return False
    raise argparse.ArgumentTypeError(f"expected 'on' or 'off', got '{value}'")


def _date(value: str) -> datetime.date:
    try:
        return datetime.date.fromisoformat(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ISO date, got '{value}'") from None


# option name -> (cast for config-file values, default); flag values are cast
# by argparse itself
_OPTIONS: dict[str, tuple] = {
    "articles": (str, None),
    "outlets": (str, None),
    "followers": (str, None),
    "retweets": (str, None),
    "from": (_date, None),
    "to": (_date, None),
    "format": (str, "csv"),
    "seed": (int, 0),
    "chains": (int, 4),
    "iters": (int, 5000),
    "burnin": (int, 1000),
    "proposal_sd": (float, 0.5),
    "adapt": (_onoff, True),
    "prior_alpha_sd": (float, 15.0),
    "prior_x_sd": (float, 1.0),
    "dump_draws": (_onoff, False),
    "theta": (float, math.pi / 4),
    "duration_weighted": (_onoff, False),
    "strict_threshold": (_onoff, True),
    "drop_isolates": (_onoff, True),
    "n_outlets": (int, 12),
    "clusters": (int, 2),
    "out": (str, "."),
}

_DESTS = {"from": "window_from", "to": "window_to", "format": "file_format"}


def _dest(key: str) -> str:
    return _DESTS.get(key, key)


def _load_config(path: str) -> dict[str, str]:
    """Flat `key = value` config file; unknown keys are rejected."""
    cfg: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config file: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"config line {lineno} is not 'key = value': {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _OPTIONS:
            raise InputError(f"unknown config key '{key}' at line {lineno}")
        cfg[key] = value.strip()
    return cfg


def _resolve(args: argparse.Namespace, keys: list[str]) -> dict:
    """Merge defaults, config file, and flags (flags win) for the given keys."""
    resolved = {}
    for key in keys:
        cast, default = _OPTIONS[key]
        value = getattr(args, _dest(key), None)
        if value is None and key in args.cfg:
            try:
                value = cast(args.cfg[key])
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise InputError(f"bad config value for '{key}': {exc}") from None
        if value is None:
            value = default
        resolved[key] = value
    return resolved


def _require_input(path_str: str | None, flag: str) -> Path:
    if not path_str:
        raise InputError(f"--{flag} is required")
    path = Path(path_str)
    if not path.is_file():
        raise InputError(f"input file not found: {path}")
    return path


def _require_stage(out_dir: Path, name: str, stage: str) -> Path:
    path = out_dir / name
    if not path.is_file():
        raise MissingStageError(
            f"missing artifact '{name}' in {out_dir}; run the '{stage}' stage first"
        )
    return path


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _json_value(value):
    if isinstance(value, datetime.date):
        return value.isoformat()
    return value


def _write_manifest(out_dir: Path, command: str, resolved: dict, inputs: list[Path]) -> None:
    manifest = {
        "command": command,
        "config": {k: _json_value(v) for k, v in resolved.items()},
        "inputs": {str(p): _sha256(p) for p in inputs},
    }
    _write_json(out_dir / "run_manifest.json", manifest)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _out_dir(resolved: dict) -> Path:
    out = Path(resolved["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_table(path: Path, header: tuple[str, ...], rows) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _read_table(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


# ---------------------------------------------------------------- commands


def cmd_ingest(args: argparse.Namespace) -> int:
    resolved = _resolve(
        args, ["articles", "outlets", "followers", "retweets", "from", "to", "format", "out"]
    )
    out = _out_dir(resolved)
    fmt = resolved["format"]
    if fmt not in ("csv", "jsonl"):
        raise InputError(f"unknown format '{fmt}', expected 'csv' or 'jsonl'")

    articles_path = _require_input(resolved["articles"], "articles")
    outlets_path = _require_input(resolved["outlets"], "outlets")
    with open(articles_path) as handle:
        articles = corpus.parse_articles(handle, fmt)
    with open(outlets_path) as handle:
        registry = corpus.parse_outlets(handle, fmt)
    articles = corpus.filter_articles(articles, resolved["from"], resolved["to"])

    followers: list[corpus.FollowerRecord] = []
    if resolved["followers"]:
        with open(_require_input(resolved["followers"], "followers")) as handle:
            followers = corpus.parse_followers(handle, fmt)
    retweets: list[corpus.RetweetRecord] = []
    if resolved["retweets"]:
        with open(_require_input(resolved["retweets"], "retweets")) as handle:
            retweets = corpus.parse_retweets(handle, fmt)

    tensor = corpus.aggregate_counts(articles, registry)
    breakdown = corpus.dataset_breakdown(articles, registry)

    with open(out / "articles.csv", "w", newline="") as handle:
        corpus.write_articles(articles, handle)
    with open(out / "outlets.csv", "w", newline="") as handle:
        corpus.write_outlets(registry, handle)
    with open(out / "followers.csv", "w", newline="") as handle:
        corpus.write_followers(followers, handle)
    with open(out / "retweets.csv", "w", newline="") as handle:
        corpus.write_retweets(retweets, handle)
    with open(out / "counts.csv", "w", newline="") as handle:
        corpus.write_count_tensor(tensor, handle)
    _write_table(
        out / "breakdown.csv",
        (
            "category",
            "sources",
            "sources_pct",
            "contents",
            "contents_pct",
            "interactions",
            "interactions_pct",
        ),
        (
            (
                r.category,
                r.sources,
                f"{r.sources_pct:.1f}",
                r.contents,
                f"{r.contents_pct:.1f}",
                r.interactions,
                f"{r.interactions_pct:.1f}",
            )
            for r in breakdown.rows()
        ),
    )
    inputs = [articles_path, outlets_path]
    if resolved["followers"]:
        inputs.append(Path(resolved["followers"]))
    if resolved["retweets"]:
        inputs.append(Path(resolved["retweets"]))
    _write_manifest(out, "ingest", resolved, inputs)
    print(
        f"ingest: {len(articles)} articles, {len(registry)} outlets, "
        f"{len(followers)} follower records, {len(retweets)} retweet records -> {out}"
    )
    return EXIT_OK


def _chain_config(resolved: dict) -> latent.ChainConfig:
    return latent.ChainConfig(
        iterations=resolved["iters"],
        burn_in=resolved["burnin"],
        chains=resolved["chains"],
        seed=resolved["seed"],
        initial_proposal_sd=resolved["proposal_sd"],
        adapt=resolved["adapt"],
    )


def cmd_fit(args: argparse.Namespace) -> int:
    resolved = _resolve(
        args,
        [
            "seed",
            "chains",
            "iters",
            "burnin",
            "proposal_sd",
            "adapt",
            "prior_alpha_sd",
            "prior_x_sd",
            "dump_draws",
            "out",
        ],
    )
    out = _out_dir(resolved)
    counts_path = _require_stage(out, "counts.csv", "ingest")
    with open(counts_path) as handle:
        tensor = corpus.read_count_tensor(handle)
    consts = latent.ModelConstants(
        prior_sd_alpha=resolved["prior_alpha_sd"], prior_sd_x=resolved["prior_x_sd"]
    )
    config = _chain_config(resolved)

    header = ("outlet_id", "event_type", "param", "mean", "sd", "q05", "q95", "rhat", "ess")
    rows = []
    for event in EVENT_ORDER:
        slice_ = tensor.event_slice(event)
        if slice_.sum() == 0:
            log.warning("no articles for event type '%s'; slice skipped", event.value)
            continue
        totals = slice_.sum(axis=1)
        zero = [o for o, t in zip(tensor.outlets, totals) if t == 0]
        if zero:
            log.warning(
                "event '%s': %d outlet(s) with 0 articles, estimates are "
                "prior-driven: %s",
                event.value,
                len(zero),
                ", ".join(zero),
            )
        draws = latent.run_chain(slice_, config, consts)
        summary = latent.posterior_summary(draws, config.burn_in)
        worst = max(float(summary.alpha.rhat.max()), float(summary.x.rhat.max()))
        if worst > 1.05:
            log.warning(
                "event '%s': max split R-hat %.3f exceeds 1.05; consider more "
                "iterations",
                event.value,
                worst,
            )
        for param, stats in (("alpha", summary.alpha), ("x", summary.x)):
            for i, outlet in enumerate(tensor.outlets):
                rows.append(
                    (
                        outlet,
                        event.value,
                        param,
                        float(stats.mean[i]),
                        float(stats.sd[i]),
                        float(stats.q05[i]),
                        float(stats.q95[i]),
                        float(stats.rhat[i]),
                        float(stats.ess[i]),
                    )
                )
        if resolved["dump_draws"]:
            dump_path = out / f"draws_{event.value}.csv"
            with open(dump_path, "w", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(("chain", "iter", "param_index", "value"))
                n = draws.n_outlets
                for c in range(draws.n_chains):
                    for h in range(draws.n_iterations):
                        for i in range(n):
                            writer.writerow((c, h, i, repr(float(draws.alpha[c, h, i]))))
                        for i in range(n):
                            writer.writerow((c, h, n + i, repr(float(draws.x[c, h, i]))))
    _write_table(out / "posterior.csv", header, rows)
    _write_manifest(out, "fit", resolved, [counts_path])
    print(f"fit: wrote posterior.csv ({len(rows)} rows) -> {out}")
    return EXIT_OK


def _read_posterior(path: Path) -> dict[EventType, dict[str, metrics.OutletEstimate]]:
    alpha: dict[tuple[str, str], float] = {}
    x: dict[tuple[str, str], float] = {}
    for row in _read_table(path):
        key = (row["outlet_id"], row["event_type"])
        if row["param"] == "alpha":
            alpha[key] = float(row["mean"])
        elif row["param"] == "x":
            x[key] = float(row["mean"])
    estimates: dict[EventType, dict[str, metrics.OutletEstimate]] = {}
    for event in EVENT_ORDER:
        per_outlet = {}
        for (outlet, ev), a in alpha.items():
            if ev == event.value and (outlet, ev) in x:
                per_outlet[outlet] = metrics.OutletEstimate(a, x[(outlet, ev)])
        estimates[event] = per_outlet
    return estimates


def _read_registry(out: Path) -> list[corpus.OutletProfile]:
    path = _require_stage(out, "outlets.csv", "ingest")
    with open(path) as handle:
        return corpus.parse_outlets(handle, "csv")


def cmd_bias(args: argparse.Namespace) -> int:
    resolved = _resolve(args, ["theta", "out"])
    out = _out_dir(resolved)
    posterior_path = _require_stage(out, "posterior.csv", "fit")
    registry = _read_registry(out)
    estimates = _read_posterior(posterior_path)
    for event in EVENT_ORDER:
        if not estimates[event]:
            raise InputError(
                f"posterior.csv has no rows for event type '{event.value}'; "
                "cannot build the bias table"
            )
    table = metrics.build_bias_table(estimates, theta=resolved["theta"])
    reliability = {p.outlet_id: p.reliability.value for p in registry}
    _write_table(
        out / "bias.csv",
        (
            "outlet_id",
            "reliability",
            "x_adv",
            "x_neu",
            "x_pos",
            "pf_adv",
            "pf_neu",
            "pf_pos",
            "selection_index",
            "adverse_lean",
        ),
        (
            (
                row.outlet_id,
                reliability.get(row.outlet_id, ""),
                row.x_adv,
                row.x_neu,
                row.x_pos,
                row.pf_adv,
                row.pf_neu,
                row.pf_pos,
                row.selection_index,
                row.adverse_lean,
            )
            for row in table
        ),
    )
    _write_manifest(out, "bias", resolved, [posterior_path, out / "outlets.csv"])
    print(f"bias: wrote bias.csv ({len(table)} outlets) -> {out}")
    return EXIT_OK


def _read_bias(path: Path) -> list[metrics.BiasRow]:
    rows = []
    for row in _read_table(path):
        rows.append(
            metrics.BiasRow(
                outlet_id=row["outlet_id"],
                x_adv=float(row["x_adv"]),
                x_neu=float(row["x_neu"]),
                x_pos=float(row["x_pos"]),
                pf_adv=float(row["pf_adv"]),
                pf_neu=float(row["pf_neu"]),
                pf_pos=float(row["pf_pos"]),
                selection_index=float(row["selection_index"]),
                adverse_lean=row["adverse_lean"] == "true",
            )
        )
    return rows


def cmd_engagement(args: argparse.Namespace) -> int:
    resolved = _resolve(args, ["from", "to", "duration_weighted", "out"])
    out = _out_dir(resolved)
    articles_path = _require_stage(out, "articles.csv", "ingest")
    followers_path = _require_stage(out, "followers.csv", "ingest")
    bias_path = _require_stage(out, "bias.csv", "bias")
    with open(articles_path) as handle:
        articles = corpus.parse_articles(handle, "csv")
    with open(followers_path) as handle:
        followers = corpus.parse_followers(handle, "csv")
    bias_rows = _read_bias(bias_path)

    window = None
    if resolved["from"] is not None and resolved["to"] is not None:
        window = (resolved["from"], resolved["to"])
    elif resolved["from"] is not None or resolved["to"] is not None:
        raise InputError("--from and --to must be given together")
    table = metrics.build_engagement_table(
        articles, followers, window=window, duration_weighted=resolved["duration_weighted"]
    )
    _write_table(
        out / "engagement.csv",
        ("outlet_id", "event_type", "contents", "interactions", "followers", "engagement"),
        (
            (r.outlet_id, r.event.value, r.contents, r.interactions, r.followers, r.engagement)
            for r in table
        ),
    )
    fits = metrics.engagement_bias_fits(bias_rows, table)
    _write_json(out / "fits.json", fits)
    _write_manifest(
        out, "engagement", resolved, [articles_path, followers_path, bias_path]
    )
    print(f"engagement: wrote engagement.csv ({len(table)} rows) and fits.json -> {out}")
    return EXIT_OK


def cmd_network(args: argparse.Namespace) -> int:
    resolved = _resolve(args, ["seed", "strict_threshold", "drop_isolates", "out"])
    out = _out_dir(resolved)
    retweets_path = _require_stage(out, "retweets.csv", "ingest")
    bias_path = _require_stage(out, "bias.csv", "bias")
    registry = _read_registry(out)
    with open(retweets_path) as handle:
        retweets = corpus.parse_retweets(handle, "csv")
    if not retweets:
        raise InputError("retweets.csv is empty; cannot build the audience network")
    bias_rows = _read_bias(bias_path)

    matrix = network.build_matrix(retweets)
    reliability = {p.outlet_id: p.reliability for p in registry}
    graph = network.build_graph(matrix, reliability)
    graph = network.threshold_graph(
        graph,
        strict=resolved["strict_threshold"],
        drop_isolated=resolved["drop_isolates"],
    )
    partition = network.louvain(graph, seed=resolved["seed"])
    graph = network.with_clusters(graph, partition)
    stats = network.cluster_stats(partition, bias_rows, registry)

    with open(out / "edges.csv", "w", newline="") as handle:
        network.write_edges_csv(graph, handle)
    with open(out / "graph.graphml", "w") as handle:
        network.write_graphml(graph, handle)
    with open(out / "clusters.csv", "w", newline="") as handle:
        network.write_clusters_csv(partition, handle)
    with open(out / "cluster_stats.csv", "w", newline="") as handle:
        network.write_cluster_stats_csv(stats, handle)
    _write_manifest(
        out, "network", resolved, [retweets_path, out / "outlets.csv", bias_path]
    )
    print(
        f"network: {len(graph.nodes)} nodes, {graph.n_edges} edges, "
        f"{len(stats)} clusters -> {out}"
    )
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    resolved = _resolve(args, ["out"])
    out = _out_dir(resolved)
    bias_path = _require_stage(out, "bias.csv", "bias")
    engagement_path = _require_stage(out, "engagement.csv", "engagement")
    stats_path = _require_stage(out, "cluster_stats.csv", "network")
    clusters_path = _require_stage(out, "clusters.csv", "network")

    clusters = {
        row["outlet_id"]: int(row["cluster_id"]) for row in _read_table(clusters_path)
    }
    outlets: dict[str, dict] = {}
    for row in _read_table(bias_path):
        outlets[row["outlet_id"]] = {
            "reliability": row["reliability"],
            "bias": {
                key: (row[key] == "true" if key == "adverse_lean" else float(row[key]))
                for key in (
                    "x_adv",
                    "x_neu",
                    "x_pos",
                    "pf_adv",
                    "pf_neu",
                    "pf_pos",
                    "selection_index",
                    "adverse_lean",
                )
            },
            "cluster": clusters.get(row["outlet_id"]),
            "engagement": {},
        }
    for row in _read_table(engagement_path):
        entry = outlets.get(row["outlet_id"])
        if entry is None:
            continue
        entry["engagement"][row["event_type"]] = {
            "contents": int(row["contents"]),
            "interactions": int(row["interactions"]),
            "followers": float(row["followers"]),
            "engagement": float(row["engagement"]),
        }
    cluster_rows = []
    for row in _read_table(stats_path):
        cluster_rows.append(
            {
                "cluster_id": int(row["cluster_id"]),
                "size": int(row["size"]),
                **{
                    key: (float(row[key]) if row[key] else None)
                    for key in (
                        "frac_questionable",
                        "mean_x_adv",
                        "mean_x_pos",
                        "mean_selection",
                        "frac_adverse_lean",
                    )
                },
            }
        )
    report = {"outlets": outlets, "clusters": cluster_rows}
    _write_json(out / "report.json", report)
    _write_manifest(
        out, "report", resolved, [bias_path, engagement_path, stats_path, clusters_path]
    )
    print(f"report: wrote report.json ({len(outlets)} outlets) -> {out}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    resolved = _resolve(args, ["n_outlets", "clusters", "seed", "from", "to", "out"])
    out = _out_dir(resolved)
    window = (
        resolved["from"] or datetime.date(2020, 1, 1),
        resolved["to"] or datetime.date(2021, 12, 31),
    )
    data = synth.generate(
        n_outlets=resolved["n_outlets"],
        n_clusters=resolved["clusters"],
        seed=resolved["seed"],
        window=window,
    )
    with open(out / "articles.csv", "w", newline="") as handle:
        corpus.write_articles(data.articles, handle)
    with open(out / "outlets.csv", "w", newline="") as handle:
        corpus.write_outlets(data.outlets, handle)
    with open(out / "followers.csv", "w", newline="") as handle:
        corpus.write_followers(data.followers, handle)
    with open(out / "retweets.csv", "w", newline="") as handle:
        corpus.write_retweets(data.retweets, handle)
    _write_json(out / "truth.json", data.truth)
    _write_manifest(out, "simulate", resolved, [])
    print(
        f"simulate: {len(data.articles)} articles across {resolved['n_outlets']} "
        f"outlets ({resolved['clusters']} planted clusters) -> {out}"
    )
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _add_option(parser: argparse.ArgumentParser, key: str, **kwargs) -> None:
    cast, _ = _OPTIONS[key]
    flag = "--" + key.replace("_", "-")
    parser.add_argument(flag, dest=_dest(key), type=cast, default=None, **kwargs)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newsbias",
        description=(
            "Quantify narrative and selection bias of news outlets from labeled "
            "article counts, and relate them to engagement and retweet audiences."
        ),
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", type=str, default=None, help="artifact directory")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="validate and canonicalize input files")
    for key in ("articles", "outlets", "followers", "retweets"):
        _add_option(p, key, help=f"{key} file")
    _add_option(p, "from", metavar="DATE", help="keep articles on/after this date")
    _add_option(p, "to", metavar="DATE", help="keep articles on/before this date")
    _add_option(p, "format", choices=("csv", "jsonl"), help="input format")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fit", parents=[common], help="run the latent-model MCMC per event type")
    for key in ("seed", "chains", "iters", "burnin", "proposal_sd",
                "prior_alpha_sd", "prior_x_sd"):
        _add_option(p, key)
    _add_option(p, "adapt", metavar="on|off", help="tune proposal scales during burn-in")
    _add_option(p, "dump_draws", metavar="on|off", help="also write raw draws per event type")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bias", parents=[common], help="build the per-outlet bias table")
    _add_option(p, "theta", help="selection-index line angle in radians")
    p.set_defaults(func=cmd_bias)

    p = sub.add_parser("engagement", parents=[common], help="adjusted engagement and regressions")
    _add_option(p, "from", metavar="DATE")
    _add_option(p, "to", metavar="DATE")
    _add_option(p, "duration_weighted", metavar="on|off",
                help="weight follower averages by overlap days")
    p.set_defaults(func=cmd_engagement)

    p = sub.add_parser("network", parents=[common], help="audience graph and Louvain clusters")
    _add_option(p, "seed")
    _add_option(p, "strict_threshold", metavar="on|off",
                help="keep edges exactly at the mean weight")
    _add_option(p, "drop_isolates", metavar="on|off",
                help="drop nodes isolated by thresholding")
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("report", parents=[common], help="join stage outputs into report.json")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("simulate", parents=[common], help="write a synthetic corpus with truth.json")
    for key in ("n_outlets", "clusters", "seed"):
        _add_option(p, key)
    _add_option(p, "from", metavar="DATE")
    _add_option(p, "to", metavar="DATE")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.cfg = _load_config(args.config) if args.config else {}
        return args.func(args)
    except MissingStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_STAGE
    except (InputError, corpus.ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
