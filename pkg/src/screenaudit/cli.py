"""Command-line runner: ``screenaudit <subcommand> [options]``.

Every subcommand is a thin composition of library calls. Parameters are
resolved as built-in defaults, then ``--config`` (a JSON object whose keys
mirror the long flag names with ``_`` for ``-``), then explicit flags. The
fully resolved configuration is embedded in every output file; wall-clock
times and host details go to the ``run_meta.json`` sidecar so that primary
outputs are byte-identical across repeated runs.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .audit import honest_trainer, outcome_choice_audit, penalised, probe_world, retrain_audit, sample_drift_audit, simulated_probe
from .decompose import decompose, decompose_empirical
from .errors import ScreenAuditError
from .io import dumps, read_dataset, read_schema, read_world, write_csv, write_dataset, write_json, write_schema, write_world
from .model import Dataset, Representation
from .scenarios import SCENARIOS, ScenarioSpec, generate, judge_policy, release_experiment
from .screen import Roster, acceptance_rates, counterfactual, score_roster, select_top_k, select_with_group_target
from .tradeoff import DEFAULT_GRID, decile_matrix, dominance_check, tradeoff_curve
from .trainer import TrainConfig, TrainedScreener, evaluate, train, train_variants

ENV_OUT = "SCREENAUDIT_OUT"
LOCK_NAME = ".screenaudit.lock"
SIDECAR = "run_meta.json"
STOCHASTIC = {"scenario", "train", "tradeoff", "audit", "release-sim"}

DEFAULTS = {
    "scenario": {"name": None, "n": None, "group_mix": None, "param": []},
    "train": {"outcome": None, "features": None, "variant": "blind", "link": "linear", "learning_rate": 1.0,
              "iterations": 5000, "holdout_fraction": 0.2},
    "decompose": {"world": None, "f_col": None, "g_col": None, "features": None, "drop_group": False,
                  "screener": None, "n_boot": 200},
    "select": {"screener": None, "k": None, "target_share": None, "tie_rule": "by_id", "outcome": None},
    "counterfactual": {"screener": None, "candidate": None, "set": [], "k": None},
    "tradeoff": {"outcome": None, "features": None, "k_share": 0.25, "metric": "share_below_cut", "cut": None,
                 "variants": "blind,aware", "link": "linear", "learning_rate": 1.0, "iterations": 5000,
                 "holdout_fraction": 0.2},
    "audit": {"kind": None, "screener": None, "outcome": None, "outcomes": None, "features": None,
              "k_share": 0.3, "declared": None, "slack": 0.0, "margin": 0.05, "universe": None,
              "universe_schema": None, "training_observed": None, "limit": 0.1, "probe_gap": 1.0,
              "probe_n": 4000, "penalty": 0.0, "audits": None, "learning_rate": 1.0, "iterations": 5000},
    "release-sim": {"n": None, "param": [], "detention_rate": None, "iterations": 5000},
}
INPUT_DEFAULTS = {"data": None, "schema": None, "scenario": None}


class CliError(ScreenAuditError):
    def __init__(self, message: str, code: str = "usage"):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message, "usage")


def _common(p: argparse.ArgumentParser, inputs: bool = True) -> None:
    p.add_argument("--config", help="JSON file with parameter values")
    p.add_argument("--seed", type=int, help="master seed (required for stochastic subcommands)")
    p.add_argument("--out", help=f"output directory (default ${ENV_OUT}/<subcommand> or ./screenaudit-out/...)")
    p.add_argument("--plot-data", action="store_true", default=None, help="also write CSV tables for plotting")
    if inputs:
        p.add_argument("--data", help="dataset CSV")
        p.add_argument("--schema", help="schema JSON for --data")
        p.add_argument("--scenario", help=f"generate the input dataset from a scenario: {', '.join(SCENARIOS)}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="screenaudit", description="Audit toolkit for algorithmic screeners.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("scenario", help="generate a synthetic dataset with planted mechanisms")
    _common(p, inputs=False)
    p.add_argument("--name", choices=SCENARIOS)
    p.add_argument("--n", type=int)
    p.add_argument("--group-mix", type=float)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")

    p = sub.add_parser("train", help="fit a screener")
    _common(p)
    p.add_argument("--outcome")
    p.add_argument("--features", help="comma-separated retained features (default all)")
    p.add_argument("--variant", choices=("blind", "aware", "orthogonalized"))
    p.add_argument("--link", choices=("linear", "logistic"))
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--holdout-fraction", type=float)

    p = sub.add_parser("decompose", help="attribute a screener's group gap")
    _common(p)
    p.add_argument("--world", help="world JSON, or 'trivial' for the shipped example")
    p.add_argument("--f-col")
    p.add_argument("--g-col")
    p.add_argument("--features")
    p.add_argument("--drop-group", action="store_true", default=None)
    p.add_argument("--screener", help="trained screener JSON (default: score with h)")
    p.add_argument("--n-boot", type=int)

    p = sub.add_parser("select", help="top-k or group-target selection")
    _common(p)
    p.add_argument("--screener")
    p.add_argument("--k", type=int)
    p.add_argument("--target-share", type=float)
    p.add_argument("--tie-rule", choices=("by_id", "stable_input_order"))
    p.add_argument("--outcome")

    p = sub.add_parser("counterfactual", help="re-score one candidate with changed inputs")
    _common(p)
    p.add_argument("--screener")
    p.add_argument("--candidate")
    p.add_argument("--set", action="append", metavar="NAME=VALUE")
    p.add_argument("--k", type=int)

    p = sub.add_parser("tradeoff", help="efficiency vs disadvantaged share for screener variants")
    _common(p)
    p.add_argument("--outcome")
    p.add_argument("--features")
    p.add_argument("--k-share", type=float)
    p.add_argument("--metric", choices=("share_below_cut", "mean_outcome"))
    p.add_argument("--cut", type=float)
    p.add_argument("--variants")
    p.add_argument("--link", choices=("linear", "logistic"))
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--holdout-fraction", type=float)

    p = sub.add_parser("audit", help="run audit checks")
    _common(p)
    p.add_argument("--kind", choices=("under_optimization", "outcome_choice", "sample_drift", "simulated_probe"))
    p.add_argument("--screener")
    p.add_argument("--outcome")
    p.add_argument("--outcomes")
    p.add_argument("--features")
    p.add_argument("--k-share", type=float)
    p.add_argument("--declared")
    p.add_argument("--slack", type=float)
    p.add_argument("--margin", type=float)
    p.add_argument("--universe")
    p.add_argument("--universe-schema")
    p.add_argument("--training-observed", metavar="COLUMN",
                   help="sample_drift: training rows are those with COLUMN observed")
    p.add_argument("--limit", type=float)
    p.add_argument("--probe-gap", type=float)
    p.add_argument("--probe-n", type=int)
    p.add_argument("--penalty", type=float)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--iterations", type=int)

    p = sub.add_parser("release-sim", help="judge vs machine release at matched FTA")
    _common(p, inputs=False)
    p.add_argument("--n", type=int)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--detention-rate", type=float)
    p.add_argument("--iterations", type=int)
    return parser


# -- configuration ---------------------------------------------------------------------------

def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags into the run configuration."""
    cmd = args.subcommand
    file_cfg = {}
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}", "unreadable_input") from exc
        if not isinstance(file_cfg, dict):
            raise CliError("config must be a JSON object", "invalid_parameter")
    file_cfg = {k.replace("-", "_"): v for k, v in file_cfg.items()}
    known = set(DEFAULTS[cmd]) | {"seed", "plot_data"} | (set(INPUT_DEFAULTS) if hasattr(args, "data") else set())
    unknown = set(file_cfg) - known
    if unknown:
        raise CliError(f"unknown config keys for {cmd}: {sorted(unknown)}", "invalid_parameter")
    params = {}
    base = {**(INPUT_DEFAULTS if hasattr(args, "data") else {}), **DEFAULTS[cmd]}
    for key, default in base.items():
        flag = getattr(args, key, None)
        params[key] = flag if flag is not None else file_cfg.get(key, default)
    seed = args.seed if args.seed is not None else file_cfg.get("seed")
    if seed is None and cmd in STOCHASTIC:
        raise CliError(f"{cmd} needs a seed (--seed or 'seed' in the config)", "missing_seed")
    plot = bool(args.plot_data if args.plot_data is not None else file_cfg.get("plot_data", False))
    return {"tool": "screenaudit", "version": __version__, "subcommand": cmd,
            "seed": None if seed is None else int(seed), "plot_data": plot, "params": params}


def _out_dir(args, cmd: str) -> Path:
    if args.out:
        return Path(args.out)
    root = os.environ.get(ENV_OUT, "screenaudit-out")
    return Path(root) / cmd


def _kv(items, what: str) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise CliError(f"{what} expects KEY=VALUE, got {item!r}", "invalid_parameter")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _names(value) -> list[str] | None:
    if value is None:
        return None
    if isinstance(value, str):
        return [x.strip() for x in value.split(",") if x.strip()]
    return list(value)


# -- inputs ----------------------------------------------------------------------------------

def _load_data(params: dict, seed: int | None) -> tuple[Dataset, dict | None]:
    if params.get("scenario"):
        sc = generate(ScenarioSpec(params["scenario"], seed=seed or 0))
        return sc.data, sc.notes
    if not params.get("data") or not params.get("schema"):
        raise CliError("give --data and --schema, or --scenario", "missing_input")
    return read_dataset(params["data"], read_schema(params["schema"])), None


def _load_screener(path) -> TrainedScreener:
    if not path:
        raise CliError("--screener is required", "missing_input")
    return TrainedScreener.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _representation(data_schema, features, keep_group: bool) -> Representation:
    return Representation.of(data_schema, _names(features), keep_group=keep_group)


def _cfg(params: dict, seed: int, link: str | None = None) -> TrainConfig:
    return TrainConfig(learning_rate=params.get("learning_rate", 1.0), iterations=params.get("iterations", 5000),
                       holdout_fraction=params.get("holdout_fraction", 0.2), seed=seed,
                       link=link or params.get("link", "linear"))


# -- subcommands -----------------------------------------------------------------------------
# Each returns {relative file name: JSON-able object or ("csv", rows)}.

def cmd_scenario(rc: dict) -> dict:
    p = rc["params"]
    if not p["name"]:
        raise CliError("--name is required", "missing_input")
    spec = ScenarioSpec(p["name"], p["n"], rc["seed"], p["group_mix"], _kv(p["param"], "--param"))
    sc = generate(spec)
    files = {"dataset.csv": ("dataset", sc.data), "schema.json": ("schema", sc.data.schema),
             "notes.json": {"notes": sc.notes, "suggested_representation": sc.representation.to_dict(),
                            "outcome": sc.outcome}}
    if sc.world is not None:
        files["world.json"] = ("world", sc.world)
    return files


def cmd_train(rc: dict) -> dict:
    p, seed = rc["params"], rc["seed"]
    data, _ = _load_data(p, seed)
    if not p["outcome"]:
        raise CliError("--outcome is required", "missing_input")
    cfg = _cfg(p, seed)
    base = _representation(data.schema, p["features"], False)
    if p["variant"] == "blind":
        s = train(data, p["outcome"], base, cfg)
    else:
        s = train_variants(data, p["outcome"], base, cfg)[p["variant"]]
    m = evaluate(s, data)
    return {"screener.json": s.to_dict(), "metrics.json": {"metadata": s.metadata, "evaluation": m.__dict__}}


def _trivial_world():
    with resources.as_file(resources.files("screenaudit") / "data" / "trivial_world.json") as path:
        return read_world(path)


def cmd_decompose(rc: dict) -> dict:
    p = rc["params"]
    t = _load_screener(p["screener"]) if p["screener"] else None
    if p["world"]:
        world = _trivial_world() if p["world"] == "trivial" else read_world(p["world"])
        schema = world.schema
    else:
        data, _ = _load_data(p, rc["seed"])
        schema = data.schema
    if t is not None and p["features"] is None:
        r = t.representation
    else:
        r = _representation(schema, p["features"], not p["drop_group"])
    if p["world"]:
        rep = decompose(world, r, t)
        out = {"decomposition.json": {"mode": "exact", **rep.to_dict()}}
        terms = rep.terms() | {"total": rep.total}
        se = {}
    else:
        if not p["f_col"] or not p["g_col"]:
            raise CliError("empirical decomposition needs --f-col and --g-col", "missing_input")
        if rc["seed"] is None:
            raise CliError("empirical decomposition bootstraps; give --seed", "missing_seed")
        emp = decompose_empirical(data, p["f_col"], p["g_col"], r, t, n_boot=p["n_boot"], seed=rc["seed"])
        out = {"decomposition.json": {"mode": "empirical", **emp.to_dict()}}
        terms = emp.report.terms() | {"total": emp.report.total}
        se = emp.standard_errors
    if rc["plot_data"]:
        out["terms.csv"] = ("csv", [["term", "value", "standard_error"]]
                            + [[k, v, se.get(k)] for k, v in terms.items()])
    return out


def cmd_select(rc: dict) -> dict:
    p = rc["params"]
    data, _ = _load_data(p, rc["seed"])
    s = _load_screener(p["screener"])
    if p["k"] is None:
        raise CliError("--k is required", "missing_input")
    roster = Roster.from_dataset(data, p["outcome"])
    scored = score_roster(s, roster)
    if p["target_share"] is None:
        sel = select_top_k(scored, p["k"], p["tie_rule"])
    else:
        sel = select_with_group_target(scored, p["k"], p["target_share"], p["tie_rule"])
    rates = acceptance_rates(sel, roster)
    score_of = dict(zip(roster.ids, scored.scores))
    return {"selection.json": {"selection": sel, "slice_rates": {k: v.__dict__ for k, v in rates.items()}},
            "selected.csv": ("csv", [["rank", "id", "score"]]
                             + [[i + 1, c, float(score_of[c])] for i, c in enumerate(sel.selected)])}


def cmd_counterfactual(rc: dict) -> dict:
    p = rc["params"]
    data, _ = _load_data(p, rc["seed"])
    s = _load_screener(p["screener"])
    if not p["candidate"]:
        raise CliError("--candidate is required", "missing_input")
    res = counterfactual(s, Roster.from_dataset(data), p["candidate"], _kv(p["set"], "--set"), p["k"])
    return {"counterfactual.json": res.to_dict()}


def cmd_tradeoff(rc: dict) -> dict:
    p, seed = rc["params"], rc["seed"]
    data, notes = _load_data(p, seed)
    outcome = p["outcome"] or (notes or {}).get("outcome")
    if not outcome:
        raise CliError("--outcome is required", "missing_input")
    cut = p["cut"] if p["cut"] is not None else (notes or {}).get("efficiency_cut")
    names = _names(p["variants"])
    variants = train_variants(data, outcome, _representation(data.schema, p["features"], False), _cfg(p, seed))
    unknown = set(names) - set(variants)
    if unknown:
        raise CliError(f"unknown variants {sorted(unknown)}", "invalid_parameter")
    roster = Roster.from_dataset(data, outcome)
    k = max(1, int(round(p["k_share"] * data.n)))
    curves = tradeoff_curve({v: variants[v] for v in names}, roster, k, DEFAULT_GRID, p["metric"], cut)
    out = {f"curve_{v}.csv": ("csv", c.csv_rows()) for v, c in curves.items()}
    verdicts = {}
    for a in names:
        for b in names:
            if a != b:
                verdicts[f"{a}_vs_{b}"] = dominance_check(curves[a], curves[b])
    out["dominance.json"] = {"k": k, "metric": p["metric"], "cut": cut, "verdicts": verdicts}
    out["tradeoff.json"] = {"curves": curves}
    if rc["plot_data"] and len(names) >= 2:
        dm = decile_matrix(variants[names[0]], variants[names[1]], roster, lambda X, g: g == 1,
                           labels=(names[0], names[1]))
        out["deciles_disadvantaged.csv"] = ("csv", dm.csv_rows())
    return out


def _audit_one(kind: str, p: dict, seed: int) -> object:
    cfg = TrainConfig(learning_rate=p["learning_rate"], iterations=p["iterations"], seed=seed)
    if kind == "simulated_probe":
        trainer = honest_trainer(cfg)
        if p["penalty"]:
            trainer = penalised(trainer, p["penalty"])
        return simulated_probe(trainer, probe_world(p["probe_gap"]), n=p["probe_n"], seed=seed, k_share=p["k_share"])
    data, notes = _load_data(p, seed)
    if kind == "under_optimization":
        s = _load_screener(p["screener"])
        r = s.representation if p["features"] is None else _representation(data.schema, p["features"],
                                                                            s.representation.keep_group)
        return retrain_audit(s, data, p["outcome"] or s.metadata.outcome, r, cfg, p["margin"])
    if kind == "outcome_choice":
        outcomes = _names(p["outcomes"])
        if not outcomes and notes:
            outcomes = [notes["outcome"], *notes.get("alternative_outcomes", [])]
        if not outcomes:
            raise CliError("--outcomes is required", "missing_input")
        return outcome_choice_audit(data, outcomes, _representation(data.schema, p["features"], False),
                                    p["k_share"], cfg, p["declared"], p["slack"])
    if kind == "sample_drift":
        if p["training_observed"]:
            training = data.subset(np.isfinite(data.outcome(p["training_observed"])))
            universe = data
        elif p["universe"]:
            schema = read_schema(p["universe_schema"] or p["schema"])
            training, universe = data, read_dataset(p["universe"], schema)
        else:
            raise CliError("sample_drift needs --universe or --training-observed", "missing_input")
        return sample_drift_audit(training, universe, p["limit"])
    raise CliError(f"unknown audit kind {kind!r}", "invalid_parameter")


def cmd_audit(rc: dict) -> dict:
    p, seed = rc["params"], rc["seed"]
    battery = p["audits"] or ([{"kind": p["kind"]}] if p["kind"] else None)
    if not battery:
        raise CliError("give --kind or an 'audits' list in the config", "missing_input")
    out, summary = {}, []
    for entry in battery:
        entry = dict(entry)
        kind = entry.pop("kind", None)
        unknown = set(entry) - set(p) - set(INPUT_DEFAULTS)
        if unknown:
            raise CliError(f"unknown audit parameters {sorted(unknown)}", "invalid_parameter")
        finding = _audit_one(kind, {**p, **entry}, seed)
        name = finding.filename
        if name in out:
            name = name.replace(".json", f"_{len(out)}.json")
        out[name] = finding.to_dict()
        summary.append({"file": name, "kind": finding.kind, "verdict": finding.verdict})
    out["audit_summary.json"] = {"findings": summary}
    return out


def cmd_release_sim(rc: dict) -> dict:
    p, seed = rc["params"], rc["seed"]
    spec = ScenarioSpec("judge_release", p["n"], seed, None, _kv(p["param"], "--param"))
    sc = generate(spec)
    machine = train(sc.data, "fta", sc.representation,
                    TrainConfig(iterations=p["iterations"], seed=seed, link="logistic"))
    res = release_experiment(sc.data, machine, judge_policy(spec), p["detention_rate"])
    out = {"release.json": {"result": res, "machine_screener": machine.to_dict(), "scenario": sc.notes}}
    if rc["plot_data"]:
        from .screen import Roster as _R
        roster = _R(sc.data.schema, sc.data.ids, sc.data.X, sc.data.group)
        s = score_roster(machine, roster).scores
        order = np.lexsort((np.arange(sc.data.n), -s))
        y = sc.data.outcome("fta")[order]
        n = sc.data.n
        rows = [["detention_rate", "released_fta_rate"]]
        for j in range(0, n, max(1, n // 100)):
            rows.append([j / n, float(y[j:].mean())])
        out["machine_curve.csv"] = ("csv", rows)
    return out


COMMANDS = {
    "scenario": cmd_scenario, "train": cmd_train, "decompose": cmd_decompose, "select": cmd_select,
    "counterfactual": cmd_counterfactual, "tradeoff": cmd_tradeoff, "audit": cmd_audit,
    "release-sim": cmd_release_sim,
}


# -- output ----------------------------------------------------------------------------------

def _header(rc: dict) -> str:
    return "# run_config: " + json.dumps(rc, sort_keys=True, separators=(",", ":"), default=str) + "\n"


def _write(out: Path, name: str, obj, rc: dict) -> None:
    path = out / name
    if isinstance(obj, tuple):
        kind, payload = obj
        if kind == "dataset":
            write_dataset(path, payload)
            path.write_text(_header(rc) + path.read_text(encoding="utf-8"), encoding="utf-8")
        elif kind == "csv":
            write_csv(path, payload)
            path.write_text(_header(rc) + path.read_text(encoding="utf-8"), encoding="utf-8")
        elif kind == "schema":
            write_json(path, {**payload.to_dict(), "run_config": rc})
        elif kind == "world":
            from .io import world_to_dict
            write_json(path, {**world_to_dict(payload), "run_config": rc})
        return
    body = dict(obj) if isinstance(obj, dict) else {"result": obj}
    path.write_text(dumps({"run_config": rc, **body}), encoding="utf-8")


class _Lock:
    def __init__(self, out: Path):
        self.path = out / LOCK_NAME

    def __enter__(self):
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise CliError(f"output directory is in use (lock file {self.path} exists)", "output_locked") from None
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        return self

    def __exit__(self, *exc):
        self.path.unlink(missing_ok=True)


def _report_error(out: Path | None, exc: Exception, rc: dict | None) -> None:
    code = getattr(exc, "code", None)
    if not isinstance(code, str):
        code = "unreadable_input" if isinstance(exc, (OSError, json.JSONDecodeError)) else "internal_error"
    report = {"error": code, "message": str(exc), "exception": type(exc).__name__, "run_config": rc}
    print(dumps(report), end="", file=sys.stderr)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(dumps(report), encoding="utf-8")
        except OSError:
            pass


def run(argv=None) -> int:
    """Run one subcommand; returns the process exit code (0 ok, 1 error)."""
    argv = list(sys.argv[1:] if argv is None else argv)
    out, rc = None, None
    try:
        args = build_parser().parse_args(argv)
        out = _out_dir(args, args.subcommand)
        rc = resolve(args)
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise CliError(f"output directory {out} is not writable", "output_unwritable")
        started = time.time()
        with _Lock(out):
            files = COMMANDS[args.subcommand](rc)
            stale = out / "error.json"
            stale.unlink(missing_ok=True)
            for name, obj in files.items():
                _write(out, name, obj, rc)
            write_json(out / SIDECAR, {
                "started": time.strftime("%Y-%m-%dT%H:%M:%S%z", time.localtime(started)),
                "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
                "elapsed_seconds": round(time.time() - started, 3),
                "host": platform.node(), "python": platform.python_version(),
                "argv": argv, "output_dir": str(out.resolve()), "files": sorted(files),
            })
        print(f"wrote {len(files)} file(s) to {out}")
        return 0
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (ScreenAuditError, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        _report_error(out, exc, rc)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
