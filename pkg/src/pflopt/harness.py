"""Configuration-driven experiment runner.

An experiment is described by a JSON document with four blocks::

    {
      "dataset":   {"kind": "mixture", "d": 15, "n": 1000, "M": 20,
                    "sigma_h": 0.1, "seed": 0},
      "objective": {"family": "MX2", "lambda": "sigma_h*1e-2",
                    "reparameterized": true, "mu_floor": 0.01},
      "optimizers": [{"algorithm": "LSGD", "eta": 0.01, "tau": 5, "B": 1},
                     {"algorithm": "ASVRCD", "params": "auto"}],
      "run":       {"seeds": [0, 1, 2], "max_rounds": 100,
                    "cadence": "round", "out_dir": "out"}
    }

``dataset.sigma_h`` may be a list, producing one sub-experiment per value.
``"lambda": "sigma_h*1e-2"`` is the paper's coupling rule.  ``"params":
"auto"`` derives coordinate-method tunables from the smoothness profile
(``acd_params`` for ACD, ``asvrcd_params`` with ``rho = p_w/n`` for the
stochastic methods); the resolved numbers are logged in the manifest so every
figure is traceable to concrete hyperparameters.

Each (sigma_h, optimizer, seed) run uses optimizer stream seed ``seed`` and
dataset seed ``dataset.seed + seed``, writes a JSONL log
``runs/<label>__<alg>__seed<seed>.jsonl``, and each (sigma_h, optimizer) pair
gets an aggregate CSV ``agg__<label>__<alg>.csv``.  Outputs are a pure
function of (config, seeds): rerunning reproduces them byte-for-byte.
"""

from __future__ import annotations

import concurrent.futures
import copy
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import datagen
from .model import FederatedDataset, SmoothnessProfile
from .objectives import (LogisticBase, ObjectiveSpec, estimate_mu_prime,
                         smoothness_profile)
from .optimizers import (ALGORITHMS, OptimizerConfig, StepSchedule,
                         acd_params, asvrcd_params, build_optimizer)
from .telemetry import aggregate, run_optimizer, write_aggregate_csv, write_jsonl

__all__ = ["ExperimentConfig", "run_experiment", "preset", "PRESETS"]

VALIDATION_SEED_OFFSET = 10**6


class ConfigError(ValueError):
    """Configuration validation failure with a path-to-field diagnostic."""

    def __init__(self, path: str, message: str):
        super().__init__(f"config error at {path}: {message}")


def _need(block: dict, key: str, path: str):
    if key not in block:
        raise ConfigError(f"{path}.{key}", "missing required field")
    return block[key]


@dataclass
class ExperimentConfig:
    """Validated experiment description (see the module docstring schema)."""

    dataset: dict
    objective: dict
    optimizers: list[dict]
    run: dict

    @staticmethod
    def from_dict(raw: dict) -> "ExperimentConfig":
        for block in ("dataset", "objective", "optimizers", "run"):
            _need(raw, block, "$")
        dataset = dict(raw["dataset"])
        objective = dict(raw["objective"])
        optimizers = [dict(o) for o in raw["optimizers"]]
        run = dict(raw["run"])

        kind = _need(dataset, "kind", "$.dataset")
        if kind not in ("mixture", "weightshare", "csv"):
            raise ConfigError("$.dataset.kind", f"unknown kind {kind!r}")
        if kind == "csv":
            _need(dataset, "path", "$.dataset")
            _need(dataset, "label_column", "$.dataset")
            _need(dataset, "M", "$.dataset")
        else:
            for key in ("n", "M", "sigma_h", "seed"):
                _need(dataset, key, "$.dataset")

        family = _need(objective, "family", "$.objective")
        if family not in ("TRAD", "FULL", "MT2", "MX2", "APFL2", "WS2"):
            raise ConfigError("$.objective.family", f"unknown family {family!r}")
        lam = objective.get("lambda", 0.0)
        if isinstance(lam, str) and lam != "sigma_h*1e-2":
            raise ConfigError("$.objective.lambda", f"unknown rule {lam!r}")

        if not optimizers:
            raise ConfigError("$.optimizers", "at least one optimizer required")
        for i, opt in enumerate(optimizers):
            alg = _need(opt, "algorithm", f"$.optimizers[{i}]")
            if alg not in ALGORITHMS:
                raise ConfigError(f"$.optimizers[{i}].algorithm", f"unknown algorithm {alg!r}")

        seeds = _need(run, "seeds", "$.run")
        if not isinstance(seeds, list) or not seeds or not all(
            isinstance(s, int) for s in seeds
        ):
            raise ConfigError("$.run.seeds", "must be a non-empty list of integers")
        if int(_need(run, "max_rounds", "$.run")) < 1:
            raise ConfigError("$.run.max_rounds", "must be >= 1")
        run.setdefault("cadence", "round")
        run.setdefault("out_dir", "out")
        return ExperimentConfig(dataset, objective, optimizers, run)

    @staticmethod
    def from_json(path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return ExperimentConfig.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "objective": self.objective,
            "optimizers": self.optimizers,
            "run": self.run,
        }


def _make_dataset(dataset_block: dict, sigma_h: float, seed: int,
                  validation: bool = False) -> FederatedDataset:
    kind = dataset_block["kind"]
    if kind == "csv":
        return datagen.load_csv(
            dataset_block["path"],
            dataset_block["label_column"],
            int(dataset_block["M"]),
            dataset_block.get("partition_column"),
        )
    gen_seed = int(dataset_block["seed"]) + seed + (VALIDATION_SEED_OFFSET if validation else 0)
    common = dict(n=int(dataset_block["n"]), M=int(dataset_block["M"]),
                  sigma_h=float(sigma_h), seed=gen_seed)
    if kind == "mixture":
        config = datagen.SynthConfig(kind="mixture", d=int(dataset_block["d"]), **common)
        data = datagen.gen_mixture(config)
    else:
        config = datagen.SynthConfig(
            kind="weightshare", d_g=int(dataset_block["d_g"]),
            d_l=int(dataset_block["d_l"]), **common
        )
        data = datagen.gen_weightshare(config)
    if validation:
        # Same ground truth as the training shard, fresh draws otherwise.
        train = _make_dataset(dataset_block, sigma_h, seed)
        data = FederatedDataset(data.clients, truth=train.truth)
    return data


def _build_objective(objective_block: dict, data: FederatedDataset,
                     sigma_h: float) -> tuple[ObjectiveSpec, SmoothnessProfile]:
    base = LogisticBase(data)
    lam = objective_block.get("lambda", 0.0)
    if lam == "sigma_h*1e-2":
        lam = sigma_h * 1e-2
    kwargs = {}
    family = objective_block["family"]
    if family in ("MT2", "APFL2"):
        kwargs["Lam"] = float(objective_block.get("Lambda", 1.0))
    if family == "APFL2":
        alpha = objective_block.get("alpha", 0.5)
        kwargs["alphas"] = np.full(base.M, float(alpha))
    if family == "WS2":
        kwargs["d_g"] = int(objective_block["d_g"])
        kwargs["d_l"] = int(objective_block["d_l"])
    spec = ObjectiveSpec(
        family,
        base,
        lam=float(lam),
        reparameterized=bool(objective_block.get("reparameterized", True)),
        **kwargs,
    )
    mu_floor = float(objective_block.get("mu_floor", 1e-2))
    if data.truth is not None and family == "WS2":
        reference = [np.concatenate([data.truth.w_star, b]) for b in data.truth.beta_stars]
    elif data.truth is not None:
        reference = data.truth.beta_stars
    else:
        reference = [np.zeros(base.dim)] * base.M
    mu_prime = max(estimate_mu_prime(base, reference), mu_floor)
    profile = smoothness_profile(spec, mu_prime, base.l_prime(), base.ll_prime())
    return spec, profile


def _resolve_optimizer(opt_block: dict, spec: ObjectiveSpec,
                       profile: SmoothnessProfile, seed: int) -> OptimizerConfig:
    block = dict(opt_block)
    alg = block.pop("algorithm")
    auto = block.pop("params", None) == "auto"
    schedule = None
    if isinstance(block.get("schedule"), dict):
        schedule = StepSchedule(**block.pop("schedule"))
    fields = {k: block[k] for k in (
        "eta", "tau", "B", "p_w", "rho", "theta", "theta1", "theta2", "gamma", "nu",
        "shared_index", "average_iterate") if k in block}
    if alg == "ACD" and (auto or "eta" not in fields):
        fields = {**acd_params(profile), **fields}
    if alg in ("ASCD", "SCD", "SVRCD", "ASVRCD") and (auto or "eta" not in fields):
        p_w = fields.get("p_w")
        if p_w is None:
            ll = profile.ll_w + profile.ll_beta
            p_w = min(max(profile.ll_w / ll, 1e-6), 1 - 1e-6) if ll > 0 else 0.5
        rho = fields.get("rho", p_w / max(spec.n, 1))
        derived = asvrcd_params(profile, rho)
        derived["rho"] = rho
        derived.pop("calL")
        if alg in ("ASCD", "SCD"):
            for key in ("theta1", "theta2"):
                derived.pop(key, None)
        fields = {**derived, "p_w": p_w, **fields}
    fields.setdefault("tau", int(opt_block.get("tau", 1)))
    fields.setdefault("B", int(opt_block.get("B", 1)))
    return OptimizerConfig(algorithm=alg, seed=seed, **fields)


def _single_run(config: ExperimentConfig, sigma_h: float, opt_block: dict, seed: int):
    """One (sigma_h, optimizer, seed) run; returns (records, resolved-params)."""
    data = _make_dataset(config.dataset, sigma_h, seed)
    objective_block = dict(config.objective)
    if "reparameterized" in opt_block:  # per-optimizer ablation override
        objective_block["reparameterized"] = bool(opt_block["reparameterized"])
    spec, profile = _build_objective(objective_block, data, sigma_h)
    opt_config = _resolve_optimizer(opt_block, spec, profile, seed)
    optimizer = build_optimizer(spec, profile, opt_config)
    records = run_optimizer(
        optimizer, spec, truth=data.truth,
        max_rounds=int(config.run["max_rounds"]),
        cadence=config.run.get("cadence", "round"),
    )
    resolved = {k: v for k, v in asdict(opt_config).items() if v is not None}
    resolved.pop("schedule", None)
    resolved["profile"] = asdict(profile)
    return records, resolved


def _opt_label(opt_block: dict, index: int, blocks: list[dict]) -> str:
    if "label" in opt_block:
        return str(opt_block["label"])
    alg = opt_block["algorithm"]
    if "p_w" in opt_block:
        return f"{alg}-pw{opt_block['p_w']:g}"
    if sum(1 for b in blocks if b["algorithm"] == alg and "label" not in b
           and "p_w" not in b) > 1:
        return f"{alg}{index}"
    return alg


def run_experiment(config: ExperimentConfig, workers: int = 1,
                   out_dir=None) -> dict:
    """Run all (sigma_h, optimizer, seed) combinations and write logs/aggregates.

    Returns the manifest (also written to ``manifest.json``): per-run status,
    resolved hyperparameters, and wall-clock times.  Failed runs are isolated;
    sibling outputs are still written.
    """
    out = Path(out_dir if out_dir is not None else config.run.get("out_dir", "out"))
    runs_dir = out / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)
    sigma_values = config.dataset.get("sigma_h", 0.0)
    if not isinstance(sigma_values, list):
        sigma_values = [sigma_values]
    seeds = config.run["seeds"]
    family = config.objective["family"]

    jobs = []
    for sigma_h in sigma_values:
        label = f"{family}_sigma{sigma_h:g}" if config.dataset["kind"] != "csv" else family
        for index, opt_block in enumerate(config.optimizers):
            opt_label = _opt_label(opt_block, index, config.optimizers)
            for seed in seeds:
                jobs.append((sigma_h, label, opt_block, opt_label, seed))

    manifest = {"config": config.to_dict(), "runs": [], "aggregates": []}
    results: dict[tuple, list] = {}

    def execute(job):
        sigma_h, label, opt_block, opt_label, seed = job
        started = time.time()
        try:
            records, resolved = _single_run(config, sigma_h, opt_block, seed)
            return job, records, resolved, time.time() - started, None
        except Exception as exc:  # noqa: BLE001 - per-run isolation is the contract
            return job, None, None, time.time() - started, f"{type(exc).__name__}: {exc}"

    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(execute, jobs))
    else:
        outcomes = [execute(job) for job in jobs]

    for job, records, resolved, wall, error in outcomes:
        sigma_h, label, _, opt_label, seed = job
        entry = {
            "label": label,
            "optimizer": opt_label,
            "seed": seed,
            "wall_s": round(wall, 3),
            "status": "ok" if error is None else "failed",
        }
        if error is None:
            log_path = runs_dir / f"{label}__{opt_label}__seed{seed}.jsonl"
            write_jsonl(records, log_path)
            entry["log"] = str(log_path.relative_to(out))
            entry["resolved_params"] = resolved
            results.setdefault((label, opt_label), []).append(records)
        else:
            entry["error"] = error
        manifest["runs"].append(entry)

    for (label, opt_label), runs in sorted(results.items()):
        csv_path = out / f"agg__{label}__{opt_label}.csv"
        write_aggregate_csv(aggregate(runs), csv_path)
        manifest["aggregates"].append(str(csv_path.relative_to(out)))

    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest


# --------------------------------------------------------------------------
# Presets
# --------------------------------------------------------------------------

def _mx2_synth(desk: bool) -> dict:
    return {
        "dataset": {
            "kind": "mixture",
            "d": 15,
            "n": 100 if desk else 1000,
            "M": 10 if desk else 20,
            "sigma_h": [0.1, 1.0] if desk else [0.1, 0.3, 1.0],
            "seed": 0,
        },
        "objective": {"family": "MX2", "lambda": "sigma_h*1e-2",
                      "reparameterized": True, "mu_floor": 0.01},
        "optimizers": [
            {"algorithm": "LSGD", "eta": 0.01, "tau": 5, "B": 1},
            {"algorithm": "ASCD", "params": "auto"},
            {"algorithm": "ASVRCD", "params": "auto"},
        ],
        "run": {"seeds": list(range(10 if desk else 30)), "max_rounds": 1000,
                "cadence": "round", "out_dir": "out/mx2-synth"},
    }


def _ws2_synth(desk: bool) -> dict:
    return {
        "dataset": {
            "kind": "weightshare",
            "d_g": 10,
            "d_l": 5,
            "n": 100 if desk else 1000,
            "M": 10 if desk else 20,
            "sigma_h": [5.0, 15.0] if desk else [5.0, 10.0, 15.0],
            "seed": 0,
        },
        "objective": {"family": "WS2", "d_g": 10, "d_l": 5,
                      "reparameterized": True, "mu_floor": 0.01},
        "optimizers": [
            {"algorithm": "LSGD", "eta": 0.01, "tau": 5, "B": 1},
            {"algorithm": "ASCD", "params": "auto"},
            {"algorithm": "ASVRCD", "params": "auto"},
        ],
        "run": {"seeds": list(range(10 if desk else 30)), "max_rounds": 1000,
                "cadence": "round", "out_dir": "out/ws2-synth"},
    }


def _pw_sweep(desk: bool) -> dict:
    base = _mx2_synth(desk)
    base["dataset"]["sigma_h"] = [1.0]
    base["optimizers"] = [{"algorithm": "ASCD", "params": "auto", "label": "ASCD-theory"}] + [
        {"algorithm": "ASCD", "params": "auto", "p_w": p} for p in (0.1, 0.3, 0.5, 0.7, 0.9)
    ]
    base["run"]["max_rounds"] = 200 if desk else 1000
    base["run"]["out_dir"] = "out/pw-sweep"
    return base


def _reparam_ablation(desk: bool) -> dict:
    base = _mx2_synth(desk)
    base["dataset"]["sigma_h"] = [1.0]
    base["optimizers"] = [
        {"algorithm": "ASCD", "params": "auto", "label": "ASCD-reparam"},
        {"algorithm": "ASCD", "params": "auto", "label": "ASCD-raw",
         "reparameterized": False},
    ]
    base["run"]["out_dir"] = "out/reparam-ablation"
    return base


PRESETS = ("mx2-synth", "ws2-synth", "pw-sweep", "reparam-ablation")


def preset(name: str, desk: bool = False) -> ExperimentConfig:
    """Fully specified configs for the paper's synthetic experiments.

    ``desk=True`` shrinks sizes to the desk-scale variants used by the
    acceptance suite.  The reparam-ablation preset carries two ASCD arms,
    the second with a per-optimizer ``reparameterized: false`` override.
    """
    if name == "mx2-synth":
        raw = _mx2_synth(desk)
    elif name == "ws2-synth":
        raw = _ws2_synth(desk)
    elif name == "pw-sweep":
        raw = _pw_sweep(desk)
    elif name == "reparam-ablation":
        raw = _reparam_ablation(desk)
    else:
        raise ValueError(f"unknown preset {name!r}; expected one of {PRESETS}")
    return ExperimentConfig.from_dict(raw)
