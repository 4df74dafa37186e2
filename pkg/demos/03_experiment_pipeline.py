"""End-to-end pipeline: preset config -> harness run -> figure.

Shrinks the MX2 preset to a seconds-scale size, runs it through the
experiment harness (JSONL logs + aggregate CSVs + manifest), and, when the
separate plotgen package is installed, renders the mean +/- SE figure from
the CSVs alone — the two packages only share the CSV file format.

Run: python3 demos/03_experiment_pipeline.py [out_dir]
"""

import json
import sys
from pathlib import Path

from pflopt.harness import ExperimentConfig, preset, run_experiment


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out/demo-pipeline")

    raw = preset("mx2-synth", desk=True).to_dict()
    raw["dataset"].update(n=30, M=4)
    raw["run"].update(seeds=[0, 1, 2], max_rounds=50)
    config = ExperimentConfig.from_dict(raw)
    print("config:")
    print(json.dumps(config.to_dict(), indent=2)[:400] + " ...\n")

    manifest = run_experiment(config, out_dir=out)
    ok = sum(1 for r in manifest["runs"] if r["status"] == "ok")
    print(f"{ok}/{len(manifest['runs'])} runs ok")
    print(f"aggregates: {manifest['aggregates']}")
    resolved = manifest["runs"][-1]["resolved_params"]
    print(f"example resolved params ({manifest['runs'][-1]['optimizer']}): "
          f"eta={resolved['eta']:.4g}, p_w={resolved.get('p_w', 'n/a')}\n")

    try:
        from plotgen.parse import parse_csv
        from plotgen.render import render
    except ImportError:
        print("plotgen not installed; skipping the figure "
              "(pip install -e plotgen/)")
        return
    series = [parse_csv(out / name) for name in manifest["aggregates"]]
    written = render(series, out / "figure.png", layout="grid")
    print("figure written:", ", ".join(str(p) for p in written))


if __name__ == "__main__":
    main()
