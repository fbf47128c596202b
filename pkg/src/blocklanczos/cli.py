"""Config-driven command line runner.

One JSON config file describes one experiment: a ``command`` naming what to
run, an ``output_dir`` and ``seed``, and a parameter block keyed by the
command name. ``--set key=value`` flags override file values (dotted keys
reach into blocks, values parse as JSON with a plain-string fallback), and
``--output-dir`` / ``--seed`` are shorthand overrides applied last. Every
run writes its artifacts plus a ``manifest.json`` echoing the fully
resolved config, so any run can be reproduced bit for bit from its
manifest alone.

Commands and their artifacts:

* ``solve`` - ground (and optionally excited) energies of one chain;
  writes ``solve_spectrum.csv`` and prints the ground energy.
* ``incremental`` - ramping trajectory; writes ``fig1_convergence.csv``
  (small scenario), ``fig2_convergence.csv`` (large) or
  ``fig3_convergence.csv`` (random-start).
* ``noise-sweep`` - coefficient-noise study; writes ``noise_sweep.csv``,
  ``noise_summary.csv`` and ``slope_report.txt``.
* ``nonhermitian-demo`` - two-sided run on a random dense matrix; writes
  ``nonhermitian_spectrum.csv`` and ``nonhermitian_coefficients.txt``.
* ``cost-table`` - grouped-application cost scores; writes
  ``cost_table.csv``.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import scipy

import blocklanczos
from blocklanczos import block, incremental, noise, nonhermitian, scalar, spinchain

COMMANDS = ("solve", "incremental", "noise-sweep", "nonhermitian-demo",
            "cost-table")

MANIFEST_NAME = "manifest.json"

SCENARIO_ARTIFACTS = {
    "small": "fig1_convergence.csv",
    "large": "fig2_convergence.csv",
    "random-start": "fig3_convergence.csv",
}


class ConfigError(ValueError):
    """A config file or override that cannot be used, with location info."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved run description."""

    command: str
    output_dir: str
    seed: int
    parameters: dict[str, Any]

    @classmethod
    def from_dict(cls, data: dict[str, Any], source: str) -> ExperimentConfig:
        if not isinstance(data, dict):
            raise ConfigError(f"{source}: top level must be an object")
        if "command" not in data:
            raise ConfigError(f"{source}: missing field 'command'")
        command = data["command"]
        if command not in COMMANDS:
            raise ConfigError(
                f"{source}: field 'command' must be one of {COMMANDS}, "
                f"got {command!r}"
            )
        output_dir = data.get("output_dir", ".")
        if not isinstance(output_dir, str):
            raise ConfigError(f"{source}: field 'output_dir' must be a string")
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError(f"{source}: field 'seed' must be an integer")
        parameters = data.get(command, {})
        if not isinstance(parameters, dict):
            raise ConfigError(f"{source}: field {command!r} must be an object")
        known = {"command", "output_dir", "seed", *COMMANDS}
        for key in data:
            if key not in known:
                raise ConfigError(f"{source}: unknown field {key!r}")
        return cls(command, output_dir, seed, dict(parameters))

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "output_dir": self.output_dir,
            "seed": self.seed,
            self.command: dict(self.parameters),
        }


def load_config_file(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"{path}: {err.strerror or err}") from err
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(
            f"{path}: line {err.lineno}, column {err.colno}: {err.msg}"
        ) from err


def apply_override(data: dict[str, Any], assignment: str) -> None:
    """Apply one ``key=value`` override; dotted keys reach into blocks."""
    key, sep, raw = assignment.partition("=")
    if not sep or not key:
        raise ConfigError(
            f"override {assignment!r} must have the form key=value"
        )
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    target = data
    parts = key.split(".")
    for part in parts[:-1]:
        node = target.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(
                f"override {assignment!r}: {part!r} is not an object"
            )
        target = node
    target[parts[-1]] = value


def _require(params: dict[str, Any], allowed: dict[str, Any],
             command: str) -> dict[str, Any]:
    """Merge defaults with params, rejecting unknown keys."""
    for key in params:
        if key not in allowed:
            raise ConfigError(
                f"command {command!r}: unknown parameter {key!r} "
                f"(expected one of {sorted(allowed)})"
            )
    merged = dict(allowed)
    merged.update(params)
    return merged


def _write_csv(path: Path, header: Sequence[str],
               rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _run_solve(config: ExperimentConfig, outdir: Path) -> tuple[list[str], list[str]]:
    params = _require(config.parameters, {
        "length": 2, "j_xy": 1.0, "j_z": 1.0, "block_size": 1,
        "max_iter": None, "excitations": 1,
    }, "solve")
    spec = spinchain.build_xxz(int(params["length"]), float(params["j_xy"]),
                               float(params["j_z"]))
    width = int(params["block_size"])
    excitations = int(params["excitations"])
    max_iter = params["max_iter"]
    max_iter = spec.dim if max_iter is None else int(max_iter)
    rng = np.random.default_rng(config.seed)
    if width == 1:
        start = spinchain.random_state_vector(spec.length, rng)
        coeffs, basis = scalar.lanczos_run(spec, start, max_iter=max_iter)
        recs = scalar.tridiagonal_eigensolve(coeffs)
    else:
        start = block.random_orthonormal_block(spec.length, width, rng)
        coeffs, basis = block.block_lanczos_run(spec, start, max_iter=max_iter)
        recs = block.block_eigensolve(block.assemble_block_tridiagonal(coeffs))
    energies = sorted(rec.energy for rec in recs)[:max(excitations, 1)]
    artifact = "solve_spectrum.csv"
    _write_csv(outdir / artifact, ("index", "energy"),
               [(i, repr(float(e))) for i, e in enumerate(energies)])
    lines = [f"ground energy {energies[0]!r}"]
    for i, energy in enumerate(energies[1:], start=1):
        lines.append(f"excited {i} energy {energy!r}")
    return lines, [artifact]


def _run_incremental(config: ExperimentConfig,
                     outdir: Path) -> tuple[list[str], list[str]]:
    params = _require(config.parameters, {
        "scenario": "small", "length": 10, "j_xy": 1.0, "j_z": None,
        "lanczos_per_step": None, "dlambda_fractions": 1,
        "start_pattern": None, "descending_order": False,
    }, "incremental")
    scenario = params["scenario"]
    if scenario not in incremental.SCENARIOS:
        raise ConfigError(
            f"command 'incremental': scenario must be one of "
            f"{incremental.SCENARIOS}, got {scenario!r}"
        )
    stock = incremental.default_config(scenario)
    j_z = stock.j_z if params["j_z"] is None else float(params["j_z"])
    per_step = (stock.lanczos_per_step if params["lanczos_per_step"] is None
                else int(params["lanczos_per_step"]))
    start = None
    if params["start_pattern"] is not None:
        start = spinchain.ProductState.from_string(str(params["start_pattern"]))
    elif scenario == "random-start":
        start = incremental.alternating_spin_start()
    scenario_config = incremental.ScenarioConfig(
        scenario=scenario,
        length=int(params["length"]),
        j_xy=float(params["j_xy"]),
        j_z=j_z,
        lanczos_per_step=per_step,
        dlambda_fractions=int(params["dlambda_fractions"]),
        start_state=start,
        descending_order=bool(params["descending_order"]),
    )
    record = incremental.run_incremental(scenario_config)
    artifact = SCENARIO_ARTIFACTS[scenario]
    record.to_csv(outdir / artifact)
    lines = [
        f"scenario {scenario}: {len(record)} steps, final energy "
        f"{record.final_energy!r}, final delta {record.final_delta!r}"
    ]
    return lines, [artifact]


def _run_noise_sweep(config: ExperimentConfig,
                     outdir: Path) -> tuple[list[str], list[str]]:
    params = _require(config.parameters, {
        "block_size": 20, "block_counts": list(range(4, 21)),
        "etas": [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1], "trials": 32,
    }, "noise-sweep")
    rows = noise.mae_sweep(
        int(params["block_size"]),
        [int(c) for c in params["block_counts"]],
        [float(e) for e in params["etas"]],
        trials=int(params["trials"]),
        base_seed=config.seed,
    )
    summary = noise.summarize_sweep(rows)
    fits = noise.fit_summary(summary)
    noise.write_sweep_csv(rows, outdir / "noise_sweep.csv")
    noise.write_summary_csv(summary, outdir / "noise_summary.csv")
    report = noise.slope_report(fits)
    (outdir / "slope_report.txt").write_text(report)
    slopes = [fit.slope for fit in fits.values()]
    lines = [
        f"noise sweep: {len(rows)} points, slopes "
        f"{min(slopes):.4f}..{max(slopes):.4f}"
    ]
    return lines, ["noise_sweep.csv", "noise_summary.csv", "slope_report.txt"]


def _run_nonhermitian_demo(config: ExperimentConfig,
                           outdir: Path) -> tuple[list[str], list[str]]:
    params = _require(config.parameters, {
        "dimension": 64, "width": 2, "max_iter": None,
    }, "nonhermitian-demo")
    dim = int(params["dimension"])
    width = int(params["width"])
    max_iter = params["max_iter"]
    max_iter = 2 * dim if max_iter is None else int(max_iter)
    rng = np.random.default_rng(config.seed)
    mat = rng.standard_normal((dim, dim))
    op = nonhermitian.GeneralOperator.from_matrix(mat)
    right0, left0 = nonhermitian.paired_random_start(dim, width, rng)
    coeffs, pair = nonhermitian.two_sided_block_run(op, right0, left0,
                                                    max_iter=max_iter)
    computed = np.sort_complex(nonhermitian.t_eigenvalues(coeffs))
    reference = np.sort_complex(np.linalg.eigvals(mat))
    rows = [
        (repr(float(c.real)), repr(float(c.imag)),
         repr(float(r.real)), repr(float(r.imag)))
        for c, r in zip(computed, reference)
    ]
    _write_csv(outdir / "nonhermitian_spectrum.csv",
               ("computed_real", "computed_imag",
                "reference_real", "reference_imag"), rows)
    coeffs.save(outdir / "nonhermitian_coefficients.txt")
    error = nonhermitian.match_spectra(computed, reference)
    defect = nonhermitian.biorthogonality_check(pair)
    lines = [
        f"two-sided run: {coeffs.dimension} of {dim} directions, spectrum "
        f"error {error:.3e}, biorthogonality defect {defect:.3e}"
    ]
    return lines, ["nonhermitian_spectrum.csv", "nonhermitian_coefficients.txt"]


def _run_cost_table(config: ExperimentConfig,
                    outdir: Path) -> tuple[list[str], list[str]]:
    params = _require(config.parameters, {"q_values": [4, 40]}, "cost-table")
    rows = []
    lines = []
    for q in params["q_values"]:
        sweep = noise.cost_sweep(int(q))
        rows.extend((int(q), group, repr(float(cost))) for group, cost in sweep)
        best_group, best_cost = min(sweep, key=lambda item: item[1])
        lines.append(f"q={q}: best group size {best_group} (cost {best_cost!r})")
    _write_csv(outdir / "cost_table.csv", ("q", "group_size", "cost"), rows)
    return lines, ["cost_table.csv"]


_RUNNERS = {
    "solve": _run_solve,
    "incremental": _run_incremental,
    "noise-sweep": _run_noise_sweep,
    "nonhermitian-demo": _run_nonhermitian_demo,
    "cost-table": _run_cost_table,
}


def run(config_path: str | Path, overrides: Sequence[str] = (),
        output_dir: str | None = None, seed: int | None = None) -> int:
    """Execute one experiment; returns a process exit status."""
    try:
        data = load_config_file(config_path)
        if not isinstance(data, dict):
            raise ConfigError(f"{config_path}: top level must be an object")
        for assignment in overrides:
            apply_override(data, assignment)
        if output_dir is not None:
            data["output_dir"] = output_dir
        if seed is not None:
            data["seed"] = seed
        config = ExperimentConfig.from_dict(data, str(config_path))
        outdir = Path(config.output_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        started = time.perf_counter()
        lines, artifacts = _RUNNERS[config.command](config, outdir)
        elapsed = time.perf_counter() - started
        manifest = {
            "command": config.command,
            "config": config.to_dict(),
            "versions": {
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "blocklanczos": blocklanczos.__version__,
            },
            "wall_time_seconds": elapsed,
            "artifacts": artifacts,
        }
        with open(outdir / MANIFEST_NAME, "w", newline="\n") as handle:
            json.dump(manifest, handle, indent=2)
            handle.write("\n")
        for line in lines:
            print(line)
        return 0
    except ConfigError as err:
        print(f"config error: {err}")
        return 2
    except (ValueError, nonhermitian.SeriousBreakdownError) as err:
        print(f"error: {err}")
        return 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="blocklanczos",
        description=(
            "Run one experiment described by a JSON config file. Override "
            "precedence: config file < --set flags (in order) < "
            "--output-dir/--seed shorthands."
        ),
    )
    parser.add_argument("--config", required=True,
                        help="path to the JSON experiment config")
    parser.add_argument("--set", dest="overrides", action="append",
                        default=[], metavar="KEY=VALUE",
                        help="override a config value (dotted keys reach "
                             "into blocks; value parsed as JSON, falling "
                             "back to a plain string); repeatable")
    parser.add_argument("--output-dir", default=None,
                        help="override the artifact directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the base random seed")
    args = parser.parse_args(argv)
    return run(args.config, args.overrides, args.output_dir, args.seed)
