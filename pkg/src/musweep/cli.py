"""Command line front end.

Reads a JSON model file and a sweep configuration, runs the selected
algorithm(s) and writes ``summary.json`` and ``bounds.csv`` into ``--out``.

Exit codes: 0 converged, 2 not converged, 3 input error.
"""

import argparse
from dataclasses import asdict, dataclass, fields
import csv
import json
import math
import numbers
import os
import sys
import time

import numpy as np

from . import kernels
from .bounds import evaluate_box
from .engine import DEFAULT_MAX_BOXES, compare, make_grid, run_conventional, run_parallel
from .errors import ModelFormatError, MuSweepError
from .plant import StateSpaceModel, freq_response
from .uncertainty import unit_box

__all__ = ["SweepConfig", "load_model", "load_config", "run", "main",
           "EXIT_OK", "EXIT_NOT_CONVERGED", "EXIT_INPUT"]

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_INPUT = 3

MODES = ("parallel", "conventional", "compare")
UNCERTAINTY_TYPES = ("real_diagonal",)
CSV_HEADER = ("omega", "ub_bbdelta", "lb_bbdelta")


@dataclass
class SweepConfig:
    """Everything needed to reproduce a run (the model is referenced by path)."""

    model: str = None
    mode: str = "parallel"
    a: float = 0.01
    b: float = 15.01
    N: int = 30
    K: int = 50
    eps_rel: float = 0.01
    eps_abs: float = 0.005
    IT: int = 100
    seed: int = 0
    workers: int = 1
    max_boxes: int = DEFAULT_MAX_BOXES
    out: str = "musweep_out"

    def validate(self):
        if self.model is None:
            raise ModelFormatError("no model file given (use --model or the config key 'model')")
        if self.mode not in MODES:
            raise ModelFormatError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        for name in ("a", "b", "eps_rel", "eps_abs"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, numbers.Real) or not math.isfinite(v):
                raise ModelFormatError(f"config {name} must be a finite number, got {v!r}")
            setattr(self, name, float(v))
        for name in ("N", "K", "IT", "seed", "workers", "max_boxes"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, numbers.Integral):
                raise ModelFormatError(f"config {name} must be an integer, got {v!r}")
        if self.seed < 0:
            raise ModelFormatError(f"config seed must be non-negative, got {self.seed}")
        if self.workers < 1:
            raise ModelFormatError(f"config workers must be at least 1, got {self.workers}")
        if self.mode != "conventional":
            if not 0.0 < self.eps_rel < 1.0:
                raise ModelFormatError(f"eps_rel must lie in (0, 1), got {self.eps_rel}")
            if self.IT < 1:
                raise ModelFormatError(f"IT must be at least 1, got {self.IT}")
        if self.mode != "parallel":
            if not self.eps_abs > 0.0:
                raise ModelFormatError(f"eps_abs must be positive, got {self.eps_abs}")
            if self.max_boxes < 1:
                raise ModelFormatError(f"max_boxes must be at least 1, got {self.max_boxes}")
        return self


_CONFIG_KEYS = {f.name for f in fields(SweepConfig)}


def _matrix_from_json(value, name):
    if not isinstance(value, list) or not value:
        raise ModelFormatError(f"{name}: expected a non-empty list of rows")
    width = None
    for r, row in enumerate(value):
        if not isinstance(row, list):
            raise ModelFormatError(f"{name}[{r}]: expected a list of numbers, got {type(row).__name__}")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ModelFormatError(f"{name}[{r}]: row has {len(row)} entries, expected {width}")
        for c, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, numbers.Real):
                raise ModelFormatError(f"{name}[{r}][{c}]: expected a number, got {x!r}")
            if not math.isfinite(x):
                raise ModelFormatError(f"{name}[{r}][{c}]: entry is not finite ({x!r})")
    if width == 0:
        raise ModelFormatError(f"{name}: rows are empty")
    return np.array(value, dtype=float)


def load_model(path):
    """Read a JSON model file.

    The file holds an object with keys ``"A"``, ``"B"``, ``"C"``, an optional
    ``"D"`` (row-major nested lists) and an optional
    ``"uncertainty": {"type": "real_diagonal"}``. The uncertainty is one real
    parameter per column of ``B`` ranging over ``[-1, 1]``.

    Returns
    -------
    model : StateSpaceModel
    n : int
        Number of uncertain parameters.

    Raises
    ------
    ModelFormatError
        On unreadable files, malformed JSON, or invalid matrices, with a
        message naming the offending field.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ModelFormatError(f"{path}: cannot read model file ({exc.strerror or exc})") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ModelFormatError(f"{path}: top level must be a JSON object")
    missing = [k for k in "ABC" if k not in data]
    if missing:
        raise ModelFormatError(f"{path}: missing required key(s) {', '.join(missing)}")
    unc = data.get("uncertainty", {"type": "real_diagonal"})
    if not isinstance(unc, dict) or unc.get("type") not in UNCERTAINTY_TYPES:
        raise ModelFormatError(
            f"{path}: uncertainty.type must be one of {', '.join(UNCERTAINTY_TYPES)}, got {unc!r}")
    mats = {k: _matrix_from_json(data[k], k) for k in "ABCD" if k in data}
    try:
        model = StateSpaceModel(mats["A"], mats["B"], mats["C"], mats.get("D"))
    except ValueError as exc:
        raise ModelFormatError(f"{path}: {exc}") from exc
    return model, model.n_uncertain


def load_config(path):
    """Read a JSON config file into a dict of ``SweepConfig`` fields.

    A previous ``summary.json`` is accepted too; its ``"config"`` echo is used.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ModelFormatError(f"{path}: cannot read config file ({exc.strerror or exc})") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if isinstance(data, dict) and isinstance(data.get("config"), dict):
        data = data["config"]
    if not isinstance(data, dict):
        raise ModelFormatError(f"{path}: config must be a JSON object")
    unknown = sorted(set(data) - _CONFIG_KEYS)
    if unknown:
        raise ModelFormatError(f"{path}: unknown config key(s) {', '.join(unknown)}")
    return data


def bbdelta_bounds(model, grid, seed=0):
    """Upper and lower bound of the full unit box at every grid point, in grid order."""
    root = unit_box(model.n_uncertain)
    rows = []
    for w in grid.points:
        pair = evaluate_box(freq_response(model, w), root, seed=seed)
        rows.append((float(w), pair.ub, pair.lb))
    return rows


def _write_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(CSV_HEADER)
        for w, ub, lb in rows:
            out.writerow([repr(w), repr(ub), repr(lb)])


def _bound_metadata():
    return {
        "tau_imag": kernels.TAU_IMAG,
        "lower_bound": "centre, corners and exact edge search of feasible points",
        "upper_bound": "min(coarse-norm, perturbation)",
        "upper_bound_tags": [kernels.TAG_NAMES[k] for k in sorted(kernels.TAG_NAMES)],
        "kernel": kernels.backend_name(),
    }


def run(config, model=None):
    """Execute one configured run and write its artifacts.

    Returns
    -------
    code : int
        ``EXIT_OK`` or ``EXIT_NOT_CONVERGED``.
    summary : dict
        The content written to ``summary.json``.
    """
    config.validate()
    if model is None:
        model, _ = load_model(config.model)
    grid = make_grid(config.a, config.b, config.N, config.K)
    start = time.perf_counter()
    if config.mode == "parallel":
        res = run_parallel(model, grid, config.eps_rel, config.IT,
                           seed=config.seed, workers=config.workers)
        body, converged = res.to_dict(), res.converged
    elif config.mode == "conventional":
        res = run_conventional(model, grid, config.eps_abs, config.max_boxes, seed=config.seed)
        body, converged = res.to_dict(), res.converged
    else:
        cmp_ = compare(model, grid, config.eps_rel, config.eps_abs, config.IT, config.max_boxes,
                       seed=config.seed, workers=config.workers)
        body = cmp_.to_dict()
        converged = cmp_.parallel.converged and cmp_.conventional.converged
    elapsed = time.perf_counter() - start

    summary = {"mode": config.mode}
    summary.update(body)
    summary["converged"] = converged
    summary["config"] = asdict(config)
    summary["model"] = {"n_states": model.n_states, "n_uncertain": model.n_uncertain}
    summary["bounds"] = _bound_metadata()
    summary["grid"] = {"size": grid.size, "step": grid.step}
    summary["elapsed_seconds"] = elapsed

    os.makedirs(config.out, exist_ok=True)
    with open(os.path.join(config.out, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, allow_nan=False)
        fh.write("\n")
    _write_csv(os.path.join(config.out, "bounds.csv"), bbdelta_bounds(model, grid, config.seed))
    return (EXIT_OK if converged else EXIT_NOT_CONVERGED), summary


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="musweep",
                description="Maximal real structured singular value over a frequency grid.")
    p.add_argument("--config", metavar="PATH", help="JSON config file; flags override its values")
    p.add_argument("--model", metavar="PATH", help="JSON model file with A, B, C and optional D")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--a", type=float, help="lowest frequency (rad/s)")
    p.add_argument("--b", type=float, help="highest frequency (rad/s)")
    p.add_argument("--N", type=int, help="number of interleaved branches")
    p.add_argument("--K", type=int, help="frequencies per branch")
    p.add_argument("--eps-rel", dest="eps_rel", type=float, help="relative tolerance (parallel)")
    p.add_argument("--eps-abs", dest="eps_abs", type=float, help="absolute tolerance (conventional)")
    p.add_argument("--it", dest="IT", type=int, help="maximum rounds per step (parallel)")
    p.add_argument("--seed", type=int, help="seed for sampled corners when n > 10")
    p.add_argument("--workers", type=int, help="threads for bound evaluation (results are identical)")
    p.add_argument("--max-boxes", dest="max_boxes", type=int,
                   help="per-frequency box cap (conventional)")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--quiet", action="store_true", help="do not print the summary line")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        values = load_config(args.config) if args.config else {}
        for key in _CONFIG_KEYS:
            v = getattr(args, key, None)
            if v is not None:
                values[key] = v
        config = SweepConfig(**values)
        code, summary = run(config)
    except (MuSweepError, ValueError, OSError) as exc:
        print(f"musweep: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not args.quiet:
        if config.mode == "compare":
            p = summary["parallel"]
            print(f"parallel mu_hat={p['mu_hat']:.6g} at omega={p['peak_omega']:.6g}; "
                  f"conventional mu in [{summary['conventional']['mu_hat']:.6g}, "
                  f"{summary['conventional']['mu_upper']:.6g}]; box ratio {summary['box_ratio']:.3g}")
        else:
            print(f"mu_hat={summary['mu_hat']:.6g} at omega={summary['peak_omega']:.6g} "
                  f"(i, j)={tuple(summary['peak_index'])} converged={summary['converged']}")
        print(f"wrote {os.path.join(config.out, 'summary.json')} and bounds.csv")
    return code


if __name__ == "__main__":
    sys.exit(main())
