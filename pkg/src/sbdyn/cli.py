"""Command-line drivers for simulations, depth searches, sweeps, and estimates."""
from __future__ import annotations

import functools
import json
import math
import os
import sys

import click
import numpy as np

from .errors import CapacityError, ContractViolationError
from .experiments import (
    AdvantageReport,
    extrapolate_advantage,
    fit_depths,
    n_dtheta_formula,
    n_qubits_variational,
    n_theta_formula,
    noise_sweep,
    trotter_depth_search,
)
from .model import SpinBosonSpec, n_h_formula
from .noise import (
    DeviceNoiseParams,
    ScaledNoiseModel,
    calibrate_confusion,
    confusion_matrix,
    mitigate_readout,
)
from .noisy_eval import SampledMcLachlanEvaluator
from .propagate import IntegratorConfig, propagate_trotter, propagate_variational

EXIT_CONTRACT = 2
EXIT_CAPACITY = 3


def _exit_codes(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except CapacityError as exc:
            click.echo(f"capacity error: {exc}", err=True)
            sys.exit(EXIT_CAPACITY)
        except ContractViolationError as exc:
            click.echo(f"contract violation: {exc}", err=True)
            sys.exit(EXIT_CONTRACT)

    return wrapper


def _load_model(text: str) -> SpinBosonSpec:
    if os.path.exists(text):
        with open(text) as f:
            text = f.read()
    try:
        return SpinBosonSpec.from_json(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ContractViolationError(f"invalid model description: {exc}") from exc


def _parse_eta(value: str | None) -> float | None:
    if value is None:
        return None
    if value.lower() in ("inf", "infinity"):
        return math.inf
    return float(value)


def _emit_record(rec, out: str | None, fmt: str):
    if out is None:
        payload = {
            "final_infidelity": rec.final_infidelity,
            "max_infidelity": rec.max_infidelity,
            "n_accepted": rec.n_accepted,
            "n_rejected": rec.n_rejected,
            "nfev": rec.nfev,
        }
        click.echo(json.dumps(payload, indent=2))
    elif fmt == "csv":
        rec.to_csv(out)
    else:
        rec.to_json(out)


model_option = click.option("--model", "model_text", required=True, help="model JSON (inline or file path)")
t_final_option = click.option("--t-final", default=10.0, show_default=True)
out_option = click.option("--out", default=None, help="output file (stdout summary if omitted)")
format_option = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)


@click.group()
def main():
    """Spin-boson dynamics: variational and product-formula simulators."""


@main.command("evolve-var")
@model_option
@click.option("--depth", default=1, show_default=True)
@click.option("--eta", default=None, help="noise scale (number or 'inf'); omit for exact statevector")
@click.option("--shots", default=8192, show_default=True)
@click.option("--seed", default=0, show_default=True)
@t_final_option
@out_option
@format_option
@_exit_codes
def evolve_var(model_text, depth, eta, shots, seed, t_final, out, fmt):
    """Integrate the variational equation of motion."""
    spec = _load_model(model_text)
    eta_val = _parse_eta(eta)
    if eta_val is None:
        rec = propagate_variational(spec, depth, t_final)
    else:
        evaluator = SampledMcLachlanEvaluator(
            spec, depth, ScaledNoiseModel(DeviceNoiseParams(), eta_val), shots=shots, seed=seed
        )
        rec = propagate_variational(
            spec, depth, t_final, config=IntegratorConfig.sampled(), system_fn=evaluator.system
        )
    _emit_record(rec, out, fmt)


@main.command("evolve-trotter")
@model_option
@click.option("--depth", required=True, type=int)
@t_final_option
@out_option
@format_option
@_exit_codes
def evolve_trotter(model_text, depth, t_final, out, fmt):
    """Evolve with a fixed number of product-formula layers."""
    rec = propagate_trotter(_load_model(model_text), depth, t_final)
    _emit_record(rec, out, fmt)


@main.command("depth-search")
@model_option
@click.option("--eps-thresh", required=True, type=float)
@t_final_option
@out_option
@_exit_codes
def depth_search(model_text, eps_thresh, t_final, out):
    """Minimum product-formula depth keeping infidelity below a threshold."""
    res = trotter_depth_search(_load_model(model_text), eps_thresh, t_final)
    payload = {
        "system": res.system,
        "eps_thresh": res.eps_thresh,
        "final_depth": res.final_depth,
        "n_increments": len(res.depth_schedule),
    }
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w") as f:
            f.write(text + "\n")
    click.echo(text)


@main.command("noise-sweep")
@model_option
@click.option("--depth", default=1, show_default=True)
@click.option("--etas", default="1,2,10,inf", show_default=True, help="comma-separated")
@click.option("--seeds", default="0,1,2", show_default=True, help="comma-separated")
@click.option("--shots", default=8192, show_default=True)
@t_final_option
@out_option
@_exit_codes
def noise_sweep_cmd(model_text, depth, etas, seeds, shots, t_final, out):
    """Mean trajectory infidelity across noise scales."""
    spec = _load_model(model_text)
    eta_list = [_parse_eta(e) for e in etas.split(",")]
    seed_list = [int(s) for s in seeds.split(",")]
    summary = noise_sweep(spec, depth, eta_list, seed_list, shots=shots, t_final=t_final)
    if out:
        summary.to_csv(out)
    for eta in eta_list:
        click.echo(f"eta={eta}: mean final infidelity {summary.mean_final_infidelity(eta):.3e}")


@main.command("fit-extrapolate")
@click.option("--input", "input_path", required=True, help="JSON: {'trotter': [[[nq, d], ...], ...], 'variational': [...]}")
@click.option("--target-nq", default=120, show_default=True)
@out_option
@_exit_codes
def fit_extrapolate(input_path, target_nq, out):
    """Fit depth-vs-qubits lines per regime and project to a large register."""
    with open(input_path) as f:
        data = json.load(f)
    fits_t = [fit_depths([tuple(p) for p in pts]) for pts in data["trotter"]]
    fits_v = [fit_depths([tuple(p) for p in pts]) for pts in data["variational"]]
    report: AdvantageReport = extrapolate_advantage(fits_t, fits_v, target_nq=target_nq)
    text = report.to_json()
    if out:
        with open(out, "w") as f:
            f.write(text + "\n")
    click.echo(text)


@main.command("resource-estimate")
@click.option("--modes", "m", required=True, type=int)
@click.option("--n-max", required=True, type=int)
@click.option("--depth", required=True, type=int)
@out_option
@_exit_codes
def resource_estimate(m, n_max, depth, out):
    """Closed-form parameter/qubit/term/gradient-circuit counts."""
    if m < 1 or n_max < 1 or depth < 1:
        raise ContractViolationError("modes, n-max, and depth must all be >= 1")
    payload = {
        "n_theta": n_theta_formula(m, n_max, depth),
        "n_q": n_qubits_variational(m, n_max),
        "n_h": n_h_formula(m, n_max),
        "n_dtheta": n_dtheta_formula(m, n_max, depth),
    }
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w") as f:
            f.write(text + "\n")
    click.echo(text)


@main.command("readout-calib")
@click.option("--n-qubits", default=3, show_default=True)
@click.option("--p-flip", default=DeviceNoiseParams().readout_error, show_default=True)
@click.option("--shots", default=8192, show_default=True)
@click.option("--seed", default=0, show_default=True)
@out_option
@_exit_codes
def readout_calib(n_qubits, p_flip, shots, seed, out):
    """Sample a readout calibration and report mitigation quality."""
    rng = np.random.default_rng(seed)
    truth = confusion_matrix(n_qubits, p_flip)
    est = calibrate_confusion(truth, shots, rng)
    # round-trip check on a random state's distribution
    p = rng.dirichlet(np.ones(2**n_qubits))
    counts = rng.multinomial(shots, truth @ p)
    recovered = mitigate_readout(counts, est)
    payload = {
        "confusion_max_error": float(np.max(np.abs(est - truth))),
        "mitigation_max_error": float(np.max(np.abs(recovered - p))),
    }
    if out:
        np.savetxt(out, est, delimiter=",")
    click.echo(json.dumps(payload, indent=2))


if __name__ == "__main__":
    main()
