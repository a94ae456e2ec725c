"""Command-line front end.

    asymcoh coherence --rho rho.json --k sigmaz
    asymcoh properties --dim 2 --instances 200 --seed 7

Matrices are JSON files ``{"dim": d, "entries": [[re, im], ...]}`` (row-major).
Generators may instead be named: sigmax, sigmay, sigmaz or diag:v1,v2,...

Exit codes: 0 success, 2 invalid input, 3 optimizer or estimator did not
converge, 4 property-suite failure.
"""

import argparse
from dataclasses import dataclass, field
import datetime
import json
import sys

import numpy as np

from . import __version__
from .bounds import bounds_report, uncertainty_product_check
from .coherence import (
    normalized_oracle,
    oracle_basis,
    product_basis_coherence,
    spectral_oracle,
    tc_w_coherence,
)
from .core import SIGMA_X, SIGMA_Y, SIGMA_Z, DensityMatrix, GeneratorObservable, load_matrix
from .covariant import run_property_suite
from .errors import AsymcohError
from .estimation import convergence_study, estimate_tc_w_coherence
from .weak_values import kd_quasiprobability

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_SUITE_FAILED = 0, 2, 3, 4
COMMANDS = ("coherence", "oracle", "bounds", "properties", "kd", "estimate", "study")
NAMED = {"sigmax": SIGMA_X, "sigmay": SIGMA_Y, "sigmaz": SIGMA_Z}


class InputError(AsymcohError):
    invariant = "InvalidInput"


@dataclass
class RunConfig:
    command: str
    rho_path: str = None
    k_path: str = None
    k2_path: str = None
    dims: tuple = None
    opts: dict = field(default_factory=dict)
    seed: int = 0
    output_format: str = None
    output_path: str = None
    timestamp: bool = True


def load_operator(spec):
    """A named operator or a matrix file."""
    key = spec.strip().lower()
    if key in NAMED:
        return NAMED[key].copy()
    if key.startswith("diag:"):
        try:
            vals = [float(v) for v in key[5:].split(",") if v.strip()]
        except ValueError:
            raise InputError(f"cannot parse diagonal operator {spec!r}") from None
        if not vals:
            raise InputError("diag: needs at least one value")
        return np.diag(vals).astype(complex)
    try:
        return load_matrix(spec)
    except OSError as exc:
        raise InputError(f"cannot read {spec}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{spec} is not valid JSON: {exc.msg}") from None


def _need(value, flag):
    if value is None:
        raise InputError(f"{flag} is required for this command")
    return value


def _state(cfg):
    return DensityMatrix(load_operator(_need(cfg.rho_path, "--rho")))


def _generator(path, flag="--k"):
    return GeneratorObservable(load_operator(_need(path, flag)))


def _csv(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("" if v is None else (repr(v) if isinstance(v, float) else str(v)) for v in row))
    return "\n".join(lines) + "\n"


def _flat_csv(d):
    keys = sorted(k for k, v in d.items() if not isinstance(v, (dict, list)))
    return _csv(keys, [[d[k] for k in keys]])


def _cmd_coherence(cfg):
    rho, K = _state(cfg), _generator(cfg.k_path)
    o = cfg.opts
    kw = dict(restarts=o.get("restarts", 16), tol=o.get("tol", 1e-8), seed=cfg.seed)
    if cfg.dims:
        res = product_basis_coherence(rho, K, cfg.dims, **kw)
    else:
        res = tc_w_coherence(rho, K, **kw)
    code = EXIT_OK if res.converged else EXIT_NOT_CONVERGED
    return res.to_dict(), None, code


def _cmd_oracle(cfg):
    rho, K = _state(cfg), _generator(cfg.k_path)
    out = {
        "oracle_value": spectral_oracle(rho, K),
        "normalized": normalized_oracle(rho, K) if K.spectral_radius > 0 else None,
        "argmax_basis": oracle_basis(rho, K).to_dict(),
    }
    return out, None, EXIT_OK


def _cmd_bounds(cfg):
    rho, K = _state(cfg), _generator(cfg.k_path)
    X = _generator(cfg.k2_path, "--k2") if cfg.k2_path else None
    rep = bounds_report(rho, K, X)
    out = rep.to_dict()
    if X is not None:
        lhs, rhs, ok = uncertainty_product_check(rho, K, X)
        out.update(uncertainty_lhs=lhs, uncertainty_rhs=rhs, uncertainty_ok=ok)
    code = EXIT_OK if rep.ok and out.get("uncertainty_ok", True) else EXIT_SUITE_FAILED
    return out, rep.to_csv() if X is None else _flat_csv(out), code


def _cmd_properties(cfg):
    d = _need(cfg.opts.get("dim"), "--dim")
    rep = run_property_suite(d, cfg.opts.get("instances", 200), cfg.seed)
    rows = [[r.name, r.instances_run, float(r.max_violation), r.tolerance, r.passed] for r in rep.records]
    csv_text = _csv(["name", "instances_run", "max_violation", "tolerance", "pass"], rows)
    code = EXIT_OK if rep.passed else EXIT_SUITE_FAILED
    return rep.to_dict(), csv_text, code, rep.table() + "\n"


def _cmd_kd(cfg):
    rho, K = _state(cfg), _generator(cfg.k_path)
    basis_x = _generator(cfg.k2_path, "--k2").eigenvectors if cfg.k2_path else oracle_basis(rho, K)
    table = kd_quasiprobability(rho, K.eigenvectors, basis_x)
    out = table.to_dict()
    out["imag_abs_sum"] = table.imag_abs_sum()
    out["marginal_error"] = table.marginal_error
    return out, table.to_csv(), EXIT_OK


def _budget(cfg):
    o = cfg.opts
    kw = {}
    for key in ("delta", "restarts", "max_iters"):
        if o.get(key) is not None:
            kw[key] = o[key]
    return kw


def _cmd_estimate(cfg):
    rho, K = _state(cfg), _generator(cfg.k_path)
    shots = cfg.opts.get("shots") or [1_000_000]
    if len(shots) != 1:
        raise InputError("estimate takes a single --shots value")
    rec = estimate_tc_w_coherence(rho, K, shots=shots[0], seed=cfg.seed, **_budget(cfg))
    code = EXIT_OK if rec.converged else EXIT_NOT_CONVERGED
    return rec.to_dict(), _flat_csv(rec.to_dict()), code


def _cmd_study(cfg):
    rho, K = _state(cfg), _generator(cfg.k_path)
    grid = cfg.opts.get("shots") or [10_000, 100_000, 1_000_000]
    kw = _budget(cfg)
    study = convergence_study(rho, K, grid, cfg.opts.get("repeats", 20), cfg.seed, **kw)
    return study.to_dict(), study.to_csv(), EXIT_OK


HANDLERS = {
    "coherence": _cmd_coherence,
    "oracle": _cmd_oracle,
    "bounds": _cmd_bounds,
    "properties": _cmd_properties,
    "kd": _cmd_kd,
    "estimate": _cmd_estimate,
    "study": _cmd_study,
}
DEFAULT_FORMAT = {"properties": "table", "study": "csv"}


def run(cfg):
    """Execute ``cfg``; returns (exit code, report text)."""
    try:
        result = HANDLERS[cfg.command](cfg)
    except AsymcohError as exc:
        return EXIT_INVALID, json.dumps(exc.as_dict(), sort_keys=True) + "\n"
    except ValueError as exc:
        return EXIT_INVALID, json.dumps({"error": "InvalidInput", "message": str(exc)}, sort_keys=True) + "\n"
    payload, csv_text, code = result[:3]
    table = result[3] if len(result) > 3 else None
    fmt = cfg.output_format or DEFAULT_FORMAT.get(cfg.command, "json")
    if fmt == "csv":
        text = csv_text if csv_text is not None else _flat_csv(payload)
    elif fmt == "table" and table is not None:
        text = table
    else:
        doc = {"command": cfg.command, "seed": cfg.seed, "version": __version__, "result": payload}
        if cfg.timestamp:
            doc["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    return code, text


def _int_list(text):
    try:
        return [int(float(v)) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="asymcoh", description="Coherence as translational asymmetry.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--rho", help="density matrix JSON file")
    p.add_argument("--k", help="generator: JSON file or sigmax|sigmay|sigmaz|diag:v1,v2,...")
    p.add_argument("--k2", help="second observable X (bounds: uncertainty product; kd: basis_x)")
    p.add_argument("--dims", type=_int_list, help="subsystem dimensions for product bases, e.g. 2,2")
    p.add_argument("--dim", type=int, help="dimension for the property suite")
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iters", type=int, dest="max_iters")
    p.add_argument("--tol", type=float)
    p.add_argument("--shots", type=_int_list, help="shots per probability (study: comma-separated grid)")
    p.add_argument("--delta", type=float)
    p.add_argument("--instances", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv", "table"), dest="output_format")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--no-timestamp", action="store_true")
    return p


def config_from_args(args):
    opts = {
        k: getattr(args, k)
        for k in ("dim", "restarts", "max_iters", "tol", "shots", "delta", "instances", "repeats")
        if getattr(args, k) is not None
    }
    return RunConfig(
        command=args.command,
        rho_path=args.rho,
        k_path=args.k,
        k2_path=args.k2,
        dims=tuple(args.dims) if args.dims else None,
        opts=opts,
        seed=args.seed,
        output_format=args.output_format,
        output_path=args.out,
        timestamp=not args.no_timestamp,
    )


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    code, text = run(cfg)
    if code == EXIT_INVALID:
        sys.stderr.write(text)
        return code
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
