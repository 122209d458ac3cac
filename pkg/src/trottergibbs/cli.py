"""Reproducible command-line experiments.

Subcommands
-----------
lwf-convergence : expansion order vs target error for the Taylor and
                  low-weight Fourier routes, with linear fits.
qubits-saved    : ancilla-count table against the block-encoding baseline.
pipeline        : one end-to-end partition-function run with manifest.
trotter-order   : effective-Hamiltonian error law and fitted slopes.

Every command reads a single JSON config document (--config), honors a
--seed override, and writes CSV/JSON artifacts plus a manifest into the
output directory.  Exit codes: 0 success, 2 config error, 3 numeric
failure.  Floats in CSV carry 17 significant digits so reruns are
byte-comparable.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cheb import exact_partition
from .lwf import gibbs_fourier, gibbs_taylor, taylor_order
from .paulis import PauliString
from .pipeline import PipelineConfig, ancilla_savings, run_pipeline
from .syk import HamiltonianTerms, build_syk_hamiltonian, sample_syk
from .trotter import build_plan, trotter_error_norm

FORMAT_VERSION = 1
FLOAT_FMT = ".17g"

COMMANDS = ("lwf-convergence", "qubits-saved", "pipeline", "trotter-order")

_num = (int, float)

MODEL_SCHEMAS = {
    "syk": {
        "kind": (str, None, True),
        "n_majorana": (int, 8, False),
        "seed": (int, 7, False),
        "one_norm": (_num, None, False),
    },
    "pauli": {
        "kind": (str, None, True),
        "n_qubits": (int, None, True),
        "terms": (list, None, True),
    },
}

DEFAULT_MODEL = {"kind": "syk", "n_majorana": 8, "seed": 7, "one_norm": 1.0}

# Fourth-order Trotter errors sit below the eigensolver noise floor unless
# the commutator scale is large, so the order-law command defaults to a
# stronger coupling normalization; slopes are scale-invariant.
DEFAULT_TROTTER_MODEL = {"kind": "syk", "n_majorana": 8, "seed": 7, "one_norm": 64.0}

SCHEMAS = {
    "lwf-convergence": {
        "betas": (list, [1.0, 2.0, 4.0, 8.0], False),
        "delta": (_num, None, False),
        "eps_grid": (list, [1e-2, 1e-3, 1e-4, 1e-5, 1e-6], False),
        "grid_points": (int, 1000, False),
        "include_taylor": (bool, True, False),
        "seed": (int, 0, False),
    },
    "qubits-saved": {
        "n_majorana": (list, [8, 10, 12, 14, 16], False),
        "seed": (int, 0, False),
    },
    "pipeline": {
        "model": (dict, DEFAULT_MODEL, False),
        "beta": (_num, 2.0, False),
        "order": (int, 2, False),
        "base_step": (_num, 1.0, False),
        "m_cheb": (int, 4, False),
        "eps_qsp": (_num, 1e-6, False),
        "eps_cheb": (_num, 1e-4, False),
        "eps_stat": (_num, 0.05, False),
        "mode": (str, "exact", False),
        "seed": (int, 0, False),
    },
    "trotter-order": {
        "model": (dict, DEFAULT_TROTTER_MODEL, False),
        "orders": (list, [1, 2, 4], False),
        "tau_min": (_num, 1e-3, False),
        "tau_max": (_num, 1e-1, False),
        "tau_points": (int, 7, False),
        "seed": (int, 0, False),
    },
}


class ConfigError(ValueError):
    """A config document failed validation."""


def validate_config(doc: dict, schema: dict, where: str) -> dict:
    """Schema-check one document level; unknown keys are rejected."""
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected a JSON object, got {type(doc).__name__}")
    unknown = sorted(set(doc) - set(schema))
    if unknown:
        raise ConfigError(f"{where}: unknown config keys {unknown}")
    out = {}
    for key, (types, default, required) in schema.items():
        if key in doc and doc[key] is not None:
            value = doc[key]
            if isinstance(value, bool) and types is not bool:
                raise ConfigError(f"{where}: key {key!r} must not be a boolean")
            if not isinstance(value, types):
                raise ConfigError(
                    f"{where}: key {key!r} has type {type(value).__name__}"
                )
            out[key] = value
        elif required:
            raise ConfigError(f"{where}: missing required key {key!r}")
        else:
            out[key] = default
    return out


def build_model(doc: dict) -> HamiltonianTerms:
    """Hamiltonian from a model sub-document (SYK draw or literal terms)."""
    kind = doc.get("kind")
    if kind not in MODEL_SCHEMAS:
        raise ConfigError(f"model.kind must be one of {sorted(MODEL_SCHEMAS)}")
    spec = validate_config(doc, MODEL_SCHEMAS[kind], f"model[{kind}]")
    if kind == "syk":
        h = build_syk_hamiltonian(sample_syk(spec["n_majorana"], seed=spec["seed"]))
        if spec["one_norm"] is not None:
            factor = float(spec["one_norm"]) / h.one_norm
            h = HamiltonianTerms(
                h.n_qubits, [(c * factor, s) for c, s in h.terms], provenance=h.provenance
            )
        return h
    terms = []
    for entry in spec["terms"]:
        if not (isinstance(entry, list) and len(entry) == 2):
            raise ConfigError("model.terms entries must be [coefficient, label] pairs")
        coef, label = entry
        if isinstance(coef, bool) or not isinstance(coef, _num):
            raise ConfigError("model.terms coefficients must be numbers")
        try:
            terms.append((float(coef), PauliString.from_label(str(label))))
        except ValueError as err:
            raise ConfigError(f"model.terms label {label!r}: {err}") from err
    return HamiltonianTerms(spec["n_qubits"], terms)


def format_value(value) -> str:
    if isinstance(value, float):
        return format(value, FLOAT_FMT)
    return str(value)


def write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def write_json(path: Path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256_of(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out_dir: Path, command: str, cfg: dict, artifacts: list[Path]) -> Path:
    """Record the run: config hash, code version, artifact digests.

    The timestamp documents when the run happened; determinism claims are
    about the artifact bytes, which the digests pin down.
    """
    manifest = {
        "format_version": FORMAT_VERSION,
        "command": command,
        "code_version": __version__,
        "config_sha256": hashlib.sha256(
            json.dumps(cfg, sort_keys=True).encode()
        ).hexdigest(),
        "master_seed": cfg.get("seed", 0),
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "artifacts": [
            {"path": p.name, "sha256": sha256_of(p)} for p in sorted(artifacts)
        ],
    }
    path = out_dir / "manifest.json"
    write_json(path, manifest)
    return path


def _linear_fit(x: np.ndarray, y: np.ndarray) -> dict:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    total = y - np.mean(y)
    denom = float(np.dot(total, total))
    r2 = 1.0 - float(np.dot(resid, resid)) / denom if denom > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


def cmd_lwf_convergence(cfg: dict, out_dir: Path) -> list[Path]:
    grid = np.linspace(-1.0, 1.0, cfg["grid_points"])
    eps_grid = [float(e) for e in cfg["eps_grid"]]
    rows = []
    fits = []
    for beta in cfg["betas"]:
        beta = float(beta)
        delta = float(cfg["delta"]) if cfg["delta"] is not None else 1.0 / beta
        orders = {"taylor": [], "lwf": []}
        for eps in eps_grid:
            if cfg["include_taylor"]:
                k = taylor_order(beta, eps)
                ts = gibbs_taylor(beta, k)
                sup = float(np.max(np.abs(ts.evaluate(grid) - np.exp(-beta * (grid + 1.0)))))
                rows.append(("taylor", beta, k, sup))
                orders["taylor"].append(k)
            fa = gibbs_fourier(beta, delta, eps)
            rows.append(("lwf", beta, fa.M, fa.sup_error(cfg["grid_points"])))
            orders["lwf"].append(fa.M)
        log_inv_eps = np.log(1.0 / np.asarray(eps_grid))
        for kind, ms in orders.items():
            if ms:
                fit = _linear_fit(log_inv_eps, np.asarray(ms, dtype=float))
                fits.append({"expansion_type": kind, "beta": beta, **fit})
    csv_path = out_dir / "lwf_convergence.csv"
    write_csv(csv_path, ["expansion_type", "beta", "m_or_k", "sup_error"], rows)
    fits_path = out_dir / "lwf_fits.json"
    write_json(fits_path, {"format_version": FORMAT_VERSION, "eps_grid": eps_grid, "fits": fits})
    return [csv_path, fits_path]


def cmd_qubits_saved(cfg: dict, out_dir: Path) -> list[Path]:
    rows = []
    for n in cfg["n_majorana"]:
        if not isinstance(n, int) or isinstance(n, bool):
            raise ConfigError("n_majorana entries must be integers")
        rows.append((n, math.comb(n, 4), ancilla_savings(n), 1))
    csv_path = out_dir / "qubits_saved.csv"
    write_csv(csv_path, ["n_majorana", "gamma", "saved", "this_method_ancillas"], rows)
    return [csv_path]


def cmd_pipeline(cfg: dict, out_dir: Path) -> list[Path]:
    model = build_model(cfg["model"])
    try:
        pipe_cfg = PipelineConfig(
            model=model,
            beta=float(cfg["beta"]),
            order=cfg["order"],
            base_step=float(cfg["base_step"]),
            m_cheb=cfg["m_cheb"],
            eps_qsp=float(cfg["eps_qsp"]),
            eps_cheb=float(cfg["eps_cheb"]),
            eps_stat=float(cfg["eps_stat"]),
            mode=cfg["mode"],
            seed=cfg["seed"],
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err
    result = run_pipeline(pipe_cfg)
    payload = {
        "format_version": FORMAT_VERSION,
        "beta": result.beta,
        "mode": result.mode,
        "m_cheb": result.m_cheb,
        "order": pipe_cfg.order,
        "base_step": pipe_cfg.base_step,
        "seed": pipe_cfg.seed,
        "extrapolated": result.extrapolated,
        "extrapolated_exact": result.extrapolated_exact,
        "oracle": result.oracle,
        "eps_cheb_realized": result.eps_cheb_realized,
        "cost": result.cost,
    }
    json_path = out_dir / "pipeline_result.json"
    write_json(json_path, payload)
    csv_path = out_dir / "pipeline_nodes.csv"
    write_csv(
        csv_path,
        ["s_k", "d_k", "z_node_exact", "z_node_hat", "depth", "queries"],
        [(r.s_k, r.d_k, r.z_exact, r.z_hat, r.depth, r.queries) for r in result.nodes],
    )
    jsonl_path = out_dir / "pipeline_nodes.jsonl"
    jsonl_path.write_text(result.node_json_lines() + "\n")
    return [json_path, csv_path, jsonl_path]


def cmd_trotter_order(cfg: dict, out_dir: Path) -> list[Path]:
    model = build_model(cfg["model"])
    taus = np.geomspace(float(cfg["tau_min"]), float(cfg["tau_max"]), cfg["tau_points"])
    rows = []
    fits = []
    for p in cfg["orders"]:
        if not isinstance(p, int) or isinstance(p, bool):
            raise ConfigError("orders entries must be integers")
        plan = build_plan(model.n_terms, p)
        errs = np.array([trotter_error_norm(model, float(t), plan) for t in taus])
        rows.extend((p, float(t), float(e)) for t, e in zip(taus, errs))
        fits.append({"order": p, **_linear_fit(np.log(taus), np.log(errs))})
    csv_path = out_dir / "trotter_errors.csv"
    write_csv(csv_path, ["order", "tau", "error"], rows)
    fits_path = out_dir / "trotter_fits.json"
    write_json(fits_path, {"format_version": FORMAT_VERSION, "fits": fits})
    return [csv_path, fits_path]


HANDLERS = {
    "lwf-convergence": cmd_lwf_convergence,
    "qubits-saved": cmd_qubits_saved,
    "pipeline": cmd_pipeline,
    "trotter-order": cmd_trotter_order,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trottergibbs",
        description="Seeded partition-function experiments with CSV/JSON artifacts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="JSON config document")
        p.add_argument("--seed", type=int, default=None, help="override the document seed")
        p.add_argument("--out", type=str, default="runs", help="output directory")
        if name == "pipeline":
            p.add_argument(
                "--mode",
                choices=("exact", "gqsp", "ideal-w", "sampled"),
                default=None,
                help="override the document mode",
            )
    return parser


def load_document(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return doc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = load_document(args.config)
        if args.seed is not None:
            doc["seed"] = args.seed
        if getattr(args, "mode", None) is not None:
            doc["mode"] = args.mode
        cfg = validate_config(doc, SCHEMAS[args.command], args.command)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        artifacts = HANDLERS[args.command](cfg, out_dir)
        manifest = write_manifest(out_dir, args.command, cfg, artifacts)
    except ConfigError as err:
        print(json.dumps({"error": {"type": "config", "message": str(err)}}))
        return 2
    except Exception as err:  # numeric/stage failures map to one exit code
        print(
            json.dumps(
                {"error": {"type": type(err).__name__, "message": str(err)}}
            )
        )
        return 3
    print(
        json.dumps(
            {
                "command": args.command,
                "out": str(out_dir),
                "artifacts": [p.name for p in artifacts],
                "manifest": manifest.name,
            }
        )
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
