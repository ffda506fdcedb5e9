"""``dtqw-wigner`` command line: identities | audit | converge | dump-wigner.

Exit codes: 0 success, 1 configuration/precondition error, 2 tolerance
failure.  Outputs are written atomically and are byte-identical for the
same config and seed.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import continuum, suites, wigner
from .config import ConfigError, ExperimentConfig

COMMANDS = ("identities", "audit", "converge", "dump-wigner")

# CLI flag -> config key
OVERRIDES = {
    "seed": "seed",
    "eps_list": "eps_list",
    "mass": "mass",
    "theta": "theta",
    "n_sites": "n_sites",
    "steps": "steps",
    "window": "window",
    "variant": "variant",
    "out": "out",
}


def variant_flags(variant: str) -> dict:
    if variant == "ledger":
        return {"transport": wigner.LEDGER_VARIANT, "continuum": continuum.AUDIT_FLAGS,
                "eom": "audit-form", "omega": "b"}
    return {"transport": wigner.PRINTED_VARIANT, "continuum": continuum.PRINTED_FLAGS,
            "eom": "paper-form", "omega": "a"}


def _plain(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        # mkstemp creates 0600; give the usual umask-derived mode
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, payload: dict):
    _atomic_write(path, json.dumps(_plain(payload), sort_keys=True, indent=2) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(path: Path, header: list[str], rows):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _atomic_write(path, "\n".join(lines) + "\n")


def _envelope(cfg: ExperimentConfig, status: int) -> dict:
    return {"config": cfg.to_dict(), "variant_flags": variant_flags(cfg.variant),
            "exit_code": status}


def cmd_identities(cfg: ExperimentConfig) -> int:
    status, payload = suites.run_identities(cfg)
    write_json(Path(cfg.out) / "identities.json", {**_envelope(cfg, status), **payload})
    return status


def cmd_audit(cfg: ExperimentConfig) -> int:
    status, payload = suites.run_audit(cfg)
    write_json(Path(cfg.out) / "audit.json", {**_envelope(cfg, status), **payload})
    return status


def cmd_converge(cfg: ExperimentConfig) -> int:
    status, payload = suites.run_converge(cfg)
    out = Path(cfg.out)
    write_csv(out / "converge_residuals.csv", ["eps", "variant", "with_correction", "residual_norm"],
              [[r["eps"], r["variant"], r["with_correction"], r["residual_norm"]]
               for r in payload["rows"]])
    slope_rows = []
    for key in sorted(payload["slopes"]):
        fit = payload["slopes"][key]
        slope_rows.append([key, fit.get("slope", float("nan")), fit.get("intercept", float("nan")),
                           fit.get("r2", float("nan"))])
    write_csv(out / "converge_slopes.csv", ["series", "slope", "intercept", "r2"], slope_rows)
    env = _envelope(cfg, status)
    env["files"] = ["converge_residuals.csv", "converge_slopes.csv"]
    write_json(out / "converge.json", {**env, **payload})
    return status


def wigner_rows(W: wigner.WignerField):
    """Long-format rows ``j0, p, A, B, kj, kp, re, im, herm_defect``."""
    V = W.values
    defect = np.abs(V - np.conj(np.swapaxes(V, 1, 2)))
    kj, kp = W.kj, W.kp
    for ip, p in enumerate(W.p_sites):
        for A in range(2):
            for B in range(2):
                for a, k1 in enumerate(kj):
                    for b, k2 in enumerate(kp):
                        z = V[ip, A, B, a, b]
                        yield [W.j0, int(p), A, B, k1, k2, z.real, z.imag, defect[ip, A, B, a, b]]


def cmd_dump_wigner(cfg: ExperimentConfig) -> int:
    status, payload = suites.run_dump_wigner(cfg)
    out = Path(cfg.out)
    write_csv(out / "wigner.csv", ["j0", "p", "A", "B", "kj", "kp", "re", "im", "herm_defect"],
              wigner_rows(payload["W"]))
    env = _envelope(cfg, status)
    env["files"] = ["wigner.csv"]
    write_json(out / "wigner.json", {**env, "header": payload["header"]})
    return status


HANDLERS = {
    "identities": cmd_identities,
    "audit": cmd_audit,
    "converge": cmd_converge,
    "dump-wigner": cmd_dump_wigner,
}


def _eps_list(text: str) -> list[float]:
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if "/" in tok:
            a, b = tok.split("/")
            vals.append(float(a) / float(b))
        else:
            vals.append(float(tok))
    return vals


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors: exit 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(suites.CONFIG_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="dtqw-wigner", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="flat JSON config; flags override its keys")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--eps-list", type=_eps_list, help="comma separated, e.g. 1/8,1/16,1/32,1/64")
    ap.add_argument("--mass", type=float)
    ap.add_argument("--theta", type=float)
    ap.add_argument("--n-sites", type=int)
    ap.add_argument("--steps", type=int)
    ap.add_argument("--window", type=int)
    ap.add_argument("--variant", choices=("ledger", "printed"))
    return ap


def resolve_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a flat JSON object")
    data["command"] = args.command
    for flag, key in OVERRIDES.items():
        val = getattr(args, flag)
        if val is not None:
            data[key] = val
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        status = HANDLERS[cfg.command](cfg)
    except (ConfigError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return suites.CONFIG_ERROR
    label = {0: "ok", 1: "config error", 2: "tolerance failure"}[status]
    print(f"{cfg.command}: {label} (exit {status}); outputs in {cfg.out}")
    return status


if __name__ == "__main__":
    sys.exit(main())
