"""Channel QFI tables, discrimination bounds and stretching checks.

Exit codes: 0 success, 1 QFI self-consistency gap above tolerance, 2 usage
error, 3 bound-ordering violation, 4 covariance failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import channels as ch
from . import discrimination as disc
from . import gaussian as gs
from . import linalg as la
from . import metrology as met
from . import stretching as st
from .errors import CovarianceError, TeleboundsError

log = logging.getLogger("telebounds")

EXIT_OK, EXIT_GAP, EXIT_USAGE, EXIT_ORDER, EXIT_COVARIANCE = 0, 1, 2, 3, 4
DEFAULT_SEED = 0
SIG_DIGITS = 12

COMMANDS = ("qfi", "discriminate", "stretch-verify", "sweep")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    channel: dict | None = None
    channel2: dict | None = None
    grid: list = field(default_factory=list)  # [(name, [values])]
    n: list = field(default_factory=lambda: [1])
    mu: float | None = None
    dtheta: float = 1e-4
    nmax: int = 30
    seed: int | None = None
    trials: int = 200
    out: str | None = None
    format: str = "csv"
    workers: int = 1
    gap_tol: float = 1e-2
    order_tol: float = disc.ORDER_TOL
    residual_tol: float = 1e-9
    ratio_tol: float = 1e-4
    verbose: int = 0


def _load_json_arg(text: str):
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON: {exc}") from None


def parse_grid(spec: str) -> tuple[str, list[float]]:
    """``name=lo:hi:step`` (inclusive of ``hi``) or ``name=v1,v2,...``."""
    if "=" not in spec:
        raise UsageError(f"grid {spec!r} must look like name=lo:hi:step or name=v1,v2")
    name, rhs = (s.strip() for s in spec.split("=", 1))
    if not name:
        raise UsageError(f"grid {spec!r} has no parameter name")
    if not rhs:
        return name, []
    try:
        if ":" in rhs:
            parts = [float(x) for x in rhs.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise UsageError(f"grid range {rhs!r} needs lo:hi:step with step > 0")
            lo, hi, step = parts
            if hi < lo:
                return name, []
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            return name, [float(f"{lo + i * step:.{SIG_DIGITS}g}") for i in range(count)]
        return name, [float(x) for x in rhs.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"grid values in {rhs!r} are not numbers") from None


def parse_int_list(text) -> list[int]:
    """``5``, ``1,2,3`` or the inclusive range ``1:5``."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        return [int(x) for x in text]
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot read integers from {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="telebounds", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with default values for any flag")
    p.add_argument("--channel", help="channel spec as JSON or @file")
    p.add_argument("--channel2", help="second channel spec (discriminate)")
    p.add_argument("--grid", action="append", help="name=lo:hi:step or name=v1,v2 (repeatable)")
    p.add_argument("--n", help="number of channel uses: 5, 1,2,3 or 1:5")
    p.add_argument("--mu", type=float, help="TMSV variance for finite-squeezing values")
    p.add_argument("--dtheta", type=float, help="finite-difference step")
    p.add_argument("--nmax", type=int, help="Fock cutoff per mode")
    p.add_argument("--seed", type=int, help="root seed for random protocols")
    p.add_argument("--trials", type=int, help="random protocols per verification run")
    p.add_argument("--workers", type=int, help="threads for grid rows and fuzz trials")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--gap-tol", type=float, dest="gap_tol")
    p.add_argument("--order-tol", type=float, dest="order_tol")
    p.add_argument("--residual-tol", type=float, dest="residual_tol")
    p.add_argument("--ratio-tol", type=float, dest="ratio_tol")
    p.add_argument("-v", "--verbose", action="count")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags over the config file over defaults."""
    merged: dict = {}
    if args.config:
        data = _load_json_arg("@" + args.config)
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        merged.update(data)
    for key, value in vars(args).items():
        if key != "config" and value is not None:
            merged[key] = value
    cfg = RunConfig(command=merged.pop("command"))
    for key, value in merged.items():
        if key in ("channel", "channel2") and isinstance(value, str):
            value = _load_json_arg(value)
        elif key == "grid":
            value = [parse_grid(g) if isinstance(g, str) else (g[0], [float(x) for x in g[1]])
                     for g in value]
        elif key == "n":
            value = parse_int_list(value)
        setattr(cfg, key, value)
    if cfg.format not in ("csv", "json"):
        raise UsageError(f"unknown format {cfg.format!r}")
    if any(n < 1 for n in cfg.n):
        raise UsageError("n must be at least 1")
    return cfg


# ---------------------------------------------------------------------------
# Channel specs
# ---------------------------------------------------------------------------

def parse_channel(data: dict | None):
    """Discrete :class:`ChannelSpec` or :class:`GaussianChannelParams` from JSON.

    Parameters may sit under ``"params"`` or at top level.
    """
    if not isinstance(data, dict) or "family" not in data:
        raise UsageError("channel spec must be a JSON object with a 'family' key")
    params = dict(data.get("params", {}))
    params.update({k: v for k, v in data.items() if k not in ("family", "d", "params")})
    fam = data["family"]
    try:
        if fam in gs.GAUSSIAN_FAMILIES:
            return gs.GaussianChannelParams.from_dict({"family": fam, **params})
        if fam not in ch.FAMILIES:
            raise UsageError(f"unknown channel family {fam!r}")
        spec = ch.ChannelSpec(fam, int(data.get("d", 2)), params)
        ch.make_channel(spec)  # validates
        return spec
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"invalid channel spec: {exc}") from None


def estimated_parameter(spec) -> str:
    if isinstance(spec, gs.GaussianChannelParams):
        return "w" if spec.family == "additive_noise" else "nbar"
    if spec.family in met.DISCRETE_FAMILIES:
        return "p"
    raise UsageError(f"family {spec.family!r} has no scalar noise parameter")


def _theta_of(spec) -> float:
    if isinstance(spec, gs.GaussianChannelParams):
        return spec.noise
    if "p" not in spec.params:
        raise UsageError("channel spec needs parameter 'p'")
    return float(spec.params["p"])


def _check_interior(name: str, value: float, spec) -> None:
    if name == "p" and not 0.0 < value < 1.0:
        raise UsageError(f"p={value} outside the open interval (0, 1)")
    if name in ("nbar", "w") and value <= 0:
        raise UsageError(f"{name}={value} must be positive")
    if name == "mu" and value < 0.5:
        raise UsageError(f"mu={value} below the vacuum value 1/2")
    if name == "eta" and isinstance(spec, gs.GaussianChannelParams):
        ok = {"thermal_loss": 0 <= value < 1, "amplifier": value > 1}.get(spec.family, value == 1)
        if not ok:
            raise UsageError(f"eta={value} outside the {spec.family} domain")


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def fmt_number(x):
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{SIG_DIGITS}g}")
    return x


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return fmt_number(obj)


def _csv_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.{SIG_DIGITS}g}"
    if isinstance(x, (list, dict)):
        return json.dumps(x, sort_keys=True)
    return str(x)


def render(rows: list[dict], columns: list[str], fmt: str, meta: dict) -> str:
    rows = [_clean(r) for r in rows]
    if fmt == "json":
        return json.dumps({**_clean(meta), "columns": columns, "rows": rows}, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_csv_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def emit(text: str, cfg: RunConfig) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

QFI_COLUMNS = ["family", "theta", "mu", "B_closed", "B_numeric", "relative_gap", "n", "QCRB"]
QFI_AXES = {"p", "nbar", "w", "mu", "n"}
SWEEP_AXES = QFI_AXES | {"eta", "d", "dtheta"}


def _grid_points(cfg: RunConfig, allowed: set) -> tuple[list[str], list[dict]]:
    names = [name for name, _ in cfg.grid]
    bad = [x for x in names if x not in allowed]
    if bad:
        raise UsageError(f"cannot grid over {bad}; allowed: {sorted(allowed)}")
    if len(set(names)) != len(names):
        raise UsageError("grid axis given twice")
    axes = [vals for _, vals in cfg.grid]
    return names, [dict(zip(names, combo)) for combo in itertools.product(*axes)]


def _qfi_row(spec, point: dict, cfg: RunConfig, n: int) -> dict:
    mu = point.get("mu", cfg.mu)
    dtheta = point.get("dtheta", cfg.dtheta)
    name = estimated_parameter(spec)
    if isinstance(spec, gs.GaussianChannelParams):
        base = spec
        if "eta" in point:
            base = gs.GaussianChannelParams(spec.family, point["eta"], spec.nbar, spec.w)
        theta = point.get(name, base.noise)
        task = met.EstimationTask(base, theta, dtheta=dtheta, n=n, mu=mu)
    else:
        theta = point.get(name, _theta_of(spec))
        d = int(point.get("d", spec.d))
        task = met.EstimationTask(spec.family, theta, dtheta=dtheta, n=n, d=d)
        mu = None
    res = met.channel_qfi(task)
    return {
        "family": spec.family, "theta": theta, "mu": mu, "B_closed": res.b_closed,
        "B_numeric": res.b_numeric, "relative_gap": res.relative_gap, "n": n, "QCRB": res.qcrb,
    }


def _table_command(cfg: RunConfig, allowed: set) -> int:
    spec = parse_channel(cfg.channel)
    name = estimated_parameter(spec)
    allowed = (allowed - {"p", "nbar", "w"}) | {name}
    names, points = _grid_points(cfg, allowed)
    for pt in points:
        for k, v in pt.items():
            _check_interior(k, v, spec)
    if not cfg.grid:
        points = [{}]
    elif not points:
        points = []
    jobs = []
    for pt in points:
        ns = [int(pt["n"])] if "n" in pt else cfg.n
        jobs += [(pt, n) for n in ns]
    if cfg.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(lambda job: _qfi_row(spec, job[0], cfg, job[1]), jobs))
    else:
        rows = [_qfi_row(spec, pt, cfg, n) for pt, n in jobs]
    extra = [x for x in names if x not in (name, "mu", "n")]
    for row, (pt, _) in zip(rows, jobs):
        for x in extra:
            row[x] = pt[x]
    gaps = [r["relative_gap"] for r in rows if r["relative_gap"] is not None]
    bad = [g for g in gaps if g > cfg.gap_tol]
    meta = {"command": cfg.command, "channel": cfg.channel, "gap_tol": cfg.gap_tol,
            "max_relative_gap": max(gaps) if gaps else None}
    emit(render(rows, QFI_COLUMNS + extra, cfg.format, meta), cfg)
    if bad:
        log.error("relative gap %.3g exceeds tolerance %.3g", max(bad), cfg.gap_tol)
        return EXIT_GAP
    return EXIT_OK


def cmd_qfi(cfg: RunConfig) -> int:
    return _table_command(cfg, QFI_AXES)


def cmd_sweep(cfg: RunConfig) -> int:
    return _table_command(cfg, SWEEP_AXES)


DISC_COLUMNS = [
    "n", "fidelity", "qcb", "s_star", "fidelity_lower", "pinsker_lower", "lower", "active_lower",
    "helstrom", "qcb_upper", "fidelity_upper", "relative_entropy", "asymptotic", "violations",
]


def cmd_discriminate(cfg: RunConfig) -> int:
    if cfg.channel is None or cfg.channel2 is None:
        raise UsageError("discriminate needs --channel and --channel2")
    a, b = parse_channel(cfg.channel), parse_channel(cfg.channel2)
    rows, reports, worst = [], [], []
    for n in cfg.n:
        try:
            task = disc.DiscriminationTask(a, b, n=n, mu=cfg.mu, nmax=cfg.nmax)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        rep = disc.bound_chain(task)
        if rep.fidelity >= 1.0 - 1e-14:
            rep.notes.append("degenerate: the two channels have identical Choi matrices")
        bad = rep.ordering_violations(cfg.order_tol)
        worst += bad
        d = rep.to_dict()
        d["violations"] = bad
        reports.append(d)
        rows.append({c: d.get(c) for c in DISC_COLUMNS})
    if cfg.format == "json":
        meta = {"command": cfg.command, "channel": cfg.channel, "channel2": cfg.channel2}
        text = json.dumps({**_clean(meta), "reports": _clean(reports)}, indent=2) + "\n"
    else:
        text = render(rows, DISC_COLUMNS, "csv", {})
    emit(text, cfg)
    if worst:
        log.error("bound ordering violated: %s", sorted(set(worst)))
        return EXIT_ORDER
    return EXIT_OK


STRETCH_COLUMNS = ["family", "theta", "n", "trials", "seed", "max_residual", "max_ratio",
                   "planted_ratio", "passed"]


def _stretch_residuals(channel, n, trials, seed) -> list[float]:
    out = []
    for s in np.random.SeedSequence(seed).spawn(trials):
        prot = st.random_protocol(n, channel.d_in, channel.d_out, np.random.default_rng(s))
        out.append(2 * la.trace_distance(st.run_adaptive(prot, channel),
                                         st.run_stretched(prot, channel)))
    return out


def cmd_stretch_verify(cfg: RunConfig) -> int:
    spec = parse_channel(cfg.channel)
    if isinstance(spec, gs.GaussianChannelParams):
        raise UsageError("stretch-verify needs a discrete channel")
    if len(cfg.n) != 1 or not 1 <= cfg.n[0] <= 3:
        raise UsageError("stretch-verify needs a single n in 1..3")
    n = cfg.n[0]
    notes = []
    seed = cfg.seed
    if seed is None:
        seed = DEFAULT_SEED
        notes.append(f"no seed given; using default seed {DEFAULT_SEED}")
    channel = ch.make_channel(spec)
    report = ch.check_teleportation_covariance(channel)
    row = {"family": spec.family, "theta": spec.params.get("p"), "n": n, "trials": cfg.trials,
           "seed": seed}
    if not report.covariant:
        msg = f"channel is not teleportation covariant; witness U_{report.witness}"
        notes.append(msg)
        row.update({"passed": False, "witness": report.witness})
        _emit_stretch(row, notes, cfg)
        return EXIT_COVARIANCE
    if spec.family in met.DISCRETE_FAMILIES:
        fuzz = st.fuzz_no_go(spec.family, _theta_of(spec), cfg.trials, n, d=spec.d, seed=seed,
                             check_stretch=True, workers=cfg.workers)
        row.update({"max_residual": fuzz.max_residual, "max_ratio": fuzz.max_ratio,
                    "planted_ratio": fuzz.planted_ratio})
        ok = fuzz.passed(cfg.ratio_tol, residual_tol=cfg.residual_tol)
    else:
        res = _stretch_residuals(channel, n, cfg.trials, seed)
        notes.append("no scalar noise parameter: QFI fuzzing skipped")
        row["max_residual"] = max(res) if res else None
        ok = not res or max(res) < cfg.residual_tol
    if cfg.trials == 0:
        notes.append("trials=0: fuzz section empty")
    row["passed"] = bool(ok)
    _emit_stretch(row, notes, cfg)
    return EXIT_OK if ok else EXIT_GAP


def _emit_stretch(row: dict, notes: list, cfg: RunConfig) -> None:
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    cols = STRETCH_COLUMNS + (["witness"] if "witness" in row else [])
    meta = {"command": cfg.command, "channel": cfg.channel, "notes": notes}
    emit(render([row], cols, cfg.format, meta), cfg)


HANDLERS = {
    "qfi": cmd_qfi,
    "discriminate": cmd_discriminate,
    "stretch-verify": cmd_stretch_verify,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * (args.verbose or 0),
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args)
        return HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CovarianceError as exc:
        print(f"covariance failure: {exc}", file=sys.stderr)
        return EXIT_COVARIANCE
    except (TeleboundsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
