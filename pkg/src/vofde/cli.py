"""Command-line front end: ``vofde {solve,table,figure,weights,singularities}``.

Every command writes CSV files (plots are optional SVG extras) into an output
directory together with ``config.json``, the effective configuration after
merging defaults, an optional JSON config file (``--config``) and flags, in
increasing order of precedence.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analysis import scan_singularities
from .errors import ContourError, InfeasiblePlanError, InversionError, SolverDivergenceError
from .experiments import TABLES, figure_data, run_table
from .solver import preset_problem, solve_co_gl, solve_gl
from .transition import ExponentialTransition
from .weights import co_weights, compute_weights, dump_table, load_table

log = logging.getLogger("vofde")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
CACHE_ENV = "VOFDE_CACHE_DIR"

DEFAULTS = {
    "solve": {
        "preset": "relaxation", "a1": 0.6, "a2": 0.8, "c": 2.0, "lam": 1.0, "a": 1.0, "mu": 4.0,
        "y0": None, "h": 2.0**-5, "T": 4.0, "co_alpha": None, "include_initial": False,
        "out": "out", "svg": False,
    },
    "table": {"name": "table1", "sets": None, "include_initial": False, "out": "out", "svg": False},
    "figure": {"name": "fig1", "out": "out", "svg": True},
    "weights": {"a1": 0.6, "a2": 0.8, "c": 2.0, "h": 2.0**-6, "N": 1024, "tau": 1e-13, "Fs": 0.1, "out": None},
    "singularities": {"a1": 0.6, "a2": 0.8, "c": 2.0, "lam_min": 0.01, "lam_max": 5.0, "ratio": 1.2, "out": "out"},
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- output


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """CSV with round-trippable decimal floats and ``\\n`` line ends."""
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    _atomic_write(Path(path), "\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    text = Path(path).read_text().splitlines()
    header = text[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in text[1:]], dtype=float)
    return header, data.reshape(-1, len(header))


def _write_svg(path: Path, draw) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "vofde"
    fig, ax = plt.subplots(figsize=(6, 4))
    draw(ax)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    fig.savefig(tmp, format="svg", metadata={"Date": None})
    plt.close(fig)
    os.replace(tmp, path)


def _echo_config(out: Path, command: str, cfg: dict) -> None:
    payload = {"command": command, **{k: v for k, v in cfg.items()}}
    _atomic_write(out / "config.json", json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")


# ---------------------------------------------------------------- config


def _merge(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from None
        section = file_cfg.get(command, file_cfg)
        unknown = set(section) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown keys for {command}: {sorted(unknown)}")
        cfg.update(section)
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _parse_vector(text) -> list[float] | None:
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    try:
        return [float(v) for v in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse vector {text!r}") from None


def _transition(cfg) -> ExponentialTransition:
    return ExponentialTransition(float(cfg["a1"]), float(cfg["a2"]), float(cfg["c"]))


def cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else Path.home() / ".cache" / "vofde"


# ---------------------------------------------------------------- commands


def cmd_solve(cfg: dict) -> int:
    tr = _transition(cfg)
    preset = cfg["preset"]
    params = {"relaxation": {"lam": float(cfg["lam"])}, "brusselator": {"a": float(cfg["a"]), "mu": float(cfg["mu"])}}
    prob = preset_problem(preset, tr, _parse_vector(cfg["y0"]), float(cfg["T"]), **params.get(preset, {}))
    h = float(cfg["h"])
    if cfg["co_alpha"] is not None:
        traj = solve_co_gl(float(cfg["co_alpha"]), prob, h, include_initial=bool(cfg["include_initial"]))
    else:
        traj = solve_gl(prob, h, include_initial=bool(cfg["include_initial"]))
    out = Path(cfg["out"])
    header = ["t"] + [f"y{k + 1}" for k in range(prob.dim)]
    write_csv(out / f"solve_{preset}.csv", header, np.column_stack([traj.ts, traj.ys]))
    if cfg["svg"]:
        def draw(ax):
            for k in range(prob.dim):
                ax.plot(traj.ts, traj.ys[:, k], label=header[k + 1])
            ax.set_xlabel("t")
            ax.legend()
        _write_svg(out / f"solve_{preset}.svg", draw)
    _echo_config(out, "solve", {**cfg, "weights_checksum": traj.meta.get("weights_checksum")})
    log.info("wrote %d nodes to %s", traj.ts.size, out)
    return EXIT_OK


def cmd_table(cfg: dict) -> int:
    name = cfg["name"]
    if name not in TABLES:
        raise ConfigError(f"unknown table {name!r}; choose from {sorted(TABLES)}")
    sets = cfg["sets"]
    if isinstance(sets, str):
        sets = [int(v) - 1 for v in sets.split(",")]
    res = run_table(name, sets=sets, include_initial=bool(cfg["include_initial"]), progress=log.info)
    out = Path(cfg["out"])
    write_csv(out / f"{name}.csv", res.header(), res.rows())
    pub_rows = []
    for i, h in enumerate(res.steps):
        row = [h]
        for s in res.spec.sets:
            row.append(s.target_errors[i] if i < len(s.target_errors) else math.nan)
            row.append(s.target_eocs[i - 1] if 0 < i <= len(s.target_eocs) else math.nan)
        pub_rows.append(row)
    write_csv(out / f"{name}_target.csv", res.header(), pub_rows)
    if cfg["svg"]:
        def draw(ax):
            for s in res.spec.sets:
                ax.loglog(res.steps, res.errors[s.label], "o-", label=s.label)
            ax.set_xlabel("h")
            ax.set_ylabel("error at T")
            ax.legend(fontsize=7)
        _write_svg(out / f"{name}.svg", draw)
    labels = {f"set_{k + 1}": s.label for k, s in enumerate(res.spec.sets)}
    _echo_config(out, "table", {**cfg, "sets_run": labels, "notes": res.meta["notes"], "seconds": res.seconds})
    for row in res.rows():
        log.info("  ".join(f"{v:.3e}" if i % 2 == 1 or i == 0 else f"{v:.3f}" for i, v in enumerate(row)))
    return EXIT_OK


def cmd_figure(cfg: dict) -> int:
    name = cfg["name"]
    panels = figure_data(name)
    out = Path(cfg["out"])
    for panel, header, data in panels:
        write_csv(out / f"{name}_{panel}.csv", header, data)
    if cfg["svg"]:
        def draw(ax):
            for panel, header, data in panels:
                if data.size == 0:
                    continue
                if name == "fig3":
                    ax.plot(data[:, 1], data[:, 2], ".", ms=3, label=panel)
                    ax.set_xlabel("Re s")
                    ax.set_ylabel("Im s")
                elif name == "fig6":
                    for k in (1, 3, 5):
                        ax.plot(data[:, k], data[:, k + 1], lw=0.8, label=f"{panel}: {header[k][2:]}")
                    ax.set_xlabel("x")
                    ax.set_ylabel("y")
                else:
                    for k in range(1, len(header)):
                        ax.plot(data[:, 0], data[:, k], label=f"{panel}: {header[k]}")
                    ax.set_xlabel("t")
                    if name in ("fig1", "fig2"):
                        ax.set_xscale("log")
            ax.legend(fontsize=6)
        _write_svg(out / f"{name}.svg", draw)
    _echo_config(out, "figure", cfg)
    return EXIT_OK


def _weights_key(tr, h, N, tau, Fs) -> str:
    text = json.dumps([tr.alpha1, tr.alpha2, tr.c, h, N, tau, Fs])
    return hashlib.sha256(text.encode()).hexdigest()[:20]


def cmd_weights(cfg: dict) -> int:
    tr = _transition(cfg)
    h, N, tau, Fs = float(cfg["h"]), int(cfg["N"]), float(cfg["tau"]), float(cfg["Fs"])
    cdir = cache_dir()
    path = cdir / f"weights_{_weights_key(tr, h, N, tau, Fs)}.bin"
    if path.exists():
        stored = load_table(path)
        omegas = stored.omegas
        digest = hashlib.sha256(omegas.tobytes()).hexdigest()[:16]
        print(f"cache hit: {path} (checksum {digest})")
        if tr.alpha1 == tr.alpha2:
            ref = h**tr.alpha1 * co_weights(tr.alpha1, N)
            print(f"max deviation from binomial recurrence: {np.abs(omegas - ref).max():.3e}")
    else:
        try:
            table = compute_weights(tr, h, N, tau=tau, F_s=Fs)
        except InfeasiblePlanError as exc:
            print(f"infeasible plan: {exc}. Try a larger tau, a smaller N or a smaller h.", file=sys.stderr)
            return EXIT_NUMERIC
        p = table.plan
        cdir.mkdir(parents=True, exist_ok=True)
        dump_table(table, path)
        omegas = table.omegas
        print(f"plan: r={p.r!r} rho={p.rho!r} L={p.L} M={p.M_estimate:.6g} relaxed={p.relaxed}")
        print(f"certified max error bound: {table.error_bound.max():.3e}")
        print(f"cached: {path} (checksum {table.checksum})")
        if tr.alpha1 == tr.alpha2:
            ref = h**tr.alpha1 * co_weights(tr.alpha1, N)
            print(f"max deviation from binomial recurrence: {np.abs(omegas - ref).max():.3e}")
    if cfg["out"]:
        write_csv(Path(cfg["out"]), ["n", "omega"], zip(range(N + 1), omegas))
    return EXIT_OK


def cmd_singularities(cfg: dict) -> int:
    tr = _transition(cfg)
    scan = scan_singularities(tr, float(cfg["lam_min"]), float(cfg["lam_max"]), float(cfg["ratio"]))
    out = Path(cfg["out"])
    write_csv(out / "singularities.csv", ["lambda", "re_s", "im_s", "residual"], scan.rows())
    _echo_config(out, "singularities", {**cfg, "box": scan.search_box, "unexplained_events": len(scan.unexplained_events())})
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "table": cmd_table,
    "figure": cmd_figure,
    "weights": cmd_weights,
    "singularities": cmd_singularities,
}


def _add_transition(p):
    p.add_argument("--a1", type=float, help="order at t = 0")
    p.add_argument("--a2", type=float, help="limiting order")
    p.add_argument("--c", type=float, help="transition rate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vofde", description="Variable-order fractional solvers, tables and figures.")
    verbose = argparse.ArgumentParser(add_help=False)
    verbose.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help, out=True):
        p = sub.add_parser(name, help=help, parents=[verbose])
        p.add_argument("--config", help="JSON file with default values for this command")
        if out:
            p.add_argument("--out", help="output directory")
        return p

    p = command("solve", "solve a preset problem")
    p.add_argument("--preset", choices=["relaxation", "nonlinear13y2", "brusselator"])
    _add_transition(p)
    p.add_argument("--lambda", dest="lam", type=float, help="relaxation rate")
    p.add_argument("--a", type=float, help="Brusselator a")
    p.add_argument("--mu", type=float, help="Brusselator mu")
    p.add_argument("--y0", help="initial state, comma separated")
    p.add_argument("--h", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--co-alpha", dest="co_alpha", type=float, help="solve the constant-order problem instead")
    p.add_argument("--include-initial", dest="include_initial", action="store_const", const=True)
    p.add_argument("--svg", action="store_const", const=True)

    p = command("table", "run a convergence table")
    p.add_argument("name", nargs="?", choices=sorted(TABLES))
    p.add_argument("--sets", help="1-based set indices, comma separated")
    p.add_argument("--include-initial", dest="include_initial", action="store_const", const=True)
    p.add_argument("--svg", action="store_const", const=True)

    p = command("figure", "compute figure data")
    p.add_argument("name", nargs="?", choices=["fig1", "fig2", "fig3", "fig4", "fig5", "fig6"])
    p.add_argument("--no-svg", dest="svg", action="store_const", const=False)

    p = command("weights", "compute and cache convolution weights", out=False)
    _add_transition(p)
    p.add_argument("--h", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--Fs", type=float)
    p.add_argument("--out", help="optional CSV file for the weights")

    p = command("singularities", "scan the poles of the relaxation transform")
    _add_transition(p)
    p.add_argument("--lam-min", dest="lam_min", type=float)
    p.add_argument("--lam-max", dest="lam_max", type=float)
    p.add_argument("--ratio", type=float)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _merge(args.command, args)
        return COMMANDS[args.command](cfg)
    except (SolverDivergenceError, InversionError, InfeasiblePlanError, ContourError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
