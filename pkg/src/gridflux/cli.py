"""Command-line front end.

    gridflux simulate  --config run.json [--out DIR] [--seed N] [--set key=value ...]
    gridflux stability --config stab.json [--oracle]
    gridflux compare   --config cmp.json
    gridflux accept

Exit codes: 0 success, 1 config or usage error, 2 voltage collapse
(simulate), 3 indeterminate and 4 subsystem unstable (stability).
The output directory defaults to ``$GRIDFLUX_OUT``, else ``./out``.
"""

import csv
import io
import json
import os
from pathlib import Path
import sys
import tempfile

import click
import numpy as np

from . import acceptance
from .config import build_scenario, load_config, stability_inputs
from .errors import ConfigError, GridfluxError
from .sim import run, stability_sweep
from .stability import INDETERMINATE, STABLE, SUBSYSTEM_UNSTABLE, assess

EXIT_OK, EXIT_CONFIG, EXIT_COLLAPSE = 0, 1, 2
EXIT_CODES = {STABLE: 0, INDETERMINATE: 3, SUBSYSTEM_UNSTABLE: 4}
DEFAULT_CONTROLLERS = ("pi_two_loop", "pd", "energy_single", "energy_two_ts")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return _plain(obj.item())
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def write_atomic(path: Path, text: str):
    """Write via a temp file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _out_dir(out):
    return Path(out or os.environ.get("GRIDFLUX_OUT") or "out")


def _fail(msg):
    click.echo(f"error: {msg}", err=True)
    return EXIT_CONFIG


config_opt = click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False),
                          help="JSON scenario config.")
out_opt = click.option("--out", default=None, help="Output directory [env GRIDFLUX_OUT, else ./out].")
seed_opt = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None,
                        help="Override the config seed.")
set_opt = click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
                       help="Override a config value by dotted key; repeatable.")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="artifact")
def main():
    """Energy-based modelling, stability checks and control of small grids."""


@main.command()
@config_opt
@out_opt
@seed_opt
@set_opt
def simulate(config_path, out, seed, overrides):
    """Run one scenario; write trajectory.csv, summary.json, resolved_config.json."""
    sys.exit(cmd_simulate(config_path, out, seed, overrides))


def cmd_simulate(config_path, out=None, seed=None, overrides=()):
    try:
        resolved = load_config(config_path, overrides, seed)
        scn = build_scenario(resolved)
        traj, summary = run(scn)
    except (ConfigError, GridfluxError) as exc:
        return _fail(exc)
    d = _out_dir(out)
    body = summary.to_dict()
    body["events"] = traj.events
    write_atomic(d / "trajectory.csv", traj.to_csv())
    write_atomic(d / "summary.json", dumps(body))
    write_atomic(d / "resolved_config.json", dumps(resolved))
    state = "collapsed" if summary.collapsed else ("settled" if summary.settled else "not settled")
    click.echo(f"{scn.name} [{summary.controller}]: {state}; wrote {d}")
    return EXIT_COLLAPSE if summary.collapsed else EXIT_OK


@main.command()
@config_opt
@out_opt
@set_opt
@click.option("--oracle", is_flag=True, help="Also compute the full assembled spectrum.")
def stability(config_path, out, overrides, oracle):
    """Vector Lyapunov check; write report.json."""
    sys.exit(cmd_stability(config_path, out, overrides, oracle))


def _worst(verdicts):
    for v in (SUBSYSTEM_UNSTABLE, INDETERMINATE):
        if v in verdicts:
            return v
    return STABLE


def cmd_stability(config_path, out=None, overrides=(), oracle=False):
    try:
        resolved = load_config(config_path, overrides)
        if "stability" in resolved:
            subs, cpl = stability_inputs(resolved)
            rep = assess(subs, cpl, oracle=oracle)
            report = rep.to_dict()
            verdict = rep.verdict
        elif resolved["scenario"] in ("stability_sweep", "two_area_freq"):
            scn = build_scenario(resolved)
            rows = stability_sweep(scn.two_area)
            sweep = []
            for b, rep in rows:
                entry = rep.to_dict()
                entry["b_tie"] = b
                if not oracle:
                    entry.pop("oracle_max_real_eig", None)
                    entry.pop("oracle_hurwitz", None)
                sweep.append(entry)
            verdicts = [e["verdict"] for e in sweep]
            changes = [sweep[k]["b_tie"] for k in range(1, len(sweep)) if verdicts[k] != verdicts[k - 1]]
            verdict = _worst(verdicts)
            report = {"verdict": verdict, "sweep": sweep, "transitions_at_b_tie": changes}
        else:
            raise ConfigError("stability: config needs a 'stability' section or the stability_sweep scenario")
    except (ConfigError, GridfluxError, ValueError) as exc:
        return _fail(exc)
    d = _out_dir(out)
    write_atomic(d / "report.json", dumps(report))
    click.echo(f"verdict: {verdict}; wrote {d / 'report.json'}")
    return EXIT_CODES[verdict]


@main.command()
@config_opt
@out_opt
@seed_opt
@set_opt
def compare(config_path, out, seed, overrides):
    """Run one scenario under several controllers; write comparison.csv."""
    sys.exit(cmd_compare(config_path, out, seed, overrides))


COMPARE_COLUMNS = ("controller", "collapsed", "collapse_time", "settled", "settling_time",
                   "max_port_dP", "max_port_dQdot", "v_std_after", "v_mean_after")


def cmd_compare(config_path, out=None, seed=None, overrides=()):
    try:
        resolved = load_config(config_path, overrides, seed)
        if "controllers" in resolved:
            ctrls = resolved["controllers"]
        else:
            ctrls = [dict(resolved["controller"], kind=k) for k in DEFAULT_CONTROLLERS]
        if not ctrls:
            raise ConfigError("controllers: list is empty")
        if not resolved["scenario"].startswith("rlc"):
            raise ConfigError("scenario: compare needs an rlc_cpl_* scenario")
        scns = [build_scenario(resolved, c, f"controllers[{k}]") for k, c in enumerate(ctrls)]
        rows = []
        for scn in scns:
            _, s = run(scn)
            rows.append(s.to_dict())
    except (ConfigError, GridfluxError) as exc:
        return _fail(exc)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARE_COLUMNS)
    for r in rows:
        w.writerow(["" if r[c] is None else (f"{r[c]:.17g}" if isinstance(r[c], float) else r[c])
                    for c in COMPARE_COLUMNS])
    d = _out_dir(out)
    write_atomic(d / "comparison.csv", buf.getvalue())
    write_atomic(d / "resolved_config.json", dumps(resolved))
    for r in rows:
        state = "collapsed" if r["collapsed"] else ("settled" if r["settled"] else "not settled")
        click.echo(f"{r['controller']:>14}: {state}")
    return EXIT_OK


@main.command()
def accept():
    """Run the acceptance criteria; one line per criterion."""
    results = acceptance.run_all(echo=click.echo)
    sys.exit(0 if all(r.passed for r in results) else 1)


if __name__ == "__main__":
    main()
