"""Command-line runner for the reproduction scenarios.

Each subcommand writes its data files plus a ``run.json`` manifest into the
output directory. Exit status is 0 on success, 2 for invalid configuration
and 3 when a numerical check fails.

Config files hold one ``key = value`` per line, values in JSON syntax
(``n = 5``, ``open = true``, ``delta = [0.5, 1, 2]``). Blank lines and lines
starting with ``#`` are ignored. Command-line flags override file values.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import platform
import sys
import tempfile
import time
from dataclasses import dataclass, field
from importlib import metadata

import numpy as np
import scipy

from . import dynamics, effective, lattice, tomography
from .errors import CavityBusError, ConfigInvalid, NumericalError
from .model import ModelParams, embed_computational_state

__all__ = ["SCENARIOS", "ScenarioConfig", "parse_config", "validate_config", "run_scenario", "main"]

log = logging.getLogger(__name__)

SCENARIOS = ("spectrum", "identities", "evolve", "gate-fidelity", "tomography")

_MODEL_KEYS = {
    "n": 5,
    "g": 1.0,
    "j": 1.0,
    "delta": 1.0,
    "omega": 0.03,
    "omega1": None,
    "omega2": None,
    "kappa": 0.0,
    "gamma": 0.0,
    "hz_reference": None,
}
_COMMON = {"out": "out", "seedless": False}

# accepted keys and defaults per scenario
DEFAULTS = {
    "spectrum": {"m": 7, "j": 1.0, "delta_min": -10.0, "delta_max": 10.0, "steps": 400},
    "identities": {"m_min": 3, "m_max": 101, "delta": [0.5, 1.0, 2.0, 5.0, 10.0], "j": 1.0, "tol": 1e-10},
    "evolve": {**_MODEL_KEYS, "t_max": 1.2, "samples": 200, "start": "01"},
    "gate-fidelity": {**_MODEL_KEYS, "t_max": 1.2, "samples": 200, "open": False, "tol": 1e-8},
    "tomography": {**_MODEL_KEYS, "t": None, "open": False, "tol": 1e-8},
}

_INT_KEYS = {"m", "steps", "m_min", "m_max", "n", "samples"}
_BOOL_KEYS = {"seedless", "open"}
_STR_KEYS = {"out", "start"}
_OPTIONAL_KEYS = {"omega1", "omega2", "hz_reference", "t"}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def model_params(self):
        """:class:`ModelParams` for the model-based scenarios.

        ``omega`` sets both drives through the gate condition unless
        ``omega1``/``omega2`` are given explicitly.
        """
        v = self.values
        scale = v["hz_reference"] or 1.0
        base = dict(g=v["g"], j=v["j"], delta=v["delta"], kappa=v["kappa"] / scale, gamma=v["gamma"] / scale)
        if v["omega1"] is None and v["omega2"] is None:
            return ModelParams.for_gate(v["n"], v["omega"], **base)
        o1 = v["omega"] if v["omega1"] is None else v["omega1"]
        o2 = v["omega"] if v["omega2"] is None else v["omega2"]
        return ModelParams(n_cavities=v["n"], omega1=o1, omega2=o2, **base)


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _coerce(key, value, errors):
    if key in _OPTIONAL_KEYS and value is None:
        return None
    if key in _BOOL_KEYS:
        if not isinstance(value, bool):
            errors.append(f"{key}: expected true or false, got {value!r}")
        return value
    if key in _STR_KEYS:
        if not isinstance(value, str) or not value:
            errors.append(f"{key}: expected a non-empty string, got {value!r}")
        return value
    if key in _INT_KEYS:
        if not _is_number(value) or not float(value).is_integer():
            errors.append(f"{key}: expected an integer, got {value!r}")
            return value
        return int(value)
    if not _is_number(value):
        errors.append(f"{key}: expected a finite number, got {value!r}")
        return value
    return float(value)


def _delta_list(value, errors):
    if isinstance(value, str):
        try:
            value = [float(x) for x in value.split(",") if x.strip()]
        except ValueError:
            errors.append(f"delta: cannot parse {value!r} as a comma-separated list")
            return value
    if _is_number(value):
        value = [value]
    if not isinstance(value, list) or not value or not all(_is_number(x) for x in value):
        errors.append(f"delta: expected a non-empty list of numbers, got {value!r}")
        return value
    return [float(x) for x in value]


def _check_ranges(scenario, v, errors):
    if scenario == "spectrum":
        if v["m"] < 2:
            errors.append(f"m: need at least 2 sites, got {v['m']}")
        if v["steps"] < 1:
            errors.append(f"steps: must be >= 1, got {v['steps']}")
        if v["delta_max"] < v["delta_min"]:
            errors.append("delta_max: must not be below delta_min")
        if v["j"] <= 0:
            errors.append(f"j: must be positive, got {v['j']}")
    elif scenario == "identities":
        if v["m_min"] < 2:
            errors.append(f"m_min: need at least 2 sites, got {v['m_min']}")
        if v["m_max"] < v["m_min"]:
            errors.append("m_max: must not be below m_min")
        if v["j"] <= 0:
            errors.append(f"j: must be positive, got {v['j']}")
        if v["tol"] <= 0:
            errors.append(f"tol: must be positive, got {v['tol']}")
    else:
        if v["n"] < 1:
            errors.append(f"n: need at least one cavity, got {v['n']}")
        if v["j"] <= 0:
            errors.append(f"j: must be positive, got {v['j']}")
        for key in ("g", "kappa", "gamma"):
            if v[key] < 0:
                errors.append(f"{key}: must be >= 0, got {v[key]}")
        if v["hz_reference"] is not None and v["hz_reference"] <= 0:
            errors.append(f"hz_reference: must be positive, got {v['hz_reference']}")
        if "samples" in v and v["samples"] < 2:
            errors.append(f"samples: need at least 2, got {v['samples']}")
        if "t_max" in v and v["t_max"] <= 0:
            errors.append(f"t_max: must be positive, got {v['t_max']}")
        if "tol" in v and v["tol"] <= 0:
            errors.append(f"tol: must be positive, got {v['tol']}")
        if v.get("t") is not None and v["t"] <= 0:
            errors.append(f"t: must be positive, got {v['t']}")
        if v.get("start", "01") not in ("01", "10"):
            errors.append(f"start: must be '01' or '10', got {v['start']!r}")


def validate_config(raw):
    """Turn a raw mapping into a :class:`ScenarioConfig`, collecting every
    problem into one :class:`ConfigInvalid`."""
    raw = dict(raw)
    scenario = raw.pop("scenario", None)
    if scenario not in SCENARIOS:
        raise ConfigInvalid([f"scenario: {scenario!r} is not one of {', '.join(SCENARIOS)}"])
    allowed = {**_COMMON, **DEFAULTS[scenario]}
    errors = []
    values = dict(allowed)
    for key, value in raw.items():
        if key not in allowed:
            errors.append(f"{key}: unknown key for scenario {scenario}")
            continue
        before = len(errors)
        if key == "delta" and scenario == "identities":
            coerced = _delta_list(value, errors)
        else:
            coerced = _coerce(key, value, errors)
        # a field with a type error keeps its default so range checks still run
        values[key] = coerced if len(errors) == before else allowed[key]
    _check_ranges(scenario, values, errors)
    if errors:
        raise ConfigInvalid(errors)
    return ScenarioConfig(scenario, values)


def _read_pairs(text):
    raw, errors = {}, []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        try:
            raw[key] = json.loads(value)
        except json.JSONDecodeError:
            errors.append(f"{key}: value {value.strip()!r} on line {lineno} is not valid JSON")
    return raw, errors


def parse_config(text, overrides=None):
    """Parse config text; ``overrides`` (e.g. from flags) win over file values."""
    raw, errors = _read_pairs(text)
    raw.update(overrides or {})
    if errors:
        try:
            validate_config(raw)
        except ConfigInvalid as exc:
            errors.extend(exc.errors)
        raise ConfigInvalid(errors)
    return validate_config(raw)


def _fmt(x):
    return f"{x:.17g}"


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
    return buf.getvalue()


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_atomic(path, text):
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _spectrum(cfg):
    deltas = np.linspace(cfg["delta_min"], cfg["delta_max"], cfg["steps"] + 1)
    table = lattice.dispersion_scan(cfg["m"], deltas, cfg["j"])
    return {"spectrum.csv": lattice.dispersion_csv(table)}, 0


def _identities(cfg):
    rows, ok = [], True
    deltas = sorted({s * abs(d) for d in cfg["delta"] for s in (-1.0, 1.0)})
    for m in range(cfg["m_min"], cfg["m_max"] + 1):
        for d in deltas:
            chain = lattice.ChainSpec.symmetric(m, d, cfg["j"])
            if m % 2 == 0 and abs(d * d - cfg["j"] ** 2) < 1e-10:
                rows.append([str(m), _fmt(d), "", "", "", "", "skipped"])
                continue
            cross, local, _ = lattice.coupling_sums(lattice.direct_diagonalize(chain))
            t_cross, t_local = lattice.identity_targets(chain)
            r1, r2 = abs(cross - t_cross), abs(local - t_local)
            passed = max(r1, r2) < cfg["tol"]
            ok &= passed
            rows.append([str(m), _fmt(d), cross, t_cross, r1, r2, "pass" if passed else "fail"])
    header = ["m", "delta", "s_cross", "target_cross", "residual_cross", "residual_local", "status"]
    return {"identities.csv": _csv_text(header, rows)}, 0 if ok else 3


def _time_grid(cfg, params):
    scaled, times = dynamics.default_time_grid(params, cfg["t_max"], cfg["samples"])
    return scaled, times, effective.gate_time(params)


def _evolve(cfg):
    params = cfg.model_params()
    scaled, times, gate = _time_grid(cfg, params)
    basis, states = dynamics.transfer_state(params, times, start=cfg["start"])
    target = _swap_target(basis) if cfg["start"] == "10" else dynamics._target_vector(basis)
    fid = np.abs(states @ target.conj()) ** 2
    _, at_t = dynamics.transfer_state(params, gate, start=cfg["start"])
    t_peak, f_peak = dynamics.fidelity_peak(params) if cfg["start"] == "01" else (math.nan, math.nan)
    summary = {
        "params": params.as_dict(),
        "gate_time": gate,
        "fidelity_at_T": float(abs(at_t @ target.conj()) ** 2),
        "peak_t_over_T": float(t_peak / gate),
        "peak_fidelity": f_peak,
        "weak_drive": bool(params.weak_drive),
    }
    rows = zip(scaled, times, fid)
    return {
        "evolve.csv": _csv_text(["t_over_T", "t", "fidelity"], rows),
        "summary.json": _json_text(summary),
    }, 0


def _swap_target(basis):
    """Target of the gate applied to ``|10>``: ``(1-i)/2 |01> + (1+i)/2 |10>``."""
    t = dynamics._target_vector(basis)
    i01 = basis.index[embed_computational_state("01", basis.n_cavities)[1]]
    i10 = basis.index[embed_computational_state("10", basis.n_cavities)[1]]
    t[i01], t[i10] = t[i10], t[i01]
    return t


def _channels(cfg, params, times):
    if cfg["open"]:
        return tomography.channel_trajectory(params, times, open_system=True, tol=cfg["tol"])
    return tomography.channel_trajectory(params, times)


def _gate_fidelity(cfg):
    params = cfg.model_params()
    scaled, times, gate = _time_grid(cfg, params)
    all_times = np.unique(np.concatenate([times, [gate]]))
    channels = _channels(cfg, params, all_times)
    by_time = dict(zip(all_times.tolist(), channels))
    fid = [tomography.average_fidelity(by_time[t]) for t in times.tolist()]
    leak = [by_time[t].leakage() for t in times.tolist()]
    at_t = by_time[float(gate)]
    summary = {
        "params": params.as_dict(),
        "open": cfg["open"],
        "t": gate,
        "avg_fidelity": tomography.average_fidelity(at_t),
        "leakage": at_t.leakage(),
    }
    return {
        "gate_fidelity.csv": _csv_text(["t_over_T", "t", "avg_fidelity", "leakage"], zip(scaled, times, fid, leak)),
        "summary.json": _json_text(summary),
    }, 0


def _chi_csv(chi, part):
    rows = [[label] + [float(x) for x in row] for label, row in zip(chi.labels, part(chi.matrix))]
    return _csv_text(["basis"] + list(chi.labels), rows)


def _tomography(cfg):
    params = cfg.model_params()
    t = cfg["t"] if cfg["t"] is not None else effective.gate_time(params)
    channel = _channels(cfg, params, [t])[0]
    chi = tomography.chi_tomography(channel)
    ideal = tomography.chi_tomography(tomography.unitary_channel(effective.ideal_sqrt_swap()))
    report = {
        "params": params.as_dict(),
        "t": float(t),
        "avg_fidelity": tomography.average_fidelity(channel),
        "chi_overlap": tomography.chi_overlap(chi, ideal),
        "leakage": channel.leakage(),
    }
    return {
        "chi_real.csv": _chi_csv(chi, np.real),
        "chi_imag.csv": _chi_csv(chi, np.imag),
        "report.json": _json_text(report),
    }, 0


_RUNNERS = {
    "spectrum": _spectrum,
    "identities": _identities,
    "evolve": _evolve,
    "gate-fidelity": _gate_fidelity,
    "tomography": _tomography,
}


def _versions():
    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {"artifact": own, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()}


def run_scenario(config):
    """Run one scenario and write its files; returns the exit status.

    Data files depend only on the configuration. ``run.json`` also records
    versions and wall-clock timings.
    """
    start = time.perf_counter()
    files, status = _RUNNERS[config.scenario](config)
    elapsed = time.perf_counter() - start
    out = config["out"]
    os.makedirs(out, exist_ok=True)
    for name in sorted(files):
        _write_atomic(os.path.join(out, name), files[name])
    manifest = {
        "scenario": config.scenario,
        "config": config.values,
        "outputs": sorted(files),
        "status": status,
        "versions": _versions(),
        "timings": {"compute_seconds": round(elapsed, 6)},
    }
    if config.scenario not in ("spectrum", "identities"):
        manifest["model_params"] = config.model_params().as_dict()
    _write_atomic(os.path.join(out, "run.json"), _json_text(manifest))
    return status


def build_parser():
    parser = argparse.ArgumentParser(prog="cavitybus", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="scenario", required=True)
    S = argparse.SUPPRESS

    def common(p):
        p.add_argument("--config", help="key = value config file", default=None)
        p.add_argument("--out", default=S, help="output directory (default: out)")
        p.add_argument("--seedless", action="store_true", default=S, help="reserved; no RNG is used")

    def model(p):
        p.add_argument("--n", type=int, default=S, help="number of cavities")
        p.add_argument("--g", type=float, default=S)
        p.add_argument("--j", type=float, default=S)
        p.add_argument("--delta", type=float, default=S)
        p.add_argument("--omega", type=float, default=S, help="drive amplitude; sets the gate condition")
        p.add_argument("--omega1", type=float, default=S)
        p.add_argument("--omega2", type=float, default=S)
        p.add_argument("--kappa", type=float, default=S)
        p.add_argument("--gamma", type=float, default=S)
        p.add_argument("--hz-reference", type=float, default=S, help="divide kappa and gamma by this g")

    p = sub.add_parser("spectrum", help="dispersion of the boundary-impurity chain")
    common(p)
    p.add_argument("--m", type=int, default=S)
    p.add_argument("--j", type=float, default=S)
    p.add_argument("--delta-min", type=float, default=S)
    p.add_argument("--delta-max", type=float, default=S)
    p.add_argument("--steps", type=int, default=S, help="number of intervals in delta")

    p = sub.add_parser("identities", help="check the end-site coupling sums")
    common(p)
    p.add_argument("--m-min", type=int, default=S)
    p.add_argument("--m-max", type=int, default=S)
    p.add_argument("--delta", type=str, default=S, help="comma-separated magnitudes; both signs are run")
    p.add_argument("--j", type=float, default=S)
    p.add_argument("--tol", type=float, default=S)

    p = sub.add_parser("evolve", help="state fidelity of |01> under the full Hamiltonian")
    common(p)
    model(p)
    p.add_argument("--t-max", type=float, default=S, help="end of grid in units of T")
    p.add_argument("--samples", type=int, default=S)
    p.add_argument("--start", choices=("01", "10"), default=S)

    p = sub.add_parser("gate-fidelity", help="average gate fidelity versus time")
    common(p)
    model(p)
    p.add_argument("--t-max", type=float, default=S)
    p.add_argument("--samples", type=int, default=S)
    p.add_argument("--open", action="store_true", default=S, help="Lindblad dynamics")
    p.add_argument("--tol", type=float, default=S)

    p = sub.add_parser("tomography", help="chi matrix of the gate")
    common(p)
    model(p)
    p.add_argument("--t", type=float, default=S, help="evaluation time in 1/j (default: T)")
    p.add_argument("--open", action="store_true", default=S)
    p.add_argument("--tol", type=float, default=S)
    return parser


def main(argv=None):
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    logging.basicConfig(level=logging.DEBUG if args.pop("verbose") else logging.WARNING)
    scenario = args.pop("scenario")
    path = args.pop("config")
    try:
        text = ""
        if path is not None:
            try:
                with open(path, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigInvalid([f"config: cannot read {path}: {exc.strerror}"]) from exc
        file_raw, _ = _read_pairs(text)
        if file_raw.get("scenario", scenario) != scenario:
            raise ConfigInvalid([f"scenario: file says {file_raw['scenario']!r}, command is {scenario!r}"])
        config = parse_config(text, {**args, "scenario": scenario})
        return run_scenario(config)
    except ConfigInvalid as exc:
        for msg in exc.errors:
            print(f"error: {msg}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (CavityBusError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
