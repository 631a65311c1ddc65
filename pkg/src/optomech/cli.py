"""Command-line front end.

Subcommands
-----------
steady          solve the operating point, print state and root diagnostics
system          dump a linear system (M, gamma, noise vectors) as CSV/pretty
spectrum        output spectral density S_AA over a frequency grid, as CSV
sideband        sideband asymmetry analysis, one CSV row
simulate        stochastic trajectories plus averaged PSD, as CSV
verify-algebra  commutator-closure report for named operator bases
sweep           steady-state columns across a swept parameter, as CSV

Configuration is a TOML file with a [params] table (SystemParams keys, plus
an optional units_hz boolean to give frequency-like entries in ordinary
hertz) and a [run] table of per-subcommand options. Unknown keys in either
table are rejected. Command-line flags override [run] values. The default
config path can be set in the environment variable OPTOMECH_CONFIG.

Every output starts with comment lines echoing the resolved configuration
and tool version, so any result can be reproduced from its own header;
identical config and seed give bit-identical files. Numbers are written
with 17 significant digits and parse back to the exact same float.

Exit codes: 0 success, 1 validation/configuration errors, 2 physics
failures (instability, unresolved sidebands, basis non-closure).
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import functools
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import tomli

from . import __version__
from .exceptions import (PhysicsError, UnstableSystemError, ValidationError)
from .langevin import (apply_optomech_perturbation, build_first_order,
                       build_minimal_fourth, build_quadratic,
                       build_second_order)
from .params import SystemParams
from .spectra import (effective_linewidth, estimate_inequivalence,
                      estimate_validity, output_psd, sideband_w_grid,
                      stability)
from .steady import solve_cubic_steady, solve_quadratic_steady

_SYSTEM_BASES = ("first_order", "second_order", "minimal_fourth", "quadratic")
_CLOSED_ALGEBRA_BASES = ("second_order_mixed", "quadratic_six", "minimal_fourth")
_ALGEBRA_BASES = _CLOSED_ALGEBRA_BASES + ("reduced",)

# [run] keys each subcommand accepts; anything else in the table is rejected.
_RUN_KEYS = {
    "steady": {"regime", "branch", "sweep", "scale", "jobs", "output"},
    "system": {"basis", "branch", "displacement_shift", "perturbation",
               "format", "output"},
    "spectrum": {"basis", "branch", "displacement_shift", "perturbation",
                 "noise_model", "phonon_floor", "grid", "w_min", "w_max",
                 "points", "span", "output"},
    "sideband": {"basis", "branch", "displacement_shift", "perturbation",
                 "noise_model", "phonon_floor", "span", "output"},
    "simulate": {"T", "dt", "seed", "trajectories", "decimate", "burn_in",
                 "noise", "psd_segment", "psd_demean", "output_trajectory",
                 "output_psd"},
    "verify-algebra": {"basis", "n_trunc", "tol", "output"},
    "sweep": {"param", "scale", "regime", "branch", "jobs", "output"},
}

_RUN_DEFAULTS = {
    "steady": {"regime": "auto", "branch": "auto", "scale": "linear",
               "jobs": 1},
    "system": {"basis": "first_order", "branch": "auto",
               "displacement_shift": False, "perturbation": False,
               "format": "csv"},
    "spectrum": {"basis": "first_order", "branch": "auto",
                 "displacement_shift": False, "perturbation": False,
                 "noise_model": "quantum", "phonon_floor": "thermal",
                 "grid": "auto", "points": 4001, "span": 3.0},
    "sideband": {"basis": "first_order", "branch": "auto",
                 "displacement_shift": False, "perturbation": False,
                 "noise_model": "quantum", "phonon_floor": "thermal",
                 "span": 3.0},
    "simulate": {"dt": None, "seed": 0, "trajectories": 1, "decimate": 1,
                 "burn_in": 0.0, "noise": True, "psd_segment": 4096,
                 "psd_demean": True, "output_trajectory": "trajectory.csv",
                 "output_psd": "psd.csv"},
    "verify-algebra": {"basis": "closed", "n_trunc": 14, "tol": 1e-10},
    "sweep": {"scale": "linear", "regime": "auto", "branch": "auto",
              "jobs": 1},
}


def _fmt(x: float) -> str:
    return "%.17g" % float(x)


def _toml_value(value) -> str:
    """TOML literal for a config value, floats at full precision."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _fmt(value)
    if isinstance(value, complex):
        return f"[{_fmt(value.real)}, {_fmt(value.imag)}]"
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise ValidationError(f"cannot echo config value {value!r}")


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as validation errors (exit 1)."""

    def error(self, message):
        raise ValidationError(message)


def _load_config(path: str | None, need_params: bool = True):
    """Read the TOML config; returns (params, raw params table, run table).

    need_params=False lets parameter-free subcommands accept a config that
    carries only a [run] table; a [params] table is still validated when
    present."""
    if path is None:
        path = os.environ.get("OPTOMECH_CONFIG")
    if path is None:
        raise ValidationError("no config: pass --config or set OPTOMECH_CONFIG")
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ValidationError(f"malformed config {path}: {exc}") from exc
    unknown = set(data) - {"params", "run"}
    if unknown:
        raise ValidationError(
            f"unknown config sections {sorted(unknown)}; expected [params], [run]")
    raw_params = dict(data.get("params", {}))
    units_hz = bool(raw_params.pop("units_hz", False))
    params = None
    if need_params or "params" in data:
        try:
            params = SystemParams.from_mapping(raw_params, units_hz=units_hz)
        except TypeError as exc:
            raise ValidationError(f"config {path}: {exc}") from exc
    if units_hz:
        raw_params["units_hz"] = True
    return params, raw_params, dict(data.get("run", {}))


def _merge_run(tool: str, run: dict, overrides: dict) -> dict:
    unknown = set(run) - _RUN_KEYS[tool]
    if unknown:
        raise ValidationError(
            f"unknown [run] keys for {tool}: {sorted(unknown)}")
    merged = dict(_RUN_DEFAULTS[tool])
    merged.update(run)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return merged


def _echo_lines(tool: str, raw_params: dict, run: dict) -> list[str]:
    lines = [f"# optomech {__version__} {tool}"]
    for key in sorted(raw_params):
        lines.append(f"# params.{key} = {_toml_value(raw_params[key])}")
    for key in sorted(run):
        if run[key] is not None:
            lines.append(f"# run.{key} = {_toml_value(run[key])}")
    return lines


@contextlib.contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


# ---------------------------------------------------------------------------
# operating point and system assembly shared by several subcommands


def _resolve_regime(params: SystemParams, regime: str) -> str:
    if regime not in ("auto", "cubic", "quadratic"):
        raise ValidationError(f"unknown regime {regime!r}")
    if regime == "auto":
        return "quadratic" if params.g1 > 0.0 else "cubic"
    return regime


def _solve_point(params: SystemParams, regime: str, branch: str):
    if regime == "quadratic":
        return solve_quadratic_steady(params, params.alpha, branch=branch)
    return solve_cubic_steady(params, params.alpha)


def _build_system(params: SystemParams, run: dict):
    basis = run["basis"]
    if basis not in _SYSTEM_BASES:
        raise ValidationError(
            f"unknown basis {basis!r}; expected one of {_SYSTEM_BASES}")
    regime = "quadratic" if basis == "quadratic" else "cubic"
    steady = _solve_point(params, regime, run["branch"])
    if basis == "first_order":
        system = build_first_order(params, steady=steady)
    elif basis == "second_order":
        system = build_second_order(params, steady=steady,
                                    displacement_shift=run["displacement_shift"])
    elif basis == "minimal_fourth":
        system = build_minimal_fourth(params, steady=steady)
    else:
        system = build_quadratic(params, steady=steady)
        if run["perturbation"]:
            system = apply_optomech_perturbation(system, params, steady)
    return system, steady


def _phonon_occupation(run: dict, steady) -> float | None:
    floor = run["phonon_floor"]
    if floor == "thermal":
        return None
    if floor == "coherent":
        return steady.m_bar
    raise ValidationError(
        f"unknown phonon_floor {floor!r}; expected 'thermal' or 'coherent'")


# ---------------------------------------------------------------------------
# steady


def _steady_report(state, regime: str) -> list[str]:
    lines = [
        f"regime = {regime}",
        f"branch = {state.branch}",
        f"n_bar = {_fmt(state.n_bar)}",
        f"m_bar = {_fmt(state.m_bar)}",
        f"b_bar_re = {_fmt(state.b_bar.real)}",
        f"b_bar_im = {_fmt(state.b_bar.imag)}",
        f"d_bar_re = {_fmt(state.d_bar.real)}",
        f"d_bar_im = {_fmt(state.d_bar.imag)}",
        f"f = {_fmt(state.f)}",
        f"psi = {_fmt(state.psi)}",
        f"bistable = {str(state.bistable).lower()}",
        f"degenerate_noise = {str(state.degenerate_noise).lower()}",
        "all_real_roots = [" + ", ".join(_fmt(r) for r in state.all_real_roots) + "]",
        f"residual = {_fmt(state.residual)}",
    ]
    for name in sorted(state.residuals):
        lines.append(f"residual.{name} = {_fmt(state.residuals[name])}")
    return lines


def _cmd_steady(params, raw_params, run) -> int:
    if run.get("sweep"):
        name, values = _parse_sweep_spec(run["sweep"], run["scale"])
        regime = _resolve_regime(params, run["regime"])
        rows = _sweep_rows(params, name, values, regime, run["branch"],
                           int(run["jobs"]))
        with _open_out(run.get("output")) as out:
            _write_sweep_csv(out, "steady", raw_params, run, name, values, rows)
        return 0
    regime = _resolve_regime(params, run["regime"])
    state = _solve_point(params, regime, run["branch"])
    with _open_out(run.get("output")) as out:
        for line in _echo_lines("steady", raw_params, run):
            print(line, file=out)
        for line in _steady_report(state, regime):
            print(line, file=out)
    return 0


# ---------------------------------------------------------------------------
# system


def _matrix_rows(name: str, array: np.ndarray):
    array = np.asarray(array, dtype=np.complex128)
    if array.ndim == 1:
        array = array[:, None]  # vectors dumped as a single column
    for (i, j), value in np.ndenumerate(array):
        yield f"{name},{i},{j},{_fmt(value.real)},{_fmt(value.imag)}"


def _cmd_system(params, raw_params, run) -> int:
    system, _ = _build_system(params, run)
    blocks = [("M", system.M), ("gamma", system.gamma),
              ("noise_feed", system.noise_feed),
              ("noise_psd_pos", system.noise_psd_pos),
              ("noise_psd_neg", system.noise_psd_neg),
              ("drive", system.drive)]
    with _open_out(run.get("output")) as out:
        for line in _echo_lines("system", raw_params, run):
            print(line, file=out)
        print(f"# info.kind = {system.kind}", file=out)
        print(f"# info.basis = {','.join(system.basis)}", file=out)
        print(f"# info.input_labels = {','.join(system.input_labels)}", file=out)
        print(f"# info.frame = {system.frame}", file=out)
        if run["format"] == "pretty":
            for name, array in blocks:
                print(f"{name} =", file=out)
                print(np.array2string(np.asarray(array), precision=6,
                                      suppress_small=True), file=out)
        elif run["format"] == "csv":
            print("block,row,col,re,im", file=out)
            for name, array in blocks:
                for row in _matrix_rows(name, array):
                    print(row, file=out)
        else:
            raise ValidationError(f"unknown format {run['format']!r}")
    return 0


def load_system_csv(path: str) -> dict[str, np.ndarray]:
    """Read back a `system` CSV dump. Returns the named blocks as complex
    arrays; vectors come back with shape (n, 1). Values round-trip
    bit-exactly through the 17-significant-digit decimals."""
    entries: dict[str, dict[tuple[int, int], complex]] = {}
    with open(path, newline="") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("block,"):
                continue
            name, i, j, re_s, im_s = line.split(",")
            entries.setdefault(name, {})[(int(i), int(j))] = \
                complex(float(re_s), float(im_s))
    blocks = {}
    for name, cells in entries.items():
        rows = 1 + max(i for i, _ in cells)
        cols = 1 + max(j for _, j in cells)
        arr = np.zeros((rows, cols), dtype=np.complex128)
        for (i, j), value in cells.items():
            arr[i, j] = value
        blocks[name] = arr
    return blocks


# ---------------------------------------------------------------------------
# spectrum / sideband


def _spectrum_grid(system, run) -> np.ndarray:
    Omega = system.meta["Omega"]
    if run["grid"] == "auto":
        return sideband_w_grid(Omega, effective_linewidth(system),
                               span=float(run["span"]))
    if run["grid"] == "linear":
        w_min = float(run.get("w_min", -run["span"] * Omega))
        w_max = float(run.get("w_max", run["span"] * Omega))
        return np.linspace(w_min, w_max, int(run["points"]))
    raise ValidationError(f"unknown grid {run['grid']!r}")


def _require_stable(system) -> None:
    eigs, stable = stability(system)
    if not stable:
        worst = eigs[np.argmax(eigs.real)]
        raise UnstableSystemError(
            f"drift matrix has a growing mode, eigenvalue {worst:.6g}")


def _cmd_spectrum(params, raw_params, run) -> int:
    system, steady = _build_system(params, run)
    _require_stable(system)
    grid = _spectrum_grid(system, run)
    result = output_psd(system, grid, noise_model=run["noise_model"],
                        phonon_occupation=_phonon_occupation(run, steady))
    with _open_out(run.get("output")) as out:
        for line in _echo_lines("spectrum", raw_params, run):
            print(line, file=out)
        print(f"# info.n_bar = {_fmt(steady.n_bar)}", file=out)
        print(f"# info.effective_linewidth = {_fmt(effective_linewidth(system))}",
              file=out)
        print(f"# info.grid_points = {grid.size}", file=out)
        print("w,S_AA", file=out)
        for w, s in zip(result.w_grid, result.S_AA):
            print(f"{_fmt(w)},{_fmt(s)}", file=out)
    return 0


def _cmd_sideband(params, raw_params, run) -> int:
    system, steady = _build_system(params, run)
    _require_stable(system)
    grid = sideband_w_grid(system.meta["Omega"], effective_linewidth(system),
                           span=float(run["span"]))
    result = output_psd(system, grid, noise_model=run["noise_model"],
                        phonon_occupation=_phonon_occupation(run, steady),
                        analyze=True)
    issues = estimate_validity(params, steady.n_bar)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        estimate = estimate_inequivalence(params, steady.n_bar)
    with _open_out(run.get("output")) as out:
        for line in _echo_lines("sideband", raw_params, run):
            print(line, file=out)
        print(f"# info.n_bar = {_fmt(steady.n_bar)}", file=out)
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["delta_r", "delta_b", "delta_Omega", "estimate",
                         "warnings"])
        writer.writerow([_fmt(result.delta_r), _fmt(result.delta_b),
                         _fmt(result.delta_Omega), _fmt(estimate),
                         "; ".join(issues)])
    return 0


# ---------------------------------------------------------------------------
# simulate


def _cmd_simulate(params, raw_params, run) -> int:
    from . import timedomain

    if run.get("T") is None:
        raise ValidationError("simulate needs a record duration T "
                              "(--T or [run] T)")
    dt = run["dt"]
    trajectory = timedomain.integrate_semiclassical(
        params, T=float(run["T"]), dt=None if dt is None else float(dt),
        seed=int(run["seed"]), n_traj=int(run["trajectories"]),
        decimate=int(run["decimate"]), noise=bool(run["noise"]),
        burn_in=float(run["burn_in"]))
    a = np.atleast_2d(trajectory.a.T).T
    b = np.atleast_2d(trajectory.b.T).T
    a_out = np.atleast_2d(trajectory.a_out.T).T

    # PSDs first so a validation failure leaves no partial output behind
    seg = int(run["psd_segment"])
    demean = bool(run["psd_demean"])
    w, psd_a = timedomain.welch_psd(trajectory.a, trajectory.dt, seg,
                                    demean=demean)
    _, psd_out = timedomain.welch_psd(trajectory.a_out, trajectory.dt, seg,
                                      demean=demean)

    with _open_out(run["output_trajectory"]) as out:
        for line in _echo_lines("simulate", raw_params, run):
            print(line, file=out)
        print(f"# info.dt = {_fmt(trajectory.dt)}", file=out)
        print(f"# info.scheme = {trajectory.scheme}", file=out)
        print("# info.trajectory_column = 0", file=out)
        print("t,a_re,a_im,b_re,b_im,a_out_re,a_out_im", file=out)
        for k, t in enumerate(trajectory.t):
            print(",".join([_fmt(t),
                            _fmt(a[k, 0].real), _fmt(a[k, 0].imag),
                            _fmt(b[k, 0].real), _fmt(b[k, 0].imag),
                            _fmt(a_out[k, 0].real), _fmt(a_out[k, 0].imag)]),
                  file=out)

    with _open_out(run["output_psd"]) as out:
        for line in _echo_lines("simulate", raw_params, run):
            print(line, file=out)
        print(f"# info.dt = {_fmt(trajectory.dt)}", file=out)
        print(f"# info.trajectories_averaged = {int(run['trajectories'])}",
              file=out)
        print("w,psd_a,psd_a_out", file=out)
        for k in range(w.size):
            print(f"{_fmt(w[k])},{_fmt(psd_a[k])},{_fmt(psd_out[k])}", file=out)
    return 0


# ---------------------------------------------------------------------------
# verify-algebra


def _algebra_basis_list(selector: str) -> tuple[str, ...]:
    if selector == "closed":
        return _CLOSED_ALGEBRA_BASES
    if selector == "all":
        return _ALGEBRA_BASES
    if selector in _ALGEBRA_BASES:
        return (selector,)
    raise ValidationError(
        f"unknown algebra basis {selector!r}; expected one of "
        f"{_ALGEBRA_BASES + ('closed', 'all')}")


def _cmd_verify_algebra(raw_params, run) -> int:
    from .fock import verify_basis_closure

    bases = _algebra_basis_list(run["basis"])
    reports = [verify_basis_closure(name, n_trunc=int(run["n_trunc"]),
                                    tol=float(run["tol"])) for name in bases]
    all_closed = all(r.closed for r in reports)
    with _open_out(run.get("output")) as out:
        for line in _echo_lines("verify-algebra", raw_params, run):
            print(line, file=out)
        for report in reports:
            verdict = "closed" if report.closed else "NOT closed"
            print(f"# basis {report.basis}: {verdict} "
                  f"(max residual {report.max_residual():.3e}, "
                  f"truncation {report.n_trunc}, tolerance {report.tol:g})",
                  file=out)
        print("basis,pair,residual", file=out)
        for report in reports:
            for rel in report.relations:
                print(f"{report.basis},[{rel.left};{rel.right}],"
                      f"{_fmt(rel.residual)}", file=out)
    if run.get("output"):
        status = "all closed" if all_closed else "non-closure detected"
        print(f"verify-algebra: {status} ({', '.join(bases)})")
    if not all_closed:
        raise PhysicsError(
            "basis fails commutator closure: "
            + ", ".join(r.basis for r in reports if not r.closed))
    return 0


# ---------------------------------------------------------------------------
# sweep


def _parse_sweep_spec(spec: str, scale: str) -> tuple[str, np.ndarray]:
    name, sep, grid = spec.partition("=")
    name = name.strip()
    parts = grid.split(":")
    if not sep or not name or len(parts) != 3:
        raise ValidationError(
            f"sweep spec must look like name=start:stop:count, got {spec!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ValidationError(f"bad sweep spec {spec!r}: {exc}") from exc
    if count < 1:
        raise ValidationError("sweep needs at least one point")
    if scale == "log":
        if start <= 0.0 or stop <= 0.0:
            raise ValidationError("log sweeps need positive endpoints")
        values = np.geomspace(start, stop, count)
    elif scale == "linear":
        values = np.linspace(start, stop, count)
    else:
        raise ValidationError(f"unknown sweep scale {scale!r}")
    return name, values


def _sweep_point(base: SystemParams, name: str, regime: str, branch: str,
                 value: float) -> tuple[float, float, float]:
    if name == "alpha":
        p = base.replace(alpha=complex(value))
    else:
        p = base.replace(**{name: float(value)})
    state = _solve_point(p, regime, branch)
    return state.n_bar, state.m_bar, state.psi


def _sweep_rows(params, name, values, regime, branch, jobs):
    if name != "alpha" and not hasattr(params, name):
        raise ValidationError(f"cannot sweep unknown parameter {name!r}")
    worker = functools.partial(_sweep_point, params, name, regime, branch)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(worker, values,
                                 chunksize=max(1, values.size // (4 * jobs))))
    else:
        rows = [worker(v) for v in values]
    return rows


def _log_slope(values: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Centered log-log slope of psi against the swept value; one-sided at
    the ends, nan wherever either quantity is non-positive."""
    with np.errstate(divide="ignore", invalid="ignore"):
        lv = np.where(values > 0.0, np.log(values), np.nan)
        lp = np.where(psi > 0.0, np.log(psi), np.nan)
    slope = np.full(values.size, np.nan)
    if values.size >= 2:
        slope[0] = (lp[1] - lp[0]) / (lv[1] - lv[0])
        slope[-1] = (lp[-1] - lp[-2]) / (lv[-1] - lv[-2])
    if values.size >= 3:
        slope[1:-1] = (lp[2:] - lp[:-2]) / (lv[2:] - lv[:-2])
    return slope


def _write_sweep_csv(out, tool, raw_params, run, name, values, rows) -> None:
    for line in _echo_lines(tool, raw_params, run):
        print(line, file=out)
    n_bar = np.array([r[0] for r in rows])
    m_bar = np.array([r[1] for r in rows])
    psi = np.array([r[2] for r in rows])
    slope = _log_slope(values, psi)
    print(f"{name},n_bar,m_bar,psi,exponent_fit", file=out)
    for k in range(values.size):
        print(",".join([_fmt(values[k]), _fmt(n_bar[k]), _fmt(m_bar[k]),
                        _fmt(psi[k]), _fmt(slope[k])]), file=out)


def _cmd_sweep(params, raw_params, run) -> int:
    if not run.get("param"):
        raise ValidationError("sweep needs --param name=start:stop:count")
    name, values = _parse_sweep_spec(run["param"], run["scale"])
    regime = _resolve_regime(params, run["regime"])
    rows = _sweep_rows(params, name, values, regime, run["branch"],
                       int(run["jobs"]))
    with _open_out(run.get("output")) as out:
        _write_sweep_csv(out, "sweep", raw_params, run, name, values, rows)
    return 0


# ---------------------------------------------------------------------------
# dispatch


def _build_parser() -> _Parser:
    parser = _Parser(prog="optomech", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"optomech {__version__}")
    sub = parser.add_subparsers(dest="tool", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("--config", help="TOML config path "
                       "(default: $OPTOMECH_CONFIG)")
        return p

    p = add("steady", help="operating point and root diagnostics")
    p.add_argument("--sweep", metavar="NAME=A:B:N",
                   help="emit a steady-state sweep CSV instead")
    p.add_argument("--scale", choices=("linear", "log"))
    p.add_argument("--output")

    p = add("system", help="dump drift/decay/noise of a linear system")
    p.add_argument("--basis", choices=_SYSTEM_BASES)
    p.add_argument("--format", choices=("csv", "pretty"))
    p.add_argument("--output")

    p = add("spectrum", help="output spectral density CSV")
    p.add_argument("--basis", choices=_SYSTEM_BASES)
    p.add_argument("--noise-model", dest="noise_model",
                   choices=("quantum", "classical"))
    p.add_argument("--output")

    p = add("sideband", help="sideband asymmetry analysis CSV")
    p.add_argument("--output")

    p = add("simulate", help="stochastic trajectories and averaged PSD")
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--trajectories", type=int)
    p.add_argument("--output-trajectory", dest="output_trajectory")
    p.add_argument("--output-psd", dest="output_psd")

    p = add("verify-algebra", help="commutator closure of operator bases")
    p.add_argument("--basis")
    p.add_argument("--n-trunc", dest="n_trunc", type=int)
    p.add_argument("--output")

    p = add("sweep", help="steady-state sweep over one parameter")
    p.add_argument("--param", metavar="NAME=A:B:N")
    p.add_argument("--scale", choices=("linear", "log"))
    p.add_argument("--jobs", type=int)
    p.add_argument("--output")

    return parser


def _dispatch(args) -> int:
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("tool", "config")}
    if args.tool == "verify-algebra":
        # closure checks need no physical parameters; config stays optional
        raw_params, run = {}, {}
        if args.config or os.environ.get("OPTOMECH_CONFIG"):
            _, raw_params, run = _load_config(args.config, need_params=False)
        run = _merge_run("verify-algebra", run, overrides)
        return _cmd_verify_algebra(raw_params, run)

    params, raw_params, run = _load_config(args.config)
    run = _merge_run(args.tool, run, overrides)
    if args.tool == "steady":
        return _cmd_steady(params, raw_params, run)
    if args.tool == "system":
        return _cmd_system(params, raw_params, run)
    if args.tool == "spectrum":
        return _cmd_spectrum(params, raw_params, run)
    if args.tool == "sideband":
        return _cmd_sideband(params, raw_params, run)
    if args.tool == "simulate":
        return _cmd_simulate(params, raw_params, run)
    if args.tool == "sweep":
        return _cmd_sweep(params, raw_params, run)
    raise ValidationError(f"unknown subcommand {args.tool!r}")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _dispatch(args)
    except ValidationError as exc:
        print(f"optomech: error: {exc}", file=sys.stderr)
        return 1
    except PhysicsError as exc:
        print(f"optomech: physics: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
