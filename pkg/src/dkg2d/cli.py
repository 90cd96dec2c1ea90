"""Command-line entry point.

Commands::

    dkg2d simulate            evolve random small data, write snapshots and diagnostics
    dkg2d scatter             run the delta sweep of the scattering diagnostic
    dkg2d verify <sub>        resonance, modulation, kernels, strichartz, nullform,
                              trilinear or gbound
    dkg2d norms <snapshot>    norms of a stored field or trajectory

Settings come from built-in defaults, then the JSON document given with
``--config``, then command-line flags (highest precedence).  Unknown keys
in the config are rejected.  Output goes to ``--output``, else
``$DKG2D_OUTPUT_DIR``, else ``./dkg2d-out``.

Exit codes: 0 success, 1 a check failed, 2 a solver guard tripped,
64 bad usage or configuration, 74 input/output failure.
"""
import argparse
import copy
import json
import os
import sys
import time

import numpy as np

EXIT_OK, EXIT_FAIL, EXIT_GUARD, EXIT_USAGE, EXIT_IO = 0, 1, 2, 64, 74
OUTPUT_ENV = "DKG2D_OUTPUT_DIR"
SCHEMA_VERSION = 1

VERIFY_SUBCOMMANDS = ("resonance", "modulation", "kernels", "strichartz", "nullform",
                      "trilinear", "gbound")

DEFAULTS = {
    "grid": {"n": 64, "L": 32.0, "nt": None, "dt": None},
    "masses": {"M": 1.0, "m": 1.0},
    "norms": {"r": 0.6, "sigma": 1.1, "r0": 1.0, "eps": 0.1},
    "solver": {"dt": None, "t_end": 2.0, "stride": None, "dealias": True, "mode": "stepper",
               "picard_iterations": 30, "picard_tol": 1e-10, "blowup_factor": 1e3,
               "charge_tol": 1e-6, "boundary_limit": 0.01, "boundary_width": 0.1,
               "nonlinear": True},
    "experiment": {},
    "seed": 0,
    "output_dir": None,
    "emit_plots": False,
}

# allowed experiment keys per command (verify subcommands by name)
EXPERIMENT_KEYS = {
    "simulate": {"delta", "envelope", "snapshot_fields"},
    "scatter": {"deltas", "envelope", "tol", "expected_slope"},
    "resonance": {"sample_count", "assert_nonresonant", "radius"},
    "modulation": {"count", "controls"},
    "kernels": {"ks", "resolution", "refine"},
    "strichartz": {"k_range", "T", "n", "levels", "profile"},
    "nullform": {"sample_count", "triples"},
    "trilinear": {"estimate", "ks", "pool_size", "n_samples"},
    "gbound": {"tables", "K_values", "control_r"},
    "norms": {"family", "sign", "mass", "window"},
}


class ConfigError(ValueError):
    """Invalid configuration or command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# ------------------------------------------------------------------ config

def _merge(base, extra, path=""):
    for key, val in extra.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {where!r} must be an object")
            if key == "experiment":
                base[key].update(val)
            else:
                _merge(base[key], val, where + ".")
        else:
            base[key] = val


def load_config(path):
    """Read a JSON config document.

    Raises
    ------
    ConfigError
        Malformed JSON or a top-level value that is not an object.
    OSError
        The file cannot be read.
    """
    with open(path) as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: malformed JSON ({e.msg} at line {e.lineno})") from e
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return doc


def build_config(command, doc=None, overrides=None):
    """Defaults, then ``doc``, then ``overrides`` (both nested dicts).

    ``command`` is the command or verify subcommand; it selects the allowed
    experiment keys.
    """
    cfg = copy.deepcopy(DEFAULTS)
    for extra in (doc or {}, overrides or {}):
        extra = dict(extra)
        extra.pop("command", None)
        _merge(cfg, extra)
    allowed = EXPERIMENT_KEYS.get(command, set())
    bad = set(cfg["experiment"]) - allowed
    if bad:
        raise ConfigError(f"unknown experiment keys for {command}: {sorted(bad)}")
    cfg["command"] = command
    _check_types(cfg)
    return cfg


def _check_types(cfg):
    def num(path, v, positive=True, allow_none=False):
        if v is None and allow_none:
            return
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
            raise ConfigError(f"{path} must be a number")
        if positive and v <= 0:
            raise ConfigError(f"{path} must be positive")

    g = cfg["grid"]
    if not isinstance(g["n"], int) or isinstance(g["n"], bool) or g["n"] < 8 or g["n"] & (g["n"] - 1):
        raise ConfigError("grid.n must be a power of two >= 8")
    num("grid.L", g["L"])
    num("masses.M", cfg["masses"]["M"], positive=False)
    num("masses.m", cfg["masses"]["m"])
    if cfg["masses"]["M"] < 0:
        raise ConfigError("masses.M must be >= 0")
    for k in ("r", "sigma", "r0", "eps"):
        num(f"norms.{k}", cfg["norms"][k])
    s = cfg["solver"]
    num("solver.dt", s["dt"], allow_none=True)
    num("solver.t_end", s["t_end"])
    if s["mode"] not in ("stepper", "picard"):
        raise ConfigError("solver.mode must be 'stepper' or 'picard'")
    if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool):
        raise ConfigError("seed must be an integer")
    if not isinstance(cfg["emit_plots"], bool):
        raise ConfigError("emit_plots must be true or false")


def output_dir(cfg):
    d = cfg.get("output_dir") or os.environ.get(OUTPUT_ENV) or "dkg2d-out"
    os.makedirs(d, exist_ok=True)
    return d


# ------------------------------------------------------------------ output

def _jsonable(x):
    from .report import _jsonable as j
    return j(x)


def write_json(path, obj):
    """Deterministic JSON (sorted keys, no timestamps)."""
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, sort_keys=True, indent=1)
        fh.write("\n")


def write_meta(path, runtime_s, extra=None):
    meta = {"schema_version": SCHEMA_VERSION, "runtime_s": runtime_s,
            "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z")}
    meta.update(extra or {})
    write_json(path, meta)


def write_svg(path, series, xlabel, ylabel, title, logy=True):
    """Static line plot; ``series`` maps a label to ``(x, y)``."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    matplotlib.rcParams["svg.hashsalt"] = "dkg2d"
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, (x, y) in series.items():
        ax.plot(x, y, "o-", label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(series) > 1:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# ------------------------------------------------------------------ simulate

def _grid_and_solver(cfg):
    from .evolution import SolverConfig
    from .grid import make_grid
    g = make_grid(cfg["grid"]["n"], float(cfg["grid"]["L"]))
    s = dict(cfg["solver"])
    dt = s.pop("dt") or 0.25 * g.dx
    nsteps = max(1, int(round(s["t_end"] / dt)))
    dt = s["t_end"] / nsteps
    # default: about 16 snapshots, with t_end always among them
    stride = s.pop("stride") or max(d for d in range(1, max(1, nsteps // 16) + 1) if nsteps % d == 0)
    sc = SolverConfig(dt=dt, stride=stride, r=cfg["norms"]["r"], sigma=cfg["norms"]["sigma"],
                      r0=cfg["norms"]["r0"], seed=cfg["seed"], **s)
    return g, sc


def run_simulate(cfg):
    """Evolve random data of size ``experiment.delta``; exit 2 on a guard trip."""
    from .evolution import (GuardError, PicardDivergence, random_initial_data,
                            write_diagnostics_csv)
    from .fields import MassPair
    from .snapshot import write_snapshot
    t0 = time.perf_counter()
    out = output_dir(cfg)
    ex = cfg["experiment"]
    delta = float(ex.get("delta", 1e-2))
    if delta < 0:
        raise ConfigError("experiment.delta must be >= 0")
    g, sc = _grid_and_solver(cfg)
    masses = MassPair(cfg["masses"]["M"], cfg["masses"]["m"])
    init = random_initial_data(g, delta, masses, cfg["norms"]["eps"], cfg["seed"],
                               ex.get("envelope"), sc.dealias)
    from .evolution import evolve
    summary = {"command": "simulate", "delta": delta, "n": g.n, "L": g.length, "dt": sc.dt,
               "t_end": sc.t_end, "stride": sc.stride, "mode": sc.mode, "seed": cfg["seed"],
               "masses": [masses.M, masses.m]}
    try:
        traj = evolve(init, sc)
    except GuardError as e:
        rows = list(e.diagnostics or [])
        if rows:
            rows[-1] = dict(rows[-1], guard=e.reason)
        write_diagnostics_csv(rows, os.path.join(out, "diagnostics.csv"))
        summary.update({"status": "guard", "guard": {"reason": e.reason, "message": str(e)}})
        write_json(os.path.join(out, "summary.json"), summary)
        write_meta(os.path.join(out, "summary.meta.json"), time.perf_counter() - t0)
        print(f"guard tripped: {e}", file=sys.stderr)
        return EXIT_GUARD
    except PicardDivergence as e:
        summary.update({"status": "guard", "guard": {"reason": "picard", "message": str(e),
                                                     "distances": e.distances}})
        write_json(os.path.join(out, "summary.json"), summary)
        write_meta(os.path.join(out, "summary.meta.json"), time.perf_counter() - t0)
        print(f"guard tripped: {e}", file=sys.stderr)
        return EXIT_GUARD
    write_diagnostics_csv(traj.diagnostics, os.path.join(out, "diagnostics.csv"))
    for name in ex.get("snapshot_fields", ["psi", "phi"]):
        write_snapshot(traj.field(name), os.path.join(out, f"{name}.snap"))
    flags = {k: v for k, v in traj.flags.items() if k != "runtime_s"}
    d0, d1 = traj.diagnostics[0], traj.diagnostics[-1]
    drift = abs(d1["charge"] - d0["charge"]) / d0["charge"] if d0["charge"] > 0 else 0.0
    summary.update({"status": "ok", "flags": flags, "snapshots": len(traj),
                    "final": d1, "charge_drift": drift})
    write_json(os.path.join(out, "summary.json"), summary)
    write_meta(os.path.join(out, "summary.meta.json"), time.perf_counter() - t0)
    if cfg["emit_plots"]:
        t = [r["t"] for r in traj.diagnostics]
        write_svg(os.path.join(out, "diagnostics.svg"),
                  {"psi H^sigma": (t, [r["psi_hsigma"] + 1e-300 for r in traj.diagnostics]),
                   "phi H^sigma": (t, [r["phi_hsigma"] + 1e-300 for r in traj.diagnostics])},
                  "t", "norm", "solution size")
    return EXIT_OK


# ------------------------------------------------------------------ scatter

def run_scatter(cfg):
    """Delta sweep; exit 0 iff the fitted slope is within ``tol`` of ``expected_slope``."""
    from .evolution import scattering_sweep
    from .fields import MassPair
    t0 = time.perf_counter()
    out = output_dir(cfg)
    ex = cfg["experiment"]
    deltas = ex.get("deltas", [1e-3, 3e-3, 1e-2])
    if (not isinstance(deltas, list) or len(deltas) < 2
            or any(isinstance(d, bool) or not isinstance(d, (int, float)) or not d > 0
                   for d in deltas)):
        raise ConfigError("experiment.deltas must be a list of at least two positive numbers")
    tol = float(ex.get("tol", 0.2))
    expected = float(ex.get("expected_slope", 2.0))
    g, sc = _grid_and_solver(cfg)
    masses = MassPair(cfg["masses"]["M"], cfg["masses"]["m"])
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rep = scattering_sweep(g, deltas, sc, masses, cfg["seed"], ex.get("envelope"))
    d = rep.to_dict()
    linear = not sc.nonlinear
    if linear:
        ok = max(rep.deviations) < 1e-10
        d["slope"] = None
    else:
        ok = bool(np.isfinite(rep.slope) and abs(rep.slope - expected) <= tol)
    d.update({"linear": linear, "tol": tol, "expected_slope": expected, "pass": ok,
              "n": g.n, "L": g.length, "dt": sc.dt, "t_end": sc.t_end, "seed": cfg["seed"]})
    write_json(os.path.join(out, "scatter.json"), d)
    with open(os.path.join(out, "scatter.csv"), "w") as fh:
        fh.write("delta,deviation\n")
        for a, b in zip(rep.deltas, rep.deviations):
            fh.write(f"{a!r},{b!r}\n")
    write_meta(os.path.join(out, "scatter.meta.json"), time.perf_counter() - t0)
    if cfg["emit_plots"] and not linear:
        write_svg(os.path.join(out, "scatter.svg"), {"deviation": (rep.deltas, rep.deviations)},
                  "delta", "profile deviation", rep.label)
    return EXIT_OK if ok else EXIT_FAIL


# ------------------------------------------------------------------ verify

def _verify_resonance(cfg):
    from .fields import MassPair
    from .resonance import bound_ratio_scan
    ex = cfg["experiment"]
    masses = MassPair(cfg["masses"]["M"], cfg["masses"]["m"])
    assert_nr = ex.get("assert_nonresonant", True)
    rep = bound_ratio_scan("non-res", masses, int(ex.get("sample_count", 1_000_000)),
                           cfg["seed"], ex.get("radius", 2.0 ** 10),
                           negative_control=not masses.nonresonant)
    if not assert_nr:
        # negative-control mode: success means a near resonance was found
        rep.passed = bool(rep.details["min_abs_mu_at_argmin"] < 1e-6)
        rep.details["mode"] = "expect-resonance"
    return [rep]


def _verify_modulation(cfg):
    from .resonance import vanishing_suite
    ex = cfg["experiment"]
    return [vanishing_suite(int(ex.get("count", 50)), int(ex.get("controls", 10)), cfg["seed"])]


def _verify_kernels(cfg):
    from .verify.kernels import kernel_report
    ex = cfg["experiment"]
    return [kernel_report(tuple(ex.get("ks", (3, 4, 5, 6))), -1, int(ex.get("resolution", 32)),
                          cfg["masses"]["m"], bool(ex.get("refine", True)))]


def _verify_strichartz(cfg):
    from .verify.strichartz import strichartz_slope
    ex = cfg["experiment"]
    kw = dict(k_range=tuple(ex.get("k_range", range(2, 7))), T=float(ex.get("T", 8.0)),
              seed=cfg["seed"], n=int(ex.get("n", 256)), profile=ex.get("profile", "packet"),
              mass=cfg["masses"]["m"])
    a = strichartz_slope(8 / 3, 8, part="both", levels=ex.get("levels"), **kw)
    gap = a.details["slope_gap"]
    a.details["gap_ok"] = gap <= 0.1
    a.passed = bool(a.passed and gap <= 0.1)
    b = strichartz_slope(np.inf, 2, part="i", tol=0.05, **kw)
    return [a, b]


def aligned_massless_product(sample_count=10000, seed=0):
    """Largest ``|Pi_+(xi) Pi_-(c xi)|`` at ``M = 0`` over random ``xi`` and ``c > 0``."""
    from .algebra import pi_symbol
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal((sample_count, 2)) * 2.0 ** rng.uniform(-5, 10, (sample_count, 1))
    c = 2.0 ** rng.uniform(-5, 5, (sample_count, 1))
    P = pi_symbol(xi, 0.0, 1) @ pi_symbol(c * xi, 0.0, -1)
    same = pi_symbol(xi, 0.0, 1) @ pi_symbol(xi, 0.0, -1)
    return (float(np.linalg.norm(P, ord=2, axis=(-2, -1)).max()),
            float(np.linalg.norm(same, ord=2, axis=(-2, -1)).max()))


def _verify_nullform(cfg):
    from .algebra import cap_pairing_bound_scan, symbol_product_scan
    from .report import LemmaReport
    ex = cfg["experiment"]
    n = int(ex.get("sample_count", 10000))
    M = cfg["masses"]["M"]
    scaled, same = aligned_massless_product(n, cfg["seed"])
    reps = [LemmaReport("aligned-massless", {"sample_count": n}, cfg["seed"], n,
                        np.array([scaled, same]), scaled, scaled <= 1e-15,
                        {"max_scaled_pair": scaled, "max_same_xi": same})]
    for s1, s2 in ((1, -1), (1, 1), (-1, -1), (-1, 1)):
        reps.append(symbol_product_scan(s1, s2, M, 10 * n, cfg["seed"]))
    for k1, k2, l in ex.get("triples", [(6, 6, 3), (8, 8, 5)]):
        for s1, s2 in ((1, -1), (1, 1)):
            reps.append(cap_pairing_bound_scan(k1, k2, l, s1, s2, n, cfg["seed"], M))
    return reps


def _verify_trilinear(cfg):
    from .verify.trilinear import trilinear_sweep
    ex = cfg["experiment"]
    return [trilinear_sweep(ex.get("estimate", "cunn2-S"), tuple(ex.get("ks", (2, 3, 4, 5))),
                            n_samples=int(ex.get("n_samples", 64)), seed=cfg["seed"],
                            pool_size=int(ex.get("pool_size", 4)), r=cfg["norms"]["r"],
                            r0=cfg["norms"]["r0"])]


def _verify_gbound(cfg):
    from .verify.gbound import summability_report
    ex = cfg["experiment"]
    K = tuple(ex.get("K_values", (16, 32, 64)))
    r, r0 = cfg["norms"]["r"], cfg["norms"]["r0"]
    reps = [summability_report(t, r, r0, K) for t in ex.get("tables", ["C1", "C2", "C3"])]
    rc = ex.get("control_r", 0.4)
    if rc is not None:
        reps += [summability_report(t, rc, r0, K, expect_bounded=False)
                 for t in ex.get("tables", ["C1", "C2", "C3"])]
    return reps


_VERIFY = {"resonance": _verify_resonance, "modulation": _verify_modulation,
           "kernels": _verify_kernels, "strichartz": _verify_strichartz,
           "nullform": _verify_nullform, "trilinear": _verify_trilinear,
           "gbound": _verify_gbound}


def run_verify(cfg, sub):
    """Run one verify subcommand; exit 0 iff every report passes."""
    if sub not in _VERIFY:
        raise ConfigError(f"unknown verify subcommand {sub!r}")
    t0 = time.perf_counter()
    out = output_dir(cfg)
    reps = _VERIFY[sub](cfg)
    write_json(os.path.join(out, f"verify-{sub}.json"),
               {"schema_version": SCHEMA_VERSION, "subcommand": sub,
                "reports": [r.to_dict(include_runtime=False) for r in reps]})
    write_meta(os.path.join(out, f"verify-{sub}.meta.json"), time.perf_counter() - t0,
               {"runtimes_s": [r.runtime_s for r in reps]})
    if cfg["emit_plots"]:
        series = {}
        for i, r in enumerate(reps):
            y = np.abs(np.asarray(r.ratios, float))
            if y.size and np.any(y > 0):
                series[f"{r.lemma} {i}"] = (np.arange(y.size), np.where(y > 0, y, np.nan))
        if series:
            write_svg(os.path.join(out, f"verify-{sub}.svg"), series, "entry", "value", sub)
    for r in reps:
        print(r)
    return EXIT_OK if all(r.passed for r in reps) else EXIT_FAIL


# ------------------------------------------------------------------ norms

def run_norms(cfg, path):
    """Norms of a snapshot; trajectories get the aggregate S and Z norms."""
    from .fields import Trajectory, l2_norm, sobolev_norm
    from .norms import aggregate_norm, lplq_norm
    from .snapshot import read_snapshot
    t0 = time.perf_counter()
    out = output_dir(cfg)
    obj = read_snapshot(path)
    ex = cfg["experiment"]
    nm = cfg["norms"]
    res = {"file": os.path.basename(path)}
    if isinstance(obj, Trajectory):
        s = int(ex.get("sign", 1))
        mass = float(ex.get("mass", cfg["masses"]["m"]))
        win = bool(ex.get("window", False))
        res.update({"kind": f"trajectory-{obj.kind}", "sigma": nm["sigma"],
                    "S": aggregate_norm(obj, nm["sigma"], "S", s, mass, nm["r0"], win),
                    "Z": aggregate_norm(obj, nm["sigma"], "Z", s, mass, nm["r0"], win),
                    "LinfL2": lplq_norm(obj, np.inf, 2), "L2L2": lplq_norm(obj, 2, 2)})
    else:
        res.update({"kind": obj.kind, "L2": l2_norm(obj),
                    "H^sigma": sobolev_norm(obj, nm["sigma"]), "sigma": nm["sigma"]})
    name = os.path.splitext(os.path.basename(path))[0]
    write_json(os.path.join(out, f"norms-{name}.json"), res)
    write_meta(os.path.join(out, f"norms-{name}.meta.json"), time.perf_counter() - t0)
    print(json.dumps(_jsonable(res), sort_keys=True))
    return EXIT_OK


# ------------------------------------------------------------------ main

def _parser():
    p = _Parser(prog="dkg2d", description="Dirac-Klein-Gordon 2D simulator and checks.")
    p.add_argument("--config", help="JSON config document")
    p.add_argument("--output", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--plots", action="store_true", help="also write SVG plots")
    sub = p.add_subparsers(dest="command")

    def common(q):
        q.add_argument("--n", type=int)
        q.add_argument("--L", type=float)
        q.add_argument("--dt", type=float)
        q.add_argument("--t-end", type=float)
        q.add_argument("--stride", type=int)
        q.add_argument("--M", type=float)
        q.add_argument("--m", type=float)
        q.add_argument("--mode", choices=["stepper", "picard"])
        q.add_argument("--envelope", type=float)

    s = sub.add_parser("simulate", help="evolve random small data")
    common(s)
    s.add_argument("--delta", type=float)
    c = sub.add_parser("scatter", help="scattering diagnostic sweep")
    common(c)
    c.add_argument("--deltas", help="comma-separated list")
    c.add_argument("--linear", action="store_true", help="switch the nonlinearity off")
    c.add_argument("--tol", type=float)
    v = sub.add_parser("verify", help="run a verification experiment")
    v.add_argument("sub", help=", ".join(VERIFY_SUBCOMMANDS))
    v.add_argument("--M", type=float)
    v.add_argument("--m", type=float)
    v.add_argument("--r", type=float)
    v.add_argument("--negative-control", action="store_true",
                   help="resonance: expect a resonance instead of asserting its absence")
    nm = sub.add_parser("norms", help="norms of a snapshot file")
    nm.add_argument("snapshot")
    nm.add_argument("--sigma", type=float)
    return p


def _overrides(a):
    o = {"grid": {}, "masses": {}, "solver": {}, "norms": {}, "experiment": {}}
    get = lambda name: getattr(a, name, None)
    for src, sect, key in (("n", "grid", "n"), ("L", "grid", "L"), ("dt", "solver", "dt"),
                           ("t_end", "solver", "t_end"), ("stride", "solver", "stride"),
                           ("mode", "solver", "mode"), ("M", "masses", "M"),
                           ("m", "masses", "m"), ("r", "norms", "r"),
                           ("sigma", "norms", "sigma"), ("delta", "experiment", "delta"),
                           ("envelope", "experiment", "envelope"), ("tol", "experiment", "tol")):
        if get(src) is not None:
            o[sect][key] = get(src)
    if get("deltas") is not None:
        try:
            o["experiment"]["deltas"] = [float(x) for x in a.deltas.split(",")]
        except ValueError as e:
            raise ConfigError(f"bad --deltas: {a.deltas!r}") from e
    if get("linear"):
        o["solver"]["nonlinear"] = False
    if get("negative_control"):
        o["experiment"]["assert_nonresonant"] = False
    if a.seed is not None:
        o["seed"] = a.seed
    if a.output is not None:
        o["output_dir"] = a.output
    if a.plots:
        o["emit_plots"] = True
    return {k: v for k, v in o.items() if v != {}}


def main(argv=None):
    """Entry point; returns the exit code."""
    try:
        a = _parser().parse_args(argv)
        if a.command is None:
            raise ConfigError("missing command (simulate, scatter, verify, norms)")
        key = a.sub if a.command == "verify" else a.command
        if a.command == "verify" and a.sub not in VERIFY_SUBCOMMANDS:
            raise ConfigError(f"unknown verify subcommand {a.sub!r}")
        doc = load_config(a.config) if a.config else None
        cfg = build_config(key, doc, _overrides(a))
        if a.command == "simulate":
            return run_simulate(cfg)
        if a.command == "scatter":
            return run_scatter(cfg)
        if a.command == "verify":
            return run_verify(cfg, a.sub)
        return run_norms(cfg, a.snapshot)
    except ConfigError as e:
        print(f"dkg2d: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"dkg2d: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        # parameter combinations rejected by the library
        print(f"dkg2d: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
