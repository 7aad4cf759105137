"""Command-line front end: config parsing, orchestration, CSV and manifest output.

Config files are INI-like::

    [environment]
    component = 0.5
    atom = 0.5 : [-1, 1]
    atom = 0.5 : [1, 1]
    component = 0.5
    atom = 1.0 : [0, 2]

    [barrier]
    d = 1.5
    alpha = 1/3

    [experiment]
    n = 64, 216, 512
    replicates = 10000
    environments = 20

    [seeds]
    root = 7

``atom`` lines attach to the most recent ``component``.  Numbers may be
written as fractions.  Unknown sections or keys are errors.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import re
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import __version__
from .approx import (StaQuery, empirical_max_tail, fit_tail_constant, maximal_tail_bound,
                     sta_couple_check)
from .criticality import assumption_report, find_critical_theta
from .environment import BarrierSpec, EnvironmentLaw, read_replay, sample_environment, write_replay
from .errors import BrwreError, ConfigError, InvalidLawError, NoCriticalTilt, NumericError
from .experiments import (ExperimentConfig, extinction_rate_experiment, hypothesis_annotation,
                          lp_moment_experiment, summarize_rates)
from .forward import POPULATION_CAP, SPLIT, PopulationCaps, quenched_survival
from .pointprocess import OffspringAtom, PointProcessLaw
from .rwre import CorridorSpec, LatticeWalk, corridor_probability, small_deviation_rate
from .spine import DEFAULT_BUDGET, PathFunctional, exhaustive_oracle
from .streams import derive_seed

SECTIONS = {
    "environment": {"component", "atom"},
    "barrier": {"d", "alpha"},
    "experiment": {
        "n", "replicates", "environments", "p", "split", "exact", "population_cap",
        "budget", "mode", "b1", "b2", "a", "a_prime", "y_exponent", "half_width",
        "l", "m", "beta", "iota", "steps", "regressor",
    },
    "seeds": {"root"},
}

_ATOM = re.compile(r"^\s*([^:]+?)\s*:\s*\[(.*)\]\s*$")


def _number(text, line, section) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        t = text.strip().lower()
        if t in ("inf", "+inf", "infinity"):
            return math.inf
        raise ConfigError(f"not a number: {text.strip()!r}", line, section) from None


def _numbers(text, line, section):
    return tuple(_number(t, line, section) for t in text.split(",") if t.strip())


@dataclass
class ParsedConfig:
    """Result of :func:`parse_config`; unpacks as ``(experiment, envlaw)``.

    A law without a critical tilt still parses; ``experiment`` raises the
    deferred error on first use.
    """
    _experiment: ExperimentConfig | None
    envlaw: EnvironmentLaw
    settings: dict
    root_seed: int
    digest: str
    path: Path | None = None
    lines: dict = field(default_factory=dict)
    tilt_error: BrwreError | None = None

    @property
    def experiment(self) -> ExperimentConfig:
        if self._experiment is None:
            raise self.tilt_error
        return self._experiment

    def __iter__(self):
        yield self.experiment
        yield self.envlaw

    def get(self, key, default=None):
        return self.settings.get(key, default)


def config_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _parse_environment(entries):
    comps = []
    for line, key, val in entries:
        if key == "component":
            comps.append((_number(val, line, "environment"), [], line))
        else:
            if not comps:
                raise ConfigError("atom before any component", line, "environment")
            m = _ATOM.match(val)
            if not m:
                raise ConfigError(f"atom must read 'p : [d1, d2, ...]', got {val!r}", line, "environment")
            p = _number(m.group(1), line, "environment")
            try:
                disp = tuple(Fraction(t.strip()) for t in m.group(2).split(",") if t.strip())
                comps[-1][1].append(OffspringAtom(p, disp))
            except (ValueError, ZeroDivisionError, InvalidLawError) as exc:
                raise ConfigError(str(exc), line, "environment") from None
    if not comps:
        raise ConfigError("no components", section="environment")
    laws = []
    for w, atoms, line in comps:
        if not atoms:
            raise ConfigError("component without atoms", line, "environment")
        try:
            laws.append((w, PointProcessLaw(tuple(atoms))))
        except InvalidLawError as exc:
            raise ConfigError(str(exc), line, "environment") from None
    total = math.fsum(w for w, _ in laws)
    if abs(total - 1.0) > 1e-12:
        raise ConfigError(f"weights sum {total:g} ≠ 1", section="environment")
    try:
        return EnvironmentLaw(tuple(laws))
    except InvalidLawError as exc:
        raise ConfigError(str(exc), section="environment") from None


def parse_config_text(text: str, path=None) -> ParsedConfig:
    section = None
    seen: dict = {s: [] for s in SECTIONS}
    lines = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", no)
            continue
        if section is None:
            raise ConfigError("key outside any section", no)
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", no, section)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in SECTIONS[section]:
            raise ConfigError(f"unknown key {key!r}", no, section)
        if section != "environment" and any(k == key for _, k, _ in seen[section]):
            raise ConfigError(f"duplicate key {key!r}", no, section)
        seen[section].append((no, key, val))
        lines[(section, key)] = no
    envlaw = _parse_environment(seen["environment"])

    settings = {}
    for sec in ("barrier", "experiment", "seeds"):
        for no, key, val in seen[sec]:
            settings[key] = (no, sec, val)

    def num(key, default):
        if key not in settings:
            return default
        no, sec, val = settings[key]
        return _number(val, no, sec)

    def nums(key, default):
        if key not in settings:
            return default
        no, sec, val = settings[key]
        out = _numbers(val, no, sec)
        if not out:
            raise ConfigError(f"{key} is empty", no, sec)
        return out

    def integer(key, default):
        v = num(key, default)
        if v is None:
            return None
        if v != int(v):
            no, sec, _ = settings[key]
            raise ConfigError(f"{key} must be an integer", no, sec)
        return int(v)

    root = integer("root", 0)
    exact = False
    if "exact" in settings:
        no, sec, val = settings["exact"]
        if val.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"exact must be a boolean, got {val!r}", no, sec)
        exact = val.lower() in ("true", "1", "yes")
    n_grid = nums("n", (64, 216, 512))
    for n in n_grid:
        if n != int(n) or n < 1:
            no, sec, _ = settings["n"]
            raise ConfigError("n values must be positive integers", no, sec)
    tilt_error = None
    try:
        exp = ExperimentConfig(
            envlaw,
            d_values=nums("d", (1.5,)),
            alpha_values=nums("alpha", (1.0 / 3.0,)),
            n_grid=tuple(int(n) for n in n_grid),
            replicates=integer("replicates", 10_000),
            environments=integer("environments", 10),
            p=num("p", 1.0),
            seed=root,
            split=integer("split", SPLIT),
            exact=exact,
        )
    except NoCriticalTilt as exc:
        exp, tilt_error = None, exc
    except ValueError as exc:
        raise ConfigError(str(exc), section="experiment") from None
    extra = {}
    for key in ("population_cap", "budget", "l", "beta", "iota", "b1", "b2", "y_exponent", "half_width"):
        if key in settings:
            extra[key] = num(key, None)
    for key in ("m", "a", "a_prime"):
        if key in settings:
            extra[key] = nums(key, None)
    for key in ("mode", "regressor"):
        if key in settings:
            extra[key] = settings[key][2]
    if "steps" in settings:
        extra["steps"] = _parse_steps(*settings["steps"])
    raw = text.encode("utf-8")
    return ParsedConfig(exp, envlaw, extra, root, config_digest(raw),
                        Path(path) if path is not None else None, lines, tilt_error)


def _parse_steps(no, sec, val):
    """``p : x; p : x; ...`` step law for the maximal-inequality harness."""
    values, probs = [], []
    for part in val.split(";"):
        if not part.strip():
            continue
        if ":" not in part:
            raise ConfigError(f"step must read 'p : x', got {part.strip()!r}", no, sec)
        p, x = part.split(":", 1)
        probs.append(_number(p, no, sec))
        try:
            values.append(Fraction(x.strip()))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"not a number: {x.strip()!r}", no, sec) from None
    if abs(math.fsum(probs) - 1.0) > 1e-12:
        raise ConfigError(f"step probabilities sum {math.fsum(probs):g} ≠ 1", no, sec)
    return values, probs


def parse_config(path) -> ParsedConfig:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise ConfigError(f"{path} is not UTF-8") from None
    return parse_config_text(text, path)


# --------------------------------------------------------------------------
# output


def _cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: Path, header, rows) -> Path:
    out = [",".join(header)]
    out.extend(",".join(_cell(v) for v in row) for row in rows)
    path.write_bytes(("\n".join(out) + "\n").encode("ascii"))
    return path


@dataclass(frozen=True)
class RunManifest:
    config_digest: str
    root_seed: int
    version: str
    timestamp: str
    subcommand: str
    outputs: tuple
    output_digests: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = dict(self.__dict__)
        d["outputs"] = list(self.outputs)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    def write(self, path: Path) -> Path:
        path.write_bytes(self.to_json().encode("utf-8"))
        return path


def load_manifest(path, config_path=None) -> RunManifest:
    """Read a manifest; with ``config_path`` the config digest is recomputed and checked."""
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    man = RunManifest(d["config_digest"], d["root_seed"], d["version"], d["timestamp"],
                      d["subcommand"], tuple(d["outputs"]), d.get("output_digests", {}))
    if config_path is not None:
        got = config_digest(Path(config_path).read_bytes())
        if got != man.config_digest:
            raise ConfigError(f"config digest mismatch: manifest {man.config_digest[:12]}, file {got[:12]}")
    return man


# --------------------------------------------------------------------------
# subcommands

CSV_COLUMNS = {
    "check-env": ("condition", "status", "witness"),
    "critical": ("vartheta", "kappa0", "kappa_at", "kappa_prime", "kappa_second", "sigma2",
                 "sigma2_star", "speed"),
    "mto-check": ("functional", "n", "genealogy", "spine_dp", "rel_err", "pass"),
    "survival": ("n", "d", "alpha", "estimate", "stderr", "truncated_fraction", "seed"),
    "corridor": ("n", "lower", "upper", "mode", "probability", "stderr", "log_p"),
    "rate": ("n", "y_n", "env_index", "log_p", "normalized_rate", "mode"),
    "rate-experiment": ("d", "alpha", "n", "env_index", "estimate", "stderr", "A_n", "censored",
                        "A_n_lower", "exact"),
    "rate-summary": ("d", "alpha", "n", "environments", "censored", "mean", "median", "spread"),
    "lp-experiment": ("n", "moment", "stderr", "used", "censored", "zero_fraction"),
    "lp-regression": ("regressor", "slope", "stderr", "t"),
    "approx-check": ("l", "m", "beta", "empirical", "stderr", "bound_fitted"),
}


def _cmd_check_env(cfg, args, out):
    prof = find_critical_theta(cfg.envlaw)
    rep = assumption_report(cfg.envlaw, prof, cfg.experiment.params)
    print(rep.format())
    print("summary," + ",".join(f"{k}={v.status}" for k, v in rep.verdicts.items()))
    return [write_csv(out / "check_env.csv", CSV_COLUMNS["check-env"], list(rep.records()))]


def _cmd_critical(cfg, args, out):
    p = find_critical_theta(cfg.envlaw)
    row = (p.vartheta, p.kappa0, p.kappa_at, p.kappa_prime, p.kappa_second, p.sigma2, p.sigma2_star, p.speed)
    print(f"vartheta = {p.vartheta!r}")
    return [write_csv(out / "critical.csv", CSV_COLUMNS["critical"], [row])]


def mto_functionals(n: int, vartheta: float, envseq):
    """Window and cap combinations used by ``mto-check``."""
    from .environment import cumulative_kappa
    K = cumulative_kappa(envseq.prefix(n), vartheta)
    centre = [-K[i] / vartheta for i in range(1, n + 1)]
    return {
        "one": PathFunctional.one(n),
        "window-wide": PathFunctional(n, windows=[(c - 3.0, c + 3.0) for c in centre]),
        "window-tight": PathFunctional(n, windows=[(c - 1.0, c + 1.0) for c in centre]),
        "halfline": PathFunctional(n, windows=[(-math.inf, 1.0)] * n),
        "cap-2": PathFunctional(n, caps=[2.0] * n),
        "window*cap": PathFunctional(n, windows=[(c - 2.0, c + 2.0) for c in centre], caps=[3.0] * n),
    }


def _cmd_mto(cfg, args, out):
    n = args.n[0] if args.n else 3
    budget = int(cfg.get("budget", DEFAULT_BUDGET))
    prof = find_critical_theta(cfg.envlaw)
    env = sample_environment(cfg.envlaw, n, derive_seed(args.seed, 0xC1))
    rows = []
    for name, fn in mto_functionals(n, prof.vartheta, env).items():
        g = exhaustive_oracle(env, prof.vartheta, fn, "genealogy", budget)
        s = exhaustive_oracle(env, prof.vartheta, fn, "spine-dp", budget)
        rel = abs(g - s) / max(abs(g), abs(s), 1e-300)
        rows.append((name, n, g, s, rel, rel <= 1e-9))
    for r in rows:
        print(f"{r[0]:<14} {'pass' if r[-1] else 'FAIL'}  rel_err={r[4]:.3g}")
    return [write_csv(out / "mto_check.csv", CSV_COLUMNS["mto-check"], rows)]


def _environment(cfg, args, n, out):
    if getattr(args, "env", None):
        env = read_replay(args.env, cfg.envlaw)
    else:
        env = sample_environment(cfg.envlaw, n, derive_seed(args.seed, 0xE0, 0))
        write_replay(env, out / "environment.replay")
    if len(env) < n:
        raise ConfigError(f"environment replay has length {len(env)} < n={n}")
    return env


def _cmd_survival(cfg, args, out):
    exp = cfg.experiment
    n_grid = args.n or exp.n_grid
    d_values = args.d or exp.d_values
    alphas = args.alpha or exp.alpha_values
    reps = args.replicates or exp.replicates
    popcap = args.population_cap or int(cfg.get("population_cap", POPULATION_CAP))
    split = None if args.no_split else (args.split or exp.split)
    env = _environment(cfg, args, max(n_grid), out)
    rows = []
    for di, d in enumerate(d_values):
        for ai, alpha in enumerate(alphas):
            bar = None if math.isinf(d) else BarrierSpec(d, alpha, exp.vartheta)
            for n in n_grid:
                est = quenched_survival(env, bar, n, reps, args.seed, PopulationCaps(popcap),
                                        args.workers, (0x5A, di, ai, n), split)
                rows.append((n, float(d), float(alpha), est.value, est.stderr, est.truncated_fraction, args.seed))
    return [write_csv(out / "survival.csv", CSV_COLUMNS["survival"], rows)]


def _corridor_bounds(cfg, n):
    y = n ** cfg.get("y_exponent", 1.0 / 3.0)
    if "half_width" in cfg.settings:
        hw = cfg.get("half_width")
        return -hw * y, hw * y
    return cfg.get("b1", -1.0) * y, cfg.get("b2", 1.0) * y


def _walk(cfg, args, n, out):
    if "steps" in cfg.settings:
        vals, probs = cfg.get("steps")
        return LatticeWalk.from_step_law(vals, probs, n)
    env = _environment(cfg, args, n, out)
    return LatticeWalk.from_environment(env, find_critical_theta(cfg.envlaw).vartheta)


def _cmd_corridor(cfg, args, out):
    mode = cfg.get("mode", "exact")
    reps = args.replicates or cfg.experiment.replicates
    n_grid = args.n or cfg.experiment.n_grid
    walk = _walk(cfg, args, max(n_grid), out)
    rows = []
    for n in n_grid:
        lo, hi = _corridor_bounds(cfg, n)
        spec = CorridorSpec(n, lo, hi)
        if mode == "exact":
            p = corridor_probability(walk, spec, "exact")
            rows.append((n, lo, hi, mode, p, 0.0, math.log(p) if p > 0 else -math.inf))
        else:
            est = corridor_probability(walk, spec, "mc", reps, derive_seed(args.seed, 0x7C, n), args.workers)
            p = est.value
            rows.append((n, lo, hi, mode, p, est.stderr, math.log(p) if p > 0 else -math.inf))
    return [write_csv(out / "corridor.csv", CSV_COLUMNS["corridor"], rows)]


def _cmd_rate(cfg, args, out):
    exp = cfg.experiment
    steps = cfg.get("steps")
    rows = small_deviation_rate(
        None if steps else cfg.envlaw, None if steps else exp.vartheta,
        cfg.get("b1", -1.0), cfg.get("b2", 1.0),
        a=tuple(cfg.get("a", (-0.5, 0.5))), a_prime=tuple(cfg.get("a_prime", (-0.5, 0.5))),
        y_exponent=cfg.get("y_exponent", 1.0 / 3.0), n_grid=args.n or exp.n_grid,
        environments=exp.environments, seed=args.seed, mode=cfg.get("mode", "exact"),
        path_replicates=args.replicates or exp.replicates, step_law=steps, workers=args.workers)
    table = [(r.n, r.y_n, r.env_index, r.log_p, r.normalized_rate, r.mode) for r in rows]
    return [write_csv(out / "rate.csv", CSV_COLUMNS["rate"], table)]


def _experiment(cfg, args):
    exp = cfg.experiment
    return ExperimentConfig(exp.envlaw, tuple(args.d or exp.d_values), tuple(args.alpha or exp.alpha_values),
                            tuple(args.n or exp.n_grid), args.replicates or exp.replicates,
                            exp.environments, exp.p, args.seed, exp.split, exp.exact, exp.vartheta,
                            exp.params)


def _rate_table(rows):
    return [(r.d, r.alpha, r.n, r.env_index, r.estimate, r.stderr, r.A_n, r.censored, r.a_lower, r.exact)
            for r in rows]


def _cmd_rate_experiment(cfg, args, out):
    exp = _experiment(cfg, args)
    print(hypothesis_annotation(exp))
    rows = extinction_rate_experiment(exp, args.workers)
    summ = [(s.d, s.alpha, s.n, s.environments, s.censored, s.mean, s.median, s.spread)
            for s in summarize_rates(rows)]
    for s in summ:
        print(f"d={s[0]!r} alpha={s[1]!r} n={s[2]} median A_n={s[6]:.4f} censored={s[4]}/{s[3]}")
    return [write_csv(out / "rate_experiment.csv", CSV_COLUMNS["rate-experiment"], _rate_table(rows)),
            write_csv(out / "rate_summary.csv", CSV_COLUMNS["rate-summary"], summ)]


def _cmd_lp_experiment(cfg, args, out):
    exp = _experiment(cfg, args)
    print(hypothesis_annotation(exp))
    res = lp_moment_experiment(exp, args.workers, cfg.get("regressor", "n"))
    rows = [(r.n, r.moment, r.stderr, r.used, r.censored, r.zero_fraction) for r in res.rows]
    print(f"slope={res.slope!r} t={res.t!r}")
    return [write_csv(out / "lp_experiment.csv", CSV_COLUMNS["lp-experiment"], rows),
            write_csv(out / "lp_regression.csv", CSV_COLUMNS["lp-regression"],
                      [(res.regressor, res.slope, res.slope_stderr, res.t)]),
            write_csv(out / "lp_rates.csv", CSV_COLUMNS["rate-experiment"], _rate_table(res.rate_rows))]


def _cmd_approx(cfg, args, out):
    vals, probs = cfg.get("steps", ([Fraction(-1), Fraction(1)], [0.5, 0.5]))
    l = int(cfg.get("l", 10_000))
    m_grid = cfg.get("m", (50.0, 100.0, 200.0))
    beta = cfg.get("beta", 4.0)
    mode = cfg.get("mode", "mc")
    reps = args.replicates or cfg.experiment.replicates
    est = empirical_max_tail(vals, probs, l, m_grid, reps, args.seed, mode, args.workers)
    tails = [e.value for e in est]
    C = fit_tail_constant(l, m_grid, tails, beta)
    p = [float(q) for q in probs]
    mean = math.fsum(float(v) * q for v, q in zip(vals, p))
    var = math.fsum((float(v) - mean) ** 2 * q for v, q in zip(vals, p))
    iota = cfg.get("iota", 3.0)
    rows = []
    for m, e in zip(m_grid, est):
        sta = sta_couple_check(StaQuery(m, l, beta, iota, var))
        print(f"l={l} m={m!r} sta={sta.is_sta} criterion={sta.criterion_value:.4g}")
        rows.append((l, m, beta, e.value, e.stderr, maximal_tail_bound(l, m, beta, C)))
    return [write_csv(out / "approx_check.csv", CSV_COLUMNS["approx-check"], rows)]


COMMANDS = {
    "check-env": _cmd_check_env,
    "critical": _cmd_critical,
    "mto-check": _cmd_mto,
    "survival": _cmd_survival,
    "corridor": _cmd_corridor,
    "rate": _cmd_rate,
    "rate-experiment": _cmd_rate_experiment,
    "lp-experiment": _cmd_lp_experiment,
    "approx-check": _cmd_approx,
}

_HELP = {
    "check-env": "evaluate every hypothesis on the configured environment",
    "critical": "solve for the critical tilt and print the dispersion parameters",
    "mto-check": "compare the two exhaustive many-to-one oracles",
    "survival": "quenched survival probabilities under the barrier",
    "corridor": "corridor probabilities of the associated walk",
    "rate": "small-deviation rate table",
    "rate-experiment": "extinction-rate experiment over environments",
    "lp-experiment": "cross-environment moments of the extinction rate",
    "approx-check": "maximal-inequality tail against the fitted bound",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment config file")
    common.add_argument("--seed", type=int, default=None, help="root seed (overrides [seeds] root)")
    common.add_argument("--workers", type=int, default=1, help="worker threads; never changes output")
    common.add_argument("--out-dir", default=".", help="directory for CSV and manifest files")
    common.add_argument("--dry-run", action="store_true", help="validate the config and exit")
    parser = argparse.ArgumentParser(prog="brwre", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"brwre {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cols = CSV_COLUMNS[name]
        epilog = "CSV columns: " + ",".join(cols)
        if name == "rate-experiment":
            epilog += "; rate_summary.csv: " + ",".join(CSV_COLUMNS["rate-summary"])
        if name == "lp-experiment":
            epilog += ("; lp_regression.csv: " + ",".join(CSV_COLUMNS["lp-regression"])
                       + "; lp_rates.csv: " + ",".join(CSV_COLUMNS["rate-experiment"]))
        p = sub.add_parser(name, parents=[common], help=_HELP[name], epilog=epilog)
        if name in ("survival", "corridor", "rate", "rate-experiment", "lp-experiment", "mto-check"):
            p.add_argument("--n", type=int, nargs="+", help="generation counts")
        if name in ("survival", "corridor", "rate", "rate-experiment", "lp-experiment", "approx-check"):
            p.add_argument("--replicates", type=int, help="Monte Carlo replicates")
        if name in ("survival", "rate-experiment", "lp-experiment"):
            p.add_argument("--d", type=float, nargs="+", help="barrier slack coefficients")
            p.add_argument("--alpha", type=float, nargs="+", help="barrier exponents")
        if name in ("survival", "corridor"):
            p.add_argument("--env", help="environment replay file")
        if name == "survival":
            p.add_argument("--population-cap", type=int, help="population cap for --no-split runs")
            p.add_argument("--split", type=int, help="split threshold of the lazy exploration")
            p.add_argument("--no-split", action="store_true", help="breadth-first runs under the cap")
    return parser


def run(command: str, cfg: ParsedConfig, args) -> int:
    out = Path(args.out_dir)
    if args.dry_run:
        print(f"{command}: config ok ({cfg.digest[:12]})")
        return 0
    out.mkdir(parents=True, exist_ok=True)
    paths = COMMANDS[command](cfg, args, out)
    digests = {p.name: config_digest(p.read_bytes()) for p in paths}
    man = RunManifest(cfg.digest, args.seed, __version__,
                      datetime.now(timezone.utc).isoformat(timespec="seconds"),
                      command, tuple(p.name for p in paths), digests)
    man.write(out / f"{command}.manifest.json")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.seed is None:
            args.seed = cfg.root_seed
        return run(args.command, cfg, args)
    except BrwreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    except ArithmeticError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return NumericError.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
