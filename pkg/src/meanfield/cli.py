"""Command line front end.

Exit codes: 0 success; 1 usage error or malformed config; 2 classification
failure, invalid n or unsupported model; 3 failed rate check; 4 violated MLE
hypothesis.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys

import click
import numpy as np

from . import catalog, gibbs, landscape as lsc, limitlaw, metrics, mle
from .exceptions import ClassificationError, HypothesisViolation, UnbracketableError

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

SCHEMA_VERSION = "1.0"
DEFAULT_SEED = 12345
SLOPE_TOL = 0.15


class ConfigError(click.ClickException):
    exit_code = 1


class RunFailure(click.ClickException):
    """Error carrying a specific exit code."""

    def __init__(self, message, code):
        super().__init__(message)
        self.exit_code = code


# -- configuration -----------------------------------------------------------
def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def load_config(path) -> dict:
    """Read a TOML file into a flat ``{"section.key": value}`` mapping."""
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return _flatten(tomllib.load(fh))
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}")
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"malformed config {path}: {err}")


class Settings:
    """Flag values layered over config-file values."""

    def __init__(self, cfg: dict, section: str, flags: dict):
        self.cfg = cfg
        self.section = section
        self.flags = flags

    def get(self, key, default=None, section=None):
        flag = self.flags.get(key.replace(".", "_"))
        if flag is not None:
            return flag
        sec = section or self.section
        for k in (f"{sec}.{key}", key):
            if k in self.cfg:
                return self.cfg[k]
        return default


def _parse_list(value, cast=float, name="list"):
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [v for v in str(value).replace(";", ",").split(",") if v.strip()]
    try:
        return [cast(float(v)) if cast is int else cast(v) for v in items]
    except (TypeError, ValueError):
        raise ConfigError(f"cannot parse {name}: {value!r}")


def _parse_terms(value):
    """Inline terms ``"c:p,c:p"`` or a list of ``[c, p]`` pairs."""
    if value is None:
        return None
    try:
        if isinstance(value, (list, tuple)):
            return [(float(c), int(p)) for c, p in value]
        out = []
        for item in str(value).split(","):
            c, p = item.split(":")
            out.append((float(c), int(p)))
        return out
    except (TypeError, ValueError):
        raise ConfigError(f"cannot parse terms {value!r}; use 'coef:power,coef:power'")


def _model_from(s: Settings):
    terms = _parse_terms(s.get("terms", section="model"))
    name = s.get("model", section="model") or s.cfg.get("model.name")
    if terms is not None:
        return catalog.inline_model(terms)
    if name is None:
        raise ConfigError("no model given; use --model or --terms")
    if name not in catalog.MODEL_NAMES:
        raise RunFailure(f"unsupported model {name!r}; choose from {', '.join(catalog.MODEL_NAMES)}", 2)
    params = {}
    for key in catalog.model_parameters(name):
        v = s.get(key, section="model")
        if v is not None:
            params[key] = v
    try:
        return catalog.get_model(name, **params)
    except (ValueError, TypeError) as err:
        raise ConfigError(str(err))


# -- output ------------------------------------------------------------------
def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return v


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _json(obj) -> str:
    def default(o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(type(o))

    return json.dumps(obj, indent=2, sort_keys=False, default=default) + "\n"


def _emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _report(command, model, **body):
    rep = {"schema_version": SCHEMA_VERSION, "command": command}
    if model is not None:
        rep["model"] = {"name": model.name, "parameters": model.parameters}
    rep.update(body)
    return rep


def _landscape(model):
    try:
        return model.landscape()
    except ClassificationError as err:
        raise RunFailure(f"classification failed: {err}", 2)


# -- commands ----------------------------------------------------------------
_model_opts = [
    click.option("--model", "model", default=None, help="Named model: " + ", ".join(catalog.MODEL_NAMES)),
    click.option("--terms", default=None, help="Inline model 'coef:power,...' in (2a-1)."),
    click.option("--p", "p", type=int, default=None),
    click.option("--beta", type=float, default=None),
    click.option("--h", "h", type=float, default=None),
    click.option("--d", "d", type=int, default=None),
    click.option("--t-star", "t_star", type=float, default=None),
]
_io_opts = [
    click.option("--config", "config", type=click.Path(), default=None, help="TOML config file."),
    click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None),
    click.option("--out", default=None, help="Output path (stdout when omitted)."),
]


def _with(opts):
    def deco(f):
        for o in reversed(opts):
            f = o(f)
        return f
    return deco


def _settings(section, kw):
    cfg = load_config(kw.pop("config", None))
    return Settings(cfg, section, kw)


def _io(s: Settings, default_fmt="json"):
    fmt = s.get("fmt") or s.cfg.get("output.format") or default_fmt
    if fmt not in ("json", "csv"):
        raise ConfigError(f"unknown format {fmt!r}")
    out = s.get("out") or s.cfg.get("output.out")
    return fmt, out


@click.group()
def cli():
    """Mean-field spin models: landscapes, exact laws, limit checks and MLE experiments."""


@cli.command()
@_with(_model_opts + _io_opts)
def analyze(**kw):
    """Maximizers of A, their orders, constants and mixture weights."""
    s = _settings("analyze", kw)
    fmt, out = _io(s)
    model = _model_from(s)
    L = _landscape(model)
    w = limitlaw.theorem1_weights(L).as_array(len(L))
    if fmt == "csv":
        rows = [[j, mx.a, mx.m, mx.order, mx.c, mx.nu, mx.value, float(w[j]), int(j in L.J_star)]
                for j, mx in enumerate(L.maximizers)]
        _emit(_csv(["j", "a", "m", "order", "c", "nu", "value", "p", "in_J_star"], rows), out)
    else:
        maxs = []
        for j, mx in enumerate(L.maximizers):
            d = mx.to_dict()
            d["p"] = float(w[j])
            maxs.append(d)
        rep = _report("analyze", model, maximizers=maxs, m_star=L.m_star,
                      delta_star=L.delta_star, J_star=list(L.J_star), J1=list(L.J_star),
                      J2=list(L.J_star), warnings=list(L.warnings))
        _emit(_json(rep), out)
    return 0


def _check_n(n):
    try:
        n = int(n)
    except (TypeError, ValueError):
        raise RunFailure(f"invalid n {n!r}", 2)
    if n < 1 or n > gibbs.MAX_N:
        raise RunFailure(f"invalid n={n}; must be in 1..{gibbs.MAX_N}", 2)
    return n


@cli.command()
@_with(_model_opts + _io_opts)
@click.option("--n", "n", type=int, default=None, help="Number of spins.")
@click.option("--delta", type=float, default=None, help="Window half-width (default delta_star).")
@click.option("--summary-out", default=None, help="Also write the JSON summary here (csv format).")
def dist(**kw):
    """Exact law of the number of up spins."""
    s = _settings("dist", kw)
    fmt, out = _io(s)
    model = _model_from(s)
    n = s.get("n")
    if n is None:
        raise ConfigError("dist needs --n")
    n = _check_n(n)
    G = gibbs.build(model.F, n)
    windows = []
    try:
        L = model.landscape()
    except ClassificationError as err:
        L = None
        windows_note = f"no windows: {err}"
    else:
        windows_note = None
        delta = s.get("delta") or L.delta_star
        for j, mx in enumerate(L.maximizers):
            try:
                w = gibbs.make_window(n, mx.a, float(delta), j)
            except ValueError:
                continue
            windows.append({"j": j, "a": mx.a, "delta": float(delta), "k_lo": w.k_lo,
                            "k_hi": w.k_hi, "mass": gibbs.window_mass(G, w)})
    summary = _report("dist", model, n=n, log_Z=G.log_Z, mean=G.moment(1),
                      variance=G.variance(), windows=windows)
    if windows_note:
        summary["note"] = windows_note
    if fmt == "csv":
        _emit(G.to_csv(), out)
        if s.get("summary_out"):
            _emit(_json(summary), s.get("summary_out"))
    else:
        _emit(_json(summary), out)
    return 0


@cli.command("limit-check")
@_with(_model_opts + _io_opts)
@click.option("--n-list", "n_list", default=None, help="Comma separated sizes, at least three.")
@click.option("--delta", type=float, default=None)
def limit_check(**kw):
    """Wasserstein distance to the tilted limit law and its fitted decay rate."""
    s = _settings("limit-check", kw)
    fmt, out = _io(s)
    model = _model_from(s)
    ns = _parse_list(s.get("n_list"), int, "n-list")
    if not ns or len(ns) < 3:
        raise ConfigError("limit-check needs --n-list with at least three sizes")
    ns = sorted(_check_n(n) for n in ns)
    L = _landscape(model)
    delta = float(s.get("delta") or L.delta_star)
    laws = [limitlaw.TiltedLaw(mx.c, mx.m, 0.0) for mx in L.maximizers]
    dists = {j: [] for j in range(len(L))}
    for n in ns:
        G = gibbs.build(model.F, n)
        for j, mx in enumerate(L.maximizers):
            w = gibbs.make_window(n, mx.a, delta, j)
            P = gibbs.scaled_conditional_law(G, w, mx.m)
            dists[j].append(metrics.d_W(P, laws[j]))
    per, ok = [], True
    for j, mx in enumerate(L.maximizers):
        slope, r2 = metrics.rate_fit(list(zip(ns, dists[j])))
        expected = -1.0 / (2 * mx.m)
        passed = abs(slope - expected) <= SLOPE_TOL
        ok &= passed
        per.append({"j": j, "a": mx.a, "m": mx.m, "n": ns, "d_W": dists[j], "slope": slope,
                    "r2": r2, "expected_slope": expected, "pass": passed})
    if fmt == "csv":
        rows = [[p["j"], p["a"], p["m"], n, d, p["slope"], p["expected_slope"], int(p["pass"])]
                for p in per for n, d in zip(p["n"], p["d_W"])]
        _emit(_csv(["j", "a", "m", "n", "d_W", "slope", "expected_slope", "pass"], rows), out)
    else:
        _emit(_json(_report("limit-check", model, delta=delta, tolerance=SLOPE_TOL,
                            maximizers=per, passed=ok)), out)
    if not ok:
        click.echo("slope check failed for at least one maximizer", err=True)
        return 3
    return 0


_ESTIMABLE = {
    "p-spin": lambda prm: {"beta": prm["p"], "h": 1},
    "cubic": lambda prm: {"beta": 3, "h": 2},
    "four-spin": lambda prm: {"beta": 4, "h": 2},
}


def _split_problem(model, target, n):
    """Split a polynomial model into ``f`` (estimated direction) and ``g``."""
    if model.name == "inline":
        terms = [tuple(t) for t in model.parameters["terms"]]
        try:
            power = int(target)
        except (TypeError, ValueError):
            raise ConfigError("for inline models --estimate is the power whose coefficient is estimated")
        match = [c for c, p in terms if p == power]
        truth = match[0] if match else 0.0
    elif model.name in _ESTIMABLE:
        powers = _ESTIMABLE[model.name](model.parameters)
        if target not in powers:
            raise ConfigError(f"--estimate must be one of {sorted(powers)} for {model.name}")
        if len(set(powers.values())) < len(powers):
            raise ConfigError("beta and h multiply the same power; the split is ambiguous")
        power = powers[target]
        truth = model.parameters[target]
        terms = [(model.parameters[k], p) for k, p in powers.items()]
    else:
        raise RunFailure(f"MLE experiments are not supported for model {model.name!r}", 2)
    rest = [(c, p) for c, p in catalog._spin_terms(terms) if p != power]
    f = catalog.SpinPolynomial([(1.0, power)])
    g = catalog.SpinPolynomial(rest)
    return mle.MleProblem(f, g, n, true_beta=float(truth))


@cli.command("mle")
@_with(_model_opts + _io_opts)
@click.option("--estimate", "estimate", default=None, help="Parameter to estimate (e.g. h or beta).")
@click.option("--n", "n", type=int, default=None)
@click.option("--reps", type=int, default=None)
@click.option("--seed", type=int, default=None, help=f"Default {DEFAULT_SEED}.")
def mle_cmd(**kw):
    """Monte Carlo law of the rescaled MLE error against its limit."""
    s = _settings("mle", kw)
    fmt, out = _io(s)
    model = _model_from(s)
    reps = s.get("reps")
    if reps is None or int(reps) < 1:
        raise ConfigError("mle needs --reps >= 1")
    seed = int(s.get("seed", DEFAULT_SEED))
    if seed < 0:
        raise ConfigError("seed must be non-negative")
    n = s.get("n")
    if n is None:
        raise ConfigError("mle needs --n")
    n = _check_n(n)
    target = s.get("estimate", "h")
    P = _split_problem(model, target, n)
    try:
        L = lsc.find_maximizers(lsc.build_A(P.F(P.true_beta)))
    except ClassificationError as err:
        raise RunFailure(f"classification failed: {err}", 2)
    try:
        res = mle.mc_experiment(P, int(reps), seed, landscape=L)
    except HypothesisViolation as err:
        raise RunFailure(f"hypothesis violated: {err}", 4)
    if fmt == "csv":
        rows = []
        scale = res.scale
        for i, (k, b) in enumerate(zip(res.ks, res.estimates)):
            err_v = (b - P.true_beta) * scale if math.isfinite(b) else math.nan
            rows.append([i, int(k), float(b), float(err_v)])
        _emit(_csv(["rep", "k", "beta_hat", "rescaled_error"], rows), out)
    else:
        summ = res.summary()
        runtime = summ.pop("runtime")
        rep = _report("mle", model, estimate=target, true_value=P.true_beta, n=n, seed=seed,
                      limit=res.limit.to_dict(), **summ, runtime_seconds=runtime)
        _emit(_json(rep), out)
    return 0


@cli.command()
@_with(_model_opts + _io_opts)
@click.option("--betas", default=None, help="Comma separated beta values.")
@click.option("--beta-range", default=None, help="start:stop:count (inclusive).")
@click.option("--hs", default=None, help="Comma separated h values; omit for the boundary curve.")
def phase(**kw):
    """Region labels and phase boundaries over a parameter grid."""
    s = _settings("phase", kw)
    fmt, out = _io(s, default_fmt="csv")
    name = s.get("model", section="model") or s.cfg.get("model.name")
    if s.get("terms", section="model") is not None:
        raise RunFailure("phase diagrams need a named model", 2)
    if name not in ("p-spin", "four-spin", "cubic", "annealed"):
        raise RunFailure(f"phase diagrams are not available for model {name!r}", 2)
    betas = _parse_list(s.get("betas"), float, "betas")
    rng = s.get("beta_range")
    if betas is None and rng is not None:
        try:
            a, b, c = str(rng).split(":")
            betas = list(np.linspace(float(a), float(b), int(c)))
        except ValueError:
            raise ConfigError(f"cannot parse beta range {rng!r}")
    if not betas:
        raise ConfigError("phase needs --betas or --beta-range")
    if any(not b > 0 for b in betas):
        raise ConfigError("beta values must be positive")
    hs = _parse_list(s.get("hs"), float, "hs")
    d = int(s.get("d", 3, section="model"))
    p = int(s.get("p", 2, section="model"))
    try:
        header, rows = catalog.phase_boundary_rows(name, betas, hs, d=d, p=p)
    except ClassificationError as err:
        raise RunFailure(f"classification failed: {err}", 2)
    if fmt == "csv":
        _emit(_csv(header, rows), out)
    else:
        recs = [dict(zip(header, r)) for r in rows]
        _emit(_json(_report("phase", None, model_name=name, rows=recs)), out)
    return 0


def main(argv=None) -> int:
    """Entry point honouring the documented exit codes."""
    try:
        rv = cli.main(args=argv, prog_name="meanfield", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.UsageError as err:
        err.show()
        return 1
    except click.ClickException as err:
        err.show()
        return err.exit_code
    except UnbracketableError as err:
        click.echo(f"Error: {err}", err=True)
        return 2
    code = rv if isinstance(rv, int) else 0
    return code


def _console():  # pragma: no cover
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    _console()
