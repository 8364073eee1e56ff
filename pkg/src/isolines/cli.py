"""``isolines`` command-line front end.

Every run writes ``manifest.json`` next to its outputs holding the resolved
configuration, library versions, backend and seed; passing that manifest
back through ``--config`` reproduces the run. Errors print a single line
``error[<module>.<reason>]: <message>`` to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .diagnose import block_bootstrap, diagnostic_report
from .errors import ConfigError, IsolineError
from .ingest import BivariateSample, load_series, subset_months, write_sample
from .marginal import MarginalTransform, fit_marginals, to_frechet_sample
from .pipeline import IsolineConfig, fit_isolines, single_level_estimator
from .project import isoline_to_frechet
from .surface import DEFAULT_RESOLUTION, read_isolines_csv, write_isolines_csv
from .synth import FAMILIES, MARGINS, SynthModel, generate
from .taildep import chi_curve, hill_eta

log = logging.getLogger("isolines")

EXIT_MODULE_ERROR = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off", ""}


# --------------------------------------------------------------------------
# argument types (also applied to string values coming from a config file)
# --------------------------------------------------------------------------


def _float_list(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    try:
        vals = tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _bandwidth(text):
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    if str(text).strip().lower() == "auto":
        return "auto"
    vals = _float_list(text)
    if len(vals) != 2 or min(vals) <= 0:
        raise argparse.ArgumentTypeError("bandwidth must be 'auto' or two positive numbers 'h1,h2'")
    return vals


def _prob(text) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"expected a probability in (0, 1), got {text}")
    return v


def _pos_int(text) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    s = str(value).strip().lower()
    if s in _TRUE:
        return True
    if s in _FALSE:
        return False
    raise ConfigError("bad_value", f"expected a boolean, got {value!r}")


class _Parser(argparse.ArgumentParser):
    """Usage errors become a single-line ``cli.usage`` error."""

    def error(self, message):
        raise ConfigError("usage", f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run")
    g.add_argument("--config", help="key = value file, or a manifest.json from an earlier run")
    g.add_argument("--out-dir", default=".", help="directory for outputs and manifest.json")
    g.add_argument("--svg", action="store_true", help="also write SVG quick-look plots")
    g.add_argument("-v", "--verbose", action="store_true")


def _data(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("data")
    g.add_argument("--input", "-i", help="CSV with a header row")
    g.add_argument("--col1", default="x1", help="first variable (name or 0-based index)")
    g.add_argument("--col2", default="x2", help="second variable (name or 0-based index)")
    g.add_argument("--time", default="auto", help="time column, 'auto' or 'none'")
    g.add_argument("--negate", default="none", choices=["none", "1", "2", "both"],
                   help="negate coordinates so the extremes of interest are large")
    g.add_argument("--months", default="all", help="'all' or comma-separated months, e.g. 9,10,11,12,1,2,3")


def _marginal(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("margins")
    g.add_argument("--q-thold", type=_prob, default=0.97, help="GPD threshold quantile")
    g.add_argument("--q-thold-plus", type=_prob, default=0.98, help="end of the ECDF/GPD blend")
    g.add_argument("--marginals", help="reuse margins from a marginals.json instead of fitting")


def _surface(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("surface")
    g.add_argument("--bandwidth", type=_bandwidth, default="auto", help="'auto' or 'h1,h2'")
    g.add_argument("--grid", type=_pos_int, default=DEFAULT_RESOLUTION, help="grid nodes per axis")
    g.add_argument("--pbase", type=_prob, default=0.01, help="base isoline level")


def _projection(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("projection")
    g.add_argument("--mode", default="ad", choices=["ad", "ai", "auto"])
    g.add_argument("--beta", type=float, default=200.0, help="smoothing parameter (ai mode)")
    g.add_argument("--eta-quantile", type=_prob, default=0.98, help="Hill threshold quantile")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="isolines", description="Bivariate isolines of exceedance probability.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit-marginals", help="fit the blended ECDF/GPD margins")
    _data(p)
    _marginal(p)
    p.add_argument("--frechet", action="store_true", help="also write the Fréchet-scale sample")
    _common(p)

    p = sub.add_parser("isolines", help="base isoline and projections to smaller levels")
    _data(p)
    _marginal(p)
    _surface(p)
    _projection(p)
    p.add_argument("--p", type=_float_list, default=(0.005, 0.001, 0.0005, 0.0001),
                   help="comma-separated projection levels")
    p.add_argument("--frechet", action="store_true", help="also emit Fréchet-scale isolines")
    p.add_argument("--save-grid", action="store_true", help="write the survival grid as CSV")
    _common(p)

    p = sub.add_parser("chi", help="rank-based chi(u) curve")
    _data(p)
    _common(p)

    p = sub.add_parser("hill", help="Hill estimate of eta on the Fréchet scale")
    _data(p)
    _marginal(p)
    p.add_argument("--eta-quantile", type=_prob, default=0.98, help="Hill threshold quantile")
    _common(p)

    p = sub.add_parser("diagnose", help="empirical exceedances along an isoline vs binomial band")
    _data(p)
    _marginal(p)
    _surface(p)
    _projection(p)
    p.add_argument("--level", type=_prob, help="isoline level to check (default: --pbase)")
    p.add_argument("--isolines", help="isolines.csv to read instead of re-estimating")
    p.add_argument("--eval-input", help="evaluate on this CSV (same columns) instead of --input")
    p.add_argument("--probes", type=_pos_int, default=20)
    p.add_argument("--coverage", type=_prob, default=0.95)
    _common(p)

    p = sub.add_parser("bootstrap", help="block-bootstrap isolines at one level")
    _data(p)
    _marginal(p)
    _surface(p)
    _projection(p)
    p.add_argument("--level", type=_prob, help="isoline level (default: --pbase)")
    p.add_argument("--block", type=_pos_int, default=3, help="block length b")
    p.add_argument("--reps", type=_pos_int, default=200, help="replicates R")
    p.add_argument("--seed", type=int, help="master seed (recorded in the manifest)")
    p.add_argument("--threads", type=_pos_int, default=1)
    _common(p)

    p = sub.add_parser("simulate", help="synthetic sample with known tail dependence")
    p.add_argument("--family", default="indep",
                   help=f"{', '.join(FAMILIES)} (or logistic, gaussian, indep)")
    p.add_argument("--param", type=float, default=0.0, help="logistic alpha or Gaussian rho")
    p.add_argument("--margins", default="frechet_unit", choices=list(MARGINS))
    p.add_argument("--n", type=_pos_int, default=1000)
    p.add_argument("--seed", type=int, help="seed (recorded in the manifest)")
    p.add_argument("--out", help="output CSV (default: <out-dir>/sample.csv)")
    _common(p)
    return parser


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _dests(p: argparse.ArgumentParser) -> dict[str, argparse.Action]:
    return {a.dest: a for a in p._actions if a.dest not in ("help", "version")}


# --------------------------------------------------------------------------
# config files and manifests
# --------------------------------------------------------------------------


def read_config(path: str | Path) -> dict:
    """Parse a ``key = value`` file (``#`` comments) or a run manifest."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError("missing_config", f"config file not found: {path}")
    text = path.read_text()
    if path.suffix == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("bad_config", f"{path}: {exc}") from None
        cfg = doc.get("config", doc)
        return {k.replace("-", "_"): v for k, v in cfg.items() if v is not None}
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("bad_config", f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("bad_config", f"{path}:{lineno}: empty key")
        cfg[key.replace("-", "_")] = value
    return cfg


def _apply_config(parser, command: str, cfg: dict) -> None:
    sp = _subparser(parser, command)
    here = _dests(sp)
    known = set()
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for other in action.choices.values():
                known.update(_dests(other))
    defaults = {}
    for key, value in cfg.items():
        if key in ("command", "config"):
            continue
        if key not in known:
            raise ConfigError("unknown_key", f"unknown config key {key!r}")
        if key not in here:
            log.info("config key %r does not apply to %s; ignored", key, command)
            continue
        action = here[key]
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            value = _bool(value)
        elif isinstance(value, (int, float)) and not isinstance(value, bool):
            value = str(value) if action.type is not None else value
        defaults[key] = value
    sp.set_defaults(**defaults)


def parse_args(argv=None) -> argparse.Namespace:
    """Parse flags; values from ``--config`` fill in anything not given as a flag."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        _apply_config(parser, args.command, read_config(args.config))
        args = parser.parse_args(argv)
    return args


def _jsonable(v):
    if isinstance(v, tuple):
        return list(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def _versions() -> dict:
    import scipy

    out = {"isolines": __version__, "python": platform.python_version(),
           "numpy": np.__version__, "scipy": scipy.__version__}
    try:
        import numba

        out["numba"] = numba.__version__
    except ImportError:
        pass
    return out


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(args: argparse.Namespace, out_dir: Path, outputs: list[str], extra: dict | None = None) -> Path:
    config = {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in ("config", "verbose")}
    inputs = {}
    for key in ("input", "eval_input", "marginals", "isolines"):
        path = config.get(key)
        if path and Path(path).is_file():
            inputs[key] = {"path": str(path), "sha256": _sha256(path)}
    doc = {
        "command": args.command,
        "config": config,
        "seed": config.get("seed"),
        "backend": BACKEND,
        "versions": _versions(),
        "inputs": inputs,
        "outputs": sorted(outputs),
    }
    if extra:
        doc.update(extra)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")
    return path


# --------------------------------------------------------------------------
# helpers shared by subcommands
# --------------------------------------------------------------------------


def _load(args, path=None) -> tuple[BivariateSample, dict]:
    path = path or args.input
    if not path:
        raise ConfigError("missing_input", "no input file given (--input)")
    sample, report = load_series(path, _col(args.col1), _col(args.col2), args.time, args.negate)
    sample = subset_months(sample, args.months)
    info = report.as_dict()
    info["rows_used"] = sample.n
    return sample, info


def _col(spec: str):
    return int(spec) if str(spec).isdigit() else spec


def _marginals(args, sample):
    if getattr(args, "marginals", None):
        path = Path(args.marginals)
        if not path.is_file():
            raise ConfigError("missing_marginals", f"marginals file not found: {path}")
        doc = json.loads(path.read_text())
        return tuple(MarginalTransform.from_dict(d) for d in doc["margins"])
    return fit_marginals(sample, args.q_thold, args.q_thold_plus)


def _iso_config(args) -> IsolineConfig:
    bw = None if args.bandwidth == "auto" else tuple(args.bandwidth)
    return IsolineConfig(
        q_thold=args.q_thold, q_thold_plus=args.q_thold_plus, bandwidths=bw,
        resolution=args.grid, p_base=args.pbase, mode=args.mode, beta=args.beta,
        eta_quantile=args.eta_quantile,
    )


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fresh_seed(args) -> None:
    if getattr(args, "seed", None) is None:
        args.seed = int(np.random.SeedSequence().entropy % (1 << 63))
        log.info("no seed given; using %d", args.seed)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_fit_marginals(args) -> dict:
    out = _out_dir(args)
    sample, info = _load(args)
    margins = fit_marginals(sample, args.q_thold, args.q_thold_plus)
    (out / "marginals.json").write_text(json.dumps({"margins": [m.to_dict() for m in margins]}) + "\n")
    outputs = ["marginals.json"]
    if args.frechet:
        write_sample(to_frechet_sample(sample, margins), out / "frechet.csv")
        outputs.append("frechet.csv")
    for m in margins:
        g = m.gpd
        print(f"{m.label}: threshold={g.threshold:.6g} sigma={g.sigma:.6g} xi={g.xi:.4f} "
              f"exceedances={g.n_exceed} method={g.method}")
    return {"outputs": outputs, "extra": {"ingest": info}}


def cmd_isolines(args) -> dict:
    out = _out_dir(args)
    sample, info = _load(args)
    cfg = _iso_config(args)
    levels = [p for p in args.p if p != args.pbase]
    fit = fit_isolines(sample, levels, cfg, marginals=_marginals(args, sample))
    lines = [fit.base, *fit.isolines]
    if args.frechet:
        lines += [isoline_to_frechet(iso, fit.marginals) for iso in lines]
    write_isolines_csv(lines, out / "isolines.csv")
    outputs = ["isolines.csv"]
    if not args.marginals:
        (out / "marginals.json").write_text(
            json.dumps({"margins": [m.to_dict() for m in fit.marginals]}) + "\n")
        outputs.append("marginals.json")
    if args.save_grid:
        fit.grid.to_csv(out / "grid.csv")
        outputs.append("grid.csv")
    extra = {"ingest": info, "mode_used": fit.mode,
             "bandwidths_used": [float(h) for h in fit.grid.bandwidths]}
    if fit.eta is not None:
        fit.eta.to_csv(out / "hill.csv")
        outputs.append("hill.csv")
        extra["eta_hat"] = fit.eta.eta_hat
        print(f"eta_hat = {fit.eta.eta_hat:.4f} (threshold quantile {fit.eta.threshold_quantile})")
    for iso in [fit.base, *fit.isolines]:
        dropped = iso.meta.get("dropped_beyond_endpoint")
        note = f" ({dropped} vertices beyond the fitted endpoint dropped)" if dropped else ""
        print(f"level {iso.level:g}: {len(iso)} vertices, {iso.provenance}{note}")
    if args.svg:
        from .plotting import plot_isolines

        plot_isolines(sample.x1, sample.x2, [fit.base, *fit.isolines], out / "isolines.svg",
                      labels=sample.labels, title=f"{fit.mode.upper()} projection")
        outputs.append("isolines.svg")
    return {"outputs": outputs, "extra": extra}


def cmd_chi(args) -> dict:
    out = _out_dir(args)
    sample, info = _load(args)
    curve = chi_curve(sample.x1, sample.x2)
    curve.to_csv(out / "chi.csv")
    outputs = ["chi.csv"]
    print(f"chi(0.95) = {curve.at(0.95):.4f}, chi(0.98) = {curve.at(0.98):.4f}")
    if args.svg:
        from .plotting import plot_curve

        plot_curve(curve.u_grid, curve.chi_hat, out / "chi.svg", "u", "chi(u)", ylim=(0, 1))
        outputs.append("chi.svg")
    return {"outputs": outputs, "extra": {"ingest": info}}


def cmd_hill(args) -> dict:
    out = _out_dir(args)
    sample, info = _load(args)
    zs = to_frechet_sample(sample, _marginals(args, sample))
    est = hill_eta(zs, args.eta_quantile)
    est.to_csv(out / "hill.csv")
    outputs = ["hill.csv"]
    print(f"eta_hat = {est.eta_hat:.4f} (k = {est.k_exceed}, threshold = {est.threshold:.6g})")
    if args.svg:
        from .plotting import plot_curve

        plot_curve(est.hill_k, est.hill_eta, out / "hill.svg", "number of exceedances k", "eta")
        outputs.append("hill.svg")
    return {"outputs": outputs, "extra": {"ingest": info, "eta_hat": est.eta_hat, "k_exceed": est.k_exceed}}


def cmd_diagnose(args) -> dict:
    out = _out_dir(args)
    sample, info = _load(args)
    level = args.level if args.level is not None else args.pbase
    if args.isolines:
        cands = [iso for iso in read_isolines_csv(args.isolines)
                 if iso.scale == "original" and np.isclose(iso.level, level, rtol=1e-9, atol=0)]
        if not cands:
            raise ConfigError("no_isoline", f"{args.isolines} has no original-scale isoline at level {level:g}")
        iso = cands[0]
    else:
        fit = fit_isolines(sample, [level] if level < args.pbase else [], _iso_config(args),
                           marginals=_marginals(args, sample))
        iso = fit.isolines[0] if level < args.pbase else fit.base
    evals = sample
    if args.eval_input:
        evals, _ = _load(args, args.eval_input)
    rep = diagnostic_report(evals.x1, evals.x2, iso, args.probes, args.coverage)
    rep.to_csv(out / "diagnostic.csv")
    outputs = ["diagnostic.csv"]
    lo, hi = rep.interval
    print(f"level {level:g}: {rep.n_inside}/{len(rep.counts)} probes inside [{lo}, {hi}] of n={rep.n}")
    print(f"note: {rep.caveat}")
    if args.svg:
        from .plotting import plot_diagnostic

        plot_diagnostic(rep, out / "diagnostic.svg")
        outputs.append("diagnostic.svg")
    return {"outputs": outputs,
            "extra": {"ingest": info, "n_inside": rep.n_inside, "interval": [lo, hi], "caveat": rep.caveat}}


def cmd_bootstrap(args) -> dict:
    out = _out_dir(args)
    _fresh_seed(args)
    sample, info = _load(args)
    level = args.level if args.level is not None else args.pbase
    est = single_level_estimator(level, _iso_config(args))
    res = block_bootstrap(sample, args.block, args.reps, est, seed=args.seed, level=level,
                          n_jobs=args.threads)
    res.to_csv(out / "bootstrap.csv")
    outputs = ["bootstrap.csv"]
    print(f"{args.reps - res.failures}/{args.reps} replicates succeeded (b = {args.block}, seed = {args.seed})")
    if args.svg:
        from .plotting import plot_bootstrap

        plot_bootstrap(sample.x1, sample.x2, res, out / "bootstrap.svg", labels=sample.labels)
        outputs.append("bootstrap.svg")
    errs = {str(k): v for k, v in sorted(res.errors.items())}
    return {"outputs": outputs, "extra": {"ingest": info, "failures": res.failures, "replicate_errors": errs}}


def cmd_simulate(args) -> dict:
    _fresh_seed(args)
    model = SynthModel(args.family, args.param, args.margins)
    target = Path(args.out) if args.out else Path(args.out_dir) / "sample.csv"
    target.parent.mkdir(parents=True, exist_ok=True)
    args.out_dir = str(target.parent)
    write_sample(generate(model, args.n, args.seed), target)
    print(f"wrote {args.n} rows to {target} (seed = {args.seed})")
    return {"outputs": [target.name],
            "extra": {"model": {"family": model.family, "chi": model.chi, "eta": model.eta}}}


COMMANDS = {
    "fit-marginals": cmd_fit_marginals,
    "isolines": cmd_isolines,
    "chi": cmd_chi,
    "hill": cmd_hill,
    "diagnose": cmd_diagnose,
    "bootstrap": cmd_bootstrap,
    "simulate": cmd_simulate,
}


def _one_line(text: str) -> str:
    return " ".join(str(text).split())


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s", level=logging.WARNING)
    try:
        args = parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.INFO)
        result = COMMANDS[args.command](args)
        write_manifest(args, Path(args.out_dir), result["outputs"], result.get("extra"))
    except IsolineError as exc:
        print(f"error[{exc.code}]: {_one_line(exc)}", file=sys.stderr)
        return EXIT_USAGE if exc.code == "cli.usage" else EXIT_MODULE_ERROR
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error[cli.io]: {_one_line(exc)}", file=sys.stderr)
        return EXIT_MODULE_ERROR
    except Exception as exc:  # noqa: BLE001 - last-resort single-line report
        print(f"error[internal.{type(exc).__name__}]: {_one_line(exc)}", file=sys.stderr)
        return EXIT_INTERNAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
