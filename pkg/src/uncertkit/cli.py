"""Command line front end: fit, dataset, transform, plot and pipeline.

Exit codes: 0 success, 1 usage error, 2 input or parse error, 3 numeric
failure.  Diagnostics go to stderr; stdout carries a one-line summary.
Outputs are only written once every stage of a command has succeeded.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .datasets import BlobSpec, generate_blobs, load_csv_grouped
from .distributions import MultivariateNormal
from .exceptions import DomainError, InputError, NumericFailure
from .io import dump_distributions, load_distributions, load_document, parse_distributions, write_text_atomic
from .numerics import SEED_MODULUS
from .transforms import UamdsParams, uamds_fit, uamds_stress, uapca
from .viz import DEFAULT_QUANTILES, PlotStyle, render_contours, render_matrix, render_scatter, render_univariate

logger = logging.getLogger("uncertkit")

SEED_ENV = "UNCERTKIT_SEED"
PLOT_KINDS = ("scatter", "contour", "isoband", "box", "violin", "strip", "swarm", "matrix")
EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _seed_arg(text: str) -> int:
    try:
        seed = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= seed < SEED_MODULUS:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def _quantiles_arg(text: str) -> tuple[float, ...]:
    try:
        levels = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid quantile list {text!r}") from None
    if not levels or any(not 0 < q < 1 for q in levels) or any(b <= a for a, b in zip(levels, levels[1:])):
        raise argparse.ArgumentTypeError("quantiles must be strictly ascending values in (0, 1)")
    return levels


def _bandwidth_arg(text: str):
    if text.lower() in ("scott", "silverman"):
        return text.lower()
    return _positive_float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uncertkit", description="Model, reduce and plot uncertain data.")
    parser.add_argument("--version", action="version", version=f"uncertkit {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit one distribution per group of a CSV file")
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--group-by", required=True, help="name of the group column")
    p.add_argument("--method", choices=("gaussian", "kde"), default="gaussian")
    p.add_argument("--bandwidth", type=_bandwidth_arg, default="scott",
                   help="KDE bandwidth rule (scott, silverman) or fixed factor")
    p.add_argument("--output", required=True)

    p = sub.add_parser("dataset", help="generate a seeded example dataset")
    p.add_argument("--name", choices=("blobs",), default="blobs")
    p.add_argument("--count", type=_positive_int, default=5)
    p.add_argument("--dim", type=_positive_int, default=4)
    p.add_argument("--mean-box", type=_positive_float, default=10.0)
    p.add_argument("--cov-scale", type=_positive_float, default=1.0)
    p.add_argument("--seed", type=_seed_arg)
    p.add_argument("--output", required=True)

    p = sub.add_parser("transform", help="reduce distributions with UAPCA or UAMDS")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=("uapca", "uamds"), required=True)
    p.add_argument("--dims", type=_positive_int, default=2)
    p.add_argument("--max-iter", type=_positive_int, default=2000)
    p.add_argument("--tol", type=_positive_float, default=1e-8)
    p.add_argument("--init", choices=("uapca", "random"), default="uapca")
    p.add_argument("--seed", type=_seed_arg)
    p.add_argument("--no-self-pairs", action="store_true")
    p.add_argument("--output", required=True)

    p = sub.add_parser("plot", help="render distributions to SVG")
    p.add_argument("--input", required=True)
    p.add_argument("--kind", choices=PLOT_KINDS, required=True)
    p.add_argument("--quantiles", type=_quantiles_arg, default=None)
    p.add_argument("--samples", type=_positive_int, default=100)
    p.add_argument("--seed", type=_seed_arg)
    p.add_argument("--width", type=_positive_float, default=None)
    p.add_argument("--height", type=_positive_float, default=None)
    p.add_argument("--off-diag", choices=("contour", "scatter"), default="contour")
    p.add_argument("--diag", choices=("violin", "density"), default="violin")
    p.add_argument("--output", required=True)

    p = sub.add_parser("pipeline", help="run fit/transform/plot from a JSON config")
    p.add_argument("--config", required=True)
    return parser


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return _seed_arg(env.strip())
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{SEED_ENV}: {exc}") from None
    logger.info("no --seed and no %s: using seed 0", SEED_ENV)
    return 0


def render_plot(dists, kind: str, quantiles=None, samples: int = 100, seed: int = 0,
                width=None, height=None, off_diag="contour", diag="violin") -> str:
    """Render a plot request to SVG text, dispatching on kind and dimension."""
    if not dists:
        raise InputError("no distributions to plot")
    dim = dists[0].dim
    if kind not in PLOT_KINDS:
        raise InputError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
    quantiles = tuple(quantiles) if quantiles else DEFAULT_QUANTILES
    size = {k: v for k, v in (("width", width), ("height", height)) if v is not None}
    if kind in ("scatter", "contour", "isoband") and dim != 2:
        raise InputError(
            f"{kind} plots need 2D distributions but these are {dim}D; "
            "use --kind matrix, or run 'transform --dims 2' first")
    if kind == "scatter":
        return render_scatter(dists, samples, seed, PlotStyle(**size)).to_svg()
    if kind in ("contour", "isoband"):
        return render_contours(dists, quantiles, kind == "isoband", PlotStyle(**size), seed).to_svg()
    if kind == "matrix":
        if dim < 2:
            raise InputError("matrix plots need distributions of dimension >= 2")
        style = PlotStyle(**{"width": 200.0 * dim, "height": 200.0 * dim, **size})
        return render_matrix(dists, off_diag, diag, quantiles, style, seed, samples).to_svg()
    # univariate kinds: one slot per (distribution, dimension), grouped by distribution
    slots, names, colors = [], [], []
    for i, d in enumerate(dists):
        label = d.name if d.name is not None else f"#{i}"
        for k in range(dim):
            slots.append(d.marginal([k]))
            names.append(label if dim == 1 else f"{label}[{k}]")
            colors.append(i)
    style = PlotStyle(**{"width": max(480.0, 40.0 * len(slots)), **size})
    return render_univariate(slots, kind, style, seed, samples, names=names, colors=colors).to_svg()


def transform_dists(dists, method: str, dims: int, seed: int, max_iter=2000, tol=1e-8,
                    self_pairs=True, init="uapca"):
    """Run a reduction; returns ``(result, provenance)``."""
    if not dists:
        raise InputError("no distributions to transform")
    if dims > dists[0].dim:
        raise InputError(f"--dims {dims} exceeds the input dimension {dists[0].dim}")
    if method == "uapca":
        result, _ = uapca(dists, dims)
        stress = uamds_stress(dists, result.maps, self_pairs)
        params = {"dims": dims}
        extra = {"iterations": 0, "converged": True}
    elif method == "uamds":
        params = {"dims": dims, "max_iter": max_iter, "tol": tol, "seed": seed,
                  "include_self_pairs": self_pairs, "init": init}
        result = uamds_fit(dists, dims, UamdsParams(include_self_pairs=self_pairs, max_iter=max_iter,
                                                    tol=tol, seed=seed, init=init))
        stress = result.stress
        extra = {"iterations": result.n_iter, "converged": result.converged}
    else:
        raise InputError(f"unknown transform method {method!r}")
    provenance = {"tool": f"uncertkit {__version__}", "transform": method, "params": params,
                  "final_stress": float(stress), **extra}
    return result, provenance


def _cmd_fit(args, out):
    dists = load_csv_grouped(args.input, args.group_by, args.method, args.bandwidth)
    prov = {"tool": f"uncertkit {__version__}", "fit": args.method}
    if args.method == "kde":
        prov["bandwidth"] = args.bandwidth
    out[args.output] = dump_distributions(dists, prov)
    return f"fitted {len(dists)} distributions -> {args.output}"


def _cmd_dataset(args, out):
    seed = resolve_seed(args.seed)
    dists = generate_blobs(BlobSpec(args.count, args.dim, seed, args.mean_box, args.cov_scale))
    prov = {"tool": f"uncertkit {__version__}", "dataset": args.name, "seed": seed}
    out[args.output] = dump_distributions(dists, prov)
    return f"generated {len(dists)} distributions -> {args.output}"


def _cmd_transform(args, out):
    seed = resolve_seed(args.seed)
    dists = load_distributions(args.input)
    result, prov = transform_dists(dists, args.method, args.dims, seed, args.max_iter, args.tol,
                                   not args.no_self_pairs, args.init)
    out[args.output] = dump_distributions(result.distributions, prov, result.maps)
    return f"{args.method}: {len(dists)} distributions -> {args.output} (stress {prov['final_stress']:.6g})"


def _cmd_plot(args, out):
    seed = resolve_seed(args.seed)
    dists = load_distributions(args.input)
    out[args.output] = render_plot(dists, args.kind, args.quantiles, args.samples, seed,
                                   args.width, args.height, args.off_diag, args.diag)
    return f"{args.kind} plot of {len(dists)} distributions -> {args.output}"


def _cfg(section, key, kind, default=None, required=False):
    if not isinstance(section, dict):
        raise InputError("config sections must be JSON objects")
    if key not in section:
        if required:
            raise InputError(f"config: missing required key {key!r}")
        return default
    value = section[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise InputError(f"config: {key!r} must be an integer")
    if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise InputError(f"config: {key!r} must be a number")
    if kind is str and not isinstance(value, str):
        raise InputError(f"config: {key!r} must be a string")
    if kind is str and not value:
        raise InputError(f"config: {key!r} must not be empty")
    return value


def _cmd_pipeline(args, out):
    config_path = Path(args.config)
    config = load_document(config_path)
    if not isinstance(config, dict):
        raise InputError("config must be a JSON object")
    base = config_path.parent

    def resolve(p):
        return str(base / p)

    seed = _cfg(config, "seed", int, None)
    if seed is not None and not 0 <= seed < SEED_MODULUS:
        raise InputError("config: seed must be a 64-bit unsigned integer")
    seed = resolve_seed(seed)

    source = _cfg(config, "input", dict, required=True)
    fmt = _cfg(source, "format", str, "json")
    path = resolve(_cfg(source, "path", str, required=True))
    fit = _cfg(config, "fit", dict, {}) or {}
    if fmt == "csv":
        method = _cfg(fit, "method", str, "gaussian")
        dists = load_csv_grouped(path, _cfg(source, "group_by", str, required=True), method,
                                 fit.get("bandwidth", "scott"))
        if "output" in fit:
            out[resolve(_cfg(fit, "output", str))] = dump_distributions(
                dists, {"tool": f"uncertkit {__version__}", "fit": method})
    elif fmt == "json":
        dists = load_distributions(path)
    else:
        raise InputError(f"config: input format must be 'csv' or 'json', got {fmt!r}")

    transform = _cfg(config, "transform", dict, None)
    if transform and _cfg(transform, "method", str, "none") != "none":
        dims = _cfg(transform, "dims", int, 2)
        if dims < 1:
            raise InputError("config: transform dims must be >= 1")
        result, prov = transform_dists(
            dists, _cfg(transform, "method", str), dims, seed,
            _cfg(transform, "max_iter", int, 2000), float(_cfg(transform, "tol", float, 1e-8)),
            bool(transform.get("self_pairs", True)), _cfg(transform, "init", str, "uapca"))
        dists = result.distributions
        if "output" in transform:
            out[resolve(_cfg(transform, "output", str))] = dump_distributions(dists, prov, result.maps)

    plots = config.get("plots", [])
    if not isinstance(plots, list):
        raise InputError("config: 'plots' must be a list")
    for k, req in enumerate(plots):
        kind = _cfg(req, "kind", str, required=True)
        if kind not in PLOT_KINDS:
            raise InputError(f"config: plots[{k}] has unknown kind {kind!r}")
        quantiles = req.get("quantiles")
        if quantiles is not None:
            try:
                quantiles = _quantiles_arg(",".join(str(float(q)) for q in quantiles))
            except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
                raise InputError(f"config: plots[{k}] quantiles invalid: {exc}") from None
        plot_seed = _cfg(req, "seed", int, seed)
        out[resolve(_cfg(req, "output", str, required=True))] = render_plot(
            dists, kind, quantiles, _cfg(req, "samples", int, 100), plot_seed,
            req.get("width"), req.get("height"), req.get("off_diag", "contour"), req.get("diag", "violin"))
    if not out:
        raise InputError("config produces no outputs (add plots or an output path)")
    return f"pipeline: wrote {len(out)} file(s)"


COMMANDS = {"fit": _cmd_fit, "dataset": _cmd_dataset, "transform": _cmd_transform,
            "plot": _cmd_plot, "pipeline": _cmd_pipeline}


def run_cli(argv=None) -> int:
    """Run the command line and return the exit code (never raises for handled errors)."""
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    root = logging.getLogger("uncertkit")
    root.addHandler(handler)
    try:
        try:
            args = build_parser().parse_args(argv)
        except UsageError as exc:
            print(exc, file=sys.stderr)
            return EXIT_USAGE
        root.setLevel(logging.INFO if args.verbose else logging.WARNING)
        outputs: dict[str, str] = {}
        try:
            summary = COMMANDS[args.command](args, outputs)
            for path, text in outputs.items():
                write_text_atomic(path, text)
        except UsageError as exc:
            print(f"uncertkit: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except NumericFailure as exc:
            print(f"uncertkit: numeric failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        except (InputError, DomainError, OSError) as exc:
            print(f"uncertkit: error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        print(summary)
        return EXIT_OK
    finally:
        root.removeHandler(handler)


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
