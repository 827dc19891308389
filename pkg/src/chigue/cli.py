"""Command-line surface: curves, Monte-Carlo runs, references, comparisons,
and ingestion of external eigenvalue files.

Exit codes: 0 success, 2 flag or input-parse error, 3 numerical
non-convergence, 4 I/O failure.  All numeric output is full double
precision, and a fixed seed plus fixed flags produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .asymptotic import (AsymptoticParams, mean_spacing, sigma_tilde_max,
                         spacing_pdf_unfolded, tabulate_asymptotic)
from .ensemble import EnsembleConfig, build_histogram, spacing_samples, unfold_histogram
from .finite_spacing import SpacingParams, stilde_max, tabulate_spacing_finite
from .quadrature import QuadratureError
from .refstats import (Histogram, TabulatedDistribution, bulk_spacing_dh,
                       chi2_distance, delta_curve, wigner_surmise)
from .unfold import unfolded_airy_density, unfolded_bessel_density

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


class DatasetParseError(ValueError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class EigenvalueDataset:
    """Rows of sorted positive eigenvalues, one configuration per row, with
    optional mass/nu labels inherited from preceding metadata comments."""

    rows: list = field(default_factory=list)
    mass_labels: list = field(default_factory=list)
    nu_labels: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)


def ingest(path):
    """Parse a plain-text eigenvalue file.

    One configuration per line, whitespace-separated ascending positive
    reals; '#' starts a comment; 'key=value' comments (mass=, nu=) label the
    configurations that follow.
    """
    ds = EigenvalueDataset()
    mass = None
    nu = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                for token in body.split(","):
                    token = token.strip()
                    if "=" not in token:
                        continue
                    key, _, val = token.partition("=")
                    key = key.strip().lower()
                    try:
                        if key == "mass":
                            mass = float(val)
                        elif key == "nu":
                            nu = int(val)
                    except ValueError:
                        raise DatasetParseError(f"bad metadata value {token!r}", lineno)
                continue
            try:
                vals = np.array([float(t) for t in line.split()], dtype=float)
            except ValueError:
                raise DatasetParseError("non-numeric entry", lineno)
            if len(vals) < 2:
                raise DatasetParseError("need at least two eigenvalues per row", lineno)
            if np.any(vals <= 0):
                raise DatasetParseError("non-positive eigenvalue", lineno)
            if np.any(np.diff(vals) < 0):
                raise DatasetParseError("row not sorted ascending", lineno)
            ds.rows.append(vals)
            ds.mass_labels.append(mass)
            ds.nu_labels.append(nu)
    if not ds.rows:
        raise DatasetParseError("no configurations found", 0)
    return ds


def analyze_dataset(dataset, k, bin_width=0.2, pooling="per-mass"):
    """k-th spacings of every configuration, unfolded and compared.

    pooling="per-mass" rescales each mass group to unit mean spacing before
    pooling (the default); "pooled" rescales the pooled set once.  Returns
    (unfolded Histogram, {"bulk": d, "hard_edge": d}).
    """
    if pooling not in ("per-mass", "pooled"):
        raise ValueError("pooling must be 'per-mass' or 'pooled'")
    for i, row in enumerate(dataset.rows):
        if len(row) < k + 1:
            raise ValueError(f"configuration {i} has fewer than k+1 = {k + 1} eigenvalues")
    if len(dataset) < 100:
        warnings.warn(f"only {len(dataset)} configurations; statistics will be poor",
                      RuntimeWarning, stacklevel=2)
    spac = np.array([row[k] - row[k - 1] for row in dataset.rows])
    labels = dataset.mass_labels
    if pooling == "per-mass" and any(l is not None for l in labels):
        pooled = []
        for lab in sorted({l for l in labels}, key=lambda t: (t is None, t)):
            grp = spac[[i for i, l in enumerate(labels) if l == lab]]
            pooled.append(grp / np.mean(grp))
        unfolded = np.concatenate(pooled)
    else:
        unfolded = spac / np.mean(spac)
    hist = unfold_histogram(build_histogram(unfolded, bin_width))
    hi = hist.edges[-1] + 1.0
    bulk = _reference_table(bulk_spacing_dh, hi)
    hard = _reference_table(lambda s: spacing_pdf_unfolded(AsymptoticParams(1), s), hi)
    return hist, {
        "bulk": chi2_distance(hist, bulk),
        "hard_edge": chi2_distance(hist, hard),
    }


def _reference_table(fn, hi, points=1200):
    """Tabulate a spacing pdf from exactly 0 (every spacing pdf vanishes
    there, while most of the analytic forms reject s = 0)."""
    grid = np.linspace(0.0, float(hi), points)
    vals = np.empty(points)
    vals[0] = 0.0
    vals[1:] = fn(grid[1:])
    return TabulatedDistribution(grid, vals)


def _fmt(x):
    return format(float(x), ".17g")


def write_curve_csv(path, header, columns):
    rows = zip(*columns)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_histogram_csv(path, hist):
    write_curve_csv(path, ["bin_lo", "bin_hi", "mass"],
                    [hist.edges[:-1], hist.edges[1:], hist.masses])


def read_histogram_csv(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    edges = np.concatenate([data["bin_lo"], data["bin_hi"][-1:]])
    return Histogram(edges, np.asarray(data["mass"], dtype=float))


def read_curve_csv(path):
    data = np.atleast_1d(np.genfromtxt(path, delimiter=",", names=True))
    names = data.dtype.names
    return TabulatedDistribution(np.asarray(data[names[0]], dtype=float),
                                 np.asarray(data[names[1]], dtype=float))


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _meta(**kw):
    return {"package": "chigue", "version": __version__, **kw}


def _resolve_input(specifier, grid_hint=None):
    """An input for `compare`: an analytic name, curve:PATH, or hist:PATH."""
    hi = 8.0 if grid_hint is None else float(grid_hint)
    if specifier == "wigner":
        return _reference_table(wigner_surmise, hi)
    if specifier == "bulk":
        return _reference_table(bulk_spacing_dh, hi)
    if specifier == "hard-edge-k1":
        return _reference_table(lambda s: spacing_pdf_unfolded(AsymptoticParams(1), s), hi)
    if specifier.startswith("hist:"):
        return read_histogram_csv(specifier[5:])
    if specifier.startswith("curve:"):
        return read_curve_csv(specifier[6:])
    raise argparse.ArgumentTypeError(
        f"unknown input {specifier!r} (use wigner | bulk | hard-edge-k1 | "
        "curve:PATH | hist:PATH)")


def _cmd_density(args):
    if args.nu == "inf":
        fn = unfolded_airy_density
    else:
        nu = int(args.nu)
        fn = lambda lam: unfolded_bessel_density(nu, lam)
    lo = args.lmin
    if args.nu != "inf" and int(args.nu) == 0:
        lo = max(lo, 1e-3)
    grid = np.linspace(lo, args.lmax, args.points)
    grid = grid[np.abs(grid) >= 0.02]  # unfolding spike at the origin
    vals = np.array([fn(l) for l in grid])
    write_curve_csv(args.out, ["lam", "density"], [grid, vals])
    if args.json_meta:
        write_json(args.json_meta, _meta(command="density", nu=str(args.nu),
                                         lmin=lo, lmax=args.lmax, points=args.points))
    return EXIT_OK


def _cmd_spacing_finite(args):
    params = SpacingParams(args.k, args.n, args.nu, len(args.mass), tuple(args.mass))
    smax = args.smax if args.smax is not None else (
        3.5 if args.unfold else stilde_max(args.n, args.k))
    grid = np.linspace(args.smin, smax, args.points)
    dist = tabulate_spacing_finite(params, grid, unfold=args.unfold)
    name = "pdf_unfolded" if args.unfold else "pdf"
    write_curve_csv(args.out, ["s", name], [dist.grid, dist.pdf])
    if args.json_meta:
        write_json(args.json_meta, _meta(command="spacing-finite", k=args.k, n=args.n,
                                         nu=args.nu, masses=list(args.mass),
                                         unfold=bool(args.unfold)))
    return EXIT_OK


def _cmd_spacing_asymptotic(args):
    params = AsymptoticParams(args.k, args.nu, len(args.mu), tuple(args.mu))
    smax = args.smax if args.smax is not None else (
        3.5 if args.unfold else sigma_tilde_max(args.k))
    grid = np.linspace(args.smin, smax, args.points)
    dist = tabulate_asymptotic(params, grid, unfold=args.unfold)
    name = "pdf_unfolded" if args.unfold else "pdf"
    write_curve_csv(args.out, ["s", name], [dist.grid, dist.pdf])
    if args.json_meta:
        write_json(args.json_meta, _meta(command="spacing-asymptotic", k=args.k,
                                         nu=args.nu, mu=list(args.mu),
                                         unfold=bool(args.unfold)))
    return EXIT_OK


def _cmd_mean_spacing(args):
    params = AsymptoticParams(args.k, args.nu, len(args.mu), tuple(args.mu))
    print(_fmt(mean_spacing(params)))
    return EXIT_OK


def _cmd_mc_sample(args):
    ks = args.k or [1]
    config = EnsembleConfig(args.n, args.nu, args.nconf, args.seed, args.workers)
    samples = spacing_samples(config, ks)
    meta = _meta(command="mc-sample", n=args.n, nu=args.nu, nconf=args.nconf,
                 seed=args.seed, bin_width=args.bin_width, ks=sorted(samples))
    for k, spac in samples.items():
        raw_bw = args.bin_width * float(np.mean(spac))
        hist = unfold_histogram(build_histogram(spac, raw_bw))
        write_histogram_csv(f"{args.out_prefix}_k{k}.csv", hist)
        meta[f"k{k}"] = {
            "mean_spacing": float(np.mean(spac)),
            "std_spacing": float(np.std(spac)),
            "bins": len(hist.masses),
        }
    write_json(f"{args.out_prefix}.json", meta)
    return EXIT_OK


def _cmd_reference(args):
    grid = np.linspace(args.smin, args.smax, args.points)
    if args.which == "wigner":
        vals = wigner_surmise(grid)
    else:
        vals = bulk_spacing_dh(np.maximum(grid, 1e-6))
    write_curve_csv(args.out, ["s", "pdf"], [grid, vals])
    return EXIT_OK


def _cmd_compare(args):
    a = _resolve_input(args.a, args.grid_max)
    b = _resolve_input(args.b, args.grid_max)
    report = {"a": args.a, "b": args.b}
    if isinstance(a, Histogram):
        report["chi2"] = chi2_distance(a, b, mode=args.mode)
        centers = a.centers
        ref = np.interp(centers, b.grid, b.pdf)
        delta = a.density() - ref
        write_curve_csv(args.out, ["s", "delta"], [centers, delta])
    else:
        dc = delta_curve(a, b, rebin=True)
        report["sup_delta"] = dc.sup()
        report["sup_delta_at"] = dc.argsup()
        write_curve_csv(args.out, ["s", "delta"], [dc.grid, dc.values])
    if args.json_meta:
        write_json(args.json_meta, _meta(command="compare", **report))
    for key, val in report.items():
        if isinstance(val, float):
            print(f"{key} = {_fmt(val)}")
    return EXIT_OK


def _cmd_ingest_analyze(args):
    ds = ingest(args.path)
    hist, distances = analyze_dataset(ds, args.k, args.bin_width, args.pooling)
    write_histogram_csv(f"{args.out_prefix}_hist.csv", hist)
    write_json(f"{args.out_prefix}.json", _meta(
        command="ingest-analyze", path=args.path, k=args.k,
        bin_width=args.bin_width, pooling=args.pooling,
        n_conf=len(ds), chi2_bulk=distances["bulk"],
        chi2_hard_edge=distances["hard_edge"]))
    print(f"n_conf = {len(ds)}")
    print(f"chi2_bulk = {_fmt(distances['bulk'])}")
    print(f"chi2_hard_edge = {_fmt(distances['hard_edge'])}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog="chigue",
        description="Level-spacing statistics of the chiral Gaussian unitary "
                    "ensemble at the hard edge, with bulk references and "
                    "Monte-Carlo validation.")
    sub = p.add_subparsers(dest="command", required=True)
    default_workers = int(os.environ.get("CHIGUE_WORKERS", "1"))

    d = sub.add_parser("density", help="unfolded microscopic density at the "
                       "hard edge (nu = 0, 1, ...) or its soft-edge limit (nu = inf)")
    d.add_argument("--nu", default="0",
                   help="zero-mode index, or 'inf' for the soft-edge limit curve")
    d.add_argument("--lmin", type=float, default=-2.0)
    d.add_argument("--lmax", type=float, default=6.0)
    d.add_argument("--points", type=int, default=400)
    d.add_argument("--out", required=True)
    d.add_argument("--json-meta")
    d.set_defaults(fn=_cmd_density)

    f = sub.add_parser("spacing-finite", help="exact k-th spacing density at "
                       "finite matrix size n (k<=4, nu<=4, nf<=3, n<=200; use "
                       "mc-sample beyond)")
    f.add_argument("--k", type=int, default=1)
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--nu", type=int, default=0)
    f.add_argument("--mass", type=float, action="append", default=[],
                   help="flavour mass (repeatable)")
    f.add_argument("--smin", type=float, default=1e-3)
    f.add_argument("--smax", type=float, default=None)
    f.add_argument("--points", type=int, default=200)
    f.add_argument("--unfold", action="store_true",
                   help="rescale to unit mean spacing")
    f.add_argument("--out", required=True)
    f.add_argument("--json-meta")
    f.set_defaults(fn=_cmd_spacing_finite)

    a = sub.add_parser("spacing-asymptotic", help="k-th spacing density in the "
                       "hard-edge large-n limit (k<=3, nu<=2, nf<=2; use "
                       "mc-sample beyond)")
    a.add_argument("--k", type=int, default=1)
    a.add_argument("--nu", type=int, default=0)
    a.add_argument("--mu", type=float, action="append", default=[],
                   help="rescaled flavour mass (repeatable)")
    a.add_argument("--smin", type=float, default=1e-3)
    a.add_argument("--smax", type=float, default=None)
    a.add_argument("--points", type=int, default=200)
    a.add_argument("--unfold", action="store_true")
    a.add_argument("--out", required=True)
    a.add_argument("--json-meta")
    a.set_defaults(fn=_cmd_spacing_asymptotic)

    m = sub.add_parser("mean-spacing", help="first moment of the limiting "
                       "k-th spacing density")
    m.add_argument("--k", type=int, default=1)
    m.add_argument("--nu", type=int, default=0)
    m.add_argument("--nf", type=int, default=0)
    m.add_argument("--mu", type=float, action="append", default=[])
    m.set_defaults(fn=_cmd_mean_spacing)

    mc = sub.add_parser("mc-sample", help="Monte-Carlo spacing histograms of "
                        "the quenched ensemble (unfolded to unit mean)")
    mc.add_argument("--n", type=int, required=True)
    mc.add_argument("--nu", type=int, default=0)
    mc.add_argument("--k", type=int, action="append",
                    help="spacing index (repeatable; default 1)")
    mc.add_argument("--nconf", type=int, default=100000)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--bin-width", type=float, default=0.2,
                    help="bin width after unfolding")
    mc.add_argument("--workers", type=int, default=default_workers)
    mc.add_argument("--out-prefix", required=True)
    mc.set_defaults(fn=_cmd_mc_sample)

    r = sub.add_parser("reference", help="bulk spacing reference curves")
    r.add_argument("--which", choices=["wigner", "bulk"], default="bulk")
    r.add_argument("--smin", type=float, default=1e-3)
    r.add_argument("--smax", type=float, default=6.0)
    r.add_argument("--points", type=int, default=400)
    r.add_argument("--out", required=True)
    r.set_defaults(fn=_cmd_reference)

    c = sub.add_parser("compare", help="distance and difference curve between "
                       "two spacing inputs")
    c.add_argument("--a", required=True,
                   help="wigner | bulk | hard-edge-k1 | curve:PATH | hist:PATH")
    c.add_argument("--b", required=True)
    c.add_argument("--mode", choices=["mass", "pearson", "pdf"], default="mass")
    c.add_argument("--grid-max", type=float, default=None)
    c.add_argument("--out", required=True)
    c.add_argument("--json-meta")
    c.set_defaults(fn=_cmd_compare)

    i = sub.add_parser("ingest-analyze", help="parse an eigenvalue file, "
                       "histogram the k-th spacings, compare to references")
    i.add_argument("--path", required=True)
    i.add_argument("--k", type=int, default=1)
    i.add_argument("--bin-width", type=float, default=0.2)
    i.add_argument("--pooling", choices=["per-mass", "pooled"], default="per-mass",
                   help="unfold each mass group before pooling, or pool first")
    i.add_argument("--out-prefix", required=True)
    i.set_defaults(fn=_cmd_ingest_analyze)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (DatasetParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QuadratureError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
