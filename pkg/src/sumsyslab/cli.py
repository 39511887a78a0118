"""Batch experiment runner.

Subcommands shale, kernel, units, invariants, each taking --config (a
key = value file) plus flag overrides; flags win over file values.  Exit
codes: 0 success, 2 validation error, 3 numerical-quality failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import invariants as iv
from . import kernels as kn
from . import sumsys as ss
from . import units as un
from .hilbert import ComplexVector, GramMap, euclidean_space
from .fock import ccr_residual, FockSpace
from .reporting import parse_config, thread_count, write_csv, write_json, write_metadata
from .shale import (
    adjoint_residual,
    gamma,
    vacuum_overlap,
    vacuum_overlap_formula,
    verify_functorial,
    verify_intertwining,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_QUALITY = 3


class ValidationError(Exception):
    pass


class QualityError(Exception):
    pass


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationError(message)


def _kernel_from_config(cfg: dict) -> kn.Kernel:
    variant = cfg.get("kernel", kn.TSIRELSON)
    if variant == kn.STANDARD_L2:
        return kn.standard_l2()
    _require(variant == kn.TSIRELSON, f"unknown kernel variant {variant!r}")
    alpha = float(cfg.get("alpha", 2.0))
    _require(1.0 < alpha <= 4.0, "alpha must lie in (1, 4]")
    eps = cfg.get("eps")
    return kn.tsirelson(alpha, eps=float(eps) if eps is not None else None)


def _random_sclass(rng: np.random.Generator, d: int, lo: float, hi: float,
                   product_band: bool = False, other: np.ndarray | None = None) -> np.ndarray:
    """Draw a map with singular values in [lo, hi]; optionally require the
    product with `other` to stay in the band too (keeps residual probes
    below their truncation saturation level)."""
    for _ in range(1000):
        q1 = np.linalg.qr(rng.normal(size=(d, d)))[0]
        q2 = np.linalg.qr(rng.normal(size=(d, d)))[0]
        sv = rng.uniform(lo, hi, size=d)
        m = q2 @ np.diag(sv) @ q1.T
        if not product_band or other is None:
            return m
        psv = np.linalg.svd(m @ other, compute_uv=False)
        if psv.min() >= lo and psv.max() <= hi:
            return m
    raise ValidationError("could not draw a map with the requested spectrum")


def run_shale_suite(cfg: dict, out_dir: Path) -> int:
    seed = cfg.get("seed")
    _require(seed is not None, "seed is mandatory for the randomized suite")
    n_pairs = int(cfg.get("n_pairs", 10))
    dim_max = int(cfg.get("dim_max", 3))
    _require(1 <= dim_max <= 4, "dims above 4 are rejected (combinatorial blowup)")
    cutoffs = [int(c) for c in cfg.get("cutoffs", [8, 12, 16])]
    _require(max(cutoffs) <= 24, "cutoffs above 24 are rejected (combinatorial blowup)")
    sector = int(cfg.get("sector", min(cutoffs) // 2))
    _require(sector <= min(cutoffs) // 2, "sector must be at most half the smallest cutoff")
    sv_lo = float(cfg.get("sv_lo", 0.6))
    sv_hi = float(cfg.get("sv_hi", 1.6))
    hard_limit = cfg.get("residual_hard_limit")

    rng = np.random.default_rng(int(seed))
    dims = [1 + (i % dim_max) for i in range(n_pairs)]
    pairs = []
    for d in dims:
        a = _random_sclass(rng, d, sv_lo, sv_hi)
        b = _random_sclass(rng, d, sv_lo, sv_hi, product_band=True, other=a)
        ure = rng.normal(size=d)
        uim = rng.normal(size=d)
        scale = rng.uniform(0.3, 1.0) / np.sqrt(ure @ ure + uim @ uim)
        pairs.append((d, a, b, ComplexVector(ure * scale, uim * scale)))

    def rng_probe(idx: int, d: int) -> np.ndarray:
        sub = np.random.default_rng(int(seed) + 7919 * (idx + 1))
        v = sub.normal(size=d) + 1j * sub.normal(size=d)
        return v * (sub.uniform(0.3, 1.0) / np.linalg.norm(v))

    def one_pair(item):
        idx, (d, a, b, u) = item
        g = euclidean_space(d)
        A = GramMap(g, g, a)
        B = GramMap(g, g, b)
        overlap_rows = []
        gm = gamma(A, max(cutoffs))
        overlap_rows.append([idx, d, vacuum_overlap(gm), vacuum_overlap_formula(A)])
        inter, funct, adj, ccr = [], [], [], []
        for N in cutoffs:
            inter.append([idx, d, N, sector, verify_intertwining(A, u, N, sector)])
            funct.append([idx, d, N, sector, verify_functorial(A, B, N, sector)])
            adj.append([idx, d, N, sector, adjoint_residual(A, N, sector)])
            space = FockSpace(d, N)
            x = space.to_modes(u.re + 1j * u.im)
            y = space.to_modes(rng_probe(idx, d))
            ccr.append([idx, d, N, N // 2, ccr_residual(space, x, y, N // 2)])
        return overlap_rows, inter, funct, adj, ccr

    workers = thread_count()
    items = list(enumerate(pairs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_pair, items))
    else:
        results = [one_pair(it) for it in items]

    overlap_rows = [r for res in results for r in res[0]]
    inter_rows = [r for res in results for r in res[1]]
    funct_rows = [r for res in results for r in res[2]]
    adj_rows = [r for res in results for r in res[3]]
    ccr_rows = [r for res in results for r in res[4]]

    echo = {k: cfg[k] for k in cfg}
    write_csv(out_dir / "vacuum_overlaps.csv",
              ["pair", "dim", "overlap", "product_formula"], overlap_rows, echo)
    write_csv(out_dir / "intertwining.csv",
              ["pair", "dim", "cutoff", "sector", "residual"], inter_rows, echo)
    write_csv(out_dir / "functoriality.csv",
              ["pair", "dim", "cutoff", "sector", "residual"], funct_rows, echo)
    write_csv(out_dir / "adjoint.csv",
              ["pair", "dim", "cutoff", "sector", "residual"], adj_rows, echo)
    write_csv(out_dir / "ccr.csv",
              ["pair", "dim", "cutoff", "sector", "residual"], ccr_rows, echo)

    # weak continuity probes: T_n = diag(1 + 1/n) and diag(2 - 1/n) on R^1
    g1 = euclidean_space(1)
    wc_rows = []
    for name, lam_fn, lam_lim in (("to_identity", lambda n: 1.0 + 1.0 / n, 1.0),
                                  ("to_two", lambda n: 2.0 - 1.0 / n, 2.0)):
        target = vacuum_overlap(gamma(GramMap(g1, g1, [[lam_lim]]), 8))
        for n in (1, 2, 4, 8, 16, 32):
            val = vacuum_overlap(gamma(GramMap(g1, g1, [[lam_fn(n)]]), 8))
            wc_rows.append([name, n, val, target, abs(val - target)])
    write_csv(out_dir / "weak_continuity.csv",
              ["sequence", "n", "vacuum_element", "limit", "deviation"], wc_rows, echo)

    if hard_limit is not None:
        worst = max(r[-1] for r in inter_rows + funct_rows + adj_rows + ccr_rows
                    if r[2] == max(cutoffs))
        if worst > float(hard_limit):
            raise QualityError(
                f"final-cutoff residual {worst:.3e} above hard limit {hard_limit}")
    return EXIT_OK


def run_kernel_suite(cfg: dict, out_dir: Path) -> int:
    kernel = _kernel_from_config(cfg)
    _require(kernel.is_singular, "the kernel suite needs the singular variant")
    h = float(cfg.get("h", 1.0 / 64))
    grids = [float(x) for x in cfg.get("grids", [1 / 16, 1 / 32, 1 / 64, 1 / 128, 1 / 256])]
    split = float(cfg.get("split", 0.5))
    fourier_ns = [int(n) for n in cfg.get("fourier_ns", [256, 1024, 4096])]
    series_nmax = int(cfg.get("series_nmax", 2 ** 12))
    echo = {k: cfg[k] for k in cfg}

    gram = kn.gram_matrix(kernel, (0.0, 1.0), h)
    spec_rows = [[i, float(v)] for i, v in enumerate(np.linalg.eigvalsh(gram.matrix)[::-1])]
    write_csv(out_dir / "gram_spectrum.csv", ["rank", "eigenvalue"], spec_rows, echo)

    scan_rows = []
    for variant, k in ((kernel.variant, kernel), (kn.STANDARD_L2, kn.standard_l2())):
        scan = ss.defect_scan(k, split, 1.0, grids)
        for row in scan["rows"]:
            scan_rows.append([variant, row["h"], row["defect"], row["increment"],
                              scan["converging"]])
    write_csv(out_dir / "defect_scan.csv",
              ["variant", "h", "defect", "increment", "converging"], scan_rows, echo)

    four_rows = []
    for n in fourier_ns:
        val = kn.fourier_coeff(kernel, n)
        comp = val * np.log(n) ** (kernel.alpha - 1.0)
        four_rows.append([n, val, comp])
    comps = [r[2] for r in four_rows]
    drift = (max(comps) - min(comps)) / min(comps) if comps else float("nan")
    echo_f = dict(echo, compensated_drift=drift)
    write_csv(out_dir / "fourier.csv", ["n", "bhat", "compensated"], four_rows, echo_f)

    tbl = un.existence_series(kernel, series_nmax)
    ser_rows = [[N, s, b, tbl.converging]
                for N, s, b in zip(tbl.checkpoints, tbl.partial_sums, tbl.blocks)]
    write_csv(out_dir / "existence_series.csv",
              ["N", "partial_sum", "block", "converging"], ser_rows, echo)
    return EXIT_OK


def run_units_suite(cfg: dict, out_dir: Path) -> int:
    kernel = _kernel_from_config(cfg)
    h = float(cfg.get("h", 1.0 / 128))
    t_values = [float(t) for t in cfg.get("t_values", [0.25, 0.5, 0.75, 1.0])]
    series_nmax = int(cfg.get("series_nmax", 2 ** 12))
    depth = int(cfg.get("probe_depth", 4))
    echo = {k: cfg[k] for k in cfg}

    sys = ss.SumSystemInstance(kernel, h)
    pair_rows = []
    for t in t_values:
        sol = un.imaginary_unit(sys, t)
        pair_rows.append([t, un.unit_pairing(sys, t), sol.residual, sol.condition])
    write_csv(out_dir / "pairing.csv",
              ["t", "pairing", "residual", "condition"], pair_rows, echo)

    if kernel.is_singular:
        tbl = un.existence_series(kernel, series_nmax)
        ser_rows = [[N, s, b, tbl.converging]
                    for N, s, b in zip(tbl.checkpoints, tbl.partial_sums, tbl.blocks)]
        write_csv(out_dir / "existence_series.csv",
                  ["N", "partial_sum", "block", "converging"], ser_rows, echo)

    sets = iv.cantor_sequence(depth, float(cfg.get("keep_fraction", 0.5)), h)
    comps = [E.complement() for E in sets]
    probe = un.yprime_boundedness_probe(sys, comps)
    norm_rows = [[i, E.measure, nrm] for i, (E, nrm) in enumerate(zip(comps, probe["norms"]))]
    write_csv(out_dir / "yprime_norms.csv", ["set_id", "measure", "norm"], norm_rows,
              dict(echo, max_norm=probe["max"]))
    return EXIT_OK


def run_invariant_suite(cfg: dict, out_dir: Path) -> int:
    kernel = _kernel_from_config(cfg)
    h = float(cfg.get("h", 1.0 / 256))
    depth = int(cfg.get("depth", 6))
    keep = float(cfg.get("keep_fraction", 0.5))
    liminf_tol = float(cfg.get("liminf_tol", 0.15))
    decay_tol = float(cfg.get("decay_tol", 0.25))
    plateau_tol = float(cfg.get("plateau_tol", 0.5))
    echo = {k: cfg[k] for k in cfg}

    try:
        seq = iv.cantor_sequence(depth, keep, h)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc

    results = {}
    for k in (kn.standard_l2(), kernel):
        sys = ss.SumSystemInstance(k, h)
        probes = iv.default_probes(sys, seq)
        verdict = iv.classify(sys, seq, probes, liminf_tol=liminf_tol,
                              decay_tol=decay_tol, plateau_tol=plateau_tol)
        lim = iv.liminf_residuals(sys, seq, probes, tol=liminf_tol)
        comp = iv.limsup_diagnostic(sys, seq, probes)
        results[k.variant] = (verdict, lim, comp)
        rows = []
        for j in range(len(seq)):
            rows.append([j, seq[j].complement().measure,
                         float(lim.probe_residuals[:, j].max()),
                         float(comp["projection_norms"][0, j]),
                         float(comp["yprime_norms"][j])])
        write_csv(out_dir / f"residuals_{k.variant}.csv",
                  ["step", "complement_measure", "max_liminf_residual",
                   "indicator_complement_projection", "yprime_norm"], rows, echo)

    std = results[kn.STANDARD_L2]
    tsi = results[kernel.variant] if kernel.variant != kn.STANDARD_L2 else std
    std_norms = std[2]["yprime_norms"]
    tsi_norms = tsi[2]["yprime_norms"]
    std_decay = float(std_norms[0] / std_norms[-1]) if std_norms[-1] > 0 else float("inf")
    tsi_decay = float(tsi_norms[0] / tsi_norms[-1]) if tsi_norms[-1] > 0 else float("inf")
    contrast = std_decay / tsi_decay if tsi_decay > 0 else float("inf")
    contrast_rows = [[j, float(std_norms[j]), float(tsi_norms[j]),
                      float(std_norms[j] / tsi_norms[j]) if tsi_norms[j] > 0 else float("inf")]
                     for j in range(len(seq))]
    write_csv(out_dir / "contrast.csv",
              ["step", "standard_l2_norm", f"{kernel.variant}_norm", "ratio"],
              contrast_rows, dict(echo, std_decay=std_decay,
                                  kernel_decay=tsi_decay, contrast_ratio=contrast))

    verdict_obj = {
        "sequence": {"depth": depth, "keep_fraction": keep, "h": h,
                     "complement_measures": [E.complement().measure for E in seq]},
        "kernels": {
            variant: {
                "verdict": res[0].verdict,
                "liminf_full": res[0].liminf_full,
                "complement_initial": res[0].complement_initial,
                "complement_final": res[0].complement_final,
                "plateau_ratio": res[0].plateau_ratio,
                "per_step_yprime": [float(v) for v in res[2]["yprime_norms"]],
            }
            for variant, res in results.items()
        },
        "contrast_ratio": contrast,
        "thresholds": {"liminf_tol": liminf_tol, "decay_tol": decay_tol,
                       "plateau_tol": plateau_tol},
    }
    write_json(out_dir / "verdicts.json", verdict_obj)
    return EXIT_OK


SUITES = {
    "shale": run_shale_suite,
    "kernel": run_kernel_suite,
    "units": run_units_suite,
    "invariants": run_invariant_suite,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sumsyslab",
                                     description="sum-system numerical laboratory")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUITES:
        p = sub.add_parser(name, help=f"run the {name} suite")
        p.add_argument("--config", type=Path, help="key = value config file")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--override", "-O", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config value (repeatable)")
    return parser


def _apply_overrides(cfg: dict, overrides: list[str]) -> dict:
    import json as _json

    out = dict(cfg)
    for item in overrides:
        if "=" not in item:
            raise ValidationError(f"override {item!r} is not KEY=VALUE")
        key, _, value = item.partition("=")
        try:
            out[key.strip()] = _json.loads(value.strip())
        except _json.JSONDecodeError:
            out[key.strip()] = value.strip()
    return out


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else {}
        cfg = _apply_overrides(cfg, args.override)
        out_dir = args.out or Path(cfg.get("out", f"report_{args.command}"))
        out_dir.mkdir(parents=True, exist_ok=True)
        code = SUITES[args.command](cfg, out_dir)
        write_metadata(out_dir, cfg, __version__)
        return code
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, OSError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except QualityError as exc:
        print(f"numerical-quality failure: {exc}", file=sys.stderr)
        return EXIT_QUALITY


if __name__ == "__main__":
    sys.exit(main())
