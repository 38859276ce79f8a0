"""Command-line front end: ``halfdirac {enclosure,scan,nrlimit,selftest}``.

Every run writes ``records.jsonl`` (one self-describing JSON object per
line), CSV tables for plotting and a short human-readable ``report.txt``
into ``--out``. Exit codes: 0 all verdicts pass, 1 a mathematical verdict
failed, 2 invalid configuration or precondition, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .birman_schwinger import bs_locate, quadrature_for
from .bounds import (
    SQRT3_2,
    G_at_b_zero,
    G_many,
    g_of_b,
    hermitian_gap,
    moment_exclusion,
    theorem2_threshold_many,
)
from .config import ConfigError, RunConfig, load_config, parse_config
from .errors import CouplingTooLarge, NumericalError, PreconditionError
from .evans import ScanRegion, find_zeros, free_evans, evans_values, winding_count
from .nonrel import bc_limit_table, rate_check, schrodinger_reduction_check
from .potential import Potential, polar_halves, scalar_term
from .resolvent import BoundaryCondition, supnorm_closed, supnorm_numeric
from .spectral import (
    INV_SQRT2,
    Disk,
    EnclosureRegion,
    PhysicalParams,
    compute_spectral_point,
    distance_to_spectrum,
    theorem1_enclosure,
)

log = logging.getLogger("halfdirac")

EXIT_OK, EXIT_VERDICT, EXIT_PRECONDITION, EXIT_NUMERICAL = 0, 1, 2, 3


# -- report plumbing ----------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


@dataclass
class Report:
    command: str
    digest: str
    records: list[dict] = field(default_factory=list)
    tables: dict[str, tuple[list[str], list[list]]] = field(default_factory=dict)
    lines: list[str] = field(default_factory=list)
    failed: bool = False
    numerical_failure: bool = False

    def add(self, kind: str, **payload) -> None:
        self.records.append({"kind": kind, "payload": _jsonable(payload),
                             "provenance": {"config": self.digest, "version": __version__}})

    def table(self, name: str, header: list[str], rows: list[list]) -> None:
        self.tables[name] = (header, [[_jsonable(v) for v in r] for r in rows])

    def say(self, line: str) -> None:
        self.lines.append(line)

    def verdict(self, name: str, ok: bool, **detail) -> None:
        self.add("certificate", name=name, verdict=bool(ok), **detail)
        if not ok:
            self.failed = True
            self.add("violation", name=name, **detail)

    def write(self, out: Path, timestamp: str | None = None) -> None:
        out.mkdir(parents=True, exist_ok=True)
        stamp = timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        header = {"kind": "header", "payload": {"command": self.command, "timestamp": stamp},
                  "provenance": {"config": self.digest, "version": __version__}}
        with open(out / "records.jsonl", "w") as fh:
            for rec in [header] + self.records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        for name, (hdr, rows) in self.tables.items():
            with open(out / f"{name}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(hdr)
                w.writerows(rows)
        (out / "report.txt").write_text("\n".join(self.lines) + "\n")

    @property
    def exit_code(self) -> int:
        if self.numerical_failure:
            return EXIT_NUMERICAL
        return EXIT_VERDICT if self.failed else EXIT_OK


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _is_alpha(alpha: float, target: float) -> bool:
    return abs(alpha - target) < 1e-12


# -- enclosure ------------------------------------------------------------------------

def _coupling(cfg: RunConfig) -> float:
    if cfg.potential is not None:
        return cfg.coupling
    v = cfg.raw.get("v")
    if v is None:
        raise ConfigError("potential", "give a potential or a coupling 'v'")
    if not isinstance(v, (int, float)) or v < 0:
        raise ConfigError("v", f"expected a number >= 0, got {v!r}")
    return float(v)


def level_set_points(params: PhysicalParams, alpha: float, level: float, box, n: int) -> np.ndarray:
    """Points where the refined threshold crosses ``level``, by linear
    interpolation along the edges of an ``n x n`` grid."""
    xr, yr = box
    xs = np.linspace(-xr, xr, n)
    ys = np.linspace(-yr, yr, n)
    X, Y = np.meshgrid(xs, ys)
    Z = X + 1j * Y
    ok = distance_to_spectrum(Z, params) > 1e-9 * max(1.0, params.rest_energy)
    ok &= np.abs(Z.imag) > 1e-12
    T = np.full(Z.shape, np.nan)
    T[ok] = theorem2_threshold_many(Z[ok], params, alpha)
    F = T - level
    pts = []
    for A, B, za, zb in ((F[:, :-1], F[:, 1:], Z[:, :-1], Z[:, 1:]), (F[:-1, :], F[1:, :], Z[:-1, :], Z[1:, :])):
        cross = np.isfinite(A) & np.isfinite(B) & (np.sign(A) != np.sign(B))
        a, b = A[cross], B[cross]
        s = a / (a - b)
        pts.append(za[cross] + s * (zb[cross] - za[cross]))
    out = np.concatenate(pts)
    return out[np.lexsort((out.imag, out.real))]


def cmd_enclosure(cfg: RunConfig, report: Report, threads: int = 1) -> None:
    params, alpha = cfg.params, cfg.alpha
    v = _coupling(cfg)
    mc2 = params.rest_energy
    report.add("certificate", name="coupling", v=v, m=params.m, c=params.c, alpha=alpha)
    report.say(f"coupling v = {_fmt(v)}  (m = {_fmt(params.m)}, c = {_fmt(params.c)}, alpha = {_fmt(alpha)})")
    if cfg.potential is not None:
        jumps = [t.edge_jump() for t in cfg.potential.terms if t.profile == "truncated_gaussian"]
        if jumps:
            report.add("certificate", name="truncation-jump", max_jump=max(jumps))
    if v >= INV_SQRT2:
        raise CouplingTooLarge(f"v = {v} >= 1/sqrt(2); the two-disk enclosure does not apply")

    enc = theorem1_enclosure(v, params)
    if not params.massive:
        report.add("enclosure", which="massless", disks=[], note="empty enclosure; spectrum = R")
        report.say("empty enclosure; spectrum = R (no non-real eigenvalues)")
        return
    printed = enc.info["printed"]
    for name, region in (("derived", enc), ("printed", printed)):
        report.add("enclosure", which=name,
                   disks=[{"center": d.center.real, "radius": d.radius} for d in region.disks])
        d = region.disks[0]
        report.say(f"{name} disks: centres +-{_fmt(d.center.real)}, radius {_fmt(d.radius)}")
    contained = bool(enc.info["derived_within_printed"])
    report.add("certificate", name="derived-within-printed", verdict=contained,
               text=f"derived ⊆ printed: {'true' if contained else 'false'}")
    report.say(f"derived ⊆ printed: {'true' if contained else 'false'}")
    report.say(f"large-|zeta| side: {enc.info['large_zeta_side']} half-plane")

    if _is_alpha(alpha, 0.0) or _is_alpha(alpha, math.pi / 2):
        level = v / 2.0
        ext = max(1.5 * (enc.disks[0].center.real + enc.disks[0].radius), 2.0 * mc2)
        box = (ext, max(1.5 * enc.disks[0].radius, 0.5 * mc2))
        pts = level_set_points(params, alpha, level, box, cfg.scan.level_set_grid)
        report.table("theorem2_level_set", ["re", "im"], [[p.real, p.imag] for p in pts])
        report.add("enclosure", which="theorem2-level-set", alpha=alpha, level=level,
                   n_points=int(pts.size), box=list(box), file="theorem2_level_set.csv")
        report.say(f"refined level set threshold = {_fmt(level)}: {pts.size} boundary points")
        herm = cfg.potential.is_hermitian if cfg.potential is not None else bool(cfg.raw.get("hermitian", False))
        if herm and v < SQRT3_2:
            gap = hermitian_gap(v, alpha, params).excluded_gap
            report.add("enclosure", which="hermitian-gap", gap=list(gap))
            report.say(f"hermitian gap free of eigenvalues: ({_fmt(gap[0])}, {_fmt(gap[1])})")
        if cfg.potential is not None:
            md = cfg.potential.moments
            ok = moment_exclusion(md, params)
            point = mc2 if _is_alpha(alpha, 0.0) else -mc2
            report.add("certificate", name="moment-exclusion", verdict=ok, point=point,
                       l1_norm=md.l1_norm, first_moment=md.first_moment)
            report.say(f"first-moment exclusion near {_fmt(point)}: {'true' if ok else 'false'}")


# -- scan ------------------------------------------------------------------------------

def default_regions(params: PhysicalParams, v: float, margin: float):
    mc2 = params.rest_energy
    scale = max(1.0, mc2)
    if not params.massive:
        return [(-5.0 * scale, 5.0 * scale, margin, 5.0 * scale), (-5.0 * scale, 5.0 * scale, -5.0 * scale, -margin)]
    if v < INV_SQRT2:
        enc = theorem1_enclosure(v, params)
        d = enc.disks[0]
        X = max(1.5 * (d.center.real + d.radius), 3.0 * mc2)
        Y = max(1.5 * d.radius, mc2)
    else:
        X, Y = 4.0 * scale, 4.0 * scale
    return [(-X, X, margin, Y), (-X, X, -Y, -margin), (-mc2 + margin, mc2 - margin, -margin, margin)]


def _merge(zs, tol):
    out = []
    for z in sorted(zs, key=lambda w: (w.real, w.imag)):
        if all(abs(z - o) > tol for o in out):
            out.append(z)
    return out


def cmd_scan(cfg: RunConfig, report: Report, threads: int = 1) -> None:
    params, alpha = cfg.params, cfg.alpha
    pot = cfg.potential
    if pot is None:
        raise ConfigError("potential", "scan needs a potential")
    bc = BoundaryCondition.from_alpha(alpha)
    v = cfg.coupling
    mc2 = params.rest_energy
    scale = max(1.0, mc2)
    margin = cfg.scan.spectrum_margin or 1e-3 * scale
    rects = cfg.scan.regions or default_regions(params, v, margin)
    tol = cfg.tolerances
    report.add("certificate", name="coupling", v=v, m=params.m, c=params.c, alpha=alpha)
    report.say(f"scan: v = {_fmt(v)}, alpha = {_fmt(alpha)}, {len(rects)} regions")

    def evans_job(rect):
        region = ScanRegion(*rect, spectrum_margin=margin)
        w = winding_count(region, pot, bc, params)
        return w, find_zeros(region, pot, bc, params)

    quad = quadrature_for(pot, cfg.scan.bs_nodes)

    def bs_job(rect):
        return bs_locate(rect, pot, bc, params, quad, grid=cfg.scan.bs_grid)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        ev = list(ex.map(lambda r: _guard(evans_job, r), rects))
        bs = list(ex.map(lambda r: _guard(bs_job, r), rects))

    wind_rows, zero_rows = [], []
    evans_z, bs_z = [], []
    for rect, (res, err) in zip(rects, ev):
        if err is not None:
            report.numerical_failure = True
            report.add("certificate", name="evans-region", rect=list(rect), verdict=False, error=str(err))
            continue
        w, zeros = res
        report.add("winding", rect=list(rect), count=w)
        wind_rows.append(list(rect) + [w])
        if sum(z.multiplicity for z in zeros) != w:
            report.verdict("winding-matches-zeros", False, rect=list(rect), winding=w,
                           found=sum(z.multiplicity for z in zeros))
        for z in zeros:
            evans_z.append(z.z)
            report.add("zero", method="evans", z=z.z, multiplicity=z.multiplicity,
                       residual=z.residual, newton_iters=z.newton_iters)
    for rect, (res, err) in zip(rects, bs):
        if err is not None:
            report.numerical_failure = True
            report.add("certificate", name="bs-region", rect=list(rect), verdict=False, error=str(err))
            continue
        bs_z.extend(res)
    bs_z = _merge(bs_z, 1e-8 * scale)
    for z in bs_z:
        report.add("zero", method="birman-schwinger", z=z)

    # agreement of the two methods
    agree_tol = tol.agreement
    for z in evans_z:
        d = min((abs(z - b) for b in bs_z), default=math.inf)
        ok = d <= agree_tol * (1 + abs(z))
        report.verdict("methods-agree", ok, z=z, distance=d)
    for b in bs_z:
        d = min((abs(b - z) for z in evans_z), default=math.inf)
        if d > agree_tol * (1 + abs(b)):
            report.verdict("methods-agree", False, z=b, distance=d, note="birman-schwinger root without evans zero")

    # enclosure membership
    enc = None
    if v < INV_SQRT2:
        enc = theorem1_enclosure(v, params)
        if cfg.fault_radius_scale is not None and params.massive:
            enc = EnclosureRegion(disks=[Disk(d.center, d.radius * cfg.fault_radius_scale) for d in enc.disks],
                                  info=enc.info)
            report.add("certificate", name="fault-injection", radius_scale=cfg.fault_radius_scale)
    t2 = params.massive and (_is_alpha(alpha, 0.0) or _is_alpha(alpha, math.pi / 2))
    herm_gap = None
    if params.massive and pot.is_hermitian and v < SQRT3_2 and t2:
        herm_gap = hermitian_gap(v, alpha, params).excluded_gap
    moment_point = None
    if t2 and moment_exclusion(pot.moments, params):
        moment_point = mc2 if _is_alpha(alpha, 0.0) else -mc2

    for z in evans_z:
        row = [z.real, z.imag]
        if enc is not None:
            if params.massive:
                m = enc.margin(z)
                inside = m >= -tol.enclosure * scale
                pm = enc.info["printed"].margin(z)
                inside_p = pm >= -tol.enclosure * scale
                report.verdict("inside-derived-disks", inside, z=z, margin=m)
                report.verdict("inside-printed-disks", inside_p, z=z, margin=pm)
            else:
                inside = inside_p = False
                m = pm = -math.inf
                report.verdict("massless-no-zeros", False, z=z)
            row += [m, pm]
        else:
            row += ["", ""]
        if t2:
            thr = float(theorem2_threshold_many([z], params, alpha)[0])
            report.verdict("refined-threshold", thr <= (v / 2) * (1 + 1e-8), z=z, threshold=thr, level=v / 2)
            row.append(thr)
        else:
            row.append("")
        if herm_gap is not None:
            real = abs(z.imag) <= tol.real_axis * scale
            outside = not (herm_gap[0] < z.real < herm_gap[1])
            report.verdict("hermitian-gap", real and outside, z=z, gap=list(herm_gap))
        if moment_point is not None:
            dist = abs(z - moment_point)
            report.verdict("moment-exclusion", dist >= 0.1 * scale, z=z, point=moment_point, distance=dist)
        zero_rows.append(row)
    report.table("winding", ["re_lo", "re_hi", "im_lo", "im_hi", "count"], wind_rows)
    report.table("zeros", ["re", "im", "derived_margin", "printed_margin", "refined_threshold"], zero_rows)
    report.say(f"evans zeros: {len(evans_z)}; birman-schwinger roots: {len(bs_z)}")
    for z in evans_z:
        report.say(f"  z = {_fmt(z.real)} {'+' if z.imag >= 0 else '-'} {_fmt(abs(z.imag))}i")
    report.say("all verdicts pass" if not report.failed else "VERDICT FAILURE")


def _guard(fn, arg):
    try:
        return fn(arg), None
    except NumericalError as exc:
        return None, exc


# -- nrlimit ---------------------------------------------------------------------------

def cmd_nrlimit(cfg: RunConfig, report: Report, threads: int = 1) -> None:
    if "params" in cfg.raw and cfg.raw["params"].get("m", 0.5) != 0.5:
        raise ConfigError("params.m", "the non-relativistic limit is normalized to m = 1/2")
    nr = cfg.nrlimit
    rows = []
    for branch in nr.branches:
        for alpha in nr.alphas:
            tab = rate_check(nr.z, nr.c_list, alpha, branch)
            for r in tab.rows:
                report.add("rate-row", branch=branch, alpha=alpha, bc=tab.bc_type, c=r.c, D=r.D,
                           D_nontrivial=r.D_nontrivial, D_off=r.D_off, ratio=r.ratio)
                rows.append([branch, alpha, tab.bc_type, r.c, r.D, r.D_nontrivial, r.D_off,
                             "" if r.ratio is None else r.ratio])
            ok = all(0.4 <= q <= 0.6 for q in tab.ratios) and 0.9 <= tab.exponent <= 1.1
            report.verdict("rate", ok, branch=branch, alpha=alpha, bc=tab.bc_type, ratios=tab.ratios,
                           exponent=tab.exponent, exponent_nontrivial=tab.exponent_nontrivial,
                           constant_A=tab.constant_A)
            report.verdict("off-blocks-decay", tab.off_blocks_decay, branch=branch, alpha=alpha)
            report.say(f"rate {branch} alpha={_fmt(alpha)} ({tab.bc_type}): ratios "
                       + ", ".join(f"{q:.4f}" for q in tab.ratios) + f"; exponent {tab.exponent:.4f}")
    report.table("rate", ["branch", "alpha", "bc", "c", "D", "D_nontrivial", "D_off", "ratio"], rows)
    for row in bc_limit_table():
        report.add("certificate", name="bc-limit-map", **row)
        report.say(f"bc limit: branch {row['branch']}, alpha {row['alpha']} -> {row['limit']}")
    red = schrodinger_reduction_check(nr.t, nr.magnitudes)
    for r in red.rows:
        report.add("rate-row", name="schrodinger-reduction", magnitude=r.magnitude, z=r.z, ratio=r.ratio)
    report.table("reduction", ["magnitude", "ratio"], [[r.magnitude, r.ratio] for r in red.rows])
    report.verdict("schrodinger-reduction", abs(red.final_ratio - 1.0) <= 1e-3, final_ratio=red.final_ratio,
                   g=red.g_value, constant=red.schrodinger_constant)
    report.say(f"reduction: final ratio {red.final_ratio:.8f}; |z|^(1/2) <= {_fmt(red.schrodinger_constant)}"
               f" g(cot(theta/2)) ||V||_1")


# -- selftest --------------------------------------------------------------------------

def cmd_selftest(cfg: RunConfig | None, report: Report, threads: int = 1) -> None:
    """Fast invariant checks of every module."""
    rng = np.random.default_rng(20240601)
    P = PhysicalParams()

    report.verdict("g(0) = 1", abs(g_of_b(0.0).value - 1.0) < 1e-10)
    bs = rng.uniform(-20, 20, 10)
    G0 = np.concatenate([G_many("minus", np.zeros(10), bs)[0], G_many("plus", np.zeros(10), bs)[0]])
    report.verdict("G(0, b) = sqrt(2)", bool(np.all(np.abs(G0 - math.sqrt(2)) < 1e-10)))
    report.verdict("G(a, 0) closed form", abs(G_many("minus", [0.3], [0.0])[0][0] - G_at_b_zero("minus", 0.3)) < 1e-10)

    worst = 0.0
    for _ in range(5):
        z = complex(rng.uniform(-0.9, 0.9), rng.uniform(0.05, 1.0) * rng.choice([-1, 1]))
        sp = compute_spectral_point(z, P)
        for a in (0.0, math.pi / 2):
            bc = BoundaryCondition.from_alpha(a)
            worst = max(worst, abs(supnorm_numeric(sp, bc).value - supnorm_closed(sp, a)))
    report.verdict("sup-norm closed form", worst < 1e-8, worst=worst)

    enc = theorem1_enclosure(0.5, P)
    report.verdict("v = 1/2 radii", abs(enc.disks[0].radius - 0.75) < 1e-14 and abs(enc.info["r0_printed"] - 1.5) < 1e-14)

    V = rng.normal(size=(20, 2, 2)) + 1j * rng.normal(size=(20, 2, 2))
    h, ah = polar_halves(V)
    report.verdict("polar identity", float(np.max(np.abs(h @ ah - V))) < 1e-10)

    zero = Potential([scalar_term("step", 0.0, 1.0, 0.0)])
    zs = np.array([0.3 + 0.4j, -0.7 - 0.2j])
    bc = BoundaryCondition.from_alpha(math.pi / 3)
    err = float(np.max(np.abs(evans_values(zs, zero, bc, P) - free_evans(zs, bc, P))))
    report.verdict("free evans function", err < 1e-9, error=err)

    pot = Potential([scalar_term("step", 0.0, 1.0, -0.3)])
    bcn = BoundaryCondition.from_alpha(math.pi / 2)
    ev = find_zeros(ScanRegion(-0.99, 0.99, -0.5, 0.5), pot, bcn, P)
    bsr = bs_locate((-0.99, 0.99, -0.5, 0.5), pot, bcn, P, quadrature_for(pot, 64), grid=10)
    ok = len(ev) == len(bsr) == 1 and abs(ev[0].z - bsr[0]) < 1e-6
    report.verdict("evans vs birman-schwinger", ok, evans=[z.z for z in ev], bs=bsr)

    tab = rate_check(complex(-1, 0.5), [10, 20, 40], math.pi / 4)
    report.verdict("nr rate", all(0.4 <= q <= 0.6 for q in tab.ratios), ratios=tab.ratios)
    for rec in report.records:
        if rec["kind"] == "certificate":
            p = rec["payload"]
            report.say(f"{'PASS' if p['verdict'] else 'FAIL'}  {p['name']}")


# -- entry point -----------------------------------------------------------------------

COMMANDS = {"enclosure": cmd_enclosure, "scan": cmd_scan, "nrlimit": cmd_nrlimit, "selftest": cmd_selftest}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="halfdirac", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--out", type=Path, default=Path("halfdirac-out"), help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker threads for independent scan regions")
    p.add_argument("--tol-scale", type=float, default=1.0, help="multiply all verdict tolerances")
    p.add_argument("--timestamp", default=None, help=argparse.SUPPRESS)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config is not None:
            cfg = load_config(args.config)
        else:
            if args.command not in ("selftest", "nrlimit"):
                raise ConfigError("--config", f"'{args.command}' needs a configuration file")
            cfg = parse_config({"params": {"m": 0.5}} if args.command == "nrlimit" else {})
        if args.tol_scale <= 0:
            raise ConfigError("--tol-scale", "must be > 0")
        cfg.tolerances = cfg.tolerances.scaled(args.tol_scale)
        report = Report(args.command, cfg.digest())
        try:
            COMMANDS[args.command](cfg, report, args.threads)
        except NumericalError as exc:
            report.numerical_failure = True
            report.add("certificate", name="numerical", verdict=False, error=str(exc))
            report.say(f"numerical failure: {exc}")
        report.write(args.out, args.timestamp)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    for line in report.lines:
        print(line)
    return report.exit_code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
