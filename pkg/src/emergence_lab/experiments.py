"""Named, reproducible experiment pipelines.

Each pipeline reads its settings from a flat config dict, writes CSV,
JSON and two-column ``.dat`` files through an :class:`Outputs` collector and
returns a list of checks. Only the manifest carries timestamps, so reruns
with the same config and seed give byte-identical data files.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import config as C
from .cloud import coarse_cloud, quadrature_cloud, sample_cloud
from .covering import measure_space_covering_bounds
from .dynamics import catalog, identity, mul_k
from .emergence import (
    emergence_curve,
    local_emergence_order,
    local_order_comparison,
    metric_emergence,
    periodic_measure_packing,
    topological_emergence_lower,
    ball_masses,
)
from .entropy import default_entropy_settings, katok_entropy, local_dimension, topological_entropy
from .lyapunov import lyapunov, ruelle_check, spectrum_from_orbit
from .periodic import equidistribution_profile, periodic_count, periodic_points, verify_periodic
from .scaling import growth_exponent, order_of
from .spaces import uniform_measure
from .transport import w1_distance

MANIFEST = "manifest.json"
LOG2 = math.log(2.0)
CAT_ENTROPY = math.log((3.0 + math.sqrt(5.0)) / 2.0)


def fmt(value) -> str:
    """CSV cell: 17 significant digits for floats, ``;``-joined sequences."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (tuple, list)):
        return ";".join(fmt(v) for v in value)
    return str(value)


def _plain(obj):
    """JSON-safe copy: tuples to lists, numpy scalars to Python, NaN to None."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return None if not math.isfinite(obj) else float(obj)
    return obj


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Outputs:
    """Writes data files into one directory and remembers their names."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.files = []

    def _write(self, name, text):
        (self.root / name).write_text(text)
        self.files.append(name)

    def csv(self, name, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
        self._write(name, buf.getvalue())

    def text(self, name, text):
        self._write(name, text)

    def dat(self, name, rows, comment=""):
        lines = [f"# {comment}\n"] if comment else []
        lines += [f"{fmt(x)} {fmt(y)}\n" for x, y in rows]
        self._write(name, "".join(lines))

    def json(self, name, obj):
        self._write(name, json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


def _check(checks, name, passed, detail=""):
    checks.append(Check(name, bool(passed), detail))


def _curve_dat(out, name, curve, column="N_upper"):
    out.dat(name, [(-math.log(e), math.log(v)) for e, v in zip(curve.eps_grid, curve.column(column)) if v > 0], f"-log(eps) log({column})")


# -- pipelines ----------------------------------------------------------------


def identity_order(cfg, seed, out):
    eps = C.get_floats(cfg, "eps.grid", (0.2, 0.1, 0.05, 0.025))
    sampling = C.get_str(cfg, "cloud.sampling", "grid")
    sizes = {"unit_interval": C.get_int(cfg, "cloud.M", 1000), "square": C.get_int(cfg, "cloud.M_square", 1600)}
    n = C.get_int(cfg, "orbit.n", 1)
    restarts = C.get_int(cfg, "restarts", 10)
    checks, rows = [], []
    bands = {"unit_interval": (1.0, 0.2), "square": (2.0, 0.3)}
    for space, M in sizes.items():
        sys = identity(space)
        if sampling == "grid":
            cloud = quadrature_cloud(sys, M, n)
        elif sampling == "random":
            cloud = sample_cloud(sys, M, n, seed)
        else:
            raise C.ConfigError("cloud.sampling must be 'grid' or 'random'")
        curve = emergence_curve(cloud, eps, restarts, seed)
        out.text(f"emergence_{space}.csv", curve.to_csv())
        _curve_dat(out, f"emergence_{space}.dat", curve)
        up = growth_exponent(list(zip(eps, curve.column("N_upper"))))
        lows = [(e, v) for e, v in zip(eps, curve.column("N_lower")) if v > 0]
        low = growth_exponent(lows).slope if len(set(v for _, v in lows)) > 1 else math.nan
        rows.append((space, len(cloud), up.slope, up.stderr, low, order_of(list(zip(eps, curve.column("N_upper")))).slope))
        target, tol = bands[space]
        _check(checks, f"growth exponent on {space} within {target:g}±{tol:g}", abs(up.slope - target) <= tol, fmt(up.slope))
        _check(checks, f"N_lower<=N_upper on {space}", all(a <= b for a, b in zip(curve.column("N_lower"), curve.column("N_upper"))))
    out.csv("order.csv", ["space", "cloud_size", "growth_exponent", "growth_stderr", "lower_growth_exponent", "order"], rows)
    return checks


def ergodic_doubling(cfg, seed, out):
    sys = C.system_from_config(cfg, "mul_2")
    M = C.get_int(cfg, "cloud.M", 100)
    n = C.get_int(cfg, "orbit.n", 100_000)
    eps = C.get_floats(cfg, "eps.grid", (0.2, 0.1, 0.05))
    target = C.get_float(cfg, "eps.check", 0.05)
    cloud = sample_cloud(sys, M, n, seed, C.get_str(cfg, "cloud.reference", "uniform"))
    curve = emergence_curve(cloud, eps, C.get_int(cfg, "restarts", 10), seed)
    out.text("emergence.csv", curve.to_csv())
    _curve_dat(out, "emergence.dat", curve)
    if target in curve.eps_grid:
        rec = curve.records[curve.eps_grid.index(target)]
    else:
        rec = metric_emergence(cloud, target, C.get_int(cfg, "restarts", 10), seed)
    leb = uniform_measure(sys.space, C.get_int(cfg, "reference.size", 1 << 16))
    dist = [w1_distance(m, leb) for m in cloud.members]
    out.csv("members.csv", ["member", "start", "w1_to_lebesgue"], [(j, s, d) for j, (s, d) in enumerate(zip(cloud.starts[:, 0], dist))])
    out.json("provenance.json", curve.provenance)
    return [Check(f"E({target:g})=1", rec.N_upper == 1, f"N_upper={rec.N_upper} residual={fmt(rec.mean_residual)}")]


def entropy_suite(cfg, seed, out):
    systems = catalog()
    if "systems" in cfg:
        systems = {s.name: s for s in (C.system_from_name(x) for x in cfg["systems"].split(","))}
    C.note(cfg, "systems", tuple(systems))
    n_orbit = C.get_int(cfg, "orbit.n", 100_000)
    starts = C.get_int(cfg, "lyapunov.starts", 16)
    rows, estimates, checks = [], [], []
    for name, sys in systems.items():
        st = default_entropy_settings(sys)
        top = topological_entropy(sys, st["top_eps"], st["top_n"], st["budget"], seed)
        kat = katok_entropy(sys, "uniform", st["katok_eps"], st["katok_delta"], st["katok_n"], st["katok_samples"], seed)
        rep = ruelle_check(sys, "uniform", kat.value, n_orbit, starts, seed)
        estimates += [top.to_dict(), kat.to_dict()]
        out.dat(f"cover_{name}.dat", list(zip(top.n_grid, top.log_counts)), "n log(cover count)")
        rows.append((name, top.value, top.residual, kat.value, kat.residual, rep.sum_positive, rep.sum_positive_max, rep.derivative_bound, rep.passed, top.flags + kat.flags + rep.flags))
        _check(checks, f"h_katok<=h_top+0.07 ({name})", kat.value <= top.value + 0.07, f"{fmt(kat.value)} vs {fmt(top.value)}")
        _check(checks, f"ruelle ({name})", rep.passed, f"h={fmt(rep.entropy)} sigma+={fmt(rep.sum_positive)} bound={fmt(rep.derivative_bound)}")
        if sys.kind == "mul_k" and sys.params[0] == 2:
            _check(checks, "h_top(mul_2)=log2±0.05", abs(top.value - LOG2) <= 0.05, fmt(top.value))
            _check(checks, "h_katok(mul_2)=log2±0.07", abs(kat.value - LOG2) <= 0.07, fmt(kat.value))
            lam = lyapunov(sys, 0.1234, 1000).exponents[0]
            _check(checks, "lyapunov(mul_2)=log2", lam == LOG2, fmt(lam))
            d, _ = local_dimension(uniform_measure(sys.space, 1 << 16), (0.02, 0.01, 0.005), 100, seed)
            _check(checks, "|h-lambda*d|<=0.1 (mul_2)", abs(kat.value - lam * d) <= 0.1, f"h={fmt(kat.value)} lambda*d={fmt(lam * d)}")
        if sys.kind == "rotation":
            _check(checks, "h_top(rotation)<=0.02", top.value <= 0.02, fmt(top.value))
        if sys.kind == "cat_map":
            _check(checks, "h_top(cat_map)=log(golden^2)±0.1", abs(top.value - CAT_ENTROPY) <= 0.1, fmt(top.value))
            ex = lyapunov(sys, (0.1234, 0.5678), 10_000).exponents
            _check(checks, "cat_map exponents within 1e-6", abs(ex[0] - CAT_ENTROPY) <= 1e-6 and abs(ex[1] + CAT_ENTROPY) <= 1e-6, fmt(ex))
    header = ["system", "h_top", "h_top_residual", "h_katok", "h_katok_residual", "sum_positive", "sum_positive_max", "derivative_bound", "ruelle_passed", "flags"]
    out.csv("entropy.csv", header, rows)
    out.json("estimates.json", estimates)
    return checks


def covering_measure_space(cfg, seed, out):
    space = C.get_str(cfg, "space", "unit_interval")
    eps = C.get_floats(cfg, "eps.grid", (0.4, 0.3, 0.2, 0.15))
    budget = C.get_int(cfg, "budget", 20_000)
    rows, checks = [], []
    for e in eps:
        b = measure_space_covering_bounds(space, e, budget, seed)
        rows.append((e, b.lower, b.upper, b.truncated, b.candidates))
        _check(checks, f"lower<=upper at eps={e:g}", b.lower <= b.upper, f"{b.lower} <= {b.upper}")
    out.csv("covering.csv", ["eps", "lower", "upper", "truncated", "candidates"], rows)
    order = order_of([(r[0], r[2]) for r in rows])
    lorder = order_of([(r[0], r[1]) for r in rows])
    out.dat("covering_upper.dat", order.points, "-log(eps) log(log(upper))")
    out.dat("covering_lower.dat", lorder.points, "-log(eps) log(log(lower))")
    out.csv("order.csv", ["bound", "order", "stderr", "usable_scales", "flags"], [
        ("upper", order.slope, order.stderr, order.usable_scale_count, order.flags),
        ("lower", lorder.slope, lorder.stderr, lorder.usable_scale_count, lorder.flags),
    ])
    if space == "unit_interval":
        _check(checks, "order of upper bound in [0.6,1.4]", 0.6 <= order.slope <= 1.4, fmt(order.slope))
    return checks


def topological_emergence_doubling(cfg, seed, out):
    sys = C.system_from_config(cfg, "mul_2")
    p = C.get_int(cfg, "max_period", 8)
    eps = C.get_floats(cfg, "eps.grid", (0.2, 0.1, 0.05, 0.025))
    rows = [(e, p, topological_emergence_lower(sys, p, e), len(periodic_measure_packing(sys, p, e))) for e in eps]
    checks = []
    for a, b in zip(rows, rows[1:]):
        _check(checks, f"lower bound at eps={b[0]:g} >= at eps={a[0]:g}", b[2] >= a[2], f"{b[2]} >= {a[2]}")
    cloud_rows = []
    if sys.kind == "mul_k" and sys.params[0] == 2:
        M = C.get_int(cfg, "cloud.M", 60)
        n = C.get_int(cfg, "orbit.n", 10_000)
        cloud = sample_cloud(sys, M, n, seed, "bernoulli_mixture")
        for e in eps:
            cover = len(periodic_measure_packing(sys, p, e / 2.0))
            rec = metric_emergence(cloud, e, C.get_int(cfg, "restarts", 10), seed)
            cloud_rows.append((e, rec.N_upper, cover))
            _check(checks, f"N_upper(bernoulli cloud, {e:g})<=periodic cover at {e / 2:g}", rec.N_upper <= cover, f"{rec.N_upper} <= {cover}")
        out.csv("variational.csv", ["eps", "cloud_N_upper", "periodic_cover_half_eps"], cloud_rows)
    out.csv("topological_emergence.csv", ["eps", "max_period", "lower_bound", "packing_at_eps"], rows)
    out.dat("topological_emergence.dat", [(-math.log(r[0]), math.log(r[2])) for r in rows], "-log(eps) log(lower_bound)")
    return checks


def periodic_equidistribution(cfg, seed, out):
    sys = C.system_from_config(cfg, "mul_2")
    periods = C.get_ints(cfg, "periods", range(6, 17))
    prof = equidistribution_profile(sys, periods, C.get_int(cfg, "reference.size", 1 << 20))
    rows, checks = [], []
    for n, w in prof:
        pp = periodic_points(sys, n)
        verify_periodic(pp)
        rows.append((n, pp.count, math.log(pp.count) / n, w))
        if sys.kind in ("mul_k", "tent"):
            expected = sys.params[0] ** n - 1 if sys.kind == "mul_k" else 2**n
            _check(checks, f"count(n={n})={expected}", pp.count == expected == periodic_count(sys, n))
    w1s = [r[3] for r in rows]
    _check(checks, "W1 to Lebesgue strictly decreasing", all(b < a for a, b in zip(w1s, w1s[1:])), fmt(w1s))
    _check(checks, f"W1 < 0.01 at n={rows[-1][0]}", w1s[-1] < 0.01, fmt(w1s[-1]))
    if sys.kind in ("mul_k", "tent"):
        h = math.log(sys.params[0] if sys.kind == "mul_k" else 2)
        _check(checks, f"log(count)/n within 0.01 of entropy at n={rows[-1][0]}", abs(rows[-1][2] - h) <= 0.01, fmt(rows[-1][2]))
    out.csv("equidistribution.csv", ["n", "count", "log_count_over_n", "w1_to_lebesgue"], rows)
    out.dat("equidistribution.dat", [(r[0], r[3]) for r in rows], "n w1_to_lebesgue")
    return checks


def standard_map_survey(cfg, seed, out):
    sys = C.system_from_config(cfg, "standard_map")
    M = C.get_int(cfg, "cloud.M", 60)
    n = C.get_int(cfg, "orbit.n", 10_000)
    bins = C.get_int(cfg, "bins", 12)
    eps = C.get_floats(cfg, "eps.grid", (0.2, 0.1, 0.07, 0.05))
    cloud = sample_cloud(sys, M, n, seed)
    if sys.dim == 2 and bins > 0:
        cloud = coarse_cloud(cloud, bins)
    curve = emergence_curve(cloud, eps, C.get_int(cfg, "restarts", 10), seed)
    out.text("emergence.csv", curve.to_csv())
    _curve_dat(out, "emergence.dat", curve)
    d = sys.space.box_dimension
    out.dat("reference_line.dat", [(-math.log(e), d / 2.0 * -math.log(e)) for e in eps], f"-log(eps) (d/2)*(-log(eps)), d={d}")
    rows = []
    for j, x in enumerate(cloud.starts):
        spec = spectrum_from_orbit(sys, sys.orbit(x, n))
        rows.append((j, *np.atleast_1d(x), spec.sum_positive))
    cols = ["member", "x", "sum_positive"] if sys.dim == 1 else ["member", "x", "y", "sum_positive"]
    out.csv("lyapunov.csv", cols, rows)
    out.json("provenance.json", curve.provenance)
    return []


def local_order_probe(cfg, seed, out):
    eps = C.get_floats(cfg, "eps.grid", (0.2, 0.1, 0.05, 0.025, 0.0125))
    M = C.get_int(cfg, "cloud.M", 500)
    n = C.get_int(cfg, "orbit.n", 10_000)
    restarts = C.get_int(cfg, "restarts", 10)
    probes = {
        "identity": (sample_cloud(identity("unit_interval"), M, 1, seed), None),
        "mul_2": (sample_cloud(mul_k(2), max(100, M // 5), n, seed), uniform_measure("circle", 1 << 16)),
    }
    mass_rows, order_rows, checks = [], [], []
    for name, (cloud, centre) in probes.items():
        centre = cloud.members[0] if centre is None else centre
        masses = ball_masses(cloud, centre, eps)
        est = local_emergence_order(cloud, centre, eps)
        curve = emergence_curve(cloud, eps[:4], restarts, seed)
        cmp = local_order_comparison(cloud, eps, C.get_int(cfg, "centres", 20), curve)
        mass_rows += [(name, e, m) for e, m in zip(eps, masses)]
        order_rows.append((name, est.slope, est.stderr, cmp["mean_local_order"], cmp["usable_centres"], cmp["global_order"], est.flags))
        out.dat(f"local_{name}.dat", est.points, "-log(eps) log(-log(mass))")
        _check(checks, f"ball mass nondecreasing in eps ({name})", np.all(np.diff(masses) <= 0))
    out.csv("ball_masses.csv", ["probe", "eps", "mass"], mass_rows)
    out.csv("local_order.csv", ["probe", "local_order", "stderr", "mean_local_order", "usable_centres", "global_order", "flags"], order_rows)
    return checks


@dataclass(frozen=True)
class Experiment:
    name: str
    claim: str
    pipeline: object


EXPERIMENTS = {
    e.name: e
    for e in [
        Experiment("identity_order", "identity map: emergence of Lebesgue grows like eps^-d (d = 1 interval, 2 square)", identity_order),
        Experiment("ergodic_doubling", "ergodic Lebesgue measure (x -> 2x mod 1): emergence is 1 at every scale", ergodic_doubling),
        Experiment("entropy_suite", "Katok and topological entropy, variational principle, Ruelle inequality, h = lambda*d", entropy_suite),
        Experiment("covering_measure_space", "covering number of the measures on [0,1] under W1 has order 1", covering_measure_space),
        Experiment("topological_emergence_doubling", "topological emergence of x -> 2x mod 1 bounds metric emergence from above", topological_emergence_doubling),
        Experiment("periodic_equidistribution", "periodic points of x -> 2x mod 1 equidistribute to the maximal-entropy measure", periodic_equidistribution),
        Experiment("standard_map_survey", "KAM-type systems: emergence at least of order eps^(-d/2) (exploratory, no checks)", standard_map_survey),
        Experiment("local_order_probe", "local order of emergence at an ergodic measure versus the global order (probe)", local_order_probe),
    ]
}


def run_experiment(name: str, cfg: dict, seed: int, out_dir) -> dict:
    """Run one experiment and write its manifest; returns the manifest."""
    if name not in EXPERIMENTS:
        raise KeyError(name)
    exp = EXPERIMENTS[name]
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    out = Outputs(out_dir)
    cfg = C.RunConfig(cfg)
    checks = exp.pipeline(cfg, seed, out)
    finished = datetime.now(timezone.utc).isoformat(timespec="seconds")
    manifest = {
        "experiment": name,
        "claim": exp.claim,
        "config": dict(sorted(cfg.items())),
        "resolved_config": _plain(dict(sorted(cfg.resolved.items()))),
        "seed": seed,
        "started": started,
        "finished": finished,
        "files": [{"name": f, "sha256": sha256_file(out.root / f)} for f in out.files],
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks],
        "passed": all(c.passed for c in checks),
    }
    (out.root / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def verify_manifest(out_dir) -> tuple[bool, list[str]]:
    """Re-hash the listed files; ``(ok, problems)``. Failed checks count as problems."""
    root = Path(out_dir)
    manifest = json.loads((root / MANIFEST).read_text())
    problems = []
    for f in manifest["files"]:
        path = root / f["name"]
        if not path.exists():
            problems.append(f"missing file {f['name']}")
        elif sha256_file(path) != f["sha256"]:
            problems.append(f"hash mismatch {f['name']}")
    problems += [f"failed check: {c['name']} ({c['detail']})" for c in manifest["checks"] if not c["passed"]]
    return not problems, problems
