"""Command-line front end: ``python -m reinhardt <command> ...``.

Commands ``polygon``, ``verify``, ``search``, ``table`` and ``circle``. Exit
codes: 0 success, 1 validation error, 2 numeric failure, 3 internal error.
"""

import argparse
import csv
import dataclasses
import io
import json
import math
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .control import CENTER, VERTICES, cost_rate
from .costate import hamiltonian, propagate, singular_state
from .exceptions import (BracketFailure, ChartFailure, ClosureFailure, NewtonDivergence,
                         ReinhardtError, SingularSystem, StarExit)
from .geometry import R, R_INV
from .polygon import (MINUS, PLUS, PolygonFamily, boundary_samples, build_polygon,
                      octagon_area_closed_form, shoelace_polygon_area)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_INTERNAL = 0, 1, 2, 3

TRAJECTORY_SCHEMA = "reinhardt-trajectory/1"
REPORT_SCHEMA = "reinhardt-report/1"


class ValidationError(ValueError):
    pass


# --- serialization ----------------------------------------------------------

def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if not math.isfinite(v):
        return "null"
    s = format(v, ".17g")
    return s if any(ch in s for ch in ".en") else s + ".0"


def dumps(obj, indent=1, _level=0):
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (bool, int, float, np.integer, np.floating, np.bool_)):
        return _num(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) for v in obj):
            return "[" + ", ".join(_num(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def versions():
    return {"reinhardt": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


# --- run configuration --------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    family: str = None
    k: int = None
    samples: int = 64
    out: str = None
    config: str = None
    threads: int = 1
    tol_ode: float = 1e-10
    seed: int = 0
    kmax: int = 8
    guides: bool = False

    def validate(self):
        if self.command in ("polygon", "verify"):
            if self.family not in (PLUS, MINUS):
                raise ValidationError("--family must be plus or minus")
            if self.k is None or self.k < (1 if self.family == PLUS else 2):
                raise ValidationError(f"--k {self.k} is out of range for the {self.family} family")
        if self.samples < 2:
            raise ValidationError("--samples must be at least 2")
        if self.threads < 1:
            raise ValidationError("--threads must be positive")
        if not 0 < self.tol_ode < 1:
            raise ValidationError("--tol-ode must lie in (0, 1)")
        if self.command == "table" and self.kmax < 1:
            raise ValidationError("--kmax must be at least 1")
        if self.command == "search" and not self.config:
            raise ValidationError("search needs --config")
        return self

    def as_dict(self):
        return {k: v for k, v in dataclasses.asdict(self).items() if v is not None}


# --- polygon ----------------------------------------------------------------

def trajectory_document(p, samples, config):
    """Sampled trajectory of a polygon as a JSON-ready dict."""
    tr = p.trajectory
    ts = tr.sample(samples)
    rows = {"g11": [], "g12": [], "g21": [], "g22": [], "x": [], "y": [], "control": [], "cost": []}
    for t in ts:
        g, z, _ = tr.state(t)
        for key, v in zip(("g11", "g12", "g21", "g22"), g.ravel()):
            rows[key].append(float(v))
        rows["x"].append(z.real)
        rows["y"].append(z.imag)
        rows["control"].append(int(np.argmax(tr.control(t))) + 1)
        rows["cost"].append(tr.cost(t))
    res = p.closure_residuals()
    return {
        "schema": TRAJECTORY_SCHEMA,
        "metadata": {"command": config.command, "config": config.as_dict(), "versions": versions(),
                     "family": p.family.tag, "k": p.family.k, "y_k": p.y_k, "t_k": p.t_k,
                     "theta_k": p.theta_k, "area": p.area},
        "t": ts.tolist(),
        "samples": rows,
        "switch_times": list(tr.switch_times),
        "terminal_residuals": {"g": res["g"], "z": res["z"]},
    }


def boundary_csv(p, samples):
    tr = p.trajectory
    ts = tr.sample(samples)
    br = boundary_samples(p, samples)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["branch", "t", "px", "py"])
    for j in range(6):
        for t, pt in zip(ts, br[j]):
            w.writerow([j, _num(t), _num(pt[0]), _num(pt[1])])
    return buf.getvalue()


def boundary_svg(p, samples, scale=100.0, guides=False):
    """Six branches as polylines; y is flipped so the picture is upright."""
    br = boundary_samples(p, samples)
    pad = 1.25 * scale

    def pts(arr):
        return " ".join(f"{_num(scale * x)},{_num(-scale * y)}" for x, y in arr)

    colors = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{-pad} {-pad} {2 * pad} {2 * pad}">']
    if guides:
        # hexagram: each triangle's edges pass through alternate points e_j
        tri = math.sqrt(3) * np.array([[math.cos(a), math.sin(a)] for a in
                                       (-math.pi / 2 + 2 * math.pi * i / 3 for i in range(3))])
        for t in (tri, -tri):
            lines.append(f'  <polygon class="guide" points="{pts(t)}" fill="none" '
                         f'stroke="#cccccc" stroke-width="0.5"/>')
    for j in range(6):
        lines.append(f'  <polyline class="branch" data-branch="{j}" points="{pts(br[j])}" '
                     f'fill="none" stroke="{colors[j]}" stroke-width="1"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_polygon(cfg, stdout):
    p = build_polygon(PolygonFamily(cfg.family, cfg.k))
    res = p.closure_residuals()
    M = R_INV if cfg.family == PLUS else R
    trace = float(np.trace(M @ p.trajectory.g(p.t_k)))
    label = "R^-1" if cfg.family == PLUS else "R"
    print(f"family {cfg.family} k {cfg.k}: {p.family.sides}-gon, {p.family.n_links} links", file=stdout)
    print(f"y_k = {p.y_k:.12f}, t_k = {p.t_k:.12f}, t_f = {p.t_f:.12f}", file=stdout)
    print(f"trace({label} g_k) = {trace:.15f}, 2 cos theta_k = {2 * math.cos(p.theta_k):.15f}",
          file=stdout)
    if cfg.family == PLUS and cfg.k == 1:
        print(f"octagon trace check |trace - sqrt2| = {abs(trace - math.sqrt(2)):.3e}", file=stdout)
    print(f"area = {p.area:.12f} (pi - area = {math.pi - p.area:+.3e})", file=stdout)
    print(f"shoelace area = {shoelace_polygon_area(p):.12f}", file=stdout)
    if cfg.family == PLUS and cfg.k == 1:
        print(f"closed form = {octagon_area_closed_form():.12f}", file=stdout)
    print(f"closure: |g(t_f) - R| = {res['g']:.3e}, |z(t_f) - R^-1.z(0)| = {res['z']:.3e}",
          file=stdout)
    if cfg.out:
        base = Path(cfg.out)
        base.parent.mkdir(parents=True, exist_ok=True)
        Path(f"{base}.json").write_text(dumps(trajectory_document(p, cfg.samples, cfg)) + "\n")
        Path(f"{base}_boundary.csv").write_text(boundary_csv(p, cfg.samples))
        Path(f"{base}.svg").write_text(boundary_svg(p, cfg.samples, guides=cfg.guides))
        print(f"wrote {base}.json, {base}_boundary.csv, {base}.svg", file=stdout)
    return EXIT_OK


# --- verify ---------------------------------------------------------------------

def cmd_verify(cfg, stdout):
    from .pmp import WRONG_SIGN, verify_extremal
    p = build_polygon(PolygonFamily(cfg.family, cfg.k))
    rep = verify_extremal(p)
    print(f"family {cfg.family} k {cfg.k}: lambda_cost {rep.lambda_cost_sign}, verdict {rep.verdict}",
          file=stdout)
    print(f"sup |H| = {rep.hamiltonian_sup_norm:.3e}, min dominance gap = "
          f"{min(rep.switching_margins):.3e}", file=stdout)
    print(f"transversality: Lambda {rep.transversality_residuals['Lambda']:.3e}, "
          f"nu {rep.transversality_residuals['nu']:.3e}", file=stdout)
    for reason in rep.reasons:
        print(f"  - {reason}", file=stdout)
    if cfg.out:
        doc = {"schema": REPORT_SCHEMA,
               "metadata": {"command": "verify", "config": cfg.as_dict(), "versions": versions()},
               "report": rep.to_dict()}
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.out).write_text(dumps(doc) + "\n")
    if cfg.family == PLUS:
        return EXIT_OK if rep.passed else EXIT_NUMERIC
    # minus family: every check except the multiplier sign is expected to hold
    expected = rep.lambda_cost_sign == WRONG_SIGN and rep.reasons == [
        "multiplier lambda_cost has the wrong sign"]
    if expected:
        print("wrong_sign multiplier as expected for the 6k-2 family (informative)", file=stdout)
    return EXIT_OK if expected else EXIT_NUMERIC


# --- search ---------------------------------------------------------------------

SEARCH_KEYS = {"lo", "hi", "center", "half_width", "resolution", "options", "out"}


def load_search_config(path):
    """Read a JSON box specification; unknown keys are rejected.

    Either ``lo``/``hi`` (five numbers each) or ``half_width`` (optionally
    with ``center``; default centre is the octagon) must be given. ``options``
    overrides :class:`~reinhardt.search.ShootOptions` fields.
    """
    from .search import ShootOptions, octagon_box
    try:
        box = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(box, dict):
        raise ValidationError("config must be a JSON object")
    unknown = set(box) - SEARCH_KEYS
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    opts_box = box.get("options", {})
    fields = {f.name for f in dataclasses.fields(ShootOptions)}
    bad = set(opts_box) - fields
    if bad:
        raise ValidationError(f"unknown option keys: {sorted(bad)}")
    opts = ShootOptions(**opts_box)
    if "lo" in box or "hi" in box:
        lo, hi = np.asarray(box["lo"], float), np.asarray(box["hi"], float)
    elif "half_width" in box:
        if "center" in box:
            c = np.asarray(box["center"], float)
            lo, hi = c - box["half_width"], c + box["half_width"]
        else:
            lo, hi = octagon_box(float(box["half_width"]))
    else:
        raise ValidationError("config needs lo/hi or half_width")
    if lo.shape != (5,) or hi.shape != (5,):
        raise ValidationError("lo and hi need five coordinates")
    res = box.get("resolution", 3)
    return lo, hi, res, opts, box.get("out")


def cmd_search(cfg, stdout):
    from .search import best_hit, grid_search, table_to_csv, table_to_json
    lo, hi, res, opts, out = load_search_config(cfg.config)
    opts = dataclasses.replace(opts, rtol=cfg.tol_ode)
    table = grid_search(lo, hi, res, opts, workers=cfg.threads)
    out = cfg.out or out
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(f"{out}.csv").write_text(table_to_csv(table))
        Path(f"{out}.json").write_text(table_to_json(table) + "\n")
    counts = {}
    for _, _, o in table:
        counts[o.kind] = counts.get(o.kind, 0) + 1
    print(f"{len(table)} shots: " + ", ".join(f"{k} {v}" for k, v in sorted(counts.items())),
          file=stdout)
    best = best_hit(table)
    if best is None:
        print("best hit: none", file=stdout)
    else:
        i, r, o = best
        print(f"best hit: index {i}, cost {o.cost:.12f}, {o.n_links} links, "
              f"switch times {', '.join(f'{t:.9f}' for t in o.switch_times)}", file=stdout)
    return EXIT_OK


# --- table ------------------------------------------------------------------------

def area_table(kmax):
    """Rows ``(family, k, n, area)`` plus monotonicity flags per family."""
    rows = []
    for tag, k0 in ((PLUS, 1), (MINUS, 2)):
        prev = None
        for k in range(k0, kmax + 1):
            p = build_polygon(PolygonFamily(tag, k))
            a = p.area
            mono = True if prev is None else (a > prev if tag == PLUS else a < prev)
            side = a < math.pi if tag == PLUS else a > math.pi
            rows.append((tag, k, p.family.sides, a, mono, side))
            prev = a
    return rows


def cmd_table(cfg, stdout):
    rows = area_table(cfg.kmax)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "k", "n", "area", "pi_minus_area", "monotone", "pi_side"])
    for tag, k, n, a, mono, side in rows:
        w.writerow([tag, k, n, _num(a), _num(math.pi - a), int(mono), int(side)])
    text = buf.getvalue()
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.out).write_text(text)
    stdout.write(text)
    return EXIT_OK


# --- circle ---------------------------------------------------------------------

def circle_diagnostic(n_controls=100, seed=0, rtol=1e-12):
    """Singular arc at ``z = i``: ``H`` at random controls, drift and cost over ``[0, pi/3]``."""
    rng = np.random.default_rng(seed)
    s = singular_state()
    us = rng.dirichlet(np.ones(3), size=n_controls)
    h_max = max(abs(hamiltonian(s, u)) for u in us)
    tr = propagate(s, [(CENTER, math.pi / 3)], rtol=rtol, atol=rtol, method="DOP853")
    drift = float(np.abs(tr.Y[:, 4:11] - tr.Y[0, 4:11]).max())
    return {"hamiltonian_max": float(h_max), "state_drift": drift, "cost": float(tr.final.cost),
            "cost_rate": cost_rate(1j), "vertex_hamiltonians": [hamiltonian(s, e) for e in VERTICES]}


def cmd_circle(cfg, stdout):
    d = circle_diagnostic(seed=cfg.seed, rtol=min(cfg.tol_ode, 1e-12))
    print(f"circle: max |H(u)| over 100 random controls = {d['hamiltonian_max']:.3e}", file=stdout)
    print(f"state drift over [0, pi/3] = {d['state_drift']:.3e}", file=stdout)
    print(f"cost = {d['cost']:.15f}, |cost - pi| = {abs(d['cost'] - math.pi):.3e}", file=stdout)
    return EXIT_OK


COMMANDS = {"polygon": cmd_polygon, "verify": cmd_verify, "search": cmd_search,
            "table": cmd_table, "circle": cmd_circle}


def build_parser():
    ap = argparse.ArgumentParser(prog="reinhardt", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="output path (prefix for polygon)")
        sp.add_argument("--tol-ode", type=float, default=1e-10, dest="tol_ode")
        sp.add_argument("--seed", type=int, default=0)

    for name in ("polygon", "verify"):
        sp = sub.add_parser(name)
        sp.add_argument("--family", choices=(PLUS, MINUS), required=True)
        sp.add_argument("--k", type=int, required=True)
        sp.add_argument("--samples", type=int, default=64, help="samples per link")
        if name == "polygon":
            sp.add_argument("--guides", action="store_true", help="draw the hexagram guide")
        common(sp)
    sp = sub.add_parser("search")
    sp.add_argument("--config", required=True)
    sp.add_argument("--threads", type=int, default=1)
    common(sp)
    sp = sub.add_parser("table")
    sp.add_argument("--kmax", type=int, default=8)
    common(sp)
    sp = sub.add_parser("circle")
    common(sp)
    return ap


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    try:
        cfg = RunConfig(**vars(ns)).validate()
    except (ValidationError, TypeError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_VALIDATION
    try:
        return COMMANDS[cfg.command](cfg, stdout)
    except ValidationError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_VALIDATION
    except (ClosureFailure, SingularSystem, BracketFailure, NewtonDivergence, ChartFailure,
            StarExit, ReinhardtError, ArithmeticError) as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERIC
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
