"""Command-line front end: ``juliathermo <command> [flags]``.

Exit codes: 0 success, 1 invalid input, 2 numerical convergence failure,
3 verification failure (only with ``--strict``).

Primary output (JSON or CSV) is deterministic for fixed flags and seeds.
When ``--out`` is given a sidecar ``<out>.meta.json`` records wall time and
a timestamp; nothing time-dependent enters the primary file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__, kernels
from .coding_measure import BernoulliWeights, CircleMeasure, PointMass
from .errors import InputError, JuliaThermoError, NoConvergence
from .lyapunov import (
    Mode,
    QuadConfig,
    SeriesConfig,
    extract_coefficients,
    lyap_birkhoff_mc,
    lyap_conjugacy_cubic_exact,
    lyap_conjugacy_quadratic,
    lyap_dirac_closed_form,
    lyap_reduced_cubic,
    bracket_expansion_quadratic,
)
from .poly_core import cubic_map, julia_cloud, quadratic_map
from .thermo import (
    OrbitMethod,
    PotentialKind,
    PotentialSpec,
    hausdorff_dimension,
    periodic_points,
    pressure_at,
    pressure_limit,
)

SCHEMA_PATH = Path(__file__).with_name("schemas") / "output.schema.json"

COMMANDS = ("lyap", "expand", "pressure", "dimension", "orbits", "julia", "verify")

# flag name -> default applied after config-file merging
DEFAULTS: dict[str, Any] = {
    "family": "quad", "c": "0", "a1": "0", "a0": "0", "weights": None, "order": None, "depth": 48,
    "tol": None, "level": None, "method": None, "seed": None, "n": None, "s": None, "t": 0.0,
    "potential": "f", "out": None, "format": "json", "strict": False, "suite": "all", "svg": None,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("common")
    g.add_argument("--config", help="key=value file; flags override its entries")
    g.add_argument("--family", choices=("quad", "cubic"))
    g.add_argument("--c", help='quadratic parameter, "re,im" or "re"')
    g.add_argument("--a1", help='cubic parameter a1, "re,im" or "re"')
    g.add_argument("--a0", help='cubic parameter a0, "re,im" or "re"')
    g.add_argument("--weights", help='"p1,p2[,p3]", or "dirac[:k]" for the point mass on symbol k')
    g.add_argument("--order", type=int, help="series truncation order N")
    g.add_argument("--depth", type=int, help="backward recursion depth M")
    g.add_argument("--tol", type=float, help="quadrature or bisection tolerance")
    g.add_argument("--level", type=int, help="maximum quadrature level")
    g.add_argument("--method", help="estimator or solver, per command")
    g.add_argument("--seed", type=int, help="RNG seed for stochastic commands")
    g.add_argument("--n", help="period, sample count or point count, per command")
    g.add_argument("--s", help="exponent(s) of -s log|P'|, comma separated")
    g.add_argument("--t", type=float, help="coefficient of -log|P'| added to the weight potential")
    g.add_argument("--potential", choices=("f", "g"), help="f: -s log|P'|; g: log-weights")
    g.add_argument("--out", help="write primary output here (sidecar goes to <out>.meta.json)")
    g.add_argument("--format", choices=("json", "csv"))
    g.add_argument("--strict", action="store_true", default=None, help="exit 3 when a check fails")
    g.add_argument("--suite", help='criteria to run: "all" or e.g. "1,5"')
    g.add_argument("--svg", help="optional SVG plot path")
    p = _Parser(prog="juliathermo", description="Lyapunov exponents, pressure and dimension for z^2+c and z^3+a1 z+a0.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "lyap": "Lyapunov exponent for a Bernoulli measure",
        "expand": "Taylor coefficients of the Lyapunov functional",
        "pressure": "pressure from periodic points",
        "dimension": "Bowen root (Hausdorff dimension)",
        "orbits": "periodic points with multipliers and itineraries",
        "julia": "Julia-set point cloud by inverse iteration",
        "verify": "acceptance suite report",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return p


def read_config(path: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InputError(f"{path}:{lineno}: expected key=value")
        key = key.strip().lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise InputError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def resolve(ns: argparse.Namespace) -> dict[str, Any]:
    cfg = read_config(ns.config) if ns.config else {}
    out = {}
    for key, default in DEFAULTS.items():
        v = getattr(ns, key, None)
        if v is None:
            v = cfg.get(key, default)
        out[key] = v
    for key, conv in (("depth", int), ("order", int), ("level", int), ("seed", int), ("tol", float), ("t", float)):
        if out[key] is not None and not isinstance(out[key], conv):
            try:
                out[key] = conv(out[key])
            except ValueError:
                raise InputError(f"{key} must be {conv.__name__}, got {out[key]!r}") from None
    if isinstance(out["strict"], str):
        out["strict"] = out["strict"].lower() in ("1", "true", "yes", "on")
    if out["family"] not in ("quad", "cubic"):
        raise InputError("family must be quad or cubic")
    if out["format"] not in ("json", "csv"):
        raise InputError("format must be json or csv")
    return out


def parse_complex(text: str) -> complex:
    parts = str(text).split(",")
    try:
        vals = [float(x) for x in parts]
    except ValueError:
        raise InputError(f"cannot parse complex number {text!r}; use re,im") from None
    if len(vals) not in (1, 2) or not all(math.isfinite(v) for v in vals):
        raise InputError(f"cannot parse complex number {text!r}; use re,im")
    return complex(vals[0], vals[1] if len(vals) == 2 else 0.0)


def parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",")]
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from None


def parse_ints(text: str) -> list[int]:
    out = []
    for part in str(text).split(","):
        lo, sep, hi = part.partition("-")
        try:
            out.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
        except ValueError:
            raise InputError(f"expected integers or ranges a-b, got {text!r}") from None
    return out


def _seed(cfg) -> int:
    if cfg["seed"] is None:
        raise InputError("this command is stochastic; pass --seed")
    return cfg["seed"]


def _polynomial(cfg):
    if cfg["family"] == "quad":
        return quadratic_map(parse_complex(cfg["c"]))
    return cubic_map(parse_complex(cfg["a1"]), parse_complex(cfg["a0"]))


def _degree(cfg) -> int:
    return 2 if cfg["family"] == "quad" else 3


def _measure(cfg):
    d = _degree(cfg)
    w = cfg["weights"]
    if w is None:
        return CircleMeasure(BernoulliWeights.uniform(d))
    if str(w).startswith("dirac"):
        _, _, k = str(w).partition(":")
        return PointMass.dirac(d, int(k) if k else 1)
    p = parse_floats(w)
    if len(p) != d:
        raise InputError(f"{cfg['family']} needs {d} weights, got {len(p)}")
    return CircleMeasure(BernoulliWeights.normalized(p))


def _series_config(cfg) -> SeriesConfig:
    return SeriesConfig(order=cfg["order"], depth=cfg["depth"])


def _quad_config(cfg) -> QuadConfig:
    return QuadConfig(tol=cfg["tol"] if cfg["tol"] is not None else 1e-8, max_level=cfg["level"])


def _params(P) -> list:
    return [[z.real, z.imag] for z in P.params]


def cmd_lyap(cfg):
    P = _polynomial(cfg)
    measure = _measure(cfg)
    method = cfg["method"] or "conjugacy"
    sc, qc = _series_config(cfg), _quad_config(cfg)
    if method == "dirac":
        if isinstance(measure, PointMass):
            symbol = int(round(measure.angle * (P.degree - 1))) + 1
        else:
            symbol = int(np.argmax(measure.weights.p)) + 1
        est = lyap_dirac_closed_form(P, symbol)
    elif method == "mc":
        if isinstance(measure, PointMass):
            raise InputError("Monte Carlo needs a Bernoulli measure")
        n = int(cfg["n"]) if cfg["n"] is not None else 64
        est = lyap_birkhoff_mc(P, measure, n_samples=n, seed=_seed(cfg))
    elif method == "conjugacy":
        est = (lyap_conjugacy_quadratic(P.params[0], measure, sc, qc) if P.degree == 2
               else lyap_conjugacy_cubic_exact(*P.params, measure, sc, qc))
    elif method == "reduced":
        if P.degree == 2:
            value = bracket_expansion_quadratic(P.params[0], measure, qc, sc)
            result = {"value": value, "positive_exponent": -value, "method": "ReducedExpansion",
                      "error_estimate": None}
            return result, [result]
        est = lyap_reduced_cubic(*P.params, measure, sc, qc)
    else:
        raise InputError(f"unknown lyap method {method!r}; use conjugacy, mc, dirac or reduced")
    result = {"value": est.value, "positive_exponent": est.positive_exponent, "method": est.method.value,
              "error_estimate": est.error_estimate}
    return result, [result]


def cmd_expand(cfg):
    measure = _measure(cfg) if cfg["weights"] is not None else PointMass.dirac(_degree(cfg))
    mode = Mode(cfg["method"] or "reduced")
    report = extract_coefficients(cfg["family"], measure, mode, quad_config=_quad_config(cfg))
    result = report.to_dict()
    rows = result["terms"]
    strict_failed = not report.consistent or (cfg["family"] == "quad" and not report.target_ok)
    return result, rows, strict_failed


def _potential(cfg, s: float) -> PotentialSpec:
    if cfg["potential"] == "f":
        return PotentialSpec.f_s(s)
    measure = _measure(cfg)
    if isinstance(measure, PointMass):
        raise InputError("the weight potential needs strictly positive weights")
    kind = PotentialKind.LINEAR_COMBINATION if cfg["t"] else PotentialKind.LOCALLY_CONSTANT_LOG_P
    return PotentialSpec(kind, weights=measure.weights, t=cfg["t"])


def cmd_pressure(cfg):
    P = _polynomial(cfg)
    s_values = parse_floats(cfg["s"]) if cfg["s"] is not None else [1.0]
    rows = []
    if cfg["n"] is not None:
        for s in s_values:
            for n in parse_ints(cfg["n"]):
                rows.append({"s": s, "n": n, "value": pressure_at(P, _potential(cfg, s), n).value})
        return {"samples": rows}, rows
    for s in s_values:
        pl = pressure_limit(P, _potential(cfg, s))
        rows.append({"s": s, "n": None, "value": pl.value, "error_estimate": pl.error_estimate,
                     "monotone": pl.monotone})
    return {"limits": rows}, rows


def cmd_dimension(cfg):
    P = _polynomial(cfg)
    n_max = int(cfg["n"]) if cfg["n"] is not None else None
    est = hausdorff_dimension(P, n_max=n_max, tol=cfg["tol"] if cfg["tol"] is not None else 1e-7)
    result = {"dimension": est.s_star, "bracket": list(est.bracket), "periods_used": list(est.periods_used),
              "error_estimate": est.error_estimate}
    return result, [result]


def cmd_orbits(cfg):
    P = _polynomial(cfg)
    n = int(cfg["n"]) if cfg["n"] is not None else 3
    method = {"newton": OrbitMethod.NEWTON_FROM_ANGLES, "roots": OrbitMethod.POLYNOMIAL_ROOTS,
              None: OrbitMethod.NEWTON_FROM_ANGLES}.get(cfg["method"])
    if method is None:
        raise InputError("orbits method must be newton or roots")
    orbits = periodic_points(P, n, method)
    rows = [{"index": int(j), "itinerary": "".join(map(str, w.symbols)), "re": z.real, "im": z.imag,
             "multiplier_abs": abs(m)}
            for j, w, z, m in zip(orbits.angle_indices, orbits.itineraries, orbits.points, orbits.multipliers)]
    return {"period": n, "count": len(rows), "method": method.value, "points": rows}, rows


def cmd_julia(cfg):
    P = _polynomial(cfg)
    n = int(cfg["n"]) if cfg["n"] is not None else 2000
    if not 1 <= n <= 10 ** 6:
        raise InputError("point count must lie in 1..1e6")
    cloud = julia_cloud(P, n, _seed(cfg))
    rows = [{"re": z.real, "im": z.imag} for z in cloud.points]
    return {"count": n, "seed": cloud.generator_seed, "method": cloud.method, "points": rows}, rows


def cmd_verify(cfg):
    from .verification import parse_suite, run_suite

    try:
        parse_suite(cfg["suite"])
    except (KeyError, ValueError):
        raise InputError(f"unknown suite {cfg['suite']!r}") from None
    report, timing = run_suite(cfg["suite"], _seed(cfg))
    rows = [dict(criterion=c["criterion"], **chk) for c in report["criteria"] for chk in c["checks"]]
    return report, rows, not report["passed"], timing


def _clean(x):
    """JSON-safe copy: complex -> [re, im], non-finite floats -> null, numpy scalars -> Python."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [_clean(float(x.real)), _clean(float(x.imag))]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    return x


def _render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    rows = _clean(rows)
    columns = list(rows[0]) if rows else []
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else ("" if v is None else v) for k, v in r.items()})
    return buf.getvalue()


def _run(argv: Sequence[str]):
    ns = build_parser().parse_args(list(argv))
    cfg = resolve(ns)
    handler = globals()[f"cmd_{ns.command}"]
    out = handler(cfg)
    result, rows = out[0], out[1]
    strict_failed = out[2] if len(out) > 2 else False
    timing = out[3] if len(out) > 3 else None
    config = {k: v for k, v in cfg.items() if k not in ("out", "svg")}
    doc = {"command": ns.command, "version": __version__, "config": config, "result": result}
    if cfg["format"] == "csv":
        text = _render_csv(rows)
    else:
        text = json.dumps(_clean(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"
    return ns.command, cfg, text, result, strict_failed, timing


def render_command(argv: Sequence[str]) -> str:
    """Primary output text of a command run in-process (no files written)."""
    return _run(argv)[2]


def _write_svg(command: str, result: dict, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "juliathermo"
    fig, ax = plt.subplots(figsize=(5, 5))
    if command in ("julia", "orbits"):
        pts = result["points"]
        ax.scatter([p["re"] for p in pts], [p["im"] for p in pts], s=0.5, color="k")
        ax.set_aspect("equal")
        ax.set_xlabel("Re z")
        ax.set_ylabel("Im z")
    elif command == "pressure":
        rows = result.get("samples") or result.get("limits")
        ax.plot([r["s"] if r["n"] is None else r["n"] for r in rows], [r["value"] for r in rows], "o-")
        ax.set_ylabel("pressure")
    elif command == "verify":
        crit = result["criteria"]
        ax.bar([str(c["criterion"]) for c in crit], [1 if c["status"] == "pass" else 0 for c in crit])
        ax.set_xlabel("criterion")
        ax.set_ylabel("passed")
    else:
        raise InputError(f"no plot is defined for {command}")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    t0 = time.perf_counter()
    try:
        command, cfg, text, result, strict_failed, timing = _run(argv)
        if cfg["svg"]:
            _write_svg(command, result, cfg["svg"])
    except JuliaThermoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, NoConvergence) and exc.value is not None:
            print(f"best value: {_clean(np.asarray(exc.value).tolist())} (error estimate {exc.error_estimate:.3g})", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if cfg["out"]:
        Path(cfg["out"]).write_text(text, encoding="utf-8")
        meta = {"command": command, "started_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                "wall_seconds": round(time.perf_counter() - t0, 3), "backend": kernels.BACKEND,
                "criterion_seconds": timing}
        Path(cfg["out"] + ".meta.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n",
                                                   encoding="utf-8")
    else:
        sys.stdout.write(text)
    if cfg["strict"] and strict_failed:
        print("error: verification failed", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
