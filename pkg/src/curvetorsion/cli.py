"""Command-line front end: analyze curves, check the Jacobian identity,
and run the operator estimators.

Exit codes: 0 success, 2 usage, 3 input/parse (including degenerate
curves), 4 numerical failure, 5 verification failure.  Failures print a
machine-readable error JSON to stdout and write no partial outputs; all
stochastic commands require explicit seeds.
"""

from __future__ import annotations

import json
import math
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import reports
from .curves import CurveGamma, torsion_triple
from .decomposition import admissible, affine_retry, classify_regions
from .errors import (
    CurveTorsionError,
    DegenerateTorsion,
    NonConvergence,
    RetriesExhausted,
    RootFindingFailed,
    SegmentHitsSingularity,
)
from .jacobian import QuadratureSpec, Triple, jacobian_identity_trials
from .operators import (
    BallSpec,
    GridSpec,
    MeasurableSet,
    PQPair,
    ball_measure_check,
    extension,
    norm_ratio_scan,
    pairing,
    weighted_l1_mass,
)
from .verification import geometric_ratio, verify_region

EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NUMERICAL = 4
EXIT_VERIFICATION = 5

_NUMERICAL_ERRORS = (NonConvergence, RootFindingFailed, SegmentHitsSingularity, RetriesExhausted)


class _Failure(Exception):
    def __init__(self, exc: BaseException, code: int):
        super().__init__(str(exc))
        self.exc = exc
        self.code = code


def _fail(exc: BaseException, code: int):
    raise _Failure(exc, code)


def _out_dir(out) -> Path:
    path = Path(out or os.environ.get("CURVETORSION_OUT", "."))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_curve(path: str) -> CurveGamma:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return CurveGamma.from_json(data)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        _fail(exc, EXIT_INPUT)


def _parse_center(text: str):
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 6:
        raise click.BadParameter("expected six comma-separated reals (re1,im1,...)")
    return (
        complex(vals[0], vals[1]),
        complex(vals[2], vals[3]),
        complex(vals[4], vals[5]),
    )


def _run(fn):
    try:
        fn()
    except _Failure as failure:
        click.echo(reports.canonical_json(reports.error_json(failure.exc)), nl=False)
        sys.exit(failure.code)
    except _NUMERICAL_ERRORS as exc:
        click.echo(reports.canonical_json(reports.error_json(exc)), nl=False)
        sys.exit(EXIT_NUMERICAL)
    except CurveTorsionError as exc:
        click.echo(reports.canonical_json(reports.error_json(exc)), nl=False)
        sys.exit(EXIT_INPUT)


@click.group()
def main():
    """Torsion decompositions and operator estimates for polynomial curves."""


@main.command()
@click.argument("curve_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, required=True, help="Master seed for all sampling.")
@click.option("--eps", type=float, default=None, help="Sector width override.")
@click.option("--samples", type=click.IntRange(min=1), default=1000,
              help="Triples per region for ratio verification.")
@click.option("--retry/--no-retry", default=True,
              help="Perturb the curve when inadmissible regions appear.")
@click.option("--exploratory", is_flag=True,
              help="Also sample inadmissible regions (reported, never asserted).")
@click.option("--out", type=click.Path(file_okay=False), default=None)
def analyze(curve_file, seed, eps, samples, retry, exploratory, out):
    """Decompose, verify, and map a curve: writes decomposition.json,
    verification.json, and regions.svg."""

    def body():
        curve = _load_curve(curve_file)
        tt = torsion_triple(curve)
        if tt.degenerate:
            _fail(DegenerateTorsion("curve torsion vanishes identically"), EXIT_INPUT)
        report = classify_regions(tt, eps=eps, seed=seed)
        used_curve = curve
        if retry and report.inadmissible():
            used_curve, _amap, report = affine_retry(curve, report)
            tt_used = torsion_triple(used_curve)
        else:
            tt_used = tt
        entries = []
        skipped = []
        for idx, region in enumerate(report.regions):
            region_seed = int(
                np.random.default_rng([seed & 0x7FFFFFFF, idx]).integers(0, 2**31 - 1)
            )
            if admissible(region.sigma):
                rep = verify_region(used_curve, region, region.sigma, samples,
                                    region_seed, tt=tt_used)
                entries.append(rep.to_json())
            elif exploratory:
                rep = verify_region(used_curve, region, region.sigma, samples,
                                    region_seed, exploratory=True, tt=tt_used)
                entries.append(rep.to_json())
            else:
                skipped.append({"region_id": region.region_id,
                                "reason": "inadmissible",
                                "sigma": list(region.sigma.sigma)})
        out_dir = _out_dir(out)
        curve_json = used_curve.to_json()
        reports.write_json(out_dir / "decomposition.json",
                           reports.decomposition_json(report, curve_json))
        reports.write_json(out_dir / "verification.json",
                           reports.verification_json(curve_json, entries, skipped, seed))
        (out_dir / "regions.svg").write_text(reports.svg_region_map(report),
                                             encoding="utf-8")
        click.echo(f"regions={report.region_count} verified={len(entries)} "
                   f"skipped={len(skipped)}")

    _run(body)


@main.command("jacobian-check")
@click.argument("curve_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--trials", type=click.IntRange(min=1), required=True)
@click.option("--seed", type=int, required=True)
@click.option("--nodes", type=int, default=16)
@click.option("--box-radius", type=float, default=1.0,
              help="Half-width of the sampling box for triples.")
@click.option("--margin", type=float, default=0.35,
              help="Minimum pole distance for a triple to count as admissible.")
@click.option("--out", type=click.Path(file_okay=False), default=None)
def jacobian_check(curve_file, trials, seed, nodes, box_radius, margin, out):
    """Compare the integral and direct Jacobian on random admissible triples."""

    def body():
        curve = _load_curve(curve_file)
        tt = torsion_triple(curve)
        if tt.degenerate:
            _fail(DegenerateTorsion("curve torsion vanishes identically"), EXIT_INPUT)
        result = jacobian_identity_trials(
            curve, trials, seed,
            q=QuadratureSpec(nodes_per_segment=nodes),
            box_radius=box_radius, margin=margin,
        )
        payload = {
            "schema_version": reports.SCHEMA_VERSION,
            "kind": "jacobian_check",
            "curve": curve.to_json(),
            "nodes": nodes,
            "seed": seed,
            "box_radius": box_radius,
            "margin": margin,
            **result,
        }
        reports.write_json(_out_dir(out) / "jacobian_check.json", payload)
        click.echo(
            f"passes={result['passes']} failures={result['failures']} "
            f"excluded={result['excluded_count']} "
            f"worst={result['worst_relative_deviation']:.3e}"
        )
        if result["failures"] > 0 or result["passes"] < trials:
            sys.exit(EXIT_VERIFICATION)

    _run(body)


@main.group()
def operator():
    """Convolution, pairing, and extension estimators."""


@operator.command("pairing")
@click.argument("curve_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, required=True)
@click.option("--n-mc", type=click.IntRange(min=1), default=100_000)
@click.option("--disk-radius", type=float, default=1.0)
@click.option("--e-kind", type=click.Choice(["ball", "box"]), default="ball")
@click.option("--e-center", type=str, default="0,0,0,0,0,0")
@click.option("--e-size", type=float, default=1.0)
@click.option("--f-kind", type=click.Choice(["ball", "box"]), default="ball")
@click.option("--f-center", type=str, default="0,0,0,0,0,0")
@click.option("--f-size", type=float, default=1.0)
@click.option("--out", type=click.Path(file_okay=False), default=None)
def operator_pairing(curve_file, seed, n_mc, disk_radius, e_kind, e_center,
                     e_size, f_kind, f_center, f_size, out):
    """Restricted weak-type pairing estimate for a set pair."""

    def body():
        curve = _load_curve(curve_file)
        E = MeasurableSet(kind=e_kind, center=_parse_center(e_center), size=e_size)
        F = MeasurableSet(kind=f_kind, center=_parse_center(f_center), size=f_size)
        rep = pairing(curve, E, F, disk_radius, n_mc, seed)
        payload = {
            "schema_version": reports.SCHEMA_VERSION,
            "kind": "weak_type",
            "curve": curve.to_json(),
            "seed": seed,
            "disk_radius": disk_radius,
            "set_e": E.to_json(),
            "set_f": F.to_json(),
            "report": rep.to_json(),
        }
        out_dir = _out_dir(out)
        reports.write_json(out_dir / "weaktype.json", payload)
        fields = ["pairing", "alpha", "beta", "rwt_ratio", "mc_samples", "mc_stderr",
                  "volume_e", "volume_f", "weak_type_gap"]
        (out_dir / "weaktype.csv").write_text(
            reports.rows_to_csv([rep.to_json()], fields), encoding="utf-8"
        )
        click.echo(f"pairing={rep.pairing:.6g} rwt_ratio={rep.rwt_ratio:.6g}")

    _run(body)


@operator.command("ball-measure")
@click.option("--k-prime", type=click.IntRange(min=0), required=True)
@click.option("--x", type=float, required=True)
@click.option("--out", type=click.Path(file_okay=False), default=None)
def operator_ball_measure(k_prime, x, out):
    """Weighted measure of the calibrated ball against x / 8."""

    def body():
        spec = BallSpec(x=x, k_prime=k_prime)
        sigma, target = ball_measure_check(spec)
        payload = {
            "schema_version": reports.SCHEMA_VERSION,
            "kind": "ball_measure",
            "k_prime": k_prime,
            "x": x,
            "nu": spec.nu,
            "radius": spec.radius,
            "sigma_measure": sigma,
            "target": target,
        }
        reports.write_json(_out_dir(out) / "ball_measure.json", payload)
        click.echo(f"{sigma:.6g} vs target {target:.6g}")
        if abs(sigma - target) > 1e-12 * max(1.0, abs(target)):
            sys.exit(EXIT_VERIFICATION)

    _run(body)


def _scan_family():
    def bump(w):
        mag2 = np.abs(w) ** 2
        return np.exp(-2.0 * mag2)

    def ramp(w):
        return w * np.exp(-np.abs(w) ** 2)

    def plateau(w):
        return np.where(np.abs(w) <= 1.0, 1.0 + 0.0j, 0.0j)

    return [("bump", bump, 3.0), ("ramp", ramp, 3.0), ("plateau", plateau, 1.0)]


@operator.command("scan")
@click.argument("curve_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--theta", type=str, default="0.25,0.5,0.75",
              help="Comma-separated theta values for the exponent family.")
@click.option("--q-extra", type=str, default="",
              help="Extra rows 'p:q' separated by commas (q may be 'inf').")
@click.option("--dilations", type=str, default="1.0")
@click.option("--grid-half-width", type=float, default=4.0)
@click.option("--grid-points", type=click.IntRange(min=2), default=4)
@click.option("--n-quad", type=int, default=16)
@click.option("--out", type=click.Path(file_okay=False), default=None)
def operator_scan(curve_file, theta, q_extra, dilations, grid_half_width,
                  grid_points, n_quad, out):
    """Output/input norm-ratio table over exponent pairs and test functions."""

    def body():
        curve = _load_curve(curve_file)
        pairs = [PQPair.from_theta(float(t)) for t in theta.split(",") if t.strip()]
        for chunk in (c for c in q_extra.split(",") if c.strip()):
            p_txt, q_txt = chunk.split(":")
            pairs.append(PQPair(p=float(p_txt), q=math.inf if q_txt == "inf" else float(q_txt)))
        dils = tuple(float(d) for d in dilations.split(",") if d.strip())
        grid = GridSpec(half_width=grid_half_width, points_per_axis=grid_points)
        table = norm_ratio_scan(curve, pairs, _scan_family(), grid,
                                n_quad=n_quad, dilations=dils)
        out_dir = _out_dir(out)
        payload = {
            "schema_version": reports.SCHEMA_VERSION,
            "kind": "norm_scan",
            "curve": curve.to_json(),
            "grid": {"half_width": grid_half_width, "points_per_axis": grid_points},
            "n_quad": n_quad,
            "rows": reports.json_sanitize(table["rows"]),
            "flatness": reports.json_sanitize(table["flatness"]),
        }
        reports.write_json(out_dir / "scan.json", payload)
        fields = ["p", "q", "theta", "function", "dilation", "lq_norm", "lp_norm", "ratio"]
        (out_dir / "scan.csv").write_text(
            reports.rows_to_csv(table["rows"], fields), encoding="utf-8"
        )
        click.echo(f"rows={len(table['rows'])}")

    _run(body)


@operator.command("extension-endpoint")
@click.argument("curve_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, required=True)
@click.option("--points", type=click.IntRange(min=1), default=50)
@click.option("--n-quad", type=int, default=24)
@click.option("--out", type=click.Path(file_okay=False), default=None)
def operator_extension_endpoint(curve_file, seed, points, n_quad, out):
    """Check |extension(f)(z)| <= weighted L1 mass of f at sampled z."""

    def body():
        curve = _load_curve(curve_file)
        rng = np.random.default_rng(seed)
        rows = []
        violations = 0
        for name, f, support in _scan_family():
            mass = weighted_l1_mass(curve, f, n_quad, support)
            coords = rng.uniform(-5.0, 5.0, size=(points, 6))
            zs = coords[:, :3] + 1j * coords[:, 3:]
            for z in zs:
                val = abs(extension(curve, f, z, n_quad, support,
                                    check_convergence=False))
                ok = val <= mass * (1.0 + 1e-12)
                violations += 0 if ok else 1
                rows.append({"function": name,
                             "z": [[c.real, c.imag] for c in z],
                             "value": val, "mass": mass, "ok": ok})
        payload = {
            "schema_version": reports.SCHEMA_VERSION,
            "kind": "extension_endpoint",
            "curve": curve.to_json(),
            "seed": seed,
            "n_quad": n_quad,
            "violations": violations,
            "rows": rows,
        }
        reports.write_json(_out_dir(out) / "extension_endpoint.json", payload)
        click.echo(f"checked={len(rows)} violations={violations}")
        if violations:
            sys.exit(EXIT_VERIFICATION)

    _run(body)


@main.command("replay")
@click.argument("verification_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--region-id", type=str, required=True)
def replay(verification_file, region_id):
    """Recompute the stored worst witness of a region report."""

    def body():
        try:
            with open(verification_file, "r", encoding="utf-8") as fh:
                data = json.load(fh)
            curve = CurveGamma.from_json(data["curve"])
            entry = next(r for r in data["reports"] if r["region_id"] == region_id)
        except (OSError, ValueError, KeyError, StopIteration) as exc:
            _fail(exc, EXIT_INPUT)
        witness = entry["worst_witness"]
        t = Triple(*(complex(re, im) for re, im in witness["triple"]))
        sample = geometric_ratio(curve, t)
        match = abs(sample.ratio - witness["ratio"]) <= 1e-9 * max(1.0, witness["ratio"])
        click.echo(reports.canonical_json({
            "region_id": region_id,
            "stored_ratio": witness["ratio"],
            "recomputed_ratio": sample.ratio,
            "match": match,
        }), nl=False)
        if not match:
            sys.exit(EXIT_VERIFICATION)

    _run(body)


if __name__ == "__main__":
    main()
