"""Command-line front end: coeffs / lax / psi / verify / deform.

Conventions, stated once: the potential is V(x) = sum_k (u_k / k) x^k, so
``--potential "2=1.0,4=0.25"`` means u_2 = 1.0 and u_4 = 0.25. Every numeric
in the output is a decimal string rendered at the run's precision tag;
output is byte-identical across repeated runs with the same arguments.

Exit codes: 0 ok; 2 usage error; 3 precision failure; 4 verification
failure; 5 trust-window violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, fields

from mpmath import fabs, mpf

from .errors import (
    BreakdownAtStep,
    HankelSingular,
    OutsideTrustWindow,
    PerturbationBreaksConvergence,
    PrecisionUnreachable,
)
from .jacobi import BandedOperator, apply_polynomial
from .laxpair import cal_u_matrix, d_from_flows, d_matrix
from .moments import certified_recurrence
from .potential import Potential
from .precision import resolve, to_str, working
from .verify import (
    DeformationProbe,
    VerifyConfig,
    check_deformation,
    chebyshev_grid,
    run_all,
)
from .wavefunction import WaveState

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PRECISION = 3
EXIT_VERIFICATION = 4
EXIT_TRUST = 5


@dataclass(frozen=True)
class RunConfig:
    """Canonical, text-round-trippable form of a parsed command line."""

    command: str
    potential: str
    N: int = 0
    precision: int = 0
    n: int = -1
    n_max: int = -1
    k: int = -1
    k_max: int = -1
    fmt: str = "text"
    seed: int = 7
    x_min: str = "-4"
    x_max: str = "4"
    points: int = 33
    delta: str = "1e-8"
    x: str = ""
    only: str = ""
    fault_inject: str = ""
    tol_bits: int = 0
    tol_ode: str = ""
    tol_deform: str = ""
    json_report: bool = False

    def to_text(self) -> str:
        parts = []
        for f in fields(self):
            parts.append(f"{f.name}={getattr(self, f.name)}")
        return ";".join(parts)

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        kinds = {f.name: f.type for f in fields(cls)}
        kw = {}
        for item in text.split(";"):
            key, _, value = item.partition("=")
            kind = kinds[key]
            if kind == "int":
                kw[key] = int(value)
            elif kind == "bool":
                kw[key] = value == "True"
            else:
                kw[key] = value
        return cls(**kw)


def _add_common(sub):
    sub.add_argument(
        "--potential", required=True,
        help="coefficients 'k=value,...' of V = sum (u_k/k) x^k, "
             "e.g. '2=1.0,4=0.25'; top index must be even with positive value")
    sub.add_argument("--N", type=int, default=0,
                     help="operator truncation (default: sized from n/k)")
    sub.add_argument("--precision", type=int, default=0,
                     help="mantissa bits for the run (default 256)")
    sub.add_argument("--format", dest="fmt", choices=("json", "csv", "text"),
                     default="text", help="output format")
    sub.add_argument("--seed", type=int, default=7,
                     help="seed for sampled evaluation points")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="orthoflow",
        description=(
            "Recurrence coefficients, 2x2 derivative/deformation systems and "
            "identity verification for weights exp(-V), V = sum (u_k/k) x^k."
        ),
    )
    subs = ap.add_subparsers(dest="command", required=True)

    sp = subs.add_parser(
        "coeffs", help="certified recurrence coefficients as a table")
    _add_common(sp)
    sp.add_argument("--n-max", type=int, default=-1,
                    help="highest n to print (default: N-1)")

    sp = subs.add_parser(
        "lax", help="derivative system D_n and deformation systems calU_k")
    _add_common(sp)
    sp.add_argument("--n", type=int, required=True, help="system index n >= 1")
    sp.add_argument("--k-max", type=int, default=-1,
                    help="highest deformation order (default deg V')")

    sp = subs.add_parser("psi", help="wavefunction grid evaluation to CSV")
    _add_common(sp)
    sp.add_argument("--n", type=int, required=True, help="wavefunction index")
    sp.add_argument("--x-min", default="-4")
    sp.add_argument("--x-max", default="4")
    sp.add_argument("--points", type=int, default=33)

    sp = subs.add_parser("verify", help="run the identity check battery")
    _add_common(sp)
    sp.add_argument("--n-max", type=int, default=8)
    sp.add_argument("--k-max", type=int, default=-1)
    sp.add_argument("--json", dest="json_report", action="store_true",
                    help="machine-readable report")
    sp.add_argument("--only", default="",
                    help="comma list of check-family prefixes to run")
    sp.add_argument("--fault-inject", dest="fault_inject", default="",
                    help="'n=IDX,delta=VAL': shift gamma_IDX before checking")
    sp.add_argument("--tol-bits", type=int, default=0,
                    help="algebraic tolerance bits (default precision/2)")
    sp.add_argument("--tol-ode", default="", help="ODE residual tolerance")
    sp.add_argument("--tol-deform", default="",
                    help="deformation FD tolerance")

    sp = subs.add_parser(
        "deform", help="single FD-vs-generator deformation residual")
    _add_common(sp)
    sp.add_argument("--k", type=int, required=True, help="deformation order")
    sp.add_argument("--n", type=int, required=True, help="system index")
    sp.add_argument("--delta", default="1e-8", help="FD step in u_k")
    sp.add_argument("--x", default="", help="evaluation point (default: bulk)")

    return ap


def parse_args(argv=None) -> RunConfig:
    ns = _build_parser().parse_args(argv)
    kw = {"command": ns.command, "potential": ns.potential}
    for f in fields(RunConfig):
        if f.name in ("command", "potential"):
            continue
        if hasattr(ns, f.name):
            kw[f.name] = getattr(ns, f.name)
    return RunConfig(**kw)


def _emit(text: str):
    sys.stdout.write(text)
    if not text.endswith("\n"):
        sys.stdout.write("\n")


def _jdump(obj) -> str:
    return json.dumps(obj, indent=2)


def _csv_writer():
    return csv.writer(sys.stdout, lineterminator="\n")


def _poly_strs(poly, bits):
    return [to_str(c, bits) for c in poly.c] or [to_str(0, bits)]


def _matrix_obj(m, bits):
    return {
        "a": _poly_strs(m.a, bits),
        "b": _poly_strs(m.b, bits),
        "c": _poly_strs(m.c, bits),
        "d": _poly_strs(m.d, bits),
        "degree_bound": m.degree_bound,
    }


def cmd_coeffs(cfg: RunConfig) -> int:
    p = Potential.from_text(cfg.potential).require_confining()
    target = resolve(cfg.precision or None)
    n_hi = cfg.n_max if cfg.n_max >= 0 else -1
    N = cfg.N or (n_hi + 2 if n_hi >= 0 else 16)
    if n_hi < 0:
        n_hi = N - 1
    if n_hi >= N:
        raise ValueError(f"--n-max {n_hi} needs --N > {n_hi}")
    with working(target + 64):
        cr = certified_recurrence(p, N, precision=target)
        Q = BandedOperator.from_recurrence(cr.rc)
        vpq = apply_polynomial(p.vprime_coeffs(), Q)
        rows = []
        for n in range(0, n_hi + 1):
            diag = off = ""
            if n < vpq.trust:
                diag = to_str(fabs(vpq.entry(n, n)), target)
                if n >= 1:
                    off = to_str(
                        fabs(vpq.entry(n, n - 1) - n / cr.rc.gamma[n]), target)
            rows.append({
                "n": n,
                "gamma": to_str(cr.rc.gamma[n], target),
                "beta": to_str(cr.rc.beta[n], target),
                "h": to_str(cr.rc.h[n], target),
                "string_diagonal": diag,
                "string_offdiagonal": off,
            })
        meta = {
            "potential": p.to_text(),
            "N": N,
            "precision": target,
            "source": cr.rc.source,
            "cross_discrepancy": to_str(cr.cross_discrepancy, 64),
            "moment_boost": cr.moment_boost,
        }
    if cfg.fmt == "json":
        _emit(_jdump({**meta, "rows": rows}))
    else:
        w = _csv_writer()
        w.writerow(["n", "gamma_n", "beta_n", "h_n",
                    "string_diagonal", "string_offdiagonal"])
        for r in rows:
            w.writerow([r["n"], r["gamma"], r["beta"], r["h"],
                        r["string_diagonal"], r["string_offdiagonal"]])
    return EXIT_OK


def cmd_lax(cfg: RunConfig) -> int:
    p = Potential.from_text(cfg.potential).require_confining()
    target = resolve(cfg.precision or None)
    n = cfg.n
    if n < 1:
        raise ValueError("--n must be >= 1")
    d = max(p.vprime_degree, 1)
    k_max = cfg.k_max if cfg.k_max >= 0 else d
    N = cfg.N or (n + max(2 * d, k_max + 2) + 4)
    with working(target + 64):
        cr = certified_recurrence(p, N, precision=target)
        Q = BandedOperator.from_recurrence(cr.rc)
        dn = d_matrix(n, p, Q)
        flows = d_from_flows(n, p, Q)
        gap = (dn - flows).max_abs()
        uks = [(k, cal_u_matrix(k, n, Q)) for k in range(1, k_max + 1)]
        obj = {
            "potential": p.to_text(),
            "n": n,
            "N": N,
            "precision": target,
            "trust": Q.trust,
            "d_matrix": _matrix_obj(dn, target),
            "deformation": [
                {"k": k, "matrix": _matrix_obj(m, target)} for k, m in uks
            ],
            "flow_sum_residual": to_str(gap, 64),
        }
    if cfg.fmt == "csv":
        w = _csv_writer()
        top = max([dn.degree_bound] + [m.degree_bound for _, m in uks])
        w.writerow(["object", "k", "entry"] + [f"c{j}" for j in range(top + 1)])

        def put(tag, k, m):
            for label, poly in zip("abcd", m.entries()):
                cs = _poly_strs(poly, target)
                cs += ["0"] * (top + 1 - len(cs))
                w.writerow([tag, k, label] + cs)

        put("d_matrix", "", dn)
        for k, m in uks:
            put("deformation", k, m)
    else:
        _emit(_jdump(obj))
    return EXIT_OK


def cmd_psi(cfg: RunConfig) -> int:
    p = Potential.from_text(cfg.potential).require_confining()
    target = resolve(cfg.precision or None)
    n = cfg.n
    if n < 0:
        raise ValueError("--n must be >= 0")
    N = cfg.N or (n + 4)
    if N < n + 1:
        raise ValueError(f"--N {N} cannot evaluate psi_{n}")
    points = cfg.points
    if points < 2:
        raise ValueError("--points must be >= 2")
    with working(target + 64):
        lo, hi = mpf(cfg.x_min), mpf(cfg.x_max)
        if not hi > lo:
            raise ValueError("--x-max must exceed --x-min")
        cr = certified_recurrence(p, N, precision=target)
        state = WaveState(p, cr.rc)
        step = (hi - lo) / (points - 1)
        rows = []
        for i in range(points):
            x = lo + i * step
            rows.append((
                to_str(x, target),
                to_str(state.eval_psi(n, x), target),
                to_str(state.fd_derivative(n, x), target),
            ))
    if cfg.fmt == "json":
        _emit(_jdump({
            "potential": p.to_text(), "n": n, "precision": target,
            "rows": [
                {"x": x, "psi": ps, "fd_derivative": fd} for x, ps, fd in rows
            ],
        }))
    else:
        w = _csv_writer()
        w.writerow(["x", f"psi_{n}", "fd_derivative"])
        for row in rows:
            w.writerow(row)
    return EXIT_OK


def _parse_fault(text: str):
    if not text:
        return None
    idx = delta = None
    for item in text.split(","):
        key, _, value = item.partition("=")
        key = key.strip()
        if key == "n":
            idx = int(value)
        elif key == "delta":
            delta = value.strip()
        else:
            raise ValueError(f"bad --fault-inject field {item!r}")
    if idx is None or delta is None:
        raise ValueError("--fault-inject needs 'n=IDX,delta=VAL'")
    return idx, delta


def cmd_verify(cfg: RunConfig) -> int:
    p = Potential.from_text(cfg.potential).require_confining()
    vc = VerifyConfig(
        potential=p,
        N=cfg.N or None,
        precision=cfg.precision or None,
        n_max=cfg.n_max if cfg.n_max >= 0 else 8,
        k_max=cfg.k_max if cfg.k_max > 0 else None,
        seed=cfg.seed,
        tol_bits=cfg.tol_bits or None,
        fault_gamma=_parse_fault(cfg.fault_inject),
        checks=tuple(s for s in cfg.only.split(",") if s) or None,
    )
    if cfg.tol_ode:
        vc.ode_tol = cfg.tol_ode
    if cfg.tol_deform:
        vc.deform_tol = cfg.tol_deform
    report = run_all(vc)
    if cfg.json_report or cfg.fmt == "json":
        _emit(_jdump(report.to_json_obj()))
    else:
        _emit(report.to_text())
    return EXIT_OK if report.passed else EXIT_VERIFICATION


def cmd_deform(cfg: RunConfig) -> int:
    p = Potential.from_text(cfg.potential).require_confining()
    target = resolve(cfg.precision or None)
    k, n = cfg.k, cfg.n
    if k < 1 or n < 1:
        raise ValueError("--k and --n must be >= 1")
    N = cfg.N or (n + k + 8)
    with working(target + 64):
        cr = certified_recurrence(p, N, precision=target)
        Q = BandedOperator.from_recurrence(cr.rc)
        state = WaveState(p, cr.rc)
        if cfg.x:
            xs = [mpf(cfg.x)]
        else:
            span = 4 * max(fabs(g) for g in cr.rc.gamma[1:n + 1])
            xs = [chebyshev_grid(span, 7)[2]]
        probe = DeformationProbe(p, N, target, cr.moment_boost)
        delta = mpf(cfg.delta)
        # FD-vs-generator gap is O(delta^2); keep a floor for tiny steps
        tol = max(mpf("1e-8"), 100 * delta ** 2)
        res = check_deformation(probe, state, Q, k, n, xs, delta, tol)
    if cfg.fmt == "json":
        _emit(_jdump({
            "potential": p.to_text(), "k": k, "n": n,
            "delta": cfg.delta, "x": to_str(xs[0], 32),
            "precision": target,
            "residual": to_str(res.residual, 64),
            "tolerance": to_str(res.tolerance, 32),
            "passed": res.passed,
        }))
    else:
        mark = "PASS" if res.passed else "FAIL"
        _emit(
            f"{mark} deformation k={k} n={n} delta={cfg.delta} "
            f"x={to_str(xs[0], 32)} residual={to_str(res.residual, 64)} "
            f"tol={to_str(res.tolerance, 32)}"
        )
    return EXIT_OK if res.passed else EXIT_VERIFICATION


_HANDLERS = {
    "coeffs": cmd_coeffs,
    "lax": cmd_lax,
    "psi": cmd_psi,
    "verify": cmd_verify,
    "deform": cmd_deform,
}


def dispatch(config: RunConfig) -> int:
    handler = _HANDLERS.get(config.command)
    if handler is None:
        sys.stderr.write(f"unknown command {config.command!r}\n")
        return EXIT_USAGE
    return handler(config)


def main(argv=None) -> int:
    try:
        config = parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        return dispatch(config)
    except (PrecisionUnreachable, HankelSingular, BreakdownAtStep,
            PerturbationBreaksConvergence) as exc:
        sys.stderr.write(f"precision failure: {exc}\n")
        return EXIT_PRECISION
    except OutsideTrustWindow as exc:
        sys.stderr.write(f"trust-window violation: {exc}\n")
        return EXIT_TRUST
    except ValueError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
