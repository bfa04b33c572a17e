"""Command-line driver.

Exit codes: 0 on success, 1 when a verification fails, 2 on bad input.
All outputs are data files (CSV or JSON); nothing is plotted.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import classical, collisions, nogo, pauli, qpe, streaming, textio

log = logging.getLogger("qlgca")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

FIG2_ROW = (0, 5, 2, 1, 6, 2)
NOGO_MIN_RESIDUAL = 0.1


class InputError(Exception):
    pass


def _out_path(args, default: str) -> Path:
    p = Path(args.out) if args.out else Path(default)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True)
    return p


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def _selection(args) -> tuple[str, ...]:
    if not args.collisions:
        return collisions.FHP_SELECTIONS
    return tuple(s.strip().upper() for s in args.collisions.split(",") if s.strip())


# simulate -----------------------------------------------------------------

def _initial_lattice(args):
    if args.lattice:
        try:
            model, lat = textio.parse_lattice(Path(args.lattice).read_text())
        except OSError as e:
            raise InputError(str(e)) from None
        if model != args.model:
            raise InputError(f"lattice file is for {model}, not {args.model}")
        return lat
    rng = np.random.default_rng(args.seed)
    if args.model == "d1q3":
        return classical.Lattice1D(np.array(FIG2_ROW), 3)
    if args.model == "d1q2":
        return classical.Lattice1D(rng.integers(0, 4, 64), 2)
    return classical.LatticeTri(rng.integers(0, 64, (32, 32)))


def _step(args, lat, rng):
    if args.model == "d1q3":
        return classical.d1q3_step(lat)
    if args.model == "d1q2":
        return classical.d1q2_stream(lat)
    return classical.fhp_step(lat, rng)


def cmd_simulate_classical(args) -> int:
    lat = _initial_lattice(args)
    rng = np.random.default_rng(args.seed)
    out = _out_path(args, f"{args.model}_trajectory.txt")
    series = [{"step": 0, **classical.lattice_totals(lat, args.model)}]
    frames = [textio.format_lattice(lat, args.model)]
    for t in range(1, args.steps + 1):
        lat = _step(args, lat, rng)
        series.append({"step": t, **classical.lattice_totals(lat, args.model)})
        frames.append(textio.format_lattice(lat, args.model))
    out.write_text("".join(f"# step {t}\n{f}" for t, f in enumerate(frames)))
    qpath = _sibling(out, "_quantities." + args.format)
    if args.format == "json":
        qpath.write_text(json.dumps(series, indent=2) + "\n")
    else:
        with open(qpath, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(series[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(series)
    conserved = all({k: v for k, v in s.items() if k != "step"}
                    == {k: v for k, v in series[0].items() if k != "step"} for s in series)
    print(f"final: {textio.format_lattice(lat, args.model).splitlines()[1][:200]}")
    print(f"wrote {out} and {qpath}; conserved totals: {conserved}")
    return EXIT_OK if conserved else EXIT_FAIL


# verify -------------------------------------------------------------------

CIRCUITS = {
    "d1q3-qpe": (collisions.build_d1q3_qpe_collision_circuit, collisions.d1q3_spec),
    "fhp-b234": (collisions.build_fhp_b234_circuit, collisions.fhp_spec),
}


def cmd_verify_circuit(args) -> int:
    if args.circuit_file:
        try:
            circ = textio.parse_circuit(Path(args.circuit_file).read_text())
        except OSError as e:
            raise InputError(str(e)) from None
        name = args.circuit or ("fhp-b234" if args.model == "fhp" else "d1q3-qpe")
        spec = CIRCUITS[name][1]()
    else:
        name = args.circuit or "fhp-b234"
        build, spec_fn = CIRCUITS[name]
        circ, spec = build(), spec_fn()
    report = collisions.verify_collision_circuit(circ, spec)
    out = _out_path(args, f"{name}_verification.csv")
    collisions.write_matrix_csv(report.matrix, out)
    if report.passed:
        print(f"PASS {name}: max row deviation {report.max_deviation:.3e}; wrote {out}")
        return EXIT_OK
    row = report.failing_rows[0]
    print(f"FAIL {name}: first failing row {row} "
          f"(total variation {report.row_deviation[row]:.3e}); wrote {out}")
    return EXIT_FAIL


# invariants ---------------------------------------------------------------

def cmd_invariants(args) -> int:
    sel = _selection(args)
    if sel == ("IDENTITY",):
        v = {"d1q3": 3, "fhp": 6, "d1q2": 2}[args.model]
        c, sel = np.eye(1 << v), ("identity",)
    elif args.model == "d1q3":
        c, sel = collisions.d1q3_collision_matrix(), ("collide",)
    elif args.model == "fhp":
        c = collisions.fhp_unitary_collision(sel)
    else:
        raise InputError("d1q2 has no collision; use --collisions identity")
    rep = pauli.count_invariants(c, model=args.model, collisions=sel)
    out = _out_path(args, f"{args.model}_invariants.json")
    out.write_text(rep.to_json() + "\n")
    print(f"{args.model} {','.join(sel)}: rank {rep.rank}, invariants {rep.invariant_count}; wrote {out}")
    return EXIT_OK


# qpe ----------------------------------------------------------------------

def cmd_qpe(args) -> int:
    v = qpe.MODEL_V[args.model]
    quantity = np.zeros(1 << v) if args.quantity == "constant" else args.quantity
    states = [int(s, 0) for s in args.states.split(",")] if args.states else None
    rep = qpe.spectrum_report(quantity, args.model, args.ancillas, args.convention,
                              args.rest_weight, states)
    out = _out_path(args, f"{args.model}_{args.quantity}_qpe.{args.format}")
    if args.format == "json":
        out.write_text(json.dumps({
            "quantity": args.quantity, "model": args.model, "convention": args.convention,
            "n_ancillas": args.ancillas,
            "rows": {str(s): [round(p, 15) for p in rep.rows[s].as_array()] for s in sorted(rep.rows)},
        }, indent=2) + "\n")
    else:
        rep.write_csv(out)
    hist = _sibling(out, "_histogram.csv")
    rep.write_histogram_csv(hist)
    chk = qpe.equal_quantity_equivalence_check(rep)
    print(f"equal-quantity rows identical: {chk.max_equal_tv <= qpe.ROW_TOL} "
          f"(max tv {chk.max_equal_tv:.2e}), distinct modal outcomes {chk.distinct_modes}; "
          f"wrote {out} and {hist}")
    return EXIT_OK if chk.passed else EXIT_FAIL


# nogo ---------------------------------------------------------------------

def cmd_nogo(args) -> int:
    system = nogo.nogo_constraint_system(relaxed=args.relaxed)
    cert = nogo.check_infeasible(system, restarts=args.restarts, seed=args.seed)
    out = _out_path(args, "nogo_certificate.json")
    out.write_text(cert.to_json() + "\n")
    print(f"infeasible: {cert.infeasible}; min residual {cert.min_residual:.6f}; wrote {out}")
    if args.relaxed:
        return EXIT_OK
    return EXIT_OK if cert.infeasible and cert.min_residual >= NOGO_MIN_RESIDUAL else EXIT_FAIL


# d1q2 ---------------------------------------------------------------------

def _d1q2_field(args) -> np.ndarray:
    n_pos = 1 << args.n_space
    if args.lattice:
        model, lat = textio.parse_lattice(Path(args.lattice).read_text())
        if model != "d1q2":
            raise InputError("the d1q2 command needs a d1q2 lattice file")
        return streaming.as_field(lat, args.n_space)
    f = np.zeros((n_pos, 2), dtype=np.int64)
    if args.init == "delta":
        f[n_pos // 2] = 1
    elif args.init == "block":
        f[n_pos // 2 - n_pos // 8: n_pos // 2 + n_pos // 8] = 1
    else:
        f = np.random.default_rng(args.seed).integers(0, 2, (n_pos, 2))
    return f


def cmd_d1q2(args) -> int:
    if not 1 <= args.n_space <= streaming.MAX_SPACE:
        raise InputError(f"--n-space must lie in [1, {streaming.MAX_SPACE}]")
    f = _d1q2_field(args)
    run = streaming.run_density(f, args.n_space, args.steps, args.shots or None, args.seed)
    out = _out_path(args, "d1q2_density.csv")
    run.write_csv(out)
    exact_ok = bool(np.array_equal(np.rint(run.exact), run.classical)
                    and run.max_exact_deviation < 1e-9)
    msg = f"exact deviation {run.max_exact_deviation:.2e}"
    if run.sampled is not None:
        outside = int(np.sum(np.abs(run.sampled - run.classical) > 4 * run.sigma() + 1e-12))
        msg += f"; sampled cells outside 4 sigma: {outside}"
    print(f"{msg}; wrote {out}")
    return EXIT_OK if exact_ok else EXIT_FAIL


# parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qlgca", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model_choices=("d1q3", "fhp", "d1q2"), default="d1q3", fmt=False):
        sp.add_argument("--model", choices=model_choices, default=default)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output file path")
        if fmt:
            sp.add_argument("--format", choices=("csv", "json"), default="csv",
                            help="format of the tabular output")
        return sp

    s = common(sub.add_parser("simulate", help="classical LGCA reference run"), fmt=True)
    s.add_argument("--steps", type=int, default=1)
    s.add_argument("--lattice", help="lattice text file")
    s.set_defaults(func=cmd_simulate_classical)

    s = common(sub.add_parser("verify", help="verify a collision circuit"), ("d1q3", "fhp"), "fhp")
    s.add_argument("--circuit", choices=tuple(CIRCUITS))
    s.add_argument("--circuit-file", help="circuit text file checked against --circuit's rule")
    s.set_defaults(func=cmd_verify_circuit)

    s = common(sub.add_parser("invariants", help="count quantum invariants"))
    s.add_argument("--collisions", help="comma list of B2,B3,B4 or 'identity'")
    s.set_defaults(func=cmd_invariants)

    s = common(sub.add_parser("qpe", help="phase-estimation spectra"), fmt=True)
    s.add_argument("--quantity", choices=("mass", "px", "py", "constant"), default="mass")
    s.add_argument("--ancillas", type=int, default=qpe.DEFAULT_ANCILLAS)
    s.add_argument("--convention", choices=qpe.CONVENTIONS, default="paper")
    s.add_argument("--rest-weight", type=int, default=2)
    s.add_argument("--states", help="comma list of cell states (default: all)")
    s.set_defaults(func=cmd_qpe)

    s = common(sub.add_parser("nogo", help="infeasibility certificate"))
    s.add_argument("--restarts", type=int, default=1000)
    s.add_argument("--relaxed", action="store_true", help="set all normalizations to 0")
    s.set_defaults(func=cmd_nogo)

    s = common(sub.add_parser("d1q2", help="sublinear D1Q2 streaming run"), ("d1q2",), "d1q2")
    s.add_argument("--n-space", type=int, default=6)
    s.add_argument("--steps", type=int, default=24)
    s.add_argument("--shots", type=int, default=0, help="0 for exact distributions only")
    s.add_argument("--init", choices=("delta", "block", "random"), default="delta")
    s.add_argument("--lattice", help="d1q2 lattice text file")
    s.set_defaults(func=cmd_d1q2)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "steps", 0) < 0 or getattr(args, "shots", 0) < 0:
        print("error: counts must be non-negative", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "ancillas", 1) < 1:
        print("error: --ancillas must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, textio.FormatError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
