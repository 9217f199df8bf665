"""Command-line interface: ``nalin <subcommand> ...``.

Every subcommand writes one TSV report (header line first) to standard output or
``--out`` and a short human summary to standard error.  Randomized runs start their
report with a ``# seed <s>`` line.  Exit status: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import dictatorship as dt
from . import fourier as fr
from . import lin as ln
from . import reduction as rd
from . import solvers as sv
from .errors import NalinError
from .group import (abelian_decomposition, commutator_subgroup, conjugacy_classes, load_group,
                    quotient)
from .reps import irreps_of


class Report:
    def __init__(self, out_path=None):
        self.lines = []
        self.out_path = out_path

    def comment(self, text):
        self.lines.append(f"# {text}")

    def row(self, *cells):
        self.lines.append("\t".join(str(c) for c in cells))

    def flush(self):
        text = "\n".join(self.lines) + ("\n" if self.lines else "")
        if self.out_path:
            with open(self.out_path, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def say(msg):
    print(msg, file=sys.stderr)


def _read(path):
    with open(path) as fh:
        return fh.read()


def _group(source):
    """Catalog name, or a path to a group file."""
    try:
        return load_group(source)
    except NalinError:
        if os.path.exists(source):
            return load_group(_read(source))
        raise


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    if isinstance(x, (complex, np.complexfloating)):
        return f"{x.real:.12g}"
    return str(x)


# ---------------------------------------------------------------- group / irreps


def cmd_group(args, rep):
    g = _group(args.name)
    comm = commutator_subgroup(g)
    q = quotient(g, comm)
    dec = abelian_decomposition(q.table)
    sizes = sorted(len(c) for c in conjugacy_classes(g))
    rep.row("key", "value")
    rep.row("name", g.name)
    rep.row("order", g.order)
    rep.row("abelian", "yes" if g.is_abelian() else "no")
    rep.row("commutator_order", len(comm))
    rep.row("abelianization", "[" + ",".join(map(str, dec.factors)) + "]")
    rep.row("class_sizes", "/".join(map(str, sizes)))
    rep.row("center_order", len(g.center()))
    rep.row("exponent", g.exponent())
    try:
        s = irreps_of(g)
        rep.row("irrep_dims", ",".join(map(str, s.dims)))
    except NalinError as exc:
        rep.row("irrep_dims", f"unavailable ({exc})")
    say(f"{g.name}: order {g.order}, |[G,G]| = {len(comm)}")


def cmd_check_irreps(args, rep):
    g = _group(args.group)
    s = irreps_of(g, validate=False)
    res = s.validate(strict=False)
    rep.row("check", "residual")
    for k, v in res.items():
        rep.row(k, _fmt(v))
    rep.row("irrep", "dim")
    for r in s:
        rep.row(r.name, r.dim)
    s.validate(strict=True)
    say(f"{g.name}: {len(s)} irreps validated")


# ---------------------------------------------------------------- fourier


def cmd_fourier(args, rep):
    g = _group(args.group) if args.group else None
    if args.action == "check":
        rep.comment(f"seed {args.seed}")
        s = irreps_of(g)
        rng = np.random.default_rng(args.seed)
        worst = {"inversion": 0.0, "parseval": 0.0, "plancherel": 0.0, "convolution": 0.0}
        for _ in range(args.samples):
            f = fr.random_scalar(g, args.n, rng)
            h = fr.random_scalar(g, args.n, rng)
            tf, th = fr.fourier_transform(f, s), fr.fourier_transform(h, s)
            worst["inversion"] = max(worst["inversion"],
                                     np.abs(fr.inverse_transform(tf).values - f.values).max())
            worst["parseval"] = max(worst["parseval"],
                                    abs(np.mean(np.abs(f.values) ** 2) - tf.parseval_rhs()))
            worst["plancherel"] = max(worst["plancherel"],
                                      abs(f.inner(h) - fr.plancherel_rhs(tf, th)))
            conv = fr.fourier_transform(fr.convolve(f, h), s)
            worst["convolution"] = max(worst["convolution"],
                                       max(np.abs(m - tf.coeffs[a] @ th.coeffs[a]).max()
                                           for a, m in conv))
        rep.row("identity", "max_residual", "ok")
        for k, v in worst.items():
            rep.row(k, _fmt(v), "yes" if v <= 1e-8 else "no")
        say(f"{g.name}^{args.n}: {args.samples} random functions checked")
        if any(v > 1e-8 for v in worst.values()):
            say("error: an identity residual exceeds 1e-8")
            return 1
    elif args.action == "transform":
        f = fr.parse_function(_read(args.fn))
        if isinstance(f, fr.GroupFunctionTable):
            raise NalinError("transform expects a complex-valued table")
        s = irreps_of(f.group)
        t = fr.fourier_transform(f, s, budget=args.budget)
        rep.row("alpha", "dim", "weight", "w2", "hs_norm")
        for a, m in t:
            rep.row(",".join(s[c].name for c in a), a.dim, a.weight, a.w2, _fmt(fr.hs_norm(m)))
    elif args.action == "bnp":
        rep.comment(f"seed {args.seed}")
        rng = np.random.default_rng(args.seed)
        rep.row("trial", "lhs", "rhs", "D", "ok", "note")
        bad = 0
        for i in range(args.samples):
            f = fr.random_scalar(g, 1, rng, mean_zero=True)
            h = fr.random_scalar(g, 1, rng)
            r = fr.bnp_check_group(f, h)
            bad += not r.ok
            rep.row(i, _fmt(r.lhs), _fmt(r.rhs), r.D, "yes" if r.ok else "no", r.note or "-")
        say(f"{g.name}: {args.samples - bad}/{args.samples} pairs within the bound")
        if bad:
            say(f"error: {bad} pairs violate the convolution bound")
            return 1


# ---------------------------------------------------------------- lin


def _write_instance(inst, path):
    text = ln.serialize_instance(inst)
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_lin(args, rep):
    action = args.action
    if action == "gen":
        g = _group(args.group)
        inst, planted = ln.generate_planted(g, args.vars, args.constraints, args.k, args.seed)
        _write_instance(inst, args.out)
        if args.planted_out:
            with open(args.planted_out, "w") as fh:
                fh.write(" ".join(map(str, planted)) + "\n")
        say(f"seed {args.seed}: {inst.m} constraints over {g.name}, {inst.num_vars} vars")
        return "raw"
    inst = ln.parse_instance(_read(args.instance))
    if action == "eval":
        a = np.array([int(x) for x in args.assignment.replace(",", " ").split()])
        if len(a) != inst.num_vars:
            raise NalinError(f"assignment has {len(a)} values, instance has {inst.num_vars} vars")
        rep.row("value")
        rep.row(_fmt(ln.evaluate(inst, a)))
        return
    if action == "solve":
        r = sv.brute_force(inst, cap=args.budget)
    else:
        r = sv.folklore_approx(inst)
    rep.row(*sv.TSV_HEADER)
    rep.row(r.tsv_row(timing=args.timing))
    rep.comment("assignment " + " ".join(map(str, r.best_assignment)))
    say(f"{r.method}: value {r.best_value:.6g}")


# ---------------------------------------------------------------- dictatorship test


def _dict_function(args, g):
    kind = args.function
    if kind == "dictator":
        return dt.make_dictator(args.coord, args.n, g)
    if kind == "random":
        return dt.make_random_folded(args.n, g, args.seed)
    if kind == "witness":
        return dt.make_tightness_witness(args.n, g, args.seed)
    if kind == "constant":
        return dt.make_constant(args.n, g, 0)
    f = fr.parse_function(_read(kind), group=g)
    if not isinstance(f, fr.GroupFunctionTable):
        raise NalinError("dict-test expects a group-valued table")
    return f


def cmd_dict_test(args, rep):
    g = _group(args.group)
    f = _dict_function(args, g)
    cfg = dt.DictTestConfig(f.n, args.epsilon, args.mode, args.samples, args.seed)
    rep.comment(f"seed {args.seed}")
    res = dt.test_pass_probability(f, cfg)
    header = ["function", "epsilon", "mode", "p", "ci"]
    cells = [args.function, _fmt(args.epsilon), res.mode, _fmt(res.p), _fmt(res.ci_halfwidth)]
    if args.mode == "exact":
        try:
            s = irreps_of(g)
            terms = dt.pass_prob_irrep_decomposition(f, cfg, s)
            header += [f"T_{i}" for i in range(len(terms))]
            cells += [_fmt(complex(t)) for t in terms]
        except NalinError:
            pass
    rep.row(*header)
    rep.row(*cells)
    say(f"{args.function} on {g.name}^{f.n}: p = {res.p:.6g}")


# ---------------------------------------------------------------- reduction


def cmd_reduce(args, rep):
    action = args.action
    if action == "gen":
        lc, lab = rd.generate_toy_lc(args.kind, args.sides[0], args.sides[1],
                                     args.alphabets[0], args.alphabets[1], args.seed)
        text = rd.serialize_lc(lc)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if lab is not None and args.labels_out:
            with open(args.labels_out, "w") as fh:
                fh.write(rd.serialize_labeling(lab))
        say(f"seed {args.seed}: {len(lc.edges)} edges")
        return "raw"
    g = _group(args.group)
    lc = rd.parse_lc(_read(args.lc))
    if action == "build":
        red = rd.reduce(lc, g, mode=args.mode, seed=args.seed, samples=args.samples,
                        cap=args.budget)
        _write_instance(red.instance, args.out)
        say(f"{red.instance.m} constraints, {red.num_vars} variables")
        return "raw"
    lab = rd.parse_labeling(_read(args.labeling))
    red = rd.reduce(lc, g, mode=args.mode, seed=args.seed, samples=args.samples, cap=args.budget)
    if action == "verify":
        value = rd.reduced_value(red, rd.longcode_assignment(lc, lab, red))
        rep.row("lc_value", "reduced_value", "num_vars", "expected_vars", "constraints")
        rep.row(_fmt(rd.lc_value(lc, lab)), _fmt(value), red.num_vars,
                rd.expected_num_vars(lc, g.order), red.instance.m)
        say(f"long-code value {value:.12g}")
        return
    s = irreps_of(g)
    rho = s.by_name(args.irrep) if args.irrep else next(r for r in s if r.dim >= 2)
    tables = rd.longcode_tables(lc, lab, g)
    rep.comment(f"seed {args.seed}")
    d = rd.fourier_decode(red, tables, rho, tuple(args.indices), s, seed=args.seed,
                          trials=args.samples)
    rep.row("lc_value", "mean_value", "bottom_rate", "expected_value", "labeling")
    lab_txt = "-" if d.labeling is None else (
        "u=" + ",".join(map(str, d.labeling[0])) + ";v=" + ",".join(map(str, d.labeling[1])))
    rep.row(_fmt(d.lc_value), _fmt(d.mean_value), _fmt(d.bottom_rate), _fmt(d.expected_value),
            lab_txt)


def cmd_params(args, rep):
    order = _group(args.group).order if args.group else args.order
    p = rd.soundness_params(args.delta, order, args.d0)
    rep.row("key", "value")
    for k, v in p.items():
        rep.row(k, _fmt(v) if not isinstance(v, bool) else ("yes" if v else "no"))


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the report (or generated file) here")
    common.add_argument("--timing", action="store_true", help="fill elapsed_ms columns")

    p = argparse.ArgumentParser(prog="nalin", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("group", parents=[common], help="group structure summary",
                       description="TSV columns: key, value.")
    g.add_argument("name", help="catalog name (S3, Z4, S3×Z2, ...) or group file")
    g.add_argument("info", nargs="?", choices=["info"], default="info")
    g.set_defaults(func=cmd_group)

    c = sub.add_parser("check-irreps", parents=[common], help="validate the irreps of a group",
                       description="TSV columns: check, residual; then irrep, dim.")
    c.add_argument("--group", required=True)
    c.set_defaults(func=cmd_check_irreps)

    f = sub.add_parser("fourier", parents=[common], help="Fourier identities and transforms",
                       description="check: identity, max_residual, ok.  transform: alpha, dim, "
                                   "weight, w2, hs_norm.  bnp: trial, lhs, rhs, D, ok, note.")
    f.add_argument("action", choices=["check", "transform", "bnp"])
    f.add_argument("--group")
    f.add_argument("--n", type=int, default=1)
    f.add_argument("--samples", type=int, default=100)
    f.add_argument("--fn", help="fn v1 table for 'transform'")
    f.add_argument("--budget", type=int, default=fr.MAX_TABLE)
    f.set_defaults(func=cmd_fourier)

    def lin_args(sp):
        sp.add_argument("--instance", help="lin v1 file")
        sp.add_argument("--group")
        sp.add_argument("--vars", type=int, default=8)
        sp.add_argument("--constraints", type=int, default=40)
        sp.add_argument("--k", type=int, default=3)
        sp.add_argument("--assignment", help="comma separated element ids for 'eval'")
        sp.add_argument("--planted-out", help="'gen': write the planted assignment here")
        sp.add_argument("--budget", type=int, default=sv.BRUTE_CAP)

    lp = sub.add_parser("lin", parents=[common], help="Max-k-LIN instances",
                        description="solve/approx TSV columns: " + ", ".join(sv.TSV_HEADER)
                                    + ".  eval: value.")
    lp.add_argument("action", choices=["solve", "approx", "eval", "gen"])
    lin_args(lp)
    lp.set_defaults(func=cmd_lin)
    for name in ("solve", "approx"):
        sp = sub.add_parser(name, parents=[common], help=f"alias of 'lin {name}'",
                            description="TSV columns: " + ", ".join(sv.TSV_HEADER) + ".")
        lin_args(sp)
        sp.set_defaults(func=cmd_lin, action=name)

    d = sub.add_parser("dict-test", parents=[common], help="three-query dictatorship test",
                       description="TSV columns: function, epsilon, mode, p, ci, T_0..T_r "
                                   "(per-irrep terms, exact mode).")
    d.add_argument("--group", required=True)
    d.add_argument("--n", type=int, default=2)
    d.add_argument("--function", default="dictator",
                   help="dictator | random | witness | constant | path to an fn v1 table")
    d.add_argument("--coord", type=int, default=0)
    d.add_argument("--epsilon", type=float, default=0.0)
    d.add_argument("--mode", choices=["exact", "mc"], default="exact")
    d.add_argument("--samples", type=int, default=100_000)
    d.set_defaults(func=cmd_dict_test)

    r = sub.add_parser("reduce", parents=[common], help="Label Cover to 3-LIN",
                       description="verify: lc_value, reduced_value, num_vars, expected_vars, "
                                   "constraints.  decode: lc_value, mean_value, bottom_rate, "
                                   "expected_value, labeling.")
    r.add_argument("action", choices=["gen", "build", "verify", "decode"])
    r.add_argument("--group", default="S3")
    r.add_argument("--lc", help="lc v1 file")
    r.add_argument("--labeling", help="labeling file (lines 'u ...' and 'v ...')")
    r.add_argument("--kind", choices=["planted", "random"], default="planted")
    r.add_argument("--sides", type=int, nargs=2, default=[2, 3])
    r.add_argument("--alphabets", type=int, nargs=2, default=[2, 3])
    r.add_argument("--labels-out")
    r.add_argument("--mode", choices=["full", "sampled"], default="full")
    r.add_argument("--samples", type=int, default=200, help="sampled constraints / decode trials")
    r.add_argument("--budget", type=int, default=rd.FULL_CAP)
    r.add_argument("--irrep", help="irrep name for decoding (default: first of dim >= 2)")
    r.add_argument("--indices", type=int, nargs=3, default=[0, 0, 0], metavar=("P", "Q", "R"))
    r.set_defaults(func=cmd_reduce)

    pp = sub.add_parser("params", parents=[common], help="soundness constant calculator",
                        description="TSV columns: key, value.")
    pp.add_argument("--delta", type=float, required=True)
    pp.add_argument("--d0", type=float, required=True)
    pp.add_argument("--group")
    pp.add_argument("--order", type=int, default=6)
    pp.set_defaults(func=cmd_params)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    rep = Report(getattr(args, "out", None))
    t0 = time.perf_counter()
    try:
        mode = args.func(args, rep)
    except (NalinError, ValueError, OSError, KeyError, IndexError) as exc:
        say(f"error: {exc}")
        return 1
    if mode != "raw":
        rep.flush()
    if getattr(args, "timing", False):
        say(f"elapsed {(time.perf_counter() - t0) * 1e3:.1f} ms")
    return mode if isinstance(mode, int) else 0


if __name__ == "__main__":
    sys.exit(main())
