"""Command-line interface.

Exit codes: 0 success, 1 selfcheck failure, 2 input/parse error, 3 codec error.
CSV goes to stdout (or ``--output``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

from . import selfcheck
from .codec import read_container, write_container
from .compress import METHODS, compress, measure
from .entropy import tree_entropies
from .errors import BudgetExceeded, MalformedCode, NotNormalForm, ParseError, TreentropyError
from .strings import sn_table
from .trees import Alphabet, format_term, parse_tree
from .tslp import val
from .unranked import BOX, CSV_HEADER, fcns, profile, read_xml

EXIT_OK, EXIT_SELFCHECK, EXIT_PARSE, EXIT_CODEC = 0, 1, 2, 3


def _k_list(text):
    try:
        ks = sorted({int(part) for part in text.split(",") if part.strip()})
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not ks or ks[0] < 0:
        raise argparse.ArgumentTypeError("k values must be nonnegative")
    return ks


def _fmt(x, digits=6):
    return f"{x:.{digits}f}"


def load_tree(path):
    """Tree from a term-syntax file, or the fcns image of an XML document.

    Returns ``(tree, box)``; the box is None for term files (smallest label).
    """
    if str(path).lower().endswith(".xml"):
        return fcns(read_xml(path), BOX), BOX
    with open(path, encoding="utf-8") as fh:
        return parse_tree(fh.read()), None


def _map(fn, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


class _Output:
    def __init__(self, path):
        self.path = path
        self.fh = None

    def __enter__(self):
        self.fh = open(self.path, "w", newline="", encoding="utf-8") if self.path else sys.stdout
        return csv.writer(self.fh, lineterminator="\n")

    def __exit__(self, *exc):
        if self.path:
            self.fh.close()
        else:
            self.fh.flush()


def _err(message):
    print(f"treentropy: {message}", file=sys.stderr)


# -- entropy -----------------------------------------------------------------------------------


def _entropy_job(path, ks, box):
    try:
        t, file_box = load_tree(path)
    except (OSError, ParseError) as exc:
        return path, None, str(exc)
    box = box or file_box
    return path, (t.size, len(Alphabet.of(t, box=box)), tree_entropies(t, ks, box)), None


def cmd_entropy(args):
    results = _map(partial(_entropy_job, ks=args.k, box=args.box), args.inputs, args.jobs)
    status = EXIT_OK
    with _Output(args.output) as out:
        out.writerow(["document", "n", "sigma", "k", "Hk_bits"])
        for path, res, error in results:
            if error:
                _err(f"{path}: {error}")
                status = EXIT_PARSE
                continue
            n, sigma, hk = res
            for k in args.k:
                out.writerow([path, n, sigma, k, _fmt(hk[k])])
    return status


# -- compress / decompress -----------------------------------------------------------------------


def cmd_compress(args):
    try:
        t, box = load_tree(args.input)
    except (OSError, ParseError) as exc:
        _err(f"{args.input}: {exc}")
        return EXIT_PARSE
    box = args.box or box
    alphabet = Alphabet.of(t, box=box)
    try:
        g = compress(t, args.method)
        data = write_container(g, alphabet)
    except (NotNormalForm, BudgetExceeded) as exc:
        _err(str(exc))
        return EXIT_CODEC
    with open(args.output, "wb") as fh:
        fh.write(data)
    if args.verbose:
        print(f"{args.input}: n={t.size} m={g.m} bytes={len(data)}", file=sys.stderr)
    return EXIT_OK


def cmd_decompress(args):
    try:
        with open(args.input, "rb") as fh:
            g, _ = read_container(fh.read())
        text = format_term(val(g))
    except OSError as exc:
        _err(f"{args.input}: {exc}")
        return EXIT_PARSE
    except (MalformedCode, NotNormalForm, BudgetExceeded) as exc:
        _err(f"{args.input}: {exc}")
        return EXIT_CODEC
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


# -- measure -------------------------------------------------------------------------------------


def _measure_job(path, ks, method, box):
    try:
        t, file_box = load_tree(path)
        return path, measure(t, ks, method, box=box or file_box), None
    except (OSError, TreentropyError) as exc:
        return path, None, str(exc)


def cmd_measure(args):
    results = _map(partial(_measure_job, ks=args.k, method=args.method, box=args.box), args.inputs, args.jobs)
    status = EXIT_OK
    ok = []
    with _Output(args.output) as out:
        out.writerow(["document", "n", "sigma", "m", "code_bits", "HG_bits", "k", "Hk_bits", "code_le_Hk"])
        for path, m, error in results:
            if error:
                _err(f"{path}: {error}")
                status = EXIT_PARSE
                continue
            ok.append((path, m))
            for k in args.k:
                out.writerow(
                    [path, m.n, m.sigma, m.m, m.code_bits, _fmt(m.grammar_entropy), k, _fmt(m.hk[k]),
                     int(m.code_within_entropy(k))]
                )
    if args.plot and ok:
        from .plotting import plot_measure

        plot_measure(ok, args.plot)
    return status


# -- xml-profile ----------------------------------------------------------------------------------


def _profile_job(path, ks):
    try:
        name = os.path.splitext(os.path.basename(path))[0]
        return path, profile(read_xml(path), ks, document=name), None
    except (OSError, ParseError) as exc:
        return path, None, str(exc)


def cmd_xml_profile(args):
    results = _map(partial(_profile_job, ks=args.k), args.inputs, args.jobs)
    all_rows = []
    with _Output(args.output) as out:
        out.writerow(CSV_HEADER)
        for path, rows, error in results:
            if error:
                _err(f"{path}: {error}")
                continue
            for r in rows:
                out.writerow([r.document, r.n, r.sigma, _fmt(r.w_bits, 4), r.k, _fmt(r.hk_bits), _fmt(r.quotient_pct, 4)])
            all_rows.extend(rows)
    if args.plot and all_rows:
        from .plotting import plot_profile

        plot_profile(all_rows, args.plot)
    return EXIT_OK if all_rows or not args.inputs else EXIT_PARSE


# -- sn-table -------------------------------------------------------------------------------------


def cmd_sn_table(args):
    rows = sn_table(args.n_max, args.n_min)
    with _Output(args.output) as out:
        out.writerow(["n", "k", "Hk_bits", "bound", "holds"])
        for r in rows:
            out.writerow([r.n, r.k, _fmt(r.hk_bits), r.bound, int(r.holds)])
    if args.plot:
        from .plotting import plot_sn_table

        plot_sn_table(rows, args.plot)
    return EXIT_OK


# -- selfcheck --------------------------------------------------------------------------------------


def cmd_selfcheck(args):
    results = selfcheck.run(args.level, inject_fault=args.inject_fault)
    failed = False
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        print(f"{status} {r.name}: {r.checks - len(r.failures)}/{r.checks} checks ({r.seconds:.2f}s)")
        for message in r.failures[:5]:
            print(f"    {message}")
        failed |= not r.ok
    return EXIT_SELFCHECK if failed else EXIT_OK


# -- parser ----------------------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="treentropy", description="Tree entropy and TSLP compression tools.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, inputs=True):
        if inputs:
            sp.add_argument("inputs", nargs="+", help="term-syntax tree files (.xml files go through fcns)")
            sp.add_argument("--jobs", type=int, default=1, help="worker processes (output keeps input order)")
        sp.add_argument("-o", "--output", help="write CSV here instead of stdout")

    e = sub.add_parser("entropy", help="k-th order empirical entropy H_k of trees")
    common(e)
    e.add_argument("--k", type=_k_list, default=[0, 1, 2], help="comma-separated orders (default 0,1,2)")
    e.add_argument("--box", help="padding label (default: smallest label)")
    e.set_defaults(func=cmd_entropy)

    c = sub.add_parser("compress", help="compress a tree into a TSLP container")
    c.add_argument("input")
    c.add_argument("-o", "--output", required=True)
    c.add_argument("--method", choices=METHODS, default="dag")
    c.add_argument("--box", help="padding label stored in the container")
    c.add_argument("-v", "--verbose", action="store_true")
    c.set_defaults(func=cmd_compress)

    d = sub.add_parser("decompress", help="expand a TSLP container back to term syntax")
    d.add_argument("input")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_decompress)

    m = sub.add_parser("measure", help="grammar size, code length and H_k side by side")
    common(m)
    m.add_argument("--k", type=_k_list, default=[0, 1, 2])
    m.add_argument("--method", choices=METHODS, default="dag")
    m.add_argument("--box")
    m.add_argument("--plot", metavar="PNG", help="also write a code length vs H_k scatter plot")
    m.set_defaults(func=cmd_measure)

    x = sub.add_parser("xml-profile", help="H_k/w quotients of XML document structures")
    common(x)
    x.add_argument("--k", type=_k_list, default=[1, 2, 4, 8])
    x.add_argument("--plot", metavar="PNG", help="also write a quotient-vs-k plot")
    x.set_defaults(func=cmd_xml_profile)

    s = sub.add_parser("sn-table", help="H_k(S_n) against the bound 2^(n-k)")
    common(s, inputs=False)
    s.add_argument("--n-max", type=int, default=16)
    s.add_argument("--n-min", type=int, default=1)
    s.add_argument("--plot", metavar="PNG")
    s.set_defaults(func=cmd_sn_table)

    sc = sub.add_parser("selfcheck", help="run the invariant suites")
    sc.add_argument("--level", choices=("quick", "full"), default="quick")
    sc.add_argument("--inject-fault", choices=("codec",), help=argparse.SUPPRESS)
    sc.set_defaults(func=cmd_selfcheck)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
