"""Command line interface.

Instances are given either as a path to a JSON document or as a build spec:
a named build (``sphere3``, ``torus1``, ``projective2``, ``klein_bigons``,
``klein_quad``) or ``SURFACE:n`` such as ``S2:4`` or ``Sg2:1``.

Exit codes: 0 success, 2 a verified claim failed, 3 bad input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import io
from .branching import Branching, enumerate_branchings
from .builders import NAMED, distinguished_branched, random_instance
from .errors import BranchflipError, SchemaError, TransitError, TrappedEdgesPresent
from .moves import classify_bflip, bflip_choices

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 2, 3


class InputError(Exception):
    pass


def _instance(spec: str) -> io.Document:
    if os.path.exists(spec) or spec == "-":
        text = sys.stdin.read() if spec == "-" else open(spec).read()
        return io.parse(text)
    if spec in NAMED:
        b = NAMED[spec]()
        return io.Document(b.triangulation, b.branching, metadata={"build": spec})
    if ":" in spec:
        surf, n = spec.split(":", 1)
        b = distinguished_branched(surf, int(n))
        return io.Document(b.triangulation, b.branching, metadata={"build": spec})
    raise InputError(f"no such file or build spec: {spec!r}")


def _branching(doc: io.Document, bits=None, index=None) -> Branching:
    T = doc.triangulation
    if bits is not None:
        if len(bits) != T.E or set(bits) - {"0", "1"}:
            raise InputError(f"expected {T.E} bits, got {bits!r}")
        return Branching(T, [int(c) for c in bits])
    if index is not None:
        bs = enumerate_branchings(T)
        if not 0 <= index < len(bs):
            raise InputError(f"branching index {index} out of range (0..{len(bs) - 1})")
        return bs[index]
    if doc.branching is None:
        raise InputError("the document carries no branching; pass --bits or --index")
    return doc.branching


def _out(text, path=None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_build(a):
    if a.walk:
        surf, n = a.instance.split(":", 1)
        b = random_instance(a.seed, surf, int(n), a.walk)
        doc = io.Document(b.triangulation, b.branching, metadata={"build": a.instance, "seed": a.seed, "walk": a.walk})
    else:
        doc = _instance(a.instance)
    _out(io.emit(doc), a.output)
    return EXIT_OK


def cmd_branchings(a):
    doc = _instance(a.instance)
    bs = enumerate_branchings(doc.triangulation)
    if a.count:
        print(len(bs))
    else:
        for k, B in enumerate(bs):
            print(k, "".join(map(str, B.orient)))
    return EXIT_OK


def cmd_classify_flips(a):
    doc = _instance(a.instance)
    B = _branching(doc, a.bits, a.index)
    rows = []
    for e in B.owner.edges:
        if e.trapped:
            rows.append({"edge": e.id, "trapped": True})
            continue
        for c in bflip_choices(B, e.id):
            rows.append({"edge": e.id, "choice": c, "class": classify_bflip(B, e.id, c).value})
    print(json.dumps(rows, indent=1))
    return EXIT_OK


def cmd_connect(a):
    from .transit import complete_transit, connect_by_inversions, strategy_b_connect

    doc = _instance(a.instance)
    src = _branching(doc, a.bits, a.index)
    dst = _branching(doc, a.to_bits, a.to_index)
    if a.method == "inversions":
        r = connect_by_inversions(src, dst, allow_symmetrized=a.symmetrized, allow_trapped=a.allow_trapped)
    elif a.method == "strategy-b":
        r = strategy_b_connect(src, dst)
    else:
        r = complete_transit(src, dst)
    _out(json.dumps(r.to_json(), indent=1) + "\n", a.output)
    return EXIT_OK


def cmd_census(a):
    from .transit import bounded_bflip_census

    if a.budget <= 0:
        raise InputError("--budget must be positive")
    doc = _instance(a.instance)
    bs = enumerate_branchings(doc.triangulation)
    idx = [int(x) for x in a.seeds.split(",")] if a.seeds else list(range(len(bs)))
    for i in idx:
        if not 0 <= i < len(bs):
            raise InputError(f"seed index {i} out of range")
    c = bounded_bflip_census([bs[i] for i in idx], a.budget, a.triangle_budget)
    print(json.dumps({"explored": c.explored, "components": [[idx[k] for k in comp] for comp in c.components]}))
    return EXIT_OK


def cmd_dual(a):
    from fractions import Fraction

    from .spine_dual import cycle_space_basis, dual_spine, in_cone, positive_cycle_exists

    doc = _instance(a.instance)
    B = _branching(doc, a.bits, a.index)
    track = dual_spine(B)
    out = {"switches": [list(s) for s in track.switches], "branches": track.n_branches}
    if a.cycles:
        basis = cycle_space_basis(track)
        out["dimension"] = len(basis)
        out["basis"] = [[str(x) for x in v] for v in basis]
        pos = positive_cycle_exists(track)
        out["positive_cycle"] = [str(x) for x in pos.witness] if pos.exists else None
    if a.cone:
        z = [Fraction(x) for x in a.cone.split(",")]
        out["cone"] = in_cone(track, z).value
    print(json.dumps(out, indent=1))
    return EXIT_OK


def cmd_verify(a):
    from .verify import load_corpus, verify_theorems, write_report

    corpus = load_corpus(a.corpus) if a.corpus else None
    report = verify_theorems(corpus)
    if a.out:
        write_report(report, a.out, figures=not a.no_figures)
    for r in report.rows:
        print(f"{'PASS' if r.passed else 'FAIL'}\t{r.status}\t{r.claim}\t{r.instance}\t{r.detail}")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_export_dot(a):
    from .transit import inversion_graph

    doc = _instance(a.instance)
    T = doc.triangulation
    _out(io.export_dot(inversion_graph(T), T), a.output)
    return EXIT_OK


def _parser():
    p = argparse.ArgumentParser(prog="branchflip", description="Branched triangulations of surfaces.")
    sub = p.add_subparsers(dest="verb", required=True)

    def inst(sp):
        sp.add_argument("instance", help="document path, '-', a named build or SURFACE:n")

    def pick(sp, prefix=""):
        sp.add_argument(f"--{prefix}bits", dest=f"{prefix.replace('-', '_')}bits", help="edge orientation bits")
        sp.add_argument(f"--{prefix}index", dest=f"{prefix.replace('-', '_')}index", type=int,
                        help="index into the enumerated branchings")

    s = sub.add_parser("build", help="emit a document")
    inst(s)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--walk", type=int, default=0, help="random b-flip walk length (SURFACE:n only)")
    s.add_argument("-o", "--output")
    s.set_defaults(fn=cmd_build)

    s = sub.add_parser("branchings", help="enumerate branchings")
    inst(s)
    s.add_argument("--count", action="store_true")
    s.set_defaults(fn=cmd_branchings)

    s = sub.add_parser("classify-flips", help="classify every b-flip of a branching")
    inst(s)
    pick(s)
    s.set_defaults(fn=cmd_classify_flips)

    s = sub.add_parser("connect", help="connect two branchings")
    inst(s)
    pick(s)
    pick(s, "to-")
    s.add_argument("--method", choices=["inversions", "strategy-b", "complete"], default="inversions")
    s.add_argument("--symmetrized", action="store_true", help="allow reaching the total inversion")
    s.add_argument("--allow-trapped", action="store_true", help="search untrapped inversions on a triangulation with trapped edges")
    s.add_argument("-o", "--output")
    s.set_defaults(fn=cmd_connect)

    s = sub.add_parser("census", help="bounded b-flip census from seed branchings")
    inst(s)
    s.add_argument("--seeds", help="comma separated branching indices (default: all)")
    s.add_argument("--budget", type=int, default=100000)
    s.add_argument("--triangle-budget", type=int)
    s.set_defaults(fn=cmd_census)

    s = sub.add_parser("dual", help="dual train track and switching cycles")
    inst(s)
    pick(s)
    s.add_argument("--cycles", action="store_true")
    s.add_argument("--cone", help="comma separated branch weights to locate in the cone")
    s.set_defaults(fn=cmd_dual)

    s = sub.add_parser("verify-theorems", help="run the verification corpus")
    s.add_argument("--corpus", help="JSON corpus file")
    s.add_argument("--out", help="directory for report.json, report.tsv and figures")
    s.add_argument("--no-figures", action="store_true")
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("export-dot", help="inversion graph as DOT")
    inst(s)
    s.add_argument("-o", "--output")
    s.set_defaults(fn=cmd_export_dot)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.fn(args)
    except TrappedEdgesPresent as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_INPUT
    except TransitError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_FAIL
    except (InputError, SchemaError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except BranchflipError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
