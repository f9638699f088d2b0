"""Claim-by-claim verification over a corpus of instances.

Rows are ``verified`` when the check is a finite exhaustive (or fully
replayed) computation and ``evidence`` when it depends on a search budget.
"""
from __future__ import annotations

import csv
import json
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .branching import Branching, delta, enumerate_branchings, total_inversion
from .builders import NAMED, Built, distinguished_branched, parse_surface, random_instance, trapped_free_variant
from .complex_core import classify_surface, trapped_edges
from .errors import BranchflipError
from .spine_dual import cycle_dimension, dual_spine
from .transit import (
    bounded_bflip_census,
    complete_transit,
    components,
    connect_by_inversions,
    inversion_graph,
    remove_trapped,
    strategy_b_connect,
)

DEFAULT_CORPUS = [
    {"surface": "S2", "n": 3},
    {"surface": "S2", "n": 4},
    {"surface": "T2", "n": 1},
    {"name": "klein_bigons"},
    {"name": "klein_quad"},
    {"surface": "P2", "n": 2, "census_budget": 100000},
    {"surface": "P2", "n": 3},
    {"surface": "Sg2", "n": 1},
    {"surface": "N3", "n": 1},
    {"surface": "N4", "n": 1},
    {"surface": "T2", "n": 2, "seed": 7, "walk": 25},
]


@dataclass
class Row:
    claim: str
    instance: str
    status: str  # "verified" or "evidence"
    passed: bool
    detail: str
    certificate: dict | None = None

    def to_json(self):
        return {
            "claim": self.claim,
            "instance": self.instance,
            "status": self.status,
            "passed": self.passed,
            "detail": self.detail,
            "certificate": self.certificate,
        }


@dataclass
class Report:
    rows: list = field(default_factory=list)
    traces: list = field(default_factory=list)  # delta traces of paired runs
    graphs: dict = field(default_factory=dict)  # instance -> inversion graph

    @property
    def ok(self):
        return all(r.passed for r in self.rows if r.status == "verified")

    def to_json(self):
        return {"ok": self.ok, "rows": [r.to_json() for r in self.rows]}


def instance_name(entry) -> str:
    if "name" in entry:
        return entry["name"]
    s = f"{entry['surface']},{entry['n']}"
    if entry.get("walk"):
        s += f",walk{entry['walk']}@{entry.get('seed', 0)}"
    return s


def build_entry(entry) -> Built:
    if "name" in entry:
        return NAMED[entry["name"]]()
    if entry.get("walk"):
        return random_instance(entry.get("seed", 0), entry["surface"], entry["n"], entry["walk"])
    return distinguished_branched(entry["surface"], entry["n"])


def needs_symmetrization(T) -> bool:
    """Non-orientable with Euler characteristic zero or odd."""
    return not T.orientable and (T.euler == 0 or T.euler % 2 != 0)


def _pairs(branchings, k, rng):
    if len(branchings) ** 2 <= k:
        return [(a, b) for a in branchings for b in branchings]
    return [tuple(rng.sample(branchings, 2)) for _ in range(k)]


def _rows_for(entry) -> tuple:
    name = instance_name(entry)
    rows, traces, graph = [], [], None
    rng = random.Random(entry.get("seed", 0))
    npairs = entry.get("pairs", 20)
    try:
        built = build_entry(entry)
    except BranchflipError as err:
        return [Row("build", name, "verified", False, f"{type(err).__name__}: {err}")], traces, graph
    T = built.triangulation
    sym = needs_symmetrization(T)
    branchings = enumerate_branchings(T)

    graph = inversion_graph(T)
    comps = components(T, symmetrized=sym, graph=graph)
    raw = components(T, graph=graph) if sym else comps
    rows.append(Row(
        "inversion-connectivity", name, "verified", len(comps) == 1,
        f"{classify_surface(T).name}: {len(branchings)} branchings, {len(raw)} raw components"
        + (f", {len(comps)} up to total inversion" if sym else ""),
    ))

    cert, ok, checked = None, True, 0
    for a, b in _pairs(branchings, npairs, rng):
        try:
            r = complete_transit(a, b)
        except (BranchflipError, AssertionError) as err:
            ok = False
            cert = {"error": str(err), "source": list(a.orient), "target": list(b.orient)}
            break
        checked += 1
        if cert is None and r.log.moves:
            cert = r.to_json()
    rows.append(Row("complete-transit", name, "verified", ok, f"{checked} pairs replayed exactly", cert))

    Tf = (trapped_free_variant(built) if trapped_edges(T) else built).triangulation
    if trapped_edges(Tf):
        Tf = remove_trapped(built.branching).endpoint.owner
    bf = enumerate_branchings(Tf)
    ok, detail, cert = True, "", None
    sym_used = 0
    for a, b in _pairs(bf, npairs, rng):
        try:
            r = connect_by_inversions(a, b, allow_symmetrized=sym)
        except BranchflipError as err:
            ok, detail = False, f"{type(err).__name__}: {err}"
            break
        sym_used += r.symmetrized
        if cert is None and r.log.moves:
            cert = r.to_json()
    if ok:
        detail = f"{len(bf)} branchings on a trapped-free triangulation; {sym_used} pairs needed total inversion"
    rows.append(Row("inversive-trapped-free", name, "verified", ok, detail, cert))

    if Tf.orientable:
        ok, detail, cert = True, "", None
        for a, b in _pairs(bf, npairs, rng):
            try:
                r = strategy_b_connect(a, b)
            except (BranchflipError, AssertionError) as err:
                ok, detail = False, f"{type(err).__name__}: {err}"
                cert = getattr(err, "dump", None)
                break
            traces.append(r.delta_trace)
            if cert is None and r.log.moves:
                cert = r.to_json()
        if ok:
            detail = f"{len(traces)} pairs reduced to delta = 0"
        rows.append(Row("paired-connector", name, "verified", ok, detail, cert))

        expected = 1 - T.euler + T.V
        dims = sorted({cycle_dimension(dual_spine(B)) for B in branchings[:50]})
        rows.append(Row("cycle-dimension", name, "verified", dims == [expected],
                        f"dimensions {dims}, expected {expected}"))

    if "census_budget" in entry:
        B = built.branching
        center = T.labels[0][2]
        internal = [e.id for e in T.edges if center in T.edge_endpoints(e.id)]
        o = list(B.orient)
        for e in internal:
            o[e] ^= 1
        B2 = Branching(T, o)
        seeds = [B, B2, total_inversion(B2)]
        try:
            c = bounded_bflip_census(seeds, entry["census_budget"])
            apart = not c.connected(0, 1)
            joined = c.connected(0, 2)
            rows.append(Row(
                "two-classes-evidence", name, "evidence", apart and joined,
                f"delta {sorted(delta(B, B2))}; explored {c.explored} classes; "
                f"seed components {c.components}",
            ))
        except BranchflipError as err:
            rows.append(Row("two-classes-evidence", name, "evidence", False, f"{type(err).__name__}: {err}"))
    return rows, traces, graph


def verify_theorems(corpus=None, workers=None) -> Report:
    corpus = DEFAULT_CORPUS if corpus is None else list(corpus)
    workers = workers or max(1, int(os.environ.get("BRANCHFLIP_THREADS", "1") or 1))
    report = Report()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for entry, (rows, traces, graph) in zip(corpus, pool.map(_rows_for, corpus)):
            report.rows.extend(rows)
            report.traces.extend(traces)
            if graph is not None:
                report.graphs[instance_name(entry)] = graph
    return report


def write_report(report: Report, outdir, figures=True) -> list:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "report.json", out / "report.tsv"]
    (out / "report.json").write_text(json.dumps(report.to_json(), indent=1) + "\n")
    with open(out / "report.tsv", "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t")
        w.writerow(["claim", "instance", "status", "passed", "detail"])
        for r in report.rows:
            w.writerow([r.claim, r.instance, r.status, "yes" if r.passed else "no", r.detail])
    if figures:
        from .plotting import plot_delta_trace, plot_inversion_graph

        if report.traces:
            plot_delta_trace(report.traces, out / "delta_trace.png")
            written.append(out / "delta_trace.png")
        for name, G in report.graphs.items():
            if G.number_of_nodes() <= 300:
                p = out / f"inversion_graph_{name.replace(',', '_').replace('@', '_')}.png"
                plot_inversion_graph(G, p, title=name)
                written.append(p)
    return written


def load_corpus(path) -> list:
    with open(path) as fh:
        data = json.load(fh)
    entries = data["instances"] if isinstance(data, dict) else data
    for e in entries:
        if "name" not in e:
            parse_surface(e["surface"])
    return entries
