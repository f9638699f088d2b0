import pytest

from branchflip.builders import NAMED, distinguished_branched, random_instance

CORPUS_SPECS = [("S2", 3), ("S2", 4), ("S2", 5), ("T2", 1), ("T2", 2), ("K", 1), ("K", 2),
                ("P2", 2), ("P2", 3), ("Sg2", 1), ("N3", 1), ("N4", 1)]


def corpus():
    """(name, Built) for the named builds and the distinguished instances."""
    out = [(name, f()) for name, f in NAMED.items()]
    out += [(f"{s},{n}", distinguished_branched(s, n)) for s, n in CORPUS_SPECS]
    return out


def random_corpus(count, surfaces=("T2", "Sg2", "S2", "K", "N3"), walk=30, max_triangles=20):
    out = []
    seed = 0
    while len(out) < count:
        s = surfaces[seed % len(surfaces)]
        n = 1 + (seed // len(surfaces)) % 3
        if s == "S2":
            n += 2
        b = random_instance(seed, s, n, walk)
        if b.triangulation.F <= max_triangles:
            out.append((f"{s},{n}@{seed}", b))
        seed += 1
    return out


@pytest.fixture(scope="session")
def named_corpus():
    return corpus()


ACCEPTANCE = {}


def record_acceptance(n, ok, detail):
    line = f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE[n] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
