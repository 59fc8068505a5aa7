#!/usr/bin/env python3
"""Smoke test for the latmax_py extension module.

Build the module first:

    cargo build -p latmax-py --release

then run this script from anywhere inside the repository.
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def locate_extension() -> Path:
    candidates = [
        REPO / "target" / "release" / "liblatmax_py.so",
        REPO / "target" / "debug" / "liblatmax_py.so",
        REPO / "target" / "release" / "liblatmax_py.dylib",
        REPO / "target" / "debug" / "liblatmax_py.dylib",
    ]
    for c in candidates:
        if c.exists():
            return c
    sys.exit("liblatmax_py not found; run `cargo build -p latmax-py --release` first")


def main() -> None:
    ext = locate_extension()
    tmp = Path(tempfile.mkdtemp(prefix="latmax_py_"))
    shutil.copy(ext, tmp / "latmax_py.so")
    sys.path.insert(0, str(tmp))

    import latmax_py

    # FIX1: two classes, both maximal, one edge, both extension directions
    a = latmax_py.Analysis.from_spec_file(str(REPO / "fixtures" / "fix1.json"))
    assert a.vertex_count == 2, a.vertex_count
    assert a.maximal_count == 2
    assert a.extremal_count == 2
    assert a.dimension == 1
    assert len(a.edges()) == 1
    assert a.strongly_connected
    assert a.all_verdicts_pass(), [v for v in a.verdicts() if not v[1]]
    assert len(a.graph_edges()) == 2
    assert [f[2] for f in a.factors()] == [1, 1]

    # ascent: (1,0) needs one step, (1,2) none
    key, trace = a.ascend([1, 0])
    assert len(trace) == 2, trace
    assert key == trace[-1]
    key2, trace2 = a.ascend([1, 2])
    assert len(trace2) == 1
    assert key2 != key

    # report JSON round-trips and carries the metadata
    report = json.loads(a.report_json())
    assert report["complex"]["vertex_count"] == 2
    assert report["meta"]["precision"] == 16
    assert len(report["meta"]["spec_sha256"]) == 64

    # FIX2 is residually irreducible: a single vertex, no edges
    b = latmax_py.Analysis.from_spec_file(str(REPO / "fixtures" / "fix2.json"))
    assert b.vertex_count == 1
    assert b.dimension == 0
    assert b.graph_edges() == []
    assert b.all_verdicts_pass()

    # FIX3: multiplicity free with two factors, equality case
    c = latmax_py.Analysis.from_spec_file(str(REPO / "fixtures" / "fix3.json"))
    assert c.maximal_count == 2
    assert c.dimension == 1
    assert sorted(f[1] for f in c.factors()) == [1, 2]
    assert c.all_verdicts_pass()

    # DOT exports are well formed
    assert a.complex_dot().startswith("graph invariant_complex")
    assert a.graph_dot().startswith("digraph extension_graph")

    # bad input surfaces as ValueError
    try:
        latmax_py.Analysis.from_spec_text('{"ring": {}, "generators": []}')
    except ValueError as e:
        assert "ring.p" in str(e)
    else:
        sys.exit("expected ValueError for a bad spec")

    # the convenience one-shot wrapper
    text = (REPO / "fixtures" / "fix2.json").read_text()
    report2 = json.loads(latmax_py.analyze_json(text))
    assert report2["complex"]["vertex_count"] == 1

    print("smoke test OK")


if __name__ == "__main__":
    main()
