"""Smoke test for the `wandlab` extension module.

Uses an installed module when present; otherwise loads the cdylib from
target/release (build it with `cargo build --release -p wandlab-py`).
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    try:
        import wandlab

        return wandlab
    except ImportError:
        pass
    for name in ("libwandlab.so", "libwandlab.dylib", "wandlab.dll"):
        lib = ROOT / "target" / "release" / name
        if lib.exists():
            break
    else:
        sys.exit("wandlab extension not found; run: cargo build --release -p wandlab-py")
    tmp = Path(tempfile.mkdtemp())
    suffix = ".pyd" if lib.suffix == ".dll" else ".abi3.so"
    shutil.copy(lib, tmp / f"wandlab{suffix}")
    sys.path.insert(0, str(tmp))
    import wandlab

    return wandlab


def main():
    w = load()
    print("wandlab", w.__version__)

    p = w.ParameterSet(4)
    assert p.lambda_over_pi == 4 and p.alpha == 1.0
    lo, hi = p.lambda_interval()
    assert lo <= 4 * 3.141592653589793 <= hi
    q = w.ParameterSet.from_json(p.to_json())
    assert q.to_json() == p.to_json()
    assert isinstance(p.degree(1), int) and p.degree(1) % 2 == 0
    try:
        w.ParameterSet(0)
    except ValueError:
        pass
    else:
        raise AssertionError("lambda_over_pi = 0 accepted")

    t = w.TowerReal(1e10)
    assert t.sign == 1 and t.level >= 1
    e = t.exp()
    assert e.level == t.level + 1
    assert e.compare(t) == "greater" and t.compare(e) == "less"
    back = e.ln().to_interval()
    assert back[0] <= 1e10 <= back[1]

    for n in (1, 2, 5):
        a = w.compute_a(n, 4)
        assert abs(a - n * 3.141592653589793) < 1.0, (n, a)

    esc = w.escape_condition(p)
    assert esc["pass"] is True
    orbit = w.iterate_orbit(p, 3)
    assert len(orbit) >= 3

    z = complex(1.0, 0.5)
    assert abs(w.model_eval(p, z.conjugate()) - w.model_eval(p, z).conjugate()) < 1e-12

    tables = w.schedule_tables()
    assert set(tables) == {"f", "g"}
    rep = w.verify_schedule(20)
    assert rep["passed"] is True and len(rep["report"]["levels"]) == 20
    tr = w.chase("f∘g", 1, 2)
    assert tr["start"] == {"kind": "u", "m": 1}
    assert tr["word"] == ["g", "f", "g", "f"] and len(tr["steps"]) == 4

    geo = w.bounded_geometry(p, 4)
    json.dumps(geo)

    c = w.classify_point(p, complex(0.5, 0.0), 8)
    assert "class" in c

    r = w.render_raster(p, (0.0, 4.0, -2.0, 2.0), 8, 8, 16)
    assert r["ppm"].startswith(b"P6\n8 8\n255\n")
    assert len(r["codes"]) == 64
    assert r["csv"].splitlines()[0] == "x,y,class,steps,detail"
    rows = [r["codes"][i * 8 : (i + 1) * 8] for i in range(8)]
    assert rows == rows[::-1], "raster not mirror-symmetric"

    print("smoke test passed")


if __name__ == "__main__":
    main()
