import random

import numpy as np
import pytest

from enfcheck import kernels
from enfcheck.kernels import _pykernels


def random_graph(rng, n):
    succ = [sorted(rng.sample(range(n), rng.randint(1, min(3, n)))) for _ in range(n)]
    preds = [[] for _ in range(n)]
    for v, ws in enumerate(succ):
        for w in ws:
            preds[w].append(v)

    def csr(rows):
        ptr = np.cumsum([0] + [len(r) for r in rows]).astype(np.int32)
        idx = np.array([x for r in rows for x in r], dtype=np.int32)
        return ptr, idx
    return csr(succ), csr(preds)


def test_python_backend_always_available():
    assert "python" in kernels.available()


def test_using_restores_backend():
    before = kernels.backend()
    with kernels.using("python"):
        assert kernels.backend() == "python"
    assert kernels.backend() == before
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


@pytest.mark.skipif("compiled" not in kernels.available(), reason="compiled kernels not built")
def test_fixpoint_kernels_agree():
    rng = random.Random(0)
    for _ in range(300):
        n = rng.randint(1, 30)
        (sp, si), (pp, pi) = random_graph(rng, n)
        a = np.array([rng.random() < 0.6 for _ in range(n)])
        b = np.array([rng.random() < 0.3 for _ in range(n)])
        assert kernels.eg(sp, si, pp, pi, a, backend="python") == kernels.eg(sp, si, pp, pi, a, backend="compiled")
        assert kernels.eu(pp, pi, a, b, backend="python") == kernels.eu(pp, pi, a, b, backend="compiled")


def test_eg_on_cycle(backend):
    sp = np.array([0, 1, 2], dtype=np.int32)
    si = np.array([1, 0], dtype=np.int32)
    assert kernels.eg(sp, si, sp, si, np.array([True, True])) == [True, True]
    assert kernels.eg(sp, si, sp, si, np.array([True, False])) == [False, False]


def test_codes_round_trip():
    radix = [3, 2, 4]
    for state in [(0, 0, 0), (2, 1, 3), (1, 0, 2)]:
        assert _pykernels.decode(radix, _pykernels.encode(radix, state)) == state


def test_fallback_when_extension_is_missing():
    import subprocess
    import sys
    from importlib import resources

    mp = str(resources.files("enfcheck").joinpath("data", "mediaplayer.enf"))
    script = f"""
import sys
class Block:
    def find_spec(self, name, path=None, target=None):
        if name == "enfcheck.kernels._ckernels":
            raise ImportError("hidden")
sys.meta_path.insert(0, Block())
from enfcheck import kernels
from enfcheck.dsl import load
from enfcheck.mcheck import verify
assert kernels.available() == ["python"] and kernels.backend() == "python"
doc = load({mp!r})
r = verify(doc.build("pair"), doc.policies_of("pair"))
print(r.interference, r.stats.states)
"""
    proc = subprocess.run([sys.executable, "-c", script], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.split() == ["True", "22"]
