"""Smoke test for the hgrec extension module.

Builds the extension with cargo (unless HGREC_LIB points at a built library),
imports it from a temporary directory and exercises the main entry points.
"""

import os
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    lib = os.environ.get("HGREC_LIB")
    if lib is None:
        subprocess.run(
            ["cargo", "build", "--release", "-p", "hgrec-py", "--features", "extension-module"],
            cwd=ROOT,
            check=True,
        )
        lib = ROOT / "target" / "release" / "libhgrec.so"
    tmp = tempfile.mkdtemp()
    shutil.copy(lib, os.path.join(tmp, "hgrec.so"))
    sys.path.insert(0, tmp)
    import hgrec

    return hgrec


def main():
    hg = load()

    star = hg.generate("star", 6, w_min=1.0, w_max=10.0, seed=1)
    assert len(star) == 5
    assert abs(sum(w for _, w in star.edges()) - 1.0) < 1e-12
    assert hg.Hypergraph.decode(star.encode()).edges() == star.edges()

    exact = hg.exact_oracle_recover(star)
    assert hg.dissimilarity(exact, star) <= 1e-9

    rec, connected, plugin = hg.mm_recover(star, 20000, k=1, seed=3)
    assert connected
    assert hg.dissimilarity(rec, star) < 0.05
    assert hg.dissimilarity(plugin, star) < 0.05

    samples = hg.sample_dataset(star, 1000, seed=2)
    assert len(samples) == 1000
    assert hg.dissimilarity(hg.recover_from_samples(samples), star) < 0.2

    chain = hg.generate("chain", 5, w_min=1.0, w_max=5.0, seed=4)
    shuffled = chain.relabel({"0": "e", "1": "c", "2": "a", "3": "d", "4": "b"})
    mapping, cost = hg.align_exact(chain, shuffled)
    assert cost < 1e-12, cost
    frucht = hg.generate("frucht", 12)
    mapping, backtracks = hg.align_wl(frucht, frucht, [("0", "0")])
    assert mapping == {str(i): str(i) for i in range(12)} and backtracks == 0
    try:
        hg.align_wl(hg.generate("star", 6), hg.generate("chain", 6))
    except ValueError as e:
        assert "NoIsomorphism" in str(e)
    else:
        raise AssertionError("expected NoIsomorphism")

    assert hg.lower_bound_risk(100, 10000) == 0.00625
    k_min, n_min = hg.mm_sample_bounds(10, 3.0, 2, 0.5, 2, 0.1, 0.1)
    assert n_min == 51176 and 1.67e11 < k_min < 1.68e11
    assert hg.lemma_rr_bounds(2, 1.0) == (0.5, 0.5)

    prompt = hg.render_prompt(["table", "furniture"], 2)
    assert prompt.startswith("Consider the following concepts: table, furniture.")
    pairs, unparsed = hg.parse_edgelist("1. table - furniture\nnoise", ["table", "furniture"])
    assert pairs == [("furniture", "table")] and unparsed == ["noise"]
    truth = [("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")]
    guess = [("a", "b"), ("b", "c"), ("c", "d"), ("a", "c"), ("b", "d")]
    assert hg.normalized_l1(truth, guess) == 0.75

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
