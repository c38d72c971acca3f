"""Smoke test for the pyclusterdiff extension module.

Build and install it first:

    pip install --no-build-isolation ./crates/python
    python python/smoke_test.py
"""

import math
import sys

import pyclusterdiff as cd

ITEMS = ["i1", "i2", "j1", "j2", "k1", "k2"]


def clustering(labels):
    return cd.Clustering([(item, f"c{label}") for item, label in zip(ITEMS, labels)])


def main():
    ideal = clustering([1, 1, 2, 2, 3, 3])
    base = clustering([1, 2, 1, 2, 1, 2])
    exps = {
        "c": ([1, 3, 1, 3, 2, 3], 31.25),
        "e": ([1, 1, 2, 3, 2, 3], 64.71),
        "h": ([1, 1, 2, 2, 3, 3], 100.00),
    }
    for name, (labels, percent) in exps.items():
        iq = cd.iq_exact(base, clustering(labels), ideal)["iq"]
        assert abs(100 * iq - percent) < 1e-2, (name, iq)

    exp = clustering(exps["c"][0])
    impact = cd.impact(base, exp)
    assert impact["affected_item_count"] == 3
    assert math.isclose(impact["jaccard_distance"], 2 / 9)

    rates = cd.exact_quality(base, exp, ideal)
    assert math.isclose(rates["good_split_rate"] + rates["bad_split_rate"], rates["split_rate"])

    exact = cd.exact_recall_precision(base, exp, ideal)["delta_recall"]
    estimate = cd.estimate_delta_recall(base, exp, ideal)
    assert math.isclose(estimate["value"], exact, abs_tol=1e-12)
    sampled = cd.estimate_delta_recall(base, exp, ideal, n=2000, seed=3)
    assert sampled == cd.estimate_delta_recall(base, exp, ideal, n=2000, seed=3)

    reasoning = cd.delta_recall(base, exp, ideal, recall=0.5)
    assert reasoning["diagram"]["variant"] == 1

    assert cd.iq_at(0.0, 0.0, 1.0) == 1.0
    assert cd.iq_at(0.0, 1.0, 1.0) is None

    snap = cd.snapshot(ideal, ideal)
    assert snap["precision_absolute"] == 1.0
    try:
        cd.snapshot(ideal, ideal, reference="perfect_recall")
    except cd.ClusterdiffError:
        pass
    else:
        raise AssertionError("perfect-recall reference should be refused")

    try:
        cd.delta_recall(base, exp, ideal, variant=2, precision_base=0.01, clip=False)
    except cd.InfeasibleError:
        pass
    else:
        raise AssertionError("out-of-range precision should abort")

    back = cd.Clustering.parse(exp.to_tsv())
    assert back.items == exp.items and back.num_clusters == 3

    study = cd.simulate()
    assert len(study["rows"]) == 30
    print(
        "smoke test ok: r(ΔRecall)={:.3f} r(JD)={:.3f}".format(
            study["delta_recall"]["pearson_r"], study["jaccard_distance"]["pearson_r"]
        )
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
