"""Smoke test for the camlrp extension against the committed fixtures.

Build first:  maturin develop -m crates/py/Cargo.toml --release
Run:          python python/smoke_test.py
"""

import json
import math
import os
import sys
import tempfile

import camlrp

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIX = os.path.join(ROOT, "fixtures")


def main():
    model = camlrp.load_model(os.path.join(FIX, "model", "model.json"))
    print(model)
    c, h, w = model.input_shape

    image = camlrp.load_image(os.path.join(FIX, "images", "img00.png"))
    assert image.shape == [c, h, w], image.shape
    logits = model.logits(image)
    assert len(logits) == model.class_count
    assert all(math.isfinite(v) for v in logits)
    predicted = model.predict(image)
    assert logits[predicted] == max(logits)

    e = model.explain(image)
    assert e.class_index == predicted
    for t in (e.final_map, e.gradcam, e.mask, e.lrp_avg, e.product):
        assert t.shape == [h, w], t.shape
    assert all(0.0 <= v <= 1.0 for v in e.mask.data)
    fused = camlrp.fuse(e.mask, e.lrp_avg)
    assert fused.data == e.product.data

    lrp = model.lrp(image, predicted)
    assert lrp.data == e.lrp_avg.data

    bias_free = camlrp.load_model(os.path.join(FIX, "bias_free", "model.json"))
    k = bias_free.predict(image)
    target = bias_free.logits(image)[k]
    relevance = sum(bias_free.lrp(image, k).data) * c
    assert abs(relevance - target) <= 1e-4 * max(1.0, abs(target)), (relevance, target)

    mask = camlrp.load_mask(os.path.join(FIX, "masks", "img00.png"))
    acc = camlrp.relevance_rank_accuracy(e.final_map, mask)
    assert 0.0 <= acc <= 1.0
    gini = camlrp.sparseness(e.final_map)
    assert 0.0 <= gini <= 1.0

    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "final.png")
        camlrp.render_heatmap(e.final_map, out)
        assert os.path.getsize(out) > 0

    csv, report = model.benchmark([image], [mask], methods=["gradcam", "lrp"], seed=3)
    assert csv.splitlines()[0].startswith("method")
    assert len(json.loads(report)["rows"]) == 2

    try:
        model.explain(image, tau=1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("tau=1.5 accepted")
    try:
        camlrp.load_model(os.path.join(FIX, "missing.json"))
    except OSError:
        pass
    else:
        raise AssertionError("missing model accepted")

    print(f"class {predicted} logit {logits[predicted]:.6f} rank {acc:.4f} gini {gini:.4f}")
    print("smoke test OK")
    return 0


if __name__ == "__main__":
    sys.exit(main())
