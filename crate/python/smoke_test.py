"""Smoke test for the `sparsedet` extension module.

Build first, either with maturin (`maturin develop -m crates/py/Cargo.toml
--features extension-module`) or with
`cargo build --release -p sparsedet-py --features extension-module`; in the
second case the shared library is loaded straight from `target/`.
"""

import importlib.machinery
import importlib.util
import math
import pathlib
import sys


def load():
    try:
        import sparsedet

        return sparsedet
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        for name in ("libsparsedet.so", "libsparsedet.dylib", "sparsedet.dll"):
            lib = root / "target" / profile / name
            if lib.exists():
                loader = importlib.machinery.ExtensionFileLoader("sparsedet", str(lib))
                spec = importlib.util.spec_from_loader("sparsedet", loader)
                module = importlib.util.module_from_spec(spec)
                loader.exec_module(module)
                sys.modules["sparsedet"] = module
                return module
    sys.exit("sparsedet extension not found; build it first (see module docstring)")


def close(a, b, tol=1e-9):
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def main():
    f = load()
    box = (1.0, 2.0, 0.5, 2.0, 1.0, 1.0, 0.3)

    assert f.iou(box, box) == 1.0
    assert abs(f.iou((0, 0, 0, 2, 1, 1, 0), (0.5, 0, 0, 2, 1, 1, 0), rotated=False) - 0.6) < 1e-12
    # The same rectangle described with swapped sides and a quarter turn.
    swapped = (1.0, 2.0, 0.5, 1.0, 2.0, 1.0, 0.3 + math.pi / 2)
    assert abs(f.iou(box, swapped) - 1.0) < 1e-9

    d = f.encode((0, 0, 0, 2, 1, 1, math.pi / 4), (0, 0, 0), "mobius")
    assert close(d[6:], (math.log(2.0), 0.0))
    for mode in ("naive", "sincos", "mobius"):
        loc = (1.2, 2.1, 0.4)
        back = f.decode(f.encode(box, loc, mode), loc, mode)
        assert abs(f.iou(back, box) - 1.0) < 1e-9, mode
    assert f.canonicalize(swapped)[3] >= f.canonicalize(swapped)[4]

    assert abs(f.centerness(box, box[:3]) - 1.0) < 1e-12
    try:
        f.centerness(box, (10.0, 0.0, 0.0))
        raise AssertionError("expected ValueError")
    except ValueError:
        pass

    assert f.focal_loss([0.999999, 1e-6], 0) < 1e-9

    points, gts = f.scene(3, num_boxes=4)
    targets = f.assign(points, [b for _, b in gts], [c for c, _ in gts])
    assert {t[4] for t in targets} == set(range(len(gts)))

    boxes, scores, labels = [], [], []
    for level, voxel, loc, cls, box_id, cntr, deltas in targets:
        boxes.append(f.decode(deltas, loc, "mobius"))
        scores.append(cntr)
        labels.append(cls)
    kept = f.nms(boxes, scores, labels, 0.5)
    assert len(kept) == len(gts)

    dets = [[(labels[i], scores[i], boxes[i]) for i in kept]]
    mean_ap, per_class = f.evaluate(dets, [gts], num_classes=4)
    assert close(mean_ap, (1.0, 1.0)), mean_ap
    assert set(per_class) == {c for c, _ in gts}

    print(f"ok: {len(points)} points, {len(targets)} targets, {len(kept)} detections, mAP {mean_ap}")


if __name__ == "__main__":
    main()
