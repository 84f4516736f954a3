"""Smoke test for the shapevar extension module.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

import tempfile
from pathlib import Path

import shapevar


def main():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        assert shapevar.generate(tmp / "shapes", count=30, seed=1) == 53

        train, test = tmp / "train", tmp / "test"
        shapevar.generate(train, count=30, seed=2, components=True)
        shapevar.generate(test, count=8, seed=3, components=True)

        model = shapevar.VarianceModel.build(train / "crops", bins=32, seed=2)
        assert model.weights("circle") == [0.45, 0.045, 0.45, 0.045]
        assert model.weights("rectangle") == [0.2, 0.2, 0.2, 0.4]
        model.save(tmp / "model.json")
        model = shapevar.VarianceModel.load(tmp / "model.json")
        print(model)

        crop = next((test / "crops" / "circle" / "antenna").glob("*.png"))
        scores = model.classify("circle", path=crop)
        assert abs(sum(scores["probabilities"]) - 1.0) < 1e-9
        print("crop", crop.name, "->", scores["predicted"])

        flat = model.classify("rectangle", pixels=bytes([90, 110] * 32), size=(8, 8))
        assert flat["predicted"] in ("body", "solar_panel")

        det_dir = tmp / "det"
        det_dir.mkdir()
        for image in sorted((test / "images").glob("*.png")):
            proposals = shapevar.propose(path=image)
            dets = model.detect(path=image)
            assert len(dets) <= len(proposals)
            with open(det_dir / (image.stem + ".txt"), "w") as f:
                for d in dets:
                    x0, y0, x1, y1 = d["bbox"]
                    cx, cy = (x0 + x1) / 832, (y0 + y1) / 832
                    w, h = (x1 - x0) / 416, (y1 - y0) / 416
                    cls = ["antenna", "body", "thruster", "solar_panel"].index(d["component"])
                    f.write(f"{cls} {cx:.6f} {cy:.6f} {w:.6f} {h:.6f} {d['score']:.6f}\n")

        report = shapevar.evaluate(det_dir, test / "labels", test / "classes.txt")
        print("mAP@0.5", report["map50"], "mAP@0.5:0.95", report["map50_95"])
        assert report["map50"] is not None

        cm = shapevar.confusion([[8, 0, 11, 0], [0, 1, 1, 1], [1, 0, 2, 0], [1, 1, 0, 9]])
        assert [round(100 * p, 2) for p in cm["precision"]] == [42.11, 33.33, 66.67, 81.82]
        print(cm["table"], end="")

        try:
            shapevar.VarianceModel.load(tmp / "missing.json")
        except shapevar.ShapevarError as e:
            print("error surfaced:", e)
        else:
            raise AssertionError("missing model loaded")
    print("smoke test passed")


if __name__ == "__main__":
    main()
