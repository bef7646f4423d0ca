"""Smoke test for the Python bindings.

Builds the extension with cargo, imports it and runs a small end-to-end
audit on generated data. Run from anywhere: python3 python/smoke_test.py
"""

import json
import math
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def build(dest):
    subprocess.run(
        ["cargo", "build", "--release", "-p", "popaudit-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libpopaudit.so"
    shutil.copy(lib, dest / "popaudit.so")
    sys.path.insert(0, str(dest))


def main():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        build(tmp)
        import popaudit

        assert abs(popaudit.hellinger([0.7, 0.3], [0.55, 0.45]) - 0.1100) < 1e-3
        assert popaudit.hellinger([1, 0], [0, 1]) == 1.0

        ratings = [(u, i, float(1 + (u * i) % 5)) for u in range(1, 21) for i in range(1, 31) if (u + i) % 3]
        data = popaudit.RatingsDataset(ratings)
        train, test = data.split(0.8, seed=7)
        assert len(train) + len(test) == len(data)

        catalog = popaudit.ItemCatalog({i: ["Drama"] if i % 2 else ["Comedy", "Drama"] for i in range(1, 31)})
        model = popaudit.Model.fit(train, "item-knn", neighborhood_size=10, aggregation="similarity-sum")
        recs = model.recommend_all(5)
        for user, items in recs.lists().items():
            rated = {i for (u, i, _) in train.ratings() if u == user}
            assert not rated & set(items)
        assert 0.0 <= recs.precision(test) <= 1.0

        rows = recs.user_metrics(train, catalog)
        assert rows and all(0.0 <= mc <= 1.0 for (_, _, mc) in rows.values())

        groups = popaudit.group_by_popularity(train.profile_popularity(), 4)
        assert sum(len(m) for m in groups.values()) == len(train.users())

        t, p, _ = popaudit.t_test([1, 2, 3, 4, 5], [6, 7, 8, 9, 10])
        assert t < 0 and p < 0.01
        assert math.isclose(popaudit.spearman([1, 2, 3], [1, 8, 27]), 1.0)

        try:
            popaudit.Model.fit(train, "bmf", learning_rate=-1.0)
        except ValueError:
            pass
        else:
            raise AssertionError("invalid config accepted")

        subprocess.run(
            ["cargo", "run", "--release", "-q", "-p", "popaudit-cli", "--", "synth", "--out", str(tmp / "data"),
             "--users", "60", "--items", "80"],
            cwd=ROOT,
            check=True,
            stdout=subprocess.DEVNULL,
        )
        config = tmp / "experiment.toml"
        config.write_text(
            'schema_version = 1\noutput_dir = "out"\n'
            '[data]\nratings = "data/ratings.dat"\nitems = "data/movies.dat"\nusers = "data/users.dat"\n'
            '[evaluation]\nn_groups = 4\n'
            '[[algorithms]]\nname = "MostPopular"\nalgorithm = "most-popular"\n'
        )
        report = json.loads(popaudit.run_experiment(str(config)))
        assert report["algorithms"][0]["name"] == "MostPopular"
        print("python smoke test passed")


if __name__ == "__main__":
    main()
