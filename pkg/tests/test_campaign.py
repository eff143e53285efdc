import json

import numpy as np
import pytest

from heisenqk import campaign as cp
from heisenqk.solutions import Family, ParameterError, SolutionSpec


class TestSampling:
    def test_deterministic(self):
        spec = SolutionSpec.make("PositiveTimelike", epslambda=3)
        a = cp.sample_points(spec, 20, seed=4)
        b = cp.sample_points(spec, 20, seed=4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, cp.sample_points(spec, 20, seed=5))

    def test_inside_domain(self):
        spec = SolutionSpec.make("HyperKahlerTimelike", k=2)
        pts = cp.sample_points(spec, 50)
        lo, hi = spec.domain
        assert pts.shape == (50, 4)
        assert np.all((pts[:, 0] > lo) & (pts[:, 0] < hi))
        assert np.all(np.abs(pts[:, 1:]) <= 2.0)


class TestConfig:
    def test_samples_positive(self):
        with pytest.raises(ValueError):
            cp.CampaignConfig(samples=0)

    def test_build_specs_names_bad_combination(self):
        config = cp.CampaignConfig(families=["NegativeTimelike"], epslambda=[-50.0], branch=[2])
        with pytest.raises(ParameterError, match="-50"):
            cp.build_specs(config)

    def test_unknown_family(self):
        with pytest.raises(ParameterError):
            cp.build_specs(cp.CampaignConfig(families=["Nope"]))

    def test_grid_size(self):
        specs = cp.acceptance_grid()
        assert len(specs) == 102
        assert {s.family for s in specs} == set(Family)


class TestVerify:
    @pytest.mark.parametrize(
        "family,kwargs,expected",
        [
            ("StationaryTimelike", {"k": 1}, {"einstein", "weyl_selfdual", "eigen_pattern", "nabla_riemann"}),
            ("NegativeTimelike", {"epslambda": -100, "branch": 3}, {"d(|W|^(2/3) omega_1)", "d(ab omega_2)", "crosscheck"}),
            ("LightlikeQPK", {"lam": 3}, {"weyl_full"}),
            ("HyperKahlerLightlike", {}, {"hk_closure", "hk_wedge", "ricci", "riemann"}),
        ],
    )
    def test_records_pass(self, family, kwargs, expected):
        spec = SolutionSpec.make(family, **kwargs)
        rec = cp.verify_spec(spec, cp.CampaignConfig(samples=12, probes=False))
        assert rec.passed, [c for c in rec.checks if not c.passed]
        names = {c.name for c in rec.checks}
        missing = {n for n in expected if not any(m.startswith(n) for m in names)}
        assert not missing, (missing, names)

    def test_orientation(self):
        config = cp.CampaignConfig(samples=8, probes=False)
        assert cp.verify_spec(SolutionSpec.make("StationaryTimelike"), config).orientation == 1
        assert cp.verify_spec(SolutionSpec.make("HyperKahlerTimelike"), config).orientation == -1

    def test_json_round_trip(self):
        config = cp.CampaignConfig(families=["HyperKahlerTimelike"], k=[1.0], samples=8)
        camp = cp.run_campaign(config)
        doc = json.loads(cp.to_json(camp.as_dict()))
        assert doc["records"][0]["probe"]["verdict"] == "IncompleteEvidence"
        csv = cp.to_csv(camp).splitlines()
        assert len(csv) == 2

    def test_catalog(self):
        rows = cp.catalog()
        assert len(rows) == 11
        assert [r["family"] for r in cp.catalog("LightlikeQPK")] == ["LightlikeQPK"]
