import json

import pytest

from hkcollapse.config import check_period_area, default_document, from_document, load_config
from hkcollapse.errors import ConfigError


def test_defaults_load():
    cfg = load_config()
    assert cfg.eps_schedule == (0.4, 0.2, 0.1, 0.05)
    assert cfg.h_series == (1 + 0j,)
    assert cfg.annulus == (0.4, 0.6)


def test_overlay_merges(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"seed": 5, "tolerances": {"ricci": 1e-4}}))
    cfg = load_config(p)
    assert cfg.seed == 5 and cfg.tol.ricci == 1e-4
    assert cfg.tol.profile == default_document()["tolerances"]["profile"]


@pytest.mark.parametrize("doc,field", [
    ({"bogus": 1}, "bogus"),
    ({"grid": {"nope": 3}}, "grid.nope"),
    ({"eps_schedule": [0.1, 0.2]}, "eps_schedule"),
    ({"eps_schedule": [0.1, -0.2]}, "eps_schedule[1]"),
    ({"annulus": [0.6, 0.4]}, "annulus"),
    ({"fibration": {"patch_radius": 1.5}}, "fibration.patch_radius"),
    ({"fibration": {"h_series": [[-2, 0]]}}, "fibration.h_series"),
    ({"fibration": {"h_series": ["x"]}}, "fibration.h_series[0]"),
    ({"fibration": {"singular_points": [[0.1, 0]]}}, "fibration.singular_points"),
    ({"grid": {"base": 2.5}}, "grid.base"),
    ({"seed": True}, "seed"),
    ({"diameter_k": [8, 2]}, "diameter_k"),
    ({"tolerances": {"order": [2.2, 1.8]}}, "tolerances.order"),
])
def test_errors_name_field(doc, field):
    with pytest.raises(ConfigError) as e:
        from_document(doc)
    assert str(e.value).startswith(field)


def test_bad_json_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "seed": ,\n}')
    with pytest.raises(ConfigError, match=r"bad.json:2:11"):
        load_config(p)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")


def test_period_area():
    assert check_period_area([1.0], 0.9) > 0
    assert check_period_area([-1.0], 0.9) < 0


def test_overrides_and_provenance():
    cfg = load_config().with_overrides(seed=3, epsilons=[0.3, 0.1], out_dir="elsewhere")
    assert cfg.seed == 3 and cfg.eps_schedule == (0.3, 0.1) and cfg.out_dir == "elsewhere"
    assert "output" not in cfg.provenance()
    with pytest.raises(ConfigError):
        load_config().with_overrides(epsilons=[0.1, 0.3])
