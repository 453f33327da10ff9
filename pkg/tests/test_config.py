from __future__ import annotations

import pytest

from conftest import FIXTURES
from scpt.config import defaults_snapshot, load_config
from scpt.errors import ConfigError


def test_defaults_snapshot():
    snap = defaults_snapshot()
    assert snap["thresholds"] == {
        "bbbp": (0.2, 1), "drd2": (0.2, 1), "gsk3b": (0.05, 1), "hia": (0.05, 1),
        "jnk3": (0.05, 1), "mutag": (0.1, -1), "plogp": (1.0, 1), "qed": (0.1, 1),
    }
    assert (snap["gamma"], snap["gamma_mcs"], snap["candidates"], snap["beta"]) == (0.6, 0.9, 20, 0.5)


def test_empty_config_is_defaults():
    cfg = load_config(text="")
    assert cfg.pipeline.task == "plogp" and cfg.oracles == []
    assert cfg.radius == 2 and cfg.width == 2048 and cfg.seed == 0


def test_overrides():
    cfg = load_config(text="""
[task]
name = bdq
thresholds = drd2=0.3   # tighter
weights = qed=2
[pipeline]
window = 0.7, 0.8
[run]
seed = 9
""")
    by = {s.name: s for s in cfg.specs}
    assert by["drd2"].threshold == 0.3 and by["qed"].weight == 2.0
    assert (cfg.pipeline.similarity.lo, cfg.pipeline.similarity.hi) == (0.7, 0.8)
    assert cfg.seed == 9
    assert cfg.with_run(seed=4, jobs=None).seed == 4


def test_oracle_table(tmp_path):
    cfg = load_config(text=f"[oracle]\ntable = {FIXTURES / 'props10.tsv'}\ncolumns = plogp=plogp\n")
    assert cfg.oracles[0].provides == ("plogp",)


@pytest.mark.parametrize("text", [
    "[nope]\nx = 1\n",
    "[task]\nnmae = plogp\n",
    "[task]\nname = unknown\n",
    "[task]\nname = plogp\nthresholds = qed=0.1\n",
    "[pipeline]\ngamma = high\n",
    "[pipeline]\nwindow = 0.8, 0.7\n",
    "[pipeline]\ndelta = -1\n",
    "[fingerprint]\nwidth = 100\n",
    "[align]\nmode = sideways\n",
    "[oracle]\nbuiltin = qed\n",
    "[oracle]\nrename = a=b\n",
    "not an ini file",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        load_config(text=text)


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config(FIXTURES / "does_not_exist.ini")


def test_echo_is_plain_data():
    import json
    json.dumps(load_config(text="").echo())
