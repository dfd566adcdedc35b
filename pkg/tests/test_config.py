from configparser import ConfigParser

import pytest

from nnlab.config import CONFIG_PATH, RunConfig, _import_settings, load_config
from nnlab.errors import ConfigError
from nnlab.write_config import config as generated


def test_shipped_defaults():
    config = load_config(CONFIG_PATH)
    assert config == RunConfig()
    assert config.exact and config.exact_cap == 5000
    assert config.precision_bits == 128 and config.shortfall_tolerance == 0.02


def test_overrides_skip_none():
    config = load_config(mode='float', exact_cap=None, seed=7)
    assert not config.exact
    assert config.exact_cap == 5000 and config.seed == 7
    assert config.with_overrides(seed=None, history=3).history == 3


def test_digest_is_stable():
    assert load_config().digest() == load_config().digest()
    assert load_config(seed=1).digest() != load_config(seed=2).digest()
    assert load_config().as_dict()["mode"] == 'exact'


@pytest.mark.parametrize('overrides', [dict(mode='fast'), dict(exact_cap=0), dict(checkpoint_ratio=1.0),
                                       dict(tail_fraction=1.0)])
def test_rejects_bad_values(overrides):
    with pytest.raises(ConfigError):
        load_config(**overrides)


def test_environment(monkeypatch, tmp_path):
    monkeypatch.setenv('NNLAB_PRECISION_BITS', '512')
    assert load_config().precision_bits == 512
    monkeypatch.setenv('NNLAB_PRECISION_BITS', 'many')
    with pytest.raises(ConfigError):
        load_config()
    monkeypatch.delenv('NNLAB_PRECISION_BITS')

    custom = tmp_path / "custom.ini"
    custom.write_text(open(CONFIG_PATH).read().replace('exact_cap = 5000', 'exact_cap = 40'))
    monkeypatch.setenv('NNLAB_CONFIG', str(custom))
    assert load_config().exact_cap == 40


def test_broken_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.ini"))
    partial = tmp_path / "partial.ini"
    partial.write_text("[arithmetic]\nmode = exact\n")
    with pytest.raises(ConfigError):
        load_config(str(partial))
    bad = tmp_path / "bad.ini"
    bad.write_text(open(CONFIG_PATH).read().replace('exact_cap = 5000', 'exact_cap = lots'))
    with pytest.raises(ConfigError):
        load_config(str(bad))


def test_broken_environment_falls_back_to_defaults(monkeypatch, tmp_path, caplog):
    monkeypatch.setenv('NNLAB_CONFIG', str(tmp_path / "nonexistent.ini"))
    assert _import_settings() == RunConfig()
    assert "using built-in defaults" in caplog.text
    monkeypatch.delenv('NNLAB_CONFIG')
    monkeypatch.setenv('NNLAB_PRECISION_BITS', 'abc')
    assert _import_settings() == RunConfig()


def test_generator_matches_shipped_file():
    shipped = ConfigParser()
    shipped.read(CONFIG_PATH)
    assert {s: dict(shipped[s]) for s in shipped.sections()} == {s: dict(generated[s]) for s in generated.sections()}
