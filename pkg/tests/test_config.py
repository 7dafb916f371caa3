"""Configuration loading and validation."""

import pytest

from a11y_forge.config import ConfigError, EngineConfig, config_from_dict, load_config
from a11y_forge.wcag import CRITERIA, Level, extract_criterion_id, lookup


def test_defaults():
    config = EngineConfig()
    assert config.provider == "replay"
    assert config.dedupe is True
    assert config.temperature == 0.0
    assert config.debounce_ms == 300


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="mystery"):
        config_from_dict({"mystery": 1})


def test_unknown_provider_rejected():
    with pytest.raises(ConfigError, match="provider"):
        EngineConfig(provider="psychic").validate()


def test_replay_requires_fixtures():
    with pytest.raises(ConfigError, match="fixtures"):
        EngineConfig(provider="replay", fixtures_dirs=[]).validate()


def test_live_requires_endpoint():
    with pytest.raises(ConfigError, match="endpoint"):
        EngineConfig(provider="live", endpoint="", model="m").validate()


def test_unknown_rule_rejected():
    with pytest.raises(ConfigError, match="made-up-rule"):
        EngineConfig(
            provider="replay", fixtures_dirs=["x"], enabled_rules={"made-up-rule"}
        ).validate()


def test_budget_positive():
    with pytest.raises(ConfigError, match="budget"):
        EngineConfig(
            provider="replay", fixtures_dirs=["x"], prompt_char_budget=0
        ).validate()


def test_toml_loading(tmp_path):
    path = tmp_path / "a11y-forge.toml"
    path.write_text(
        'provider = "live"\nmodel = "llama3"\nendpoint = "http://host:1234"\n'
        "dedupe = false\nprompt_char_budget = 9000\n"
    )
    config = load_config(str(path))
    assert config.provider == "live"
    assert config.model == "llama3"
    assert config.dedupe is False
    assert config.prompt_char_budget == 9000


def test_toml_syntax_error(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("provider = [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_missing_explicit_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "nope.toml"))


# -- embedded WCAG table ---------------------------------------------------------


def test_wcag_table_counts():
    levels = {}
    for criterion in CRITERIA.values():
        levels.setdefault(criterion.level, 0)
        levels[criterion.level] += 1
    assert levels[Level.A] == 31
    assert levels[Level.AA] == 24
    assert "4.1.1" not in CRITERIA  # removed in 2.2


def test_wcag_lookup_and_urls():
    keyboard = lookup("2.1.1")
    assert keyboard.name == "Keyboard"
    assert keyboard.level is Level.A
    assert keyboard.reference_url.endswith("/keyboard")
    assert lookup("2.5.8").version_introduced == "2.2"
    assert lookup("1.3.5").version_introduced == "2.1"


def test_wcag_criterion_extraction():
    assert extract_criterion_id("WCAG 2.1.1 Keyboard") == "2.1.1"
    assert extract_criterion_id("criterion 1.4.13.") == "1.4.13"
    assert extract_criterion_id("no number here") is None
    assert extract_criterion_id("") is None
