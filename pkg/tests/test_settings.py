import logging

import pytest

from bc_compose import settings
from bc_compose.pydantic.load import MERGE_WARNING
from bc_compose.pydantic.load import BcComposeConfig
from bc_compose.pydantic.load import load_pydantic_settings
from bc_compose.pydantic.settings import CliOptions


@pytest.fixture
def fresh_settings() -> BcComposeConfig:
    return load_pydantic_settings()


def test_packaged_settings_content() -> None:
    assert settings.tolerances.unitarity == 1e-10
    assert settings.tolerances.cluster == 1e-8
    assert settings.defaults.mass == 0.5
    assert settings.defaults.gaussian_center == 0.37
    assert settings.cli.order_band == (0.85, 1.15)
    assert settings.cli.jobs_env == "BC_COMPOSE_JOBS"


def test_set_option() -> None:
    local = load_pydantic_settings()
    local.tolerances["gap_threshold"] = 0.2
    local.tolerances.gap_threshold = 0.25
    assert local.tolerances.gap_threshold == 0.25


def test_merge_tomls_overrides_known_keys(fresh_settings: BcComposeConfig) -> None:
    merged = fresh_settings.merge_tomls("tests/external_tomls_samples")

    assert merged is fresh_settings
    assert merged.tolerances.cluster == 1e-9
    assert merged.defaults.grid == 128
    assert merged.cli.order_band == (0.8, 1.2)

    # untouched keys keep their packaged values
    assert merged.tolerances.unitarity == 1e-10
    assert merged.defaults.mass == 0.5

    # unknown sections and keys are ignored
    assert "unknown_section" not in merged
    assert "not_a_setting" not in merged.cli


def test_merge_tomls_warns_on_same_value(
    fresh_settings: BcComposeConfig, caplog: pytest.LogCaptureFixture
) -> None:
    with caplog.at_level(logging.WARNING, logger="bc_compose"):
        fresh_settings.merge_tomls("/tests/external_tomls_samples")

    messages = [record.getMessage() for record in caplog.records]
    assert MERGE_WARNING % "tolerances.null" in messages
    assert any("unknown_section" in message for message in messages)
    assert any("cli.not_a_setting" in message for message in messages)


def test_merge_tomls_missing_directory(fresh_settings: BcComposeConfig) -> None:
    with pytest.raises(FileNotFoundError):
        fresh_settings.merge_tomls("tests/no_such_directory")


def test_order_band_must_be_ordered() -> None:
    raw = settings.cli.model_dump()
    raw["order_band"] = (1.2, 0.8)
    with pytest.raises(ValueError, match="order_band"):
        CliOptions.model_validate(raw)
