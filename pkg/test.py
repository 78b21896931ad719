# test.py
import json
import logging
import os

import pytest

from lexicalmodularity.config.settings import (
    RunConfig,
    default_threads,
    load_environment,
    parse_language_path,
    parse_preprocess,
)
from lexicalmodularity.utils.constants import DEFAULT_PREPROCESS, PreprocessStep
from lexicalmodularity.utils.errors import InvalidParameterError
from lexicalmodularity.utils.formatting_helpers import format_duration, format_full, format_real, truncate
from lexicalmodularity.utils.helpers import read_tsv, sibling_path, write_json, write_tsv
from lexicalmodularity.utils.logging_utils import setup_logging


def test_format_duration():
    assert format_duration(3661) == "01:01:01"  # 1 hour, 1 minute, 1 second
    assert format_duration(60) == "00:01:00"    # 1 minute
    assert format_duration(0) == "00:00:00"
    assert format_duration(59.9) == "00:00:59"  # fractions are dropped


def test_truncate():
    assert truncate("Hello, World!", 5) == "He..."  # Truncate to 5 characters
    assert truncate("Hello, World!", 20) == "Hello, World!"  # No truncation needed
    assert truncate("", 10) == ""  # Empty string


def test_format_real():
    assert format_real(0.5) == "0.500000"
    assert format_real(-1 / 3) == "-0.333333"
    assert format_real(None) == ""
    assert format_real(float("nan")) == ""
    assert float(format_full(0.1 + 0.2)) == 0.1 + 0.2  # round-trips


def test_tsv_round_trip(tmp_path):
    path = write_tsv(tmp_path / "out" / "table.tsv", ("a", "b"), [(1, "x"), (2, "y")])
    assert path.read_text(encoding="utf-8") == "a\tb\n1\tx\n2\ty\n"
    assert read_tsv(path) == [{"a": "1", "b": "x"}, {"a": "2", "b": "y"}]
    assert not (tmp_path / "out" / "table.tsv.tmp").exists()


def test_write_json_is_sorted(tmp_path):
    path = write_json(tmp_path / "r.json", {"b": 1, "a": [1.5]})
    text = path.read_text(encoding="utf-8")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [1.5], "b": 1}


def test_write_json_reals_have_seventeen_digits(tmp_path):
    path = write_json(tmp_path / "r.json", {"q": 0.1, "one": 1.0, "nested": {"tiny": 1e-20}, "k": 3})
    text = path.read_text(encoding="utf-8")
    assert '"q": 0.10000000000000001' in text
    assert '"one": 1.0' in text
    assert '"k": 3' in text
    assert json.loads(text) == {"q": 0.1, "one": 1.0, "nested": {"tiny": 1e-20}, "k": 3}


def test_sibling_path():
    assert str(sibling_path("out/bli.tsv", ".summary.json")) == os.path.join("out", "bli.summary.json")


def test_parse_language_path():
    assert parse_language_path("en=data/wiki.en.vec") == ("en", "data/wiki.en.vec")
    with pytest.raises(InvalidParameterError):
        parse_language_path("data/wiki.en.vec")
    with pytest.raises(InvalidParameterError):
        parse_language_path("en=")


def test_parse_preprocess():
    assert parse_preprocess("unit,center,unit") == DEFAULT_PREPROCESS
    assert parse_preprocess("center") == (PreprocessStep.CENTER,)
    assert parse_preprocess("none") == ()
    with pytest.raises(InvalidParameterError):
        parse_preprocess("unit,whiten")


def test_run_config_defaults():
    config = RunConfig(subcommand="modularity")
    assert (config.k, config.trees, config.kappa, config.limit, config.seed) == (3, 450, 10, 10000, 0)
    assert config.preprocess == DEFAULT_PREPROCESS
    assert config.use_forest


def test_run_config_record_leaves_out_threads():
    one = RunConfig(subcommand="modularity", embeddings=[("en", "a.vec")], threads=1).to_record()
    eight = RunConfig(subcommand="modularity", embeddings=[("en", "a.vec")], threads=8).to_record()
    assert "threads" not in one
    assert one == eight
    assert one["embeddings"] == ["en=a.vec"]
    assert one["preprocess"] == ["unit", "center", "unit"]
    json.dumps(one)  # serializable


def test_run_config_validate():
    with pytest.raises(InvalidParameterError):
        RunConfig(subcommand="modularity", k=0).validate()
    with pytest.raises(InvalidParameterError):
        RunConfig(subcommand="sweep", k_values=[3, 0]).validate()


def test_default_threads(monkeypatch):
    monkeypatch.setenv("LEXMOD_THREADS", "6")
    assert default_threads() == 6
    monkeypatch.setenv("LEXMOD_THREADS", "many")
    with pytest.raises(InvalidParameterError):
        default_threads()
    monkeypatch.delenv("LEXMOD_THREADS")
    assert default_threads() >= 1


def test_load_environment_reads_dotenv(tmp_path, monkeypatch):
    # Create a temporary .env file with an optional setting
    (tmp_path / ".env").write_text("LEXMOD_THREADS=3\n")
    monkeypatch.delenv("LEXMOD_THREADS", raising=False)

    # Temporarily change the working directory to the temporary directory
    monkeypatch.chdir(tmp_path)
    load_environment()
    assert os.environ["LEXMOD_THREADS"] == "3"
    monkeypatch.delenv("LEXMOD_THREADS")


def test_setup_logging_writes_log_file(tmp_path, monkeypatch):
    monkeypatch.setenv("LEXMOD_LOG_DIR", str(tmp_path / "logs"))
    setup_logging(console_level="WARNING")
    logging.getLogger("lexicalmodularity.test").debug("hello from the test")
    for handler in logging.getLogger().handlers:
        handler.flush()
    log_file = tmp_path / "logs" / "lexicalmodularity.log"
    assert log_file.exists()
    assert "hello from the test" in log_file.read_text(encoding="utf-8")
