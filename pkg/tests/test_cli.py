import pytest

from app.api.config_parser import parse_config
from app.core.errors import ConfigurationError
from app.main import main
from app.services.envelope import EnvelopeOptions, EnvelopeSummary
from app.services.reporting import EnvelopeCache, cache_key, read_artifact

ENVELOPE_CONFIG = """\
seed = 11
[density]
label = quad
[grid]
ladder = 8, 16
[envelope]
random_starts = 1
laminate_seeds = 2
direction_count = 8
[sweep]
points = 3
"""


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    out = tmp_path / "out"
    monkeypatch.setenv("AQRELAX_OUTPUT_DIR", str(out))
    return out


def write_config(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_minimal_config_takes_defaults():
    config = parse_config("seed = 3\n")
    assert config.seed == 3
    assert config.operator.label == "div2d"
    assert config.grid.ladder == [8, 16, 32]
    assert config.relax.phi == "full"


def test_list_values_are_comma_separated():
    config = parse_config("seed = 3\n[grid]\nladder = 8, 16\n[relax]\nr_ladder = 0.5, 0.25\n")
    assert config.grid.ladder == [8, 16]
    assert config.relax.r_ladder == [0.5, 0.25]


def test_unknown_operator_is_reported_with_its_line():
    with pytest.raises(ConfigurationError) as e:
        parse_config("seed = 3\n[operator]\nlabel = div3d\n")
    assert "div3d" in str(e.value)
    assert any(line == 3 for line, _ in e.value.errors)


def test_every_error_is_collected():
    with pytest.raises(ConfigurationError) as e:
        parse_config("[grid]\nladder = 8\nsize = 4\n")
    messages = [msg for _, msg in e.value.errors]
    assert "missing seed" in messages
    assert (3, "unknown key 'size' in [grid]") in e.value.errors


def test_check_rank_writes_a_certificate(tmp_path, output_dir, capsys):
    config = write_config(tmp_path, "seed = 5\n[rank]\nsample_count = 64\nx_samples = 4\n")
    assert main(["check-rank", config]) == 0
    header, body = read_artifact(output_dir / "rank_certificate.txt")
    assert header["seed"] == 5
    assert header["command"] == "check-rank"
    assert '"verdict": "pass"' in body
    assert "check-rank: pass" in capsys.readouterr().out


def test_nonconstant_rank_operator_fails_the_verdict(tmp_path, output_dir):
    config = write_config(tmp_path, "seed = 5\n[operator]\nlabel = diag-nonconstant-rank\n"
                                    "[rank]\nsample_count = 64\nx_samples = 4\n")
    assert main(["check-rank", config]) == 2
    assert (output_dir / "rank_certificate.txt").exists()


def test_configuration_and_io_errors_have_their_own_exit_codes(tmp_path, output_dir):
    assert main(["check-rank", write_config(tmp_path, "seed = x\n")]) == 3
    assert main(["check-rank", str(tmp_path / "absent.ini")]) == 5


def test_envelope_sweep_is_reproducible(tmp_path, output_dir):
    config = write_config(tmp_path, ENVELOPE_CONFIG)
    assert main(["envelope", config]) == 0
    sweep = output_dir / "envelope_sweep.csv"
    cache = output_dir / "envelope_cache.json"
    first = sweep.read_bytes()
    assert cache.exists()
    assert first.count(b"\n") == 5

    # served from the cache
    assert main(["envelope", config]) == 0
    assert sweep.read_bytes() == first

    sweep.unlink()
    cache.unlink()
    assert main(["envelope", config]) == 0
    assert sweep.read_bytes() == first


def test_relax_writes_its_ladders(tmp_path, output_dir):
    config = write_config(tmp_path, "seed = 2\n[density]\nlabel = quad\n[grid]\nladder = 8\n"
                                    "[envelope]\nrandom_starts = 0\nlaminate_seeds = 0\n"
                                    "[relax]\nv = constant(0.2, 0)\ncell_points = 16\nm_ladder = 2, 4\n"
                                    "defect_r_ladder = 0.5, 0.25\n")
    assert main(["relax", config]) == 0
    for name in ("relaxation_report.txt", "rhs_points.csv", "lhs_ladder.csv", "defect_ladder.csv"):
        assert (output_dir / name).exists()


def test_cache_round_trip(tmp_path):
    options = EnvelopeOptions(ladder=[8, 16])
    key = cache_key("div2d", "quad", [0.0, 0.0], [0.0], [0.5, 0.0], options)
    assert key != cache_key("div2d", "quad", [0.0, 0.0], [0.0], [0.5, 1e-6], options)
    assert key == cache_key("div2d", "quad", [1e-12, 0.0], [0.0], [0.5, 0.0], options)

    summary = EnvelopeSummary(value=0.25, f_value=0.25, ladder_values=[0.25, 0.25], starts=[],
                              converged=True, minimizer_l2=0.0)
    path = tmp_path / "cache.json"
    cache = EnvelopeCache(path)
    assert cache.get(key) is None
    cache.put(key, summary)
    cache.save()

    reloaded = EnvelopeCache(path)
    assert len(reloaded) == 1
    assert reloaded.get(key) == summary
    assert reloaded.hits == 1


def test_decompose_labels_are_checked_before_running():
    with pytest.raises(ConfigurationError) as e:
        parse_config("seed = 3\n[decompose]\nensemble = spikes\ntail_factor = 3\n")
    assert (3, "unknown ensemble 'spikes' (known: concentration, oscillation)") in e.value.errors
    assert (4, "tail_factor 3.0 is not one of m_factors") in e.value.errors
