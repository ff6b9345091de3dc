import dataclasses

import pytest

from beliefmap.analysis import run_analysis
from beliefmap.config import (AnalysisConfig, ConfigFile,
                              analysis_config_from_mapping,
                              analysis_config_to_mapping, dumps_config,
                              load_config, loads_config, save_config,
                              validate_analysis_config)
from beliefmap.errors import ConfigFileError
from beliefmap.sim import SimConfig


def test_defaults_validate_clean():
    assert validate_analysis_config(AnalysisConfig()) == []


def test_mapping_round_trip():
    cfg = AnalysisConfig(stopwords_extra=("d20", "ooc"), terms_depth=10,
                         groups_include=("g1", "g2"), counts_include_dm=True)
    assert analysis_config_from_mapping(analysis_config_to_mapping(cfg)) == cfg


@pytest.mark.parametrize("fmt", ["xml", "json"])
def test_file_round_trip(tmp_path, fmt):
    cfg = ConfigFile(
        analysis=AnalysisConfig(stopwords_extra=("d20",), terms_depth=5),
        sim=dataclasses.replace(SimConfig(), steps=42, seed=7),
    )
    path = tmp_path / ("config.json" if fmt == "json" else "config.xml")
    save_config(cfg, path)
    loaded = load_config(path)
    assert loaded.analysis == cfg.analysis
    assert loaded.sim == cfg.sim


def test_missing_key_names_the_key():
    data = analysis_config_to_mapping(AnalysisConfig())
    del data["terms"]["depth"]
    with pytest.raises(ConfigFileError, match="terms.depth"):
        analysis_config_from_mapping(data)


def test_unknown_key_and_section_rejected():
    data = analysis_config_to_mapping(AnalysisConfig())
    data["terms"]["fancy"] = 1
    with pytest.raises(ConfigFileError, match="terms.fancy"):
        analysis_config_from_mapping(data)
    data2 = analysis_config_to_mapping(AnalysisConfig())
    data2["embeddings"] = {}
    with pytest.raises(ConfigFileError, match="embeddings"):
        analysis_config_from_mapping(data2)


def test_out_of_domain_value_is_field_error():
    cfg = dataclasses.replace(AnalysisConfig(), markers_similarity_threshold=1.01)
    errors = validate_analysis_config(cfg)
    assert any(e.field == "markers.similarity_threshold" for e in errors)


def test_empty_list_keys_allowed_in_xml():
    text = dumps_config(ConfigFile(analysis=AnalysisConfig()), fmt="xml")
    loaded = loads_config(text)
    assert loaded.analysis.stopwords_extra == ()
    assert loaded.analysis.groups_include == ()


def test_malformed_documents_rejected():
    with pytest.raises(ConfigFileError):
        loads_config("")
    with pytest.raises(ConfigFileError):
        loads_config("<config><analysis></config>")
    with pytest.raises(ConfigFileError):
        loads_config("{not json")
    with pytest.raises(ConfigFileError, match="root"):
        loads_config("<settings/>")
    with pytest.raises(ConfigFileError, match="mystery"):
        loads_config('{"mystery": {}}')


def test_sim_section_strict_in_files():
    with pytest.raises(ConfigFileError, match="missing sim config key"):
        loads_config('{"sim": {"dimensions": 2}}')
    full = SimConfig().to_mapping()
    import json
    cfg = loads_config(json.dumps({"sim": full}))
    assert cfg.sim == SimConfig()
    with pytest.raises(ConfigFileError, match="unknown sim config key"):
        full2 = dict(full, warp_drive=1)
        loads_config(json.dumps({"sim": full2}))


def test_saved_config_reproduces_identical_analysis(tmp_path, paper_corpus):
    cfg = AnalysisConfig(terms_depth=10)
    path = tmp_path / "config.xml"
    save_config(ConfigFile(analysis=cfg), path)
    loaded = load_config(path).analysis
    assert loaded == cfg
    r1 = run_analysis(paper_corpus, cfg)
    r2 = run_analysis(paper_corpus, loaded)
    from beliefmap.mapgen import export_map
    assert export_map(r1.belief_map, "structured") == export_map(r2.belief_map, "structured")
    assert export_map(r1.belief_map, "dot") == export_map(r2.belief_map, "dot")
