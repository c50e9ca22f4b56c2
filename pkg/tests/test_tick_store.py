"""
Testes do armazenamento de ticks e do manifesto.
"""
import pandas as pd
import pytest

from src.core.errors import ConfigError
from src.db.tick_store import TickStore, load_ticks, tick_file_name
from src.models.reports import RunManifest, TrialArtifact


def tick_frame():
    return pd.DataFrame({
        "step": [1, 0, 2],
        "day": [0, 0, 0],
        "event": ["trade", "order", "snapshot"],
        "agent_id": [3, 3, None],
        "price": [300.5, 300.5, 300.5],
        "signed_volume": [2, 2, 0],
        "market_price": [300.5, 300.0, 300.5],
        "mid_price": [300.25, 300.25, 300.25],
        "ofi": [0.0, 1.0, 0.0],
    })


@pytest.mark.parametrize("fmt", ["csv", "jsonl"])
def test_save_and_load_ticks(tmp_path, fmt):
    store = TickStore(str(tmp_path))
    path = store.save_ticks(tick_frame(), seed=4, fmt=fmt)
    assert path.endswith(tick_file_name(4, fmt))

    loaded = load_ticks(path)
    assert list(loaded["step"]) == [0, 1, 2]
    assert loaded["agent_id"].isna().sum() == 1
    assert str(loaded["agent_id"].dtype) == "Int64"
    assert store.list_tick_files() == [path]


def test_refuses_to_overwrite(tmp_path):
    store = TickStore(str(tmp_path))
    store.save_ticks(tick_frame(), seed=0)
    with pytest.raises(ConfigError, match="--overwrite"):
        store.save_ticks(tick_frame(), seed=0)
    TickStore(str(tmp_path), overwrite=True).save_ticks(tick_frame(), seed=0)


def test_unknown_format(tmp_path):
    with pytest.raises(ConfigError):
        TickStore(str(tmp_path)).save_ticks(tick_frame(), seed=0, fmt="parquet")


def test_manifest_round_trip(tmp_path):
    store = TickStore(str(tmp_path))
    assert store.load_manifest() is None
    manifest = RunManifest(
        config={"n_agents": 2},
        seeds=[5],
        output_dir=str(tmp_path),
        started_at="2024-01-01T00:00:00+00:00",
        trials=[TrialArtifact(seed=5, tick_file=tick_file_name(5), fcl_ids=[1])],
    )
    store.save_manifest(manifest)
    assert store.load_manifest() == manifest

    with pytest.raises(ConfigError, match="--overwrite"):
        store.ensure_writable()
    TickStore(str(tmp_path), overwrite=True).ensure_writable()


def test_corrupt_manifest(tmp_path):
    (tmp_path / "manifest.json").write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="Manifesto corrompido"):
        TickStore(str(tmp_path)).load_manifest()


def test_load_missing_and_incomplete(tmp_path):
    with pytest.raises(ConfigError, match="não encontrado"):
        load_ticks(str(tmp_path / "ticks_seed0.csv"))
    broken = tmp_path / "ticks_seed1.csv"
    broken.write_text("step,day\n0,0\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="sem colunas"):
        load_ticks(str(broken))
