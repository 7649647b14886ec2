import pytest

from config.presets import BUILTIN_PRESETS, TABLE_PRESETS, load_preset, preset_from_mapping
from models.errors import InvalidParametersError, UnknownPresetError

TOY_FILE = "q_base=2\nq_exp=4\ns=4\nv=2\nn=12\nk=6\nm=40\nL=5\nf=1\n"


def test_builtin_table_presets():
    assert len(TABLE_PRESETS) == 6
    for name in TABLE_PRESETS:
        preset = BUILTIN_PRESETS[name]
        assert preset.stored_delta == preset.params.delta
        assert preset.params.m == 100 and preset.params.L == 1000
    assert BUILTIN_PRESETS["table1-row4"].params.delta == 120
    assert BUILTIN_PRESETS["table1-row6"].params.q == 2**61 - 1


def test_toy_and_figure_presets():
    assert load_preset("toy16").params.delta == 12
    assert load_preset("toy32").params.q == 32
    assert load_preset("fig4-xpir").params.delta == 100
    assert load_preset("fig5-simplepir").params.q_exp == 135
    assert load_preset("fig5-caption").params.q_exp == 104


def test_load_preset_file(tmp_path):
    path = tmp_path / "mine.env"
    path.write_text("# desk instance\n" + TOY_FILE + "delta=12\n")
    preset = load_preset(path)
    assert preset.name == "mine"
    assert preset.params == BUILTIN_PRESETS["toy16"].params
    assert preset.provenance.startswith("file ")


def test_preset_file_defaults_and_name(tmp_path):
    path = tmp_path / "small.env"
    path.write_text("name=custom\nq_base=5\ns=3\nv=1\nn=6\nk=3\n")
    preset = load_preset(str(path))
    assert preset.name == "custom"
    assert (preset.params.q_exp, preset.params.m, preset.params.L, preset.params.f) == (1, 1, 1, 1)


def test_unknown_preset():
    with pytest.raises(UnknownPresetError):
        load_preset("no-such-preset")


@pytest.mark.parametrize("content", [
    TOY_FILE.replace("v=2", "v=4"),
    TOY_FILE.replace("k=6", "k=12"),
    TOY_FILE.replace("q_base=2", "q_base=4"),
    TOY_FILE.replace("n=12", "n=twelve"),
    TOY_FILE + "delta=13\n",
    TOY_FILE + "colour=blue\n",
], ids=["v-equals-s", "k-equals-n", "non-prime", "not-an-integer", "delta-mismatch", "unknown-key"])
def test_invalid_preset_files(tmp_path, content):
    path = tmp_path / "bad.env"
    path.write_text(content)
    with pytest.raises(InvalidParametersError):
        load_preset(path)


def test_preset_from_mapping_missing_key():
    with pytest.raises(InvalidParametersError):
        preset_from_mapping("partial", {"q_base": "2", "s": "4"})
