import pytest

from qpcascade.config import Settings, load_config, parse_config
from qpcascade.errors import ConfigError
from qpcascade.event import ChipGeometry

SAMPLE = """
# a smaller chip
chip_area_mm2 = 25
normal_thickness_um = 6   # trailing comment
wirebonds.count = 120
event.conversion_efficiency = 0.5
backside.r_eff_ohm = 0.01
material.Al.tau0_ns = 400
"""


def test_parse_sections():
    s = parse_config(SAMPLE)
    assert s.geometry == {"chip_area_mm2": 25.0, "normal_thickness_um": 6.0}
    assert s.wirebonds == {"count": 120}
    assert isinstance(s.wirebonds["count"], int)
    assert s.event == {"conversion_efficiency": 0.5}
    assert s.backside == {"r_eff_ohm": 0.01}
    assert s.materials == {"Al": {"tau0_ns": 400.0}}


def test_settings_build_objects():
    s = parse_config(SAMPLE)
    g = s.chip_geometry()
    assert g.chip_area_mm2 == 25.0 and g.wirebonds.count == 120
    assert g.substrate_thickness_mm == ChipGeometry().substrate_thickness_mm
    assert s.event_config(design="improved").conversion_efficiency == 0.5
    assert s.backside_circuit().r_eff_ohm == 0.01
    assert s.material("Al").tau0_ns == 400.0
    assert s.material("Cu").sigma_ep_nW_per_um3K5 == 2.0


def test_empty_config_is_defaults():
    s = parse_config("\n# nothing\n")
    assert s == Settings()
    assert s.chip_geometry() == ChipGeometry()


@pytest.mark.parametrize(
    "text,line",
    [
        ("chip_area_mm2 25", 1),
        ("\nchip_area = 3", 2),
        ("chip_area_mm2 = big", 1),
        ("wirebonds.count = 2.5", 1),
        ("material.Nb.tau0_ns = 1", 1),
        ("material.Al.color = 1", 1),
        ("event.design = 1", 1),
        ("= 3", 1),
    ],
)
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(ConfigError, match=f"line {line}"):
        parse_config(text)


def test_invalid_values_surface_as_config_errors():
    with pytest.raises(ConfigError):
        parse_config("chip_area_mm2 = -1").chip_geometry()
    with pytest.raises(ConfigError):
        parse_config("material.Al.tau0_ns = 0").material("Al")


def test_load_config(tmp_path):
    p = tmp_path / "chip.cfg"
    p.write_text(SAMPLE, encoding="utf-8")
    assert load_config(p).geometry["chip_area_mm2"] == 25.0
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")
