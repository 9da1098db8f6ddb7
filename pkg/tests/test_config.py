import pytest

from emergence_lab.config import (
    ConfigError,
    RunConfig,
    format_config,
    get_float,
    get_floats,
    get_int,
    get_ints,
    get_str,
    load_config,
    parse_config,
    system_from_config,
    system_from_name,
)


def test_parse_comments_and_blanks():
    cfg = parse_config("# header\n\nsystem = mul_3  # inline\norbit.n=1000\n")
    assert cfg == {"system": "mul_3", "orbit.n": "1000"}


@pytest.mark.parametrize("text", ["novalue\n", "=3\n", "a=1\na=2\n"])
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_load_and_format_roundtrip(tmp_path):
    cfg = {"b": "2", "a": "x"}
    p = tmp_path / "c.cfg"
    p.write_text(format_config(cfg))
    assert load_config(p) == cfg
    assert load_config(None) == {}


def test_getters_and_resolved():
    cfg = RunConfig({"n": "5", "x": "0.5", "grid": "0.2, 0.1", "periods": "6..9", "ks": "1,3"})
    assert get_int(cfg, "n", 1) == 5
    assert get_int(cfg, "missing", 7) == 7
    assert get_float(cfg, "x", 0.0) == 0.5
    assert get_floats(cfg, "grid", ()) == (0.2, 0.1)
    assert get_ints(cfg, "periods", ()) == (6, 7, 8, 9)
    assert get_ints(cfg, "ks", ()) == (1, 3)
    assert get_str(cfg, "name", "dflt") == "dflt"
    assert cfg.resolved == {
        "n": 5, "missing": 7, "x": 0.5, "grid": [0.2, 0.1], "periods": [6, 7, 8, 9], "ks": [1, 3], "name": "dflt",
    }


@pytest.mark.parametrize("getter,value", [(get_int, "1.5"), (get_float, "abc"), (get_floats, "0.1,x"), (get_ints, "1..b")])
def test_getter_errors(getter, value):
    with pytest.raises(ConfigError):
        getter({"k": value}, "k", 0)


def test_plain_dict_getters_do_not_record():
    assert get_int({}, "n", 3) == 3


@pytest.mark.parametrize("name,params,expected", [
    ("mul_3", {}, 3),
    ("mul_k", {"k": "5"}, 5),
])
def test_mul_names(name, params, expected):
    sys = system_from_name(name, params)
    assert sys.kind == "mul_k" and sys.params[0] == expected


def test_named_systems():
    for name in ("identity", "rotation", "tent", "logistic", "cat_map", "standard_map", "product"):
        assert system_from_name(name).name
    assert system_from_name("product", {"components": "mul_2,mul_3"}).dim == 2
    with pytest.raises(ConfigError):
        system_from_name("product", {"components": "mul_2"})
    with pytest.raises(ConfigError):
        system_from_name("henon")
    with pytest.raises(ConfigError):
        system_from_name("logistic", {"a": "big"})


def test_system_from_config_records_name():
    cfg = RunConfig({"system": "standard_map", "param.K": "0.5"})
    sys = system_from_config(cfg)
    assert sys.dim == 2 and cfg.resolved["system"] == sys.name
    assert system_from_config({}).name == system_from_name("mul_2").name
