# "[section]" / "key = value" configuration text -> RunConfig

import logging
from typing import Dict, List, Tuple, get_origin

from pydantic import BaseModel, ValidationError

from app.api.schema import COMMANDS, SECTIONS, RunConfig
from app.core.errors import ConfigurationError
from app.services.densities import resolve_density
from app.services.pseudodiff import ENSEMBLE_LABELS, resolve_eta
from app.services.relaxation import PHI_KINDS, resolve_field_source
from app.services.symbols import resolve_operator

TOP_LEVEL_KEYS = ("command", "seed", "output_dir")


def _split_lines(text: str, errors: List[Tuple[int, str]]):
    values: Dict[str, Dict[str, str]] = {"": {}}
    lines: Dict[Tuple[str, str], int] = {}
    section = ""
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                errors.append((number, f"unknown section [{section}]"))
            values.setdefault(section, {})
            lines[(section, "")] = number
            continue
        if "=" not in line:
            errors.append((number, f"expected 'key = value', got '{line}'"))
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if key in values[section]:
            errors.append((number, f"duplicate key '{key}'"))
        values[section][key] = value
        lines[(section, key)] = number
    return values, lines


def _coerce(model: type, section: str, raw: Dict[str, str], lines, errors) -> dict:
    out = {}
    for key, value in raw.items():
        field = model.model_fields.get(key)
        if field is None:
            errors.append((lines[(section, key)], f"unknown key '{key}' in [{section}]"))
        elif get_origin(field.annotation) is list:
            out[key] = [item.strip() for item in value.split(",") if item.strip()]
        else:
            out[key] = value
    return out


def _validate(model: type, data: dict, section: str, lines, errors):
    try:
        return model.model_validate(data)
    except ValidationError as e:
        for err in e.errors():
            key = str(err["loc"][0]) if err["loc"] else ""
            line = lines.get((section, key), lines.get((section, ""), 0))
            errors.append((line, f"{key}: {err['msg']}" if key else err["msg"]))
        return None


def _check_labels(config: RunConfig, lines, errors):
    def check(section, key, resolve):
        try:
            return resolve()
        except ConfigurationError as e:
            errors.append((lines.get((section, key), lines.get((section, ""), 0)), str(e)))
            return None

    coeffs = check("operator", "label", lambda: resolve_operator(config.operator.label, config.operator.params))
    check("density", "label", lambda: resolve_density(config.density.label, config.density.params))
    for eta in config.prop22.etas:
        check("prop22", "etas", lambda: resolve_eta(eta))
    check("decompose", "eta", lambda: resolve_eta(config.decompose.eta))
    if config.decompose.ensemble not in ENSEMBLE_LABELS:
        errors.append((lines.get(("decompose", "ensemble"), 0),
                       f"unknown ensemble '{config.decompose.ensemble}' (known: {', '.join(ENSEMBLE_LABELS)})"))
    if config.decompose.tail_factor not in config.decompose.m_factors:
        errors.append((lines.get(("decompose", "tail_factor"), lines.get(("decompose", ""), 0)),
                       f"tail_factor {config.decompose.tail_factor} is not one of m_factors"))
    check("relax", "u", lambda: resolve_field_source(config.relax.u, 1))
    if coeffs is not None:
        check("relax", "v", lambda: resolve_field_source(config.relax.v, coeffs.d))
    if config.relax.phi not in PHI_KINDS:
        errors.append((lines.get(("relax", "phi"), 0), f"unknown cutoff kind '{config.relax.phi}'"))
    if config.command is not None and config.command not in COMMANDS:
        errors.append((lines.get(("", "command"), 0), f"unknown command '{config.command}'"))


def parse_config(text: str) -> RunConfig:
    """Validated RunConfig, or ConfigurationError carrying every (line, message) found."""
    errors: List[Tuple[int, str]] = []
    values, lines = _split_lines(text, errors)

    top = {}
    for key, value in values.pop("").items():
        if key in TOP_LEVEL_KEYS:
            top[key] = value
        else:
            errors.append((lines[("", key)], f"unknown key '{key}'"))
    if "seed" not in top:
        errors.append((0, "missing seed"))

    sections: Dict[str, BaseModel] = {}
    for name, raw in values.items():
        model = SECTIONS.get(name)
        if model is None:
            continue
        section = _validate(model, _coerce(model, name, raw, lines, errors), name, lines, errors)
        if section is not None:
            sections[name] = section

    config = None
    if "seed" in top:
        config = _validate(RunConfig, {**top, **sections}, "", lines, errors)
    if config is not None:
        _check_labels(config, lines, errors)
    if errors:
        errors.sort(key=lambda e: e[0])
        logging.error(f"Configuration rejected with {len(errors)} error(s)")
        raise ConfigurationError("Invalid configuration", errors)
    return config
