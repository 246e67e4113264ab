# Copyright (c) 2025, superposition_networks contributors
# For license information, please see license.txt

import json
from pathlib import Path

from superposition_networks import hooks, logger, throw
from superposition_networks.exceptions import SchemaError, ValidationError

SCHEMA_PATH = Path(__file__).with_name("experiment_config.json")
PACKAGE_DIR = Path(__file__).resolve().parent.parent
LAYOUT_TYPES = ("Section Break", "Column Break")


def load_schema():
    with open(SCHEMA_PATH) as handle:
        return json.load(handle)


def resolve_fixture(value):
    """A shipped fixture name, with or without ``.json``, maps to its packaged file; anything else is a path."""
    if value in hooks.fixtures:
        return PACKAGE_DIR / hooks.fixtures[value]
    path = Path(value)
    if not path.is_file() and path.suffix == ".json" and path.stem in hooks.fixtures and path.name == value:
        return PACKAGE_DIR / hooks.fixtures[path.stem]
    if not path.is_file():
        throw(f"File not found: {value}", ValidationError)
    return path


class ExperimentConfig:
    """
    Resolved settings of one CLI run.

    Defaults come from experiment_config.json, then a user config file,
    then command-line flags.
    """

    def __init__(self, subcommand):
        schema = load_schema()
        self.subcommand = subcommand
        self.fields = {f["fieldname"]: f for f in schema["fields"] if f["fieldtype"] not in LAYOUT_TYPES}
        self.values = {name: self._coerce(f, f.get("default")) for name, f in self.fields.items()}

    @classmethod
    def from_sources(cls, subcommand, config_file=None, overrides=None):
        config = cls(subcommand)
        if config_file:
            with open(config_file) as handle:
                config.update(json.load(handle))
        config.update({key: value for key, value in (overrides or {}).items() if value is not None})
        config.validate()
        return config

    def __getattr__(self, name):
        values = self.__dict__.get("values", {})
        if name in values:
            return values[name]
        raise AttributeError(name)

    def update(self, values):
        for key, value in values.items():
            if key not in self.fields:
                throw(f"Unknown config field {key!r}", SchemaError)
            self.values[key] = self._coerce(self.fields[key], value)

    def _coerce(self, field, value):
        if value is None or value == "":
            return None
        fieldtype = field["fieldtype"]
        name = field["fieldname"]
        try:
            if fieldtype == "Int":
                return int(value)
            if fieldtype == "Float":
                return float(value)
            if fieldtype == "Check":
                return bool(int(value)) if isinstance(value, str) else bool(value)
            if fieldtype == "Small Text":
                items = value.split(",") if isinstance(value, str) else list(value)
                cast = int if field.get("options") == "Int" else float
                return [cast(item) for item in items if str(item).strip() != ""]
        except (TypeError, ValueError):
            throw(f"{field['label']} ({name}): cannot read {value!r} as {fieldtype}", SchemaError)
        return str(value)

    def validate(self):
        if self.subcommand not in hooks.commands:
            throw(f"Unknown subcommand {self.subcommand!r}", ValidationError)
        for name, field in self.fields.items():
            value = self.values[name]
            if field["fieldtype"] == "Select" and value not in field["options"].split("\n"):
                throw(f"{field['label']}: {value!r} is not one of {field['options'].split()}", ValidationError)
            if field["fieldtype"] == "Small Text" and not value:
                throw(f"{field['label']}: the sweep grid is empty", ValidationError)

        for name in ("m", "trials", "seeds", "samples", "M", "K", "L", "cut_limit"):
            if self.values[name] is None or self.values[name] < 1:
                throw(f"{self.fields[name]['label']} must be a positive integer", ValidationError)
        if not self.values["epsilon"] or self.values["epsilon"] <= 0:
            throw("Typicality Tolerance must be positive", ValidationError)
        for name in ("prune_exponent", "eta"):
            if self.values[name] is not None and self.values[name] < 0:
                throw(f"{self.fields[name]['label']} must be non-negative", ValidationError)

        if self.values["seed"] is None:
            if self.subcommand == "verify":
                self.values["seed"] = hooks.verify_seed
            elif self.subcommand in hooks.stochastic_commands:
                throw(f"{self.subcommand} draws random numbers; pass --seed", ValidationError)
        logger("config").debug(f"Resolved config for {self.subcommand}: {self.values}")

    def network_path(self, default=None):
        value = self.values["network"] or default
        if not value:
            throw(f"{self.subcommand} needs --network", ValidationError)
        return resolve_fixture(value)

    def code_path(self):
        return resolve_fixture(self.values["code"])

    def as_dict(self):
        return {"subcommand": self.subcommand, **dict(sorted(self.values.items()))}
