from superposition_networks.experiment_config.experiment_config import (
    ExperimentConfig,
    load_schema,
    resolve_fixture,
)

__all__ = ["ExperimentConfig", "load_schema", "resolve_fixture"]
