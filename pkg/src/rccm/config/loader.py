"""Loading of YAML/JSON configuration documents into validated models."""

from pathlib import Path
from typing import Type, TypeVar, Union

import yaml
from pydantic import BaseModel, ValidationError

from ..exceptions import ConfigurationError

ModelT = TypeVar("ModelT", bound=BaseModel)


def load_config(path: Union[str, Path], model: Type[ModelT]) -> ModelT:
    """
    Read a configuration file and validate it against a model.

    JSON is a subset of YAML, so both formats go through ``yaml.safe_load``.

    Args:
        path: Path to a ``.yaml``, ``.yml`` or ``.json`` document
        model: Pydantic model class to validate against

    Returns:
        The validated model instance

    Raises:
        ConfigurationError: If the file is unreadable, malformed or invalid
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = yaml.safe_load(handle)
    except OSError as e:
        raise ConfigurationError(f"Cannot read configuration {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Invalid YAML/JSON format in {path}: {e}") from e

    if document is None:
        document = {}
    if not isinstance(document, dict):
        raise ConfigurationError(f"Configuration {path} must be a mapping, got {type(document).__name__}")

    try:
        return model.model_validate(document)
    except ValidationError as e:
        errors = e.errors(include_url=False)
        keys = ", ".join(".".join(str(part) for part in err["loc"]) or "<root>" for err in errors)
        raise ConfigurationError(
            f"Invalid {model.__name__} in {path}: offending keys {keys}", errors=errors
        ) from e
