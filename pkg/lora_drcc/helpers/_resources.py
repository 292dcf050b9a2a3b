from __future__ import annotations

import typing as t

from lora_drcc.helpers._compat import importlib_resources

if t.TYPE_CHECKING:
    from types import ModuleType

    from lora_drcc.helpers._compat import Traversable


def get_package_files(package: str | ModuleType) -> Traversable:
    """Locate the files shipped inside a package.

    Args:
        package: The package to look into.

    Returns:
        The package root as a Traversable object.
    """
    return importlib_resources.files(package)
