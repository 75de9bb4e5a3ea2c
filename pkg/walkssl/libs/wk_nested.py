"""
Copyright 2024 The walkssl authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""

from typing import Any, Generator


def nset(nested_structure: dict, indices: list[str], value: Any) -> None:
    """
    sets a value inside a nested dictionary, creating intermediate levels.

    Raises:
            ValueError: If an intermediate level exists and is not a dictionary.
    """
    if not indices:
        raise ValueError("Indices list is empty, cannot determine target container")
    target = nested_structure
    for key in indices[:-1]:
        nxt = target.setdefault(key, {})
        if not isinstance(nxt, dict):
            raise ValueError(f"'{key}' already holds a value and cannot be nested")
        target = nxt
    target[indices[-1]] = value


def flatten(
    nested_structure: dict,
    /,
    *,
    parent_key: str = "",
    sep: str = ".",
    max_depth: int | None = None,
) -> dict[str, Any]:
    """
    flattens a nested dictionary into a dictionary with composite keys.

    Args: nested_structure: The nested dictionary to flatten. parent_key: A
    prefix for all keys. sep: The separator used between levels in composite
    keys. max_depth: The maximum depth to flatten; if None, flattens completely.

    examples:
            >>> flatten({'a': {'b': {'c': 1}}})
            {'a.b.c': 1}
    """
    parent_key_tuple = tuple(parent_key.split(sep)) if parent_key else ()
    return dict(
        _dynamic_flatten_generator(
            nested_structure,
            parent_key=parent_key_tuple,
            sep=sep,
            max_depth=max_depth,
        )
    )


def unflatten(flat_dict: dict[str, Any], /, *, sep: str = ".") -> dict:
    """
    reconstructs a nested dictionary from a flat dictionary with composite keys.

    examples:
            >>> unflatten({'a.b.c': 1, 'a.d': 2})
            {'a': {'b': {'c': 1}, 'd': 2}}
    """
    unflattened: dict = {}
    for composite_key, value in flat_dict.items():
        nset(unflattened, composite_key.split(sep), value)
    return unflattened


def _dynamic_flatten_generator(
    nested_structure: Any,
    parent_key: tuple[str, ...],
    sep: str = ".",
    max_depth: int | None = None,
    current_depth: int = 0,
) -> Generator[tuple[str, Any], None, None]:
    if max_depth is not None and current_depth > max_depth:
        yield sep.join(parent_key), nested_structure
        return

    if isinstance(nested_structure, dict) and nested_structure:
        for k, v in nested_structure.items():
            yield from _dynamic_flatten_generator(
                v, parent_key + (str(k),), sep, max_depth, current_depth + 1
            )
    else:
        yield sep.join(parent_key), nested_structure
