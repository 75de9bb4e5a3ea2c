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

import json
from functools import singledispatch
from typing import Any, Iterable

import numpy as np
import pandas as pd
from pydantic import BaseModel


# to_list functions with datatype overloads
@singledispatch
def to_list(input_, /, *, flatten: bool = True, dropna: bool = True) -> list[Any]:
    """
    Converts the input object to a list.

    The default implementation handles general iterables, excluding strings,
    bytes, bytearrays and dictionaries, by converting them to a list, optionally
    flattening nested lists and dropping None values.

    Args:
            input_ (Any): The input object to convert to a list.
            flatten (bool): If True, nested lists are flattened.
            dropna (bool): If True, None values are removed from the resulting list.

    Returns:
            list[Any]: A list representation of the input.

    Raises:
            ValueError: If the input cannot be converted to a list.
    """
    try:
        if not isinstance(input_, Iterable) or isinstance(
            input_, (str, bytes, bytearray, dict, BaseModel)
        ):
            return [input_]
        iterable_list = list(input_)
        return _flatten_list(iterable_list, dropna) if flatten else iterable_list
    except Exception as e:
        raise ValueError(f"Could not convert {type(input_)} object to list: {e}") from e


@to_list.register(list)
def _(input_, /, *, flatten: bool = True, dropna: bool = True) -> list[Any]:
    return _flatten_list(input_, dropna) if flatten else input_


@to_list.register(tuple)
def _(input_, /, *, flatten=True, dropna=True):
    return _flatten_list(list(input_), dropna) if flatten else list(input_)


@to_list.register(np.ndarray)
def _(input_, /, *, flatten=True, dropna=True):
    """Arrays become plain python lists; ``flatten`` ravels first."""
    return input_.ravel().tolist() if flatten else input_.tolist()


# to_dict functions with datatype overloads
@singledispatch
def to_dict(input_, /, **kwargs) -> dict[Any, Any]:
    """
    Converts the input object to a dictionary.

    Supports dicts, JSON strings, pandas Series and pydantic models; arrays held
    inside the result are turned into lists so the output is JSON-serializable.

    Raises:
            ValueError: For unsupported types.
    """
    raise ValueError(f"Unsupported type for to_dict: {type(input_)}")


@to_dict.register(dict)
def _(input_, /, **kwargs) -> dict[Any, Any]:
    return {k: _jsonable(v) for k, v in input_.items()}


@to_dict.register(str)
def _(input_, /, **kwargs) -> dict[Any, Any]:
    try:
        return json.loads(input_, **kwargs)
    except json.JSONDecodeError as e:
        raise ValueError(f"Could not convert input_ to dict: {e}") from e


@to_dict.register(pd.Series)
def _(input_, /, **kwargs) -> dict[Any, Any]:
    return {k: _jsonable(v) for k, v in input_.to_dict(**kwargs).items()}


@to_dict.register(BaseModel)
def _(input_, /, by_alias: bool = True, **kwargs) -> dict[Any, Any]:
    return {k: _jsonable(v) for k, v in input_.model_dump(by_alias=by_alias, **kwargs).items()}


def to_str(input_: Any, /, **kwargs) -> str:
    """Converts the input to a compact JSON string (arrays become lists)."""
    if isinstance(input_, str):
        return input_
    if isinstance(input_, (dict, BaseModel, pd.Series)):
        input_ = to_dict(input_)
    return json.dumps(_jsonable(input_), **kwargs)


# to_df functions with datatype overloads
@singledispatch
def to_df(
    input_: Any,
    /,
    *,
    how: str = "all",
    reset_index: bool = True,
    **kwargs: Any,
) -> pd.DataFrame:
    """
    Converts various input types to a pandas DataFrame, dropping all-empty rows
    and optionally resetting the index.

    Args:
            input_ (Any): The input data to convert into a DataFrame.
            how (str): Passed to DataFrame.dropna().
            reset_index (bool): If True, the DataFrame index will be reset.
            **kwargs: Additional keyword arguments for the DataFrame constructor.

    Raises:
            ValueError: If there is an error during the conversion process.
    """
    try:
        dfs = pd.DataFrame(input_, **kwargs)
        dfs = dfs.dropna(how=how)
        return dfs.reset_index(drop=True) if reset_index else dfs
    except Exception as e:
        raise ValueError(f"Error converting input_ to DataFrame: {e}") from e


@to_df.register(list)
def _(
    input_,
    /,
    *,
    how: str = "all",
    reset_index: bool = True,
    **kwargs,
) -> pd.DataFrame:
    if not input_:
        return pd.DataFrame(**kwargs)
    if isinstance(input_[0], (pd.DataFrame, pd.Series)):
        try:
            dfs = pd.concat(input_)
        except Exception as e:
            raise ValueError(f"Error converting input_ to DataFrame: {e}") from e
    else:
        rows = [to_dict(i) if isinstance(i, BaseModel) else i for i in input_]
        try:
            dfs = pd.DataFrame(rows, **kwargs)
        except Exception as e:
            raise ValueError(f"Error converting input_ to DataFrame: {e}") from e
    dfs = dfs.dropna(how=how)
    return dfs.reset_index(drop=True) if reset_index else dfs


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _dropna_iterator(lst_: list[Any]) -> iter:
    return (item for item in lst_ if item is not None)


def _flatten_list(lst_: list[Any], dropna: bool = True) -> list[Any]:
    flattened_list = list(_flatten_list_generator(lst_, dropna))
    return list(_dropna_iterator(flattened_list)) if dropna else flattened_list


def _flatten_list_generator(lst_: list[Any], dropna: bool = True):
    for i in lst_:
        if isinstance(i, list):
            yield from _flatten_list_generator(i, dropna)
        else:
            yield i
