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

from __future__ import annotations

import functools
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable

from walkssl.libs.wk_convert import to_list


def lcall(
    input_: Any,
    /,
    func: Callable,
    *,
    threads: int = 1,
    flatten: bool = False,
    dropna: bool = False,
    **kwargs,
) -> list[Any]:
    """
    applies a function to each element of the input list, optionally on a thread
    pool, with options to flatten results and drop None values.

    results always come back in input order, so the outcome does not depend on
    the number of threads as long as ``func`` is a pure function of its input.

    Args:
            input_ (Any):
                    The input list or iterable to process.
            func (Callable):
                    The function to apply to each element of `input_`.
            threads (int, optional):
                    Worker threads; 1 runs sequentially in the calling thread.
            flatten (bool, optional):
                    If True, the resulting list is flattened.
            dropna (bool, optional):
                    If True, None values are removed from the final list.
            **kwargs:
                    Additional keyword arguments to be passed to `func`.

    Returns:
            list[Any]: The results in input order.

    Examples:
            >>> lcall([1, 2, 3], lambda x: x * 2)
            [2, 4, 6]
            >>> lcall([1, 2, 3], lambda x: x * 2, threads=2)
            [2, 4, 6]
    """
    lst = to_list(input_, flatten=False, dropna=dropna)
    if len(to_list(func)) != 1:
        raise ValueError("There must be one and only one function for list calling.")

    call = functools.partial(func, **kwargs) if kwargs else func
    if threads <= 1 or len(lst) <= 1:
        out = [call(i) for i in lst]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(call, lst))
    if flatten:
        return to_list(out, flatten=True, dropna=dropna)
    return [i for i in out if i is not None] if dropna else out


def scall(
    input_: Any,
    /,
    func: Callable,
    *,
    threads: int = 1,
    label: str = "item",
    **kwargs,
) -> tuple[list[Any], list[tuple[Any, Exception]]]:
    """
    like :func:`lcall` but tolerates per-item failures.

    exceptions raised by ``func`` are logged as warnings and collected instead of
    propagating, which is how batch commands skip bad inputs.

    Returns:
            tuple: (successful results in input order, list of (item, exception)).
    """

    def _safe(item):
        try:
            return True, func(item, **kwargs)
        except Exception as e:  # noqa: BLE001 - reported to the caller
            logging.warning(f"Skipping {label} {item!r}: {e}")
            return False, (item, e)

    results = lcall(input_, _safe, threads=threads)
    ok = [r for flag, r in results if flag]
    failed = [r for flag, r in results if not flag]
    return ok, failed
