from walkssl.libs.sys_util import SysUtil

import walkssl.libs.wk_convert as convert
from walkssl.libs.wk_convert import to_str, to_list, to_dict, to_df
import walkssl.libs.wk_dataframe as dataframe
import walkssl.libs.wk_func_call as func_call
from walkssl.libs.wk_func_call import lcall, scall
import walkssl.libs.wk_nested as nested
from walkssl.libs.wk_nested import nset, flatten, unflatten


__all__ = [
    "SysUtil",
    "convert",
    "func_call",
    "dataframe",
    "nested",
    "to_str",
    "to_list",
    "to_dict",
    "to_df",
    "lcall",
    "scall",
    "nset",
    "flatten",
    "unflatten",
]
