from __future__ import annotations

import dataclasses
import json
from fractions import Fraction
from typing import Type, TYPE_CHECKING

if TYPE_CHECKING:
    from typing import Any, Dict

__all__ = [
    "deserialise_dataclasses",
    "register_dataclass_with_json",
    "ExtendedJsonEncoder",
    "dumps_canonical",
]


####################### UTILITY ############################


def deserialise_dataclasses(dct):
    if "__dataclass__" in dct:
        dataclass_ = ExtendedJsonEncoder.__dataclassses__[dct["__dataclass__"]]
        del dct["__dataclass__"]
        return dataclass_(**{k: v if not isinstance(v, dict) else deserialise_dataclasses(v) for k, v in dct.items()})
    return dct


def register_dataclass_with_json(cls):
    ExtendedJsonEncoder.__dataclassses__[cls.__name__] = cls
    return cls


def dumps_canonical(obj: Any) -> str:
    """
    Dump to the canonical form used for every file the lab writes: sorted keys, two space indent, rationals as
    "p/q" strings, trailing newline.
    """
    return json.dumps(obj, cls=ExtendedJsonEncoder, sort_keys=True, indent=2) + "\n"


####################### JSON ENCODING ############################


JSON_TYPES = [str, int, dict, float, bool, tuple, list, type(None)]


class ExtendedJsonEncoder(json.JSONEncoder):
    """
    Extend the json Encoder to handle dataclass types and exact rationals
    """

    __dataclassses__: Dict[str, Type] = {}

    def default(self, obj):
        """
        Override the base default method to handle rationals and dataclasses
        """
        if isinstance(obj, Fraction):
            return f"{obj.numerator}/{obj.denominator}"
        elif dataclasses.is_dataclass(obj):
            return {
                **dict(__dataclass__=obj.__class__.__name__),
                **{field.name: self.default(getattr(obj, field.name)) for field in dataclasses.fields(obj)},
            }
        elif isinstance(obj, (list, tuple)):
            return [self.default(item) for item in obj]
        elif isinstance(obj, dict):
            return {str(key): self.default(value) for key, value in obj.items()}
        elif type(obj) in JSON_TYPES:
            return obj
        return super(ExtendedJsonEncoder, self).default(obj)
