"""Turn a dataclass of defaults into command-line flags."""

import argparse
import dataclasses
import json


def parse(cls, description):
    parser = argparse.ArgumentParser(description=description)
    for f in dataclasses.fields(cls):
        flag = "--" + f.name.replace("_", "-")
        if f.type in (bool, "bool"):
            parser.add_argument(flag, action=argparse.BooleanOptionalAction, default=f.default)
        elif f.type in (tuple, "tuple", "tuple[int, ...]", "tuple[float, ...]"):
            kind = float if "float" in str(f.type) else int
            parser.add_argument(flag, type=kind, nargs="+", default=f.default)
        else:
            kind = {"int": int, "float": float, "str": str}.get(str(f.type), f.type)
            parser.add_argument(flag, type=kind, default=f.default)
    cfg = cls(**{k: (tuple(v) if isinstance(v, list) else v) for k, v in vars(parser.parse_args()).items()})
    print("config:", json.dumps(dataclasses.asdict(cfg)))
    return cfg
