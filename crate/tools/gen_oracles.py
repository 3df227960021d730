#!/usr/bin/env python3
"""Regenerate the frozen CPython oracle tables under fixtures/oracle/.

The analyzer's tests pin these tables so they run without a Python
interpreter. Re-run this script only when the fixture inputs change, and
commit the refreshed JSON alongside them.
"""

import io
import json
import pathlib
import tokenize

ROOT = pathlib.Path(__file__).resolve().parent.parent
ORACLE = ROOT / "fixtures" / "oracle"
STAR = ROOT / "fixtures" / "star"


def mangled_key(cls_name: str, attr: str) -> str:
    """Observe the attribute key CPython stores for self.<attr> in <cls_name>."""
    src = f"class {cls_name}:\n    def m(self):\n        self.{attr} = 1\n"
    namespace = {}
    exec(src, namespace)
    obj = namespace[cls_name]()
    obj.m()
    return next(iter(vars(obj)))


def gen_mangle_table() -> None:
    classes = ["MyClass", "Widget", "C", "Session2", "HTTPPool", "_Private",
               "__Hidden", "_A_B", "Alpha_beta", "X"]
    attrs = ["__internal", "__x", "__cache_slot", "__a1", "__x_", "__x__y",
             "start", "_x", "x", "__x__"]
    rows = []
    for cls_name in classes:
        for attr in attrs:
            rows.append({"class": cls_name, "attr": attr,
                         "key": mangled_key(cls_name, attr)})
    # Edge cases: underscore-only classes, dunder-exempt shapes, ambiguous
    # splits, long underscore runs.
    edges = [
        ("_", "__x"), ("__", "__x"), ("___", "__x"), ("____", "__value"),
        ("C", "__"), ("C", "___"), ("C", "____"), ("C", "_____"),
        ("C", "__init__"), ("C", "__repr__"), ("A__B", "__x"),
        ("Outer__Inner", "__state"), ("_A__B", "__y"), ("C", "__a_b_c"),
        ("C", "__trailing_"), ("z", "__z"), ("D_", "__x"), ("Trail__", "__x"),
        ("_D_", "__slot"), ("C", "___x"),
    ]
    for cls_name, attr in edges:
        rows.append({"class": cls_name, "attr": attr,
                     "key": mangled_key(cls_name, attr)})
    out = ORACLE / "mangle_oracle.json"
    out.write_text(json.dumps(rows, indent=1) + "\n")
    print(f"wrote {out} ({len(rows)} rows)")


def gen_star_table() -> None:
    import sys
    sys.path.insert(0, str(STAR))
    modules = ["m1", "m2", "m3", "m4", "m5", "m6", "m7", "m8", "m9", "mylib"]
    table = {}
    for mod in modules:
        ns = {}
        exec(f"from {mod} import *", ns)
        names = sorted(k for k in ns if k != "__builtins__")
        table[mod] = names
    out = ORACLE / "star_oracle.json"
    out.write_text(json.dumps(table, indent=1, sort_keys=True) + "\n")
    print(f"wrote {out}")


KIND_MAP = {
    tokenize.NAME: "name",
    tokenize.OP: "op",
    tokenize.NUMBER: "number",
    tokenize.STRING: "string",
    tokenize.NEWLINE: "newline",
    tokenize.INDENT: "indent",
    tokenize.DEDENT: "dedent",
    tokenize.ENDMARKER: "endmarker",
}


def gen_token_table() -> None:
    src_path = ORACLE / "mixed_indent.py"
    kinds = []
    with open(src_path, "rb") as handle:
        for tok in tokenize.tokenize(handle.readline):
            mapped = KIND_MAP.get(tok.type)
            if mapped is not None:
                kinds.append(mapped)
    out = ORACLE / "mixed_indent_tokens.json"
    out.write_text(json.dumps(kinds, indent=1) + "\n")
    print(f"wrote {out} ({len(kinds)} kinds)")


def check_relative_resolution() -> None:
    """Sanity-check relative import resolution on a scratch package."""
    import importlib.util
    base = "pkg.sub.mod"
    package = base.rsplit(".", 1)[0]
    resolved = importlib.util.resolve_name("..x", package)
    print(f"from ..x inside {base} resolves to {resolved}")
    assert resolved == "pkg.x", resolved
    resolved = importlib.util.resolve_name("._core", "mylib")
    print(f"from ._core inside package mylib resolves to {resolved}")
    assert resolved == "mylib._core", resolved


if __name__ == "__main__":
    gen_mangle_table()
    gen_star_table()
    gen_token_table()
    check_relative_resolution()
