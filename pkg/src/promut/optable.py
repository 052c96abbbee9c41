"""The fixed operator table. User-defined operators are not supported."""

INFIX = {
    ":-": (1200, "xfx"),
    ";": (1100, "xfy"),
    "->": (1050, "xfy"),
    ",": (1000, "xfy"),
    "=": (700, "xfx"),
    "\\=": (700, "xfx"),
    "==": (700, "xfx"),
    "\\==": (700, "xfx"),
    "=:=": (700, "xfx"),
    "=\\=": (700, "xfx"),
    "<": (700, "xfx"),
    ">": (700, "xfx"),
    "=<": (700, "xfx"),
    ">=": (700, "xfx"),
    "is": (700, "xfx"),
    "+": (500, "yfx"),
    "-": (500, "yfx"),
    "*": (400, "yfx"),
    "/": (400, "yfx"),
    "mod": (400, "yfx"),
}

PREFIX = {
    "\\+": (900, "fy"),
    "-": (200, "fy"),
}


def infix_args(name: str):
    """(priority, max left priority, max right priority) for an infix operator."""
    prio, kind = INFIX[name]
    left = prio if kind == "yfx" else prio - 1
    right = prio if kind == "xfy" else prio - 1
    return prio, left, right


def prefix_arg(name: str):
    prio, kind = PREFIX[name]
    return prio, (prio if kind == "fy" else prio - 1)


def is_operator(name: str) -> bool:
    return name in INFIX or name in PREFIX
